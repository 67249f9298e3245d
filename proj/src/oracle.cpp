#include "gict/oracle.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <set>
#include <sstream>

#include "gict/error.hpp"

namespace gict {

namespace {

// Direct evaluation of the query on completed (possibly fractional) cell
// masses. Deliberately independent of the symbolic compile/evaluate path:
// this is the brute-force route the bounds are checked against.
class CompletedTable {
public:
    CompletedTable(const ContingencyTable& t, const std::vector<ZeroRowIndex>& rows,
                   const std::vector<std::vector<double>>& fill)
        : t_(t) {
        cells_.assign(t.counts.begin(), t.counts.end());
        if (rows.size() != fill.size()) {
            fail(ErrorKind::Semantic, "fill-in does not cover the table's zero rows");
        }
        for (std::size_t k = 0; k < rows.size(); ++k) {
            if (fill[k].size() != t.outcome_cardinality()) {
                fail(ErrorKind::Semantic, "fill-in row has wrong outcome arity");
            }
            double row_mass = 0.0;
            for (std::size_t j = 0; j < fill[k].size(); ++j) {
                if (fill[k][j] < 0.0) fail(ErrorKind::Semantic, "negative fill-in mass");
                cells_[t.flat_index(rows[k].coords, j)] += fill[k][j];
                row_mass += fill[k][j];
            }
            if (row_mass <= 0.0) {
                fail(ErrorKind::Semantic,
                     "fill-in leaves zero row " + t.row_label(rows[k].coords) +
                         " empty; the conditional there stays 0/0");
            }
            added_ += row_mass;
        }
    }

    double cell(std::span<const std::size_t> coords, std::size_t j) const {
        return cells_[t_.flat_index(coords, j)];
    }
    double row_total(std::span<const std::size_t> coords) const {
        double sum = 0.0;
        for (std::size_t j = 0; j < t_.outcome_cardinality(); ++j) sum += cell(coords, j);
        return sum;
    }
    double grand_total() const { return static_cast<double>(t_.total) + added_; }

    double query_value(const QuerySpec& q) const {
        switch (q.kind) {
            case QueryKind::Conditional:
                return conditional_value(q);
            case QueryKind::Interventional:
                return interventional_value(q, q.treatment_level,
                                            outcome_index(q.outcome_level));
            case QueryKind::Ate: {
                auto codes = resolve_outcome_codes(t_, q);
                double value = 0.0;
                for (std::size_t y = 0; y < t_.outcome_cardinality(); ++y) {
                    value += codes[y] * (interventional_value(q, q.treatment_hi, y) -
                                         interventional_value(q, q.treatment_lo, y));
                }
                return value;
            }
        }
        return 0.0;
    }

private:
    std::size_t outcome_index(const std::string& level) const {
        auto idx = t_.outcome_var.level_index(level);
        if (!idx) {
            fail(ErrorKind::Semantic, "level '" + level + "' of " + t_.outcome_var.name +
                                          " is outside the observed support");
        }
        return *idx;
    }

    std::size_t condition_position(const std::string& name) const {
        for (std::size_t i = 0; i < t_.condition_vars.size(); ++i) {
            if (t_.condition_vars[i].name == name) return i;
        }
        fail(ErrorKind::Semantic, "variable " + name + " is not a condition of the table");
    }

    double conditional_value(const QuerySpec& q) const {
        std::size_t y = outcome_index(q.outcome_level);
        std::vector<std::pair<std::size_t, std::size_t>> assigned;
        for (const auto& [var, level] : q.conditions) {
            std::size_t pos = condition_position(var);
            auto li = t_.condition_vars[pos].level_index(level);
            if (!li) {
                fail(ErrorKind::Semantic, "level '" + level + "' of " + var +
                                              " is outside the observed support");
            }
            assigned.emplace_back(pos, *li);
        }
        double num = 0.0, den = 0.0;
        for (const auto& row : t_.retained) {
            bool match = std::all_of(assigned.begin(), assigned.end(), [&](const auto& a) {
                return row[a.first] == a.second;
            });
            if (!match) continue;
            num += cell(row, y);
            den += row_total(row);
        }
        if (den == 0.0) {
            fail(ErrorKind::Semantic, "conditional stratum has zero mass after completion");
        }
        return num / den;
    }

    double interventional_value(const QuerySpec& q, const std::string& treatment_level,
                                std::size_t y) const {
        std::size_t pos = condition_position(q.treatment_var);
        auto xi = t_.condition_vars[pos].level_index(treatment_level);
        if (!xi) {
            fail(ErrorKind::Semantic, "level '" + treatment_level + "' of " + q.treatment_var +
                                          " is outside the observed support");
        }
        std::map<std::vector<std::size_t>, double> stratum_mass;
        for (const auto& row : t_.retained) {
            std::vector<std::size_t> z;
            for (std::size_t i = 0; i < row.size(); ++i) {
                if (i != pos) z.push_back(row[i]);
            }
            stratum_mass[z] += row_total(row);
        }
        double value = 0.0;
        for (const auto& [z, mass] : stratum_mass) {
            if (mass == 0.0) continue;
            std::vector<std::size_t> row(t_.condition_count());
            std::size_t zi = 0;
            for (std::size_t i = 0; i < row.size(); ++i) {
                row[i] = (i == pos) ? *xi : z[zi++];
            }
            double rt = row_total(row);
            if (rt == 0.0) {
                fail(ErrorKind::Semantic,
                     "completed table still has an undefined conditional at " + t_.row_label(row));
            }
            value += (cell(row, y) / rt) * (mass / grand_total());
        }
        return value;
    }

    const ContingencyTable& t_;
    std::vector<double> cells_;
    double added_ = 0.0;
};

std::vector<std::vector<double>> to_real_cells(const FillIn& f) {
    std::vector<std::vector<double>> cells;
    for (const auto& row : f.cells) cells.emplace_back(row.begin(), row.end());
    return cells;
}

}  // namespace

void for_each_fillin(std::size_t rows, std::size_t levels, std::int64_t max_count,
                     const std::function<void(const FillIn&)>& fn, std::uint64_t limit) {
    if (max_count < 1) fail(ErrorKind::Semantic, "max_count must be at least 1");
    if (rows == 0) return;

    double total = 1.0;
    const double per_cell = static_cast<double>(max_count) + 1.0;
    for (std::size_t i = 0; i < rows * levels; ++i) {
        total *= per_cell;
        if (total > static_cast<double>(limit)) {
            fail(ErrorKind::Resource, "fill-in enumeration exceeds the configured limit of " +
                                          std::to_string(limit));
        }
    }

    FillIn f;
    f.cells.assign(rows, std::vector<std::int64_t>(levels, 0));
    auto row_positive = [&](std::size_t k) {
        return std::any_of(f.cells[k].begin(), f.cells[k].end(),
                           [](std::int64_t v) { return v > 0; });
    };
    while (true) {
        bool all_positive = true;
        for (std::size_t k = 0; k < rows; ++k) {
            if (!row_positive(k)) {
                all_positive = false;
                break;
            }
        }
        if (all_positive) fn(f);

        // Odometer over cells, last cell fastest: lexicographic order.
        std::size_t k = rows, j = levels;
        bool done = true;
        while (k > 0) {
            --k;
            j = levels;
            while (j > 0) {
                --j;
                if (++f.cells[k][j] <= max_count) {
                    done = false;
                    break;
                }
                f.cells[k][j] = 0;
            }
            if (!done) break;
        }
        if (done) break;
    }
}

std::vector<FillIn> enumerate_fillins(std::size_t rows, std::size_t levels,
                                      std::int64_t max_count, std::uint64_t limit) {
    std::vector<FillIn> out;
    for_each_fillin(rows, levels, max_count, [&](const FillIn& f) { out.push_back(f); }, limit);
    return out;
}

ContingencyTable with_fillin(const ContingencyTable& t, const std::vector<ZeroRowIndex>& rows,
                             const FillIn& f) {
    ContingencyTable out = t;
    if (rows.size() != f.cells.size()) {
        fail(ErrorKind::Semantic, "fill-in does not cover the table's zero rows");
    }
    for (std::size_t k = 0; k < rows.size(); ++k) {
        for (std::size_t j = 0; j < t.outcome_cardinality(); ++j) {
            out.counts[out.flat_index(rows[k].coords, j)] += f.cells[k][j];
            out.total += f.cells[k][j];
        }
    }
    return out;
}

double exact_value(const ContingencyTable& t, const std::vector<ZeroRowIndex>& rows,
                   const FillIn& f, const QuerySpec& q) {
    return CompletedTable(t, rows, to_real_cells(f)).query_value(q);
}

double exact_value_scaled(const ContingencyTable& t, const std::vector<ZeroRowIndex>& rows,
                          const std::vector<std::vector<double>>& cells, const QuerySpec& q) {
    return CompletedTable(t, rows, cells).query_value(q);
}

ContainmentReport check_containment_table(const ContingencyTable& raw, const QuerySpec& q,
                                          const ContainmentOptions& opts) {
    ContingencyTable t = prune_spurious(raw);
    const auto zero_rows = find_zero_rows(t);

    ContainmentReport report;
    report.exact_bounds = bound_table(t, q, Mode::Exact, opts.pipeline.optimizer);
    report.perturbation_bounds = bound_table(t, q, Mode::Perturbation, opts.pipeline.optimizer);

    if (zero_rows.empty()) {
        double value = plug_in(t, q);
        report.observed_min = report.observed_max = value;
        return report;
    }

    const double exact_lo = report.exact_bounds.lower - 1e-6;
    const double exact_hi = report.exact_bounds.upper + 1e-6;
    const double pert_slack = 10.0 * opts.epsilon;
    const double pert_lo = report.perturbation_bounds.lower - pert_slack;
    const double pert_hi = report.perturbation_bounds.upper + pert_slack;

    report.observed_min = std::numeric_limits<double>::infinity();
    report.observed_max = -std::numeric_limits<double>::infinity();

    auto describe_fill = [&](const FillIn& f) {
        std::ostringstream out;
        for (std::size_t k = 0; k < f.cells.size(); ++k) {
            if (k) out << ' ';
            out << t.row_label(zero_rows[k].coords) << "=(";
            for (std::size_t j = 0; j < f.cells[k].size(); ++j) {
                if (j) out << ',';
                out << f.cells[k][j];
            }
            out << ')';
        }
        return out.str();
    };

    for_each_fillin(
        zero_rows.size(), t.outcome_cardinality(), opts.max_count,
        [&](const FillIn& f) {
            ++report.fillins_checked;
            double value = exact_value(t, zero_rows, f, q);
            report.observed_min = std::min(report.observed_min, value);
            report.observed_max = std::max(report.observed_max, value);
            if (value < exact_lo || value > exact_hi) {
                report.violations.push_back("fill-in " + describe_fill(f) + " gives " +
                                            std::to_string(value) +
                                            " outside exact bounds [" +
                                            std::to_string(report.exact_bounds.lower) + ", " +
                                            std::to_string(report.exact_bounds.upper) + "]");
            }

            // Rescale to total mass epsilon * N, fractional cells allowed.
            double mass = 0.0;
            for (const auto& row : f.cells) {
                for (std::int64_t v : row) mass += static_cast<double>(v);
            }
            double scale = opts.epsilon * static_cast<double>(t.total) / mass;
            std::vector<std::vector<double>> scaled(f.cells.size());
            for (std::size_t k = 0; k < f.cells.size(); ++k) {
                for (std::int64_t v : f.cells[k]) {
                    scaled[k].push_back(static_cast<double>(v) * scale);
                }
            }
            double scaled_value = exact_value_scaled(t, zero_rows, scaled, q);
            if (scaled_value < pert_lo || scaled_value > pert_hi) {
                report.violations.push_back(
                    "rescaled fill-in " + describe_fill(f) + " gives " +
                    std::to_string(scaled_value) + " outside perturbation bounds [" +
                    std::to_string(report.perturbation_bounds.lower) + ", " +
                    std::to_string(report.perturbation_bounds.upper) + "] + " +
                    std::to_string(pert_slack));
            }
        },
        opts.pipeline.optimizer.vertex_limit);

    return report;
}

ContainmentReport check_containment(const Dataset& d, const QuerySpec& q,
                                    const ContainmentOptions& opts) {
    Dataset resolved = resolve_missing(d, opts.pipeline.policy);
    std::set<std::string> wanted;
    for (const auto& name : q.condition_variables()) wanted.insert(name);
    std::vector<std::string> conditions;
    for (const auto& var : resolved.schema) {
        if (wanted.count(var.name)) conditions.push_back(var.name);
    }
    ContingencyTable t = build_table(resolved, conditions, q.outcome_var);
    return check_containment_table(t, q, opts);
}

}  // namespace gict
