#include "gict/query.hpp"

#include <algorithm>
#include <charconv>
#include <map>
#include <set>
#include <sstream>

#include "gict/error.hpp"

namespace gict {

namespace {

std::size_t variable_position(const ContingencyTable& t, const std::string& name) {
    for (std::size_t i = 0; i < t.condition_vars.size(); ++i) {
        if (t.condition_vars[i].name == name) return i;
    }
    fail(ErrorKind::Semantic, "variable " + name + " is not a condition of the table");
}

std::size_t level_or_fail(const VariableSchema& var, const std::string& level) {
    auto idx = var.level_index(level);
    if (!idx) {
        fail(ErrorKind::Semantic, "level '" + level + "' of " + var.name +
                                      " is outside the observed support");
    }
    return *idx;
}

std::optional<double> parse_real(const std::string& text) {
    double value = 0.0;
    const char* begin = text.data();
    const char* end = begin + text.size();
    auto [ptr, ec] = std::from_chars(begin, end, value);
    if (ec != std::errc{} || ptr != end) return std::nullopt;
    return value;
}

// Zero rows keyed by coordinates so that every factor of a compound query
// referencing the same underlying row shares one parameter block.
struct RowParams {
    std::vector<ZeroRowIndex> rows;
    std::map<std::vector<std::size_t>, std::size_t> index_of;
};

RowParams zero_row_params(const ContingencyTable& t) {
    RowParams rp;
    rp.rows = find_zero_rows(t);
    for (std::size_t k = 0; k < rp.rows.size(); ++k) rp.index_of[rp.rows[k].coords] = k;
    return rp;
}

ParamSet make_param_set(const ContingencyTable& t, const RowParams& rp, Mode mode) {
    ParamSet params;
    params.outcome_cardinality = t.outcome_cardinality();
    params.mode = mode;
    for (const auto& row : rp.rows) {
        params.rows.push_back(ZeroRowParam{row.coords, t.row_label(row.coords)});
    }
    return params;
}

// s_k = N * u_k / (1 - u_k)
ExprPtr mass_expr(std::size_t row, double n_total) {
    using namespace exprtree;
    return quotient(product({constant(n_total), mass_u(row)}),
                    sum({constant(1.0), product({constant(-1.0), mass_u(row)})}));
}

struct StratumView {
    std::vector<std::size_t> member_rows;  // indices into t.retained
    std::int64_t observed = 0;
    std::vector<std::size_t> zero_ks;  // parameter indices of zero rows inside
};

// Interventional family: one expression per outcome level at a fixed
// treatment level.
std::vector<SymbolicExpr> compile_interventional(const ContingencyTable& t,
                                                 const RowParams& rp, Mode mode,
                                                 std::size_t treatment_pos,
                                                 std::size_t treatment_level) {
    using namespace exprtree;
    const std::size_t j_card = t.outcome_cardinality();
    const std::size_t k_card = rp.rows.size();
    const double n_total = static_cast<double>(t.total);

    std::vector<std::size_t> adjust_positions;
    for (std::size_t i = 0; i < t.condition_vars.size(); ++i) {
        if (i != treatment_pos) adjust_positions.push_back(i);
    }

    // Strata = distinct adjustment coordinates among retained rows; handles
    // non-rectangular domains left by pruning.
    std::map<std::vector<std::size_t>, StratumView> strata;
    for (std::size_t ri = 0; ri < t.retained.size(); ++ri) {
        std::vector<std::size_t> z;
        for (std::size_t p : adjust_positions) z.push_back(t.retained[ri][p]);
        auto& s = strata[z];
        s.member_rows.push_back(ri);
        s.observed += t.row_total(t.retained[ri]);
        auto it = rp.index_of.find(t.retained[ri]);
        if (it != rp.index_of.end()) s.zero_ks.push_back(it->second);
    }

    ExprPtr total_mass;
    if (mode == Mode::Exact) {
        std::vector<ExprPtr> parts{constant(n_total)};
        for (std::size_t k = 0; k < k_card; ++k) parts.push_back(mass_expr(k, n_total));
        total_mass = sum(std::move(parts));
    }

    std::vector<Polynomial> polys(j_card);
    std::vector<std::vector<ExprPtr>> tree_terms(j_card);

    for (const auto& [z, s] : strata) {
        // Locate the treatment row inside this stratum.
        std::vector<std::size_t> row_coords(t.condition_count());
        for (std::size_t i = 0; i < adjust_positions.size(); ++i) {
            row_coords[adjust_positions[i]] = z[i];
        }
        row_coords[treatment_pos] = treatment_level;
        const bool treatment_retained = t.is_retained(row_coords);
        const double weight = static_cast<double>(s.observed) / n_total;

        if (!treatment_retained) {
            if (s.observed > 0 || !s.zero_ks.empty()) {
                fail(ErrorKind::Semantic,
                     "stratum " + t.row_label(row_coords) +
                         " carries mass but its treatment row was pruned");
            }
            continue;
        }

        auto zk_it = rp.index_of.find(row_coords);
        const bool treatment_is_zero_row = zk_it != rp.index_of.end();
        const std::int64_t treatment_total = t.row_total(row_coords);

        if (mode == Mode::Perturbation) {
            if (weight == 0.0) continue;  // unknown masses drop out of totals
            for (std::size_t y = 0; y < j_card; ++y) {
                if (treatment_is_zero_row) {
                    polys[y] += Polynomial::symbol(zk_it->second, y) * weight;
                } else {
                    double ratio = static_cast<double>(t.cell(row_coords, y)) /
                                   static_cast<double>(treatment_total);
                    polys[y] += Polynomial::constant(ratio * weight);
                }
            }
        } else {
            std::vector<ExprPtr> mass_parts{constant(static_cast<double>(s.observed))};
            for (std::size_t k : s.zero_ks) mass_parts.push_back(mass_expr(k, n_total));
            ExprPtr stratum_weight = quotient(sum(std::move(mass_parts)), total_mass);
            for (std::size_t y = 0; y < j_card; ++y) {
                ExprPtr factor;
                if (treatment_is_zero_row) {
                    factor = pi(zk_it->second, y);
                } else {
                    factor = constant(static_cast<double>(t.cell(row_coords, y)) /
                                      static_cast<double>(treatment_total));
                }
                tree_terms[y].push_back(product({factor, stratum_weight}));
            }
        }
    }

    std::vector<SymbolicExpr> exprs;
    for (std::size_t y = 0; y < j_card; ++y) {
        if (mode == Mode::Perturbation) {
            exprs.push_back(SymbolicExpr::perturbation(std::move(polys[y]), k_card, j_card));
        } else {
            ExprPtr tree = tree_terms[y].empty() ? exprtree::constant(0.0)
                                                 : exprtree::sum(std::move(tree_terms[y]));
            exprs.push_back(SymbolicExpr::exact(std::move(tree), k_card, j_card));
        }
    }
    return exprs;
}

// Conditional family: plain ratio on the conditioning stratum, which may be
// a subset of the condition variables (cells summed over the rest).
std::vector<SymbolicExpr> compile_conditional(const ContingencyTable& t, const RowParams& rp,
                                              Mode mode, const QuerySpec& q,
                                              std::vector<std::string>& notes) {
    using namespace exprtree;
    const std::size_t j_card = t.outcome_cardinality();
    const std::size_t k_card = rp.rows.size();
    const double n_total = static_cast<double>(t.total);

    std::vector<std::pair<std::size_t, std::size_t>> assigned;  // (position, level)
    std::set<std::size_t> seen;
    for (const auto& [var, level] : q.conditions) {
        std::size_t pos = variable_position(t, var);
        if (!seen.insert(pos).second) {
            fail(ErrorKind::Semantic, "variable " + var + " conditioned on twice");
        }
        assigned.emplace_back(pos, level_or_fail(t.condition_vars[pos], level));
    }

    StratumView s;
    std::string stratum_label;
    {
        std::ostringstream lbl;
        lbl << '(';
        for (std::size_t i = 0; i < q.conditions.size(); ++i) {
            if (i) lbl << ", ";
            lbl << q.conditions[i].first << '=' << q.conditions[i].second;
        }
        lbl << ')';
        stratum_label = lbl.str();
    }
    std::vector<std::int64_t> outcome_counts(j_card, 0);
    for (std::size_t ri = 0; ri < t.retained.size(); ++ri) {
        bool match = true;
        for (const auto& [pos, level] : assigned) {
            if (t.retained[ri][pos] != level) {
                match = false;
                break;
            }
        }
        if (!match) continue;
        s.member_rows.push_back(ri);
        s.observed += t.row_total(t.retained[ri]);
        for (std::size_t y = 0; y < j_card; ++y) outcome_counts[y] += t.cell(t.retained[ri], y);
        auto it = rp.index_of.find(t.retained[ri]);
        if (it != rp.index_of.end()) s.zero_ks.push_back(it->second);
    }

    if (s.member_rows.empty()) {
        fail(ErrorKind::Semantic, "conditional probability undefined: stratum " + stratum_label +
                                      " has no retained rows and no parametrization");
    }

    std::vector<SymbolicExpr> exprs;
    if (s.observed > 0) {
        for (std::size_t y = 0; y < j_card; ++y) {
            if (mode == Mode::Perturbation || s.zero_ks.empty()) {
                double ratio =
                    static_cast<double>(outcome_counts[y]) / static_cast<double>(s.observed);
                if (mode == Mode::Perturbation) {
                    exprs.push_back(SymbolicExpr::perturbation(Polynomial::constant(ratio),
                                                               k_card, j_card));
                } else {
                    exprs.push_back(SymbolicExpr::exact(constant(ratio), k_card, j_card));
                }
            } else {
                std::vector<ExprPtr> num{constant(static_cast<double>(outcome_counts[y]))};
                std::vector<ExprPtr> den{constant(static_cast<double>(s.observed))};
                for (std::size_t k : s.zero_ks) {
                    num.push_back(product({mass_expr(k, n_total), pi(k, y)}));
                    den.push_back(mass_expr(k, n_total));
                }
                exprs.push_back(SymbolicExpr::exact(
                    quotient(sum(std::move(num)), sum(std::move(den))), k_card, j_card));
            }
        }
        return exprs;
    }

    // All-zero stratum: defined only through the zero-row parameters.
    if (s.zero_ks.size() == 1) {
        std::size_t k = s.zero_ks.front();
        notes.push_back("conditional on all-zero row " + t.row_label(rp.rows[k].coords) +
                        " is 0/0; the query equals that row's unknown outcome distribution");
        for (std::size_t y = 0; y < j_card; ++y) {
            if (mode == Mode::Perturbation) {
                exprs.push_back(SymbolicExpr::perturbation(Polynomial::symbol(k, y), k_card,
                                                           j_card));
            } else {
                exprs.push_back(SymbolicExpr::exact(pi(k, y), k_card, j_card));
            }
        }
        return exprs;
    }
    fail(ErrorKind::Semantic,
         "conditional probability undefined: stratum " + stratum_label +
             " has zero observed mass across " + std::to_string(s.zero_ks.size()) +
             " parametrized rows; condition on a single row instead");
}

void validate_interventional_vars(const ContingencyTable& t, const QuerySpec& q) {
    std::set<std::string> expected(q.adjustment.begin(), q.adjustment.end());
    if (expected.size() != q.adjustment.size()) {
        fail(ErrorKind::Semantic, "duplicate variable in adjustment set");
    }
    if (expected.count(q.treatment_var)) {
        fail(ErrorKind::Semantic, "treatment variable appears in adjustment set");
    }
    if (q.outcome_var == q.treatment_var ||
        (std::find(q.adjustment.begin(), q.adjustment.end(), q.outcome_var) !=
         q.adjustment.end())) {
        fail(ErrorKind::Semantic, "outcome variable cannot be treatment or adjustment");
    }
    expected.insert(q.treatment_var);
    std::set<std::string> actual;
    for (const auto& var : t.condition_vars) actual.insert(var.name);
    if (expected != actual) {
        fail(ErrorKind::Semantic,
             "adjustment set plus treatment must equal the table's condition variables");
    }
}

}  // namespace

std::vector<std::string> QuerySpec::condition_variables() const {
    std::vector<std::string> vars;
    if (kind == QueryKind::Conditional) {
        for (const auto& [var, level] : conditions) vars.push_back(var);
    } else {
        vars = adjustment;
        vars.push_back(treatment_var);
    }
    return vars;
}

std::string QuerySpec::describe() const {
    std::ostringstream out;
    switch (kind) {
        case QueryKind::Conditional: {
            out << "P(" << outcome_var << '=' << outcome_level << " | ";
            for (std::size_t i = 0; i < conditions.size(); ++i) {
                if (i) out << ", ";
                out << conditions[i].first << '=' << conditions[i].second;
            }
            out << ')';
            break;
        }
        case QueryKind::Interventional: {
            out << "P(" << outcome_var << '=' << outcome_level << " | do(" << treatment_var
                << '=' << treatment_level << ')';
            if (!adjustment.empty()) {
                out << "; adjust=";
                for (std::size_t i = 0; i < adjustment.size(); ++i) {
                    if (i) out << ',';
                    out << adjustment[i];
                }
            }
            out << ')';
            break;
        }
        case QueryKind::Ate: {
            out << "ATE(" << outcome_var << "; " << treatment_var << ": " << treatment_hi
                << " vs " << treatment_lo;
            if (!adjustment.empty()) {
                out << "; adjust=";
                for (std::size_t i = 0; i < adjustment.size(); ++i) {
                    if (i) out << ',';
                    out << adjustment[i];
                }
            }
            out << ')';
            break;
        }
    }
    return out.str();
}

std::vector<double> resolve_outcome_codes(const ContingencyTable& t, const QuerySpec& q) {
    const auto& levels = t.outcome_var.levels;
    std::vector<double> codes(levels.size());
    const std::map<std::string, double>* map = nullptr;
    if (q.outcome_codes) {
        map = &*q.outcome_codes;
    } else if (t.outcome_var.numeric_codes) {
        map = &*t.outcome_var.numeric_codes;
    }
    for (std::size_t j = 0; j < levels.size(); ++j) {
        if (map) {
            auto it = map->find(levels[j]);
            if (it == map->end()) {
                fail(ErrorKind::Semantic,
                     "outcome coding does not cover level '" + levels[j] + "'");
            }
            codes[j] = it->second;
        } else {
            auto value = parse_real(levels[j]);
            if (!value) {
                fail(ErrorKind::Semantic, "outcome level '" + levels[j] +
                                              "' is not numeric; supply a coding map");
            }
            codes[j] = *value;
        }
    }
    return codes;
}

std::pair<double, double> theoretical_range(const ContingencyTable& t, const QuerySpec& q) {
    if (q.kind != QueryKind::Ate) return {0.0, 1.0};
    auto codes = resolve_outcome_codes(t, q);
    double lo = *std::min_element(codes.begin(), codes.end());
    double hi = *std::max_element(codes.begin(), codes.end());
    return {lo - hi, hi - lo};
}

Compiled compile(const ContingencyTable& t, const QuerySpec& q, Mode mode) {
    Compiled result;
    result.mode = mode;

    if (q.outcome_var != t.outcome_var.name) {
        fail(ErrorKind::Semantic, "query outcome " + q.outcome_var +
                                      " does not match the table outcome " + t.outcome_var.name);
    }

    RowParams rp = zero_row_params(t);
    result.params = make_param_set(t, rp, mode);
    const std::size_t j_card = t.outcome_cardinality();
    const std::size_t k_card = rp.rows.size();

    switch (q.kind) {
        case QueryKind::Conditional: {
            if (q.conditions.empty()) {
                fail(ErrorKind::Semantic, "conditional query needs at least one assignment");
            }
            std::size_t y = level_or_fail(t.outcome_var, q.outcome_level);
            result.outcome_exprs = compile_conditional(t, rp, mode, q, result.notes);
            result.query = result.outcome_exprs[y];
            break;
        }
        case QueryKind::Interventional: {
            validate_interventional_vars(t, q);
            std::size_t pos = variable_position(t, q.treatment_var);
            std::size_t x = level_or_fail(t.condition_vars[pos], q.treatment_level);
            std::size_t y = level_or_fail(t.outcome_var, q.outcome_level);
            result.outcome_exprs = compile_interventional(t, rp, mode, pos, x);
            result.query = result.outcome_exprs[y];
            break;
        }
        case QueryKind::Ate: {
            validate_interventional_vars(t, q);
            std::size_t pos = variable_position(t, q.treatment_var);
            std::size_t hi = level_or_fail(t.condition_vars[pos], q.treatment_hi);
            std::size_t lo = level_or_fail(t.condition_vars[pos], q.treatment_lo);
            auto codes = resolve_outcome_codes(t, q);
            auto hi_exprs = compile_interventional(t, rp, mode, pos, hi);
            auto lo_exprs = compile_interventional(t, rp, mode, pos, lo);
            if (mode == Mode::Perturbation) {
                Polynomial ate;
                for (std::size_t y = 0; y < j_card; ++y) {
                    ate += (hi_exprs[y].poly - lo_exprs[y].poly) * codes[y];
                }
                result.query = SymbolicExpr::perturbation(std::move(ate), k_card, j_card);
            } else {
                std::vector<ExprPtr> terms;
                for (std::size_t y = 0; y < j_card; ++y) {
                    terms.push_back(exprtree::product(
                        {exprtree::constant(codes[y]), hi_exprs[y].tree}));
                    terms.push_back(exprtree::product(
                        {exprtree::constant(-codes[y]), lo_exprs[y].tree}));
                }
                result.query =
                    SymbolicExpr::exact(exprtree::sum(std::move(terms)), k_card, j_card);
            }
            break;
        }
    }
    return result;
}

double plug_in(const ContingencyTable& t, const QuerySpec& q) {
    if (is_gict(t)) {
        fail(ErrorKind::Semantic,
             "table has all-zero rows; use the bounding pipeline instead of a point estimate");
    }
    switch (q.kind) {
        case QueryKind::Conditional: {
            std::size_t y = level_or_fail(t.outcome_var, q.outcome_level);
            std::vector<std::pair<std::size_t, std::size_t>> assigned;
            for (const auto& [var, level] : q.conditions) {
                std::size_t pos = variable_position(t, var);
                assigned.emplace_back(pos, level_or_fail(t.condition_vars[pos], level));
            }
            std::int64_t num = 0, den = 0;
            for (const auto& row : t.retained) {
                bool match = std::all_of(assigned.begin(), assigned.end(), [&](const auto& a) {
                    return row[a.first] == a.second;
                });
                if (!match) continue;
                num += t.cell(row, y);
                den += t.row_total(row);
            }
            if (den == 0) {
                fail(ErrorKind::Semantic, "conditional probability undefined: stratum has "
                                          "no retained rows and no parametrization");
            }
            return static_cast<double>(num) / static_cast<double>(den);
        }
        case QueryKind::Interventional: {
            validate_interventional_vars(t, q);
            std::size_t pos = variable_position(t, q.treatment_var);
            std::size_t x = level_or_fail(t.condition_vars[pos], q.treatment_level);
            std::size_t y = level_or_fail(t.outcome_var, q.outcome_level);

            std::map<std::vector<std::size_t>, std::int64_t> stratum_mass;
            for (const auto& row : t.retained) {
                std::vector<std::size_t> z;
                for (std::size_t i = 0; i < row.size(); ++i) {
                    if (i != pos) z.push_back(row[i]);
                }
                stratum_mass[z] += t.row_total(row);
            }
            double value = 0.0;
            for (const auto& [z, mass] : stratum_mass) {
                if (mass == 0) continue;
                std::vector<std::size_t> row(t.condition_count());
                std::size_t zi = 0;
                for (std::size_t i = 0; i < row.size(); ++i) {
                    row[i] = (i == pos) ? x : z[zi++];
                }
                if (!t.is_retained(row)) {
                    fail(ErrorKind::Semantic, "stratum " + t.row_label(row) +
                                                  " carries mass but its treatment row was pruned");
                }
                std::int64_t row_total = t.row_total(row);
                value += (static_cast<double>(t.cell(row, y)) / static_cast<double>(row_total)) *
                         (static_cast<double>(mass) / static_cast<double>(t.total));
            }
            return value;
        }
        case QueryKind::Ate: {
            auto codes = resolve_outcome_codes(t, q);
            double value = 0.0;
            QuerySpec sub = q;
            sub.kind = QueryKind::Interventional;
            for (std::size_t y = 0; y < t.outcome_cardinality(); ++y) {
                sub.outcome_level = t.outcome_var.levels[y];
                sub.treatment_level = q.treatment_hi;
                double hi = plug_in(t, sub);
                sub.treatment_level = q.treatment_lo;
                double lo = plug_in(t, sub);
                value += codes[y] * (hi - lo);
            }
            return value;
        }
    }
    return 0.0;
}

}  // namespace gict
