#include "gict/contingency.hpp"

#include <algorithm>
#include <map>
#include <numeric>
#include <sstream>

#include "gict/error.hpp"

namespace gict {

namespace {

constexpr std::size_t kMaxDenseCells = 100'000'000;

std::vector<std::vector<std::size_t>> full_cross_product(
    const std::vector<VariableSchema>& vars) {
    std::vector<std::vector<std::size_t>> rows;
    std::vector<std::size_t> coords(vars.size(), 0);
    while (true) {
        rows.push_back(coords);
        std::size_t i = vars.size();
        while (i > 0) {
            --i;
            if (++coords[i] < vars[i].levels.size()) break;
            coords[i] = 0;
            if (i == 0) return rows;
        }
    }
}

std::string combination_label(const std::vector<VariableSchema>& vars,
                              const std::vector<std::size_t>& positions,
                              const std::vector<std::size_t>& coords) {
    std::ostringstream out;
    for (std::size_t i = 0; i < positions.size(); ++i) {
        if (i) out << ", ";
        const auto& var = vars[positions[i]];
        out << var.name << '=' << var.levels[coords[i]];
    }
    return out.str();
}

}  // namespace

std::size_t ContingencyTable::flat_index(std::span<const std::size_t> coords,
                                         std::size_t outcome) const {
    std::size_t idx = 0;
    for (std::size_t i = 0; i < condition_vars.size(); ++i) {
        idx = idx * condition_vars[i].levels.size() + coords[i];
    }
    return idx * outcome_cardinality() + outcome;
}

std::int64_t ContingencyTable::cell(std::span<const std::size_t> coords,
                                    std::size_t outcome) const {
    return counts[flat_index(coords, outcome)];
}

std::int64_t ContingencyTable::row_total(std::span<const std::size_t> coords) const {
    std::int64_t sum = 0;
    for (std::size_t j = 0; j < outcome_cardinality(); ++j) sum += cell(coords, j);
    return sum;
}

bool ContingencyTable::is_retained(std::span<const std::size_t> coords) const {
    std::vector<std::size_t> key(coords.begin(), coords.end());
    return std::binary_search(retained.begin(), retained.end(), key);
}

std::string ContingencyTable::row_label(std::span<const std::size_t> coords) const {
    std::ostringstream out;
    out << '(';
    for (std::size_t i = 0; i < condition_vars.size(); ++i) {
        if (i) out << ", ";
        out << condition_vars[i].name << '=' << condition_vars[i].levels[coords[i]];
    }
    out << ')';
    return out.str();
}

ContingencyTable build_table(const Dataset& d, const std::vector<std::string>& conditions,
                             const std::string& outcome) {
    if (conditions.empty()) fail(ErrorKind::Semantic, "conditions must be non-empty");
    if (d.has_missing()) {
        fail(ErrorKind::Semantic, "table construction requires a resolved dataset");
    }
    for (const auto& c : conditions) {
        if (c == outcome) fail(ErrorKind::Semantic, "outcome variable also appears in conditions");
        if (std::count(conditions.begin(), conditions.end(), c) > 1) {
            fail(ErrorKind::Semantic, "duplicate condition variable: " + c);
        }
    }

    ContingencyTable t;
    std::vector<std::size_t> cond_idx;
    for (const auto& name : conditions) {
        auto vi = d.variable_index(name);
        if (!vi) fail(ErrorKind::Semantic, "unknown variable: " + name);
        cond_idx.push_back(*vi);
        t.condition_vars.push_back(d.schema[*vi]);
    }
    auto oi = d.variable_index(outcome);
    if (!oi) fail(ErrorKind::Semantic, "unknown variable: " + outcome);
    t.outcome_var = d.schema[*oi];

    std::size_t cells = t.outcome_cardinality();
    for (const auto& var : t.condition_vars) {
        if (var.levels.empty()) fail(ErrorKind::Semantic, "variable " + var.name + " has no levels");
        if (cells > kMaxDenseCells / var.levels.size()) {
            fail(ErrorKind::Resource, "contingency table too large");
        }
        cells *= var.levels.size();
    }
    t.counts.assign(cells, 0);

    std::vector<std::size_t> coords(conditions.size());
    for (const auto& rec : d.records) {
        for (std::size_t i = 0; i < cond_idx.size(); ++i) {
            coords[i] = *t.condition_vars[i].level_index(*rec.values[cond_idx[i]]);
        }
        std::size_t j = *t.outcome_var.level_index(*rec.values[*oi]);
        ++t.counts[t.flat_index(coords, j)];
    }
    t.total = static_cast<std::int64_t>(d.row_count());
    t.retained = full_cross_product(t.condition_vars);
    return t;
}

ContingencyTable prune_spurious(const ContingencyTable& t) {
    ContingencyTable out = t;
    const std::size_t n = out.condition_count();

    // Fixed point of: delete all rows over variable r's levels for a fixed
    // combination of the other variables when every such retained cell is 0.
    bool changed = true;
    while (changed) {
        changed = false;
        for (std::size_t r = 0; r < n && !changed; ++r) {
            std::vector<std::size_t> other_positions;
            for (std::size_t i = 0; i < n; ++i) {
                if (i != r) other_positions.push_back(i);
            }
            // Group retained rows by their coordinates outside r.
            std::map<std::vector<std::size_t>, std::vector<std::size_t>> groups;
            for (std::size_t ri = 0; ri < out.retained.size(); ++ri) {
                std::vector<std::size_t> key;
                for (std::size_t p : other_positions) key.push_back(out.retained[ri][p]);
                groups[key].push_back(ri);
            }
            std::vector<bool> drop(out.retained.size(), false);
            for (const auto& [key, members] : groups) {
                bool all_zero = true;
                for (std::size_t ri : members) {
                    if (out.row_total(out.retained[ri]) != 0) {
                        all_zero = false;
                        break;
                    }
                }
                if (!all_zero) continue;
                for (std::size_t ri : members) drop[ri] = true;
                if (!other_positions.empty()) {
                    out.pruned_combinations.push_back(
                        combination_label(out.condition_vars, other_positions, key));
                } else {
                    out.pruned_combinations.push_back("(all rows of " +
                                                      out.condition_vars[r].name + ")");
                }
                changed = true;
            }
            if (changed) {
                std::vector<std::vector<std::size_t>> kept;
                for (std::size_t ri = 0; ri < out.retained.size(); ++ri) {
                    if (!drop[ri]) kept.push_back(out.retained[ri]);
                }
                out.retained = std::move(kept);
            }
        }
    }

    if (out.retained.empty()) {
        fail(ErrorKind::Semantic, "all rows are spurious zeros; table is empty after pruning");
    }

    // Drop levels no retained row uses and reindex the tensor.
    std::vector<std::vector<std::size_t>> level_map(n);
    std::vector<VariableSchema> new_vars = out.condition_vars;
    bool any_removed = false;
    for (std::size_t i = 0; i < n; ++i) {
        std::vector<bool> used(out.condition_vars[i].levels.size(), false);
        for (const auto& row : out.retained) used[row[i]] = true;
        level_map[i].assign(used.size(), SIZE_MAX);
        std::vector<std::string> kept_levels;
        for (std::size_t l = 0; l < used.size(); ++l) {
            if (used[l]) {
                level_map[i][l] = kept_levels.size();
                kept_levels.push_back(out.condition_vars[i].levels[l]);
            } else {
                out.removed_levels.push_back(out.condition_vars[i].name + '=' +
                                             out.condition_vars[i].levels[l]);
                any_removed = true;
            }
        }
        new_vars[i].levels = std::move(kept_levels);
    }

    if (any_removed) {
        ContingencyTable rebuilt;
        rebuilt.condition_vars = std::move(new_vars);
        rebuilt.outcome_var = out.outcome_var;
        std::size_t cells = rebuilt.outcome_cardinality();
        for (const auto& var : rebuilt.condition_vars) cells *= var.levels.size();
        rebuilt.counts.assign(cells, 0);
        for (const auto& row : out.retained) {
            std::vector<std::size_t> mapped(n);
            for (std::size_t i = 0; i < n; ++i) mapped[i] = level_map[i][row[i]];
            for (std::size_t j = 0; j < out.outcome_cardinality(); ++j) {
                rebuilt.counts[rebuilt.flat_index(mapped, j)] = out.cell(row, j);
            }
            rebuilt.retained.push_back(std::move(mapped));
        }
        std::sort(rebuilt.retained.begin(), rebuilt.retained.end());
        rebuilt.total = std::accumulate(rebuilt.counts.begin(), rebuilt.counts.end(),
                                        std::int64_t{0});
        rebuilt.pruned_combinations = std::move(out.pruned_combinations);
        rebuilt.removed_levels = std::move(out.removed_levels);
        return rebuilt;
    }

    out.total = 0;
    for (const auto& row : out.retained) out.total += out.row_total(row);
    return out;
}

std::vector<ZeroRowIndex> find_zero_rows(const ContingencyTable& t) {
    std::vector<ZeroRowIndex> rows;
    for (const auto& coords : t.retained) {
        if (t.row_total(coords) == 0) rows.push_back(ZeroRowIndex{coords});
    }
    return rows;  // retained is lexicographically sorted
}

}  // namespace gict
