#pragma once

// Contingency tables over condition-variable level combinations x outcome
// levels. A table keeps, besides the dense count tensor, the set of retained
// condition rows: spurious-zero pruning deletes whole combinations, which
// leaves a non-rectangular domain.

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "gict/dataset.hpp"

namespace gict {

// Coordinates (level indices, one per condition variable) of a row whose
// outcome cells are all zero.
struct ZeroRowIndex {
    std::vector<std::size_t> coords;

    bool operator==(const ZeroRowIndex& other) const { return coords == other.coords; }
};

struct ContingencyTable {
    std::vector<VariableSchema> condition_vars;
    VariableSchema outcome_var;
    std::vector<std::int64_t> counts;  // dense, row-major over condition coords then outcome
    std::int64_t total = 0;
    // Retained condition rows, lexicographically sorted coordinate tuples.
    // Tables built from a dataset retain the full cross product.
    std::vector<std::vector<std::size_t>> retained;

    // Filled by prune_spurious.
    std::vector<std::string> pruned_combinations;
    std::vector<std::string> removed_levels;

    std::size_t outcome_cardinality() const { return outcome_var.levels.size(); }
    std::size_t condition_count() const { return condition_vars.size(); }

    std::size_t flat_index(std::span<const std::size_t> coords, std::size_t outcome) const;
    std::int64_t cell(std::span<const std::size_t> coords, std::size_t outcome) const;
    std::int64_t row_total(std::span<const std::size_t> coords) const;
    bool is_retained(std::span<const std::size_t> coords) const;

    // "(Age=16, Gender=1)"
    std::string row_label(std::span<const std::size_t> coords) const;
};

// counts[i1..in, j] = number of records with that level combination.
ContingencyTable build_table(const Dataset& d, const std::vector<std::string>& conditions,
                             const std::string& outcome);

// Repeatedly deletes, for some variable r and a fixed combination of the
// other variables, all rows over r's levels when every such cell is zero;
// returns the fixed point. Levels no retained row uses are dropped from the
// schema and recorded in removed_levels.
ContingencyTable prune_spurious(const ContingencyTable& t);

// All retained rows whose outcome cells are all zero, lexicographic order.
// Expects a pruned table.
std::vector<ZeroRowIndex> find_zero_rows(const ContingencyTable& t);

inline bool is_gict(const ContingencyTable& t) { return !find_zero_rows(t).empty(); }

}  // namespace gict
