#pragma once

// Independent brute-force verifier. Enumerates concrete integer fill-ins of
// the all-zero rows, computes the query directly on the completed table (no
// symbolic machinery), and checks containment in reported bounds.

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "gict/bounds.hpp"
#include "gict/contingency.hpp"
#include "gict/query.hpp"

namespace gict {

// Per zero row, nonnegative counts per outcome level; every row has at
// least one positive entry.
struct FillIn {
    std::vector<std::vector<std::int64_t>> cells;
};

// All fill-ins with each cell in {0..max_count} and positive per-row totals,
// lexicographic order. Throws ErrorKind::Resource past `limit` tuples.
void for_each_fillin(std::size_t rows, std::size_t levels, std::int64_t max_count,
                     const std::function<void(const FillIn&)>& fn,
                     std::uint64_t limit = 1'000'000);
std::vector<FillIn> enumerate_fillins(std::size_t rows, std::size_t levels,
                                      std::int64_t max_count,
                                      std::uint64_t limit = 1'000'000);

// Completed table with zero-row cells replaced by the fill-in.
ContingencyTable with_fillin(const ContingencyTable& t, const std::vector<ZeroRowIndex>& rows,
                             const FillIn& f);

// Query value on the completed table, evaluated directly from counts.
double exact_value(const ContingencyTable& t, const std::vector<ZeroRowIndex>& rows,
                   const FillIn& f, const QuerySpec& q);

// Same, with fractional cell masses (used for the epsilon-rescaled regime).
double exact_value_scaled(const ContingencyTable& t, const std::vector<ZeroRowIndex>& rows,
                          const std::vector<std::vector<double>>& cells, const QuerySpec& q);

struct ContainmentOptions {
    std::int64_t max_count = 3;
    double epsilon = 1e-3;
    PipelineOptions pipeline;
};

struct ContainmentReport {
    std::vector<std::string> violations;
    double observed_min = 0.0;
    double observed_max = 0.0;
    std::uint64_t fillins_checked = 0;
    BoundsResult exact_bounds;
    BoundsResult perturbation_bounds;

    bool passed() const { return violations.empty(); }
};

// Runs bound_query in both modes, then asserts for every fill-in that the
// completed-table value lies within the exact bounds (+-1e-6) and that its
// epsilon-rescaled version lies within the perturbation bounds (+-10*eps).
ContainmentReport check_containment(const Dataset& d, const QuerySpec& q,
                                    const ContainmentOptions& opts = {});
ContainmentReport check_containment_table(const ContingencyTable& t, const QuerySpec& q,
                                          const ContainmentOptions& opts = {});

}  // namespace gict
