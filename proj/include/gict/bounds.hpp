#pragma once

// Extremization of compiled query expressions over all feasible parameter
// assignments, and the end-to-end bounding pipeline.
//
// Perturbation mode: a multilinear polynomial over a product of simplices
// attains its extrema at vertices, so bounds come from exact enumeration of
// all J^K basis-vector assignments. Exact mode: multi-start derivative-free
// coordinate search over the compactified domain (pi on simplices, u in
// [0, 1-delta]); results are best-found, not certified.

#include <cstdint>
#include <string>
#include <vector>

#include "gict/dataset.hpp"
#include "gict/query.hpp"

namespace gict {

struct ExtremizeOptions {
    std::uint64_t vertex_limit = 1'000'000;
    std::size_t random_starts = 32;
    std::uint64_t seed = 0;
    std::size_t max_iterations = 20'000;  // pattern-search iterations per start
};

struct Diagnostics {
    std::vector<std::string> zero_rows;
    std::uint64_t vertex_count = 0;   // perturbation
    std::uint64_t start_count = 0;    // exact
    std::uint64_t eval_count = 0;     // exact
    bool certified = true;
    std::vector<std::string> notes;
};

struct BoundsResult {
    double lower = 0.0;
    double upper = 0.0;
    ParamAssignment arg_lower;
    ParamAssignment arg_upper;
    bool attained_lower = true;
    bool attained_upper = true;
    Mode mode = Mode::Perturbation;
    Diagnostics diagnostics;
};

// Exact global bounds by vertex enumeration; ties resolved toward the
// lexicographically smallest vertex. Throws ErrorKind::Resource when J^K
// exceeds opts.vertex_limit.
BoundsResult extremize_perturbation(const SymbolicExpr& e, const ExtremizeOptions& opts = {});

// Heuristic global search; bounds are clipped to `range` and flagged
// non-attained when the extremum sits on the u = 1-delta face.
BoundsResult extremize_exact(const SymbolicExpr& e, std::pair<double, double> range,
                             const ExtremizeOptions& opts = {});

struct PipelineOptions {
    MissingPolicy policy;  // defaults to delete_rows
    ExtremizeOptions optimizer;
};

// resolve_missing -> build_table -> prune_spurious -> find_zero_rows ->
// compile -> extremize.
BoundsResult bound_query(const Dataset& d, const QuerySpec& q, Mode mode,
                         const PipelineOptions& opts = {});

// Same pipeline from a raw table (starts at prune_spurious).
BoundsResult bound_table(const ContingencyTable& t, const QuerySpec& q, Mode mode,
                         const ExtremizeOptions& opts = {});

}  // namespace gict
