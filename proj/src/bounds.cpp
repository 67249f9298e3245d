#include "gict/bounds.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <set>

#include "gict/error.hpp"

namespace gict {

namespace {

constexpr double kStepInitial = 0.25;
constexpr double kStepFloor = 1e-6;

struct VertexScan {
    double min_value = 0.0;
    double max_value = 0.0;
    std::vector<std::size_t> arg_min;
    std::vector<std::size_t> arg_max;
};

// Lexicographic enumeration of all J^K vertices; strict comparisons keep the
// lexicographically smallest argument on ties.
VertexScan scan_vertices(const SymbolicExpr& e) {
    VertexScan scan;
    std::vector<std::size_t> vertex(e.rows, 0);
    scan.min_value = scan.max_value = e.poly.eval_vertex(vertex);
    scan.arg_min = scan.arg_max = vertex;
    while (true) {
        std::size_t i = e.rows;
        bool done = true;
        while (i > 0) {
            --i;
            if (++vertex[i] < e.levels) {
                done = false;
                break;
            }
            vertex[i] = 0;
        }
        if (done) break;
        double v = e.poly.eval_vertex(vertex);
        if (v > scan.max_value) {
            scan.max_value = v;
            scan.arg_max = vertex;
        }
        if (v < scan.min_value) {
            scan.min_value = v;
            scan.arg_min = vertex;
        }
    }
    return scan;
}

double checked_vertex_count(std::size_t rows, std::size_t levels, std::uint64_t limit) {
    double count = 1.0;
    for (std::size_t k = 0; k < rows; ++k) {
        count *= static_cast<double>(levels);
        if (count > static_cast<double>(limit)) {
            fail(ErrorKind::Resource,
                 "vertex enumeration needs " + std::to_string(levels) + "^" +
                     std::to_string(rows) + " assignments, above the limit of " +
                     std::to_string(limit) +
                     "; collapse levels or use exact mode with sampling");
        }
    }
    return count;
}

// One uniform point on the (J-1)-simplex (normalized exponentials).
std::vector<double> random_simplex_point(std::mt19937_64& rng, std::size_t j) {
    std::exponential_distribution<double> exp_dist(1.0);
    std::vector<double> p(j);
    double sum = 0.0;
    for (auto& v : p) {
        v = exp_dist(rng);
        sum += v;
    }
    for (auto& v : p) v /= sum;
    return p;
}

struct SearchOutcome {
    double value = 0.0;
    ParamAssignment arg;
};

// Greedy pattern search: at each scale, take the best improving move among
// per-row steps toward each simplex vertex and +- steps on each mass
// coordinate; halve the scale when nothing improves.
SearchOutcome pattern_search(const SymbolicExpr& e, ParamAssignment start, bool maximize,
                             const ExtremizeOptions& opts, std::uint64_t& evals,
                             bool& budget_hit) {
    const double u_cap = 1.0 - kMassLimitDelta;
    auto score = [&](const ParamAssignment& a) {
        ++evals;
        double v = e.eval(a);
        return maximize ? v : -v;
    };

    ParamAssignment x = std::move(start);
    double best = score(x);
    double step = kStepInitial;
    std::size_t iterations = 0;

    while (step >= kStepFloor) {
        if (++iterations > opts.max_iterations) {
            budget_hit = true;
            break;
        }
        double move_best = best;
        ParamAssignment move_arg;
        bool improved = false;

        for (std::size_t k = 0; k < e.rows; ++k) {
            for (std::size_t l = 0; l < e.levels; ++l) {
                ParamAssignment y = x;
                double sum = 0.0;
                for (std::size_t m = 0; m < e.levels; ++m) {
                    y.pi[k][m] *= (1.0 - step);
                    if (m == l) y.pi[k][m] += step;
                    sum += y.pi[k][m];
                }
                for (std::size_t m = 0; m < e.levels; ++m) y.pi[k][m] /= sum;
                double v = score(y);
                if (v > move_best) {
                    move_best = v;
                    move_arg = std::move(y);
                    improved = true;
                }
            }
            if (e.mode == Mode::Exact) {
                for (double dir : {+1.0, -1.0}) {
                    ParamAssignment y = x;
                    y.u[k] = std::clamp(y.u[k] + dir * step, 0.0, u_cap);
                    if (y.u[k] == x.u[k]) continue;
                    double v = score(y);
                    if (v > move_best) {
                        move_best = v;
                        move_arg = std::move(y);
                        improved = true;
                    }
                }
            }
        }

        if (improved) {
            x = std::move(move_arg);
            best = move_best;
        } else {
            step *= 0.5;
        }
    }

    return {maximize ? best : -best, std::move(x)};
}

bool on_mass_limit_face(const ParamAssignment& a) {
    const double face = 1.0 - kMassLimitDelta;
    return std::any_of(a.u.begin(), a.u.end(),
                       [&](double u) { return u >= face - 1e-15; });
}

}  // namespace

BoundsResult extremize_perturbation(const SymbolicExpr& e, const ExtremizeOptions& opts) {
    if (e.mode != Mode::Perturbation) {
        fail(ErrorKind::Semantic, "extremize_perturbation requires a perturbation expression");
    }
    BoundsResult result;
    result.mode = Mode::Perturbation;

    if (e.rows == 0 || e.is_constant()) {
        result.lower = result.upper = e.poly.constant_term();
        result.diagnostics.vertex_count = 1;
        return result;
    }

    double count = checked_vertex_count(e.rows, e.levels, opts.vertex_limit);
    VertexScan scan = scan_vertices(e);
    result.lower = scan.min_value;
    result.upper = scan.max_value;
    result.arg_lower = vertex_assignment(e, scan.arg_min);
    result.arg_upper = vertex_assignment(e, scan.arg_max);
    result.diagnostics.vertex_count = static_cast<std::uint64_t>(count);
    return result;
}

BoundsResult extremize_exact(const SymbolicExpr& e, std::pair<double, double> range,
                             const ExtremizeOptions& opts) {
    if (e.mode != Mode::Exact) {
        fail(ErrorKind::Semantic, "extremize_exact requires an exact-mode expression");
    }
    BoundsResult result;
    result.mode = Mode::Exact;

    if (e.rows == 0 || e.is_constant()) {
        result.lower = result.upper = e.constant_value();
        return result;
    }
    result.diagnostics.certified = false;

    const double u_cap = 1.0 - kMassLimitDelta;
    std::vector<ParamAssignment> starts;

    // Deterministic grid: every pi vertex crossed with u in {0, 0.5, 1-delta}
    // per row, capped by the vertex limit.
    {
        const double u_grid[3] = {0.0, 0.5, u_cap};
        double combos = 1.0;
        for (std::size_t k = 0; k < e.rows; ++k) combos *= static_cast<double>(e.levels) * 3.0;
        if (combos > static_cast<double>(opts.vertex_limit)) {
            result.diagnostics.notes.push_back(
                "deterministic start grid exceeds the vertex limit; truncated");
        }
        std::vector<std::size_t> digit(e.rows, 0);  // base J*3 odometer
        const std::size_t base = e.levels * 3;
        std::uint64_t emitted = 0;
        bool done = false;
        while (!done && emitted < opts.vertex_limit) {
            ParamAssignment a;
            a.pi.assign(e.rows, std::vector<double>(e.levels, 0.0));
            a.u.assign(e.rows, 0.0);
            for (std::size_t k = 0; k < e.rows; ++k) {
                a.pi[k][digit[k] / 3] = 1.0;
                a.u[k] = u_grid[digit[k] % 3];
            }
            starts.push_back(std::move(a));
            ++emitted;
            std::size_t i = e.rows;
            done = true;
            while (i > 0) {
                --i;
                if (++digit[i] < base) {
                    done = false;
                    break;
                }
                digit[i] = 0;
            }
        }
    }

    std::mt19937_64 rng(opts.seed);
    std::uniform_real_distribution<double> u_dist(0.0, u_cap);
    for (std::size_t s = 0; s < opts.random_starts; ++s) {
        ParamAssignment a;
        for (std::size_t k = 0; k < e.rows; ++k) {
            a.pi.push_back(random_simplex_point(rng, e.levels));
            a.u.push_back(u_dist(rng));
        }
        starts.push_back(std::move(a));
    }

    std::uint64_t evals = 0;
    bool budget_hit = false;
    bool have = false;
    SearchOutcome best_max, best_min;
    for (const auto& start : starts) {
        SearchOutcome up = pattern_search(e, start, /*maximize=*/true, opts, evals, budget_hit);
        SearchOutcome down = pattern_search(e, start, /*maximize=*/false, opts, evals, budget_hit);
        if (!have || up.value > best_max.value) best_max = std::move(up);
        if (!have || down.value < best_min.value) best_min = std::move(down);
        have = true;
    }

    result.lower = std::clamp(best_min.value, range.first, range.second);
    result.upper = std::clamp(best_max.value, range.first, range.second);
    result.arg_lower = std::move(best_min.arg);
    result.arg_upper = std::move(best_max.arg);
    result.attained_lower = !on_mass_limit_face(result.arg_lower);
    result.attained_upper = !on_mass_limit_face(result.arg_upper);
    result.diagnostics.start_count = starts.size();
    result.diagnostics.eval_count = evals;
    if (budget_hit) {
        result.diagnostics.notes.push_back(
            "search iteration budget exhausted; bounds are best-found");
    }
    return result;
}

BoundsResult bound_table(const ContingencyTable& t, const QuerySpec& q, Mode mode,
                         const ExtremizeOptions& opts) {
    ContingencyTable pruned = prune_spurious(t);
    Compiled compiled = compile(pruned, q, mode);

    BoundsResult result;
    if (mode == Mode::Perturbation) {
        result = extremize_perturbation(compiled.query, opts);
    } else {
        result = extremize_exact(compiled.query, theoretical_range(pruned, q), opts);
    }
    for (const auto& row : compiled.params.rows) {
        result.diagnostics.zero_rows.push_back(row.label);
    }
    for (const auto& note : compiled.notes) result.diagnostics.notes.push_back(note);
    for (const auto& c : pruned.pruned_combinations) {
        result.diagnostics.notes.push_back("pruned spurious rows: " + c);
    }
    return result;
}

BoundsResult bound_query(const Dataset& d, const QuerySpec& q, Mode mode,
                         const PipelineOptions& opts) {
    Dataset resolved = resolve_missing(d, opts.policy);

    // Condition variables in dataset schema order, regardless of how the
    // query spelled them.
    std::set<std::string> wanted;
    for (const auto& name : q.condition_variables()) wanted.insert(name);
    std::vector<std::string> conditions;
    for (const auto& var : resolved.schema) {
        if (wanted.count(var.name)) conditions.push_back(var.name);
    }
    if (conditions.size() != wanted.size()) {
        for (const auto& name : wanted) {
            if (!resolved.variable_index(name)) {
                fail(ErrorKind::Semantic, "unknown variable: " + name);
            }
        }
    }

    ContingencyTable t = build_table(resolved, conditions, q.outcome_var);
    return bound_table(t, q, mode, opts.optimizer);
}

}  // namespace gict
