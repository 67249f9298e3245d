#pragma once

// Query representation and symbolic compilation. An interventional query
// P(Y=y | do(X=x)) with adjustment set Z compiles, per outcome level, to
//   sum over strata z of  P(Y=y | X=x, Z=z) * P(Z=z)
// where the conditional factor at an all-zero row becomes that row's pi
// symbol. Perturbation mode drops unknown masses from every total; exact
// mode carries them through the stratum and grand totals.

#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "gict/contingency.hpp"
#include "gict/expr.hpp"

namespace gict {

enum class QueryKind { Conditional, Interventional, Ate };

struct QuerySpec {
    QueryKind kind = QueryKind::Conditional;

    std::string outcome_var;
    std::string outcome_level;  // conditional / interventional
    // ATE outcome coding; when absent, the outcome schema's numeric_codes
    // apply, else level labels are parsed as reals.
    std::optional<std::map<std::string, double>> outcome_codes;

    std::string treatment_var;
    std::string treatment_level;              // interventional
    std::string treatment_hi, treatment_lo;   // ate

    std::vector<std::string> adjustment;  // interventional / ate

    // Conditional kind: conditioning assignments, possibly a subset of the
    // table's condition variables.
    std::vector<std::pair<std::string, std::string>> conditions;

    // Variables the contingency table must condition on.
    std::vector<std::string> condition_variables() const;
    std::string describe() const;
};

struct Compiled {
    Mode mode = Mode::Perturbation;
    ParamSet params;
    // One expression per outcome level, sharing the query's treatment level
    // (or conditioning stratum). Empty for ATE.
    std::vector<SymbolicExpr> outcome_exprs;
    SymbolicExpr query;
    std::vector<std::string> notes;
};

// Expects a pruned table. Throws ErrorKind::Semantic on levels outside the
// support and on conditioning strata that carry neither observed mass nor a
// single parametrized zero row.
Compiled compile(const ContingencyTable& t, const QuerySpec& q, Mode mode);

// Point estimate on a fully observed table; requires is_gict(t) == false.
double plug_in(const ContingencyTable& t, const QuerySpec& q);

// Numeric coding per outcome level index, for ATE queries.
std::vector<double> resolve_outcome_codes(const ContingencyTable& t, const QuerySpec& q);

// [0,1] for probability queries; code-difference range for ATE.
std::pair<double, double> theoretical_range(const ContingencyTable& t, const QuerySpec& q);

// Query mini-language:
//   P(O=1 | do(H=0); adjust=A)
//   P(O=1 | H=0, A=1)
//   ATE(O; H: 1 vs 0; adjust=A)
QuerySpec parse_query(std::string_view text);

}  // namespace gict
