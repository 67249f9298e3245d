#pragma once

// Symbolic query expressions over observed counts and unknown-row
// parameters. Each all-zero row k carries an unknown outcome distribution
// pi_k on the (J-1)-simplex; in exact mode it additionally carries a mass
// coordinate u_k in [0,1) encoding the unknown row total s_k = N*u_k/(1-u_k),
// so extremes at unbounded mass become boundary evaluations.
//
// Perturbation mode stores a multilinear polynomial (monomial -> coefficient,
// at most one symbol per row in a monomial). Exact mode stores an expression
// tree over {constant, pi, u, sum, product, quotient}.

#include <cstddef>
#include <map>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include "gict/error.hpp"

namespace gict {

enum class Mode { Perturbation, Exact };

inline const char* mode_name(Mode m) {
    return m == Mode::Perturbation ? "perturbation" : "exact";
}

// u = 1 is evaluated as a limit by stepping to 1 - kMassLimitDelta.
inline constexpr double kMassLimitDelta = 1e-9;

struct ZeroRowParam {
    std::vector<std::size_t> coords;  // condition coordinates of the zero row
    std::string label;                // "(A=0, H=0)"
};

struct ParamSet {
    std::vector<ZeroRowParam> rows;
    std::size_t outcome_cardinality = 0;
    Mode mode = Mode::Perturbation;

    std::size_t row_count() const { return rows.size(); }
    bool empty() const { return rows.empty(); }
};

// pi[k] is a probability vector of length J; u is per-row mass (exact mode
// only, empty otherwise).
struct ParamAssignment {
    std::vector<std::vector<double>> pi;
    std::vector<double> u;
};

// Throws ErrorKind::Constraint unless every pi[k] is simplex-feasible and
// every u[k] lies in [0, 1).
void validate_assignment(const ParamSet& params, const ParamAssignment& a);

// ---------------------------------------------------------------------------
// Perturbation payload: multilinear polynomial.

struct Monomial {
    // (row k, outcome level l) symbols, sorted by row, rows unique.
    std::vector<std::pair<std::size_t, std::size_t>> factors;

    bool operator<(const Monomial& other) const { return factors < other.factors; }
    bool operator==(const Monomial& other) const { return factors == other.factors; }
    bool is_constant() const { return factors.empty(); }
};

class Polynomial {
public:
    Polynomial() = default;
    static Polynomial constant(double value);
    static Polynomial symbol(std::size_t row, std::size_t level);

    Polynomial& operator+=(const Polynomial& other);
    Polynomial operator+(const Polynomial& other) const;
    Polynomial operator-(const Polynomial& other) const;
    Polynomial operator*(double scale) const;
    // Throws if any product term would carry two symbols from the same row.
    Polynomial operator*(const Polynomial& other) const;

    // Value at a vertex assignment: row k fixed to outcome level vertex[k].
    double eval_vertex(std::span<const std::size_t> vertex) const;
    double eval(const ParamAssignment& a) const;

    bool is_constant() const;
    double constant_term() const;
    const std::map<Monomial, double>& terms() const { return terms_; }

private:
    void add_term(Monomial m, double coeff);
    std::map<Monomial, double> terms_;
};

// ---------------------------------------------------------------------------
// Exact payload: expression tree.

struct ExprNode;
using ExprPtr = std::shared_ptr<const ExprNode>;

struct ExprNode {
    enum class Op { Constant, Pi, U, Sum, Product, Quotient };
    Op op = Op::Constant;
    double value = 0.0;          // Constant
    std::size_t row = 0;         // Pi, U
    std::size_t level = 0;       // Pi
    std::vector<ExprPtr> children;
};

namespace exprtree {
ExprPtr constant(double value);
ExprPtr pi(std::size_t row, std::size_t level);
ExprPtr mass_u(std::size_t row);
ExprPtr sum(std::vector<ExprPtr> children);
ExprPtr product(std::vector<ExprPtr> children);
ExprPtr quotient(ExprPtr numerator, ExprPtr denominator);
double eval(const ExprPtr& node, const ParamAssignment& a);
bool is_constant(const ExprPtr& node);
}  // namespace exprtree

// ---------------------------------------------------------------------------

struct SymbolicExpr {
    Mode mode = Mode::Perturbation;
    Polynomial poly;   // perturbation payload
    ExprPtr tree;      // exact payload
    std::size_t rows = 0;    // K, number of zero-row parameter blocks
    std::size_t levels = 0;  // J, outcome cardinality

    static SymbolicExpr perturbation(Polynomial p, std::size_t rows, std::size_t levels);
    static SymbolicExpr exact(ExprPtr t, std::size_t rows, std::size_t levels);

    bool is_constant() const;
    double constant_value() const;

    // Unchecked evaluation; callers with external assignments should go
    // through evaluate() below.
    double eval(const ParamAssignment& a) const;
};

// Feasibility-checked evaluation.
double evaluate(const SymbolicExpr& e, const ParamAssignment& a);

// pi[k] = basis vector of vertex[k]; u all zero in exact mode.
ParamAssignment vertex_assignment(const SymbolicExpr& e, std::span<const std::size_t> vertex);

}  // namespace gict
