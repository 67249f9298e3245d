#include "gict/expr.hpp"

#include <algorithm>
#include <cmath>

namespace gict {

namespace {
constexpr double kSimplexTolerance = 1e-9;
constexpr double kCoeffEpsilon = 0.0;  // keep exact zeros out of the map
}  // namespace

void validate_assignment(const ParamSet& params, const ParamAssignment& a) {
    const std::size_t k = params.row_count();
    const std::size_t j = params.outcome_cardinality;
    if (a.pi.size() != k) {
        fail(ErrorKind::Constraint, "assignment has " + std::to_string(a.pi.size()) +
                                        " pi blocks, expected " + std::to_string(k));
    }
    for (std::size_t r = 0; r < k; ++r) {
        if (a.pi[r].size() != j) {
            fail(ErrorKind::Constraint, "pi block " + std::to_string(r) + " has wrong length");
        }
        double sum = 0.0;
        for (double v : a.pi[r]) {
            if (!(v >= -1e-12)) {
                fail(ErrorKind::Constraint, "negative pi component in row " + std::to_string(r));
            }
            sum += v;
        }
        if (std::abs(sum - 1.0) > kSimplexTolerance) {
            fail(ErrorKind::Constraint, "pi block " + std::to_string(r) + " does not sum to 1");
        }
    }
    if (params.mode == Mode::Exact) {
        if (a.u.size() != k) {
            fail(ErrorKind::Constraint, "assignment has " + std::to_string(a.u.size()) +
                                            " mass coordinates, expected " + std::to_string(k));
        }
        for (double v : a.u) {
            if (!(v >= 0.0) || !(v < 1.0)) {
                fail(ErrorKind::Constraint, "mass coordinate u outside [0, 1)");
            }
        }
    }
}

// ---------------------------------------------------------------------------
// Polynomial

Polynomial Polynomial::constant(double value) {
    Polynomial p;
    p.add_term(Monomial{}, value);
    return p;
}

Polynomial Polynomial::symbol(std::size_t row, std::size_t level) {
    Polynomial p;
    p.add_term(Monomial{{{row, level}}}, 1.0);
    return p;
}

void Polynomial::add_term(Monomial m, double coeff) {
    if (coeff == kCoeffEpsilon && !m.is_constant()) return;
    auto [it, inserted] = terms_.emplace(std::move(m), coeff);
    if (!inserted) it->second += coeff;
}

Polynomial& Polynomial::operator+=(const Polynomial& other) {
    for (const auto& [m, c] : other.terms_) add_term(m, c);
    return *this;
}

Polynomial Polynomial::operator+(const Polynomial& other) const {
    Polynomial out = *this;
    out += other;
    return out;
}

Polynomial Polynomial::operator-(const Polynomial& other) const {
    Polynomial out = *this;
    out += other * -1.0;
    return out;
}

Polynomial Polynomial::operator*(double scale) const {
    Polynomial out;
    for (const auto& [m, c] : terms_) out.add_term(m, c * scale);
    return out;
}

Polynomial Polynomial::operator*(const Polynomial& other) const {
    Polynomial out;
    for (const auto& [ma, ca] : terms_) {
        for (const auto& [mb, cb] : other.terms_) {
            Monomial merged;
            merged.factors.reserve(ma.factors.size() + mb.factors.size());
            std::merge(ma.factors.begin(), ma.factors.end(), mb.factors.begin(),
                       mb.factors.end(), std::back_inserter(merged.factors));
            for (std::size_t i = 1; i < merged.factors.size(); ++i) {
                if (merged.factors[i - 1].first == merged.factors[i].first) {
                    fail(ErrorKind::Semantic,
                         "product would be quadratic in zero-row block " +
                             std::to_string(merged.factors[i].first));
                }
            }
            out.add_term(std::move(merged), ca * cb);
        }
    }
    return out;
}

double Polynomial::eval_vertex(std::span<const std::size_t> vertex) const {
    double value = 0.0;
    for (const auto& [m, c] : terms_) {
        bool active = true;
        for (const auto& [row, level] : m.factors) {
            if (vertex[row] != level) {
                active = false;
                break;
            }
        }
        if (active) value += c;
    }
    return value;
}

double Polynomial::eval(const ParamAssignment& a) const {
    double value = 0.0;
    for (const auto& [m, c] : terms_) {
        double term = c;
        for (const auto& [row, level] : m.factors) term *= a.pi[row][level];
        value += term;
    }
    return value;
}

bool Polynomial::is_constant() const {
    for (const auto& [m, c] : terms_) {
        if (!m.is_constant() && c != 0.0) return false;
    }
    return true;
}

double Polynomial::constant_term() const {
    auto it = terms_.find(Monomial{});
    return it == terms_.end() ? 0.0 : it->second;
}

// ---------------------------------------------------------------------------
// Expression tree

namespace exprtree {

ExprPtr constant(double value) {
    auto node = std::make_shared<ExprNode>();
    node->op = ExprNode::Op::Constant;
    node->value = value;
    return node;
}

ExprPtr pi(std::size_t row, std::size_t level) {
    auto node = std::make_shared<ExprNode>();
    node->op = ExprNode::Op::Pi;
    node->row = row;
    node->level = level;
    return node;
}

ExprPtr mass_u(std::size_t row) {
    auto node = std::make_shared<ExprNode>();
    node->op = ExprNode::Op::U;
    node->row = row;
    return node;
}

ExprPtr sum(std::vector<ExprPtr> children) {
    if (children.size() == 1) return children.front();
    auto node = std::make_shared<ExprNode>();
    node->op = ExprNode::Op::Sum;
    node->children = std::move(children);
    return node;
}

ExprPtr product(std::vector<ExprPtr> children) {
    if (children.size() == 1) return children.front();
    auto node = std::make_shared<ExprNode>();
    node->op = ExprNode::Op::Product;
    node->children = std::move(children);
    return node;
}

ExprPtr quotient(ExprPtr numerator, ExprPtr denominator) {
    auto node = std::make_shared<ExprNode>();
    node->op = ExprNode::Op::Quotient;
    node->children = {std::move(numerator), std::move(denominator)};
    return node;
}

double eval(const ExprPtr& node, const ParamAssignment& a) {
    switch (node->op) {
        case ExprNode::Op::Constant:
            return node->value;
        case ExprNode::Op::Pi:
            return a.pi[node->row][node->level];
        case ExprNode::Op::U:
            return a.u[node->row];
        case ExprNode::Op::Sum: {
            double s = 0.0;
            for (const auto& c : node->children) s += eval(c, a);
            return s;
        }
        case ExprNode::Op::Product: {
            double p = 1.0;
            for (const auto& c : node->children) p *= eval(c, a);
            return p;
        }
        case ExprNode::Op::Quotient: {
            double num = eval(node->children[0], a);
            double den = eval(node->children[1], a);
            if (den == 0.0) {
                fail(ErrorKind::Constraint, "expression evaluates a zero denominator");
            }
            return num / den;
        }
    }
    return 0.0;
}

bool is_constant(const ExprPtr& node) {
    switch (node->op) {
        case ExprNode::Op::Constant:
            return true;
        case ExprNode::Op::Pi:
        case ExprNode::Op::U:
            return false;
        default:
            return std::all_of(node->children.begin(), node->children.end(),
                               [](const ExprPtr& c) { return is_constant(c); });
    }
}

}  // namespace exprtree

// ---------------------------------------------------------------------------
// SymbolicExpr

SymbolicExpr SymbolicExpr::perturbation(Polynomial p, std::size_t rows, std::size_t levels) {
    SymbolicExpr e;
    e.mode = Mode::Perturbation;
    e.poly = std::move(p);
    e.rows = rows;
    e.levels = levels;
    return e;
}

SymbolicExpr SymbolicExpr::exact(ExprPtr t, std::size_t rows, std::size_t levels) {
    SymbolicExpr e;
    e.mode = Mode::Exact;
    e.tree = std::move(t);
    e.rows = rows;
    e.levels = levels;
    return e;
}

bool SymbolicExpr::is_constant() const {
    return mode == Mode::Perturbation ? poly.is_constant() : exprtree::is_constant(tree);
}

double SymbolicExpr::constant_value() const {
    if (mode == Mode::Perturbation) return poly.constant_term();
    ParamAssignment empty;
    empty.pi.assign(rows, std::vector<double>(levels, 0.0));
    empty.u.assign(rows, 0.0);
    return exprtree::eval(tree, empty);
}

double SymbolicExpr::eval(const ParamAssignment& a) const {
    return mode == Mode::Perturbation ? poly.eval(a) : exprtree::eval(tree, a);
}

double evaluate(const SymbolicExpr& e, const ParamAssignment& a) {
    ParamSet shape;
    shape.rows.resize(e.rows);
    shape.outcome_cardinality = e.levels;
    shape.mode = e.mode;
    validate_assignment(shape, a);
    return e.eval(a);
}

ParamAssignment vertex_assignment(const SymbolicExpr& e, std::span<const std::size_t> vertex) {
    ParamAssignment a;
    a.pi.assign(e.rows, std::vector<double>(e.levels, 0.0));
    for (std::size_t k = 0; k < e.rows; ++k) a.pi[k][vertex[k]] = 1.0;
    if (e.mode == Mode::Exact) a.u.assign(e.rows, 0.0);
    return a;
}

}  // namespace gict
