#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "gict/error.hpp"
#include "gict/expr.hpp"
#include "test_util.hpp"

using namespace gict;

TEST_CASE("polynomial arithmetic stays multilinear per row") {
    Polynomial p = Polynomial::symbol(0, 0) * 0.3 + Polynomial::constant(0.3);
    std::vector<std::size_t> v0{0}, v1{1};
    CHECK(p.eval_vertex(v0) == doctest::Approx(0.6).epsilon(1e-15));
    CHECK(p.eval_vertex(v1) == doctest::Approx(0.3).epsilon(1e-15));

    // Products across distinct rows are fine.
    Polynomial q = Polynomial::symbol(0, 1) * Polynomial::symbol(1, 0);
    REQUIRE(q.terms().size() == 1);
    CHECK(q.terms().begin()->first.factors.size() == 2);

    // A product within one row would break linearity in that block.
    CHECK_THROWS_AS(Polynomial::symbol(0, 0) * Polynomial::symbol(0, 1), Error);
}

TEST_CASE("polynomial interior evaluation matches the monomial structure") {
    Polynomial p = Polynomial::symbol(0, 0) * 0.5 + Polynomial::symbol(1, 1) * 0.25 +
                   Polynomial::constant(0.1);
    ParamAssignment a;
    a.pi = {{0.2, 0.8}, {0.7, 0.3}};
    CHECK(p.eval(a) == doctest::Approx(0.5 * 0.2 + 0.25 * 0.3 + 0.1).epsilon(1e-15));
}

TEST_CASE("expression tree evaluation and constants") {
    using namespace exprtree;
    // (2 + 3*u0) / (1 - u0) at u0 = 0.5 -> 7
    ExprPtr t = quotient(sum({constant(2.0), product({constant(3.0), mass_u(0)})}),
                         sum({constant(1.0), product({constant(-1.0), mass_u(0)})}));
    ParamAssignment a;
    a.pi = {{1.0, 0.0}};
    a.u = {0.5};
    CHECK(eval(t, a) == doctest::Approx(7.0).epsilon(1e-15));
    CHECK_FALSE(is_constant(t));
    CHECK(is_constant(quotient(constant(1.0), constant(4.0))));

    a.u = {1.0};  // zero denominator
    CHECK_THROWS_AS(eval(t, a), Error);
}

TEST_CASE("evaluate validates simplex and mass constraints") {
    SymbolicExpr e = SymbolicExpr::perturbation(Polynomial::symbol(0, 0), 1, 2);
    ParamAssignment good;
    good.pi = {{0.25, 0.75}};
    CHECK(evaluate(e, good) == doctest::Approx(0.25));

    ParamAssignment bad;
    bad.pi = {{0.5, 0.2}};
    CHECK_THROWS_AS(evaluate(e, bad), Error);

    ParamAssignment negative;
    negative.pi = {{1.2, -0.2}};
    CHECK_THROWS_AS(evaluate(e, negative), Error);

    SymbolicExpr ex = SymbolicExpr::exact(exprtree::pi(0, 0), 1, 2);
    ParamAssignment m;
    m.pi = {{1.0, 0.0}};
    m.u = {1.0};
    CHECK_THROWS_AS(evaluate(ex, m), Error);
    m.u = {0.0};
    CHECK(evaluate(ex, m) == doctest::Approx(1.0));
}

TEST_CASE("constant expressions evaluate to their constant everywhere") {
    SymbolicExpr c = SymbolicExpr::perturbation(Polynomial::constant(0.42), 0, 2);
    CHECK(c.is_constant());
    ParamAssignment empty;
    CHECK(evaluate(c, empty) == doctest::Approx(0.42));

    std::mt19937_64 rng(7);
    SymbolicExpr cx = SymbolicExpr::exact(exprtree::constant(0.42), 2, 2);
    for (int i = 0; i < 10; ++i) {
        auto a = gict::test::random_assignment(rng, 2, 2, true);
        CHECK(evaluate(cx, a) == doctest::Approx(0.42).epsilon(1e-15));
    }
}

TEST_CASE("vertex assignments are basis vectors") {
    SymbolicExpr e = SymbolicExpr::perturbation(Polynomial::symbol(1, 2), 2, 3);
    std::vector<std::size_t> vertex{1, 2};
    ParamAssignment a = vertex_assignment(e, vertex);
    CHECK(a.pi[0] == std::vector<double>{0.0, 1.0, 0.0});
    CHECK(a.pi[1] == std::vector<double>{0.0, 0.0, 1.0});
    CHECK(a.u.empty());
}
