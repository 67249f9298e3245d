#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <random>

#include "gict/error.hpp"
#include "gict/oracle.hpp"
#include "gict/query.hpp"
#include "test_util.hpp"

using namespace gict;

namespace {

QuerySpec q_do_h0(const std::string& outcome_level) {
    QuerySpec q;
    q.kind = QueryKind::Interventional;
    q.outcome_var = "O";
    q.outcome_level = outcome_level;
    q.treatment_var = "H";
    q.treatment_level = "0";
    q.adjustment = {"A"};
    return q;
}

}  // namespace

TEST_CASE("query parser accepts the three forms") {
    QuerySpec q1 = parse_query("P(O=1 | do(H=0); adjust=A)");
    CHECK(q1.kind == QueryKind::Interventional);
    CHECK(q1.outcome_var == "O");
    CHECK(q1.outcome_level == "1");
    CHECK(q1.treatment_var == "H");
    CHECK(q1.treatment_level == "0");
    CHECK(q1.adjustment == std::vector<std::string>{"A"});

    QuerySpec q2 = parse_query(" P( O = 1 | H = 0 , A = 1 ) ");
    CHECK(q2.kind == QueryKind::Conditional);
    REQUIRE(q2.conditions.size() == 2);
    CHECK(q2.conditions[0] == std::pair<std::string, std::string>{"H", "0"});
    CHECK(q2.conditions[1] == std::pair<std::string, std::string>{"A", "1"});

    QuerySpec q3 = parse_query("ATE(O; H: 1 vs 0; adjust=A,B)");
    CHECK(q3.kind == QueryKind::Ate);
    CHECK(q3.treatment_hi == "1");
    CHECK(q3.treatment_lo == "0");
    CHECK(q3.adjustment == std::vector<std::string>{"A", "B"});

    QuerySpec q4 = parse_query("P(O=1 | do(H=0))");
    CHECK(q4.kind == QueryKind::Interventional);
    CHECK(q4.adjustment.empty());
}

TEST_CASE("query parser rejects malformed strings") {
    CHECK_THROWS_AS(parse_query("Q(O=1)"), Error);
    CHECK_THROWS_AS(parse_query("P(O=1 | do(H=0); adjust=A) trailing"), Error);
    CHECK_THROWS_AS(parse_query("P(O=1 |)"), Error);
    CHECK_THROWS_AS(parse_query("ATE(O; H: 1 vs 1)"), Error);
    CHECK_THROWS_AS(parse_query("ATE(O; H: 1)"), Error);
}

TEST_CASE("perturbation compile matches the worked example's simplified form") {
    ContingencyTable t = test::table4_counts();
    Compiled c = compile(t, q_do_h0("0"), Mode::Perturbation);
    REQUIRE(c.params.row_count() == 2);
    CHECK(c.params.rows[0].label == "(A=0, H=0)");
    CHECK(c.params.rows[1].label == "(A=1, H=1)");

    // pi_0^0 * (n1+n2)/N + (n3/(n3+n4)) * (n3+n4)/N with n = (1,2,3,4).
    const auto& terms = c.query.poly.terms();
    REQUIRE(terms.size() == 2);
    Monomial constant_m;
    Monomial pi00{{{0, 0}}};
    CHECK(terms.at(constant_m) == doctest::Approx(0.3).epsilon(1e-15));
    CHECK(terms.at(pi00) == doctest::Approx(0.3).epsilon(1e-15));

    // Evaluations from the paper's closed forms.
    ParamAssignment a;
    a.pi = {{1.0, 0.0}, {1.0, 0.0}};
    CHECK(evaluate(c.query, a) == doctest::Approx(0.6).epsilon(1e-12));
    a.pi[0] = {0.0, 1.0};
    CHECK(evaluate(c.query, a) == doctest::Approx(0.3).epsilon(1e-12));
}

TEST_CASE("exact compile matches the unapproximated expression") {
    ContingencyTable t = test::table4_counts();
    Compiled c = compile(t, q_do_h0("0"), Mode::Exact);

    // Reference: P = pi0 * (n1+n2+s0)/(N+s0+s1) + (n3/(n3+n4)) * (n3+n4+s1)/(N+s0+s1)
    auto reference = [](double pi0, double s0, double s1) {
        return pi0 * (3.0 + s0) / (10.0 + s0 + s1) + (3.0 / 7.0) * (7.0 + s1) / (10.0 + s0 + s1);
    };
    std::mt19937_64 rng(11);
    std::uniform_real_distribution<double> mass(0.0, 50.0);
    std::uniform_real_distribution<double> unif(0.0, 1.0);
    for (int i = 0; i < 50; ++i) {
        double s0 = mass(rng), s1 = mass(rng), p = unif(rng);
        ParamAssignment a;
        a.pi = {{p, 1.0 - p}, {0.5, 0.5}};
        a.u = {s0 / (s0 + 10.0), s1 / (s1 + 10.0)};
        CHECK(evaluate(c.query, a) ==
              doctest::Approx(reference(p, s0, s1)).epsilon(1e-12));
    }
}

TEST_CASE("compile on a table without zero rows yields constants") {
    ContingencyTable t = build_table(test::load_table3(), {"Age", "Gender"}, "Obesity");
    QuerySpec q;
    q.kind = QueryKind::Interventional;
    q.outcome_var = "Obesity";
    q.outcome_level = "1";
    q.treatment_var = "Gender";
    q.treatment_level = "1";
    q.adjustment = {"Age"};
    Compiled c = compile(t, q, Mode::Perturbation);
    CHECK(c.params.empty());
    CHECK(c.query.is_constant());
    CHECK(c.query.constant_value() == doctest::Approx(plug_in(t, q)).epsilon(1e-12));
}

TEST_CASE("normalization: outcome expressions sum to one at feasible points") {
    ContingencyTable t = test::table4_counts();
    std::mt19937_64 rng(3);
    for (Mode mode : {Mode::Perturbation, Mode::Exact}) {
        Compiled c = compile(t, q_do_h0("0"), mode);
        REQUIRE(c.outcome_exprs.size() == 2);
        double tol = mode == Mode::Perturbation ? 1e-12 : 1e-9;
        for (int i = 0; i < 100; ++i) {
            auto a = test::random_assignment(rng, 2, 2, mode == Mode::Exact);
            double sum = 0.0;
            for (const auto& e : c.outcome_exprs) sum += evaluate(e, a);
            CHECK(std::abs(sum - 1.0) <= tol);
        }
    }
}

TEST_CASE("multilinearity is structural: no monomial repeats a row") {
    ContingencyTable t = test::table4_counts();
    QuerySpec ate;
    ate.kind = QueryKind::Ate;
    ate.outcome_var = "O";
    ate.treatment_var = "H";
    ate.treatment_hi = "1";
    ate.treatment_lo = "0";
    ate.adjustment = {"A"};
    Compiled c = compile(t, ate, Mode::Perturbation);
    for (const auto& [m, coeff] : c.query.poly.terms()) {
        for (std::size_t i = 1; i < m.factors.size(); ++i) {
            CHECK(m.factors[i - 1].first < m.factors[i].first);
        }
    }
}

TEST_CASE("consistency: exact mode at an empirical fill-in equals the plug-in value") {
    ContingencyTable t = test::table4_counts();
    auto zero_rows = find_zero_rows(t);
    Compiled c = compile(t, q_do_h0("0"), Mode::Exact);

    std::mt19937_64 rng(17);
    std::uniform_int_distribution<std::int64_t> count(0, 5);
    int done = 0;
    while (done < 25) {
        FillIn f;
        f.cells = {{count(rng), count(rng)}, {count(rng), count(rng)}};
        bool positive = (f.cells[0][0] + f.cells[0][1] > 0) && (f.cells[1][0] + f.cells[1][1] > 0);
        if (!positive) continue;
        ++done;

        ParamAssignment a;
        for (const auto& row : f.cells) {
            double s = static_cast<double>(row[0] + row[1]);
            a.pi.push_back({row[0] / s, row[1] / s});
            a.u.push_back(s / (s + 10.0));
        }
        double via_expr = evaluate(c.query, a);
        double via_table = plug_in(with_fillin(t, zero_rows, f), q_do_h0("0"));
        CHECK(via_expr == doctest::Approx(via_table).epsilon(1e-12));
    }
}

TEST_CASE("ATE expression equals the difference of its interventional parts") {
    ContingencyTable t = test::table4_counts();
    QuerySpec ate;
    ate.kind = QueryKind::Ate;
    ate.outcome_var = "O";
    ate.treatment_var = "H";
    ate.treatment_hi = "1";
    ate.treatment_lo = "0";
    ate.adjustment = {"A"};

    std::mt19937_64 rng(23);
    for (Mode mode : {Mode::Perturbation, Mode::Exact}) {
        Compiled c_ate = compile(t, ate, mode);
        QuerySpec hi = q_do_h0("1");
        hi.treatment_level = "1";
        QuerySpec lo = q_do_h0("1");
        Compiled c_hi = compile(t, hi, mode);
        Compiled c_lo = compile(t, lo, mode);
        for (int i = 0; i < 50; ++i) {
            auto a = test::random_assignment(rng, 2, 2, mode == Mode::Exact);
            double direct = evaluate(c_ate.query, a);
            double diff = evaluate(c_hi.query, a) - evaluate(c_lo.query, a);
            CHECK(direct == doctest::Approx(diff).epsilon(1e-11));
        }
    }
}

TEST_CASE("conditional compile: observed rows give constants, zero rows give pi") {
    ContingencyTable t = test::table2_counts();

    QuerySpec observed;
    observed.kind = QueryKind::Conditional;
    observed.outcome_var = "Obesity";
    observed.outcome_level = "1";
    observed.conditions = {{"Gender", "1"}, {"Age", "14"}};
    Compiled c1 = compile(t, observed, Mode::Perturbation);
    CHECK(c1.query.is_constant());
    CHECK(c1.query.constant_value() == doctest::Approx(0.0));

    QuerySpec on_zero = observed;
    on_zero.conditions = {{"Gender", "1"}, {"Age", "16"}};
    Compiled c2 = compile(t, on_zero, Mode::Perturbation);
    CHECK_FALSE(c2.query.is_constant());
    REQUIRE_FALSE(c2.notes.empty());
    CHECK(c2.notes[0].find("(Age=16, Gender=1)") != std::string::npos);

    // Marginal conditioning sums the stratum.
    QuerySpec marginal = observed;
    marginal.conditions = {{"Gender", "1"}};
    Compiled c3 = compile(t, marginal, Mode::Perturbation);
    CHECK(c3.query.is_constant());
    CHECK(c3.query.constant_value() == doctest::Approx(0.0));
}

TEST_CASE("compile rejects levels outside the support") {
    ContingencyTable t = test::table4_counts();
    QuerySpec q = q_do_h0("0");
    q.treatment_level = "3";
    CHECK_THROWS_AS(compile(t, q, Mode::Perturbation), Error);

    QuerySpec q2 = q_do_h0("5");
    CHECK_THROWS_AS(compile(t, q2, Mode::Perturbation), Error);

    QuerySpec q3 = q_do_h0("0");
    q3.adjustment = {};
    CHECK_THROWS_AS(compile(t, q3, Mode::Perturbation), Error);
}

TEST_CASE("plug_in evaluates fully observed tables") {
    ContingencyTable t = build_table(test::load_table3(), {"Age", "Gender"}, "Obesity");

    QuerySpec q;
    q.kind = QueryKind::Interventional;
    q.outcome_var = "Obesity";
    q.outcome_level = "1";
    q.treatment_var = "Gender";
    q.treatment_level = "1";
    q.adjustment = {"Age"};
    CHECK(plug_in(t, q) == doctest::Approx(0.0));

    QuerySpec cond;
    cond.kind = QueryKind::Conditional;
    cond.outcome_var = "Obesity";
    cond.outcome_level = "1";
    cond.conditions = {{"Gender", "1"}};
    CHECK(plug_in(t, cond) == doctest::Approx(0.0));

    // A deterministic dataset answers 1 for the observed level.
    std::istringstream in("A,O\nx,1\nx,1\n");
    ContingencyTable det = build_table(load_csv(in, {}), {"A"}, "O");
    QuerySpec dq;
    dq.kind = QueryKind::Conditional;
    dq.outcome_var = "O";
    dq.outcome_level = "1";
    dq.conditions = {{"A", "x"}};
    CHECK(plug_in(det, dq) == doctest::Approx(1.0));

    CHECK_THROWS_AS(plug_in(test::table4_counts(), q_do_h0("0")), Error);
}

TEST_CASE("ATE outcome coding: labels parse as reals, a map overrides") {
    ContingencyTable t = test::table4_counts();
    QuerySpec ate;
    ate.kind = QueryKind::Ate;
    ate.outcome_var = "O";
    ate.treatment_var = "H";
    ate.treatment_hi = "1";
    ate.treatment_lo = "0";
    ate.adjustment = {"A"};
    CHECK(resolve_outcome_codes(t, ate) == std::vector<double>{0.0, 1.0});

    ate.outcome_codes = {{{"0", -1.0}, {"1", 2.0}}};
    CHECK(resolve_outcome_codes(t, ate) == std::vector<double>{-1.0, 2.0});
    CHECK(theoretical_range(t, ate) == std::pair<double, double>{-3.0, 3.0});

    // Non-numeric labels without a map are a coding error.
    std::istringstream in("A,H,O\n0,0,yes\n0,1,no\n1,0,yes\n1,1,no\n");
    ContingencyTable words = build_table(load_csv(in, {}), {"A", "H"}, "O");
    QuerySpec bad = ate;
    bad.outcome_codes.reset();
    CHECK_THROWS_AS(resolve_outcome_codes(words, bad), Error);
}
