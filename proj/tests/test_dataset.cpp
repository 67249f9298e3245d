#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <sstream>

#include "gict/dataset.hpp"
#include "gict/error.hpp"
#include "test_util.hpp"

using namespace gict;

TEST_CASE("load_csv reads the 10-row example dataset") {
    Dataset d = test::load_table1();
    CHECK(d.row_count() == 10);
    REQUIRE(d.schema.size() == 4);
    auto oi = d.variable_index("Obesity");
    REQUIRE(oi.has_value());
    CHECK(d.schema[*oi].levels == std::vector<std::string>{"0", "1"});
    // Rows 3 and 6 carry the missing markers.
    CHECK_FALSE(d.records[2].values[*oi].has_value());
    CHECK_FALSE(d.records[5].values[*oi].has_value());
    CHECK(d.records[0].values[*oi].has_value());
}

TEST_CASE("load_csv minimal single-row input") {
    std::istringstream in("A,B\n0,1\n");
    Dataset d = load_csv(in, {});
    CHECK(d.row_count() == 1);
    CHECK(d.schema[0].levels == std::vector<std::string>{"0"});
    CHECK(d.schema[1].levels == std::vector<std::string>{"1"});
}

TEST_CASE("load_csv error paths") {
    SUBCASE("ragged row reports its line number") {
        std::istringstream in("A,B,C\n16,0\n");
        try {
            load_csv(in, {});
            FAIL("expected a parse error");
        } catch (const Error& e) {
            CHECK(e.kind() == ErrorKind::Parse);
            CHECK(std::string(e.what()).find("line 2") != std::string::npos);
        }
    }
    SUBCASE("duplicate header names") {
        std::istringstream in("A,A\n0,1\n");
        CHECK_THROWS_AS(load_csv(in, {}), Error);
    }
    SUBCASE("no data rows") {
        std::istringstream in("A,B\n");
        CHECK_THROWS_AS(load_csv(in, {}), Error);
    }
}

TEST_CASE("resolve_missing delete_rows removes exactly the marked records") {
    Dataset d = test::load_table1();
    Dataset resolved = resolve_missing(d, MissingPolicy::delete_rows());
    CHECK(resolved.row_count() == 8);
    CHECK_FALSE(resolved.has_missing());

    std::size_t with_missing = 0;
    for (const auto& rec : d.records) {
        for (const auto& v : rec.values) {
            if (!v.has_value()) {
                ++with_missing;
                break;
            }
        }
    }
    CHECK(resolved.row_count() == d.row_count() - with_missing);
}

TEST_CASE("resolve_missing impute_constant reproduces the strata of the example") {
    Dataset resolved = test::table1_imputed_zero();
    CHECK(resolved.row_count() == 10);
    CHECK_FALSE(resolved.has_missing());

    // Stratum (Age=15, Gender=0) has Obesity counts (1,2); (15,1) has (1,0).
    auto count = [&](const std::string& age, const std::string& gender,
                     const std::string& obesity) {
        std::size_t n = 0;
        auto ai = *resolved.variable_index("Age");
        auto gi = *resolved.variable_index("Gender");
        auto oi = *resolved.variable_index("Obesity");
        for (const auto& rec : resolved.records) {
            if (*rec.values[ai] == age && *rec.values[gi] == gender &&
                *rec.values[oi] == obesity) {
                ++n;
            }
        }
        return n;
    };
    CHECK(count("15", "0", "0") == 1);
    CHECK(count("15", "0", "1") == 2);
    CHECK(count("15", "1", "0") == 1);
    CHECK(count("15", "1", "1") == 0);
}

TEST_CASE("resolve_missing is the identity on complete data and idempotent") {
    Dataset d = test::load_table4();
    Dataset once = resolve_missing(d, MissingPolicy::delete_rows());
    CHECK(once.row_count() == d.row_count());

    Dataset imputed = test::table1_imputed_zero();
    Dataset again = resolve_missing(imputed, MissingPolicy::impute_constant({{"Obesity", "0"}}));
    CHECK(again.row_count() == imputed.row_count());
    for (std::size_t r = 0; r < again.records.size(); ++r) {
        CHECK(again.records[r].values == imputed.records[r].values);
    }
}

TEST_CASE("resolve_missing error cases") {
    Dataset d = test::load_table1();
    SUBCASE("impute level must exist") {
        CHECK_THROWS_AS(resolve_missing(d, MissingPolicy::impute_constant({{"Obesity", "7"}})),
                        Error);
    }
    SUBCASE("impute constant must be supplied for every missing variable") {
        CHECK_THROWS_AS(resolve_missing(d, MissingPolicy::impute_constant({{"Age", "14"}})),
                        Error);
    }
    SUBCASE("impute_mode with a fully-missing column is unresolvable") {
        std::istringstream in("A,B\nx,\ny,\n");
        Dataset empty_col = load_csv(in, {""});
        CHECK_THROWS_AS(resolve_missing(empty_col, MissingPolicy::impute_mode()), Error);
    }
}

TEST_CASE("impute_mode fills the most frequent level") {
    std::istringstream in("A,B\n0,x\n0,y\n1,y\n,y\n");
    Dataset d = load_csv(in, {""});
    Dataset resolved = resolve_missing(d, MissingPolicy::impute_mode());
    CHECK(*resolved.records[3].values[0] == "0");
}

TEST_CASE("support lists sorted observed values") {
    Dataset resolved = resolve_missing(test::load_table1(), MissingPolicy::delete_rows());
    CHECK(support(resolved, "Age") == std::vector<std::string>{"14", "15", "16"});
    CHECK(support(resolved, "Gender") == std::vector<std::string>{"0", "1"});
    CHECK_THROWS_AS(support(resolved, "Height"), Error);

    std::istringstream in("A,B\n0,1\n");
    Dataset single = load_csv(in, {});
    CHECK(support(single, "A") == std::vector<std::string>{"0"});
}

TEST_CASE("support never contains a level that resolution removed") {
    // The only Gender=1 rows carry missing Obesity, so delete_rows drops the
    // level entirely.
    std::istringstream in("G,O\n0,1\n0,0\n1,\n");
    Dataset d = load_csv(in, {""});
    Dataset resolved = resolve_missing(d, MissingPolicy::delete_rows());
    CHECK(support(resolved, "G") == std::vector<std::string>{"0"});
    auto gi = *resolved.variable_index("G");
    CHECK(resolved.schema[gi].levels == std::vector<std::string>{"0"});
}

TEST_CASE("levels compare as exact strings, no numeric coercion") {
    std::istringstream in("A,B\n1,x\n01,x\n");
    Dataset d = load_csv(in, {});
    CHECK(d.schema[0].levels == std::vector<std::string>{"01", "1"});
}
