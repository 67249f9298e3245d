#pragma once

// Shared fixtures: paths into tests/data and builders for the small tables
// used throughout the suites.

#include <random>
#include <string>

#include "gict/bounds.hpp"
#include "gict/contingency.hpp"
#include "gict/dataset.hpp"
#include "gict/expr.hpp"

#ifndef GICT_TEST_DATA_DIR
#define GICT_TEST_DATA_DIR "tests/data"
#endif

namespace gict::test {

inline std::string data_path(const std::string& name) {
    return std::string(GICT_TEST_DATA_DIR) + "/" + name;
}

inline Dataset load_table1() {
    return load_csv_file(data_path("table1.csv"), {"m1", "m2"});
}

inline Dataset load_table4() { return load_csv_file(data_path("table4.csv"), {"", "NA"}); }

inline Dataset load_table3() { return load_csv_file(data_path("table3.csv"), {"", "NA"}); }

inline Dataset table1_imputed_zero() {
    return resolve_missing(load_table1(), MissingPolicy::impute_constant({{"Obesity", "0"}}));
}

// The (Age, Gender) x Obesity table from the imputed 10-row dataset.
inline ContingencyTable table2_counts() {
    return build_table(table1_imputed_zero(), {"Age", "Gender"}, "Obesity");
}

// The (A, H) x O worked-example table with counts (1,2,3,4) and all-zero
// rows at (0,0) and (1,1).
inline ContingencyTable table4_counts() {
    return build_table(resolve_missing(load_table4(), MissingPolicy::delete_rows()), {"A", "H"},
                       "O");
}

inline ParamAssignment random_assignment(std::mt19937_64& rng, std::size_t rows,
                                         std::size_t levels, bool exact) {
    std::exponential_distribution<double> exp_dist(1.0);
    std::uniform_real_distribution<double> u_dist(0.0, 1.0 - kMassLimitDelta);
    ParamAssignment a;
    for (std::size_t k = 0; k < rows; ++k) {
        std::vector<double> p(levels);
        double sum = 0.0;
        for (auto& v : p) {
            v = exp_dist(rng);
            sum += v;
        }
        for (auto& v : p) v /= sum;
        a.pi.push_back(std::move(p));
        if (exact) a.u.push_back(u_dist(rng));
    }
    return a;
}

}  // namespace gict::test
