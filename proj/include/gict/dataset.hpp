#pragma once

// Categorical datasets: CSV ingestion, schema inference, missing-value
// resolution. Levels are exact strings; level order is lexicographic and
// all downstream tensor indexing relies on it.

#include <iosfwd>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <vector>

namespace gict {

struct VariableSchema {
    std::string name;
    std::vector<std::string> levels;  // distinct, lexicographically sorted
    // Optional level -> real coding, used for ATE outcomes.
    std::optional<std::map<std::string, double>> numeric_codes;

    std::optional<std::size_t> level_index(std::string_view level) const;

    bool operator==(const VariableSchema& other) const {
        return name == other.name && levels == other.levels;
    }
};

// One row of a dataset; std::nullopt is the MISSING marker.
struct Record {
    std::vector<std::optional<std::string>> values;
};

struct Dataset {
    std::vector<VariableSchema> schema;
    std::vector<Record> records;

    std::size_t row_count() const { return records.size(); }
    std::optional<std::size_t> variable_index(std::string_view name) const;
    bool has_missing() const;
};

enum class MissingPolicyKind {
    DeleteRows,
    ImputeConstant,
    ImputeMode,
};

struct MissingPolicy {
    MissingPolicyKind kind = MissingPolicyKind::DeleteRows;
    // For ImputeConstant: variable name -> level to substitute.
    std::map<std::string, std::string> constants;

    static MissingPolicy delete_rows() { return {}; }
    static MissingPolicy impute_constant(std::map<std::string, std::string> consts) {
        return {MissingPolicyKind::ImputeConstant, std::move(consts)};
    }
    static MissingPolicy impute_mode() { return {MissingPolicyKind::ImputeMode, {}}; }
};

// Plain comma-separated UTF-8 text, first line header, no quoting. A field
// equal to any missing marker becomes MISSING; levels are inferred as the
// sorted distinct non-missing values per column.
Dataset load_csv(std::istream& in, const std::set<std::string>& missing_markers);
Dataset load_csv_file(const std::string& path, const std::set<std::string>& missing_markers);

// Removes every MISSING value per the policy and recomputes schema levels
// from the resolved records. Idempotent.
Dataset resolve_missing(const Dataset& d, const MissingPolicy& policy);

// Sorted distinct observed values of one variable.
std::vector<std::string> support(const Dataset& d, std::string_view var);

// Rewrites one variable's levels through a total level -> group mapping.
Dataset collapse_levels(const Dataset& d, std::string_view var,
                        const std::map<std::string, std::string>& grouping);

std::string to_csv(const Dataset& d);

}  // namespace gict
