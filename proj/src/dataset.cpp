#include "gict/dataset.hpp"

#include <algorithm>
#include <fstream>
#include <istream>
#include <sstream>

#include "gict/error.hpp"

namespace gict {

namespace {

std::vector<std::string> split_fields(const std::string& line) {
    std::vector<std::string> fields;
    std::string current;
    for (char c : line) {
        if (c == ',') {
            fields.push_back(current);
            current.clear();
        } else {
            current.push_back(c);
        }
    }
    fields.push_back(current);
    return fields;
}

std::string strip_cr(std::string line) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    return line;
}

// Sorted distinct non-missing values per column.
void recompute_levels(Dataset& d) {
    for (std::size_t v = 0; v < d.schema.size(); ++v) {
        std::set<std::string> seen;
        for (const auto& rec : d.records) {
            if (rec.values[v].has_value()) seen.insert(*rec.values[v]);
        }
        d.schema[v].levels.assign(seen.begin(), seen.end());
        d.schema[v].numeric_codes.reset();
    }
}

}  // namespace

std::optional<std::size_t> VariableSchema::level_index(std::string_view level) const {
    auto it = std::lower_bound(levels.begin(), levels.end(), level);
    if (it != levels.end() && *it == level) {
        return static_cast<std::size_t>(it - levels.begin());
    }
    // Raw tables may declare levels in a non-sorted order; fall back to scan.
    for (std::size_t i = 0; i < levels.size(); ++i) {
        if (levels[i] == level) return i;
    }
    return std::nullopt;
}

std::optional<std::size_t> Dataset::variable_index(std::string_view name) const {
    for (std::size_t i = 0; i < schema.size(); ++i) {
        if (schema[i].name == name) return i;
    }
    return std::nullopt;
}

bool Dataset::has_missing() const {
    for (const auto& rec : records) {
        for (const auto& v : rec.values) {
            if (!v.has_value()) return true;
        }
    }
    return false;
}

Dataset load_csv(std::istream& in, const std::set<std::string>& missing_markers) {
    std::string line;
    if (!std::getline(in, line)) {
        fail(ErrorKind::Parse, "empty input: no header line");
    }
    const auto header = split_fields(strip_cr(line));
    for (const auto& name : header) {
        if (name.empty()) fail(ErrorKind::Schema, "empty variable name in header");
        if (std::count(header.begin(), header.end(), name) > 1) {
            fail(ErrorKind::Schema, "duplicate header name: " + name);
        }
    }

    Dataset d;
    d.schema.resize(header.size());
    for (std::size_t i = 0; i < header.size(); ++i) d.schema[i].name = header[i];

    std::size_t line_no = 1;
    while (std::getline(in, line)) {
        ++line_no;
        line = strip_cr(line);
        if (line.empty() && in.peek() == std::istream::traits_type::eof()) break;  // trailing newline
        auto fields = split_fields(line);
        if (fields.size() != header.size()) {
            fail(ErrorKind::Parse, "line " + std::to_string(line_no) + ": expected " +
                                       std::to_string(header.size()) + " fields, got " +
                                       std::to_string(fields.size()));
        }
        Record rec;
        rec.values.reserve(fields.size());
        for (auto& f : fields) {
            if (missing_markers.count(f)) {
                rec.values.push_back(std::nullopt);
            } else {
                rec.values.push_back(std::move(f));
            }
        }
        d.records.push_back(std::move(rec));
    }
    if (d.records.empty()) {
        fail(ErrorKind::Parse, "empty dataset: header with no data rows");
    }
    recompute_levels(d);
    return d;
}

Dataset load_csv_file(const std::string& path, const std::set<std::string>& missing_markers) {
    std::ifstream in(path);
    if (!in) fail(ErrorKind::Io, "cannot open " + path);
    return load_csv(in, missing_markers);
}

Dataset resolve_missing(const Dataset& d, const MissingPolicy& policy) {
    Dataset out;
    out.schema = d.schema;

    switch (policy.kind) {
        case MissingPolicyKind::DeleteRows: {
            for (const auto& rec : d.records) {
                bool missing = std::any_of(rec.values.begin(), rec.values.end(),
                                           [](const auto& v) { return !v.has_value(); });
                if (!missing) out.records.push_back(rec);
            }
            break;
        }
        case MissingPolicyKind::ImputeConstant: {
            for (const auto& [var, level] : policy.constants) {
                auto vi = d.variable_index(var);
                if (!vi) fail(ErrorKind::Semantic, "impute constant for unknown variable: " + var);
                if (!d.schema[*vi].level_index(level)) {
                    fail(ErrorKind::Semantic, "impute level '" + level +
                                                  "' is not an observed level of " + var);
                }
            }
            for (const auto& rec : d.records) {
                Record r = rec;
                for (std::size_t v = 0; v < r.values.size(); ++v) {
                    if (!r.values[v].has_value()) {
                        auto it = policy.constants.find(d.schema[v].name);
                        if (it == policy.constants.end()) {
                            fail(ErrorKind::Semantic,
                                 "no impute constant supplied for variable " + d.schema[v].name);
                        }
                        r.values[v] = it->second;
                    }
                }
                out.records.push_back(std::move(r));
            }
            break;
        }
        case MissingPolicyKind::ImputeMode: {
            // Most frequent non-missing value per variable; lexicographically
            // smallest label wins ties.
            std::vector<std::optional<std::string>> modes(d.schema.size());
            for (std::size_t v = 0; v < d.schema.size(); ++v) {
                std::map<std::string, std::size_t> freq;
                for (const auto& rec : d.records) {
                    if (rec.values[v].has_value()) ++freq[*rec.values[v]];
                }
                std::size_t best = 0;
                for (const auto& [level, n] : freq) {
                    if (n > best) {
                        best = n;
                        modes[v] = level;
                    }
                }
            }
            for (const auto& rec : d.records) {
                Record r = rec;
                for (std::size_t v = 0; v < r.values.size(); ++v) {
                    if (!r.values[v].has_value()) {
                        if (!modes[v]) {
                            fail(ErrorKind::Semantic, "variable " + d.schema[v].name +
                                                          " has no non-missing values to impute from");
                        }
                        r.values[v] = *modes[v];
                    }
                }
                out.records.push_back(std::move(r));
            }
            break;
        }
    }

    recompute_levels(out);
    return out;
}

std::vector<std::string> support(const Dataset& d, std::string_view var) {
    auto vi = d.variable_index(var);
    if (!vi) fail(ErrorKind::Semantic, "unknown variable: " + std::string(var));
    std::set<std::string> seen;
    for (const auto& rec : d.records) {
        const auto& v = rec.values[*vi];
        if (!v.has_value()) {
            fail(ErrorKind::Semantic, "support of " + std::string(var) +
                                          " requested on unresolved missing values");
        }
        seen.insert(*v);
    }
    return {seen.begin(), seen.end()};
}

Dataset collapse_levels(const Dataset& d, std::string_view var,
                        const std::map<std::string, std::string>& grouping) {
    auto vi = d.variable_index(var);
    if (!vi) fail(ErrorKind::Semantic, "unknown variable: " + std::string(var));
    for (const auto& level : d.schema[*vi].levels) {
        if (!grouping.count(level)) {
            fail(ErrorKind::Semantic, "partial grouping: level '" + level + "' of " +
                                          std::string(var) + " has no group");
        }
    }

    Dataset out;
    out.schema = d.schema;
    out.records = d.records;
    for (auto& rec : out.records) {
        auto& v = rec.values[*vi];
        if (v.has_value()) v = grouping.at(*v);
    }
    recompute_levels(out);
    return out;
}

std::string to_csv(const Dataset& d) {
    std::ostringstream out;
    for (std::size_t i = 0; i < d.schema.size(); ++i) {
        if (i) out << ',';
        out << d.schema[i].name;
    }
    out << '\n';
    for (const auto& rec : d.records) {
        for (std::size_t i = 0; i < rec.values.size(); ++i) {
            if (i) out << ',';
            out << (rec.values[i].has_value() ? *rec.values[i] : std::string());
        }
        out << '\n';
    }
    return out.str();
}

}  // namespace gict
