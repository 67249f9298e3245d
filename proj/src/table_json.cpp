#include "gict/table_json.hpp"

#include <fstream>
#include <set>
#include <sstream>

#include <json.hpp>

#include "gict/error.hpp"

namespace gict {

namespace {

using nlohmann::json;

VariableSchema parse_schema(const json& node, const char* what) {
    if (!node.is_object() || !node.contains("name") || !node.contains("levels")) {
        fail(ErrorKind::Parse, std::string(what) + " must be an object with name and levels");
    }
    VariableSchema var;
    var.name = node.at("name").get<std::string>();
    std::set<std::string> seen;
    for (const auto& level : node.at("levels")) {
        std::string label = level.get<std::string>();
        if (!seen.insert(label).second) {
            fail(ErrorKind::Schema, "duplicate level '" + label + "' of " + var.name);
        }
        var.levels.push_back(std::move(label));
    }
    if (var.levels.empty()) fail(ErrorKind::Schema, "variable " + var.name + " has no levels");
    return var;
}

}  // namespace

ContingencyTable parse_table_json(const std::string& text) {
    json doc;
    try {
        doc = json::parse(text);
    } catch (const json::parse_error& e) {
        fail(ErrorKind::Parse, std::string("invalid table JSON: ") + e.what());
    }
    if (!doc.is_object() || !doc.contains("condition_vars") || !doc.contains("outcome_var") ||
        !doc.contains("counts")) {
        fail(ErrorKind::Parse,
             "table JSON needs condition_vars, outcome_var and counts members");
    }

    ContingencyTable t;
    std::set<std::string> names;
    for (const auto& node : doc.at("condition_vars")) {
        auto var = parse_schema(node, "condition variable");
        if (!names.insert(var.name).second) {
            fail(ErrorKind::Schema, "duplicate variable name: " + var.name);
        }
        t.condition_vars.push_back(std::move(var));
    }
    if (t.condition_vars.empty()) {
        fail(ErrorKind::Schema, "table needs at least one condition variable");
    }
    t.outcome_var = parse_schema(doc.at("outcome_var"), "outcome variable");
    if (names.count(t.outcome_var.name)) {
        fail(ErrorKind::Schema, "outcome variable repeats a condition variable name");
    }

    std::size_t cells = t.outcome_cardinality();
    for (const auto& var : t.condition_vars) cells *= var.levels.size();
    t.counts.assign(cells, 0);

    for (const auto& entry : doc.at("counts")) {
        if (!entry.is_object() || !entry.contains("coordinates") ||
            !entry.contains("outcome_level") || !entry.contains("count")) {
            fail(ErrorKind::Parse,
                 "each counts entry needs coordinates, outcome_level and count");
        }
        std::vector<std::size_t> coords(t.condition_count());
        const auto& coordinates = entry.at("coordinates");
        for (std::size_t i = 0; i < t.condition_vars.size(); ++i) {
            const auto& var = t.condition_vars[i];
            if (!coordinates.contains(var.name)) {
                fail(ErrorKind::Parse, "counts entry lacks a coordinate for " + var.name);
            }
            auto idx = var.level_index(coordinates.at(var.name).get<std::string>());
            if (!idx) {
                fail(ErrorKind::Schema, "coordinate for " + var.name +
                                            " names an undeclared level");
            }
            coords[i] = *idx;
        }
        auto oi = t.outcome_var.level_index(entry.at("outcome_level").get<std::string>());
        if (!oi) fail(ErrorKind::Schema, "counts entry names an undeclared outcome level");
        std::int64_t count = entry.at("count").get<std::int64_t>();
        if (count < 0) fail(ErrorKind::Schema, "negative count in table");
        t.counts[t.flat_index(coords, *oi)] += count;
    }

    for (std::int64_t c : t.counts) t.total += c;

    // Full cross product until pruning decides otherwise.
    std::vector<std::size_t> coords(t.condition_count(), 0);
    while (true) {
        t.retained.push_back(coords);
        std::size_t i = t.condition_count();
        bool done = true;
        while (i > 0) {
            --i;
            if (++coords[i] < t.condition_vars[i].levels.size()) {
                done = false;
                break;
            }
            coords[i] = 0;
        }
        if (done) break;
    }
    return t;
}

ContingencyTable load_table_json_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) fail(ErrorKind::Io, "cannot open " + path);
    std::ostringstream buf;
    buf << in.rdbuf();
    return parse_table_json(buf.str());
}

}  // namespace gict
