#pragma once

// Raw count-table input. JSON object with "condition_vars" (name + levels),
// "outcome_var", and sparse "counts" as {coordinates, outcome_level, count}
// triples; unlisted cells are zero.

#include <iosfwd>
#include <string>

#include "gict/contingency.hpp"

namespace gict {

ContingencyTable parse_table_json(const std::string& text);
ContingencyTable load_table_json_file(const std::string& path);

}  // namespace gict
