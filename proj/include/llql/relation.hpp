#pragma once

#include <string>
#include <vector>

#include "llql/ast.hpp"
#include "llql/interp.hpp"
#include "llql/value.hpp"

namespace llql {

// Relation files are CSV with two header rows: column names, then column
// types (int, double, bool, string).  Key columns are named after the key
// record's fields (nested fields use dotted paths) or after the key label of
// a scalar-keyed dictionary.  Nested dictionary types consume further key
// columns level by level.  The innermost value is either
//   - an int with no "val" column: bag semantics, each row adds the optional
//     __mult column (default 1) to the key's multiplicity, or
//   - a scalar read from the "val" column / a record read from columns named
//     after its fields; duplicate keys are an error in this mode.
Value load_relation_csv(const std::string& path, const LType& dict_type,
                        const std::string& default_impl);

// Loads <name>.csv from dir for every input of the program.
Database load_database(const std::string& dir, const Program& p,
                       const std::string& default_impl);

std::string dict_to_csv(const Value& dict);
void save_dict_csv(const std::string& path, const Value& dict);

std::vector<std::vector<std::string>> parse_csv(const std::string& text);
std::string csv_escape(const std::string& cell);

}  // namespace llql
