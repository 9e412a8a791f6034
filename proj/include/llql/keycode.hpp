#pragma once

#include <string>
#include <string_view>
#include <vector>

#include "llql/ast.hpp"
#include "llql/value.hpp"

namespace llql {

// Dictionary keys are stored as byte strings whose memcmp order equals the
// semantic order of the key values: integers and doubles use order-preserving
// bit transforms, strings are NUL-terminated raw bytes, records concatenate
// their fields in canonical (name-sorted, recursively flattened) order.
// All implementations share this encoding, so hashing and ordering agree
// across implementations by construction.
struct KeySchema {
  enum class Scalar { Int, Double, Bool, String };
  struct Leaf {
    std::vector<std::string> path;  // empty for a bare scalar key
    Scalar kind;
  };
  std::vector<Leaf> leaves;

  bool bare_scalar() const {
    return leaves.size() == 1 && leaves[0].path.empty();
  }

  static KeySchema from_type(const LType& key_type);

  std::string encode(const Value& key) const;  // throws TypeError on mismatch
  Value decode(std::string_view bytes) const;

  // Column names for CSV headers: field paths joined with '.', or `label`
  // for a bare scalar.
  std::vector<std::string> column_names(const std::string& label) const;
};

void encode_int_key(int64_t v, std::string& out);
void encode_double_key(double v, std::string& out);
int64_t decode_int_key(std::string_view bytes, size_t& pos);
double decode_double_key(std::string_view bytes, size_t& pos);

}  // namespace llql
