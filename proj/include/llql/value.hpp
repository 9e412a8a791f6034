#pragma once

#include <cstdint>
#include <memory>
#include <string>
#include <variant>
#include <vector>

#include "llql/ast.hpp"

namespace llql {

struct DictHandle;
struct RecordValue;
struct RefCell;
struct IterCell;

// Runtime values.  Unit is monostate.  Records, strings and dictionaries are
// heap-allocated and shared; dictionaries have reference semantics.
struct Value {
  std::variant<std::monostate, int64_t, double, bool,
               std::shared_ptr<const std::string>,
               std::shared_ptr<RecordValue>,
               std::shared_ptr<DictHandle>,
               std::shared_ptr<RefCell>,
               std::shared_ptr<IterCell>>
      v;

  Value() = default;
  static Value unit() { return {}; }
  static Value of(int64_t i) { Value x; x.v = i; return x; }
  static Value of(double d) { Value x; x.v = d; return x; }
  static Value of(bool b) { Value x; x.v = b; return x; }
  static Value of(std::string s);
  static Value of(std::shared_ptr<DictHandle> d) { Value x; x.v = std::move(d); return x; }
  static Value record(std::vector<std::pair<std::string, Value>> fields);

  bool is_unit() const { return std::holds_alternative<std::monostate>(v); }
  bool is_int() const { return std::holds_alternative<int64_t>(v); }
  bool is_double() const { return std::holds_alternative<double>(v); }
  bool is_bool() const { return std::holds_alternative<bool>(v); }
  bool is_string() const {
    return std::holds_alternative<std::shared_ptr<const std::string>>(v);
  }
  bool is_record() const {
    return std::holds_alternative<std::shared_ptr<RecordValue>>(v);
  }
  bool is_dict() const {
    return std::holds_alternative<std::shared_ptr<DictHandle>>(v);
  }
  bool is_ref() const {
    return std::holds_alternative<std::shared_ptr<RefCell>>(v);
  }
  bool is_iter() const {
    return std::holds_alternative<std::shared_ptr<IterCell>>(v);
  }

  int64_t as_int() const { return std::get<int64_t>(v); }
  double as_double() const { return std::get<double>(v); }
  bool as_bool() const { return std::get<bool>(v); }
  const std::string& as_string() const {
    return *std::get<std::shared_ptr<const std::string>>(v);
  }
  const std::shared_ptr<RecordValue>& as_record() const {
    return std::get<std::shared_ptr<RecordValue>>(v);
  }
  const std::shared_ptr<DictHandle>& as_dict() const {
    return std::get<std::shared_ptr<DictHandle>>(v);
  }
  const std::shared_ptr<RefCell>& as_ref() const {
    return std::get<std::shared_ptr<RefCell>>(v);
  }
  const std::shared_ptr<IterCell>& as_iter() const {
    return std::get<std::shared_ptr<IterCell>>(v);
  }

  // Numeric access with int widening.
  double num() const {
    return is_int() ? static_cast<double>(as_int()) : as_double();
  }
};

struct RecordValue {
  // Sorted by field name.
  std::vector<std::pair<std::string, Value>> fields;
  const Value* field(const std::string& name) const;
};

struct RefCell {
  Value v;
};

struct Semiring {
  enum class Kind { SumProduct, MaxPlus };
  Kind kind = Kind::SumProduct;

  static Semiring named(const std::string& name);
};

// Keywise merge for dictionaries, fieldwise for records, semiring-add for
// numerics.  The two-argument form merges under the sum semiring.
Value value_add(const Value& a, const Value& b);
Value value_add(const Value& a, const Value& b, const Semiring& sr);

// Merges delta into target without copying target's spine.
void value_add_inplace(Value& target, const Value& delta, const Semiring& sr);

// Additive identity for a value type.  Dict zeros are empty dictionaries of
// the given implementation (used when a lookup misses).
Value zero_of(const LType& t, const Semiring& sr,
              const std::string& dict_impl);

Value deep_copy(const Value& v);

// Structural equality; doubles compare with relative tolerance rel_tol
// (plus the same value as an absolute floor near zero).
bool value_equal(const Value& a, const Value& b, double rel_tol = 0.0);

// Canonical text rendering.  Dictionary entries are ordered by encoded key,
// so the output is independent of the implementation used.
std::string render_value(const Value& v);

// FNV-1a over the canonical rendering.
uint64_t value_checksum(const Value& v);

}  // namespace llql
