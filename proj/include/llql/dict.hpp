#pragma once

#include <cstdint>
#include <memory>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "llql/keycode.hpp"
#include "llql/value.hpp"

namespace llql {

// Opaque position handle.  The meaning of the payload words is
// implementation-defined (slot index, node pointer plus slot, ...).
// An invalid cursor represents both "not found" and the end position.
struct Cursor {
  uint64_t a = 0;
  uint64_t b = 0;
  bool valid = false;

  static Cursor end() { return {}; }
};

struct OpCounters {
  uint64_t key_comparisons = 0;
  uint64_t hash_invocations = 0;
  uint64_t probes = 0;

  void reset() { *this = {}; }
  OpCounters& operator+=(const OpCounters& o) {
    key_comparisons += o.key_comparisons;
    hash_invocations += o.hash_invocations;
    probes += o.probes;
    return *this;
  }
};

// Uniform dictionary interface.  Keys are order-encoded byte strings
// (see KeySchema); emplace inserts only if the key is absent and never
// overwrites an existing value.  Hinted variants start searching at a caller
// supplied cursor and additionally return the least-upper-bound position of
// the key as the next hint; they are only available on ordered
// implementations and throw UnsupportedOperation elsewhere.
class DictBase {
 public:
  virtual ~DictBase() = default;

  virtual size_t size() const = 0;
  virtual Cursor find(std::string_view key) const = 0;
  virtual Cursor emplace(std::string_view key, Value v) = 0;

  virtual std::pair<Cursor, Cursor> find_hint(Cursor hint,
                                              std::string_view key) const;
  virtual std::pair<Cursor, Cursor> emplace_hint(Cursor hint,
                                                 std::string_view key, Value v);

  virtual Cursor begin() const = 0;
  virtual void advance(Cursor& c) const = 0;
  virtual std::string_view key_at(const Cursor& c) const = 0;
  virtual Value& value_at(const Cursor& c) = 0;
  const Value& value_at(const Cursor& c) const {
    return const_cast<DictBase*>(this)->value_at(c);
  }

  // True when iteration yields keys in encoded order and hints are supported.
  virtual bool ordered() const = 0;
  // True when single-key insertion shifts existing entries (cost grows with
  // dictionary size).
  virtual bool linear_shift_insert() const { return false; }

  virtual void reserve(size_t) {}
  // Entries must be sorted by key and unique.
  virtual void bulk_load(std::vector<std::pair<std::string, Value>> entries);
  virtual std::unique_ptr<DictBase> clone() const = 0;

  OpCounters& counters() const { return counters_; }

 protected:
  mutable OpCounters counters_;
};

// A typed dictionary instance: implementation, key schema and value type.
struct DictHandle {
  std::string impl_name;
  KeySchema schema;
  LType value_type;
  std::string key_label;  // optional CSV column label for a scalar key
  std::unique_ptr<DictBase> impl;

  size_t size() const { return impl->size(); }
  Cursor find_value(const Value& key) const {
    return impl->find(schema.encode(key));
  }
  Value key_value(const Cursor& c) const {
    return schema.decode(impl->key_at(c));
  }
};

std::shared_ptr<DictHandle> make_handle(const std::string& impl_name,
                                        const LType& dict_type);
std::shared_ptr<DictHandle> clone_handle(const DictHandle& h);

// Iterator state for hinted accesses: `let it = d.iter` captures the
// dictionary and a cursor that hinted operations thread through.
struct IterCell {
  std::shared_ptr<DictHandle> dict;
  Cursor cur;
};

// 64-bit byte-string hash with a fixed seed; identical across processes.
uint64_t hash_bytes(std::string_view s);

}  // namespace llql
