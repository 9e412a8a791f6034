#include "llql/keycode.hpp"

#include <cstring>

#include "llql/error.hpp"

namespace llql {

namespace {

void put_u64_be(uint64_t u, std::string& out) {
  for (int i = 7; i >= 0; --i)
    out += static_cast<char>((u >> (8 * i)) & 0xff);
}

uint64_t get_u64_be(std::string_view bytes, size_t& pos) {
  if (pos + 8 > bytes.size()) throw DataError("truncated key encoding");
  uint64_t u = 0;
  for (int i = 0; i < 8; ++i)
    u = (u << 8) | static_cast<uint8_t>(bytes[pos++]);
  return u;
}

void flatten(const LType& t, std::vector<std::string>& path,
             std::vector<KeySchema::Leaf>& out) {
  switch (t.kind) {
    case LType::Kind::Int:
      out.push_back({path, KeySchema::Scalar::Int});
      return;
    case LType::Kind::Double:
      out.push_back({path, KeySchema::Scalar::Double});
      return;
    case LType::Kind::Bool:
      out.push_back({path, KeySchema::Scalar::Bool});
      return;
    case LType::Kind::String:
      out.push_back({path, KeySchema::Scalar::String});
      return;
    case LType::Kind::Record:
      for (const auto& [name, ft] : t.fields) {
        path.push_back(name);
        flatten(ft, path, out);
        path.pop_back();
      }
      return;
    default:
      throw TypeError("type " + std::to_string(static_cast<int>(t.kind)) +
                      " cannot be a dictionary key");
  }
}

void encode_scalar(const KeySchema::Leaf& leaf, const Value& v,
                   std::string& out) {
  switch (leaf.kind) {
    case KeySchema::Scalar::Int:
      if (v.is_int()) {
        encode_int_key(v.as_int(), out);
        return;
      }
      break;
    case KeySchema::Scalar::Double:
      if (v.is_double()) {
        encode_double_key(v.as_double(), out);
        return;
      }
      if (v.is_int()) {
        encode_double_key(static_cast<double>(v.as_int()), out);
        return;
      }
      break;
    case KeySchema::Scalar::Bool:
      if (v.is_bool()) {
        out += static_cast<char>(v.as_bool() ? 1 : 0);
        return;
      }
      break;
    case KeySchema::Scalar::String:
      if (v.is_string()) {
        const std::string& s = v.as_string();
        if (s.find('\0') != std::string::npos)
          throw DataError("string keys may not contain NUL bytes");
        out += s;
        out += '\0';
        return;
      }
      break;
  }
  throw TypeError("key value does not match key schema");
}

const Value& descend(const Value& key, const std::vector<std::string>& path) {
  const Value* cur = &key;
  for (const auto& field : path) {
    if (!cur->is_record()) throw TypeError("key value is not a record");
    const Value* next = cur->as_record()->field(field);
    if (!next) throw TypeError("key record missing field '" + field + "'");
    cur = next;
  }
  return *cur;
}

}  // namespace

void encode_int_key(int64_t v, std::string& out) {
  // Offset binary: flip the sign bit so unsigned byte order matches the
  // signed order.
  put_u64_be(static_cast<uint64_t>(v) ^ (1ull << 63), out);
}

void encode_double_key(double v, std::string& out) {
  uint64_t bits;
  static_assert(sizeof(bits) == sizeof(v));
  std::memcpy(&bits, &v, sizeof(bits));
  // Monotone transform of IEEE-754: negatives get all bits flipped,
  // non-negatives get the sign bit set.
  if (bits >> 63)
    bits = ~bits;
  else
    bits |= 1ull << 63;
  put_u64_be(bits, out);
}

int64_t decode_int_key(std::string_view bytes, size_t& pos) {
  return static_cast<int64_t>(get_u64_be(bytes, pos) ^ (1ull << 63));
}

double decode_double_key(std::string_view bytes, size_t& pos) {
  uint64_t bits = get_u64_be(bytes, pos);
  if (bits >> 63)
    bits &= ~(1ull << 63);
  else
    bits = ~bits;
  double v;
  std::memcpy(&v, &bits, sizeof(v));
  return v;
}

KeySchema KeySchema::from_type(const LType& key_type) {
  KeySchema s;
  std::vector<std::string> path;
  flatten(key_type, path, s.leaves);
  if (s.leaves.empty()) throw TypeError("empty key type");
  return s;
}

std::string KeySchema::encode(const Value& key) const {
  std::string out;
  if (bare_scalar()) {
    encode_scalar(leaves[0], key, out);
    return out;
  }
  for (const auto& leaf : leaves)
    encode_scalar(leaf, descend(key, leaf.path), out);
  return out;
}

Value KeySchema::decode(std::string_view bytes) const {
  size_t pos = 0;
  auto scalar = [&](const Leaf& leaf) -> Value {
    switch (leaf.kind) {
      case Scalar::Int:
        return Value::of(decode_int_key(bytes, pos));
      case Scalar::Double:
        return Value::of(decode_double_key(bytes, pos));
      case Scalar::Bool: {
        if (pos >= bytes.size()) throw DataError("truncated key encoding");
        return Value::of(bytes[pos++] != 0);
      }
      case Scalar::String: {
        size_t end = bytes.find('\0', pos);
        if (end == std::string_view::npos)
          throw DataError("truncated key encoding");
        std::string s(bytes.substr(pos, end - pos));
        pos = end + 1;
        return Value::of(std::move(s));
      }
    }
    throw DataError("bad key schema");
  };

  if (bare_scalar()) {
    Value v = scalar(leaves[0]);
    if (pos != bytes.size()) throw DataError("trailing bytes in key encoding");
    return v;
  }

  // Rebuild nested records from the flattened leaves; leaf order equals the
  // canonical field order, so plain reassembly keeps records sorted.
  struct Node {
    std::vector<std::pair<std::string, Node>> children;
    Value leaf;
    bool is_leaf = false;
  };
  Node root;
  for (const auto& leaf : leaves) {
    Node* cur = &root;
    for (const auto& field : leaf.path) {
      Node* next = nullptr;
      for (auto& [n, c] : cur->children)
        if (n == field) next = &c;
      if (!next) {
        cur->children.emplace_back(field, Node{});
        next = &cur->children.back().second;
      }
      cur = next;
    }
    cur->leaf = scalar(leaf);
    cur->is_leaf = true;
  }
  if (pos != bytes.size()) throw DataError("trailing bytes in key encoding");

  auto build = [](auto&& self, const Node& n) -> Value {
    if (n.is_leaf) return n.leaf;
    std::vector<std::pair<std::string, Value>> fields;
    fields.reserve(n.children.size());
    for (const auto& [name, child] : n.children)
      fields.emplace_back(name, self(self, child));
    return Value::record(std::move(fields));
  };
  return build(build, root);
}

std::vector<std::string> KeySchema::column_names(
    const std::string& label) const {
  std::vector<std::string> cols;
  if (bare_scalar()) {
    cols.push_back(label.empty() ? "key" : label);
    return cols;
  }
  for (const auto& leaf : leaves) {
    std::string name;
    for (const auto& p : leaf.path) {
      if (!name.empty()) name += '.';
      name += p;
    }
    cols.push_back(std::move(name));
  }
  return cols;
}

}  // namespace llql
