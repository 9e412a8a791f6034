#include "llql/value.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "llql/dict.hpp"
#include "llql/error.hpp"
#include "llql/print.hpp"
#include "llql/registry.hpp"

namespace llql {

Value Value::of(std::string s) {
  Value x;
  x.v = std::make_shared<const std::string>(std::move(s));
  return x;
}

Value Value::record(std::vector<std::pair<std::string, Value>> fields) {
  std::sort(fields.begin(), fields.end(),
            [](const auto& a, const auto& b) { return a.first < b.first; });
  auto r = std::make_shared<RecordValue>();
  r->fields = std::move(fields);
  Value x;
  x.v = std::move(r);
  return x;
}

const Value* RecordValue::field(const std::string& name) const {
  for (const auto& [n, v] : fields)
    if (n == name) return &v;
  return nullptr;
}

Semiring Semiring::named(const std::string& name) {
  if (name.empty() || name == "sum_product") return {Kind::SumProduct};
  if (name == "max_plus") return {Kind::MaxPlus};
  throw DataError("unknown semiring '" + name + "'");
}

namespace {

int64_t add_int(int64_t a, int64_t b, const Semiring& sr) {
  return sr.kind == Semiring::Kind::MaxPlus ? std::max(a, b) : a + b;
}

double add_double(double a, double b, const Semiring& sr) {
  return sr.kind == Semiring::Kind::MaxPlus ? std::max(a, b) : a + b;
}

[[noreturn]] void add_mismatch() {
  throw RuntimeError("type mismatch in addition");
}

}  // namespace

void value_add_inplace(Value& target, const Value& delta, const Semiring& sr) {
  if (target.is_int() && delta.is_int()) {
    target.v = add_int(target.as_int(), delta.as_int(), sr);
    return;
  }
  if (target.is_double() && (delta.is_double() || delta.is_int())) {
    target.v = add_double(target.as_double(), delta.num(), sr);
    return;
  }
  if (target.is_bool() && delta.is_bool()) {
    target.v = target.as_bool() || delta.as_bool();
    return;
  }
  if (target.is_unit() && delta.is_unit()) return;
  if (target.is_record() && delta.is_record()) {
    RecordValue& t = *target.as_record();
    const RecordValue& d = *delta.as_record();
    if (t.fields.size() != d.fields.size()) add_mismatch();
    for (size_t i = 0; i < t.fields.size(); ++i) {
      if (t.fields[i].first != d.fields[i].first) add_mismatch();
      value_add_inplace(t.fields[i].second, d.fields[i].second, sr);
    }
    return;
  }
  if (target.is_dict() && delta.is_dict()) {
    DictHandle& t = *target.as_dict();
    const DictHandle& d = *delta.as_dict();
    for (Cursor c = d.impl->begin(); c.valid; d.impl->advance(c)) {
      std::string_view code = d.impl->key_at(c);
      Cursor hit = t.impl->find(code);
      if (hit.valid)
        value_add_inplace(t.impl->value_at(hit), d.impl->value_at(c), sr);
      else
        t.impl->emplace(code, deep_copy(d.impl->value_at(c)));
    }
    return;
  }
  add_mismatch();
}

Value value_add(const Value& a, const Value& b, const Semiring& sr) {
  if (a.is_int() && b.is_int())
    return Value::of(add_int(a.as_int(), b.as_int(), sr));
  if ((a.is_double() || a.is_int()) && (b.is_double() || b.is_int()) &&
      (a.is_double() || b.is_double()))
    return Value::of(add_double(a.num(), b.num(), sr));
  Value out = deep_copy(a);
  value_add_inplace(out, b, sr);
  return out;
}

Value value_add(const Value& a, const Value& b) {
  return value_add(a, b, Semiring{});
}

Value zero_of(const LType& t, const Semiring& sr,
              const std::string& dict_impl) {
  bool mp = sr.kind == Semiring::Kind::MaxPlus;
  switch (t.kind) {
    case LType::Kind::Int:
      return Value::of(mp ? std::numeric_limits<int64_t>::min() : int64_t{0});
    case LType::Kind::Double:
      return Value::of(mp ? -std::numeric_limits<double>::infinity() : 0.0);
    case LType::Kind::Bool:
      return Value::of(false);
    case LType::Kind::String:
      return Value::of(std::string());
    case LType::Kind::Unit:
      return Value::unit();
    case LType::Kind::Record: {
      std::vector<std::pair<std::string, Value>> fields;
      fields.reserve(t.fields.size());
      for (const auto& [n, ft] : t.fields)
        fields.emplace_back(n, zero_of(ft, sr, dict_impl));
      return Value::record(std::move(fields));
    }
    case LType::Kind::Dict: {
      const std::string& impl =
          t.ann.kind == DictAnnotation::Kind::Resolved ? t.ann.impl : dict_impl;
      return Value::of(make_handle(impl, t));
    }
    default:
      throw TypeError("type has no additive zero");
  }
}

Value deep_copy(const Value& v) {
  if (v.is_record()) {
    std::vector<std::pair<std::string, Value>> fields;
    fields.reserve(v.as_record()->fields.size());
    for (const auto& [n, f] : v.as_record()->fields)
      fields.emplace_back(n, deep_copy(f));
    return Value::record(std::move(fields));
  }
  if (v.is_dict()) {
    const DictHandle& src = *v.as_dict();
    auto h = std::make_shared<DictHandle>();
    h->impl_name = src.impl_name;
    h->schema = src.schema;
    h->value_type = src.value_type;
    h->key_label = src.key_label;
    h->impl = DictRegistry::instance().make(src.impl_name);
    h->impl->reserve(src.size());
    for (Cursor c = src.impl->begin(); c.valid; src.impl->advance(c))
      h->impl->emplace(src.impl->key_at(c), deep_copy(src.impl->value_at(c)));
    return Value::of(std::move(h));
  }
  if (v.is_ref()) {
    auto cell = std::make_shared<RefCell>();
    cell->v = deep_copy(v.as_ref()->v);
    Value out;
    out.v = std::move(cell);
    return out;
  }
  return v;
}

namespace {

// Entries in encoded-key order regardless of implementation.
std::vector<Cursor> sorted_cursors(const DictHandle& d) {
  std::vector<Cursor> cs;
  cs.reserve(d.size());
  for (Cursor c = d.impl->begin(); c.valid; d.impl->advance(c)) cs.push_back(c);
  if (!d.impl->ordered()) {
    std::sort(cs.begin(), cs.end(), [&](const Cursor& x, const Cursor& y) {
      return d.impl->key_at(x) < d.impl->key_at(y);
    });
  }
  return cs;
}

}  // namespace

bool value_equal(const Value& a, const Value& b, double rel_tol) {
  if (a.is_double() && b.is_double()) {
    double x = a.as_double(), y = b.as_double();
    if (x == y) return true;
    if (std::isnan(x) || std::isnan(y)) return false;
    double scale = std::max({1.0, std::fabs(x), std::fabs(y)});
    return std::fabs(x - y) <= rel_tol * scale;
  }
  if (a.v.index() != b.v.index()) return false;
  if (a.is_unit()) return true;
  if (a.is_int()) return a.as_int() == b.as_int();
  if (a.is_bool()) return a.as_bool() == b.as_bool();
  if (a.is_string()) return a.as_string() == b.as_string();
  if (a.is_record()) {
    const auto& fa = a.as_record()->fields;
    const auto& fb = b.as_record()->fields;
    if (fa.size() != fb.size()) return false;
    for (size_t i = 0; i < fa.size(); ++i)
      if (fa[i].first != fb[i].first ||
          !value_equal(fa[i].second, fb[i].second, rel_tol))
        return false;
    return true;
  }
  if (a.is_dict()) {
    const DictHandle& da = *a.as_dict();
    const DictHandle& db = *b.as_dict();
    if (da.size() != db.size()) return false;
    for (Cursor c = da.impl->begin(); c.valid; da.impl->advance(c)) {
      Cursor hit = db.impl->find(da.impl->key_at(c));
      if (!hit.valid) return false;
      if (!value_equal(da.impl->value_at(c), db.impl->value_at(hit), rel_tol))
        return false;
    }
    return true;
  }
  if (a.is_ref())
    return value_equal(a.as_ref()->v, b.as_ref()->v, rel_tol);
  return false;  // iterators
}

namespace {

void render_rec(const Value& v, std::string& out) {
  if (v.is_unit()) {
    out += "()";
  } else if (v.is_int()) {
    out += std::to_string(v.as_int());
  } else if (v.is_double()) {
    out += format_real(v.as_double());
  } else if (v.is_bool()) {
    out += v.as_bool() ? "true" : "false";
  } else if (v.is_string()) {
    out += '"';
    out += v.as_string();
    out += '"';
  } else if (v.is_record()) {
    out += "{ ";
    bool first = true;
    for (const auto& [n, f] : v.as_record()->fields) {
      if (!first) out += ", ";
      first = false;
      out += n + " = ";
      render_rec(f, out);
    }
    out += " }";
  } else if (v.is_dict()) {
    const DictHandle& d = *v.as_dict();
    out += "{{ ";
    bool first = true;
    for (const Cursor& c : sorted_cursors(d)) {
      if (!first) out += ", ";
      first = false;
      render_rec(d.schema.decode(d.impl->key_at(c)), out);
      out += " -> ";
      render_rec(d.impl->value_at(c), out);
    }
    out += " }}";
  } else if (v.is_ref()) {
    out += "ref(";
    render_rec(v.as_ref()->v, out);
    out += ")";
  } else {
    out += "<iter>";
  }
}

}  // namespace

std::string render_value(const Value& v) {
  std::string out;
  render_rec(v, out);
  return out;
}

uint64_t value_checksum(const Value& v) {
  std::string s = render_value(v);
  uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : s) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

}  // namespace llql
