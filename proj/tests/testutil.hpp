#pragma once

#include <fstream>
#include <map>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "llql/ast.hpp"
#include "llql/dict.hpp"
#include "llql/interp.hpp"
#include "llql/parse.hpp"
#include "llql/typecheck.hpp"
#include "llql/value.hpp"

namespace llql::test {

inline std::string read_file(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw std::runtime_error("cannot open " + path);
  std::stringstream ss;
  ss << f.rdbuf();
  return ss.str();
}

inline Program load_query(const std::string& name) {
  return parse_program(read_file("queries/" + name + ".llql"));
}

// ---------------------------------------------------------------------------
// Relation builders: rows of (int key fields..., optional double field,
// multiplicity).  Distinct key tuples only after accumulation.

struct Row {
  std::vector<int64_t> ints;
  std::vector<double> dbls;
  int64_t mult = 1;
};

// Builds a dictionary Value for a flat relation whose key record has the
// given int fields followed by double fields (field names supplied in
// canonical order) and int multiplicity values.
inline Value make_bag(const std::vector<std::string>& int_fields,
                      const std::vector<std::string>& dbl_fields,
                      const std::vector<Row>& rows,
                      const std::string& impl = "sorted_array") {
  std::vector<std::pair<std::string, LType>> kf;
  for (const auto& f : int_fields) kf.emplace_back(f, LType::intt());
  for (const auto& f : dbl_fields) kf.emplace_back(f, LType::dbl());
  LType dict_type = LType::dict(LType::record(std::move(kf)), LType::intt());
  auto h = make_handle(impl, dict_type);
  Semiring sum;
  for (const auto& row : rows) {
    std::vector<std::pair<std::string, Value>> fields;
    for (size_t i = 0; i < int_fields.size(); ++i)
      fields.emplace_back(int_fields[i], Value::of(row.ints[i]));
    for (size_t i = 0; i < dbl_fields.size(); ++i)
      fields.emplace_back(dbl_fields[i], Value::of(row.dbls[i]));
    std::string code = h->schema.encode(Value::record(std::move(fields)));
    Cursor c = h->impl->find(code);
    if (c.valid)
      value_add_inplace(h->impl->value_at(c), Value::of(row.mult), sum);
    else
      h->impl->emplace(code, Value::of(row.mult));
  }
  return Value::of(std::move(h));
}

// Two-level trie: row id -> {i:int} -> double.
inline Value make_feature_rows(
    const std::vector<std::vector<std::pair<int64_t, double>>>& rows,
    const std::string& impl = "sorted_array") {
  LType inner = LType::dict(LType::record({{"i", LType::intt()}}),
                            LType::dbl(),
                            DictAnnotation::resolved("sorted_array"));
  LType outer = LType::dict(LType::intt(), inner, DictAnnotation::none(), "s");
  auto h = make_handle(impl, outer);
  for (size_t r = 0; r < rows.size(); ++r) {
    auto ih = make_handle("sorted_array", inner);
    for (const auto& [i, x] : rows[r]) {
      std::string code =
          ih->schema.encode(Value::record({{"i", Value::of(i)}}));
      ih->impl->emplace(code, Value::of(x));
    }
    std::string code = h->schema.encode(Value::of(static_cast<int64_t>(r)));
    h->impl->emplace(code, Value::of(std::move(ih)));
  }
  return Value::of(std::move(h));
}

// Reads a dictionary back into a sorted map keyed by rendered key text.
inline std::map<std::string, Value> dump_dict(const Value& v) {
  std::map<std::string, Value> out;
  const DictHandle& d = *v.as_dict();
  for (Cursor c = d.impl->begin(); c.valid; d.impl->advance(c))
    out[render_value(d.schema.decode(d.impl->key_at(c)))] =
        d.impl->value_at(c);
  return out;
}

// ---------------------------------------------------------------------------
// Random AST generator for printer/parser round-trips.

class AstGen {
 public:
  explicit AstGen(uint64_t seed) : rng_(seed) {}

  Program program() {
    Program p;
    int n_inputs = pick(0, 2);
    for (int i = 0; i < n_inputs; ++i) {
      InputDecl d;
      d.name = "in" + std::to_string(i);
      d.type = LType::dict(LType::record({{"a", LType::intt()},
                                          {"b", LType::dbl()}}),
                           LType::intt());
      p.inputs.push_back(std::move(d));
    }
    if (pick(0, 4) == 0) p.semiring = "max_plus";
    p.body = expr(4);
    return p;
  }

  ExprPtr expr(int depth) { return gen_seq(depth); }

 private:
  int pick(int lo, int hi) {
    return std::uniform_int_distribution<int>(lo, hi)(rng_);
  }
  std::string name() {
    static const char* names[] = {"x", "y", "z", "acc", "d0", "d1", "r", "s"};
    return names[pick(0, 7)];
  }

  ExprPtr gen_seq(int depth) {
    if (depth > 0 && pick(0, 3) == 0)
      return mk_seq(gen_stmt(depth - 1), gen_seq(depth - 1));
    return gen_stmt(depth);
  }

  ExprPtr gen_stmt(int depth) {
    if (depth <= 0) return gen_atom();
    switch (pick(0, 9)) {
      case 0:
        return mk_let(name(), gen_stmt(depth - 1), gen_seq(depth - 1));
      case 1:
        return mk_for(name(), gen_postfix(depth - 1), gen_stmt(depth - 1));
      case 2:
        return mk_if(gen_or(depth - 1), gen_stmt(depth - 1),
                     gen_stmt(depth - 1));
      case 3:
        return mk_dict_update(gen_postfix(depth - 1), gen_or(depth - 1),
                              gen_stmt(depth - 1));
      case 4:
        return mk_ref_update(mk_var(name()), gen_or(depth - 1));
      case 5: {
        // A hinted access needs `let it = d.iter` in scope.
        auto d = mk_dict_ctor({}, DictAnnotation::unresolved());
        auto use = pick(0, 1) == 0
                       ? mk_hinted_lookup(mk_var("hd"), "hit", gen_or(depth - 1))
                       : mk_hinted_update(mk_var("hd"), "hit",
                                          gen_or(depth - 1),
                                          gen_stmt(depth - 1));
        return mk_let("hd", d,
                      mk_let("hit", mk_dict_iter(mk_var("hd")), std::move(use)));
      }
      default:
        return gen_or(depth - 1);
    }
  }

  ExprPtr gen_or(int depth) {
    if (depth <= 0) return gen_atom();
    switch (pick(0, 7)) {
      case 0:
        return mk_binop(static_cast<BinOpKind>(pick(0, 11)), gen_or(depth - 1),
                        gen_or(depth - 1));
      case 1:
        return mk_unop(pick(0, 1) ? UnOpKind::Neg : UnOpKind::Not,
                       gen_or(depth - 1));
      default:
        return gen_postfix(depth - 1);
    }
  }

  ExprPtr gen_postfix(int depth) {
    if (depth <= 0) return gen_atom();
    switch (pick(0, 6)) {
      case 0:
        return mk_field(gen_postfix(depth - 1), name());
      case 1:
        return mk_dict_lookup(gen_postfix(depth - 1), gen_or(depth - 1));
      case 2:
        return mk_dict_iter(gen_postfix(depth - 1));
      case 3: {
        std::vector<std::pair<ExprPtr, ExprPtr>> items;
        int n = pick(0, 2);
        for (int i = 0; i < n; ++i)
          items.emplace_back(gen_atom(), gen_or(depth - 1));
        DictAnnotation ann;
        switch (pick(0, 2)) {
          case 0: ann = DictAnnotation::none(); break;
          case 1: ann = DictAnnotation::unresolved(); break;
          default: ann = DictAnnotation::resolved("sorted_array"); break;
        }
        return mk_dict_ctor(std::move(items), ann);
      }
      case 4: {
        std::vector<std::pair<std::string, ExprPtr>> fields;
        fields.emplace_back("f" + std::to_string(pick(0, 3)),
                            gen_or(depth - 1));
        if (pick(0, 1))
          fields.emplace_back("g" + std::to_string(pick(0, 3)),
                              gen_or(depth - 1));
        return mk_record(std::move(fields));
      }
      default:
        return gen_atom();
    }
  }

  ExprPtr gen_atom() {
    switch (pick(0, 7)) {
      case 0: return mk_int(pick(0, 1000));
      case 1: return mk_real(pick(0, 1000) / 8.0);
      case 2: return mk_bool(pick(0, 1) == 1);
      case 3: return mk_string(pick(0, 1) ? "ab c" : "q\"z\n");
      case 4: return mk_unit();
      case 5: return mk_ref_init(pick(0, 1) ? LType::dbl() : LType::intt());
      default: return mk_var(name());
    }
  }

  std::mt19937_64 rng_;
};

}  // namespace llql::test
