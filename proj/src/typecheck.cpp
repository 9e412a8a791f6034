#include "llql/typecheck.hpp"

#include <set>

#include "llql/error.hpp"
#include "llql/keycode.hpp"
#include "llql/print.hpp"

namespace llql {

namespace {

void collect_symbols(const Expr& e, std::vector<DictSymbol>& out) {
  if (e.kind == Expr::Kind::Let && e.a->kind == Expr::Kind::DictCtor) {
    for (const auto& s : out)
      if (s.name == e.name)
        throw TypeError("dictionary symbol '" + e.name +
                        "' is defined more than once");
    out.push_back({e.name, &e, e.a.get()});
  }
  if (e.a) collect_symbols(*e.a, out);
  if (e.b) collect_symbols(*e.b, out);
  if (e.c) collect_symbols(*e.c, out);
  for (const auto& [n, v] : e.rec_fields) collect_symbols(*v, out);
  for (const auto& [k, v] : e.dict_items) {
    collect_symbols(*k, out);
    collect_symbols(*v, out);
  }
}

class Checker {
 public:
  explicit Checker(const Program& p) : prog_(p) {}

  TypedProgram run() {
    TypedProgram tp;
    tp.program = prog_;
    tp.semiring = Semiring::named(prog_.semiring);
    tp.dict_symbols = extract_dict_symbols(prog_);
    for (const auto& s : tp.dict_symbols) reserved_.insert(s.name);
    for (const auto& in : prog_.inputs) {
      if (reserved_.count(in.name))
        throw TypeError("input '" + in.name +
                        "' collides with a dictionary symbol");
      reserved_.insert(in.name);
      KeySchema::from_type(in.type.key_type());  // validates orderability
      env_.emplace_back(in.name, in.type);
    }
    for (const auto& s : tp.dict_symbols) symbol_lets_.insert(s.let_node);

    infer(*prog_.body);

    for (auto& [node, t] : raw_) tp.types[node] = finalize(t);
    return tp;
  }

 private:
  LType fresh() {
    int id = static_cast<int>(bind_.size());
    bind_.push_back(LType::var(id));
    return LType::var(id);
  }

  // Follows variable bindings at the top level only.
  LType shallow(LType t) const {
    while (t.kind == LType::Kind::Var) {
      const LType& b = bind_[static_cast<size_t>(t.var_id)];
      if (b.kind == LType::Kind::Var && b.var_id == t.var_id) return t;
      t = b;
    }
    return t;
  }

  bool occurs(int id, const LType& t) const {
    LType s = shallow(t);
    if (s.kind == LType::Kind::Var) return s.var_id == id;
    for (const auto& [n, ft] : s.fields)
      if (occurs(id, ft)) return true;
    for (const auto& sub : s.sub)
      if (occurs(id, sub)) return true;
    return false;
  }

  [[noreturn]] void fail(const std::string& msg, SrcLoc loc) {
    throw TypeError(msg + " at line " + std::to_string(loc.line) + ":" +
                    std::to_string(loc.col));
  }

  void bind_var(int id, const LType& t, SrcLoc loc) {
    if (occurs(id, t)) fail("recursive type", loc);
    bind_[static_cast<size_t>(id)] = t;
  }

  void unify(const LType& a0, const LType& b0, SrcLoc loc) {
    LType a = shallow(a0), b = shallow(b0);
    if (a.kind == LType::Kind::Var && b.kind == LType::Kind::Var) {
      if (a.var_id != b.var_id) bind_[static_cast<size_t>(a.var_id)] = b;
      return;
    }
    if (a.kind == LType::Kind::Var) {
      bind_var(a.var_id, b, loc);
      return;
    }
    if (b.kind == LType::Kind::Var) {
      bind_var(b.var_id, a, loc);
      return;
    }
    if (a.kind != b.kind)
      fail("type mismatch: " + print_type(finalize(a)) + " vs " +
               print_type(finalize(b)),
           loc);
    switch (a.kind) {
      case LType::Kind::Record: {
        if (a.fields.size() != b.fields.size())
          fail("record field mismatch", loc);
        for (size_t i = 0; i < a.fields.size(); ++i) {
          if (a.fields[i].first != b.fields[i].first)
            fail("record field mismatch: '" + a.fields[i].first + "' vs '" +
                     b.fields[i].first + "'",
                 loc);
          unify(a.fields[i].second, b.fields[i].second, loc);
        }
        break;
      }
      case LType::Kind::Dict:
        unify(a.sub[0], b.sub[0], loc);
        unify(a.sub[1], b.sub[1], loc);
        break;
      case LType::Kind::Ref:
      case LType::Kind::Iter:
        unify(a.sub[0], b.sub[0], loc);
        break;
      default:
        break;
    }
  }

  // Accepts delta types that value_add can fold into the target.
  void unify_addable(const LType& target0, const LType& delta0, SrcLoc loc) {
    LType target = shallow(target0), delta = shallow(delta0);
    if (target.kind == LType::Kind::Var || delta.kind == LType::Kind::Var) {
      unify(target, delta, loc);
      return;
    }
    if (target.kind == LType::Kind::Double && delta.numeric()) return;
    if (target.kind == LType::Kind::Record &&
        delta.kind == LType::Kind::Record) {
      if (target.fields.size() != delta.fields.size())
        fail("record field mismatch in '+='", loc);
      for (size_t i = 0; i < target.fields.size(); ++i) {
        if (target.fields[i].first != delta.fields[i].first)
          fail("record field mismatch in '+='", loc);
        unify_addable(target.fields[i].second, delta.fields[i].second, loc);
      }
      return;
    }
    if (target.kind == LType::Kind::Dict && delta.kind == LType::Kind::Dict) {
      unify(target.sub[0], delta.sub[0], loc);
      unify_addable(target.sub[1], delta.sub[1], loc);
      return;
    }
    unify(target, delta, loc);
  }

  // Key positions additionally widen int keys into double key slots.
  void unify_key(const LType& key_slot, const LType& key, SrcLoc loc) {
    LType a = shallow(key_slot), b = shallow(key);
    if (a.kind == LType::Kind::Double && b.kind == LType::Kind::Int) return;
    unify(a, b, loc);
  }

  const LType* lookup(const std::string& name) const {
    for (auto it = env_.rbegin(); it != env_.rend(); ++it)
      if (it->first == name) return &it->second;
    return nullptr;
  }

  void push_binding(const std::string& name, const LType& t, SrcLoc loc,
                    const Expr* let_node = nullptr) {
    if (reserved_.count(name) && !(let_node && symbol_lets_.count(let_node)))
      fail("'" + name + "' shadows a dictionary symbol or input", loc);
    env_.emplace_back(name, t);
  }

  LType numeric_binop(const Expr& e) {
    LType ta = shallow(infer(*e.a)), tb = shallow(infer(*e.b));
    auto check = [&](const LType& t) {
      if (t.kind != LType::Kind::Var && !t.numeric())
        fail("operator '" + std::string(binop_name(e.bop)) +
                 "' needs numeric operands, got " + print_type(finalize(t)),
             e.loc);
    };
    check(ta);
    check(tb);
    if (ta.kind == LType::Kind::Double || tb.kind == LType::Kind::Double) {
      if (ta.kind == LType::Kind::Var) unify(ta, LType::dbl(), e.loc);
      if (tb.kind == LType::Kind::Var) unify(tb, LType::dbl(), e.loc);
      return LType::dbl();
    }
    if (ta.kind == LType::Kind::Var && tb.kind == LType::Kind::Var) {
      unify(ta, tb, e.loc);
      return ta;
    }
    if (ta.kind == LType::Kind::Var) {
      unify(ta, LType::intt(), e.loc);
      return LType::intt();
    }
    if (tb.kind == LType::Kind::Var) {
      unify(tb, LType::intt(), e.loc);
      return LType::intt();
    }
    return LType::intt();
  }

  LType infer(const Expr& e) {
    LType t = infer_inner(e);
    raw_[&e] = t;
    return t;
  }

  LType infer_inner(const Expr& e) {
    switch (e.kind) {
      case Expr::Kind::Unit:
        return LType::unit();
      case Expr::Kind::IntLit:
        return LType::intt();
      case Expr::Kind::RealLit:
        return LType::dbl();
      case Expr::Kind::BoolLit:
        return LType::boolean();
      case Expr::Kind::StringLit:
        return LType::str();
      case Expr::Kind::Var: {
        const LType* t = lookup(e.name);
        if (!t) fail("unbound variable '" + e.name + "'", e.loc);
        return *t;
      }
      case Expr::Kind::Seq:
        infer(*e.a);
        return infer(*e.b);
      case Expr::Kind::Let: {
        LType tb = infer(*e.a);
        push_binding(e.name, tb, e.loc, &e);
        LType out = infer(*e.b);
        env_.pop_back();
        return out;
      }
      case Expr::Kind::If: {
        unify(infer(*e.a), LType::boolean(), e.loc);
        LType tt = infer(*e.b);
        LType te = infer(*e.c);
        unify(tt, te, e.loc);
        return tt;
      }
      case Expr::Kind::RecordCtor: {
        std::vector<std::pair<std::string, LType>> fields;
        for (const auto& [n, v] : e.rec_fields)
          fields.emplace_back(n, infer(*v));
        return LType::record(std::move(fields));
      }
      case Expr::Kind::FieldAccess: {
        LType t = shallow(infer(*e.a));
        if (t.kind == LType::Kind::Ref) t = shallow(t.sub[0]);
        if (t.kind == LType::Kind::Var)
          fail("cannot access field '" + e.name + "' of an unresolved type",
               e.loc);
        if (t.kind != LType::Kind::Record)
          fail("field access on non-record type " + print_type(finalize(t)),
               e.loc);
        const LType* ft = t.field_type(e.name);
        if (!ft) fail("record has no field '" + e.name + "'", e.loc);
        return *ft;
      }
      case Expr::Kind::BinOp: {
        switch (e.bop) {
          case BinOpKind::Add:
          case BinOpKind::Sub:
          case BinOpKind::Mul:
          case BinOpKind::Div:
            return numeric_binop(e);
          case BinOpKind::Lt:
          case BinOpKind::Le:
          case BinOpKind::Gt:
          case BinOpKind::Ge: {
            LType ta = shallow(infer(*e.a)), tb = shallow(infer(*e.b));
            if (ta.kind == LType::Kind::String ||
                tb.kind == LType::Kind::String) {
              unify(ta, LType::str(), e.loc);
              unify(tb, LType::str(), e.loc);
            } else if (ta.kind == LType::Kind::Double ||
                       tb.kind == LType::Kind::Double) {
              if (ta.kind == LType::Kind::Var) unify(ta, LType::dbl(), e.loc);
              if (tb.kind == LType::Kind::Var) unify(tb, LType::dbl(), e.loc);
              if (!shallow(ta).numeric() || !shallow(tb).numeric())
                fail("comparison needs matching operand types", e.loc);
            } else {
              unify(ta, tb, e.loc);
              LType r = shallow(ta);
              if (r.kind != LType::Kind::Var && !r.numeric() &&
                  r.kind != LType::Kind::String)
                fail("comparison on non-orderable type", e.loc);
            }
            return LType::boolean();
          }
          case BinOpKind::Eq:
          case BinOpKind::Ne: {
            LType ta = shallow(infer(*e.a)), tb = shallow(infer(*e.b));
            if (ta.kind == LType::Kind::Double ||
                tb.kind == LType::Kind::Double) {
              if (ta.kind == LType::Kind::Var) unify(ta, LType::dbl(), e.loc);
              if (tb.kind == LType::Kind::Var) unify(tb, LType::dbl(), e.loc);
              if (!shallow(ta).numeric() || !shallow(tb).numeric())
                fail("equality needs matching operand types", e.loc);
            } else {
              unify(ta, tb, e.loc);
            }
            return LType::boolean();
          }
          case BinOpKind::And:
          case BinOpKind::Or:
            unify(infer(*e.a), LType::boolean(), e.loc);
            unify(infer(*e.b), LType::boolean(), e.loc);
            return LType::boolean();
        }
        fail("bad operator", e.loc);
      }
      case Expr::Kind::UnOp: {
        LType t = shallow(infer(*e.a));
        if (e.uop == UnOpKind::Not) {
          unify(t, LType::boolean(), e.loc);
          return LType::boolean();
        }
        if (t.kind == LType::Kind::Var) {
          unify(t, LType::intt(), e.loc);
          return LType::intt();
        }
        if (!t.numeric()) fail("negation needs a numeric operand", e.loc);
        return t;
      }
      case Expr::Kind::RefInit:
        if (e.type_lit.kind == LType::Kind::Dict ||
            e.type_lit.kind == LType::Kind::Ref)
          fail("ref cells hold scalar or record values", e.loc);
        return LType::ref(e.type_lit);
      case Expr::Kind::RefUpdate: {
        LType t = shallow(infer(*e.a));
        if (t.kind != LType::Kind::Ref)
          fail("'+=' target is not a ref cell or dictionary entry", e.loc);
        unify_addable(t.sub[0], infer(*e.b), e.loc);
        return LType::unit();
      }
      case Expr::Kind::DictCtor: {
        LType k = fresh(), v = fresh();
        for (const auto& [ke, ve] : e.dict_items) {
          unify_key(k, infer(*ke), e.loc);
          unify_addable(v, infer(*ve), e.loc);
        }
        return LType::dict(k, v, e.ann);
      }
      case Expr::Kind::ForLoop: {
        LType t = shallow(infer(*e.a));
        if (t.kind == LType::Kind::Var)
          fail("cannot iterate a value of unresolved type", e.loc);
        if (t.kind != LType::Kind::Dict)
          fail("for-loop source must be a dictionary", e.loc);
        LType elem = LType::record({{"key", t.sub[0]}, {"val", t.sub[1]}});
        push_binding(e.name, elem, e.loc);
        infer(*e.b);
        env_.pop_back();
        return LType::unit();
      }
      case Expr::Kind::DictUpdate:
      case Expr::Kind::DictLookup:
      case Expr::Kind::HintedUpdate:
      case Expr::Kind::HintedLookup: {
        LType t = shallow(infer(*e.a));
        if (t.kind == LType::Kind::Var)
          fail("cannot access a dictionary of unresolved type", e.loc);
        if (t.kind != LType::Kind::Dict)
          fail("lookup target is not a dictionary", e.loc);
        if (e.kind == Expr::Kind::HintedUpdate ||
            e.kind == Expr::Kind::HintedLookup) {
          const LType* it = lookup(e.name);
          if (!it) fail("unbound iterator '" + e.name + "'", e.loc);
          unify(*it, LType::iter(t), e.loc);
        }
        unify_key(t.sub[0], infer(*e.b), e.loc);
        if (e.kind == Expr::Kind::DictUpdate ||
            e.kind == Expr::Kind::HintedUpdate) {
          unify_addable(t.sub[1], infer(*e.c), e.loc);
          return LType::unit();
        }
        return t.sub[1];
      }
      case Expr::Kind::DictIter: {
        LType t = shallow(infer(*e.a));
        if (t.kind != LType::Kind::Dict)
          fail("'.iter' needs a dictionary", e.loc);
        return LType::iter(t);
      }
    }
    fail("unhandled expression", e.loc);
  }

  // Deep substitution; unconstrained variables default to int.
  LType finalize(const LType& t0) const {
    LType t = shallow(t0);
    switch (t.kind) {
      case LType::Kind::Var:
        return LType::intt();
      case LType::Kind::Record: {
        std::vector<std::pair<std::string, LType>> fields;
        for (const auto& [n, ft] : t.fields)
          fields.emplace_back(n, finalize(ft));
        LType out;
        out.kind = LType::Kind::Record;
        out.fields = std::move(fields);
        return out;
      }
      case LType::Kind::Dict: {
        LType out = LType::dict(finalize(t.sub[0]), finalize(t.sub[1]), t.ann,
                                t.key_label);
        return out;
      }
      case LType::Kind::Ref:
        return LType::ref(finalize(t.sub[0]));
      case LType::Kind::Iter:
        return LType::iter(finalize(t.sub[0]));
      default:
        return t;
    }
  }

  const Program& prog_;
  std::vector<LType> bind_;
  std::vector<std::pair<std::string, LType>> env_;
  std::unordered_map<const Expr*, LType> raw_;
  std::set<std::string> reserved_;
  std::set<const Expr*> symbol_lets_;
};

}  // namespace

std::vector<DictSymbol> extract_dict_symbols(const Program& p) {
  std::vector<DictSymbol> out;
  collect_symbols(*p.body, out);
  return out;
}

const LType& TypedProgram::type_of(const Expr& e) const {
  auto it = types.find(&e);
  if (it == types.end())
    throw TypeError("expression has no inferred type");
  return it->second;
}

const DictSymbol* TypedProgram::symbol(const std::string& name) const {
  for (const auto& s : dict_symbols)
    if (s.name == name) return &s;
  return nullptr;
}

TypedProgram infer_types(const Program& p) {
  return Checker(p).run();
}

}  // namespace llql
