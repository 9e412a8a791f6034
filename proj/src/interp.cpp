#include "llql/interp.hpp"

#include <chrono>
#include <set>

#include "llql/error.hpp"
#include "llql/registry.hpp"

namespace llql {

Interpreter::Interpreter(const TypedProgram& tp, const Database& db,
                         std::map<std::string, std::string> assignment,
                         std::string force_impl)
    : tp_(tp),
      db_(db),
      assignment_(std::move(assignment)),
      force_impl_(std::move(force_impl)),
      sr_(tp.semiring) {
  for (const auto& s : tp_.dict_symbols) ctor_symbol_[s.ctor] = &s;
  for (const auto& [sym, impl] : assignment_) {
    if (!tp_.symbol(sym))
      throw RuntimeError("assignment names unknown dictionary symbol '" + sym +
                         "'");
    if (!DictRegistry::instance().contains(impl))
      throw UsageError("unknown dictionary implementation '" + impl + "'");
  }
  if (!force_impl_.empty() && !DictRegistry::instance().contains(force_impl_))
    throw UsageError("unknown dictionary implementation '" + force_impl_ + "'");
  for (const auto& in : tp_.program.inputs) {
    auto it = db_.inputs.find(in.name);
    if (it == db_.inputs.end())
      throw DataError("no data loaded for input '" + in.name + "'");
    if (!it->second.is_dict())
      throw DataError("input '" + in.name + "' is not a dictionary value");
    env_.emplace_back(in.name, it->second);
  }
}

std::string Interpreter::ctor_impl(const Expr& ctor) const {
  if (!force_impl_.empty()) return force_impl_;
  if (ctor.ann.kind == DictAnnotation::Kind::Resolved) return ctor.ann.impl;
  auto sym = ctor_symbol_.find(&ctor);
  if (sym != ctor_symbol_.end()) {
    auto a = assignment_.find(sym->second->name);
    if (a != assignment_.end()) return a->second;
  }
  if (ctor.ann.kind == DictAnnotation::Kind::Unresolved) {
    std::string what = sym != ctor_symbol_.end()
                           ? "dictionary symbol '" + sym->second->name + "'"
                           : "dictionary literal";
    throw RuntimeError(what + " has no implementation assigned");
  }
  return DictRegistry::instance().names().front();
}

Value Interpreter::make_zero(const LType& t, const std::string& fallback) {
  Value z = zero_of(t, sr_, fallback);
  collect_handles(z, created_);
  return z;
}

std::shared_ptr<DictHandle> Interpreter::eval_dict(const Expr& e) {
  Value v = eval(e);
  if (!v.is_dict()) throw RuntimeError("expected a dictionary value");
  return v.as_dict();
}

Value Interpreter::lookup_result(const DictHandle& d, const Cursor& c) {
  if (c.valid) return d.impl->value_at(c);
  return make_zero(d.value_type, d.impl_name);
}

Value Interpreter::eval_binop(const Expr& e) {
  bool mp = sr_.kind == Semiring::Kind::MaxPlus;
  switch (e.bop) {
    case BinOpKind::And: {
      Value a = eval(*e.a);
      if (!a.as_bool()) return Value::of(false);
      return Value::of(eval(*e.b).as_bool());
    }
    case BinOpKind::Or: {
      Value a = eval(*e.a);
      if (a.as_bool()) return Value::of(true);
      return Value::of(eval(*e.b).as_bool());
    }
    default:
      break;
  }
  Value a = eval(*e.a);
  Value b = eval(*e.b);
  auto cmp3 = [&]() -> int {
    if (a.is_string() && b.is_string())
      return a.as_string().compare(b.as_string()) < 0
                 ? -1
                 : (a.as_string() == b.as_string() ? 0 : 1);
    if (a.is_bool() && b.is_bool())
      return static_cast<int>(a.as_bool()) - static_cast<int>(b.as_bool());
    double x = a.num(), y = b.num();
    return x < y ? -1 : (x == y ? 0 : 1);
  };
  switch (e.bop) {
    case BinOpKind::Add:
      // Semiring addition: arithmetic sum, max under max_plus.
      if (a.is_int() && b.is_int())
        return Value::of(mp ? std::max(a.as_int(), b.as_int())
                            : a.as_int() + b.as_int());
      return Value::of(mp ? std::max(a.num(), b.num()) : a.num() + b.num());
    case BinOpKind::Mul:
      // Semiring multiplication: arithmetic product, sum under max_plus.
      if (a.is_int() && b.is_int())
        return Value::of(mp ? a.as_int() + b.as_int()
                            : a.as_int() * b.as_int());
      return Value::of(mp ? a.num() + b.num() : a.num() * b.num());
    case BinOpKind::Sub:
      if (mp) throw RuntimeError("'-' is not defined under max_plus");
      if (a.is_int() && b.is_int()) return Value::of(a.as_int() - b.as_int());
      return Value::of(a.num() - b.num());
    case BinOpKind::Div:
      if (mp) throw RuntimeError("'/' is not defined under max_plus");
      if (a.is_int() && b.is_int()) {
        if (b.as_int() == 0) throw RuntimeError("integer division by zero");
        return Value::of(a.as_int() / b.as_int());
      }
      return Value::of(a.num() / b.num());
    case BinOpKind::Lt: return Value::of(cmp3() < 0);
    case BinOpKind::Le: return Value::of(cmp3() <= 0);
    case BinOpKind::Gt: return Value::of(cmp3() > 0);
    case BinOpKind::Ge: return Value::of(cmp3() >= 0);
    case BinOpKind::Eq:
      return Value::of(value_equal(a, b));
    case BinOpKind::Ne:
      return Value::of(!value_equal(a, b));
    default:
      throw RuntimeError("bad operator");
  }
}

Value Interpreter::eval(const Expr& e) {
  switch (e.kind) {
    case Expr::Kind::Seq:
      eval(*e.a);
      return eval(*e.b);
    case Expr::Kind::Unit:
      return Value::unit();
    case Expr::Kind::Let: {
      Value v = eval(*e.a);
      env_.emplace_back(e.name, std::move(v));
      Value out = eval(*e.b);
      env_.pop_back();
      return out;
    }
    case Expr::Kind::If:
      return eval(*e.a).as_bool() ? eval(*e.b) : eval(*e.c);
    case Expr::Kind::RecordCtor: {
      std::vector<std::pair<std::string, Value>> fields;
      fields.reserve(e.rec_fields.size());
      for (const auto& [n, fe] : e.rec_fields) fields.emplace_back(n, eval(*fe));
      return Value::record(std::move(fields));
    }
    case Expr::Kind::FieldAccess: {
      Value v = eval(*e.a);
      if (v.is_ref()) {
        Value inner = v.as_ref()->v;  // copy first; v may be the last owner
        v = std::move(inner);
      }
      if (!v.is_record()) throw RuntimeError("field access on a non-record");
      const Value* f = v.as_record()->field(e.name);
      if (!f) throw RuntimeError("record has no field '" + e.name + "'");
      return *f;
    }
    case Expr::Kind::BinOp:
      return eval_binop(e);
    case Expr::Kind::UnOp: {
      Value v = eval(*e.a);
      if (e.uop == UnOpKind::Not) return Value::of(!v.as_bool());
      if (v.is_int()) return Value::of(-v.as_int());
      return Value::of(-v.as_double());
    }
    case Expr::Kind::IntLit:
      return Value::of(e.int_val);
    case Expr::Kind::RealLit:
      return Value::of(e.real_val);
    case Expr::Kind::BoolLit:
      return Value::of(e.bool_val);
    case Expr::Kind::StringLit:
      return Value::of(e.str_val);
    case Expr::Kind::RefInit: {
      auto cell = std::make_shared<RefCell>();
      cell->v = make_zero(e.type_lit, DictRegistry::instance().names().front());
      Value out;
      out.v = std::move(cell);
      return out;
    }
    case Expr::Kind::RefUpdate: {
      Value target = eval(*e.a);
      if (!target.is_ref()) throw RuntimeError("'+=' target is not a ref cell");
      Value delta = eval(*e.b);
      value_add_inplace(target.as_ref()->v, delta, sr_);
      return Value::unit();
    }
    case Expr::Kind::DictCtor: {
      auto handle = make_handle(ctor_impl(e), tp_.type_of(e));
      handle->impl->reserve(e.dict_items.size());
      for (const auto& [ke, ve] : e.dict_items) {
        std::string code = handle->schema.encode(eval(*ke));
        handle->impl->emplace(code, eval(*ve));
      }
      created_.push_back(handle);
      auto sym = ctor_symbol_.find(&e);
      if (sym != ctor_symbol_.end())
        symbol_handles_[sym->second->name] = handle;
      return Value::of(std::move(handle));
    }
    case Expr::Kind::ForLoop: {
      auto d = eval_dict(*e.a);
      for (Cursor c = d->impl->begin(); c.valid; d->impl->advance(c)) {
        Value elem = Value::record({{"key", d->schema.decode(d->impl->key_at(c))},
                                    {"val", d->impl->value_at(c)}});
        env_.emplace_back(e.name, std::move(elem));
        eval(*e.b);
        env_.pop_back();
      }
      return Value::unit();
    }
    case Expr::Kind::DictUpdate: {
      auto d = eval_dict(*e.a);
      std::string code = d->schema.encode(eval(*e.b));
      Value delta = eval(*e.c);
      Cursor c = d->impl->find(code);
      if (c.valid)
        value_add_inplace(d->impl->value_at(c), delta, sr_);
      else
        d->impl->emplace(code, std::move(delta));
      return Value::unit();
    }
    case Expr::Kind::DictLookup: {
      auto d = eval_dict(*e.a);
      std::string code = d->schema.encode(eval(*e.b));
      return lookup_result(*d, d->impl->find(code));
    }
    case Expr::Kind::DictIter: {
      auto d = eval_dict(*e.a);
      auto cell = std::make_shared<IterCell>();
      cell->cur = d->impl->begin();
      cell->dict = std::move(d);
      Value out;
      out.v = std::move(cell);
      return out;
    }
    case Expr::Kind::HintedLookup: {
      auto d = eval_dict(*e.a);
      Value itv;
      for (auto it = env_.rbegin(); it != env_.rend(); ++it)
        if (it->first == e.name) {
          itv = it->second;
          break;
        }
      if (!itv.is_iter()) throw RuntimeError("'" + e.name + "' is not an iterator");
      auto cell = itv.as_iter();
      if (cell->dict != d)
        throw RuntimeError("iterator '" + e.name +
                           "' is bound to a different dictionary");
      std::string code = d->schema.encode(eval(*e.b));
      auto [res, next] = d->impl->find_hint(cell->cur, code);
      cell->cur = next;
      return lookup_result(*d, res);
    }
    case Expr::Kind::HintedUpdate: {
      auto d = eval_dict(*e.a);
      Value itv;
      for (auto it = env_.rbegin(); it != env_.rend(); ++it)
        if (it->first == e.name) {
          itv = it->second;
          break;
        }
      if (!itv.is_iter()) throw RuntimeError("'" + e.name + "' is not an iterator");
      auto cell = itv.as_iter();
      if (cell->dict != d)
        throw RuntimeError("iterator '" + e.name +
                           "' is bound to a different dictionary");
      std::string code = d->schema.encode(eval(*e.b));
      Value delta = eval(*e.c);
      auto [res, next] = d->impl->find_hint(cell->cur, code);
      if (res.valid) {
        value_add_inplace(d->impl->value_at(res), delta, sr_);
        cell->cur = next;
      } else {
        auto [ins, next2] = d->impl->emplace_hint(next, code, std::move(delta));
        cell->cur = next2;
      }
      return Value::unit();
    }
    case Expr::Kind::Var: {
      for (auto it = env_.rbegin(); it != env_.rend(); ++it)
        if (it->first == e.name) return it->second;
      throw RuntimeError("unbound variable '" + e.name + "'");
    }
  }
  throw RuntimeError("unhandled expression");
}

Value Interpreter::eval_program() {
  Value result = eval(*tp_.program.body);
  if (result.is_ref()) {
    // Copy out before reassigning: `result` may hold the cell's last owner.
    Value inner = result.as_ref()->v;
    result = std::move(inner);
  }
  return result;
}

RunResult Interpreter::run() {
  std::vector<std::shared_ptr<DictHandle>> input_handles;
  for (const auto& [name, v] : db_.inputs) collect_handles(v, input_handles);
  for (const auto& h : input_handles) h->impl->counters().reset();

  auto t0 = std::chrono::steady_clock::now();
  Value result = eval_program();
  auto t1 = std::chrono::steady_clock::now();

  RunResult rr;
  rr.result = std::move(result);
  rr.wall_ms = std::chrono::duration<double, std::milli>(t1 - t0).count();
  std::set<const DictBase*> seen;
  auto fold = [&](const std::shared_ptr<DictHandle>& h) {
    if (seen.insert(h->impl.get()).second) rr.counters += h->impl->counters();
  };
  for (const auto& h : input_handles) fold(h);
  for (const auto& h : created_) fold(h);
  for (const auto& [sym, h] : symbol_handles_)
    rr.symbol_sizes[sym] = h->size();
  return rr;
}

RunResult run_program(const TypedProgram& tp, const Database& db,
                      const std::map<std::string, std::string>& assignment,
                      const std::string& force_impl) {
  Interpreter in(tp, db, assignment, force_impl);
  return in.run();
}

void collect_handles(const Value& v,
                     std::vector<std::shared_ptr<DictHandle>>& out) {
  if (v.is_dict()) {
    const auto& h = v.as_dict();
    out.push_back(h);
    for (Cursor c = h->impl->begin(); c.valid; h->impl->advance(c))
      collect_handles(h->impl->value_at(c), out);
    return;
  }
  if (v.is_record()) {
    for (const auto& [n, f] : v.as_record()->fields) collect_handles(f, out);
    return;
  }
  if (v.is_ref()) collect_handles(v.as_ref()->v, out);
}

}  // namespace llql
