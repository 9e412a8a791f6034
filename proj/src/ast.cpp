#include "llql/ast.hpp"

#include <algorithm>
#include <cassert>

#include "llql/error.hpp"

namespace llql {

LType LType::record(std::vector<std::pair<std::string, LType>> fs) {
  std::sort(fs.begin(), fs.end(),
            [](const auto& a, const auto& b) { return a.first < b.first; });
  for (size_t i = 1; i < fs.size(); ++i)
    if (fs[i].first == fs[i - 1].first)
      throw TypeError("duplicate record field '" + fs[i].first + "'");
  LType t;
  t.kind = Kind::Record;
  t.fields = std::move(fs);
  return t;
}

LType LType::dict(LType key, LType val, DictAnnotation a, std::string label) {
  LType t;
  t.kind = Kind::Dict;
  t.sub.push_back(std::move(key));
  t.sub.push_back(std::move(val));
  t.ann = std::move(a);
  t.key_label = std::move(label);
  return t;
}

const LType* LType::field_type(const std::string& name) const {
  for (const auto& [n, t] : fields)
    if (n == name) return &t;
  return nullptr;
}

bool LType::equals(const LType& o) const {
  if (kind != o.kind) return false;
  switch (kind) {
    case Kind::Var:
      return var_id == o.var_id;
    case Kind::Record: {
      if (fields.size() != o.fields.size()) return false;
      for (size_t i = 0; i < fields.size(); ++i)
        if (fields[i].first != o.fields[i].first ||
            !fields[i].second.equals(o.fields[i].second))
          return false;
      return true;
    }
    case Kind::Dict:
      return sub[0].equals(o.sub[0]) && sub[1].equals(o.sub[1]);
    case Kind::Ref:
    case Kind::Iter:
      return sub[0].equals(o.sub[0]);
    default:
      return true;
  }
}

namespace {
std::shared_ptr<Expr> node(Expr::Kind k, SrcLoc loc) {
  auto e = std::make_shared<Expr>();
  e->kind = k;
  e->loc = loc;
  return e;
}
}  // namespace

ExprPtr mk_seq(ExprPtr a, ExprPtr b, SrcLoc loc) {
  auto e = node(Expr::Kind::Seq, loc);
  e->a = std::move(a);
  e->b = std::move(b);
  return e;
}

ExprPtr mk_unit(SrcLoc loc) { return node(Expr::Kind::Unit, loc); }

ExprPtr mk_let(std::string name, ExprPtr bound, ExprPtr body, SrcLoc loc) {
  auto e = node(Expr::Kind::Let, loc);
  e->name = std::move(name);
  e->a = std::move(bound);
  e->b = std::move(body);
  return e;
}

ExprPtr mk_if(ExprPtr cond, ExprPtr then_e, ExprPtr else_e, SrcLoc loc) {
  auto e = node(Expr::Kind::If, loc);
  e->a = std::move(cond);
  e->b = std::move(then_e);
  e->c = std::move(else_e);
  return e;
}

ExprPtr mk_record(std::vector<std::pair<std::string, ExprPtr>> fields,
                  SrcLoc loc) {
  std::sort(fields.begin(), fields.end(),
            [](const auto& a, const auto& b) { return a.first < b.first; });
  for (size_t i = 1; i < fields.size(); ++i)
    if (fields[i].first == fields[i - 1].first)
      throw ParseError("duplicate record field '" + fields[i].first + "'",
                       loc.line, loc.col);
  auto e = node(Expr::Kind::RecordCtor, loc);
  e->rec_fields = std::move(fields);
  return e;
}

ExprPtr mk_field(ExprPtr rec, std::string field, SrcLoc loc) {
  auto e = node(Expr::Kind::FieldAccess, loc);
  e->a = std::move(rec);
  e->name = std::move(field);
  return e;
}

ExprPtr mk_binop(BinOpKind op, ExprPtr a, ExprPtr b, SrcLoc loc) {
  auto e = node(Expr::Kind::BinOp, loc);
  e->bop = op;
  e->a = std::move(a);
  e->b = std::move(b);
  return e;
}

ExprPtr mk_unop(UnOpKind op, ExprPtr a, SrcLoc loc) {
  auto e = node(Expr::Kind::UnOp, loc);
  e->uop = op;
  e->a = std::move(a);
  return e;
}

ExprPtr mk_int(int64_t v, SrcLoc loc) {
  assert(v >= 0 && "negative literals are expressed with unary minus");
  auto e = node(Expr::Kind::IntLit, loc);
  e->int_val = v;
  return e;
}

ExprPtr mk_real(double v, SrcLoc loc) {
  assert(!(v < 0) && "negative literals are expressed with unary minus");
  auto e = node(Expr::Kind::RealLit, loc);
  e->real_val = v;
  return e;
}

ExprPtr mk_bool(bool v, SrcLoc loc) {
  auto e = node(Expr::Kind::BoolLit, loc);
  e->bool_val = v;
  return e;
}

ExprPtr mk_string(std::string v, SrcLoc loc) {
  auto e = node(Expr::Kind::StringLit, loc);
  e->str_val = std::move(v);
  return e;
}

ExprPtr mk_ref_init(LType t, SrcLoc loc) {
  auto e = node(Expr::Kind::RefInit, loc);
  e->type_lit = std::move(t);
  return e;
}

ExprPtr mk_ref_update(ExprPtr target, ExprPtr delta, SrcLoc loc) {
  auto e = node(Expr::Kind::RefUpdate, loc);
  e->a = std::move(target);
  e->b = std::move(delta);
  return e;
}

ExprPtr mk_dict_ctor(std::vector<std::pair<ExprPtr, ExprPtr>> items,
                     DictAnnotation ann, SrcLoc loc) {
  auto e = node(Expr::Kind::DictCtor, loc);
  e->dict_items = std::move(items);
  e->ann = std::move(ann);
  return e;
}

ExprPtr mk_for(std::string var, ExprPtr source, ExprPtr body, SrcLoc loc) {
  auto e = node(Expr::Kind::ForLoop, loc);
  e->name = std::move(var);
  e->a = std::move(source);
  e->b = std::move(body);
  return e;
}

ExprPtr mk_dict_update(ExprPtr dict, ExprPtr key, ExprPtr val, SrcLoc loc) {
  auto e = node(Expr::Kind::DictUpdate, loc);
  e->a = std::move(dict);
  e->b = std::move(key);
  e->c = std::move(val);
  return e;
}

ExprPtr mk_dict_lookup(ExprPtr dict, ExprPtr key, SrcLoc loc) {
  auto e = node(Expr::Kind::DictLookup, loc);
  e->a = std::move(dict);
  e->b = std::move(key);
  return e;
}

ExprPtr mk_dict_iter(ExprPtr dict, SrcLoc loc) {
  auto e = node(Expr::Kind::DictIter, loc);
  e->a = std::move(dict);
  return e;
}

ExprPtr mk_hinted_update(ExprPtr dict, std::string hint, ExprPtr key,
                         ExprPtr val, SrcLoc loc) {
  auto e = node(Expr::Kind::HintedUpdate, loc);
  e->a = std::move(dict);
  e->name = std::move(hint);
  e->b = std::move(key);
  e->c = std::move(val);
  return e;
}

ExprPtr mk_hinted_lookup(ExprPtr dict, std::string hint, ExprPtr key,
                         SrcLoc loc) {
  auto e = node(Expr::Kind::HintedLookup, loc);
  e->a = std::move(dict);
  e->name = std::move(hint);
  e->b = std::move(key);
  return e;
}

ExprPtr mk_var(std::string name, SrcLoc loc) {
  auto e = node(Expr::Kind::Var, loc);
  e->name = std::move(name);
  return e;
}

bool expr_equal(const Expr& a, const Expr& b) {
  if (a.kind != b.kind) return false;
  auto sub_eq = [](const ExprPtr& x, const ExprPtr& y) {
    if (!x || !y) return !x && !y;
    return expr_equal(*x, *y);
  };
  if (!sub_eq(a.a, b.a) || !sub_eq(a.b, b.b) || !sub_eq(a.c, b.c)) return false;
  if (a.name != b.name) return false;
  switch (a.kind) {
    case Expr::Kind::BinOp:
      if (a.bop != b.bop) return false;
      break;
    case Expr::Kind::UnOp:
      if (a.uop != b.uop) return false;
      break;
    case Expr::Kind::IntLit:
      if (a.int_val != b.int_val) return false;
      break;
    case Expr::Kind::RealLit:
      if (a.real_val != b.real_val) return false;
      break;
    case Expr::Kind::BoolLit:
      if (a.bool_val != b.bool_val) return false;
      break;
    case Expr::Kind::StringLit:
      if (a.str_val != b.str_val) return false;
      break;
    case Expr::Kind::RefInit:
      if (!a.type_lit.equals(b.type_lit)) return false;
      break;
    case Expr::Kind::RecordCtor: {
      if (a.rec_fields.size() != b.rec_fields.size()) return false;
      for (size_t i = 0; i < a.rec_fields.size(); ++i) {
        if (a.rec_fields[i].first != b.rec_fields[i].first) return false;
        if (!expr_equal(*a.rec_fields[i].second, *b.rec_fields[i].second))
          return false;
      }
      break;
    }
    case Expr::Kind::DictCtor: {
      if (!(a.ann == b.ann)) return false;
      if (a.dict_items.size() != b.dict_items.size()) return false;
      for (size_t i = 0; i < a.dict_items.size(); ++i) {
        if (!expr_equal(*a.dict_items[i].first, *b.dict_items[i].first) ||
            !expr_equal(*a.dict_items[i].second, *b.dict_items[i].second))
          return false;
      }
      break;
    }
    default:
      break;
  }
  return true;
}

bool program_equal(const Program& a, const Program& b) {
  if (a.semiring != b.semiring) return false;
  if (a.inputs.size() != b.inputs.size()) return false;
  for (size_t i = 0; i < a.inputs.size(); ++i) {
    if (a.inputs[i].name != b.inputs[i].name) return false;
    if (!a.inputs[i].type.equals(b.inputs[i].type)) return false;
    // Input dict annotations are significant for execution.
    if (!(a.inputs[i].type.ann == b.inputs[i].type.ann)) return false;
  }
  return expr_equal(*a.body, *b.body);
}

const char* binop_name(BinOpKind op) {
  switch (op) {
    case BinOpKind::Add: return "+";
    case BinOpKind::Sub: return "-";
    case BinOpKind::Mul: return "*";
    case BinOpKind::Div: return "/";
    case BinOpKind::Lt: return "<";
    case BinOpKind::Le: return "<=";
    case BinOpKind::Gt: return ">";
    case BinOpKind::Ge: return ">=";
    case BinOpKind::Eq: return "==";
    case BinOpKind::Ne: return "!=";
    case BinOpKind::And: return "&&";
    case BinOpKind::Or: return "||";
  }
  return "?";
}

const char* kind_name(Expr::Kind k) {
  switch (k) {
    case Expr::Kind::Seq: return "Seq";
    case Expr::Kind::Unit: return "Unit";
    case Expr::Kind::Let: return "Let";
    case Expr::Kind::If: return "If";
    case Expr::Kind::RecordCtor: return "RecordCtor";
    case Expr::Kind::FieldAccess: return "FieldAccess";
    case Expr::Kind::BinOp: return "BinOp";
    case Expr::Kind::UnOp: return "UnOp";
    case Expr::Kind::IntLit: return "IntLit";
    case Expr::Kind::RealLit: return "RealLit";
    case Expr::Kind::BoolLit: return "BoolLit";
    case Expr::Kind::StringLit: return "StringLit";
    case Expr::Kind::RefInit: return "RefInit";
    case Expr::Kind::RefUpdate: return "RefUpdate";
    case Expr::Kind::DictCtor: return "DictCtor";
    case Expr::Kind::ForLoop: return "ForLoop";
    case Expr::Kind::DictUpdate: return "DictUpdate";
    case Expr::Kind::DictLookup: return "DictLookup";
    case Expr::Kind::DictIter: return "DictIter";
    case Expr::Kind::HintedUpdate: return "HintedUpdate";
    case Expr::Kind::HintedLookup: return "HintedLookup";
    case Expr::Kind::Var: return "Var";
  }
  return "?";
}

}  // namespace llql
