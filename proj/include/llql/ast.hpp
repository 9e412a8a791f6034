#pragma once

#include <cstdint>
#include <memory>
#include <string>
#include <utility>
#include <vector>

namespace llql {

struct SrcLoc {
  int line = 0;
  int col = 0;
};

// Dictionary implementation annotation attached to dict constructors and
// dict types.  Unresolved annotations are filled in by the synthesizer.
struct DictAnnotation {
  enum class Kind { None, Unresolved, Resolved };
  Kind kind = Kind::None;
  std::string impl;  // valid when Resolved

  static DictAnnotation none() { return {Kind::None, {}}; }
  static DictAnnotation unresolved() { return {Kind::Unresolved, {}}; }
  static DictAnnotation resolved(std::string name) {
    return {Kind::Resolved, std::move(name)};
  }
  bool operator==(const DictAnnotation& o) const {
    return kind == o.kind && impl == o.impl;
  }
};

// Types of the language.  Record fields are kept sorted by name so that
// structural equality and ordering are canonical.  Var is an inference
// variable and never survives type checking.
struct LType {
  enum class Kind {
    Var,
    Int,
    Double,
    Bool,
    String,
    Unit,
    Record,
    Dict,
    Ref,
    Iter,
  };
  Kind kind = Kind::Var;
  int var_id = -1;  // Var only
  std::vector<std::pair<std::string, LType>> fields;  // Record, sorted
  std::vector<LType> sub;  // Dict: {key,val}; Ref/Iter: {inner}
  DictAnnotation ann;      // Dict only
  std::string key_label;   // Dict only: column label for scalar keys

  static LType var(int id) {
    LType t; t.kind = Kind::Var; t.var_id = id; return t;
  }
  static LType intt() { LType t; t.kind = Kind::Int; return t; }
  static LType dbl() { LType t; t.kind = Kind::Double; return t; }
  static LType boolean() { LType t; t.kind = Kind::Bool; return t; }
  static LType str() { LType t; t.kind = Kind::String; return t; }
  static LType unit() { LType t; t.kind = Kind::Unit; return t; }
  static LType record(std::vector<std::pair<std::string, LType>> fs);
  static LType dict(LType key, LType val,
                    DictAnnotation a = DictAnnotation::none(),
                    std::string label = {});
  static LType ref(LType inner) {
    LType t; t.kind = Kind::Ref; t.sub.push_back(std::move(inner)); return t;
  }
  static LType iter(LType dict_type) {
    LType t; t.kind = Kind::Iter; t.sub.push_back(std::move(dict_type)); return t;
  }

  bool is(Kind k) const { return kind == k; }
  bool numeric() const { return kind == Kind::Int || kind == Kind::Double; }
  bool scalar() const {
    return kind == Kind::Int || kind == Kind::Double ||
           kind == Kind::Bool || kind == Kind::String;
  }
  const LType& key_type() const { return sub[0]; }
  const LType& val_type() const { return sub[1]; }
  const LType* field_type(const std::string& name) const;

  // Structural equality; annotations and labels are ignored.
  bool equals(const LType& o) const;
};

enum class BinOpKind {
  Add, Sub, Mul, Div,
  Lt, Le, Gt, Ge, Eq, Ne,
  And, Or,
};

enum class UnOpKind { Neg, Not };

struct Expr;
using ExprPtr = std::shared_ptr<const Expr>;

// One node kind per grammar production plus Var for identifier references.
struct Expr {
  enum class Kind {
    Seq,           // a ; b
    Unit,          // ()
    Let,           // let name = a in b
    If,            // if (a) then b else c
    RecordCtor,    // { f = e, ... }
    FieldAccess,   // a.name
    BinOp,         // a op b
    UnOp,          // op a
    IntLit,
    RealLit,
    BoolLit,
    StringLit,
    RefInit,       // ref(type)
    RefUpdate,     // a += b   (a is a ref)
    DictCtor,      // @ann {{ k -> v, ... }}
    ForLoop,       // for (name <- a) b
    DictUpdate,    // a(b) += c
    DictLookup,    // a(b)
    DictIter,      // a.iter
    HintedUpdate,  // a<name>(b) += c
    HintedLookup,  // a<name>(b)
    Var,
  };

  Kind kind;
  ExprPtr a, b, c;
  std::string name;  // Let/ForLoop var, FieldAccess field, Var name, hint var
  std::vector<std::pair<std::string, ExprPtr>> rec_fields;   // RecordCtor
  std::vector<std::pair<ExprPtr, ExprPtr>> dict_items;       // DictCtor
  DictAnnotation ann;  // DictCtor
  LType type_lit;      // RefInit
  BinOpKind bop = BinOpKind::Add;
  UnOpKind uop = UnOpKind::Neg;
  int64_t int_val = 0;
  double real_val = 0.0;
  bool bool_val = false;
  std::string str_val;
  SrcLoc loc;
};

struct InputDecl {
  std::string name;
  LType type;  // always a Dict type
  SrcLoc loc;
};

struct Program {
  std::vector<InputDecl> inputs;
  std::string semiring;  // "" means sum_product
  ExprPtr body;
};

// Node builders.  Literal values must be non-negative; negation is a UnOp.
ExprPtr mk_seq(ExprPtr a, ExprPtr b, SrcLoc loc = {});
ExprPtr mk_unit(SrcLoc loc = {});
ExprPtr mk_let(std::string name, ExprPtr bound, ExprPtr body, SrcLoc loc = {});
ExprPtr mk_if(ExprPtr cond, ExprPtr then_e, ExprPtr else_e, SrcLoc loc = {});
ExprPtr mk_record(std::vector<std::pair<std::string, ExprPtr>> fields,
                  SrcLoc loc = {});
ExprPtr mk_field(ExprPtr rec, std::string field, SrcLoc loc = {});
ExprPtr mk_binop(BinOpKind op, ExprPtr a, ExprPtr b, SrcLoc loc = {});
ExprPtr mk_unop(UnOpKind op, ExprPtr a, SrcLoc loc = {});
ExprPtr mk_int(int64_t v, SrcLoc loc = {});
ExprPtr mk_real(double v, SrcLoc loc = {});
ExprPtr mk_bool(bool v, SrcLoc loc = {});
ExprPtr mk_string(std::string v, SrcLoc loc = {});
ExprPtr mk_ref_init(LType t, SrcLoc loc = {});
ExprPtr mk_ref_update(ExprPtr target, ExprPtr delta, SrcLoc loc = {});
ExprPtr mk_dict_ctor(std::vector<std::pair<ExprPtr, ExprPtr>> items,
                     DictAnnotation ann, SrcLoc loc = {});
ExprPtr mk_for(std::string var, ExprPtr source, ExprPtr body, SrcLoc loc = {});
ExprPtr mk_dict_update(ExprPtr dict, ExprPtr key, ExprPtr val, SrcLoc loc = {});
ExprPtr mk_dict_lookup(ExprPtr dict, ExprPtr key, SrcLoc loc = {});
ExprPtr mk_dict_iter(ExprPtr dict, SrcLoc loc = {});
ExprPtr mk_hinted_update(ExprPtr dict, std::string hint, ExprPtr key,
                         ExprPtr val, SrcLoc loc = {});
ExprPtr mk_hinted_lookup(ExprPtr dict, std::string hint, ExprPtr key,
                         SrcLoc loc = {});
ExprPtr mk_var(std::string name, SrcLoc loc = {});

bool expr_equal(const Expr& a, const Expr& b);
bool program_equal(const Program& a, const Program& b);

const char* binop_name(BinOpKind op);  // operator spelling, e.g. "+"
const char* kind_name(Expr::Kind k);

}  // namespace llql
