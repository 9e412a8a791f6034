#include "llql/print.hpp"

#include <charconv>
#include <cstring>
#include <sstream>

#include "llql/error.hpp"

namespace llql {

std::string format_real(double v) {
  char buf[40];
  auto res = std::to_chars(buf, buf + sizeof(buf), v);
  std::string s(buf, res.ptr);
  if (s.find('.') == std::string::npos && s.find('e') == std::string::npos &&
      s.find("inf") == std::string::npos && s.find("nan") == std::string::npos)
    s += ".0";
  return s;
}

namespace {

std::string quote_string(const std::string& s) {
  std::string out = "\"";
  for (char c : s) {
    switch (c) {
      case '"': out += "\\\""; break;
      case '\\': out += "\\\\"; break;
      case '\n': out += "\\n"; break;
      case '\t': out += "\\t"; break;
      default: out += c;
    }
  }
  out += '"';
  return out;
}

std::string ann_prefix(const DictAnnotation& a) {
  switch (a.kind) {
    case DictAnnotation::Kind::None: return "";
    case DictAnnotation::Kind::Unresolved: return "@dict ";
    case DictAnnotation::Kind::Resolved:
      return "@dict(" + quote_string(a.impl) + ") ";
  }
  return "";
}

// Precedence levels, loosest first.  Statement forms bind loosest and get
// wrapped in parentheses when they appear inside tighter expressions; in
// statement position, Seq and Let get braces so the following text is not
// swallowed into their bodies.
enum Prec {
  kSeq = 0,
  kStmt = 1,
  kOr = 2,
  kAnd = 3,
  kCmp = 4,
  kAdd = 5,
  kMul = 6,
  kUnary = 7,
  kPostfix = 8,
};

int node_prec(const Expr& e) {
  switch (e.kind) {
    case Expr::Kind::Seq: return kSeq;
    case Expr::Kind::Let:
    case Expr::Kind::If:
    case Expr::Kind::ForLoop:
    case Expr::Kind::RefUpdate:
    case Expr::Kind::DictUpdate:
    case Expr::Kind::HintedUpdate: return kStmt;
    case Expr::Kind::BinOp:
      switch (e.bop) {
        case BinOpKind::Or: return kOr;
        case BinOpKind::And: return kAnd;
        case BinOpKind::Add: case BinOpKind::Sub: return kAdd;
        case BinOpKind::Mul: case BinOpKind::Div: return kMul;
        default: return kCmp;
      }
    case Expr::Kind::UnOp: return kUnary;
    case Expr::Kind::FieldAccess:
    case Expr::Kind::DictLookup:
    case Expr::Kind::DictIter:
    case Expr::Kind::HintedLookup: return kPostfix;
    default: return kPostfix + 1;
  }
}

class Printer {
 public:
  std::string result() { return std::move(out_); }

  void program(const Program& p) {
    for (const auto& in : p.inputs) {
      out_ += "input " + in.name + " : " + print_type(in.type) + "\n";
    }
    if (!p.semiring.empty()) out_ += "pragma semiring " + p.semiring + "\n";
    if (!p.inputs.empty() || !p.semiring.empty()) out_ += "\n";
    stmt(*p.body);
    out_ += "\n";
  }

  // Statement position: brace Seq and Let so their extent is delimited.
  void stmt(const Expr& e) {
    if (e.kind == Expr::Kind::Seq || e.kind == Expr::Kind::Let) {
      block(e);
    } else {
      expr(e, kStmt);
    }
  }

  void block(const Expr& e) {
    out_ += "{\n";
    ++indent_;
    pad();
    expr(e, kSeq);
    out_ += "\n";
    --indent_;
    pad();
    out_ += "}";
  }

  void expr(const Expr& e, int ctx) {
    if (node_prec(e) < ctx) {
      out_ += "(";
      expr(e, kSeq);
      out_ += ")";
      return;
    }
    switch (e.kind) {
      case Expr::Kind::Seq:
        // Left-nested statement forms need delimiting.
        if (e.a->kind == Expr::Kind::Seq || e.a->kind == Expr::Kind::Let)
          block(*e.a);
        else
          expr(*e.a, kStmt);
        out_ += " ;\n";
        pad();
        expr(*e.b, kSeq);
        break;
      case Expr::Kind::Unit:
        out_ += "()";
        break;
      case Expr::Kind::Let:
        out_ += "let " + e.name + " = ";
        stmt(*e.a);
        out_ += " in\n";
        pad();
        expr(*e.b, kSeq);
        break;
      case Expr::Kind::If:
        out_ += "if (";
        expr(*e.a, kSeq);
        out_ += ") then ";
        stmt(*e.b);
        out_ += " else ";
        stmt(*e.c);
        break;
      case Expr::Kind::RecordCtor: {
        out_ += "{ ";
        bool first = true;
        for (const auto& [n, v] : e.rec_fields) {
          if (!first) out_ += ", ";
          first = false;
          out_ += n + " = ";
          expr(*v, kOr);
        }
        out_ += " }";
        break;
      }
      case Expr::Kind::FieldAccess:
        expr(*e.a, kPostfix);
        out_ += "." + e.name;
        break;
      case Expr::Kind::BinOp: {
        int p = node_prec(e);
        // Comparisons are non-associative in the grammar, so a comparison
        // operand on either side needs parentheses.
        bool nonassoc = p == kCmp;
        expr(*e.a, nonassoc ? p + 1 : p);
        out_ += std::string(" ") + binop_name(e.bop) + " ";
        expr(*e.b, p + 1);
        break;
      }
      case Expr::Kind::UnOp:
        out_ += e.uop == UnOpKind::Neg ? "-" : "!";
        expr(*e.a, kUnary);
        break;
      case Expr::Kind::IntLit:
        out_ += std::to_string(e.int_val);
        break;
      case Expr::Kind::RealLit:
        out_ += format_real(e.real_val);
        break;
      case Expr::Kind::BoolLit:
        out_ += e.bool_val ? "true" : "false";
        break;
      case Expr::Kind::StringLit:
        out_ += quote_string(e.str_val);
        break;
      case Expr::Kind::RefInit:
        out_ += "ref(" + print_type(e.type_lit) + ")";
        break;
      case Expr::Kind::RefUpdate:
        expr(*e.a, kPostfix);
        out_ += " += ";
        stmt(*e.b);
        break;
      case Expr::Kind::DictCtor: {
        out_ += ann_prefix(e.ann);
        if (e.dict_items.empty()) {
          out_ += "{{ }}";
          break;
        }
        out_ += "{{ ";
        bool first = true;
        for (const auto& [k, v] : e.dict_items) {
          if (!first) out_ += ", ";
          first = false;
          expr(*k, kOr);
          out_ += " -> ";
          expr(*v, kOr);
        }
        out_ += " }}";
        break;
      }
      case Expr::Kind::ForLoop:
        out_ += "for (" + e.name + " <- ";
        expr(*e.a, kStmt);
        out_ += ") ";
        block(*e.b);
        break;
      case Expr::Kind::DictUpdate:
        expr(*e.a, kPostfix);
        out_ += "(";
        expr(*e.b, kOr);
        out_ += ") += ";
        stmt(*e.c);
        break;
      case Expr::Kind::DictLookup:
        expr(*e.a, kPostfix);
        out_ += "(";
        expr(*e.b, kOr);
        out_ += ")";
        break;
      case Expr::Kind::DictIter:
        expr(*e.a, kPostfix);
        out_ += ".iter";
        break;
      case Expr::Kind::HintedUpdate:
        expr(*e.a, kPostfix);
        out_ += "<" + e.name + ">(";
        expr(*e.b, kOr);
        out_ += ") += ";
        stmt(*e.c);
        break;
      case Expr::Kind::HintedLookup:
        expr(*e.a, kPostfix);
        out_ += "<" + e.name + ">(";
        expr(*e.b, kOr);
        out_ += ")";
        break;
      case Expr::Kind::Var:
        out_ += e.name;
        break;
    }
  }

 private:
  void pad() { out_.append(static_cast<size_t>(indent_) * 2, ' '); }
  std::string out_;
  int indent_ = 0;
};

}  // namespace

std::string print_type(const LType& t) {
  switch (t.kind) {
    case LType::Kind::Var: return "?" + std::to_string(t.var_id);
    case LType::Kind::Int: return "int";
    case LType::Kind::Double: return "double";
    case LType::Kind::Bool: return "bool";
    case LType::Kind::String: return "string";
    case LType::Kind::Unit: return "unit";
    case LType::Kind::Record: {
      std::string s = "{";
      bool first = true;
      for (const auto& [n, ft] : t.fields) {
        if (!first) s += ", ";
        first = false;
        s += n + ": " + print_type(ft);
      }
      return s + "}";
    }
    case LType::Kind::Dict: {
      std::string s = ann_prefix(t.ann);
      s += "{{ ";
      if (!t.key_label.empty()) s += t.key_label + ": ";
      s += print_type(t.key_type());
      s += " -> " + print_type(t.val_type()) + " }}";
      return s;
    }
    case LType::Kind::Ref:
      return "ref(" + print_type(t.sub[0]) + ")";
    case LType::Kind::Iter:
      return "iter(" + print_type(t.sub[0]) + ")";
  }
  return "?";
}

std::string print_expr(const Expr& e) {
  Printer p;
  p.stmt(e);
  return p.result();
}

std::string print_program(const Program& p) {
  Printer pr;
  pr.program(p);
  return pr.result();
}

std::string predicate_key(const Expr& e) {
  std::string s = print_expr(e);
  // Collapse whitespace runs so multi-line forms match single-line keys.
  std::string out;
  bool ws = false;
  for (char c : s) {
    if (c == ' ' || c == '\n' || c == '\t') {
      ws = true;
      continue;
    }
    if (ws && !out.empty()) out += ' ';
    ws = false;
    out += c;
  }
  return out;
}

nlohmann::json type_to_json(const LType& t) {
  using nlohmann::json;
  switch (t.kind) {
    case LType::Kind::Var: return json{{"Var", t.var_id}};
    case LType::Kind::Int: return "int";
    case LType::Kind::Double: return "double";
    case LType::Kind::Bool: return "bool";
    case LType::Kind::String: return "string";
    case LType::Kind::Unit: return "unit";
    case LType::Kind::Record: {
      json fields = json::object();
      for (const auto& [n, ft] : t.fields) fields[n] = type_to_json(ft);
      return json{{"Record", fields}};
    }
    case LType::Kind::Dict: {
      json d{{"key", type_to_json(t.key_type())},
             {"val", type_to_json(t.val_type())}};
      if (t.ann.kind == DictAnnotation::Kind::Unresolved) d["ann"] = nullptr;
      if (t.ann.kind == DictAnnotation::Kind::Resolved) d["ann"] = t.ann.impl;
      if (!t.key_label.empty()) d["label"] = t.key_label;
      return json{{"Dict", d}};
    }
    case LType::Kind::Ref:
      return json{{"Ref", type_to_json(t.sub[0])}};
    case LType::Kind::Iter:
      return json{{"Iter", type_to_json(t.sub[0])}};
  }
  return nullptr;
}

namespace {

nlohmann::json expr_to_json(const Expr& e) {
  using nlohmann::json;
  json body = json::object();
  switch (e.kind) {
    case Expr::Kind::Seq:
      body = {{"e1", expr_to_json(*e.a)}, {"e2", expr_to_json(*e.b)}};
      break;
    case Expr::Kind::Unit:
      body = json::object();
      break;
    case Expr::Kind::Let:
      body = {{"name", e.name},
              {"bound", expr_to_json(*e.a)},
              {"body", expr_to_json(*e.b)}};
      break;
    case Expr::Kind::If:
      body = {{"cond", expr_to_json(*e.a)},
              {"then", expr_to_json(*e.b)},
              {"else", expr_to_json(*e.c)}};
      break;
    case Expr::Kind::RecordCtor: {
      json fields = json::object();
      for (const auto& [n, v] : e.rec_fields) fields[n] = expr_to_json(*v);
      body = {{"fields", fields}};
      break;
    }
    case Expr::Kind::FieldAccess:
      body = {{"record", expr_to_json(*e.a)}, {"field", e.name}};
      break;
    case Expr::Kind::BinOp:
      body = {{"op", binop_name(e.bop)},
              {"lhs", expr_to_json(*e.a)},
              {"rhs", expr_to_json(*e.b)}};
      break;
    case Expr::Kind::UnOp:
      body = {{"op", e.uop == UnOpKind::Neg ? "-" : "!"},
              {"operand", expr_to_json(*e.a)}};
      break;
    case Expr::Kind::IntLit:
      body = {{"value", e.int_val}};
      break;
    case Expr::Kind::RealLit:
      body = {{"value", format_real(e.real_val)}};
      break;
    case Expr::Kind::BoolLit:
      body = {{"value", e.bool_val}};
      break;
    case Expr::Kind::StringLit:
      body = {{"value", e.str_val}};
      break;
    case Expr::Kind::RefInit:
      body = {{"type", type_to_json(e.type_lit)}};
      break;
    case Expr::Kind::RefUpdate:
      body = {{"target", expr_to_json(*e.a)}, {"delta", expr_to_json(*e.b)}};
      break;
    case Expr::Kind::DictCtor: {
      json items = json::array();
      for (const auto& [k, v] : e.dict_items)
        items.push_back({{"key", expr_to_json(*k)}, {"val", expr_to_json(*v)}});
      body = {{"items", items}};
      if (e.ann.kind == DictAnnotation::Kind::Unresolved) body["ann"] = nullptr;
      if (e.ann.kind == DictAnnotation::Kind::Resolved) body["ann"] = e.ann.impl;
      break;
    }
    case Expr::Kind::ForLoop:
      body = {{"var", e.name},
              {"source", expr_to_json(*e.a)},
              {"body", expr_to_json(*e.b)}};
      break;
    case Expr::Kind::DictUpdate:
      body = {{"dict", expr_to_json(*e.a)},
              {"key", expr_to_json(*e.b)},
              {"delta", expr_to_json(*e.c)}};
      break;
    case Expr::Kind::DictLookup:
      body = {{"dict", expr_to_json(*e.a)}, {"key", expr_to_json(*e.b)}};
      break;
    case Expr::Kind::DictIter:
      body = {{"dict", expr_to_json(*e.a)}};
      break;
    case Expr::Kind::HintedUpdate:
      body = {{"dict", expr_to_json(*e.a)},
              {"hint", e.name},
              {"key", expr_to_json(*e.b)},
              {"delta", expr_to_json(*e.c)}};
      break;
    case Expr::Kind::HintedLookup:
      body = {{"dict", expr_to_json(*e.a)},
              {"hint", e.name},
              {"key", expr_to_json(*e.b)}};
      break;
    case Expr::Kind::Var:
      body = {{"name", e.name}};
      break;
  }
  return nlohmann::json{{kind_name(e.kind), body}};
}

}  // namespace

nlohmann::json ast_to_json(const Program& p) {
  using nlohmann::json;
  json inputs = json::array();
  for (const auto& in : p.inputs)
    inputs.push_back({{"name", in.name}, {"type", type_to_json(in.type)}});
  json j{{"inputs", inputs}, {"body", expr_to_json(*p.body)}};
  if (!p.semiring.empty()) j["semiring"] = p.semiring;
  return j;
}

}  // namespace llql
