#include "llql/parse.hpp"

#include <cctype>
#include <charconv>
#include <cstdlib>
#include <map>
#include <vector>

#include "llql/error.hpp"
#include "llql/registry.hpp"

namespace llql {
namespace {

enum class Tok {
  End, Ident, Int, Real, String,
  LParen, RParen, LBrace, RBrace, LDict, RDict,
  Semi, Comma, Colon, Dot, Arrow, BackArrow,
  Assign, PlusAssign,
  Plus, Minus, Star, Slash,
  Lt, Le, Gt, Ge, EqEq, Ne, AndAnd, OrOr, Bang, At,
  KwLet, KwIn, KwFor, KwIf, KwThen, KwElse, KwTrue, KwFalse, KwRef,
  KwInput, KwPragma,
  KwInt, KwDouble, KwBool, KwString, KwUnit,
};

struct Token {
  Tok kind;
  std::string text;
  int64_t ival = 0;
  double dval = 0.0;
  int line = 1, col = 1;
};

const std::map<std::string, Tok, std::less<>> kKeywords = {
    {"let", Tok::KwLet},       {"in", Tok::KwIn},
    {"for", Tok::KwFor},       {"if", Tok::KwIf},
    {"then", Tok::KwThen},     {"else", Tok::KwElse},
    {"true", Tok::KwTrue},     {"false", Tok::KwFalse},
    {"ref", Tok::KwRef},       {"input", Tok::KwInput},
    {"pragma", Tok::KwPragma}, {"int", Tok::KwInt},
    {"double", Tok::KwDouble}, {"bool", Tok::KwBool},
    {"string", Tok::KwString}, {"unit", Tok::KwUnit},
};

class Lexer {
 public:
  explicit Lexer(std::string_view text) : s_(text) {}

  std::vector<Token> run() {
    std::vector<Token> out;
    for (;;) {
      skip_ws();
      Token t;
      t.line = line_;
      t.col = col_;
      if (eof()) {
        t.kind = Tok::End;
        out.push_back(t);
        return out;
      }
      char c = peek();
      if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') {
        std::string id;
        while (!eof() && (std::isalnum(static_cast<unsigned char>(peek())) ||
                          peek() == '_'))
          id += get();
        auto it = kKeywords.find(id);
        t.kind = it == kKeywords.end() ? Tok::Ident : it->second;
        t.text = std::move(id);
      } else if (std::isdigit(static_cast<unsigned char>(c))) {
        lex_number(t);
      } else if (c == '"') {
        lex_string(t);
      } else {
        lex_sym(t);
      }
      out.push_back(std::move(t));
    }
  }

 private:
  bool eof(size_t k = 0) const { return pos_ + k >= s_.size(); }
  char peek(size_t k = 0) const { return pos_ + k < s_.size() ? s_[pos_ + k] : '\0'; }
  char get() {
    char c = s_[pos_++];
    if (c == '\n') {
      ++line_;
      col_ = 1;
    } else {
      ++col_;
    }
    return c;
  }

  void skip_ws() {
    for (;;) {
      while (!eof() && std::isspace(static_cast<unsigned char>(peek()))) get();
      if (peek() == '/' && peek(1) == '/') {
        while (!eof() && peek() != '\n') get();
        continue;
      }
      break;
    }
  }

  void lex_number(Token& t) {
    std::string num;
    while (std::isdigit(static_cast<unsigned char>(peek()))) num += get();
    bool real = false;
    if (peek() == '.' && std::isdigit(static_cast<unsigned char>(peek(1)))) {
      real = true;
      num += get();
      while (std::isdigit(static_cast<unsigned char>(peek()))) num += get();
    }
    if (peek() == 'e' || peek() == 'E') {
      size_t k = 1;
      if (peek(1) == '+' || peek(1) == '-') k = 2;
      if (std::isdigit(static_cast<unsigned char>(peek(k)))) {
        real = true;
        num += get();
        if (peek() == '+' || peek() == '-') num += get();
        while (std::isdigit(static_cast<unsigned char>(peek()))) num += get();
      }
    }
    if (real) {
      t.kind = Tok::Real;
      t.dval = std::strtod(num.c_str(), nullptr);
    } else {
      t.kind = Tok::Int;
      auto res = std::from_chars(num.data(), num.data() + num.size(), t.ival);
      if (res.ec != std::errc())
        throw ParseError("integer literal out of range", t.line, t.col);
    }
    t.text = std::move(num);
  }

  void lex_string(Token& t) {
    get();  // opening quote
    std::string v;
    for (;;) {
      if (eof()) throw ParseError("unterminated string", t.line, t.col);
      char c = get();
      if (c == '"') break;
      if (c == '\\') {
        if (eof()) throw ParseError("unterminated string", t.line, t.col);
        char e = get();
        switch (e) {
          case '"': v += '"'; break;
          case '\\': v += '\\'; break;
          case 'n': v += '\n'; break;
          case 't': v += '\t'; break;
          default:
            throw ParseError(std::string("unknown escape '\\") + e + "'",
                             t.line, t.col);
        }
      } else {
        v += c;
      }
    }
    t.kind = Tok::String;
    t.text = std::move(v);
  }

  void lex_sym(Token& t) {
    char c = get();
    auto two = [&](char second, Tok yes, Tok no) {
      if (peek() == second) {
        get();
        t.kind = yes;
      } else {
        t.kind = no;
      }
    };
    switch (c) {
      case '(': t.kind = Tok::LParen; break;
      case ')': t.kind = Tok::RParen; break;
      case '{': two('{', Tok::LDict, Tok::LBrace); break;
      case '}': two('}', Tok::RDict, Tok::RBrace); break;
      case ';': t.kind = Tok::Semi; break;
      case ',': t.kind = Tok::Comma; break;
      case ':': t.kind = Tok::Colon; break;
      case '.': t.kind = Tok::Dot; break;
      case '@': t.kind = Tok::At; break;
      case '+': two('=', Tok::PlusAssign, Tok::Plus); break;
      case '-':
        if (peek() == '>') {
          get();
          t.kind = Tok::Arrow;
        } else {
          t.kind = Tok::Minus;
        }
        break;
      case '*': t.kind = Tok::Star; break;
      case '/': t.kind = Tok::Slash; break;
      case '<':
        if (peek() == '-') {
          get();
          t.kind = Tok::BackArrow;
        } else {
          two('=', Tok::Le, Tok::Lt);
        }
        break;
      case '>': two('=', Tok::Ge, Tok::Gt); break;
      case '=': two('=', Tok::EqEq, Tok::Assign); break;
      case '!': two('=', Tok::Ne, Tok::Bang); break;
      case '&':
        if (peek() == '&') {
          get();
          t.kind = Tok::AndAnd;
          break;
        }
        throw ParseError("stray '&'", t.line, t.col);
      case '|':
        if (peek() == '|') {
          get();
          t.kind = Tok::OrOr;
          break;
        }
        throw ParseError("stray '|'", t.line, t.col);
      default:
        throw ParseError(std::string("unexpected character '") + c + "'",
                         t.line, t.col);
    }
  }

  std::string_view s_;
  size_t pos_ = 0;
  int line_ = 1, col_ = 1;
};

class Parser {
 public:
  explicit Parser(std::string_view text) : toks_(Lexer(text).run()) {}

  Program program() {
    Program p;
    for (;;) {
      if (at(Tok::KwInput)) {
        Token kw = get();
        InputDecl d;
        d.loc = {kw.line, kw.col};
        d.name = expect(Tok::Ident, "input name").text;
        expect(Tok::Colon, "':'");
        d.type = type();
        if (d.type.kind != LType::Kind::Dict)
          throw ParseError("input '" + d.name + "' must have dictionary type",
                           kw.line, kw.col);
        for (const auto& prev : p.inputs)
          if (prev.name == d.name)
            throw ParseError("duplicate input '" + d.name + "'", kw.line,
                             kw.col);
        p.inputs.push_back(std::move(d));
      } else if (at(Tok::KwPragma)) {
        Token kw = get();
        std::string key = expect(Tok::Ident, "pragma name").text;
        std::string val = expect(Tok::Ident, "pragma value").text;
        if (key != "semiring")
          throw ParseError("unknown pragma '" + key + "'", kw.line, kw.col);
        if (val != "sum_product" && val != "max_plus")
          throw ParseError("unknown semiring '" + val + "'", kw.line, kw.col);
        p.semiring = val == "sum_product" ? "" : val;
      } else {
        break;
      }
    }
    p.body = seq();
    expect(Tok::End, "end of input");
    check_hints(*p.body);
    return p;
  }

  ExprPtr expr_only() {
    auto e = seq();
    expect(Tok::End, "end of input");
    check_hints(*e);
    return e;
  }

  LType type_only() {
    auto t = type();
    expect(Tok::End, "end of input");
    return t;
  }

 private:
  const Token& peek(size_t k = 0) const {
    size_t i = pos_ + k;
    return i < toks_.size() ? toks_[i] : toks_.back();
  }
  bool at(Tok k, size_t ahead = 0) const { return peek(ahead).kind == k; }
  Token get() { return toks_[std::min(pos_++, toks_.size() - 1)]; }
  Token expect(Tok k, const char* what) {
    if (!at(k)) {
      const Token& t = peek();
      throw ParseError(std::string("expected ") + what, t.line, t.col);
    }
    return get();
  }

  // '}}' lexes as a dictionary closer; when a single '}' is needed and the
  // next token is '}}', split it so adjacent record/block closers still work.
  Token expect_rbrace() {
    if (at(Tok::RDict) && pos_ < toks_.size()) {
      Token& t = toks_[pos_];
      t.kind = Tok::RBrace;
      Token half = t;
      t.col += 1;
      return half;
    }
    return expect(Tok::RBrace, "'}'");
  }
  SrcLoc loc() const { return {peek().line, peek().col}; }

  LType scalar_type() {
    LType t = type();
    if (!t.scalar()) {
      const Token& tk = peek();
      throw ParseError("expected scalar type", tk.line, tk.col);
    }
    return t;
  }

  DictAnnotation annotation() {
    expect(Tok::At, "'@'");
    Token name = expect(Tok::Ident, "annotation name");
    if (name.text == "ht") return DictAnnotation::resolved(default_hash_impl());
    if (name.text == "st")
      return DictAnnotation::resolved(default_sorted_impl());
    if (name.text != "dict")
      throw ParseError("unknown annotation '@" + name.text + "'", name.line,
                       name.col);
    if (at(Tok::LParen)) {
      get();
      std::string impl;
      if (at(Tok::String) || at(Tok::Ident))
        impl = get().text;
      else
        throw ParseError("expected implementation name", peek().line,
                         peek().col);
      expect(Tok::RParen, "')'");
      return DictAnnotation::resolved(impl);
    }
    return DictAnnotation::unresolved();
  }

  LType type() {
    switch (peek().kind) {
      case Tok::KwInt: get(); return LType::intt();
      case Tok::KwDouble: get(); return LType::dbl();
      case Tok::KwBool: get(); return LType::boolean();
      case Tok::KwString: get(); return LType::str();
      case Tok::KwUnit: get(); return LType::unit();
      case Tok::KwRef: {
        get();
        expect(Tok::LParen, "'('");
        LType inner = type();
        expect(Tok::RParen, "')'");
        return LType::ref(std::move(inner));
      }
      case Tok::LBrace: {
        get();
        std::vector<std::pair<std::string, LType>> fields;
        if (!at(Tok::RBrace)) {
          for (;;) {
            std::string fname = expect(Tok::Ident, "field name").text;
            expect(Tok::Colon, "':'");
            fields.emplace_back(std::move(fname), type());
            if (!at(Tok::Comma)) break;
            get();
          }
        }
        expect_rbrace();
        if (fields.empty())
          throw ParseError("record type needs at least one field", peek().line,
                           peek().col);
        return LType::record(std::move(fields));
      }
      case Tok::At:
      case Tok::LDict: {
        DictAnnotation ann = DictAnnotation::none();
        if (at(Tok::At)) ann = annotation();
        expect(Tok::LDict, "'{{'");
        std::string label;
        if (at(Tok::Ident) && at(Tok::Colon, 1)) {
          label = get().text;
          get();  // ':'
          LType key = scalar_type();
          expect(Tok::Arrow, "'->'");
          LType val = type();
          expect(Tok::RDict, "'}}'");
          return LType::dict(std::move(key), std::move(val), ann, label);
        }
        LType key = type();
        expect(Tok::Arrow, "'->'");
        LType val = type();
        expect(Tok::RDict, "'}}'");
        return LType::dict(std::move(key), std::move(val), ann);
      }
      default: {
        const Token& t = peek();
        throw ParseError("expected type", t.line, t.col);
      }
    }
  }

  ExprPtr seq() {
    SrcLoc l = loc();
    ExprPtr e = stmt();
    if (at(Tok::Semi)) {
      get();
      return mk_seq(std::move(e), seq(), l);
    }
    return e;
  }

  ExprPtr stmt() {
    switch (peek().kind) {
      case Tok::KwLet: {
        SrcLoc l = loc();
        get();
        std::string name = expect(Tok::Ident, "variable name").text;
        expect(Tok::Assign, "'='");
        ExprPtr bound = stmt();
        expect(Tok::KwIn, "'in'");
        ExprPtr body = seq();
        return mk_let(std::move(name), std::move(bound), std::move(body), l);
      }
      case Tok::KwFor: {
        SrcLoc l = loc();
        get();
        expect(Tok::LParen, "'('");
        std::string var = expect(Tok::Ident, "loop variable").text;
        expect(Tok::BackArrow, "'<-'");
        ExprPtr src = stmt();
        expect(Tok::RParen, "')'");
        ExprPtr body = stmt();
        return mk_for(std::move(var), std::move(src), std::move(body), l);
      }
      case Tok::KwIf: {
        SrcLoc l = loc();
        get();
        expect(Tok::LParen, "'('");
        ExprPtr cond = seq();
        expect(Tok::RParen, "')'");
        expect(Tok::KwThen, "'then'");
        ExprPtr then_e = stmt();
        expect(Tok::KwElse, "'else'");
        ExprPtr else_e = stmt();
        return mk_if(std::move(cond), std::move(then_e), std::move(else_e), l);
      }
      default:
        return assign();
    }
  }

  ExprPtr assign() {
    SrcLoc l = loc();
    ExprPtr lhs = or_expr();
    if (!at(Tok::PlusAssign)) return lhs;
    get();
    ExprPtr delta = stmt();
    switch (lhs->kind) {
      case Expr::Kind::DictLookup:
        return mk_dict_update(lhs->a, lhs->b, std::move(delta), l);
      case Expr::Kind::HintedLookup:
        return mk_hinted_update(lhs->a, lhs->name, lhs->b, std::move(delta), l);
      case Expr::Kind::Var:
      case Expr::Kind::FieldAccess:
        return mk_ref_update(std::move(lhs), std::move(delta), l);
      default:
        throw ParseError("invalid '+=' target", l.line, l.col);
    }
  }

  ExprPtr or_expr() {
    SrcLoc l = loc();
    ExprPtr e = and_expr();
    while (at(Tok::OrOr)) {
      get();
      e = mk_binop(BinOpKind::Or, std::move(e), and_expr(), l);
    }
    return e;
  }

  ExprPtr and_expr() {
    SrcLoc l = loc();
    ExprPtr e = cmp_expr();
    while (at(Tok::AndAnd)) {
      get();
      e = mk_binop(BinOpKind::And, std::move(e), cmp_expr(), l);
    }
    return e;
  }

  ExprPtr cmp_expr() {
    SrcLoc l = loc();
    ExprPtr e = add_expr();
    BinOpKind op;
    switch (peek().kind) {
      case Tok::Lt: op = BinOpKind::Lt; break;
      case Tok::Le: op = BinOpKind::Le; break;
      case Tok::Gt: op = BinOpKind::Gt; break;
      case Tok::Ge: op = BinOpKind::Ge; break;
      case Tok::EqEq: op = BinOpKind::Eq; break;
      case Tok::Ne: op = BinOpKind::Ne; break;
      default: return e;
    }
    get();
    return mk_binop(op, std::move(e), add_expr(), l);
  }

  ExprPtr add_expr() {
    SrcLoc l = loc();
    ExprPtr e = mul_expr();
    for (;;) {
      if (at(Tok::Plus)) {
        get();
        e = mk_binop(BinOpKind::Add, std::move(e), mul_expr(), l);
      } else if (at(Tok::Minus)) {
        get();
        e = mk_binop(BinOpKind::Sub, std::move(e), mul_expr(), l);
      } else {
        return e;
      }
    }
  }

  ExprPtr mul_expr() {
    SrcLoc l = loc();
    ExprPtr e = unary();
    for (;;) {
      if (at(Tok::Star)) {
        get();
        e = mk_binop(BinOpKind::Mul, std::move(e), unary(), l);
      } else if (at(Tok::Slash)) {
        get();
        e = mk_binop(BinOpKind::Div, std::move(e), unary(), l);
      } else {
        return e;
      }
    }
  }

  ExprPtr unary() {
    SrcLoc l = loc();
    if (at(Tok::Minus)) {
      get();
      return mk_unop(UnOpKind::Neg, unary(), l);
    }
    if (at(Tok::Bang)) {
      get();
      return mk_unop(UnOpKind::Not, unary(), l);
    }
    return postfix();
  }

  ExprPtr postfix() {
    ExprPtr e = primary();
    for (;;) {
      SrcLoc l = loc();
      if (at(Tok::Dot)) {
        get();
        Token f = expect(Tok::Ident, "field name");
        if (f.text == "iter")
          e = mk_dict_iter(std::move(e), l);
        else
          e = mk_field(std::move(e), f.text, l);
      } else if (at(Tok::LParen)) {
        get();
        ExprPtr key = or_expr();
        expect(Tok::RParen, "')'");
        e = mk_dict_lookup(std::move(e), std::move(key), l);
      } else if (at(Tok::Lt) && at(Tok::Ident, 1) && at(Tok::Gt, 2) &&
                 at(Tok::LParen, 3)) {
        get();
        std::string hint = get().text;
        get();
        get();
        ExprPtr key = or_expr();
        expect(Tok::RParen, "')'");
        e = mk_hinted_lookup(std::move(e), std::move(hint), std::move(key), l);
      } else {
        return e;
      }
    }
  }

  ExprPtr primary() {
    SrcLoc l = loc();
    switch (peek().kind) {
      case Tok::Int: {
        Token t = get();
        return mk_int(t.ival, l);
      }
      case Tok::Real: {
        Token t = get();
        return mk_real(t.dval, l);
      }
      case Tok::String: {
        Token t = get();
        return mk_string(t.text, l);
      }
      case Tok::KwTrue: get(); return mk_bool(true, l);
      case Tok::KwFalse: get(); return mk_bool(false, l);
      case Tok::LParen: {
        get();
        if (at(Tok::RParen)) {
          get();
          return mk_unit(l);
        }
        ExprPtr e = seq();
        expect(Tok::RParen, "')'");
        return e;
      }
      case Tok::LBrace: {
        get();
        if (at(Tok::RBrace)) {
          get();
          return mk_unit(l);
        }
        if (at(Tok::Ident) && at(Tok::Assign, 1)) {
          std::vector<std::pair<std::string, ExprPtr>> fields;
          for (;;) {
            std::string fname = expect(Tok::Ident, "field name").text;
            expect(Tok::Assign, "'='");
            fields.emplace_back(std::move(fname), or_expr());
            if (!at(Tok::Comma)) break;
            get();
          }
          expect_rbrace();
          return mk_record(std::move(fields), l);
        }
        ExprPtr e = seq();
        expect_rbrace();
        return e;
      }
      case Tok::At:
      case Tok::LDict: {
        DictAnnotation ann = DictAnnotation::none();
        if (at(Tok::At)) ann = annotation();
        expect(Tok::LDict, "'{{'");
        std::vector<std::pair<ExprPtr, ExprPtr>> items;
        if (!at(Tok::RDict)) {
          for (;;) {
            ExprPtr k = or_expr();
            expect(Tok::Arrow, "'->'");
            items.emplace_back(std::move(k), or_expr());
            if (!at(Tok::Comma)) break;
            get();
          }
        }
        expect(Tok::RDict, "'}}'");
        return mk_dict_ctor(std::move(items), ann, l);
      }
      case Tok::KwRef: {
        get();
        expect(Tok::LParen, "'('");
        LType t = type();
        expect(Tok::RParen, "')'");
        return mk_ref_init(std::move(t), l);
      }
      case Tok::Ident: {
        Token t = get();
        return mk_var(t.text, l);
      }
      default: {
        const Token& t = peek();
        throw ParseError("expected expression", t.line, t.col);
      }
    }
  }

  // Verifies every hinted access uses an iterator variable bound by an
  // enclosing `let it = d.iter` over the same dictionary variable.
  struct IterBinding {
    std::string var;
    std::string dict;  // empty when the binding shadows with a non-iterator
  };

  void check_hints(const Expr& e) {
    std::vector<IterBinding> env;
    check_hints_rec(e, env);
  }

  void check_hints_rec(const Expr& e, std::vector<IterBinding>& env) {
    switch (e.kind) {
      case Expr::Kind::Let: {
        check_hints_rec(*e.a, env);
        IterBinding b;
        b.var = e.name;
        if (e.a->kind == Expr::Kind::DictIter &&
            e.a->a->kind == Expr::Kind::Var)
          b.dict = e.a->a->name;
        env.push_back(std::move(b));
        check_hints_rec(*e.b, env);
        env.pop_back();
        return;
      }
      case Expr::Kind::ForLoop: {
        check_hints_rec(*e.a, env);
        env.push_back({e.name, ""});
        check_hints_rec(*e.b, env);
        env.pop_back();
        return;
      }
      case Expr::Kind::HintedLookup:
      case Expr::Kind::HintedUpdate: {
        if (e.a->kind != Expr::Kind::Var)
          throw ParseError("hinted access requires a dictionary variable",
                           e.loc.line, e.loc.col);
        const std::string* dict = nullptr;
        for (auto it = env.rbegin(); it != env.rend(); ++it) {
          if (it->var == e.name) {
            dict = &it->dict;
            break;
          }
        }
        if (!dict || dict->empty() || *dict != e.a->name)
          throw ParseError("hint variable '" + e.name + "' is not bound to " +
                               e.a->name + ".iter in scope",
                           e.loc.line, e.loc.col);
        break;
      }
      default:
        break;
    }
    if (e.a) check_hints_rec(*e.a, env);
    if (e.b && e.kind != Expr::Kind::Let && e.kind != Expr::Kind::ForLoop)
      check_hints_rec(*e.b, env);
    if (e.c) check_hints_rec(*e.c, env);
    for (const auto& [n, v] : e.rec_fields) check_hints_rec(*v, env);
    for (const auto& [k, v] : e.dict_items) {
      check_hints_rec(*k, env);
      check_hints_rec(*v, env);
    }
  }

  std::vector<Token> toks_;
  size_t pos_ = 0;
};

}  // namespace

Program parse_program(std::string_view text) {
  return Parser(text).program();
}

ExprPtr parse_expr_text(std::string_view text) {
  return Parser(text).expr_only();
}

LType parse_type_text(std::string_view text) {
  return Parser(text).type_only();
}

}  // namespace llql
