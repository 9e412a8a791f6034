#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include "llql/error.hpp"
#include "llql/parse.hpp"
#include "llql/print.hpp"
#include "llql/typecheck.hpp"
#include "testutil.hpp"

using namespace llql;
using namespace llql::test;

static const char* kFixtures[] = {
    "groupby_hash",    "groupby_sorted", "join_hash",    "join_sorted",
    "groupjoin_hash",  "groupjoin_sorted", "covar_nested", "covar_record",
    "sum_filter",      "crossover",      "mcm",
};

TEST_CASE("fixtures parse and round-trip through the printer") {
  for (const char* name : kFixtures) {
    CAPTURE(name);
    Program p1 = load_query(name);
    std::string printed = print_program(p1);
    Program p2 = parse_program(printed);
    CHECK(program_equal(p1, p2));
    // Printing is a fixpoint after one normalization pass.
    CHECK(print_program(p2) == printed);
  }
}

TEST_CASE("random ASTs round-trip through print/parse") {
  for (uint64_t seed = 0; seed < 150; ++seed) {
    CAPTURE(seed);
    AstGen gen(seed);
    Program p1 = gen.program();
    std::string printed = print_program(p1);
    CAPTURE(printed);
    Program p2;
    REQUIRE_NOTHROW(p2 = parse_program(printed));
    CHECK(program_equal(p1, p2));
    CHECK(print_program(p2) == printed);
  }
}

TEST_CASE("operator precedence and associativity") {
  auto e = parse_expr_text("1 + 2 * 3");
  REQUIRE(e->kind == Expr::Kind::BinOp);
  CHECK(e->bop == BinOpKind::Add);
  CHECK(e->b->bop == BinOpKind::Mul);

  e = parse_expr_text("1 - 2 - 3");
  CHECK(e->bop == BinOpKind::Sub);
  CHECK(e->a->bop == BinOpKind::Sub);  // left associative
  CHECK(e->b->int_val == 3);

  e = parse_expr_text("a || b && c < d + e * -f");
  CHECK(e->bop == BinOpKind::Or);
  CHECK(e->b->bop == BinOpKind::And);
  CHECK(e->b->b->bop == BinOpKind::Lt);

  // Comparisons do not chain.
  CHECK_THROWS_AS(parse_expr_text("1 < 2 < 3"), ParseError);
  // Parenthesized they do.
  e = parse_expr_text("(1 < 2) == true");
  CHECK(e->bop == BinOpKind::Eq);
  CHECK(e->a->bop == BinOpKind::Lt);
}

TEST_CASE("statement sugar maps onto update nodes") {
  auto e = parse_expr_text("d(k) += 1");
  CHECK(e->kind == Expr::Kind::DictUpdate);

  e = parse_expr_text("x += 1.5");
  CHECK(e->kind == Expr::Kind::RefUpdate);

  e = parse_expr_text("r.f += 2");
  CHECK(e->kind == Expr::Kind::RefUpdate);
  CHECK(e->a->kind == Expr::Kind::FieldAccess);

  e = parse_expr_text("let it = d.iter in d<it>(k) += 1");
  CHECK(e->b->kind == Expr::Kind::HintedUpdate);
  CHECK(e->b->name == "it");

  e = parse_expr_text("let it = d.iter in d<it>(k)");
  CHECK(e->b->kind == Expr::Kind::HintedLookup);

  CHECK_THROWS_AS(parse_expr_text("1 + 2 += 3"), ParseError);
  CHECK_THROWS_AS(parse_expr_text("d(k) + 1 += 2"), ParseError);
}

TEST_CASE("hint scoping is validated at parse time") {
  // Iterator must be let-bound to <dict>.iter over the same variable.
  CHECK_THROWS_AS(parse_expr_text("d<it>(k)"), ParseError);
  CHECK_THROWS_AS(parse_expr_text("let it = d1.iter in d2<it>(k)"),
                  ParseError);
  CHECK_THROWS_AS(parse_expr_text("let it = 5 in d<it>(k)"), ParseError);
  // For-loop variables shadow iterator bindings.
  CHECK_THROWS_AS(
      parse_expr_text("let it = d.iter in for (it <- d) { d<it>(1) }"),
      ParseError);
  // Re-binding restores after the inner scope closes.
  CHECK_NOTHROW(parse_expr_text(
      "let it = d.iter in { let it = 5 in it } ; d<it>(1)"));
  // The dictionary side must be a plain variable.
  CHECK_THROWS_AS(parse_expr_text("let it = d.iter in (d)(1) ; d.f<it>(1)"),
                  ParseError);
}

TEST_CASE("block, record and unit disambiguation") {
  CHECK(parse_expr_text("()")->kind == Expr::Kind::Unit);
  CHECK(parse_expr_text("{}")->kind == Expr::Kind::Unit);
  CHECK(parse_expr_text("{ x = 1 }")->kind == Expr::Kind::RecordCtor);
  CHECK(parse_expr_text("{ x }")->kind == Expr::Kind::Var);
  CHECK(parse_expr_text("{ x ; y }")->kind == Expr::Kind::Seq);
  CHECK(parse_expr_text("{{ }}")->kind == Expr::Kind::DictCtor);
  CHECK(parse_expr_text("{ {{ }} }")->kind == Expr::Kind::DictCtor);

  auto rec = parse_expr_text("{ b = 2, a = 1 }");
  // Fields are canonically sorted.
  CHECK(rec->rec_fields[0].first == "a");
  CHECK(rec->rec_fields[1].first == "b");
  CHECK_THROWS_AS(parse_expr_text("{ a = 1, a = 2 }"), ParseError);
}

TEST_CASE("dictionary annotations") {
  auto e = parse_expr_text("@dict {{ }}");
  CHECK(e->ann.kind == DictAnnotation::Kind::Unresolved);

  e = parse_expr_text("@dict(\"btree\") {{ 1 -> 2 }}");
  CHECK(e->ann.kind == DictAnnotation::Kind::Resolved);
  CHECK(e->ann.impl == "btree");

  e = parse_expr_text("@dict(btree) {{ }}");
  CHECK(e->ann.impl == "btree");

  // Shorthand annotations expand to the default member of each family.
  e = parse_expr_text("@ht {{ }}");
  CHECK(e->ann.kind == DictAnnotation::Kind::Resolved);
  CHECK(e->ann.impl == "robin_hood");
  e = parse_expr_text("@st {{ }}");
  CHECK(e->ann.impl == "sorted_array");

  CHECK(parse_expr_text("{{ }}")->ann.kind == DictAnnotation::Kind::None);
}

TEST_CASE("literals, comments and strings") {
  CHECK(parse_expr_text("// note\n42 // trailing")->int_val == 42);
  CHECK(parse_expr_text("3.5")->kind == Expr::Kind::RealLit);
  CHECK(parse_expr_text("1e3")->real_val == doctest::Approx(1000.0));
  CHECK(parse_expr_text("2.5e-1")->real_val == doctest::Approx(0.25));
  auto neg = parse_expr_text("-7");
  CHECK(neg->kind == Expr::Kind::UnOp);
  CHECK(neg->a->int_val == 7);
  CHECK(parse_expr_text("\"a\\\"b\\n\"")->str_val == "a\"b\n");
  CHECK(parse_expr_text("true")->bool_val == true);
}

TEST_CASE("program headers") {
  Program p = parse_program(
      "input R : {{ {a: int} -> int }}\n"
      "input S : @dict(\"btree\") {{ s: int -> double }}\n"
      "pragma semiring max_plus\n"
      "R");
  REQUIRE(p.inputs.size() == 2);
  CHECK(p.inputs[1].type.ann.impl == "btree");
  CHECK(p.inputs[1].type.key_label == "s");
  CHECK(p.semiring == "max_plus");

  CHECK_THROWS_AS(parse_program("input R : int\nR"), ParseError);
  CHECK_THROWS_AS(
      parse_program("input R : {{ int -> int }}\n"
                    "input R : {{ int -> int }}\nR"),
      ParseError);
  CHECK_THROWS_AS(parse_program("pragma semiring ring_of_power\n1"),
                  ParseError);
  CHECK_THROWS_AS(parse_program("1 ; 2 extra"), ParseError);
}

TEST_CASE("parse errors carry positions") {
  try {
    parse_program("let x = 1 in\n  x +");
    FAIL("expected ParseError");
  } catch (const ParseError& e) {
    CHECK(e.line == 2);
    CHECK(std::string(e.what()).find("expected") != std::string::npos);
  }
}

TEST_CASE("type inference on the fixture corpus") {
  for (const char* name : kFixtures) {
    CAPTURE(name);
    Program p = load_query(name);
    TypedProgram tp;
    REQUIRE_NOTHROW(tp = infer_types(p));
    // Every node got a type.
    CHECK(tp.types.count(p.body.get()) == 1);
  }
}

TEST_CASE("inferred shapes for the aggregation query") {
  Program p = load_query("groupby_hash");
  TypedProgram tp = infer_types(p);
  REQUIRE(tp.dict_symbols.size() == 1);
  CHECK(tp.dict_symbols[0].name == "Ragg");
  const LType& t = tp.type_of(*tp.dict_symbols[0].ctor);
  REQUIRE(t.is(LType::Kind::Dict));
  CHECK(t.key_type().is(LType::Kind::Int));
  CHECK(t.val_type().is(LType::Kind::Double));
}

TEST_CASE("annotations flow into inferred value types") {
  Program p = parse_program(
      "input S : {{ {jk: int, y: double} -> int }}\n"
      "let Sh = @dict {{ }} in\n"
      "for (s <- S) { Sh(s.key.jk) += @ht {{ 0 -> s.key.y }} } ; Sh");
  TypedProgram tp = infer_types(p);
  const LType& sh = tp.type_of(*tp.dict_symbols[0].ctor);
  const LType& inner = sh.val_type();
  REQUIRE(inner.is(LType::Kind::Dict));
  CHECK(inner.ann.kind == DictAnnotation::Kind::Resolved);
  CHECK(inner.ann.impl == "robin_hood");
  CHECK(inner.val_type().is(LType::Kind::Double));
}

TEST_CASE("dictionary symbol extraction") {
  Program p = load_query("join_hash");
  auto syms = extract_dict_symbols(p);
  REQUIRE(syms.size() == 2);
  CHECK(syms[0].name == "Sh");
  CHECK(syms[1].name == "RS");
  for (const auto& s : syms) CHECK(s.ctor->kind == Expr::Kind::DictCtor);

  CHECK_THROWS_AS(
      extract_dict_symbols(parse_program(
          "let D = {{ }} in { let D = {{ }} in D } ; D")),
      TypeError);
}

TEST_CASE("type errors") {
  auto check_program = [](const std::string& src) {
    infer_types(parse_program(src));
  };
  CHECK_THROWS_AS(check_program("1 + true"), TypeError);
  CHECK_THROWS_AS(check_program("\"a\" * 2"), TypeError);
  CHECK_THROWS_AS(check_program("if (3) then 1 else 2"), TypeError);
  CHECK_THROWS_AS(check_program("if (true) then 1 else \"x\""), TypeError);
  CHECK_THROWS_AS(check_program("for (x <- 5) { x }"), TypeError);
  CHECK_THROWS_AS(check_program("{ a = 1 }.b"), TypeError);
  CHECK_THROWS_AS(check_program("5.f"), TypeError);
  CHECK_THROWS_AS(check_program("unbound_name"), TypeError);
  CHECK_THROWS_AS(check_program("let x = 1 in x(2)"), TypeError);
  CHECK_THROWS_AS(check_program("ref({{ int -> int }})"), TypeError);
  CHECK_THROWS_AS(check_program("let x = ref(int) in x += 1.5"), TypeError);
  CHECK_THROWS_AS(check_program("let x = 1 in x += 1"), TypeError);
  // Keys must be orderable: no dictionaries inside keys.
  CHECK_THROWS_AS(
      check_program("input R : {{ {{ int -> int }} -> int }}\nR"), TypeError);
  // Dictionary symbols may not be shadowed.
  CHECK_THROWS_AS(
      check_program("let D = {{ }} in let D = 5 in D"), TypeError);
  // Mixed key types for one dictionary.
  CHECK_THROWS_AS(
      check_program("let D = {{ }} in D(1) += 1 ; D(\"x\") += 1 ; D"),
      TypeError);
}

TEST_CASE("int widens to double where needed") {
  Program p = parse_program("let x = ref(double) in x += 1 ; 2.5 * 2");
  TypedProgram tp = infer_types(p);
  CHECK(tp.type_of(*p.body).is(LType::Kind::Double));

  // Int keys unify with double key slots.
  Program q = parse_program("let D = {{ }} in D(1.5) += 1 ; D(2) += 1 ; D");
  TypedProgram tq = infer_types(q);
  CHECK(tq.type_of(*tq.dict_symbols[0].ctor)
            .key_type()
            .is(LType::Kind::Double));
}

TEST_CASE("AST JSON dump") {
  Program p = parse_program("input R : {{ int -> int }}\nfor (r <- R) { r.val }");
  nlohmann::json j = ast_to_json(p);
  CHECK(j["inputs"][0]["name"] == "R");
  CHECK(j["body"].contains("ForLoop"));
  CHECK(j["body"]["ForLoop"]["var"] == "r");
  CHECK(j["body"]["ForLoop"]["body"]["FieldAccess"]["field"] == "val");
}

TEST_CASE("predicate keys collapse whitespace") {
  auto e1 = parse_expr_text("r.key.x   <\n  50.0");
  auto e2 = parse_expr_text("r.key.x < 50.0");
  CHECK(predicate_key(*e1) == predicate_key(*e2));
  CHECK(predicate_key(*e1) == "r.key.x < 50.0");
}

TEST_CASE("type printing round-trips") {
  const char* types[] = {
      "int", "double", "bool", "string", "unit",
      "{a: int, b: {c: double}}",
      "{{ {g: int, x: double} -> int }}",
      "{{ s: int -> @dict(\"sorted_array\") {{ {i: int} -> double }} }}",
      "ref(double)",
  };
  for (const char* t : types) {
    CAPTURE(t);
    LType ty = parse_type_text(t);
    LType again = parse_type_text(print_type(ty));
    CHECK(ty.equals(again));
  }
}
