#include "doctest.h"

#include <cmath>
#include <cstdio>
#include <random>
#include <set>

#include "llql/catalog.hpp"
#include "llql/costinfer.hpp"
#include "llql/costmodel.hpp"
#include "llql/error.hpp"
#include "llql/print.hpp"
#include "llql/profile.hpp"
#include "llql/registry.hpp"
#include "llql/regress.hpp"
#include "llql/scenario.hpp"
#include "llql/synth.hpp"
#include "testutil.hpp"

using namespace llql;
using namespace llql::test;

namespace {

const Expr* find_kind(const Expr& e, Expr::Kind k) {
  if (e.kind == k) return &e;
  const Expr* sub[] = {e.a.get(), e.b.get(), e.c.get()};
  for (const Expr* s : sub)
    if (s)
      if (const Expr* r = find_kind(*s, k)) return r;
  for (const auto& [f, v] : e.rec_fields)
    if (const Expr* r = find_kind(*v, k)) return r;
  for (const auto& [kk, vv] : e.dict_items) {
    if (const Expr* r = find_kind(*kk, k)) return r;
    if (const Expr* r = find_kind(*vv, k)) return r;
  }
  return nullptr;
}

// Synthetic profile where every implementation has a fixed per-op cost, so
// model-based choices are predictable: robin_hood < chained_hash < btree,
// and sorted_array is cheap ordered but pays a size-dependent penalty on
// unordered inserts.
std::vector<ProfileSample> toy_samples() {
  std::vector<ProfileSample> out;
  std::map<std::string, double> ns = {{"robin_hood", 50},
                                      {"chained_hash", 70},
                                      {"sorted_array", 40},
                                      {"btree", 90}};
  for (const auto& [impl, per_op] : ns)
    for (const std::string& op : {"insert", "lookup_hit", "lookup_miss"})
      for (bool ordered : {false, true})
        for (uint64_t size : {16u, 256u, 4096u, 65536u})
          for (uint64_t count : {16u, 1024u, 65536u}) {
            double cost = per_op;
            if (impl == "sorted_array" && !ordered && op == "insert")
              cost += 0.002 * static_cast<double>(size);
            out.push_back({impl, op, ordered, size, count,
                           cost * static_cast<double>(count) * 1e-6});
          }
  return out;
}

CostModel toy_model() {
  return CostModel::train(toy_samples(), CostModel::Mode::PerCombination,
                          "knn4");
}

}  // namespace

TEST_CASE("doubles survive the decimal round-trip bit-exactly") {
  for (double v : {0.1, 1.0 / 3.0, -0.0, 1e300, 2.5e-308, 3.141592653589793,
                   123456789.123456789}) {
    CHECK(double_from_string(double_to_string(v)) == v);
  }
}

TEST_CASE("linear regression recovers an exact affine law") {
  std::vector<std::vector<double>> X;
  std::vector<double> y;
  for (double x = 0; x < 6; ++x) {
    X.push_back({x});
    y.push_back(3.0 + 2.0 * x);
  }
  LinearModel m = fit_linear(X, y);
  REQUIRE(m.coef.size() == 2);
  CHECK(m.coef[0] == doctest::Approx(3.0).epsilon(1e-9));
  CHECK(m.coef[1] == doctest::Approx(2.0).epsilon(1e-9));
  CHECK(!m.ridge_fallback);
  CHECK(m.predict({10.0}) == doctest::Approx(23.0).epsilon(1e-9));

  std::vector<double> pred;
  for (const auto& x : X) pred.push_back(m.predict(x));
  CHECK(r2_score(y, pred) == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("duplicated features trigger the ridge fallback, not a crash") {
  std::vector<std::vector<double>> X;
  std::vector<double> y;
  for (double x = 0; x < 5; ++x) {
    X.push_back({x, x});  // perfectly collinear
    y.push_back(1.0 + 4.0 * x);
  }
  LinearModel m = fit_linear(X, y);
  CHECK(m.ridge_fallback);
  CHECK(m.predict({2.0, 2.0}) == doctest::Approx(9.0).epsilon(1e-3));
}

TEST_CASE("degree-2 expansion fits an exact quadratic") {
  CHECK(Poly2Model::expand({2.0, 3.0}) ==
        std::vector<double>{2.0, 3.0, 4.0, 6.0, 9.0});
  std::vector<std::vector<double>> X;
  std::vector<double> y;
  for (double a = 0; a < 4; ++a)
    for (double b = 0; b < 4; ++b) {
      X.push_back({a, b});
      y.push_back(1.0 + 2.0 * a + 0.5 * b * b + a * b);
    }
  Poly2Model m = fit_poly2(X, y);
  CHECK(m.predict({5.0, 7.0}) ==
        doctest::Approx(1.0 + 10.0 + 24.5 + 35.0).epsilon(1e-6));
}

TEST_CASE("knn averages the k nearest and breaks ties deterministically") {
  // Four clustered points; query near the cluster of three.
  std::vector<std::vector<double>> X = {{0.0}, {0.1}, {0.2}, {10.0}};
  std::vector<double> y = {1.0, 2.0, 3.0, 100.0};
  KnnModel m = fit_knn(X, y, 3);
  CHECK(m.predict({0.1}) == doctest::Approx(2.0).epsilon(1e-12));

  // Leave-one-out at index 1 must ignore that row's own label; like
  // predict(), predict_excluding takes the raw (unstandardized) query.
  double loo = m.predict_excluding({0.1}, 1);
  CHECK(loo == doctest::Approx((1.0 + 3.0 + 100.0) / 3.0).epsilon(1e-12));

  // Equidistant neighbours: the lower training index wins the last slot.
  KnnModel m2 = fit_knn({{0.0}, {2.0}, {2.0}, {2.0}}, {0.0, 1.0, 2.0, 4.0}, 2);
  // Query at 1.0: distances tie between index 0 (dist 1) and all of 1..3
  // (dist 1); k=2 keeps indices 0 and 1.
  CHECK(m2.predict({1.0}) == doctest::Approx(0.5).epsilon(1e-12));
}

TEST_CASE("regressors survive the JSON round-trip with identical output") {
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> u(0.0, 20.0);
  std::vector<std::vector<double>> X;
  std::vector<double> y;
  for (int i = 0; i < 40; ++i) {
    X.push_back({u(rng), u(rng)});
    y.push_back(u(rng));
  }
  for (const std::string kind : {"linear", "poly2", "knn4"}) {
    auto m = fit_regressor(kind, X, y);
    auto back = Regressor::from_json(m->to_json());
    REQUIRE(back->kind() == m->kind());
    for (int i = 0; i < 10; ++i) {
      std::vector<double> q = {u(rng), u(rng)};
      CHECK(back->predict(q) == m->predict(q));  // bit-exact
    }
  }
}

TEST_CASE("profiler key streams are deterministic, distinct and order-paired") {
  auto asc = generate_keys(500, true, 9001);
  auto shuf = generate_keys(500, false, 9001);
  CHECK(asc == generate_keys(500, true, 9001));
  CHECK(std::is_sorted(asc.begin(), asc.end()));
  CHECK(std::set<int64_t>(asc.begin(), asc.end()).size() == 500);
  auto sorted_shuf = shuf;
  std::sort(sorted_shuf.begin(), sorted_shuf.end());
  CHECK(sorted_shuf == asc);  // same key set, different presentation order
  CHECK(shuf != asc);
}

TEST_CASE("profile cells skip size-0 lookups and over-budget shift inserts") {
  ProfileGrid g;
  g.reps = 1;
  g.warmup = 0;
  CHECK(!measure("sorted_array", "lookup_hit", false, 0, 16, g).has_value());
  g.work_cap = 1000;  // 4096 unordered inserts into 4096 entries >> budget
  CHECK(!measure("sorted_array", "insert", false, 4096, 4096, g).has_value());
  CHECK(measure("robin_hood", "insert", false, 4096, 4096, g).has_value());
}

TEST_CASE("profile samples survive the CSV round-trip") {
  ProfileGrid g;
  g.lookup_sizes = {64};
  g.insert_sizes = {0, 64};
  g.accessed = {32};
  g.reps = 1;
  g.warmup = 0;
  auto samples = profile_all(g, {"robin_hood", "sorted_array"});
  REQUIRE(!samples.empty());
  auto back = samples_from_csv(samples_to_csv(samples));
  REQUIRE(back.size() == samples.size());
  for (size_t i = 0; i < samples.size(); ++i) {
    CHECK(back[i].impl == samples[i].impl);
    CHECK(back[i].op == samples[i].op);
    CHECK(back[i].ordered == samples[i].ordered);
    CHECK(back[i].dict_size == samples[i].dict_size);
    CHECK(back[i].accessed == samples[i].accessed);
    CHECK(back[i].elapsed_ms ==
          doctest::Approx(samples[i].elapsed_ms).epsilon(1e-6));
  }
}

TEST_CASE("cost model recovers a power law and clamps zero counts") {
  // In log mode the model fits log2 ms against log2 features, so data that
  // follows ms = 2^(a + b*log2(size+1) + c*log2(count)) is fit exactly.
  auto law = [](double size, double count) {
    return std::exp2(-10.0 + 0.1 * std::log2(size + 1) +
                     1.0 * std::log2(count)) -
           1e-9;
  };
  std::vector<ProfileSample> samples;
  for (uint64_t size : {16u, 64u, 256u, 1024u})
    for (uint64_t count : {16u, 256u, 4096u})
      samples.push_back({"robin_hood", "lookup_hit", false, size, count,
                         law(static_cast<double>(size),
                             static_cast<double>(count))});
  CostModel m =
      CostModel::train(samples, CostModel::Mode::PerCombination, "linear");
  CHECK(m.delta("robin_hood", "lookup_hit", false, 100, 128) ==
        doctest::Approx(law(128, 100)).epsilon(1e-6));
  CHECK(m.delta("robin_hood", "lookup_hit", false, 0, 128) == 0.0);
}

TEST_CASE("missing combinations fall back miss->hit then ordered->unordered") {
  std::vector<ProfileSample> samples;
  for (uint64_t count : {16u, 256u}) {
    double c = static_cast<double>(count);
    samples.push_back({"btree", "lookup_hit", false, 256, count, 2e-6 * c});
    samples.push_back({"btree", "lookup_hit", true, 256, count, 1e-6 * c});
    samples.push_back({"btree", "lookup_miss", false, 256, count, 3e-6 * c});
  }
  CostModel m =
      CostModel::train(samples, CostModel::Mode::PerCombination, "linear");
  // Ordered misses are unmeasured: alias to the ordered-hit model.
  CHECK(m.delta("btree", "lookup_miss", true, 16, 256) ==
        doctest::Approx(m.delta("btree", "lookup_hit", true, 16, 256)));
  // Ordered inserts are wholly unmeasured: fall back to unordered... which
  // is also absent here, so the model reports an error.
  CHECK_THROWS_AS(m.delta("btree", "insert", true, 16, 256), ModelError);

  samples.push_back({"btree", "insert", false, 256, 16, 1e-4});
  samples.push_back({"btree", "insert", false, 256, 256, 1e-3});
  CostModel m2 =
      CostModel::train(samples, CostModel::Mode::PerCombination, "linear");
  CHECK(m2.delta("btree", "insert", true, 16, 256) ==
        doctest::Approx(m2.delta("btree", "insert", false, 16, 256)));
}

TEST_CASE("cost models reload from disk with identical predictions") {
  for (auto mode :
       {CostModel::Mode::PerCombination, CostModel::Mode::AllInOne}) {
    CostModel m = CostModel::train(toy_samples(), mode, "knn4");
    std::string path = "build/test_model_roundtrip.json";
    m.save(path);
    CostModel back = CostModel::load(path);
    CHECK(back.mode() == m.mode());
    CHECK(back.regressor_kind() == m.regressor_kind());
    for (const std::string& impl : {"robin_hood", "sorted_array"})
      for (const std::string& op : {"insert", "lookup_hit", "lookup_miss"})
        for (bool ordered : {false, true})
          CHECK(back.delta(impl, op, ordered, 100, 1000) ==
                m.delta(impl, op, ordered, 100, 1000));
    std::remove(path.c_str());
  }
}

TEST_CASE("catalog JSON round-trip and fallbacks") {
  Catalog c;
  c.relations["R"] = {1000, 0, {{"a", 100.0}}};
  c.relations["T"] = {50, 8, {}};
  c.predicates["(x < 3)"] = 0.25;
  c.default_sel = 0.4;
  c.symbol_cards["Agg"] = 77;
  Catalog back = Catalog::from_json(c.to_json());
  CHECK(back.relations.at("R").card == 1000);
  CHECK(back.relations.at("T").inner_card == 8);
  CHECK(back.attr_distinct("R", "a") == 100);
  CHECK(back.attr_distinct("R", "zz") == 1000);  // unknown attr -> card
  CHECK(back.selectivity("(x < 3)") == 0.25);
  CHECK(!back.selectivity("(y > 9)").has_value());
  CHECK(back.default_sel == 0.4);
  CHECK(back.symbol_card("Agg") == 77.0);
  CHECK(!back.symbol_card("Other").has_value());
}

TEST_CASE("lookup rule: calls, selectivity and distinct counts combine") {
  Program p = parse_program(
      "input R : {{ {a: int} -> int }}\n"
      "input D : {{ int -> double }}\n"
      "let acc = ref(double) in\n"
      "for (r <- R) { if (r.key.a < 50) then acc += D(r.key.a) else () } ;\n"
      "acc\n");
  TypedProgram tp = infer_types(p);
  Catalog cat;
  cat.relations["R"] = {1000, 0, {{"a", 100.0}}};
  cat.relations["D"] = {200, 0, {}};
  const Expr* iff = find_kind(*tp.program.body, Expr::Kind::If);
  REQUIRE(iff);
  cat.predicates[predicate_key(*iff->a)] = 0.5;

  // C = 1000 * 0.5, N = 200, sigma = 100/200 -> H = 250, M = 250.
  CostOptions opt;
  opt.symbolic = true;
  CostBreakdown sym = infer_cost(tp, cat, nullptr, opt);
  CHECK(sym.symbolic.find("d_lus(250, 200)") != std::string::npos);
  CHECK(sym.symbolic.find("d_luf(250, 200)") != std::string::npos);

  CostModel m = toy_model();
  CostOptions opt2;
  opt2.trace = true;
  CostBreakdown num = infer_cost(tp, cat, &m, opt2);
  bool found = false;
  for (const auto& row : num.trace)
    if (row.at("rule") == "lookup") {
      found = true;
      CHECK(row.at("C").get<double>() == doctest::Approx(500));
      CHECK(row.at("N").get<double>() == doctest::Approx(200));
      CHECK(row.at("H").get<double>() == doctest::Approx(250));
      CHECK(row.at("M").get<double>() == doctest::Approx(250));
    }
  CHECK(found);
  CHECK(num.per_dict_ms.count("D"));
  CHECK(num.total_ms > 0);
}

TEST_CASE("update rule: distinct caps the symbol size, misses fill first") {
  // 1000 updates over 100 distinct keys: N = 100, H = 900, M = 100.
  Program p = parse_program(
      "input R : {{ {g: int, x: double} -> int }}\n"
      "let Agg = @dict {{ }} in\n"
      "for (r <- R) { Agg(r.key.g) += r.key.x } ;\n"
      "Agg\n");
  TypedProgram tp = infer_types(p);
  Catalog cat;
  cat.relations["R"] = {1000, 0, {{"g", 100.0}}};
  CostOptions opt;
  opt.symbolic = true;
  CostBreakdown sym = infer_cost(tp, cat, nullptr, opt);
  CHECK(sym.symbolic.find("d_lus(900, 100)") != std::string::npos);
  CHECK(sym.symbolic.find("d_luf(100, 100)") != std::string::npos);
  CHECK(sym.symbolic.find("d_ins(100)") != std::string::npos);

  // An exact measured size overrides the distinct-count estimate.
  cat.symbol_cards["Agg"] = 40;
  CostBreakdown sym2 = infer_cost(tp, cat, nullptr, opt);
  CHECK(sym2.symbolic.find("d_ins(40)") != std::string::npos);
}

TEST_CASE("unresolved symbols cost nothing without an assignment or default") {
  Program p = parse_program(
      "input R : {{ {g: int} -> int }}\n"
      "let Agg = @dict {{ }} in\n"
      "for (r <- R) { Agg(r.key.g) += r.val } ;\n"
      "Agg\n");
  TypedProgram tp = infer_types(p);
  Catalog cat;
  cat.relations["R"] = {100, 0, {}};
  CostModel m = toy_model();
  CHECK_THROWS_AS(infer_cost(tp, cat, &m, {}), UsageError);

  CostOptions opt;
  opt.assignment["Agg"] = "robin_hood";
  CHECK(infer_cost(tp, cat, &m, opt).total_ms > 0);
  CostOptions opt2;
  opt2.default_impl = "btree";
  CHECK(infer_cost(tp, cat, &m, opt2).total_ms > 0);
}

TEST_CASE("hinted access to a hash implementation costs infinity") {
  Program p = parse_program(
      "input R : {{ {g: int} -> int }}\n"
      "let Agg = @dict {{ }} in\n"
      "let it = Agg.iter in\n"
      "for (r <- R) { Agg<it>(r.key.g) += r.val } ;\n"
      "Agg\n");
  TypedProgram tp = infer_types(p);
  Catalog cat;
  cat.relations["R"] = {100, 0, {{"g", 10.0}}};
  CostModel m = toy_model();
  CostOptions opt;
  opt.assignment["Agg"] = "robin_hood";
  CHECK(std::isinf(infer_cost(tp, cat, &m, opt).total_ms));
  opt.assignment["Agg"] = "btree";
  CHECK(std::isfinite(infer_cost(tp, cat, &m, opt).total_ms));
}

TEST_CASE("dependency graph and topological order on the join-probe fixture") {
  TypedProgram tp = infer_types(load_query("crossover"));
  auto edges = dependency_graph(tp);
  bool ok_to_res = false, res_to_ok = false;
  for (const auto& e : edges) {
    if (e.from == "OK" && e.to == "Res") ok_to_res = true;
    if (e.from == "Res" && e.to == "OK") res_to_ok = true;
  }
  CHECK(ok_to_res);
  CHECK(!res_to_ok);
  CHECK(topo_order(tp) == std::vector<std::string>{"OK", "Res"});
}

TEST_CASE("hinted symbols are detected and synthesis keeps them ordered") {
  TypedProgram tp = infer_types(load_query("groupby_sorted"));
  auto hs = hinted_symbols(tp);
  CHECK(hs.count("Ragg"));

  CostModel m = toy_model();
  // Same access pattern, but with the annotation left as a tuning hole.
  Program p = parse_program(
      "input R : {{ {g: int} -> int }}\n"
      "let Agg = @dict {{ }} in\n"
      "let it = Agg.iter in\n"
      "for (r <- R) { Agg<it>(r.key.g) += r.val } ;\n"
      "Agg\n");
  TypedProgram tph = infer_types(p);
  Catalog cath;
  cath.relations["R"] = {1000, 0, {{"g", 50.0}}};
  SynthResult sr = synthesize(tph, cath, m,
                              DictRegistry::instance().names());
  REQUIRE(sr.assignment.count("Agg"));
  CHECK(DictRegistry::instance().is_ordered(sr.assignment.at("Agg")));
  // Candidate table only lists ordered implementations for hinted symbols.
  for (const auto& [impl, ms] : sr.report.candidate_ms.at("Agg"))
    CHECK(DictRegistry::instance().is_ordered(impl));
}

TEST_CASE("greedy matches exhaustive search on the two-hole fixture") {
  TypedProgram tp = infer_types(load_query("crossover"));
  Catalog cat;
  cat.relations["O"] = {100, 0, {{"k", 64.0}}};
  cat.relations["L"] = {5000, 0, {{"k", 64.0}, {"v", 1000.0}}};
  CostModel m = toy_model();
  auto impls = DictRegistry::instance().names();
  SynthResult sr = synthesize(tp, cat, m, impls);
  double best_ms = 0;
  auto best = exhaustive_assignment(tp, cat, m, impls, {}, &best_ms);
  CHECK(sr.report.final_ms == doctest::Approx(best_ms).epsilon(1e-12));
  CHECK(sr.assignment == best);
}

TEST_CASE("chosen annotations are written back into the program text") {
  TypedProgram tp = infer_types(load_query("crossover"));
  Program tuned = choose_dict_ds(tp, {{"OK", "btree"}, {"Res", "robin_hood"}});
  std::string text = print_program(tuned);
  CHECK(text.find("@dict(\"btree\")") != std::string::npos);
  CHECK(text.find("@dict(\"robin_hood\")") != std::string::npos);
  // Unknown symbols and implementations are rejected.
  CHECK_THROWS_AS(choose_dict_ds(tp, {{"Nope", "btree"}}), UsageError);
  CHECK_THROWS_AS(choose_dict_ds(tp, {{"OK", "wat"}}), UsageError);
}

TEST_CASE("bench data generators are deterministic and well-formed") {
  Value a = gen_pair_bag("k", 64, false, "w", 500, 7, "robin_hood");
  Value b = gen_pair_bag("k", 64, false, "w", 500, 7, "robin_hood");
  CHECK(value_checksum(a) == value_checksum(b));

  Value d = gen_pair_bag("k", 100, true, "v", 100, 3, "sorted_array");
  CHECK(d.as_dict()->size() == 100);  // distinct draw: every key unique

  Value s = gen_snowflake(200, 3, 0.5, 11, "sorted_array", "sorted_array");
  const DictHandle& outer = *s.as_dict();
  CHECK(outer.size() == 200);
  for (Cursor c = outer.impl->begin(); c.valid; outer.impl->advance(c)) {
    const DictHandle& inner = *outer.impl->value_at(c).as_dict();
    CHECK(inner.size() >= 1);
    CHECK(inner.size() <= 3);
  }
  CHECK(value_checksum(s) ==
        value_checksum(
            gen_snowflake(200, 3, 0.5, 11, "sorted_array", "sorted_array")));
}
