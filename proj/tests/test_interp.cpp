#include "doctest.h"

#include <cmath>
#include <cstdio>
#include <map>
#include <random>
#include <tuple>

#include "llql/error.hpp"
#include "llql/interp.hpp"
#include "llql/parse.hpp"
#include "llql/registry.hpp"
#include "llql/relation.hpp"
#include "testutil.hpp"

using namespace llql;
using namespace llql::test;

namespace {

RunResult run_fixture(const std::string& name, const Database& db,
                      const std::string& force_impl = "") {
  TypedProgram tp = infer_types(load_query(name));
  return run_program(tp, db, {}, force_impl);
}

// Compares an int-keyed dictionary of numbers against an expected map.
template <typename K, typename V>
void check_dict_equals(const Value& dict, const std::map<K, V>& expect) {
  const DictHandle& d = *dict.as_dict();
  REQUIRE(d.size() == expect.size());
  for (Cursor c = d.impl->begin(); c.valid; d.impl->advance(c)) {
    Value kv = d.schema.decode(d.impl->key_at(c));
    auto it = expect.find(static_cast<K>(kv.as_int()));
    REQUIRE(it != expect.end());
    const Value& v = d.impl->value_at(c);
    if constexpr (std::is_floating_point_v<V>)
      CHECK(v.num() == doctest::Approx(it->second).epsilon(1e-9));
    else
      CHECK(v.as_int() == it->second);
  }
}

std::vector<Row> random_bag(std::mt19937_64& rng, int n, int key_dom,
                            int int_keys, int dbl_keys) {
  std::vector<Row> rows(n);
  for (auto& r : rows) {
    for (int i = 0; i < int_keys; ++i)
      r.ints.push_back(static_cast<int64_t>(rng() % key_dom));
    for (int i = 0; i < dbl_keys; ++i)
      r.dbls.push_back(static_cast<double>(rng() % 1000) / 4.0);
    r.mult = 1 + static_cast<int64_t>(rng() % 3);
  }
  return rows;
}

}  // namespace

TEST_CASE("grouped aggregation matches a direct oracle, hashed and sorted") {
  std::mt19937_64 rng(101);
  auto rows = random_bag(rng, 300, 20, 1, 1);
  Database db;
  db.inputs["R"] = make_bag({"g"}, {"x"}, rows);

  std::map<int64_t, double> expect;
  {
    // Accumulate per distinct (g, x) then weight by multiplicity.
    std::map<std::pair<int64_t, double>, int64_t> bag;
    for (const auto& r : rows) bag[{r.ints[0], r.dbls[0]}] += r.mult;
    for (const auto& [k, m] : bag)
      expect[k.first] += k.second * static_cast<double>(m);
  }

  RunResult hash_run = run_fixture("groupby_hash", db);
  check_dict_equals(hash_run.result, expect);
  CHECK(hash_run.symbol_sizes.at("Ragg") == expect.size());

  RunResult sorted_run = run_fixture("groupby_sorted", db);
  check_dict_equals(sorted_run.result, expect);
  CHECK(value_checksum(hash_run.result) == value_checksum(sorted_run.result));
}

TEST_CASE("equi-join matches a nested-loop oracle, hashed and sorted") {
  std::mt19937_64 rng(202);
  auto r_rows = random_bag(rng, 200, 15, 2, 0);
  auto s_rows = random_bag(rng, 200, 15, 2, 0);
  Database db;
  db.inputs["R"] = make_bag({"jk", "ra"}, {}, r_rows);
  db.inputs["S"] = make_bag({"jk", "sb"}, {}, s_rows);

  std::map<std::tuple<int64_t, int64_t, int64_t>, int64_t> expect;
  {
    std::map<std::pair<int64_t, int64_t>, int64_t> rb, sb;
    for (const auto& r : r_rows) rb[{r.ints[0], r.ints[1]}] += r.mult;
    for (const auto& s : s_rows) sb[{s.ints[0], s.ints[1]}] += s.mult;
    for (const auto& [rk, rm] : rb)
      for (const auto& [sk, sm] : sb)
        if (rk.first == sk.first)
          expect[{rk.first, rk.second, sk.second}] += rm * sm;
  }

  for (const char* fixture : {"join_hash", "join_sorted"}) {
    CAPTURE(fixture);
    RunResult rr = run_fixture(fixture, db);
    const DictHandle& d = *rr.result.as_dict();
    REQUIRE(d.size() == expect.size());
    for (Cursor c = d.impl->begin(); c.valid; d.impl->advance(c)) {
      Value kv = d.schema.decode(d.impl->key_at(c));
      const RecordValue& rec = *kv.as_record();
      auto it = expect.find({rec.field("jk")->as_int(),
                             rec.field("ra")->as_int(),
                             rec.field("sb")->as_int()});
      REQUIRE(it != expect.end());
      CHECK(d.impl->value_at(c).as_int() == it->second);
    }
  }
}

TEST_CASE("group-join handles unmatched keys through empty-dictionary misses") {
  std::mt19937_64 rng(303);
  auto r_rows = random_bag(rng, 150, 30, 2, 0);   // (g, jk), jk in [0, 30)
  auto s_rows = random_bag(rng, 150, 12, 1, 1);   // (jk, y), jk in [0, 12)
  Database db;
  db.inputs["R"] = make_bag({"g", "jk"}, {}, r_rows);
  db.inputs["S"] = make_bag({"jk"}, {"y"}, s_rows);

  std::map<int64_t, double> w;  // per-jk inner sum
  {
    std::map<std::pair<int64_t, double>, int64_t> sb;
    for (const auto& s : s_rows) sb[{s.ints[0], s.dbls[0]}] += s.mult;
    for (const auto& [k, m] : sb)
      w[k.first] += k.second * static_cast<double>(m);
  }
  std::map<int64_t, double> expect;
  {
    std::map<std::pair<int64_t, int64_t>, int64_t> rb;
    for (const auto& r : r_rows) rb[{r.ints[0], r.ints[1]}] += r.mult;
    for (const auto& [k, m] : rb) {
      auto it = w.find(k.second);
      if (it != w.end())
        expect[k.first] += static_cast<double>(m) * it->second;
    }
  }

  RunResult hash_run = run_fixture("groupjoin_hash", db);
  check_dict_equals(hash_run.result, expect);
  RunResult sorted_run = run_fixture("groupjoin_sorted", db);
  check_dict_equals(sorted_run.result, expect);
}

TEST_CASE("pairwise moments: nested-dictionary and record variants agree") {
  std::mt19937_64 rng(404);
  std::vector<std::vector<std::pair<int64_t, double>>> rows;
  for (int r = 0; r < 60; ++r) {
    std::vector<std::pair<int64_t, double>> feats;
    for (int64_t i = 0; i < 3; ++i)
      if (rng() % 3 != 0)  // sparse: ~2/3 of features present
        feats.emplace_back(i, static_cast<double>(rng() % 100) / 8.0);
    rows.push_back(std::move(feats));
  }
  Database db;
  db.inputs["S"] = make_feature_rows(rows);

  std::map<std::pair<int64_t, int64_t>, double> expect;
  for (const auto& r : rows)
    for (const auto& [i, x] : r)
      for (const auto& [j, y] : r) expect[{i, j}] += x * y;

  RunResult nested = run_fixture("covar_nested", db);
  const DictHandle& cov = *nested.result.as_dict();
  REQUIRE(cov.size() == expect.size());
  auto cov_at = [&](int64_t i, int64_t j) {
    Cursor c = cov.find_value(
        Value::record({{"i", Value::of(i)}, {"j", Value::of(j)}}));
    return c.valid ? cov.impl->value_at(c).num() : 0.0;
  };
  for (const auto& [k, v] : expect)
    CHECK(cov_at(k.first, k.second) == doctest::Approx(v).epsilon(1e-9));

  RunResult rec = run_fixture("covar_record", db);
  const RecordValue& r = *rec.result.as_record();
  const char* names[6] = {"c00", "c01", "c02", "c11", "c12", "c22"};
  std::pair<int64_t, int64_t> idx[6] = {{0, 0}, {0, 1}, {0, 2},
                                        {1, 1}, {1, 2}, {2, 2}};
  for (int t = 0; t < 6; ++t)
    CHECK(r.field(names[t])->num() ==
          doctest::Approx(cov_at(idx[t].first, idx[t].second)).epsilon(1e-9));
}

TEST_CASE("filtered sum evaluates the predicate per row") {
  std::mt19937_64 rng(505);
  auto rows = random_bag(rng, 400, 25, 1, 1);
  Database db;
  db.inputs["R"] = make_bag({"g"}, {"x"}, rows);

  double expect = 0.0;
  {
    std::map<std::pair<int64_t, double>, int64_t> bag;
    for (const auto& r : rows) bag[{r.ints[0], r.dbls[0]}] += r.mult;
    for (const auto& [k, m] : bag)
      if (k.second < 50.0) expect += k.second * static_cast<double>(m);
  }
  RunResult rr = run_fixture("sum_filter", db);
  CHECK(rr.result.num() == doctest::Approx(expect).epsilon(1e-9));
}

TEST_CASE("index-join with partial aggregates matches its oracle") {
  std::mt19937_64 rng(606);
  auto o_rows = random_bag(rng, 250, 40, 1, 1);
  auto l_rows = random_bag(rng, 250, 40, 1, 1);
  Database db;
  db.inputs["O"] = make_bag({"k"}, {"w"}, o_rows);
  db.inputs["L"] = make_bag({"k"}, {"v"}, l_rows);

  std::map<int64_t, double> wsum;
  {
    std::map<std::pair<int64_t, double>, int64_t> ob;
    for (const auto& o : o_rows) ob[{o.ints[0], o.dbls[0]}] += o.mult;
    for (const auto& [k, m] : ob)
      wsum[k.first] += k.second * static_cast<double>(m);
  }
  std::map<int64_t, double> expect;
  {
    std::map<std::pair<int64_t, double>, int64_t> lb;
    for (const auto& l : l_rows) lb[{l.ints[0], l.dbls[0]}] += l.mult;
    for (const auto& [k, m] : lb) {
      auto it = wsum.find(k.first);
      if (it != wsum.end())
        expect[k.first] += k.second * it->second * static_cast<double>(m);
    }
  }
  // The partial-aggregate index is a tuning hole; pick implementations here.
  TypedProgram tp = infer_types(load_query("crossover"));
  RunResult rr =
      run_program(tp, db, {{"OK", "robin_hood"}, {"Res", "btree"}});
  check_dict_equals(rr.result, expect);
  CHECK_THROWS_AS(run_program(tp, db), RuntimeError);  // holes need a choice
}

TEST_CASE("max_plus semiring turns accumulation into maximization") {
  // Small dense matrices with values read from the val column.
  auto matrix = [](const std::vector<std::vector<double>>& m) {
    LType t = LType::dict(
        LType::record({{"i", LType::intt()}, {"j", LType::intt()}}),
        LType::dbl());
    auto h = make_handle("sorted_array", t);
    for (size_t i = 0; i < m.size(); ++i)
      for (size_t j = 0; j < m[i].size(); ++j) {
        std::string code = h->schema.encode(Value::record(
            {{"i", Value::of(static_cast<int64_t>(i))},
             {"j", Value::of(static_cast<int64_t>(j))}}));
        h->impl->emplace(code, Value::of(m[i][j]));
      }
    return Value::of(std::move(h));
  };
  std::vector<std::vector<double>> a = {{1, 5, 0}, {2, 0.5, 3}, {4, 1, 2}};
  std::vector<std::vector<double>> b = {{0, 2, 1}, {3, 1, 4}, {1, 0, 2}};
  Database db;
  db.inputs["A"] = matrix(a);
  db.inputs["B"] = matrix(b);

  RunResult rr = run_fixture("mcm", db);
  const DictHandle& d = *rr.result.as_dict();
  REQUIRE(d.size() == 9);
  for (int64_t i = 0; i < 3; ++i)
    for (int64_t k = 0; k < 3; ++k) {
      double best = -1e300;
      for (int64_t j = 0; j < 3; ++j)
        best = std::max(best, a[i][j] + b[j][k]);
      Cursor c = d.find_value(
          Value::record({{"i", Value::of(i)}, {"j", Value::of(k)}}));
      REQUIRE(c.valid);
      CHECK(d.impl->value_at(c).num() == doctest::Approx(best));
    }

  TypedProgram bad = infer_types(
      parse_program("pragma semiring max_plus\n1 - 2"));
  CHECK_THROWS_AS(run_program(bad, {}), RuntimeError);
}

TEST_CASE("results are identical across implementation assignments") {
  std::mt19937_64 rng(707);
  Database db;
  db.inputs["R"] = make_bag({"jk", "ra"}, {}, random_bag(rng, 150, 10, 2, 0));
  db.inputs["S"] = make_bag({"jk", "sb"}, {}, random_bag(rng, 150, 10, 2, 0));
  TypedProgram tp = infer_types(load_query("join_hash"));

  uint64_t first = 0;
  bool have = false;
  for (const auto& impl : DictRegistry::instance().names()) {
    CAPTURE(impl);
    RunResult rr = run_program(tp, db, {}, impl);
    uint64_t sum = value_checksum(rr.result);
    if (!have) {
      first = sum;
      have = true;
    }
    CHECK(sum == first);
  }

  // Per-symbol assignment instead of a global override.
  RunResult rr = run_program(
      tp, db, {{"Sh", "btree"}, {"RS", "chained_hash"}});
  CHECK(value_checksum(rr.result) == first);
}

TEST_CASE("misses read as zeros of the value type") {
  auto result_of = [](const std::string& src) {
    TypedProgram tp = infer_types(parse_program(src));
    return run_program(tp, {}).result;
  };
  Value v = result_of("let D = {{ }} in D(5)");
  CHECK(v.as_int() == 0);  // unconstrained element type defaults to int
  v = result_of("let D = {{ }} in D(5) += 1.5 ; D(7)");
  CHECK(v.as_double() == 0.0);
  v = result_of("pragma semiring max_plus\nlet D = {{ }} in D(5) += 1.5 ; D(7)");
  CHECK(v.as_double() == -std::numeric_limits<double>::infinity());
  // A missing nested dictionary reads as an empty dictionary.
  v = result_of(
      "let D = {{ }} in D(1) += @ht {{ 2 -> 3 }} ;\n"
      "let n = ref(int) in for (g <- D(9)) { n += g.val } ; n");
  CHECK(v.as_int() == 0);
}

TEST_CASE("counters reflect the chosen implementation") {
  std::mt19937_64 rng(808);
  Database db;
  db.inputs["R"] = make_bag({"g"}, {"x"}, random_bag(rng, 500, 30, 1, 1));
  TypedProgram tp = infer_types(load_query("groupby_hash"));

  RunResult sorted = run_program(tp, db, {}, "sorted_array");
  CHECK(sorted.counters.hash_invocations == 0);
  CHECK(sorted.counters.key_comparisons > 0);

  RunResult hashed = run_program(tp, db, {}, "robin_hood");
  CHECK(hashed.counters.hash_invocations > 0);
  CHECK(hashed.wall_ms >= 0.0);
}

TEST_CASE("interpreter validates its configuration") {
  TypedProgram tp = infer_types(load_query("groupby_hash"));
  Database db;
  CHECK_THROWS_AS(run_program(tp, db), DataError);  // no data for R
  std::mt19937_64 rng(1);
  db.inputs["R"] = make_bag({"g"}, {"x"}, random_bag(rng, 5, 3, 1, 1));
  CHECK_THROWS_AS(run_program(tp, db, {}, "no_such"), UsageError);
  CHECK_THROWS_AS(run_program(tp, db, {{"Ragg", "no_such"}}), UsageError);
  CHECK_THROWS_AS(run_program(tp, db, {{"Nope", "btree"}}), RuntimeError);
  CHECK_NOTHROW(run_program(tp, db, {{"Ragg", "btree"}}));
}

TEST_CASE("relation CSV round-trips flat and nested dictionaries") {
  std::mt19937_64 rng(909);
  Database db;
  db.inputs["R"] = make_bag({"g"}, {"x"}, random_bag(rng, 100, 8, 1, 1));

  std::string path = "build/tmp_relation_roundtrip.csv";
  save_dict_csv(path, db.inputs["R"]);
  LType rt = parse_type_text("{{ {g: int, x: double} -> int }}");
  Value back = load_relation_csv(path, rt, "sorted_array");
  CHECK(value_equal(db.inputs["R"], back));
  CHECK(value_checksum(db.inputs["R"]) == value_checksum(back));

  // Nested: the trie layout used by the moments fixtures.  Rows always have
  // at least one feature; an empty inner dictionary has no row representation.
  std::vector<std::vector<std::pair<int64_t, double>>> rows;
  for (int r = 0; r < 20; ++r) {
    std::vector<std::pair<int64_t, double>> feats;
    for (int64_t i = 0; i < 4; ++i)
      if (i == r % 4 || rng() % 2) feats.emplace_back(i, double(rng() % 50) / 2.0);
    rows.push_back(std::move(feats));
  }
  Value trie = make_feature_rows(rows);
  std::string path2 = "build/tmp_relation_trie.csv";
  save_dict_csv(path2, trie);
  LType tt = parse_type_text(
      "{{ s: int -> @dict(\"sorted_array\") {{ {i: int} -> double }} }}");
  Value back2 = load_relation_csv(path2, tt, "sorted_array");
  CHECK(value_equal(trie, back2));

  std::remove(path.c_str());
  std::remove(path2.c_str());
}

TEST_CASE("value semantics: merge, zero, copy, compare") {
  Semiring sum;
  Value a = Value::record({{"p", Value::of(int64_t{1})},
                           {"q", Value::of(2.5)}});
  Value b = Value::record({{"p", Value::of(int64_t{10})},
                           {"q", Value::of(0.5)}});
  Value c = value_add(a, b);
  CHECK(c.as_record()->field("p")->as_int() == 11);
  CHECK(c.as_record()->field("q")->as_double() == 3.0);

  Semiring mp = Semiring::named("max_plus");
  Value m = value_add(Value::of(2.0), Value::of(5.0), mp);
  CHECK(m.as_double() == 5.0);

  LType dt = LType::dict(LType::intt(), LType::dbl(),
                         DictAnnotation::resolved("btree"));
  Value z = zero_of(dt, sum, "robin_hood");
  CHECK(z.as_dict()->impl_name == "btree");  // annotation wins over fallback
  CHECK(z.as_dict()->size() == 0);
  Value z2 = zero_of(LType::dict(LType::intt(), LType::dbl()), sum, "btree");
  CHECK(z2.as_dict()->impl_name == "btree");

  // Dictionary merge is keywise and recursive.
  auto mk = [](int64_t k, double v) {
    LType t = LType::dict(LType::intt(), LType::dbl());
    auto h = make_handle("sorted_array", t);
    std::string code = h->schema.encode(Value::of(k));
    h->impl->emplace(code, Value::of(v));
    return Value::of(std::move(h));
  };
  Value d1 = mk(1, 10.0);
  value_add_inplace(d1, mk(1, 5.0), sum);
  value_add_inplace(d1, mk(2, 7.0), sum);
  auto dumped = dump_dict(d1);
  REQUIRE(dumped.size() == 2);
  CHECK(dumped.at("1").as_double() == 15.0);
  CHECK(dumped.at("2").as_double() == 7.0);

  // deep_copy severs sharing.
  Value d2 = deep_copy(d1);
  value_add_inplace(d1, mk(3, 1.0), sum);
  CHECK(d2.as_dict()->size() == 2);
  CHECK(d1.as_dict()->size() == 3);

  CHECK(value_equal(Value::of(1.0), Value::of(1.0 + 1e-12), 1e-9));
  CHECK_FALSE(value_equal(Value::of(1.0), Value::of(1.1), 1e-9));
  CHECK_FALSE(value_equal(Value::of(int64_t{1}), Value::of(1.0)));
  CHECK(render_value(Value::unit()) == "()");
}
