#include "llql/scenario.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <random>
#include <sstream>

#include "llql/catalog.hpp"
#include "llql/error.hpp"
#include "llql/interp.hpp"
#include "llql/parse.hpp"
#include "llql/print.hpp"
#include "llql/profile.hpp"
#include "llql/registry.hpp"
#include "llql/synth.hpp"

namespace llql {

namespace {

const char* kGroupbySrc =
    "input R : {{ {g: int, x: double} -> int }}\n"
    "let Agg = @dict {{ }} in\n"
    "for (r <- R) {\n"
    "  if (r.key.g < __T__) then Agg(r.key.g) += r.key.x * r.val else ()\n"
    "} ;\n"
    "Agg\n";

const char* kCrossoverSrc =
    "input O : {{ {k: int, w: double} -> int }}\n"
    "input L : {{ {k: int, v: double} -> int }}\n"
    "let OK = @dict {{ }} in\n"
    "for (o <- O) {\n"
    "  OK(o.key.k) += @ht {{ 0 -> o.key.w * o.val }}\n"
    "} ;\n"
    "let Res = @dict {{ }} in\n"
    "for (l <- L) {\n"
    "  for (g <- OK(l.key.k)) {\n"
    "    Res(l.key.k) += l.key.v * g.val * l.val\n"
    "  }\n"
    "} ;\n"
    "Res\n";

const char* kCovarNestedSrc =
    "input S : {{ s: int -> @st {{ {i: int} -> double }} }}\n"
    "let Cov = @ht {{ }} in\n"
    "for (r <- S) {\n"
    "  for (f1 <- r.val) {\n"
    "    for (f2 <- r.val) {\n"
    "      Cov({ i = f1.key.i, j = f2.key.i }) += f1.val * f2.val\n"
    "    }\n"
    "  }\n"
    "} ;\n"
    "Cov\n";

const char* kCovarRecordSrc =
    "input S : {{ s: int -> @st {{ {i: int} -> double }} }}\n"
    "let sagg = ref({c00: double, c01: double, c02: double,\n"
    "                c11: double, c12: double, c22: double}) in\n"
    "for (r <- S) {\n"
    "  sagg += { c00 = r.val({ i = 0 }) * r.val({ i = 0 }),\n"
    "            c01 = r.val({ i = 0 }) * r.val({ i = 1 }),\n"
    "            c02 = r.val({ i = 0 }) * r.val({ i = 2 }),\n"
    "            c11 = r.val({ i = 1 }) * r.val({ i = 1 }),\n"
    "            c12 = r.val({ i = 1 }) * r.val({ i = 2 }),\n"
    "            c22 = r.val({ i = 2 }) * r.val({ i = 2 }) }\n"
    "} ;\n"
    "sagg\n";

double median_of(std::vector<double> xs) {
  size_t mid = xs.size() / 2;
  std::nth_element(xs.begin(), xs.begin() + mid, xs.end());
  return xs[mid];
}

std::string format_param(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.6g", v);
  return buf;
}

// Runs a program `reps` times and reports the median wall time plus the
// (deterministic) result checksum.
BenchRow timed_row(const std::string& scenario, const std::string& impl_label,
                   const std::string& param, const TypedProgram& tp,
                   const Database& db,
                   const std::map<std::string, std::string>& assignment,
                   const std::string& force_impl, int reps) {
  std::vector<double> times;
  uint64_t ck = 0;
  for (int r = 0; r < std::max(1, reps); ++r) {
    RunResult rr = run_program(tp, db, assignment, force_impl);
    times.push_back(rr.wall_ms);
    ck = value_checksum(rr.result);
  }
  return {scenario, impl_label, param, median_of(std::move(times)), ck};
}

const Expr* find_if(const Expr& e) {
  if (e.kind == Expr::Kind::If) return &e;
  const Expr* sub[] = {e.a.get(), e.b.get(), e.c.get()};
  for (const Expr* s : sub)
    if (s)
      if (const Expr* r = find_if(*s)) return r;
  return nullptr;
}

std::vector<double> log_sweep(double lo, double hi, int points) {
  std::vector<double> out;
  if (points <= 1) {
    out.push_back(hi);
    return out;
  }
  double llo = std::log10(lo), lhi = std::log10(hi);
  for (int i = 0; i < points; ++i)
    out.push_back(std::pow(10.0, llo + (lhi - llo) * i / (points - 1)));
  return out;
}

}  // namespace

Value gen_pair_bag(const std::string& f1, int64_t dom1, bool distinct,
                   const std::string& f2, uint64_t rows, uint64_t seed,
                   const std::string& impl) {
  LType t = parse_type_text("{{ {" + f1 + ": int, " + f2 +
                            ": double} -> int }}");
  auto h = make_handle(impl, t);
  h->impl->reserve(rows);
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  std::vector<int64_t> firsts(rows);
  if (distinct) {
    if (rows > static_cast<uint64_t>(dom1))
      throw UsageError("cannot draw " + std::to_string(rows) +
                       " distinct keys from a domain of " +
                       std::to_string(dom1));
    std::vector<int64_t> all(dom1);
    for (int64_t i = 0; i < dom1; ++i) all[i] = i;
    std::shuffle(all.begin(), all.end(), rng);
    firsts.assign(all.begin(), all.begin() + static_cast<int64_t>(rows));
  } else {
    for (uint64_t i = 0; i < rows; ++i)
      firsts[i] = static_cast<int64_t>(rng() % static_cast<uint64_t>(dom1));
  }
  Semiring sr;
  for (uint64_t i = 0; i < rows; ++i) {
    Value key = Value::record({{f1, Value::of(firsts[i])},
                               {f2, Value::of(unif(rng))}});
    std::string kb = h->schema.encode(key);
    Cursor c = h->impl->find(kb);
    if (c.valid)
      value_add_inplace(h->impl->value_at(c), Value::of(int64_t{1}), sr);
    else
      h->impl->emplace(kb, Value::of(int64_t{1}));
  }
  return Value::of(std::move(h));
}

Value gen_snowflake(uint64_t ids, int features, double density, uint64_t seed,
                    const std::string& outer_impl,
                    const std::string& inner_impl) {
  LType t = parse_type_text("{{ s: int -> {{ {i: int} -> double }} }}");
  auto outer = make_handle(outer_impl, t);
  outer->impl->reserve(ids);
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unif(-1.0, 1.0);
  std::uniform_real_distribution<double> coin(0.0, 1.0);
  std::string kb;
  for (uint64_t id = 0; id < ids; ++id) {
    auto inner = make_handle(inner_impl, t.val_type());
    bool any = false;
    for (int f = 0; f < features; ++f) {
      if (coin(rng) >= density) continue;
      Value key = Value::record({{"i", Value::of(static_cast<int64_t>(f))}});
      inner->impl->emplace(inner->schema.encode(key), Value::of(unif(rng)));
      any = true;
    }
    if (!any) {
      int f = static_cast<int>(id % static_cast<uint64_t>(features));
      Value key = Value::record({{"i", Value::of(static_cast<int64_t>(f))}});
      inner->impl->emplace(inner->schema.encode(key), Value::of(unif(rng)));
    }
    kb.clear();
    encode_int_key(static_cast<int64_t>(id), kb);
    outer->impl->emplace(kb, Value::of(std::move(inner)));
  }
  return Value::of(std::move(outer));
}

std::vector<BenchRow> bench_micro(const BenchOptions& opt) {
  constexpr uint64_t n = 1u << 14;
  ProfileGrid grid;
  grid.reps = std::max(1, opt.reps);
  grid.warmup = 1;
  grid.seed = opt.seed;
  std::vector<BenchRow> rows;
  struct Cell {
    const char* op;
    uint64_t size, accessed;
    const char* param;
  };
  const Cell cells[] = {{"insert", 0, n, "build/16384"},
                        {"lookup_hit", n, n, "hit/16384"},
                        {"lookup_miss", n, n, "miss/16384"}};
  for (const std::string& impl : DictRegistry::instance().names())
    for (const Cell& c : cells)
      if (auto s = measure(impl, c.op, false, c.size, c.accessed, grid))
        rows.push_back({"micro", impl, c.param, s->elapsed_ms, 0});
  return rows;
}

std::vector<BenchRow> bench_groupby(const BenchOptions& opt,
                                    const CostModel& model) {
  constexpr uint64_t kRows = 1u << 19;
  constexpr int64_t kGroups = 1 << 12;
  int points = opt.points > 0 ? opt.points : 70;
  Database db;
  db.inputs.emplace(
      "R", gen_pair_bag("g", kGroups, false, "x", kRows, opt.seed, "robin_hood"));
  std::vector<std::string> impls = DictRegistry::instance().names();
  std::vector<BenchRow> rows;
  int64_t prev_t = 0;
  for (double sel : log_sweep(1e-4, 1.0, points)) {
    // Log-spaced selectivities round to integer thresholds, which collide
    // below 1/kGroups; step past the previous threshold so every point is
    // a distinct experiment.
    int64_t T = std::max<int64_t>(
        prev_t + 1, static_cast<int64_t>(std::llround(sel * kGroups)));
    T = std::min<int64_t>(T, kGroups);
    prev_t = T;
    std::string src = kGroupbySrc;
    src.replace(src.find("__T__"), 5, std::to_string(T));
    Program p = parse_program(src);
    TypedProgram tp = infer_types(p);
    Catalog cat;
    cat.relations["R"].card = static_cast<double>(kRows);
    cat.relations["R"].distinct["g"] = static_cast<double>(kGroups);
    cat.relations["R"].distinct["x"] = static_cast<double>(kRows);
    const Expr* cond = find_if(*p.body);
    double actual = std::min(1.0, static_cast<double>(T) / kGroups);
    if (cond) cat.predicates[predicate_key(*cond->a)] = actual;
    std::string param = format_param(actual);
    for (const std::string& impl : impls)
      rows.push_back(
          timed_row("groupby", impl, param, tp, db, {}, impl, opt.reps));
    SynthResult sr = synthesize(tp, cat, model, impls);
    rows.push_back(
        timed_row("groupby", "tuned", param, tp, db, sr.assignment, "", opt.reps));
  }
  return rows;
}

std::vector<BenchRow> bench_crossover(const BenchOptions& opt,
                                      const CostModel& model) {
  constexpr int64_t kDom = 1 << 14;
  constexpr uint64_t kProbeRows = 1u << 18;
  int points = opt.points > 0 ? opt.points : 12;
  Program p = parse_program(kCrossoverSrc);
  TypedProgram tp = infer_types(p);
  // L is generated once, held sorted so iteration probes in ascending order.
  Value L = gen_pair_bag("k", kDom, false, "v", kProbeRows, opt.seed,
                         default_sorted_impl());
  std::vector<std::string> impls = DictRegistry::instance().names();
  std::vector<BenchRow> rows;
  int point_idx = 0;
  for (double sel : log_sweep(1e-4, 0.5, points)) {
    uint64_t K = std::max<uint64_t>(
        1, static_cast<uint64_t>(std::llround(sel * kDom)));
    Database db;
    db.inputs.emplace("O", gen_pair_bag("k", kDom, true, "w", K,
                                        opt.seed + 1000 + point_idx,
                                        default_sorted_impl()));
    db.inputs.emplace("L", L);
    Catalog cat;
    cat.relations["O"].card = static_cast<double>(K);
    cat.relations["O"].distinct["k"] = static_cast<double>(K);
    cat.relations["O"].distinct["w"] = static_cast<double>(K);
    cat.relations["L"].card = static_cast<double>(kProbeRows);
    cat.relations["L"].distinct["k"] = static_cast<double>(kDom);
    cat.relations["L"].distinct["v"] = static_cast<double>(kProbeRows);
    std::string param = format_param(sel);
    for (const std::string& impl : impls)
      rows.push_back(
          timed_row("crossover", impl, param, tp, db, {}, impl, opt.reps));
    SynthResult sr = synthesize(tp, cat, model, impls);
    rows.push_back(timed_row("crossover", "tuned", param, tp, db,
                             sr.assignment, "", opt.reps));
    ++point_idx;
  }
  return rows;
}

std::vector<BenchRow> bench_covar(const BenchOptions& opt) {
  constexpr uint64_t kIds = 1u << 14;
  Database db;
  db.inputs.emplace("S", gen_snowflake(kIds, 3, 0.8, opt.seed,
                                       default_sorted_impl(),
                                       default_sorted_impl()));
  TypedProgram nested = infer_types(parse_program(kCovarNestedSrc));
  TypedProgram record = infer_types(parse_program(kCovarRecordSrc));
  std::vector<BenchRow> rows;
  for (const std::string& impl : DictRegistry::instance().names()) {
    rows.push_back(
        timed_row("covar", impl, "nested", nested, db, {}, impl, opt.reps));
    rows.push_back(
        timed_row("covar", impl, "record", record, db, {}, impl, opt.reps));
  }
  return rows;
}

std::vector<BenchRow> run_bench(const std::string& scenario,
                                const BenchOptions& opt,
                                const CostModel* model) {
  if (scenario == "micro") return bench_micro(opt);
  if (scenario == "covar") return bench_covar(opt);
  if (scenario == "crossover" || scenario == "groupby") {
    if (!model)
      throw UsageError("scenario '" + scenario +
                       "' needs a trained cost model (--model)");
    return scenario == "crossover" ? bench_crossover(opt, *model)
                                   : bench_groupby(opt, *model);
  }
  throw UsageError("unknown scenario '" + scenario +
                   "' (want micro, crossover, groupby or covar)");
}

std::string bench_to_csv(const std::vector<BenchRow>& rows) {
  std::ostringstream out;
  out << "scenario,impl,param,elapsed_ms,result_checksum\n";
  char buf[64];
  for (const BenchRow& r : rows) {
    std::snprintf(buf, sizeof buf, "%.6f", r.elapsed_ms);
    out << r.scenario << "," << r.impl << "," << r.param << "," << buf << ","
        << r.checksum << "\n";
  }
  return out.str();
}

void save_bench_csv(const std::string& path,
                    const std::vector<BenchRow>& rows) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw DataError("cannot write " + path);
  f << bench_to_csv(rows);
}

}  // namespace llql
