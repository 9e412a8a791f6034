#include <cstdlib>
#include <fstream>
#include <iostream>
#include <sstream>

#include "CLI11.hpp"
#include "llql/catalog.hpp"
#include "llql/costinfer.hpp"
#include "llql/costmodel.hpp"
#include "llql/error.hpp"
#include "llql/interp.hpp"
#include "llql/parse.hpp"
#include "llql/print.hpp"
#include "llql/profile.hpp"
#include "llql/registry.hpp"
#include "llql/relation.hpp"
#include "llql/scenario.hpp"
#include "llql/synth.hpp"

namespace {

using namespace llql;

uint64_t env_seed() {
  if (const char* s = std::getenv("LLQL_SEED")) {
    char* end = nullptr;
    unsigned long long v = std::strtoull(s, &end, 10);
    if (end != s && *end == '\0') return v;
    throw UsageError("LLQL_SEED is not a number");
  }
  return 42;
}

std::string read_text(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw DataError("cannot read " + path);
  std::ostringstream ss;
  ss << f.rdbuf();
  return ss.str();
}

void write_text(const std::string& path, const std::string& text) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw DataError("cannot write " + path);
  f << text;
}

std::vector<uint64_t> parse_u64_list(const std::string& s) {
  std::vector<uint64_t> out;
  std::istringstream ss(s);
  std::string tok;
  while (std::getline(ss, tok, ',')) {
    if (tok.empty()) continue;
    char* end = nullptr;
    unsigned long long v = std::strtoull(tok.c_str(), &end, 10);
    if (end == tok.c_str() || *end != '\0')
      throw UsageError("malformed number '" + tok + "' in list");
    out.push_back(v);
  }
  if (out.empty()) throw UsageError("empty number list");
  return out;
}

std::map<std::string, std::string> parse_assigns(
    const std::vector<std::string>& raw) {
  std::map<std::string, std::string> out;
  for (const std::string& a : raw) {
    size_t eq = a.find('=');
    if (eq == std::string::npos || eq == 0 || eq + 1 == a.size())
      throw UsageError("bad assignment '" + a + "', want SYMBOL=impl");
    out[a.substr(0, eq)] = a.substr(eq + 1);
  }
  return out;
}

TypedProgram load_query(const std::string& path) {
  Program p = parse_program(read_text(path));
  return infer_types(p);
}

struct ProfileArgs {
  std::string out;
  uint64_t seed = 42;
  int reps = 5;
  std::string impls, sizes, accessed;
  double work_cap = 0;
  bool quiet = false;
};

int cmd_profile(const ProfileArgs& a) {
  ProfileGrid grid = ProfileGrid::defaults();
  grid.seed = a.seed;
  grid.reps = a.reps;
  if (!a.sizes.empty()) {
    grid.lookup_sizes = parse_u64_list(a.sizes);
    grid.insert_sizes = grid.lookup_sizes;
  }
  if (!a.accessed.empty()) grid.accessed = parse_u64_list(a.accessed);
  if (a.work_cap > 0) grid.work_cap = a.work_cap;
  std::vector<std::string> impls = DictRegistry::instance().names();
  if (!a.impls.empty()) {
    impls.clear();
    std::istringstream ss(a.impls);
    std::string tok;
    while (std::getline(ss, tok, ',')) impls.push_back(tok);
  }
  auto samples = profile_all(grid, impls, a.quiet ? nullptr : &std::cerr);
  save_samples_csv(a.out, samples);
  std::cerr << samples.size() << " samples -> " << a.out << "\n";
  return 0;
}

struct TrainArgs {
  std::string profiles, out;
  std::string regressor = "knn4";
  std::string mode = "per_combination";
  bool log_features = true;
};

int cmd_train(const TrainArgs& a) {
  auto samples = load_samples_csv(a.profiles);
  FeatureConfig fc;
  fc.log_features = a.log_features;
  CostModel m =
      CostModel::train(samples, cost_mode_from_name(a.mode), a.regressor, fc);
  if (m.ridge_warning())
    std::cerr << "warning: singular normal equations, used ridge fallback\n";
  m.save(a.out);
  std::cerr << "trained " << a.regressor << " (" << a.mode << ") on "
            << samples.size() << " samples -> " << a.out << "\n";
  return 0;
}

struct CostArgs {
  std::string query, catalog, model, input_impl = "sorted_array";
  std::vector<std::string> assigns;
  bool trace = false, symbolic = false, calibrate = false;
};

int cmd_cost(const CostArgs& a) {
  TypedProgram tp = load_query(a.query);
  Catalog cat = a.catalog.empty() ? Catalog{} : Catalog::load(a.catalog);
  CostOptions opt;
  opt.assignment = parse_assigns(a.assigns);
  opt.input_impl = a.input_impl;
  opt.trace = a.trace;
  opt.symbolic = a.symbolic;
  if (a.calibrate) opt.scalar = ScalarCosts::calibrated();
  CostModel m;
  const CostModel* mp = nullptr;
  if (!a.symbolic) {
    if (a.model.empty())
      throw UsageError("cost needs --model (or --symbolic)");
    m = CostModel::load(a.model);
    mp = &m;
  }
  CostBreakdown b = infer_cost(tp, cat, mp, opt);
  if (a.symbolic) {
    std::cout << b.symbolic << "\n";
    return 0;
  }
  for (const auto& [name, ms] : b.per_dict_ms)
    std::cout << name << "\t" << ms << " ms\n";
  std::cout << "(scalar)\t" << b.scalar_ms << " ms\n";
  std::cout << "total\t" << b.total_ms << " ms\n";
  if (a.trace) std::cout << b.trace.dump(2) << "\n";
  return 0;
}

struct SynthArgs {
  std::string query, catalog, model, out, report, impls;
  std::string input_impl = "sorted_array";
  bool refine = false;
};

int cmd_synth(const SynthArgs& a) {
  TypedProgram tp = load_query(a.query);
  Catalog cat = a.catalog.empty() ? Catalog{} : Catalog::load(a.catalog);
  CostModel m = CostModel::load(a.model);
  std::vector<std::string> impls = DictRegistry::instance().names();
  if (!a.impls.empty()) {
    impls.clear();
    std::istringstream ss(a.impls);
    std::string tok;
    while (std::getline(ss, tok, ',')) impls.push_back(tok);
  }
  CostOptions base;
  base.input_impl = a.input_impl;
  SynthResult res = synthesize(tp, cat, m, impls, a.refine, base);
  for (const auto& [sym, impl] : res.assignment)
    std::cerr << sym << " -> " << impl << "\n";
  std::string text = print_program(res.tuned);
  if (a.out.empty())
    std::cout << text;
  else
    write_text(a.out, text);
  if (!a.report.empty())
    write_text(a.report, res.report.to_json().dump(2) + "\n");
  return 0;
}

struct RunArgs {
  std::string query, data, out, force_impl;
  std::string input_impl = "sorted_array";
  std::vector<std::string> assigns;
  bool time = false;
};

int cmd_run(const RunArgs& a) {
  TypedProgram tp = load_query(a.query);
  Database db = load_database(a.data, tp.program, a.input_impl);
  RunResult r = run_program(tp, db, parse_assigns(a.assigns), a.force_impl);
  std::string text =
      r.result.is_dict() ? dict_to_csv(r.result) : render_value(r.result) + "\n";
  if (a.out.empty())
    std::cout << text;
  else
    write_text(a.out, text);
  if (a.time) {
    std::cerr << "wall_ms=" << r.wall_ms
              << " key_comparisons=" << r.counters.key_comparisons
              << " hash_invocations=" << r.counters.hash_invocations
              << " probes=" << r.counters.probes << "\n";
    for (const auto& [sym, n] : r.symbol_sizes)
      std::cerr << sym << "=" << n << " entries\n";
  }
  return 0;
}

struct BenchArgs {
  std::string scenario, model, out;
  uint64_t seed = 42;
  int points = 0;
  int reps = 3;
};

int cmd_bench(const BenchArgs& a) {
  BenchOptions opt;
  opt.seed = a.seed;
  opt.points = a.points;
  opt.reps = a.reps;
  CostModel m;
  const CostModel* mp = nullptr;
  if (!a.model.empty()) {
    m = CostModel::load(a.model);
    mp = &m;
  }
  auto rows = run_bench(a.scenario, opt, mp);
  std::string csv = bench_to_csv(rows);
  if (a.out.empty())
    std::cout << csv;
  else
    write_text(a.out, csv);
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"dictionary-tuned query programs: profile, train, synthesize, run"};
  app.require_subcommand(1);

  ProfileArgs pa;
  TrainArgs ta;
  CostArgs ca;
  SynthArgs sa;
  RunArgs ra;
  BenchArgs ba;

  try {
    pa.seed = env_seed();
    ba.seed = pa.seed;
  } catch (const UsageError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }

  auto* profile = app.add_subcommand("profile", "measure dictionary operation costs");
  profile->add_option("--out", pa.out, "output CSV")->required();
  profile->add_option("--seed", pa.seed, "workload seed");
  profile->add_option("--reps", pa.reps, "repetitions per cell (median)");
  profile->add_option("--impls", pa.impls, "comma-separated implementations");
  profile->add_option("--sizes", pa.sizes, "comma-separated dictionary sizes");
  profile->add_option("--accessed", pa.accessed, "comma-separated op counts");
  profile->add_option("--work-cap", pa.work_cap, "element-move budget per cell");
  profile->add_flag("--quiet", pa.quiet, "suppress progress output");

  auto* train = app.add_subcommand("train", "fit a cost model on profile data");
  train->add_option("profiles", ta.profiles, "profile CSV")->required();
  train->add_option("--out", ta.out, "output model JSON")->required();
  train->add_option("--regressor", ta.regressor, "linear | poly2 | knn4");
  train->add_option("--mode", ta.mode, "per_combination | all_in_one");
  train->add_flag("--log-features,!--no-log-features", ta.log_features,
                  "log2-transform size and count features");

  auto* cost = app.add_subcommand("cost", "estimate a query's cost");
  cost->add_option("query", ca.query, "query file")->required();
  cost->add_option("--catalog", ca.catalog, "statistics catalog JSON");
  cost->add_option("--model", ca.model, "trained model JSON");
  cost->add_option("--assign", ca.assigns, "SYMBOL=impl (repeatable)");
  cost->add_option("--input-impl", ca.input_impl, "implementation of inputs");
  cost->add_flag("--trace", ca.trace, "per-node cost trace");
  cost->add_flag("--symbolic", ca.symbolic, "print the closed form");
  cost->add_flag("--calibrate", ca.calibrate, "calibrate scalar node costs");

  auto* synth = app.add_subcommand("synth", "choose dictionary implementations");
  synth->add_option("query", sa.query, "query file")->required();
  synth->add_option("--catalog", sa.catalog, "statistics catalog JSON");
  synth->add_option("--model", sa.model, "trained model JSON")->required();
  synth->add_option("--out", sa.out, "tuned query file (default stdout)");
  synth->add_option("--report", sa.report, "per-candidate report JSON");
  synth->add_option("--impls", sa.impls, "candidate implementations");
  synth->add_option("--input-impl", sa.input_impl, "implementation of inputs");
  synth->add_flag("--refine", sa.refine, "second argmin pass");

  auto* run = app.add_subcommand("run", "evaluate a query against CSV data");
  run->add_option("query", ra.query, "query file")->required();
  run->add_option("--data", ra.data, "directory with <input>.csv files")
      ->required();
  run->add_option("--out", ra.out, "result file (default stdout)");
  run->add_option("--assign", ra.assigns, "SYMBOL=impl (repeatable)");
  run->add_option("--force-impl", ra.force_impl, "override every constructor");
  run->add_option("--input-impl", ra.input_impl, "implementation of inputs");
  run->add_flag("--time", ra.time, "report wall time and counters");

  auto* bench = app.add_subcommand("bench", "run a benchmark scenario");
  bench->add_option("scenario", ba.scenario,
                    "micro | crossover | groupby | covar")->required();
  bench->add_option("--model", ba.model, "trained model JSON");
  bench->add_option("--out", ba.out, "output CSV (default stdout)");
  bench->add_option("--seed", ba.seed, "workload seed");
  bench->add_option("--points", ba.points, "sweep points (0 = default)");
  bench->add_option("--reps", ba.reps, "runs per row (median)");

  try {
    app.parse(argc, argv);
    if (profile->parsed()) return cmd_profile(pa);
    if (train->parsed()) return cmd_train(ta);
    if (cost->parsed()) return cmd_cost(ca);
    if (synth->parsed()) return cmd_synth(sa);
    if (run->parsed()) return cmd_run(ra);
    if (bench->parsed()) return cmd_bench(ba);
    return 1;
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == 0) return app.exit(e);
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  } catch (const UsageError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  } catch (const ModelError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 3;
  } catch (const DataError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
}
