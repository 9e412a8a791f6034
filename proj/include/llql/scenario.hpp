#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "llql/costmodel.hpp"
#include "llql/value.hpp"

namespace llql {

struct BenchRow {
  std::string scenario;
  std::string impl;  // implementation forced program-wide, or "tuned"
  std::string param;
  double elapsed_ms = 0;
  uint64_t checksum = 0;
};

struct BenchOptions {
  uint64_t seed = 42;
  int points = 0;  // sweep points; 0 -> scenario default
  int reps = 3;    // runs per row, median reported
};

// {{ {f1: int, f2: double} -> int }} bag with `rows` entries; f1 uniform
// over [0, dom1), or a distinct sample when `distinct` is set (rows <= dom1).
Value gen_pair_bag(const std::string& f1, int64_t dom1, bool distinct,
                   const std::string& f2, uint64_t rows, uint64_t seed,
                   const std::string& impl);

// {{ s: int -> {{ {i: int} -> double }} }} with `ids` rows; each of the
// `features` columns present with probability `density` (at least one per
// row so every row is representable).
Value gen_snowflake(uint64_t ids, int features, double density, uint64_t seed,
                    const std::string& outer_impl,
                    const std::string& inner_impl);

std::vector<BenchRow> bench_micro(const BenchOptions& opt);
std::vector<BenchRow> bench_crossover(const BenchOptions& opt,
                                      const CostModel& model);
std::vector<BenchRow> bench_groupby(const BenchOptions& opt,
                                    const CostModel& model);
std::vector<BenchRow> bench_covar(const BenchOptions& opt);

// Dispatch by scenario name; `model` may be null for micro and covar.
std::vector<BenchRow> run_bench(const std::string& scenario,
                                const BenchOptions& opt,
                                const CostModel* model);

std::string bench_to_csv(const std::vector<BenchRow>& rows);
void save_bench_csv(const std::string& path,
                    const std::vector<BenchRow>& rows);

}  // namespace llql
