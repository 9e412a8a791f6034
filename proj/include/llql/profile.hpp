#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace llql {

// One timed micro-benchmark cell: `accessed` operations of one kind against
// one dictionary implementation holding `dict_size` entries, with the probe
// or insert key sequence either ascending (ordered) or shuffled.
struct ProfileSample {
  std::string impl;
  std::string op;  // insert | lookup_hit | lookup_miss
  bool ordered = false;
  uint64_t dict_size = 0;
  uint64_t accessed = 0;
  double elapsed_ms = 0.0;
};

struct ProfileGrid {
  std::vector<uint64_t> lookup_sizes;  // prebuilt sizes for lookup cells
  std::vector<uint64_t> insert_sizes;  // pre-existing sizes for insert cells
  std::vector<uint64_t> accessed;      // operations per cell
  int reps = 5;
  int warmup = 1;
  uint64_t seed = 42;
  // Element-move budget per repetition for shift-insert implementations;
  // cells whose predicted move count exceeds it are skipped.
  double work_cap = 1.2e9;

  static ProfileGrid defaults();
};

// n distinct non-negative keys; ascending iff ordered, otherwise a shuffle of
// the identical draw.  Deterministic in (n, seed).
std::vector<int64_t> generate_keys(size_t n, bool ordered, uint64_t seed);

// Runs one cell; empty when the cell is skipped (size-0 lookups, over-budget
// shift-insert work).  Throws UsageError for an unknown implementation.
std::optional<ProfileSample> measure(const std::string& impl,
                                     const std::string& op, bool ordered,
                                     uint64_t dict_size, uint64_t accessed,
                                     const ProfileGrid& grid);

// Full cross product over the grid, minus skipped cells.  `progress`, when
// nonnull, receives one line per cell.
std::vector<ProfileSample> profile_all(const ProfileGrid& grid,
                                       const std::vector<std::string>& impls,
                                       std::ostream* progress = nullptr);

std::string samples_to_csv(const std::vector<ProfileSample>& samples);
std::vector<ProfileSample> samples_from_csv(const std::string& text);
void save_samples_csv(const std::string& path,
                      const std::vector<ProfileSample>& samples);
std::vector<ProfileSample> load_samples_csv(const std::string& path);

}  // namespace llql
