#include "llql/profile.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <ostream>
#include <random>
#include <sstream>

#include "llql/error.hpp"
#include "llql/keycode.hpp"
#include "llql/registry.hpp"
#include "llql/relation.hpp"
#include "llql/value.hpp"

namespace llql {

namespace {

volatile uint64_t g_sink;  // keeps timed loops from being optimized away

using Clock = std::chrono::steady_clock;

double now_ms() {
  return std::chrono::duration<double, std::milli>(
             Clock::now().time_since_epoch())
      .count();
}

// Distinct ascending keys as cumulative sums of random positive gaps.
// gap_mod controls the density: average gap is about gap_mod / 2.
std::vector<int64_t> ascending_keys(size_t n, uint64_t seed, uint64_t gap_mod) {
  std::vector<int64_t> keys(n);
  std::mt19937_64 rng(seed);
  int64_t k = -1;
  for (size_t i = 0; i < n; ++i) {
    k += 1 + static_cast<int64_t>(rng() % gap_mod);
    keys[i] = k;
  }
  return keys;
}

std::vector<std::string> encode_all(const std::vector<int64_t>& keys) {
  std::vector<std::string> out(keys.size());
  for (size_t i = 0; i < keys.size(); ++i) encode_int_key(keys[i], out[i]);
  return out;
}

double median(std::vector<double> xs) {
  size_t mid = xs.size() / 2;
  std::nth_element(xs.begin(), xs.begin() + mid, xs.end());
  return xs[mid];
}

uint64_t cell_seed(const ProfileGrid& grid, const std::string& impl,
                   const std::string& op, bool ordered, uint64_t size,
                   uint64_t accessed) {
  std::string tag = impl + "|" + op + "|" + (ordered ? "1" : "0") + "|" +
                    std::to_string(size) + "|" + std::to_string(accessed);
  return hash_bytes(tag) ^ grid.seed;
}

constexpr uint64_t kGapMod = 64;

}  // namespace

ProfileGrid ProfileGrid::defaults() {
  ProfileGrid g;
  for (uint64_t s = 1u << 4; s <= 1u << 20; s <<= 2) g.lookup_sizes.push_back(s);
  g.insert_sizes.push_back(0);
  for (uint64_t s = 1u << 6; s <= 1u << 20; s <<= 2) g.insert_sizes.push_back(s);
  for (uint64_t a = 1u << 4; a <= 1u << 20; a <<= 4) g.accessed.push_back(a);
  return g;
}

std::vector<int64_t> generate_keys(size_t n, bool ordered, uint64_t seed) {
  std::vector<int64_t> keys = ascending_keys(n, seed, kGapMod);
  if (!ordered) {
    std::mt19937_64 rng(seed ^ 0x9e3779b97f4a7c15ULL);
    std::shuffle(keys.begin(), keys.end(), rng);
  }
  return keys;
}

std::optional<ProfileSample> measure(const std::string& impl,
                                     const std::string& op, bool ordered,
                                     uint64_t dict_size, uint64_t accessed,
                                     const ProfileGrid& grid) {
  auto& reg = DictRegistry::instance();
  if (!reg.contains(impl))
    throw UsageError("unknown dictionary implementation '" + impl + "'");
  if (op != "insert" && op != "lookup_hit" && op != "lookup_miss")
    throw UsageError("unknown profiled operation '" + op + "'");
  if (accessed == 0) throw UsageError("accessed count must be positive");
  if (op != "insert" && dict_size == 0) return std::nullopt;  // nothing to hit

  // Shift-insert implementations move O(size) entries per unordered insert;
  // skip cells whose total move count would blow the budget.
  if (op == "insert" && !ordered && reg.make(impl)->linear_shift_insert()) {
    double moves =
        static_cast<double>(accessed) * (dict_size + accessed / 2.0);
    if (moves > grid.work_cap) return std::nullopt;
  }

  uint64_t seed = cell_seed(grid, impl, op, ordered, dict_size, accessed);
  std::vector<int64_t> base = ascending_keys(dict_size, seed, kGapMod);

  // Base entries use even keys so that odd keys are guaranteed misses.
  std::vector<std::pair<std::string, Value>> entries(dict_size);
  for (uint64_t i = 0; i < dict_size; ++i) {
    encode_int_key(2 * base[i], entries[i].first);
    entries[i].second = Value::of(static_cast<int64_t>(i));
  }

  // Insert cells get headroom for the fresh keys: a structure that reached
  // `dict_size` by growth would have spare capacity, and without the slack a
  // single full reallocation lands inside the timed batch and dominates it.
  // Growth costs themselves are measured by the size-0 cells.
  uint64_t room = dict_size + (op == "insert" ? accessed : 0);
  auto build = [&] {
    std::unique_ptr<DictBase> d = reg.make(impl);
    d->reserve(room);
    d->bulk_load(entries);
    return d;
  };

  std::mt19937_64 rng(seed + 1);
  std::vector<std::string> probes;  // one pass worth of keys
  uint64_t passes = 1;

  if (op != "insert") {
    bool miss = op == "lookup_miss";
    if (ordered) {
      // Ascending sample spread across the key range, cycled to reach
      // `accessed` operations.  Sizes and counts are powers of two, so the
      // passes divide evenly.
      uint64_t m = std::min(accessed, dict_size);
      passes = accessed / m;
      std::vector<int64_t> keys(m);
      for (uint64_t j = 0; j < m; ++j) {
        int64_t k = base[j * dict_size / m];
        keys[j] = 2 * k + (miss ? 1 : 0);
      }
      probes = encode_all(keys);
    } else {
      std::vector<int64_t> keys(accessed);
      for (uint64_t j = 0; j < accessed; ++j) {
        int64_t k = base[rng() % dict_size];
        keys[j] = 2 * k + (miss ? 1 : 0);
      }
      probes = encode_all(keys);
    }
  } else {
    std::vector<int64_t> fresh;
    if (ordered) {
      fresh = ascending_keys(accessed, seed + 1, kGapMod);
      int64_t start = dict_size == 0 ? 0 : base.back() + 1;
      for (int64_t& k : fresh) k += start;
      for (int64_t& k : fresh) k *= 2;
    } else {
      // Odd keys with a gap density matched to the base range, so fresh keys
      // interleave with existing ones.
      uint64_t gap = kGapMod;
      if (dict_size > 0) {
        uint64_t range = static_cast<uint64_t>(base.back()) + 1;
        gap = std::max<uint64_t>(1, range / accessed);
      }
      fresh = ascending_keys(accessed, seed + 1, gap);
      for (int64_t& k : fresh) k = 2 * k + 1;
      std::shuffle(fresh.begin(), fresh.end(), rng);
    }
    probes = encode_all(fresh);
  }

  // Amplify tiny lookup batches so each measurement spans many clock ticks.
  uint64_t amp = 1;
  if (op != "insert" && accessed < 4096) amp = 4096 / accessed;

  bool hinted = ordered && reg.is_ordered(impl);
  std::vector<double> times;
  std::unique_ptr<DictBase> lookup_dict;
  if (op != "insert") lookup_dict = build();

  for (int rep = 0; rep < grid.warmup + grid.reps; ++rep) {
    double elapsed;
    uint64_t sink = 0;
    if (op == "insert") {
      std::unique_ptr<DictBase> d = build();
      double t0 = now_ms();
      if (hinted) {
        Cursor hint = Cursor::end();
        for (const std::string& k : probes) {
          auto [cur, next] = d->emplace_hint(hint, k, Value::of(int64_t{1}));
          hint = next;
          sink += cur.valid;
        }
      } else {
        for (const std::string& k : probes)
          sink += d->emplace(k, Value::of(int64_t{1})).valid;
      }
      elapsed = now_ms() - t0;
    } else {
      DictBase* d = lookup_dict.get();
      double t0 = now_ms();
      for (uint64_t a = 0; a < amp; ++a) {
        if (hinted) {
          for (uint64_t pass = 0; pass < passes; ++pass) {
            Cursor hint = d->begin();
            for (const std::string& k : probes) {
              auto [cur, next] = d->find_hint(hint, k);
              hint = next;
              sink += cur.valid;
            }
          }
        } else {
          for (uint64_t pass = 0; pass < passes; ++pass)
            for (const std::string& k : probes) sink += d->find(k).valid;
        }
      }
      elapsed = (now_ms() - t0) / static_cast<double>(amp);
    }
    g_sink = sink;
    if (rep >= grid.warmup) times.push_back(elapsed);
  }

  ProfileSample s;
  s.impl = impl;
  s.op = op;
  s.ordered = ordered;
  s.dict_size = dict_size;
  s.accessed = accessed;
  s.elapsed_ms = median(std::move(times));
  return s;
}

std::vector<ProfileSample> profile_all(const ProfileGrid& grid,
                                       const std::vector<std::string>& impls,
                                       std::ostream* progress) {
  static const char* kOps[] = {"insert", "lookup_hit", "lookup_miss"};
  std::vector<ProfileSample> out;
  for (const std::string& impl : impls) {
    for (const char* op : kOps) {
      const auto& sizes =
          std::string(op) == "insert" ? grid.insert_sizes : grid.lookup_sizes;
      for (bool ordered : {false, true}) {
        for (uint64_t size : sizes) {
          for (uint64_t acc : grid.accessed) {
            auto s = measure(impl, op, ordered, size, acc, grid);
            if (progress) {
              *progress << impl << " " << op << (ordered ? " ordered " : " unordered ")
                        << "size=" << size << " accessed=" << acc;
              if (s)
                *progress << " -> " << s->elapsed_ms << " ms\n";
              else
                *progress << " -> skipped\n";
              progress->flush();
            }
            if (s) out.push_back(std::move(*s));
          }
        }
      }
    }
  }
  return out;
}

std::string samples_to_csv(const std::vector<ProfileSample>& samples) {
  std::ostringstream out;
  out << "impl,op,ordered,dict_size,accessed,elapsed_ms\n";
  char buf[64];
  for (const ProfileSample& s : samples) {
    std::snprintf(buf, sizeof buf, "%.6f", s.elapsed_ms);
    out << s.impl << "," << s.op << "," << (s.ordered ? 1 : 0) << ","
        << s.dict_size << "," << s.accessed << "," << buf << "\n";
  }
  return out.str();
}

std::vector<ProfileSample> samples_from_csv(const std::string& text) {
  auto rows = parse_csv(text);
  if (rows.empty() || rows[0].size() != 6 || rows[0][0] != "impl")
    throw DataError("profile CSV must start with the impl,op,... header");
  std::vector<ProfileSample> out;
  for (size_t i = 1; i < rows.size(); ++i) {
    const auto& r = rows[i];
    if (r.size() != 6)
      throw DataError("profile CSV row " + std::to_string(i + 1) +
                      " has " + std::to_string(r.size()) + " cells, want 6");
    ProfileSample s;
    s.impl = r[0];
    s.op = r[1];
    try {
      s.ordered = std::stoi(r[2]) != 0;
      s.dict_size = std::stoull(r[3]);
      s.accessed = std::stoull(r[4]);
      s.elapsed_ms = std::stod(r[5]);
    } catch (const std::exception&) {
      throw DataError("profile CSV row " + std::to_string(i + 1) +
                      " has a malformed number");
    }
    out.push_back(std::move(s));
  }
  return out;
}

void save_samples_csv(const std::string& path,
                      const std::vector<ProfileSample>& samples) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw DataError("cannot write " + path);
  f << samples_to_csv(samples);
}

std::vector<ProfileSample> load_samples_csv(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw DataError("cannot read " + path);
  std::ostringstream ss;
  ss << f.rdbuf();
  return samples_from_csv(ss.str());
}

}  // namespace llql
