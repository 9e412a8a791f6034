#include <algorithm>
#include <cstring>

#include "llql/dict.hpp"
#include "llql/error.hpp"
#include "llql/registry.hpp"

namespace llql {

namespace {

inline uint64_t mix64(uint64_t x) {
  x ^= x >> 33;
  x *= 0xff51afd7ed558ccdULL;
  x ^= x >> 33;
  x *= 0xc4ceb9fe1a85ec53ULL;
  x ^= x >> 33;
  return x;
}

}  // namespace

uint64_t hash_bytes(std::string_view s) {
  uint64_t h = 0x9e3779b97f4a7c15ULL ^ (s.size() * 0xff51afd7ed558ccdULL);
  size_t i = 0;
  while (i + 8 <= s.size()) {
    uint64_t k;
    std::memcpy(&k, s.data() + i, 8);
    h = mix64(h ^ mix64(k));
    i += 8;
  }
  if (i < s.size()) {
    uint64_t tail = 0;
    int shift = 0;
    for (; i < s.size(); ++i, shift += 8)
      tail |= static_cast<uint64_t>(static_cast<uint8_t>(s[i])) << shift;
    h = mix64(h ^ mix64(tail ^ static_cast<uint64_t>(shift)));
  }
  return h;
}

std::pair<Cursor, Cursor> DictBase::find_hint(Cursor, std::string_view) const {
  throw UnsupportedOperation("hinted find is not supported by this dictionary");
}

std::pair<Cursor, Cursor> DictBase::emplace_hint(Cursor, std::string_view,
                                                Value) {
  throw UnsupportedOperation(
      "hinted emplace is not supported by this dictionary");
}

void DictBase::bulk_load(std::vector<std::pair<std::string, Value>> entries) {
  for (auto& [k, v] : entries) emplace(k, std::move(v));
}

// ---------------------------------------------------------------------------
// sorted_array: flat sorted vector, binary-search find, shift-insert.

class SortedArrayDict final : public DictBase {
 public:
  size_t size() const override { return e_.size(); }
  bool ordered() const override { return true; }
  bool linear_shift_insert() const override { return true; }

  Cursor find(std::string_view key) const override {
    size_t i = lower_bound(0, e_.size(), key);
    if (i < e_.size() && equal_at(i, key)) return at(i);
    return Cursor::end();
  }

  Cursor emplace(std::string_view key, Value v) override {
    size_t i = lower_bound(0, e_.size(), key);
    if (i < e_.size() && equal_at(i, key)) return at(i);
    e_.emplace(e_.begin() + static_cast<ptrdiff_t>(i), std::string(key),
               std::move(v));
    return at(i);
  }

  std::pair<Cursor, Cursor> find_hint(Cursor hint,
                                      std::string_view key) const override {
    size_t i = locate(hint, key);
    Cursor next{i, 0, i < e_.size()};
    if (i < e_.size() && last_cmp_equal_) return {at(i), next};
    return {Cursor::end(), next};
  }

  std::pair<Cursor, Cursor> emplace_hint(Cursor hint, std::string_view key,
                                         Value v) override {
    size_t i = locate(hint, key);
    if (i < e_.size() && last_cmp_equal_) return {at(i), at(i)};
    e_.emplace(e_.begin() + static_cast<ptrdiff_t>(i), std::string(key),
               std::move(v));
    return {at(i), at(i)};
  }

  Cursor begin() const override {
    return e_.empty() ? Cursor::end() : Cursor{0, 0, true};
  }
  void advance(Cursor& c) const override {
    ++c.a;
    c.valid = c.a < e_.size();
  }
  std::string_view key_at(const Cursor& c) const override {
    return e_[c.a].first;
  }
  Value& value_at(const Cursor& c) override { return e_[c.a].second; }

  void reserve(size_t n) override { e_.reserve(n); }
  void bulk_load(std::vector<std::pair<std::string, Value>> entries) override {
    e_ = std::move(entries);
  }
  std::unique_ptr<DictBase> clone() const override {
    auto d = std::make_unique<SortedArrayDict>();
    d->e_ = e_;
    return d;
  }

 private:
  Cursor at(size_t i) const { return Cursor{i, 0, true}; }

  bool equal_at(size_t i, std::string_view key) const {
    ++counters_.key_comparisons;
    return e_[i].first == key;
  }

  int cmp_at(size_t i, std::string_view key) const {
    ++counters_.key_comparisons;
    ++counters_.probes;
    return std::string_view(e_[i].first).compare(key);
  }

  size_t lower_bound(size_t lo, size_t hi, std::string_view key) const {
    while (lo < hi) {
      size_t mid = lo + (hi - lo) / 2;
      ++counters_.key_comparisons;
      ++counters_.probes;
      if (std::string_view(e_[mid].first) < key)
        lo = mid + 1;
      else
        hi = mid;
    }
    return lo;
  }

  // Least-upper-bound position for key, searched from the hint: gallop
  // forward to bracket the key, then binary-search the bracket, so adjacent
  // probes cost a couple of comparisons and far jumps stay logarithmic.
  // A hint whose predecessor is not below the key signals an out-of-order
  // probe and restarts from the front.
  size_t locate(Cursor hint, std::string_view key) const {
    last_cmp_equal_ = false;
    size_t start = std::min<uint64_t>(hint.a, e_.size());
    if (start > 0 && cmp_at(start - 1, key) >= 0) start = 0;
    size_t lo = start, hi = start, step = 1;
    while (hi < e_.size()) {
      int c = cmp_at(hi, key);
      if (c == 0) {
        last_cmp_equal_ = true;
        return hi;
      }
      if (c > 0) break;
      lo = hi + 1;
      hi += step;
      step *= 2;
    }
    size_t i = lower_bound(lo, std::min(hi, e_.size()), key);
    last_cmp_equal_ = i < e_.size() && equal_at(i, key);
    return i;
  }

  std::vector<std::pair<std::string, Value>> e_;
  mutable bool last_cmp_equal_ = false;
};

// ---------------------------------------------------------------------------
// robin_hood: open addressing with robin-hood displacement, 0.75 load
// factor, power-of-two growth.

class RobinHoodDict final : public DictBase {
 public:
  size_t size() const override { return count_; }
  bool ordered() const override { return false; }

  Cursor find(std::string_view key) const override {
    if (cap_ == 0) return Cursor::end();
    ++counters_.hash_invocations;
    uint64_t h = hash_bytes(key);
    size_t mask = cap_ - 1;
    size_t idx = h & mask;
    size_t dist = 0;
    for (;;) {
      ++counters_.probes;
      if (!used_[idx]) return Cursor::end();
      size_t sd = (idx + cap_ - (slots_[idx].h & mask)) & mask;
      if (sd < dist) return Cursor::end();
      if (slots_[idx].h == h) {
        ++counters_.key_comparisons;
        if (slots_[idx].key == key) return Cursor{idx, 0, true};
      }
      idx = (idx + 1) & mask;
      ++dist;
    }
  }

  Cursor emplace(std::string_view key, Value v) override {
    if (count_ + 1 > (cap_ * 3) / 4) grow();
    ++counters_.hash_invocations;
    uint64_t h = hash_bytes(key);
    size_t mask = cap_ - 1;
    size_t idx = h & mask;
    size_t dist = 0;
    // Until the first displacement we may still discover the key; afterwards
    // we are inserting a displaced occupant that is known to be absent.
    Slot carry;
    carry.h = h;
    carry.key = key;
    carry.val = std::move(v);
    bool original = true;
    size_t result = 0;
    for (;;) {
      ++counters_.probes;
      if (!used_[idx]) {
        used_[idx] = 1;
        slots_[idx] = std::move(carry);
        ++count_;
        return Cursor{original ? idx : result, 0, true};
      }
      size_t sd = (idx + cap_ - (slots_[idx].h & mask)) & mask;
      if (original && slots_[idx].h == h) {
        ++counters_.key_comparisons;
        if (slots_[idx].key == carry.key) return Cursor{idx, 0, true};
      }
      if (sd < dist) {
        std::swap(slots_[idx], carry);
        if (original) {
          result = idx;
          original = false;
        }
        dist = sd;
      }
      idx = (idx + 1) & mask;
      ++dist;
    }
  }

  Cursor begin() const override {
    for (size_t i = 0; i < cap_; ++i)
      if (used_[i]) return Cursor{i, 0, true};
    return Cursor::end();
  }
  void advance(Cursor& c) const override {
    for (size_t i = c.a + 1; i < cap_; ++i) {
      if (used_[i]) {
        c.a = i;
        return;
      }
    }
    c.valid = false;
  }
  std::string_view key_at(const Cursor& c) const override {
    return slots_[c.a].key;
  }
  Value& value_at(const Cursor& c) override { return slots_[c.a].val; }

  void reserve(size_t n) override {
    size_t want = 16;
    while (want * 3 / 4 < n) want <<= 1;
    if (want > cap_) rehash(want);
  }
  std::unique_ptr<DictBase> clone() const override {
    auto d = std::make_unique<RobinHoodDict>();
    d->slots_ = slots_;
    d->used_ = used_;
    d->cap_ = cap_;
    d->count_ = count_;
    return d;
  }

 private:
  struct Slot {
    uint64_t h = 0;
    std::string key;
    Value val;
  };

  void grow() { rehash(cap_ == 0 ? 16 : cap_ * 2); }

  void rehash(size_t new_cap) {
    std::vector<Slot> old = std::move(slots_);
    std::vector<uint8_t> old_used = std::move(used_);
    slots_.assign(new_cap, Slot{});
    used_.assign(new_cap, 0);
    size_t old_cap = cap_;
    cap_ = new_cap;
    size_t mask = cap_ - 1;
    for (size_t i = 0; i < old_cap; ++i) {
      if (!old_used[i]) continue;
      Slot carry = std::move(old[i]);
      size_t idx = carry.h & mask;
      size_t dist = 0;
      for (;;) {
        ++counters_.probes;
        if (!used_[idx]) {
          used_[idx] = 1;
          slots_[idx] = std::move(carry);
          break;
        }
        size_t sd = (idx + cap_ - (slots_[idx].h & mask)) & mask;
        if (sd < dist) {
          std::swap(slots_[idx], carry);
          dist = sd;
        }
        idx = (idx + 1) & mask;
        ++dist;
      }
    }
  }

  std::vector<Slot> slots_;
  std::vector<uint8_t> used_;
  size_t cap_ = 0;
  size_t count_ = 0;
};

// ---------------------------------------------------------------------------
// chained_hash: separate chaining with node storage in insertion order.

class ChainedHashDict final : public DictBase {
 public:
  size_t size() const override { return nodes_.size(); }
  bool ordered() const override { return false; }

  Cursor find(std::string_view key) const override {
    if (heads_.empty()) return Cursor::end();
    ++counters_.hash_invocations;
    uint64_t h = hash_bytes(key);
    int32_t i = heads_[h & (heads_.size() - 1)];
    while (i >= 0) {
      ++counters_.probes;
      const Node& n = nodes_[static_cast<size_t>(i)];
      if (n.h == h) {
        ++counters_.key_comparisons;
        if (n.key == key) return Cursor{static_cast<uint64_t>(i), 0, true};
      }
      i = n.next;
    }
    return Cursor::end();
  }

  Cursor emplace(std::string_view key, Value v) override {
    if (heads_.empty()) rehash(16);
    ++counters_.hash_invocations;
    uint64_t h = hash_bytes(key);
    size_t b = h & (heads_.size() - 1);
    for (int32_t i = heads_[b]; i >= 0;
         i = nodes_[static_cast<size_t>(i)].next) {
      ++counters_.probes;
      const Node& n = nodes_[static_cast<size_t>(i)];
      if (n.h == h) {
        ++counters_.key_comparisons;
        if (n.key == key) return Cursor{static_cast<uint64_t>(i), 0, true};
      }
    }
    if (nodes_.size() + 1 > heads_.size() * 3 / 4) {
      rehash(heads_.size() * 2);
      b = h & (heads_.size() - 1);
    }
    Node n;
    n.h = h;
    n.key = key;
    n.val = std::move(v);
    n.next = heads_[b];
    heads_[b] = static_cast<int32_t>(nodes_.size());
    nodes_.push_back(std::move(n));
    return Cursor{nodes_.size() - 1, 0, true};
  }

  Cursor begin() const override {
    return nodes_.empty() ? Cursor::end() : Cursor{0, 0, true};
  }
  void advance(Cursor& c) const override {
    ++c.a;
    c.valid = c.a < nodes_.size();
  }
  std::string_view key_at(const Cursor& c) const override {
    return nodes_[c.a].key;
  }
  Value& value_at(const Cursor& c) override { return nodes_[c.a].val; }

  void reserve(size_t n) override {
    size_t want = 16;
    while (want * 3 / 4 < n) want <<= 1;
    if (want > heads_.size()) rehash(want);
    nodes_.reserve(n);
  }
  std::unique_ptr<DictBase> clone() const override {
    auto d = std::make_unique<ChainedHashDict>();
    d->heads_ = heads_;
    d->nodes_ = nodes_;
    return d;
  }

 private:
  struct Node {
    uint64_t h = 0;
    int32_t next = -1;
    std::string key;
    Value val;
  };

  void rehash(size_t new_cap) {
    heads_.assign(new_cap, -1);
    size_t mask = new_cap - 1;
    for (size_t i = 0; i < nodes_.size(); ++i) {
      size_t b = nodes_[i].h & mask;
      nodes_[i].next = heads_[b];
      heads_[b] = static_cast<int32_t>(i);
    }
  }

  std::vector<int32_t> heads_;
  std::vector<Node> nodes_;
};

// ---------------------------------------------------------------------------
// btree: B+ tree with fanout 16, leaf chaining and parent pointers so hinted
// inserts avoid a root descent.

class BTreeDict final : public DictBase {
 public:
  BTreeDict() = default;
  ~BTreeDict() override { destroy(root_); }
  BTreeDict(const BTreeDict&) = delete;
  BTreeDict& operator=(const BTreeDict&) = delete;

  size_t size() const override { return size_; }
  bool ordered() const override { return true; }

  Cursor find(std::string_view key) const override {
    if (!root_) return Cursor::end();
    Leaf* leaf = descend(key);
    size_t slot = leaf_lower_bound(leaf, key);
    if (slot < leaf->items.size() && equal_at(leaf, slot, key))
      return cursor(leaf, slot);
    return Cursor::end();
  }

  Cursor emplace(std::string_view key, Value v) override {
    if (!root_) {
      auto* leaf = new Leaf();
      root_ = leaf;
      first_leaf_ = leaf;
    }
    Leaf* leaf = descend(key);
    size_t slot = leaf_lower_bound(leaf, key);
    if (slot < leaf->items.size() && equal_at(leaf, slot, key))
      return cursor(leaf, slot);
    return leaf_insert(leaf, slot, key, std::move(v));
  }

  std::pair<Cursor, Cursor> find_hint(Cursor hint,
                                      std::string_view key) const override {
    if (!root_) return {Cursor::end(), Cursor::end()};
    auto [leaf, slot] = locate(hint, key);
    Cursor next = leaf ? cursor(leaf, slot) : Cursor::end();
    if (leaf && last_cmp_equal_) return {next, next};
    return {Cursor::end(), next};
  }

  std::pair<Cursor, Cursor> emplace_hint(Cursor hint, std::string_view key,
                                         Value v) override {
    if (!root_) {
      Cursor c = emplace(key, std::move(v));
      return {c, c};
    }
    auto [leaf, slot] = locate(hint, key);
    if (leaf && last_cmp_equal_) {
      Cursor c = cursor(leaf, slot);
      return {c, c};
    }
    Cursor c;
    if (!leaf) {
      // Past the last element: append to the rightmost leaf.
      Leaf* last = last_leaf();
      c = leaf_insert(last, last->items.size(), key, std::move(v));
    } else {
      c = leaf_insert(leaf, slot, key, std::move(v));
    }
    return {c, c};
  }

  Cursor begin() const override {
    if (!first_leaf_ || first_leaf_->items.empty()) return Cursor::end();
    return cursor(first_leaf_, 0);
  }
  void advance(Cursor& c) const override {
    Leaf* leaf = reinterpret_cast<Leaf*>(c.a);
    size_t slot = c.b + 1;
    if (slot < leaf->items.size()) {
      c.b = slot;
      return;
    }
    if (leaf->next) {
      c.a = reinterpret_cast<uint64_t>(leaf->next);
      c.b = 0;
      return;
    }
    c.valid = false;
  }
  std::string_view key_at(const Cursor& c) const override {
    return reinterpret_cast<Leaf*>(c.a)->items[c.b].first;
  }
  Value& value_at(const Cursor& c) override {
    return reinterpret_cast<Leaf*>(c.a)->items[c.b].second;
  }

  void bulk_load(std::vector<std::pair<std::string, Value>> entries) override {
    destroy(root_);
    root_ = nullptr;
    first_leaf_ = nullptr;
    size_ = entries.size();
    if (entries.empty()) return;

    std::vector<Node*> level;
    std::vector<std::string> seps;  // first key of each node in `level`
    Leaf* prev = nullptr;
    size_t i = 0;
    while (i < entries.size()) {
      size_t n = std::min<size_t>(kLeafCap - 4, entries.size() - i);
      auto* leaf = new Leaf();
      leaf->items.reserve(n);
      seps.push_back(entries[i].first);
      for (size_t j = 0; j < n; ++j) leaf->items.push_back(std::move(entries[i + j]));
      i += n;
      if (prev) {
        prev->next = leaf;
        leaf->prev = prev;
      } else {
        first_leaf_ = leaf;
      }
      prev = leaf;
      level.push_back(leaf);
    }
    while (level.size() > 1) {
      std::vector<Node*> upper;
      std::vector<std::string> upper_seps;
      size_t j = 0;
      while (j < level.size()) {
        size_t n = std::min<size_t>(kInnerCap - 4, level.size() - j);
        if (level.size() - j - n == 1) --n;  // avoid a single-child node
        auto* in = new Inner();
        upper_seps.push_back(seps[j]);
        for (size_t k = 0; k < n; ++k) {
          in->kids.push_back(level[j + k]);
          level[j + k]->parent = in;
          if (k > 0) in->keys.push_back(seps[j + k]);
        }
        j += n;
        upper.push_back(in);
      }
      level = std::move(upper);
      seps = std::move(upper_seps);
    }
    root_ = level[0];
  }

  std::unique_ptr<DictBase> clone() const override {
    auto d = std::make_unique<BTreeDict>();
    if (!root_) return d;
    std::vector<Leaf*> leaves;
    d->root_ = copy_node(root_, leaves);
    for (size_t i = 0; i + 1 < leaves.size(); ++i) {
      leaves[i]->next = leaves[i + 1];
      leaves[i + 1]->prev = leaves[i];
    }
    d->first_leaf_ = leaves.empty() ? nullptr : leaves.front();
    d->size_ = size_;
    return d;
  }

 private:
  static constexpr size_t kLeafCap = 16;
  static constexpr size_t kInnerCap = 16;

  struct Inner;
  struct Node {
    Inner* parent = nullptr;
    bool is_leaf;
    explicit Node(bool leaf) : is_leaf(leaf) {}
    virtual ~Node() = default;
  };
  struct Leaf final : Node {
    Leaf() : Node(true) {}
    std::vector<std::pair<std::string, Value>> items;
    Leaf* next = nullptr;
    Leaf* prev = nullptr;
  };
  struct Inner final : Node {
    Inner() : Node(false) {}
    std::vector<std::string> keys;  // keys[i] = smallest key under kids[i+1]
    std::vector<Node*> kids;
  };

  Cursor cursor(const Leaf* leaf, size_t slot) const {
    return Cursor{reinterpret_cast<uint64_t>(leaf), slot, true};
  }

  bool equal_at(const Leaf* leaf, size_t slot, std::string_view key) const {
    ++counters_.key_comparisons;
    return leaf->items[slot].first == key;
  }

  int cmp_at(const Leaf* leaf, size_t slot, std::string_view key) const {
    ++counters_.key_comparisons;
    ++counters_.probes;
    return std::string_view(leaf->items[slot].first).compare(key);
  }

  Leaf* descend(std::string_view key) const {
    Node* n = root_;
    while (!n->is_leaf) {
      auto* in = static_cast<Inner*>(n);
      size_t lo = 0, hi = in->keys.size();
      while (lo < hi) {
        size_t mid = lo + (hi - lo) / 2;
        ++counters_.key_comparisons;
        ++counters_.probes;
        if (key < std::string_view(in->keys[mid]))
          hi = mid;
        else
          lo = mid + 1;
      }
      n = in->kids[lo];
    }
    return static_cast<Leaf*>(n);
  }

  size_t leaf_lower_bound(const Leaf* leaf, std::string_view key) const {
    size_t lo = 0, hi = leaf->items.size();
    while (lo < hi) {
      size_t mid = lo + (hi - lo) / 2;
      ++counters_.key_comparisons;
      ++counters_.probes;
      if (std::string_view(leaf->items[mid].first) < key)
        lo = mid + 1;
      else
        hi = mid;
    }
    return lo;
  }

  Leaf* last_leaf() const {
    Node* n = root_;
    while (!n->is_leaf) n = static_cast<Inner*>(n)->kids.back();
    return static_cast<Leaf*>(n);
  }

  // Least-upper-bound position searched from the hint: walk forward a few
  // slots (adjacent probes cost a comparison or two), but restart with a
  // root descent once the key turns out to be far ahead, so strided probes
  // stay logarithmic.  Also descends when the hint is invalid or the probe
  // is out of order.  Returns {nullptr, 0} for the end position.  Sets
  // last_cmp_equal_.
  std::pair<Leaf*, size_t> locate(Cursor hint, std::string_view key) const {
    last_cmp_equal_ = false;
    Leaf* leaf = nullptr;
    size_t slot = 0;
    bool near = hint.valid;
    if (near) {
      leaf = reinterpret_cast<Leaf*>(hint.a);
      slot = std::min<size_t>(hint.b, leaf->items.size());
      bool suspicious;
      if (slot > 0)
        suspicious = cmp_at(leaf, slot - 1, key) >= 0;
      else if (leaf->prev && !leaf->prev->items.empty())
        suspicious =
            cmp_at(leaf->prev, leaf->prev->items.size() - 1, key) >= 0;
      else
        suspicious = false;
      near = !suspicious;
    }
    if (!near) {
      leaf = descend(key);
      slot = leaf_lower_bound(leaf, key);
    }
    size_t walked = 0;
    for (;;) {
      if (slot == leaf->items.size()) {
        if (!leaf->next) return {nullptr, 0};
        leaf = leaf->next;
        slot = 0;
        continue;
      }
      int c = cmp_at(leaf, slot, key);
      if (c >= 0) {
        last_cmp_equal_ = c == 0;
        return {leaf, slot};
      }
      ++slot;
      if (near && ++walked == 8) {
        near = false;
        leaf = descend(key);
        slot = leaf_lower_bound(leaf, key);
      }
    }
  }

  Cursor leaf_insert(Leaf* leaf, size_t slot, std::string_view key, Value v) {
    leaf->items.emplace(leaf->items.begin() + static_cast<ptrdiff_t>(slot),
                        std::string(key), std::move(v));
    ++size_;
    if (leaf->items.size() <= kLeafCap) return cursor(leaf, slot);

    auto* right = new Leaf();
    size_t half = leaf->items.size() / 2;
    right->items.assign(std::make_move_iterator(leaf->items.begin() +
                                                static_cast<ptrdiff_t>(half)),
                        std::make_move_iterator(leaf->items.end()));
    leaf->items.resize(half);
    right->next = leaf->next;
    if (right->next) right->next->prev = right;
    right->prev = leaf;
    leaf->next = right;
    right->parent = leaf->parent;
    insert_into_parent(leaf, right->items[0].first, right);
    if (slot < half) return cursor(leaf, slot);
    return cursor(right, slot - half);
  }

  void insert_into_parent(Node* left, std::string sep, Node* right) {
    Inner* parent = left->parent;
    if (!parent) {
      auto* nr = new Inner();
      nr->keys.push_back(std::move(sep));
      nr->kids = {left, right};
      left->parent = nr;
      right->parent = nr;
      root_ = nr;
      return;
    }
    size_t idx = 0;
    while (parent->kids[idx] != left) ++idx;
    parent->keys.insert(parent->keys.begin() + static_cast<ptrdiff_t>(idx),
                        std::move(sep));
    parent->kids.insert(parent->kids.begin() + static_cast<ptrdiff_t>(idx) + 1,
                        right);
    right->parent = parent;
    if (parent->kids.size() <= kInnerCap) return;

    auto* rnode = new Inner();
    size_t half = parent->kids.size() / 2;  // kids going right
    std::string promoted = std::move(parent->keys[parent->kids.size() - half - 1]);
    rnode->kids.assign(parent->kids.begin() +
                           static_cast<ptrdiff_t>(parent->kids.size() - half),
                       parent->kids.end());
    rnode->keys.assign(
        std::make_move_iterator(parent->keys.begin() +
                                static_cast<ptrdiff_t>(parent->kids.size() -
                                                       half)),
        std::make_move_iterator(parent->keys.end()));
    parent->kids.resize(parent->kids.size() - half);
    parent->keys.resize(parent->kids.size() - 1);
    for (Node* kid : rnode->kids) kid->parent = rnode;
    rnode->parent = parent->parent;
    insert_into_parent(parent, std::move(promoted), rnode);
  }

  void destroy(Node* n) {
    if (!n) return;
    if (!n->is_leaf)
      for (Node* kid : static_cast<Inner*>(n)->kids) destroy(kid);
    delete n;
  }

  Node* copy_node(const Node* n, std::vector<Leaf*>& leaves) const {
    if (n->is_leaf) {
      auto* src = static_cast<const Leaf*>(n);
      auto* leaf = new Leaf();
      leaf->items = src->items;
      leaves.push_back(leaf);
      return leaf;
    }
    auto* src = static_cast<const Inner*>(n);
    auto* in = new Inner();
    in->keys = src->keys;
    for (const Node* kid : src->kids) {
      Node* c = copy_node(kid, leaves);
      c->parent = in;
      in->kids.push_back(c);
    }
    return in;
  }

  Node* root_ = nullptr;
  Leaf* first_leaf_ = nullptr;
  size_t size_ = 0;
  mutable bool last_cmp_equal_ = false;
};

// ---------------------------------------------------------------------------

DictRegistry& DictRegistry::instance() {
  static DictRegistry reg;
  return reg;
}

DictRegistry::DictRegistry() {
  entries_.emplace_back("robin_hood",
                        [] { return std::make_unique<RobinHoodDict>(); });
  entries_.emplace_back("chained_hash",
                        [] { return std::make_unique<ChainedHashDict>(); });
  entries_.emplace_back("sorted_array",
                        [] { return std::make_unique<SortedArrayDict>(); });
  entries_.emplace_back("btree", [] { return std::make_unique<BTreeDict>(); });
}

void DictRegistry::register_impl(const std::string& name, Factory f) {
  for (const auto& [n, _] : entries_)
    if (n == name)
      throw UsageError("dictionary implementation '" + name +
                       "' is already registered");
  entries_.emplace_back(name, std::move(f));
}

bool DictRegistry::contains(const std::string& name) const {
  for (const auto& [n, _] : entries_)
    if (n == name) return true;
  return false;
}

std::unique_ptr<DictBase> DictRegistry::make(const std::string& name) const {
  for (const auto& [n, f] : entries_)
    if (n == name) return f();
  throw UsageError("unknown dictionary implementation '" + name + "'");
}

std::vector<std::string> DictRegistry::names() const {
  std::vector<std::string> out;
  out.reserve(entries_.size());
  for (const auto& [n, _] : entries_) out.push_back(n);
  return out;
}

bool DictRegistry::is_ordered(const std::string& name) const {
  return make(name)->ordered();
}

const std::string& default_hash_impl() {
  static const std::string name = "robin_hood";
  return name;
}

const std::string& default_sorted_impl() {
  static const std::string name = "sorted_array";
  return name;
}

std::shared_ptr<DictHandle> make_handle(const std::string& impl_name,
                                        const LType& dict_type) {
  if (dict_type.kind != LType::Kind::Dict)
    throw TypeError("expected a dictionary type");
  auto h = std::make_shared<DictHandle>();
  h->impl_name = impl_name;
  h->schema = KeySchema::from_type(dict_type.key_type());
  h->value_type = dict_type.val_type();
  h->key_label = dict_type.key_label;
  h->impl = DictRegistry::instance().make(impl_name);
  return h;
}

std::shared_ptr<DictHandle> clone_handle(const DictHandle& h) {
  auto c = std::make_shared<DictHandle>();
  c->impl_name = h.impl_name;
  c->schema = h.schema;
  c->value_type = h.value_type;
  c->key_label = h.key_label;
  c->impl = h.impl->clone();
  return c;
}

}  // namespace llql
