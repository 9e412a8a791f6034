#include "llql/costinfer.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <limits>
#include <vector>

#include "llql/error.hpp"
#include "llql/interp.hpp"
#include "llql/parse.hpp"
#include "llql/print.hpp"
#include "llql/registry.hpp"

namespace llql {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

std::string format_count(double v) {
  if (std::fabs(v - std::round(v)) < 1e-9 && std::fabs(v) < 1e15) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%lld", static_cast<long long>(std::llround(v)));
    return buf;
  }
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.6g", v);
  return buf;
}

// Estimated statistics of one dictionary-valued expression.
struct DictInfo {
  double card = 0;
  double inner_card = 0;       // average size of dictionary-valued entries
  std::string impl;            // implementation at this level
  std::string inner_impl;      // implementation one level down
  std::string owner;           // attribution bucket (symbol or input name)
  std::string rel;             // relation whose attributes describe the keys
  std::string key_label;       // scalar-key column name at this level
  bool known_card = true;      // false when the catalog lacks the relation
};

struct SymbolStats {
  double card = 0;
  double inner_total = 0;  // entries inserted into dictionary-valued values
};

struct Binding {
  enum class Kind { Scalar, Entry, Dict, Iter } kind = Kind::Scalar;
  DictInfo dict;            // Entry: the iterated dictionary; Dict: itself
  const LType* dict_type = nullptr;  // Entry: type of the iterated dictionary
  double scalar_dist = -1;  // Scalar: distinct estimate of the bound value
};

struct Ctx {
  double calls = 1;
  double cond = 1;
};

class CostWalk {
 public:
  CostWalk(const TypedProgram& tp, const Catalog& cat, const CostModel* model,
           const CostOptions& opt)
      : tp_(tp), cat_(cat), model_(model), opt_(opt) {}

  CostBreakdown run() {
    for (const InputDecl& in : tp_.program.inputs) {
      Binding b;
      b.kind = Binding::Kind::Dict;
      b.dict = input_info(in);
      env_.emplace_back(in.name, b);
    }
    visit(*tp_.program.body, Ctx{});
    out_.total_ms += out_.scalar_ms;
    if (opt_.symbolic) {
      std::string s;
      for (const std::string& t : symbolic_terms_) {
        if (!s.empty()) s += " + ";
        s += t;
      }
      out_.symbolic = s;
    }
    return std::move(out_);
  }

 private:
  const TypedProgram& tp_;
  const Catalog& cat_;
  const CostModel* model_;
  const CostOptions& opt_;
  CostBreakdown out_;
  std::vector<std::pair<std::string, Binding>> env_;
  std::map<std::string, SymbolStats> stats_;
  std::vector<bool> loop_ordered_;       // innermost last
  std::vector<std::string> loop_vars_;   // loop variable names, innermost last
  std::vector<std::string> symbolic_terms_;

  const Binding* lookup(const std::string& name) const {
    for (auto it = env_.rbegin(); it != env_.rend(); ++it)
      if (it->first == name) return &it->second;
    return nullptr;
  }

  // Symbol statistics accumulate while the walk passes update sites, so a
  // binding's snapshot must be refreshed at every use.
  void refresh(DictInfo& d) {
    auto it = stats_.find(d.owner);
    if (it == stats_.end()) return;
    d.card = it->second.card;
    d.inner_card =
        it->second.card > 0 ? it->second.inner_total / it->second.card : 0;
  }

  std::string impl_of_ann(const DictAnnotation& ann,
                          const std::string& fallback) const {
    if (ann.kind == DictAnnotation::Kind::Resolved) return ann.impl;
    return fallback;
  }

  DictInfo input_info(const InputDecl& in) const {
    DictInfo d;
    d.owner = in.name;
    d.rel = in.name;
    d.impl = impl_of_ann(in.type.ann, opt_.input_impl);
    d.key_label = in.type.key_label;
    const Catalog::Relation* r = cat_.relation(in.name);
    if (r) {
      d.card = r->card;
      d.inner_card = r->inner_card;
    } else {
      d.known_card = false;
    }
    if (in.type.val_type().is(LType::Kind::Dict))
      d.inner_impl = impl_of_ann(in.type.val_type().ann, opt_.input_impl);
    return d;
  }

  double require_card(const DictInfo& d, const Expr& site) const {
    if (!d.known_card)
      throw DataError("catalog has no entry for relation '" + d.rel +
                      "' (needed at line " + std::to_string(site.loc.line) + ")");
    return d.card;
  }

  std::string symbol_impl(const std::string& name, const Expr& ctor) const {
    auto it = opt_.assignment.find(name);
    if (it != opt_.assignment.end()) return it->second;
    if (ctor.ann.kind == DictAnnotation::Kind::Resolved) return ctor.ann.impl;
    if (ctor.ann.kind == DictAnnotation::Kind::Unresolved) {
      if (!opt_.default_impl.empty()) return opt_.default_impl;
      // The closed form never names an implementation, so holes are fine
      // in symbolic mode.
      if (opt_.symbolic) return DictRegistry::instance().names().front();
      throw UsageError("dictionary symbol '" + name +
                       "' has no implementation; synthesize one or pass an "
                       "assignment");
    }
    return DictRegistry::instance().names().front();
  }

  // Shifts info one nesting level down (x.val, or a dictionary-valued
  // lookup result).
  DictInfo descend(const DictInfo& d, const LType& value_type) const {
    DictInfo inner;
    inner.card = d.inner_card;
    inner.impl = d.inner_impl.empty() ? opt_.input_impl : d.inner_impl;
    inner.owner = d.owner;
    inner.rel = d.rel;
    inner.known_card = d.known_card;
    if (value_type.is(LType::Kind::Dict)) {
      inner.key_label = value_type.key_label;
      if (value_type.val_type().is(LType::Kind::Dict))
        inner.inner_impl =
            impl_of_ann(value_type.val_type().ann, opt_.input_impl);
    }
    return inner;
  }

  // Statistics of a dictionary-valued expression, or nullopt for forms the
  // analysis does not model.
  std::optional<DictInfo> dict_info(const Expr& e) {
    switch (e.kind) {
      case Expr::Kind::Var: {
        const Binding* b = lookup(e.name);
        if (b && b->kind == Binding::Kind::Dict) {
          DictInfo d = b->dict;
          refresh(d);
          return d;
        }
        return std::nullopt;
      }
      case Expr::Kind::FieldAccess: {
        if (e.name == "val" && e.a->kind == Expr::Kind::Var) {
          const Binding* b = lookup(e.a->name);
          if (b && b->kind == Binding::Kind::Entry &&
              b->dict_type->val_type().is(LType::Kind::Dict)) {
            DictInfo d = b->dict;
            refresh(d);
            return descend(d, b->dict_type->val_type());
          }
        }
        return std::nullopt;
      }
      case Expr::Kind::DictLookup:
      case Expr::Kind::HintedLookup: {
        auto base = dict_info(*e.a);
        if (!base) return std::nullopt;
        const LType& t = tp_.type_of(*e.a);
        if (t.is(LType::Kind::Dict) && t.val_type().is(LType::Kind::Dict))
          return descend(*base, t.val_type());
        return std::nullopt;
      }
      case Expr::Kind::DictCtor: {
        DictInfo d;
        d.card = static_cast<double>(e.dict_items.size());
        d.impl = impl_of_ann(e.ann, DictRegistry::instance().names().front());
        d.owner = "(inline)";
        return d;
      }
      default:
        return std::nullopt;
    }
  }

  // Distinct-value estimate of a key expression; infinity when every
  // evaluation may produce a fresh value.
  double dist_of(const Expr& e) {
    switch (e.kind) {
      case Expr::Kind::IntLit:
      case Expr::Kind::RealLit:
      case Expr::Kind::BoolLit:
      case Expr::Kind::StringLit:
        return 1;
      case Expr::Kind::RecordCtor: {
        double p = 1;
        for (const auto& [_, f] : e.rec_fields) {
          double d = dist_of(*f);
          if (d == kInf) return kInf;
          p *= d;
        }
        return p;
      }
      case Expr::Kind::Var: {
        const Binding* b = lookup(e.name);
        if (b && b->kind == Binding::Kind::Scalar && b->scalar_dist >= 0)
          return b->scalar_dist;
        return kInf;
      }
      case Expr::Kind::FieldAccess: {
        // x.key over a scalar-keyed level, or x.key.f over a record key.
        const Expr& base = *e.a;
        if (e.name == "key" && base.kind == Expr::Kind::Var) {
          const Binding* b = lookup(base.name);
          if (b && b->kind == Binding::Kind::Entry) {
            DictInfo d = b->dict;
            refresh(d);
            const std::string& label = d.key_label;
            if (!label.empty() && !d.rel.empty() && d.known_card)
              return cat_.attr_distinct(d.rel, label);
            return d.card > 0 ? d.card : kInf;
          }
        }
        if (base.kind == Expr::Kind::FieldAccess && base.name == "key" &&
            base.a->kind == Expr::Kind::Var) {
          const Binding* b = lookup(base.a->name);
          if (b && b->kind == Binding::Kind::Entry) {
            DictInfo d = b->dict;
            refresh(d);
            if (!d.rel.empty() && d.known_card)
              return cat_.attr_distinct(d.rel, e.name);
            return d.card > 0 ? d.card : kInf;
          }
        }
        return kInf;
      }
      default:
        return kInf;
    }
  }

  // True when the expression provably never decreases across iterations of
  // the innermost loop: a projection onto the leading key component of an
  // ordered iteration (or a record whose leading field is one).
  bool nondecreasing(const Expr& e) const {
    if (loop_vars_.empty() || !loop_ordered_.back()) return false;
    const std::string& lv = loop_vars_.back();
    auto is_key_of_loop = [&](const Expr& x) {
      return x.kind == Expr::Kind::FieldAccess && x.name == "key" &&
             x.a->kind == Expr::Kind::Var && x.a->name == lv;
    };
    if (is_key_of_loop(e)) return true;
    if (e.kind == Expr::Kind::FieldAccess && e.a &&
        is_key_of_loop(*e.a)) {
      const Binding* b = lookup(lv);
      if (b && b->kind == Binding::Kind::Entry) {
        const LType& kt = b->dict_type->key_type();
        if (kt.is(LType::Kind::Record) && !kt.fields.empty())
          return kt.fields.front().first == e.name;
      }
      return false;
    }
    if (e.kind == Expr::Kind::RecordCtor && !e.rec_fields.empty())
      return nondecreasing(*e.rec_fields.front().second);
    return false;
  }

  void add_scalar(double ns, const Ctx& g) {
    out_.scalar_ms += ns * g.calls * g.cond * 1e-6;
  }

  void charge_delta(const std::string& bucket, double ms) {
    out_.total_ms += ms;
    out_.per_dict_ms[bucket] += ms;
  }

  void trace_event(const Expr& e, nlohmann::json fields) {
    if (!opt_.trace) return;
    fields["node"] = kind_name(e.kind);
    fields["line"] = e.loc.line;
    fields["col"] = e.loc.col;
    out_.trace.push_back(std::move(fields));
  }

  double selectivity(const Expr& cond) {
    if (auto s = cat_.selectivity(predicate_key(cond))) return *s;
    switch (cond.kind) {
      case Expr::Kind::BoolLit:
        return cond.bool_val ? 1.0 : 0.0;
      case Expr::Kind::BinOp:
        if (cond.bop == BinOpKind::And)
          return selectivity(*cond.a) * selectivity(*cond.b);
        if (cond.bop == BinOpKind::Or) {
          double a = selectivity(*cond.a), b = selectivity(*cond.b);
          return a + b - a * b;
        }
        return cat_.default_sel;
      case Expr::Kind::UnOp:
        if (cond.uop == UnOpKind::Not) return 1.0 - selectivity(*cond.a);
        return cat_.default_sel;
      default:
        return cat_.default_sel;
    }
  }

  // Dictionary read: lookup rule of the cost semantics.
  void cost_lookup(const Expr& e, const DictInfo& d, const Expr& key,
                   bool hinted, const Ctx& g) {
    double C = g.calls * g.cond;
    if (C <= 0) return;
    double N = d.owner == "(inline)" ? d.card : require_card(d, e);
    bool ordered = hinted && nondecreasing(key);
    if (hinted && !DictRegistry::instance().is_ordered(d.impl)) {
      charge_delta(d.owner, kInf);
      return;
    }
    if (N <= 0) {
      // Empty dictionary: every probe misses.
      if (opt_.symbolic) {
        symbolic_terms_.push_back("c_k");
        symbolic_terms_.push_back("d_luf(" + format_count(C) + ", 0)");
        return;
      }
      double ms = model_->delta_luf(d.impl, ordered, C, 0);
      charge_delta(d.owner, ms);
      return;
    }
    double dist = dist_of(key);
    double sigma = dist == kInf ? 1.0 : std::clamp(dist / N, 0.0, 1.0);
    double H = sigma * C;
    double M = C - H;
    if (opt_.symbolic) {
      symbolic_terms_.push_back("c_k");
      symbolic_terms_.push_back("d_lus(" + format_count(H) + ", " +
                                format_count(N) + ")");
      symbolic_terms_.push_back("d_luf(" + format_count(M) + ", " +
                                format_count(N) + ")");
      return;
    }
    add_scalar(opt_.scalar.key_encode_ns, g);
    double ms =
        model_->delta_lus(d.impl, ordered, H, N) +
        model_->delta_luf(d.impl, ordered, M, N);
    charge_delta(d.owner, ms);
    trace_event(e, {{"rule", "lookup"}, {"ds", d.impl}, {"C", C}, {"N", N},
                    {"H", H}, {"M", M}, {"ms", ms}});
  }

  // Dictionary write: update rule of the cost semantics.
  void cost_update(const Expr& e, const DictInfo& d, const Expr& key,
                   const Expr& delta, bool hinted, const Ctx& g) {
    double C = g.calls * g.cond;
    if (C <= 0) return;
    if (hinted && !DictRegistry::instance().is_ordered(d.impl)) {
      charge_delta(d.owner, kInf);
      return;
    }
    double dist = dist_of(key);
    double N = std::min(dist, C);
    // Exact or accumulated symbol statistics override the estimate.
    if (e.a->kind == Expr::Kind::Var && stats_.count(e.a->name)) {
      auto& st = stats_[e.a->name];
      if (auto exact = cat_.symbol_card(e.a->name)) {
        st.card = *exact;
        N = std::min(*exact, C);
      } else {
        st.card += N;
      }
      if (delta.kind == Expr::Kind::DictCtor)
        st.inner_total += C * static_cast<double>(delta.dict_items.size());
    }
    double H = std::clamp(C - N, 0.0, C);
    double M = C - H;
    bool ordered = hinted && nondecreasing(key);
    if (opt_.symbolic) {
      symbolic_terms_.push_back("c_k");
      symbolic_terms_.push_back("c_v");
      symbolic_terms_.push_back("d_lus(" + format_count(H) + ", " +
                                format_count(N) + ")");
      symbolic_terms_.push_back("d_luf(" + format_count(M) + ", " +
                                format_count(N) + ")");
      symbolic_terms_.push_back("d_ins(" + format_count(N) + ")");
      return;
    }
    add_scalar(opt_.scalar.key_encode_ns, g);
    double ms =
        model_->delta_lus(d.impl, ordered, H, N) +
        model_->delta_luf(d.impl, ordered, M, N) +
        model_->delta_ins(d.impl, ordered, N);
    charge_delta(d.owner, ms);
    trace_event(e, {{"rule", "update"}, {"ds", d.impl}, {"C", C}, {"N", N},
                    {"H", H}, {"M", M}, {"ms", ms}});
  }

  void visit(const Expr& e, Ctx g) {
    switch (e.kind) {
      case Expr::Kind::Seq:
        visit(*e.a, g);
        visit(*e.b, g);
        return;
      case Expr::Kind::Unit:
      case Expr::Kind::IntLit:
      case Expr::Kind::RealLit:
      case Expr::Kind::BoolLit:
      case Expr::Kind::StringLit:
      case Expr::Kind::Var:
      case Expr::Kind::RefInit:
        add_scalar(opt_.scalar.node_ns, g);
        return;
      case Expr::Kind::Let: {
        visit(*e.a, g);
        Binding b;
        if (auto d = dict_info(*e.a)) {
          b.kind = Binding::Kind::Dict;
          b.dict = *d;
          if (const DictSymbol* sym = tp_.symbol(e.name);
              sym && sym->ctor == e.a.get()) {
            b.dict.owner = e.name;
            b.dict.impl = symbol_impl(e.name, *sym->ctor);
            const LType& dt = tp_.type_of(*sym->ctor);
            b.dict.key_label = dt.key_label;
            if (dt.val_type().is(LType::Kind::Dict))
              b.dict.inner_impl = impl_of_ann(
                  dt.val_type().ann, DictRegistry::instance().names().front());
            auto& st = stats_[e.name];
            st.card = b.dict.card;
          }
        } else if (e.a->kind == Expr::Kind::DictIter) {
          b.kind = Binding::Kind::Iter;
        } else {
          b.kind = Binding::Kind::Scalar;
          b.scalar_dist = dist_of(*e.a);
        }
        env_.emplace_back(e.name, b);
        visit(*e.b, g);
        env_.pop_back();
        return;
      }
      case Expr::Kind::If: {
        visit(*e.a, g);
        double s = selectivity(*e.a);
        Ctx gt = g, ge = g;
        gt.cond *= s;
        ge.cond *= 1.0 - s;
        visit(*e.b, gt);
        visit(*e.c, ge);
        return;
      }
      case Expr::Kind::RecordCtor:
        add_scalar(opt_.scalar.node_ns +
                       opt_.scalar.record_field_ns *
                           static_cast<double>(e.rec_fields.size()),
                   g);
        for (const auto& [_, f] : e.rec_fields) visit(*f, g);
        return;
      case Expr::Kind::FieldAccess:
        add_scalar(opt_.scalar.node_ns, g);
        visit(*e.a, g);
        return;
      case Expr::Kind::BinOp:
        add_scalar(opt_.scalar.node_ns, g);
        visit(*e.a, g);
        visit(*e.b, g);
        return;
      case Expr::Kind::UnOp:
        add_scalar(opt_.scalar.node_ns, g);
        visit(*e.a, g);
        return;
      case Expr::Kind::RefUpdate:
        add_scalar(opt_.scalar.node_ns, g);
        visit(*e.b, g);
        return;
      case Expr::Kind::DictCtor: {
        // Freshly built each evaluation: charge the item insertions.
        size_t m = e.dict_items.size();
        for (const auto& [k, v] : e.dict_items) {
          visit(*k, g);
          visit(*v, g);
        }
        if (m > 0 && !opt_.symbolic) {
          std::string impl =
              impl_of_ann(e.ann, DictRegistry::instance().names().front());
          const DictSymbol* sym = nullptr;
          for (const auto& s : tp_.dict_symbols)
            if (s.ctor == &e) sym = &s;
          if (sym) impl = symbol_impl(sym->name, e);
          double total = g.calls * g.cond * static_cast<double>(m);
          double ms = model_->delta(impl, "insert", false, total,
                                    static_cast<double>(m));
          charge_delta(sym ? sym->name : "(inline)", ms);
        }
        return;
      }
      case Expr::Kind::ForLoop: {
        visit(*e.a, g);
        auto d = dict_info(*e.a);
        if (!d)
          throw DataError("cannot estimate the iteration count of the loop at "
                          "line " + std::to_string(e.loc.line));
        double iters =
            d->owner == "(inline)" ? d->card : require_card(*d, e);
        Ctx gb = g;
        gb.calls *= iters;
        add_scalar(opt_.scalar.iter_step_ns, gb);
        Binding b;
        b.kind = Binding::Kind::Entry;
        b.dict = *d;
        const LType& t = tp_.type_of(*e.a);
        b.dict_type = &t;
        env_.emplace_back(e.name, b);
        loop_vars_.push_back(e.name);
        loop_ordered_.push_back(DictRegistry::instance().is_ordered(d->impl));
        visit(*e.b, gb);
        loop_ordered_.pop_back();
        loop_vars_.pop_back();
        env_.pop_back();
        return;
      }
      case Expr::Kind::DictUpdate:
      case Expr::Kind::HintedUpdate: {
        bool hinted = e.kind == Expr::Kind::HintedUpdate;
        if (e.a->kind != Expr::Kind::Var) visit(*e.a, g);
        auto d = dict_info(*e.a);
        visit(*e.b, g);
        visit(*e.c, g);
        if (!d)
          throw DataError("cannot locate the dictionary updated at line " +
                          std::to_string(e.loc.line));
        cost_update(e, *d, *e.b, *e.c, hinted, g);
        return;
      }
      case Expr::Kind::DictLookup:
      case Expr::Kind::HintedLookup: {
        bool hinted = e.kind == Expr::Kind::HintedLookup;
        if (e.a->kind != Expr::Kind::Var) visit(*e.a, g);
        auto d = dict_info(*e.a);
        visit(*e.b, g);
        if (!d)
          throw DataError("cannot locate the dictionary probed at line " +
                          std::to_string(e.loc.line));
        cost_lookup(e, *d, *e.b, hinted, g);
        return;
      }
      case Expr::Kind::DictIter:
        add_scalar(opt_.scalar.node_ns, g);
        return;
    }
  }
};

}  // namespace

ScalarCosts ScalarCosts::calibrated() {
  // Time a plain accumulation loop and spread the per-iteration cost over
  // its expression nodes.
  const char* src =
      "input R : {{ k: int -> int }}\n"
      "let acc = ref(int) in\n"
      "for (r <- R) { acc += r.key * r.val } ;\n"
      "acc\n";
  Program p = parse_program(src);
  TypedProgram tp = infer_types(p);
  const size_t n = 1 << 17;
  auto h = make_handle(default_sorted_impl(), p.inputs[0].type);
  std::string key;
  for (size_t i = 0; i < n; ++i) {
    key.clear();
    encode_int_key(static_cast<int64_t>(i), key);
    h->impl->emplace(key, Value::of(int64_t{1}));
  }
  Database db;
  db.inputs.emplace("R", Value::of(h));
  run_program(tp, db);  // warm up
  RunResult r = run_program(tp, db);
  double per_iter_ns = r.wall_ms * 1e6 / static_cast<double>(n);
  // Roughly six interpreted nodes per iteration in the loop body.
  double node = per_iter_ns / 6.0;
  ScalarCosts base;
  double scale = node / base.node_ns;
  ScalarCosts out;
  out.node_ns = base.node_ns * scale;
  out.record_field_ns = base.record_field_ns * scale;
  out.key_encode_ns = base.key_encode_ns * scale;
  out.iter_step_ns = base.iter_step_ns * scale;
  return out;
}

CostBreakdown infer_cost(const TypedProgram& tp, const Catalog& cat,
                         const CostModel* model, const CostOptions& opt) {
  if (!model && !opt.symbolic)
    throw UsageError("cost inference needs a trained model (or symbolic mode)");
  CostWalk w(tp, cat, model, opt);
  return w.run();
}

}  // namespace llql
