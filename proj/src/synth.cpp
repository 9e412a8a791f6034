#include "llql/synth.hpp"

#include <algorithm>
#include <limits>

#include "llql/error.hpp"
#include "llql/registry.hpp"

namespace llql {

namespace {

// Walks the body collecting, for every update site, the symbols it reads:
// dictionaries probed or iterated in the key/value expressions and the
// sources of enclosing loops.
class DepScan {
 public:
  explicit DepScan(const TypedProgram& tp) : tp_(tp) {
    for (const DictSymbol& s : tp.dict_symbols) symbols_.insert(s.name);
  }

  std::vector<DepEdge> run() {
    walk(*tp_.program.body);
    return std::move(edges_);
  }

 private:
  const TypedProgram& tp_;
  std::set<std::string> symbols_;
  std::vector<std::string> loop_sources_;  // symbol names, innermost last
  std::set<std::pair<std::string, std::string>> seen_;
  std::vector<DepEdge> edges_;
  std::vector<std::string> shadowed_;

  // The dictionary symbol an expression's dictionary position resolves to.
  std::string base_symbol(const Expr& e) const {
    const Expr* cur = &e;
    while (true) {
      switch (cur->kind) {
        case Expr::Kind::Var:
          if (symbols_.count(cur->name) &&
              std::find(shadowed_.begin(), shadowed_.end(), cur->name) ==
                  shadowed_.end())
            return cur->name;
          return {};
        case Expr::Kind::DictLookup:
        case Expr::Kind::HintedLookup:
        case Expr::Kind::FieldAccess:
        case Expr::Kind::DictIter:
          cur = cur->a.get();
          continue;
        default:
          return {};
      }
    }
  }

  void add_edge(const std::string& from, const std::string& to) {
    if (from.empty() || from == to) return;
    if (seen_.insert({from, to}).second) edges_.push_back({from, to});
  }

  // Symbols read anywhere inside an expression.
  void collect_reads(const Expr& e, std::set<std::string>& out) const {
    switch (e.kind) {
      case Expr::Kind::Var:
        if (symbols_.count(e.name)) out.insert(e.name);
        return;
      default:
        break;
    }
    if (e.a) collect_reads(*e.a, out);
    if (e.b) collect_reads(*e.b, out);
    if (e.c) collect_reads(*e.c, out);
    for (const auto& [_, f] : e.rec_fields) collect_reads(*f, out);
    for (const auto& [k, v] : e.dict_items) {
      collect_reads(*k, out);
      collect_reads(*v, out);
    }
  }

  void walk(const Expr& e) {
    switch (e.kind) {
      case Expr::Kind::Let: {
        walk(*e.a);
        bool shadows = symbols_.count(e.name) > 0 &&
                       tp_.symbol(e.name)->ctor != e.a.get();
        if (shadows) shadowed_.push_back(e.name);
        walk(*e.b);
        if (shadows) shadowed_.pop_back();
        return;
      }
      case Expr::Kind::ForLoop: {
        walk(*e.a);
        loop_sources_.push_back(base_symbol(*e.a));
        walk(*e.b);
        loop_sources_.pop_back();
        return;
      }
      case Expr::Kind::DictUpdate:
      case Expr::Kind::HintedUpdate: {
        std::string target = base_symbol(*e.a);
        if (!target.empty()) {
          std::set<std::string> reads;
          collect_reads(*e.b, reads);
          collect_reads(*e.c, reads);
          for (const std::string& s : loop_sources_) reads.insert(s);
          reads.erase("");
          for (const std::string& s : reads) add_edge(s, target);
        }
        walk(*e.b);
        walk(*e.c);
        return;
      }
      default:
        if (e.a) walk(*e.a);
        if (e.b) walk(*e.b);
        if (e.c) walk(*e.c);
        for (const auto& [_, f] : e.rec_fields) walk(*f);
        for (const auto& [k, v] : e.dict_items) {
          walk(*k);
          walk(*v);
        }
    }
  }
};

void scan_hinted(const Expr& e, const std::set<std::string>& symbols,
                 std::set<std::string>& out) {
  if (e.kind == Expr::Kind::HintedLookup || e.kind == Expr::Kind::HintedUpdate) {
    if (e.a->kind == Expr::Kind::Var && symbols.count(e.a->name))
      out.insert(e.a->name);
  }
  if (e.a) scan_hinted(*e.a, symbols, out);
  if (e.b) scan_hinted(*e.b, symbols, out);
  if (e.c) scan_hinted(*e.c, symbols, out);
  for (const auto& [_, f] : e.rec_fields) scan_hinted(*f, symbols, out);
  for (const auto& [k, v] : e.dict_items) {
    scan_hinted(*k, symbols, out);
    scan_hinted(*v, symbols, out);
  }
}

ExprPtr rewrite_anns(const ExprPtr& e,
                     const std::map<const Expr*, std::string>& new_impls) {
  if (!e) return nullptr;
  Expr copy = *e;
  copy.a = rewrite_anns(e->a, new_impls);
  copy.b = rewrite_anns(e->b, new_impls);
  copy.c = rewrite_anns(e->c, new_impls);
  for (auto& [_, f] : copy.rec_fields) f = rewrite_anns(f, new_impls);
  for (auto& [k, v] : copy.dict_items) {
    k = rewrite_anns(k, new_impls);
    v = rewrite_anns(v, new_impls);
  }
  if (auto it = new_impls.find(e.get()); it != new_impls.end())
    copy.ann = DictAnnotation::resolved(it->second);
  return std::make_shared<const Expr>(std::move(copy));
}

}  // namespace

std::vector<DepEdge> dependency_graph(const TypedProgram& tp) {
  return DepScan(tp).run();
}

std::vector<std::string> topo_order(const TypedProgram& tp) {
  std::vector<std::string> names;
  for (const DictSymbol& s : tp.dict_symbols) names.push_back(s.name);
  std::map<std::string, size_t> indeg;
  std::map<std::string, std::vector<std::string>> succ;
  for (const std::string& n : names) indeg[n] = 0;
  for (const DepEdge& e : dependency_graph(tp)) {
    succ[e.from].push_back(e.to);
    ++indeg[e.to];
  }
  std::vector<std::string> out;
  std::vector<bool> done(names.size(), false);
  while (out.size() < names.size()) {
    size_t pick = names.size();
    for (size_t i = 0; i < names.size(); ++i)
      if (!done[i] && indeg[names[i]] == 0) {
        pick = i;
        break;
      }
    // A cycle leaves no zero-indegree symbol: fall back to textual order.
    if (pick == names.size())
      for (size_t i = 0; i < names.size(); ++i)
        if (!done[i]) {
          pick = i;
          break;
        }
    done[pick] = true;
    out.push_back(names[pick]);
    for (const std::string& s : succ[names[pick]])
      if (indeg[s] > 0) --indeg[s];
  }
  return out;
}

std::set<std::string> hinted_symbols(const TypedProgram& tp) {
  std::set<std::string> symbols, out;
  for (const DictSymbol& s : tp.dict_symbols) symbols.insert(s.name);
  scan_hinted(*tp.program.body, symbols, out);
  return out;
}

nlohmann::json SynthReport::to_json() const {
  nlohmann::json symbols = nlohmann::json::object();
  for (const std::string& name : order) {
    nlohmann::json cj = nlohmann::json::object();
    auto it = candidate_ms.find(name);
    if (it != candidate_ms.end())
      for (const auto& [impl, ms] : it->second) cj[impl] = ms;
    symbols[name] = {{"chosen", chosen.at(name)}, {"estimated_ms", cj}};
  }
  return {{"order", order}, {"symbols", symbols}, {"final_ms", final_ms}};
}

SynthResult synthesize(const TypedProgram& tp, const Catalog& cat,
                       const CostModel& model,
                       const std::vector<std::string>& impls, bool refine,
                       CostOptions base) {
  if (impls.empty()) throw UsageError("no candidate implementations");
  auto& reg = DictRegistry::instance();
  for (const std::string& i : impls)
    if (!reg.contains(i))
      throw UsageError("unknown dictionary implementation '" + i + "'");

  std::set<std::string> hinted = hinted_symbols(tp);
  auto candidates = [&](const std::string& sym) {
    std::vector<std::string> cs;
    for (const std::string& i : impls)
      if (!hinted.count(sym) || reg.is_ordered(i)) cs.push_back(i);
    if (cs.empty())
      throw UsageError("symbol '" + sym +
                       "' needs an ordered implementation (hinted access), "
                       "but none is among the candidates");
    return cs;
  };

  // Tuning holes: unresolved constructors only, visited in dependency order.
  std::vector<std::string> holes;
  for (const std::string& name : topo_order(tp)) {
    const DictSymbol* s = tp.symbol(name);
    if (s->ctor->ann.kind == DictAnnotation::Kind::Unresolved)
      holes.push_back(name);
  }

  SynthResult res;
  res.report.order = holes;
  CostOptions opt = base;
  for (const std::string& h : holes) opt.assignment[h] = candidates(h).front();

  auto sweep = [&](bool record) {
    for (const std::string& sym : holes) {
      double best = std::numeric_limits<double>::infinity();
      std::string best_impl;
      for (const std::string& cand : candidates(sym)) {
        opt.assignment[sym] = cand;
        double ms = infer_cost(tp, cat, &model, opt).total_ms;
        if (record) res.report.candidate_ms[sym][cand] = ms;
        if (ms < best) {
          best = ms;
          best_impl = cand;
        }
      }
      opt.assignment[sym] = best_impl;
    }
  };
  sweep(true);
  if (refine) sweep(true);

  for (const std::string& h : holes) {
    res.assignment[h] = opt.assignment[h];
    res.report.chosen[h] = opt.assignment[h];
  }
  res.report.final_ms = infer_cost(tp, cat, &model, opt).total_ms;
  res.tuned = choose_dict_ds(tp, res.assignment);
  return res;
}

std::map<std::string, std::string> exhaustive_assignment(
    const TypedProgram& tp, const Catalog& cat, const CostModel& model,
    const std::vector<std::string>& impls, CostOptions base, double* best_ms) {
  if (impls.empty()) throw UsageError("no candidate implementations");
  std::set<std::string> hinted = hinted_symbols(tp);
  auto& reg = DictRegistry::instance();
  std::vector<std::string> holes;
  for (const DictSymbol& s : tp.dict_symbols)
    if (s.ctor->ann.kind == DictAnnotation::Kind::Unresolved)
      holes.push_back(s.name);
  std::vector<std::vector<std::string>> cands;
  for (const std::string& h : holes) {
    std::vector<std::string> cs;
    for (const std::string& i : impls)
      if (!hinted.count(h) || reg.is_ordered(i)) cs.push_back(i);
    if (cs.empty())
      throw UsageError("symbol '" + h + "' has no viable candidate");
    cands.push_back(cs);
  }

  CostOptions opt = base;
  std::map<std::string, std::string> best_assign;
  double best = std::numeric_limits<double>::infinity();
  std::vector<size_t> idx(holes.size(), 0);
  while (true) {
    for (size_t i = 0; i < holes.size(); ++i)
      opt.assignment[holes[i]] = cands[i][idx[i]];
    double ms = infer_cost(tp, cat, &model, opt).total_ms;
    if (ms < best) {
      best = ms;
      best_assign.clear();
      for (const std::string& h : holes) best_assign[h] = opt.assignment[h];
    }
    // Odometer step, last hole fastest.
    bool wrapped = holes.empty();
    size_t j = holes.size();
    while (j > 0) {
      --j;
      if (++idx[j] < cands[j].size()) break;
      idx[j] = 0;
      if (j == 0) wrapped = true;
    }
    if (wrapped) break;
  }
  if (best_ms) *best_ms = best;
  return best_assign;
}

Program choose_dict_ds(const TypedProgram& tp,
                       const std::map<std::string, std::string>& assignment) {
  auto& reg = DictRegistry::instance();
  std::map<const Expr*, std::string> sites;
  for (const auto& [name, impl] : assignment) {
    const DictSymbol* s = tp.symbol(name);
    if (!s) throw UsageError("assignment names unknown symbol '" + name + "'");
    if (!reg.contains(impl))
      throw UsageError("unknown dictionary implementation '" + impl + "'");
    sites[s->ctor] = impl;
  }
  Program out;
  out.inputs = tp.program.inputs;
  out.semiring = tp.program.semiring;
  out.body = rewrite_anns(tp.program.body, sites);
  return out;
}

}  // namespace llql
