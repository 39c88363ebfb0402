#include "veriscope/reduce.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <set>

#include "veriscope/errors.hpp"
#include "veriscope/provenance.hpp"

namespace veriscope {

std::string to_string(BaselineKind k) {
  switch (k) {
    case BaselineKind::Random: return "random";
    case BaselineKind::FormulaCount: return "formula-count";
    case BaselineKind::OccurrencesCount: return "occurrences-count";
    default: return "prob-greedy";
  }
}

std::string to_string(Termination t) {
  switch (t) {
    case Termination::Budget: return "budget";
    case Termination::Threshold: return "threshold";
    default: return "no-progress";
  }
}

namespace {

int largest_affordable_odd(long remaining, int cap) {
  long n = std::min<long>(remaining, cap);
  if (n < 1) return 0;
  if (n % 2 == 0) --n;
  return static_cast<int>(n);
}

struct VoteOutcome {
  Tri label;
  double err;
  long cost;
};

std::optional<VoteOutcome> cast_votes(TupleId t, double target_p,
                                      const Budget& budget, const World& truth,
                                      const VerifierModel& model, Rng& rng) {
  if (model.kind == VerifierModel::Kind::FixedOracle) {
    if (budget.remaining() < 1) return std::nullopt;
    bool wrong = model.oracle_error > 0.0 && rng.bernoulli(model.oracle_error);
    return VoteOutcome{tri_of(truth(t) != wrong), model.oracle_error, 1};
  }
  int want;
  try {
    want = votes_needed(model.worker_error, target_p, model.vote_cap);
  } catch (const PreconditionError&) {
    want = largest_affordable_odd(model.vote_cap, model.vote_cap);
  }
  int n = want;
  if (budget.remaining() < n)
    n = largest_affordable_odd(budget.remaining(), model.vote_cap);
  if (n < 1) return std::nullopt;
  int votes_for_truth = 0;
  for (int i = 0; i < n; ++i)
    if (!rng.bernoulli(model.worker_error)) ++votes_for_truth;
  bool majority_truth = votes_for_truth > n - votes_for_truth;
  bool label = majority_truth ? truth(t) : !truth(t);
  return VoteOutcome{tri_of(label), majority_error(n, model.worker_error), n};
}

std::vector<Tri> derived_snapshot(const std::vector<AnnotatedOutput>& outputs) {
  std::vector<Tri> derived;
  derived.reserve(outputs.size());
  for (const auto& o : outputs) derived.push_back(o.derived);
  return derived;
}

// Incrementally maintained per-output MES; absent while the label is unknown.
struct MesCache {
  std::vector<std::optional<LogProb>> values;

  void recompute(const AnnotatedDes& des,
                 const std::vector<AnnotatedOutput>& outputs, size_t i) {
    if (is_known(outputs[i].derived))
      values[i] = mes(des, outputs[i]).log_value;
    else
      values[i] = std::nullopt;
  }

  void recompute_all(const AnnotatedDes& des,
                     const std::vector<AnnotatedOutput>& outputs) {
    values.assign(outputs.size(), std::nullopt);
    for (size_t i = 0; i < outputs.size(); ++i) recompute(des, outputs, i);
  }

  void recompute_affected(const AnnotatedDes& des,
                          const std::vector<AnnotatedOutput>& outputs,
                          const std::vector<TupleId>& changed) {
    if (changed.empty()) return;
    std::set<TupleId> touched(changed.begin(), changed.end());
    for (size_t i = 0; i < outputs.size(); ++i) {
      bool affected = false;
      for (VarId v : vars(outputs[i].prov)) {
        if (touched.count(v)) {
          affected = true;
          break;
        }
      }
      if (affected) recompute(des, outputs, i);
    }
  }

  LogProb max_known() const {
    LogProb best = LogProb::zero();
    for (const auto& v : values)
      if (v && *v > best) best = *v;
    return best;
  }

  bool any_unknown() const {
    for (const auto& v : values)
      if (!v) return true;
    return false;
  }
};

void refresh_affected_derived(const AnnotatedDes& des,
                              std::vector<AnnotatedOutput>& outputs,
                              const std::vector<TupleId>& changed) {
  if (changed.empty()) return;
  std::set<TupleId> touched(changed.begin(), changed.end());
  std::vector<Tri> labels(static_cast<size_t>(des.tuple_count()));
  for (TupleId t = 0; t < des.tuple_count(); ++t)
    labels[static_cast<size_t>(t)] = des.label(t);
  for (auto& o : outputs) {
    for (VarId v : vars(o.prov)) {
      if (touched.count(v)) {
        o.derived = eval_k3(o.prov, labels);
        break;
      }
    }
  }
}

}  // namespace

long improve_verification(AnnotatedDes& des, std::vector<TupleId> tuples,
                          double target_p, Budget& budget, const World& truth,
                          const VerifierModel& model, Rng& rng,
                          std::vector<TupleId>* changed) {
  std::sort(tuples.begin(), tuples.end());
  tuples.erase(std::unique(tuples.begin(), tuples.end()), tuples.end());
  long total = 0;
  for (TupleId t : tuples) {
    auto outcome = cast_votes(t, target_p, budget, truth, model, rng);
    if (!outcome) continue;  // nothing affordable: silent skip
    budget.spent += outcome->cost;
    total += outcome->cost;
    bool same = des.labeled(t) && des.label(t) == outcome->label &&
                *des.err(t) == outcome->err;
    if (!same) {
      des.set_verification(t, outcome->label, outcome->err);
      if (changed) changed->push_back(t);
    }
  }
  return total;
}

long re_verify(AnnotatedDes& des, std::vector<AnnotatedOutput>& outputs,
               Budget& budget, double target_p, const World& truth,
               const VerifierModel& model, Rng& rng,
               std::vector<TupleId>* changed) {
  long total = 0;
  std::vector<TupleId> local;
  for (auto& o : outputs) {
    if (is_known(o.derived)) continue;
    std::vector<TupleId> unlabeled;
    for (VarId v : vars(o.prov))
      if (!des.labeled(v)) unlabeled.push_back(v);
    total += improve_verification(des, std::move(unlabeled), target_p, budget,
                                  truth, model, rng, &local);
    refresh_affected_derived(des, outputs, local);
    if (changed) changed->insert(changed->end(), local.begin(), local.end());
    local.clear();
    if (budget.remaining() <= 0) break;
  }
  return total;
}

std::vector<TupleId> find_improvement_set(const AnnotatedDes& des,
                                          const AnnotatedOutput& output,
                                          const RiskyLimits& limits) {
  if (!is_known(output.derived))
    throw PreconditionError("improvement sets need a known output label");

  // (a) cheapest safe tuple with positive err, if any.
  std::vector<RiskReport> reports = classify_tuples(des, output, limits);
  for (const auto& r : reports) {
    if (r.cls == RiskClass::Safe) return {r.tuple};
  }

  if (output.derived == Tri::True) {
    // (b) cheapest satisfied term: all members labeled 1. Uniform per-tuple
    // cost makes "cheapest" the smallest member count, ties lexicographic.
    const std::vector<VarId>* best = nullptr;
    for (const auto& term : output.prov.groups()) {
      bool satisfied = true;
      for (VarId v : term)
        if (!(des.labeled(v) && des.label(v) == Tri::True)) {
          satisfied = false;
          break;
        }
      if (!satisfied) continue;
      if (!best || term.size() < best->size() ||
          (term.size() == best->size() && term < *best))
        best = &term;
    }
    if (!best) return {};
    return *best;
  }

  // (c) greedy hitting set over, per term, the variables not labeled 1
  // (unlabeled variables are eligible).
  std::vector<std::set<VarId>> remaining;
  for (const auto& term : output.prov.groups()) {
    std::set<VarId> cands;
    for (VarId v : term)
      if (des.label(v) != Tri::True) cands.insert(v);
    if (!cands.empty()) remaining.push_back(std::move(cands));
  }
  std::vector<TupleId> hit;
  while (!remaining.empty()) {
    std::map<VarId, int> coverage;
    for (const auto& s : remaining)
      for (VarId v : s) coverage[v]++;
    VarId pick = -1;
    int best_cover = 0;
    for (const auto& [v, c] : coverage) {
      if (c > best_cover) {  // map order gives ascending-id tie-breaking
        best_cover = c;
        pick = v;
      }
    }
    hit.push_back(pick);
    std::vector<std::set<VarId>> next;
    for (auto& s : remaining)
      if (!s.count(pick)) next.push_back(std::move(s));
    remaining = std::move(next);
  }
  std::sort(hit.begin(), hit.end());
  return hit;
}

double next_probability(const AnnotatedDes& des, const AnnotatedOutput& output,
                        const std::vector<TupleId>& set, const Budget& budget,
                        double theta, const VerifierModel& model) {
  if (set.empty())
    throw PreconditionError("next_probability needs a nonempty set");
  double q = 0.0;
  bool have_q = false;
  for (TupleId t : rel_tuples(des, output)) {
    auto e = des.err(t);
    if (e && *e > 0.0 && (!have_q || *e < q)) {
      q = *e;
      have_q = true;
    }
  }
  double raw = theta;
  if (have_q) {
    double n = std::ceil(1.0 / q);
    raw = std::max(1.0 / (n + 1.0), theta);
  }
  return std::max(raw, reachable_floor(model, budget.remaining()));
}

namespace {

struct LoopState {
  AnnotatedDes des;
  std::vector<AnnotatedOutput> outputs;
  Budget budget;
  MesCache cache;
  ReductionTrace trace;

  void record(long cost_cumulative, std::vector<TupleId> changed) {
    trace.steps.push_back(TraceStep{cost_cumulative, std::move(changed),
                                    cache.max_known(),
                                    derived_snapshot(outputs)});
  }
};

}  // namespace

ReductionTrace mes_reduce(AnnotatedDes des, std::vector<AnnotatedOutput> outputs,
                          Budget budget, const ReduceConfig& config,
                          const World& truth, const VerifierModel& model,
                          uint64_t seed, AnnotatedDes* final_des,
                          const StepObserver* observer) {
  model.validate();
  if (config.top_k < 1 || config.mu < 1)
    throw ConfigError("top_k and mu must be >= 1");
  Rng rng(derive_seed(seed, {1}));

  LoopState st{std::move(des), std::move(outputs), budget, {}, {}};
  refresh_derived_labels(st.des, st.outputs);
  st.cache.recompute_all(st.des, st.outputs);
  st.record(st.budget.spent, {});

  Termination why = Termination::Budget;
  while (true) {
    if (st.budget.remaining() <= 0) {
      why = Termination::Budget;
      break;
    }
    bool unknown = st.cache.any_unknown();
    if (!unknown && !(st.cache.max_known().linear() > config.theta)) {
      why = Termination::Threshold;
      break;
    }

    long cost = 0;
    std::vector<TupleId> changed;
    if (unknown) {
      cost += re_verify(st.des, st.outputs, st.budget, config.reverify_target,
                        truth, model, rng, &changed);
      st.cache.recompute_affected(st.des, st.outputs, changed);
      // The cache misses outputs whose labels just became known without any
      // of their own variables changing state; refresh those too.
      for (size_t i = 0; i < st.outputs.size(); ++i)
        if (!st.cache.values[i] && is_known(st.outputs[i].derived))
          st.cache.recompute(st.des, st.outputs, i);
      if (!st.cache.any_unknown() &&
          !(st.cache.max_known().linear() > config.theta)) {
        st.record(st.budget.spent, std::move(changed));
        if (observer) (*observer)(st.des, st.outputs, st.cache.values);
        why = Termination::Threshold;
        break;
      }
    }

    // Rank known-labeled outputs by MES.
    std::vector<size_t> order;
    for (size_t i = 0; i < st.outputs.size(); ++i)
      if (st.cache.values[i]) order.push_back(i);
    std::sort(order.begin(), order.end(), [&](size_t a, size_t b) {
      double la = st.cache.values[a]->log();
      double lb = st.cache.values[b]->log();
      if (la != lb) return la > lb;
      return a < b;
    });
    if (order.empty()) {
      st.record(st.budget.spent, std::move(changed));
      if (observer) (*observer)(st.des, st.outputs, st.cache.values);
      why = st.budget.remaining() <= 0 ? Termination::Budget
                                       : Termination::NoProgress;
      break;
    }

    std::vector<size_t> selected(
        order.begin(),
        order.begin() + std::min<size_t>(order.size(),
                                         static_cast<size_t>(config.top_k)));
    double top_log = st.cache.values[order[0]]->log();
    int ties = 0;
    for (size_t i : order) {
      if (ties >= config.mu) break;
      double l = st.cache.values[i]->log();
      bool tied = (st.cache.values[i]->is_zero() &&
                   st.cache.values[order[0]]->is_zero()) ||
                  std::fabs(l - top_log) <= kMesLogTol;
      if (!tied) break;
      if (std::find(selected.begin(), selected.end(), i) == selected.end())
        selected.push_back(i);
      ++ties;
    }

    std::set<TupleId> improvement;
    double target = 1.0;
    bool have_target = false;
    for (size_t i : selected) {
      auto set_i =
          find_improvement_set(st.des, st.outputs[i], config.risky_limits);
      if (set_i.empty()) continue;
      improvement.insert(set_i.begin(), set_i.end());
      double p = next_probability(st.des, st.outputs[i], set_i, st.budget,
                                  config.theta, model);
      if (!have_target || p < target) {
        target = p;
        have_target = true;
      }
    }
    if (!have_target) {
      st.record(st.budget.spent, std::move(changed));
      if (observer) (*observer)(st.des, st.outputs, st.cache.values);
      why = Termination::NoProgress;
      break;
    }

    cost += improve_verification(
        st.des, std::vector<TupleId>(improvement.begin(), improvement.end()),
        target, st.budget, truth, model, rng, &changed);
    refresh_affected_derived(st.des, st.outputs, changed);
    st.cache.recompute_affected(st.des, st.outputs, changed);
    for (size_t i = 0; i < st.outputs.size(); ++i) {
      bool known = is_known(st.outputs[i].derived);
      if (known != st.cache.values[i].has_value())
        st.cache.recompute(st.des, st.outputs, i);
    }

    st.record(st.budget.spent, changed);
    if (observer) (*observer)(st.des, st.outputs, st.cache.values);
    if (cost == 0 && changed.empty()) {
      why = Termination::NoProgress;
      break;
    }
  }

  st.trace.termination = why;
  if (final_des) *final_des = std::move(st.des);
  return st.trace;
}

ReductionTrace run_baseline(BaselineKind kind, double target_p,
                            AnnotatedDes des,
                            std::vector<AnnotatedOutput> outputs, Budget budget,
                            const World& truth, const VerifierModel& model,
                            uint64_t seed, AnnotatedDes* final_des) {
  model.validate();
  if (!(target_p > 0.0 && target_p < 0.5))
    throw ConfigError("baseline target probability must lie in (0, 0.5)");
  Rng rng(derive_seed(seed, {2}));

  // Candidate pool: every tuple occurring in the outputs' provenance.
  std::set<TupleId> pool_set;
  std::map<TupleId, int> formula_count;
  std::map<TupleId, int> occurrence_count;
  for (const auto& o : outputs) {
    for (VarId v : vars(o.prov)) {
      pool_set.insert(v);
      formula_count[v]++;
    }
    for (const auto& term : o.prov.groups())
      for (VarId v : term) occurrence_count[v]++;
  }
  std::vector<TupleId> pool(pool_set.begin(), pool_set.end());

  std::vector<TupleId> ranking = pool;
  auto rank_by = [&](auto key) {
    std::stable_sort(ranking.begin(), ranking.end(),
                     [&](TupleId a, TupleId b) {
                       auto ka = key(a), kb = key(b);
                       if (ka != kb) return ka > kb;
                       return a < b;
                     });
  };
  switch (kind) {
    case BaselineKind::FormulaCount:
      rank_by([&](TupleId t) { return double(formula_count[t]); });
      break;
    case BaselineKind::OccurrencesCount:
      rank_by([&](TupleId t) { return double(occurrence_count[t]); });
      break;
    case BaselineKind::ProbGreedy:
      // Unlabeled tuples rank as maximally uncertain (0.5).
      rank_by([&](TupleId t) {
        auto e = des.err(t);
        return e ? *e : 0.5;
      });
      break;
    default:
      break;
  }

  LoopState st{std::move(des), std::move(outputs), budget, {}, {}};
  refresh_derived_labels(st.des, st.outputs);
  st.cache.recompute_all(st.des, st.outputs);
  st.record(st.budget.spent, {});

  Termination why = pool.empty() ? Termination::NoProgress : Termination::Budget;
  size_t pos = 0;
  while (!pool.empty()) {
    if (st.budget.remaining() <= 0) {
      why = Termination::Budget;
      break;
    }
    TupleId t;
    if (kind == BaselineKind::Random) {
      t = pool[static_cast<size_t>(rng.below(pool.size()))];
    } else {
      t = ranking[pos % ranking.size()];
      ++pos;
    }
    std::vector<TupleId> changed;
    long cost = improve_verification(st.des, {t}, target_p, st.budget, truth,
                                     model, rng, &changed);
    refresh_affected_derived(st.des, st.outputs, changed);
    st.cache.recompute_affected(st.des, st.outputs, changed);
    for (size_t i = 0; i < st.outputs.size(); ++i) {
      bool known = is_known(st.outputs[i].derived);
      if (known != st.cache.values[i].has_value())
        st.cache.recompute(st.des, st.outputs, i);
    }
    st.record(st.budget.spent, changed);
    if (cost == 0 && changed.empty()) {
      why = Termination::NoProgress;
      break;
    }
  }

  st.trace.termination = why;
  if (final_des) *final_des = std::move(st.des);
  return st.trace;
}

}  // namespace veriscope
