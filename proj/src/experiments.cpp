#include "veriscope/experiments.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <limits>
#include <map>
#include <thread>

#include "veriscope/errors.hpp"
#include "veriscope/provenance.hpp"

namespace veriscope {

std::string to_string(ScenarioKind k) {
  switch (k) {
    case ScenarioKind::Wcs: return "wcs";
    case ScenarioKind::Avg: return "avg";
    default: return "rlbl";
  }
}

ScenarioKind scenario_from_string(const std::string& s) {
  if (s == "wcs") return ScenarioKind::Wcs;
  if (s == "avg") return ScenarioKind::Avg;
  if (s == "rlbl") return ScenarioKind::Rlbl;
  throw ConfigError("unknown scenario '" + s + "'");
}

Scenario gen_scenario(ScenarioKind kind, const AnnotatedDes& base,
                      uint64_t seed, const World* rlbl_truth) {
  Scenario s;
  s.kind = kind;
  s.seed = seed;
  TupleId n = base.tuple_count();
  if (kind == ScenarioKind::Rlbl) {
    if (!rlbl_truth)
      throw ConfigError("the RLBL scenario needs a ground-truth file");
    if (rlbl_truth->size() != n)
      throw ConfigError("ground truth does not cover the database");
    s.truth = *rlbl_truth;
    s.des = base;
    return s;
  }
  Rng rng(derive_seed(seed, {static_cast<uint64_t>(kind), 3}));
  std::map<TupleId, Tri> labels;
  std::map<TupleId, double> errs;
  World truth = World::constant(n, true);
  if (kind == ScenarioKind::Wcs) {
    for (TupleId t = 0; t < n; ++t) {
      labels[t] = Tri::False;
      errs[t] = 0.499;
    }
  } else {  // Avg
    for (TupleId t = 0; t < n; ++t) {
      bool truth_bit = rng.bernoulli(0.5);
      truth.set(t, truth_bit);
      double e = rng.uniform(0.2, 0.499);
      bool flipped = rng.bernoulli(e);
      labels[t] = tri_of(flipped ? !truth_bit : truth_bit);
      errs[t] = e;
    }
  }
  s.truth = std::move(truth);
  s.des = build_annotated_des(base.db_ptr(), labels, errs);
  return s;
}

F1Stats f1_score(std::span<const Tri> derived,
                 std::span<const AnnotatedOutput> outputs, const World& truth) {
  long tp = 0, fp = 0, fn = 0;
  for (size_t i = 0; i < outputs.size(); ++i) {
    bool prediction = derived[i] == Tri::True;  // unknown maps to 0
    bool actual = eval_bool(outputs[i].prov, truth);
    if (prediction && actual) ++tp;
    if (prediction && !actual) ++fp;
    if (!prediction && actual) ++fn;
  }
  F1Stats f;
  f.precision = (tp + fp) == 0 ? 1.0 : double(tp) / double(tp + fp);
  f.recall = (tp + fn) == 0 ? 1.0 : double(tp) / double(tp + fn);
  f.f1 = (f.precision + f.recall) == 0.0
             ? 0.0
             : 2.0 * f.precision * f.recall / (f.precision + f.recall);
  return f;
}

F1Stats f1_of_outputs(const AnnotatedDes& des,
                      std::span<const AnnotatedOutput> outputs,
                      const World& truth) {
  std::vector<Tri> derived;
  derived.reserve(outputs.size());
  std::vector<Tri> labels(static_cast<size_t>(des.tuple_count()));
  for (TupleId t = 0; t < des.tuple_count(); ++t)
    labels[static_cast<size_t>(t)] = des.label(t);
  for (const auto& o : outputs) derived.push_back(eval_k3(o.prov, labels));
  return f1_score(derived, outputs, truth);
}

double f1_auc(const ReductionTrace& trace,
              std::span<const AnnotatedOutput> outputs, const World& truth,
              long budget) {
  if (trace.steps.empty())
    throw PreconditionError("f1_auc needs at least one trace step");
  double area = 0.0;
  for (size_t i = 0; i < trace.steps.size(); ++i) {
    long from = trace.steps[i].cost;
    long to = i + 1 < trace.steps.size() ? trace.steps[i + 1].cost : budget;
    from = std::min(from, budget);
    to = std::min(to, budget);
    if (to <= from) continue;
    double f1 = f1_score(trace.steps[i].derived, outputs, truth).f1;
    area += f1 * double(to - from);
  }
  return area;
}

std::optional<double> mes_log_ratio(const ReductionTrace& trace) {
  if (trace.steps.empty())
    throw PreconditionError("mes_log_ratio needs at least one trace step");
  LogProb initial = trace.steps.front().max_mes;
  LogProb final_mes = trace.steps.back().max_mes;
  if (initial.is_zero() || initial.log() >= 0.0) return std::nullopt;
  if (final_mes.is_zero()) return std::numeric_limits<double>::infinity();
  return final_mes.log() / initial.log();
}

std::string StrategySpec::name() const {
  if (mesreduce) return "mesreduce";
  char buf[48];
  std::snprintf(buf, sizeof(buf), "%s(p=%g)", to_string(kind).c_str(),
                target_p);
  return buf;
}

std::vector<ComparisonRow> run_comparison(
    const AnnotatedDes& base, const std::vector<AnnotatedOutput>& outputs,
    const std::vector<ScenarioKind>& scenarios,
    const std::vector<StrategySpec>& strategies, Budget budget, int repeats,
    uint64_t seed, const ReduceConfig& config, const VerifierModel& model,
    int jobs, const World* rlbl_truth) {
  if (repeats < 1) throw ConfigError("repeats must be >= 1");
  std::vector<ComparisonRow> rows;
  for (ScenarioKind sc : scenarios) {
    for (const auto& strat : strategies) {
      ComparisonRow row;
      row.strategy = strat.name();
      row.scenario = sc;
      row.runs.resize(static_cast<size_t>(repeats));
      rows.push_back(std::move(row));
    }
  }

  auto run_one = [&](size_t row_index, int repeat) {
    size_t scenario_index = row_index / strategies.size();
    const StrategySpec& strat = strategies[row_index % strategies.size()];
    ScenarioKind sc = scenarios[scenario_index];
    // Paired design: the scenario draw depends on the repeat only, never on
    // the strategy, so every strategy faces the same instance.
    uint64_t scenario_seed =
        derive_seed(seed, {10, static_cast<uint64_t>(sc),
                           static_cast<uint64_t>(repeat)});
    uint64_t run_seed = derive_seed(
        seed, {20, static_cast<uint64_t>(sc), static_cast<uint64_t>(repeat)});
    Scenario scen = gen_scenario(sc, base, scenario_seed, rlbl_truth);
    std::vector<AnnotatedOutput> outs = outputs;
    refresh_derived_labels(scen.des, outs);

    ReductionTrace trace;
    if (strat.mesreduce) {
      trace = mes_reduce(scen.des, outs, budget, config, scen.truth, model,
                         run_seed);
    } else {
      trace = run_baseline(strat.kind, strat.target_p, scen.des, outs, budget,
                           scen.truth, model, run_seed);
    }
    RunRecord rec;
    rec.repeat = repeat;
    rec.log_ratio = mes_log_ratio(trace);
    rec.auc = f1_auc(trace, outs, scen.truth, budget.total);
    rec.trace = std::move(trace);
    rows[row_index].runs[static_cast<size_t>(repeat)] = std::move(rec);
  };

  // Flat task list over (row, repeat), processed by a small worker pool.
  std::vector<std::pair<size_t, int>> tasks;
  for (size_t r = 0; r < rows.size(); ++r)
    for (int i = 0; i < repeats; ++i) tasks.emplace_back(r, i);
  int workers = std::max(1, jobs);
  if (workers == 1) {
    for (auto& [r, i] : tasks) run_one(r, i);
  } else {
    std::vector<std::thread> threads;
    std::atomic<size_t> next{0};
    for (int w = 0; w < workers; ++w) {
      threads.emplace_back([&] {
        while (true) {
          size_t i = next.fetch_add(1);
          if (i >= tasks.size()) break;
          run_one(tasks[i].first, tasks[i].second);
        }
      });
    }
    for (auto& th : threads) th.join();
  }

  for (auto& row : rows) {
    double sum = 0.0;
    int defined = 0;
    bool has_inf = false;
    double worst = std::numeric_limits<double>::infinity();
    for (const auto& run : row.runs) {
      if (run.log_ratio) {
        if (std::isinf(*run.log_ratio))
          has_inf = true;
        else {
          sum += *run.log_ratio;
          ++defined;
        }
      }
      worst = std::min(worst, run.auc);
    }
    if (has_inf)
      row.mean_mes_log_ratio = std::numeric_limits<double>::infinity();
    else if (defined > 0)
      row.mean_mes_log_ratio = sum / defined;
    row.worst_f1_auc = row.runs.empty() ? 0.0 : worst;
  }
  return rows;
}

}  // namespace veriscope
