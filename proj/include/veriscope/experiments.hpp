#pragma once

#include <optional>
#include <string>
#include <vector>

#include "veriscope/reduce.hpp"

namespace veriscope {

enum class ScenarioKind : uint8_t { Wcs, Avg, Rlbl };

std::string to_string(ScenarioKind k);
ScenarioKind scenario_from_string(const std::string& s);

// WCS: ground truth all 1, labels all 0, err all 0.499 (adversarial start).
// AVG: truth ~ Bernoulli(0.5), err ~ U[0.2, 0.499], label = truth flipped
// with probability err. RLBL: the loaded labels/errs, untouched; ground
// truth must come from a file.
struct Scenario {
  ScenarioKind kind = ScenarioKind::Avg;
  World truth;
  AnnotatedDes des;
  uint64_t seed = 0;
};

Scenario gen_scenario(ScenarioKind kind, const AnnotatedDes& base,
                      uint64_t seed, const World* rlbl_truth = nullptr);

struct F1Stats {
  double precision = 1.0;
  double recall = 1.0;
  double f1 = 1.0;
};

// Output-level confusion against ground truth: prediction is the derived
// label with unknown mapped to 0; an output's true label is the Boolean
// value of its provenance under the ground-truth world. Empty denominators
// count as 1.0.
F1Stats f1_score(std::span<const Tri> derived,
                 std::span<const AnnotatedOutput> outputs, const World& truth);

F1Stats f1_of_outputs(const AnnotatedDes& des,
                      std::span<const AnnotatedOutput> outputs,
                      const World& truth);

// Area under the F1-vs-cost step curve from 0 to `budget`; the F1 value of a
// step applies from its cost until the next step's cost.
double f1_auc(const ReductionTrace& trace,
              std::span<const AnnotatedOutput> outputs, const World& truth,
              long budget);

// ln(final max MES) / ln(initial max MES); +infinity when the final MES is
// 0; absent when the initial MES is 0 or 1. Values above 1 mean reduction.
std::optional<double> mes_log_ratio(const ReductionTrace& trace);

// A strategy under comparison: MESReduce or a parameterized baseline.
struct StrategySpec {
  bool mesreduce = true;
  BaselineKind kind = BaselineKind::Random;
  double target_p = 0.01;

  std::string name() const;
};

struct RunRecord {
  int repeat = 0;
  std::optional<double> log_ratio;
  double auc = 0.0;
  ReductionTrace trace;
};

struct ComparisonRow {
  std::string strategy;
  ScenarioKind scenario = ScenarioKind::Avg;
  // Mean over defined ratios; +infinity as soon as one repeat hits it.
  std::optional<double> mean_mes_log_ratio;
  double worst_f1_auc = 0.0;
  std::vector<RunRecord> runs;
};

// Paired-seed comparison: repeat r of every strategy sees the same scenario
// draw. Repeats run on `jobs` threads; aggregation is deterministic.
std::vector<ComparisonRow> run_comparison(
    const AnnotatedDes& base, const std::vector<AnnotatedOutput>& outputs,
    const std::vector<ScenarioKind>& scenarios,
    const std::vector<StrategySpec>& strategies, Budget budget, int repeats,
    uint64_t seed, const ReduceConfig& config, const VerifierModel& model,
    int jobs = 1, const World* rlbl_truth = nullptr);

}  // namespace veriscope
