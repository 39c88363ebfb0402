#pragma once

#include <functional>
#include <optional>
#include <vector>

#include "veriscope/mes.hpp"
#include "veriscope/risky.hpp"
#include "veriscope/verifier.hpp"

namespace veriscope {

enum class BaselineKind : uint8_t {
  Random,
  FormulaCount,
  OccurrencesCount,
  ProbGreedy
};

enum class Termination : uint8_t { Budget, Threshold, NoProgress };

std::string to_string(BaselineKind k);
std::string to_string(Termination t);

struct Budget {
  long total = 0;
  long spent = 0;
  long remaining() const { return total - spent; }
};

struct ReduceConfig {
  double theta = 0.0;   // target MES
  int top_k = 1;        // highest-MES outputs considered per iteration
  int mu = 50;          // cap on outputs tied for the highest MES
  RiskyLimits risky_limits;
  double reverify_target = 0.3;
};

// One reduction step: cumulative cost, the tuples whose verification state
// actually changed, the max MES over outputs with known labels, and the
// per-output derived labels after the step. Step 0 is the initial state.
struct TraceStep {
  long cost = 0;
  std::vector<TupleId> changed;
  LogProb max_mes = LogProb::zero();
  std::vector<Tri> derived;
};

struct ReductionTrace {
  std::vector<TraceStep> steps;
  Termination termination = Termination::Budget;
};

// Test hook: called after every appended step with the mutable state and the
// incrementally maintained per-output MES cache (absent for unknown labels).
using StepObserver =
    std::function<void(const AnnotatedDes&, const std::vector<AnnotatedOutput>&,
                       const std::vector<std::optional<LogProb>>&)>;

// Verifies each tuple to the target error probability: n = votes needed for
// the target, clamped to the largest affordable odd count (skip when nothing
// is affordable); the label becomes the majority vote and err the majority
// error of the cast count. Returns the votes spent; appends tuples whose
// state changed to *changed.
long improve_verification(AnnotatedDes& des, std::vector<TupleId> tuples,
                          double target_p, Budget& budget, const World& truth,
                          const VerifierModel& model, Rng& rng,
                          std::vector<TupleId>* changed);

// Labels the unlabeled provenance variables of every unknown-labeled output
// at the re-verification target, then refreshes the derived labels of all
// outputs touched by the changes.
long re_verify(AnnotatedDes& des, std::vector<AnnotatedOutput>& outputs,
               Budget& budget, double target_p, const World& truth,
               const VerifierModel& model, Rng& rng,
               std::vector<TupleId>* changed);

// Improvement-set choice: a cheapest safe tuple if one exists; otherwise the
// cheapest satisfied term (correct-labeled outputs) or a greedy hitting set
// of one non-1-labeled variable per term (incorrect-labeled outputs). Both
// verifier models price every tuple alike at a given target, so "cheapest"
// reduces to cardinality with ascending-id ties.
std::vector<TupleId> find_improvement_set(const AnnotatedDes& des,
                                          const AnnotatedOutput& output,
                                          const RiskyLimits& limits);

// Variable-step-size schedule: aims slightly below the minimal positive err
// among the output's related tuples, never below theta or below what the
// verifier can reach with the remaining budget.
double next_probability(const AnnotatedDes& des, const AnnotatedOutput& output,
                        const std::vector<TupleId>& set, const Budget& budget,
                        double theta, const VerifierModel& model);

// The MESReduce loop: while budget remains and the set MES exceeds theta,
// re-verify unknown outputs, pick the top-k / mu-tied highest-MES outputs,
// improve the union of their improvement sets at the minimum of their target
// probabilities, and recompute MES only where provenance intersects the
// changed tuples.
ReductionTrace mes_reduce(AnnotatedDes des, std::vector<AnnotatedOutput> outputs,
                          Budget budget, const ReduceConfig& config,
                          const World& truth, const VerifierModel& model,
                          uint64_t seed, AnnotatedDes* final_des = nullptr,
                          const StepObserver* observer = nullptr);

// Baseline strategies: iteratively pick one input tuple (restricted to the
// outputs' provenance variables) per the strategy and verify it to the fixed
// target p until the budget is exhausted.
ReductionTrace run_baseline(BaselineKind kind, double target_p,
                            AnnotatedDes des,
                            std::vector<AnnotatedOutput> outputs, Budget budget,
                            const World& truth, const VerifierModel& model,
                            uint64_t seed, AnnotatedDes* final_des = nullptr);

}  // namespace veriscope
