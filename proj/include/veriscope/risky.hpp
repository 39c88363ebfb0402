#pragma once

#include <optional>
#include <vector>

#include "veriscope/mes.hpp"

namespace veriscope {

enum class RiskClass : uint8_t { Risky, Safe, Undetermined };
enum class FastPathResult : uint8_t { Risky, NotRisky, Unknown };

std::string to_string(RiskClass c);

struct RiskReport {
  TupleId tuple = -1;
  RiskClass cls = RiskClass::Undetermined;
  LogProb baseline_mes;
  std::optional<LogProb> zero_err_mes;
  // Heuristic reliability-impairing probe: unsafe at q = err - 1e-6?
  std::optional<double> probed_q;
  std::optional<bool> impairing_approx;
};

struct RiskyLimits {
  int max_candidates = 64;
  double wall_seconds = 10.0;
  bool probe_impairing = false;
  double impairing_epsilon = 1e-6;
  // Geometric probe grid depth for the positive-unsafe-probability search
  // (q = err/2^i), surfaced for tests.
  int geometric_depth = 40;
};

// Theorem check: the tuple is risky iff setting its err to 0 strictly raises
// the output's MES (log-space tolerance 1e-12). Requires a known output
// label, a known tuple label, err > 0, and membership in Rel.
RiskReport is_risky(const AnnotatedDes& des, const AnnotatedOutput& output,
                    TupleId tuple);

// Parameterized variant: does lowering err(tuple) to q (0 <= q < err) raise
// the MES?
bool is_risky_at(const AnnotatedDes& des, const AnnotatedOutput& output,
                 TupleId tuple, double q);

// Structural special cases on the monotone DNF: when no flipping world keeps
// the tuple's own label the tuple cannot be risky; when every flipping world
// keeps it, lowering err scales the MES up (provided the MES is positive).
FastPathResult fast_path_risky(const AnnotatedDes& des,
                               const AnnotatedOutput& output, TupleId tuple);

// Classifies the labeled, err-positive Rel tuples of the output: fast paths
// first, then Theorem checks, stopping at the candidate cap and the
// cooperative wall-clock deadline; the rest report Undetermined.
std::vector<RiskReport> classify_tuples(const AnnotatedDes& des,
                                        const AnnotatedOutput& output,
                                        const RiskyLimits& limits);

}  // namespace veriscope
