#include "veriscope/risky.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>

#include "veriscope/errors.hpp"
#include "veriscope/provenance.hpp"

namespace veriscope {

namespace {

void check_candidate(const AnnotatedDes& des, const AnnotatedOutput& output,
                     TupleId tuple) {
  if (!is_known(output.derived))
    throw PreconditionError("risky analysis needs a known output label");
  if (!des.labeled(tuple))
    throw PreconditionError("risky analysis needs a labeled tuple");
  if (!(*des.err(tuple) > 0.0))
    throw PreconditionError("risky analysis needs err > 0");
  auto rel = rel_tuples(des, output);
  if (!std::binary_search(rel.begin(), rel.end(), tuple))
    throw PreconditionError("tuple does not participate in this output");
}

LogProb mes_with_err(const AnnotatedDes& des, const AnnotatedOutput& output,
                     TupleId tuple, double err) {
  AnnotatedDes probe = des;  // shares the database, copies labels/errs
  probe.set_verification(tuple, des.label(tuple), err);
  return mes(probe, output).log_value;
}

FastPathResult fast_path_impl(const AnnotatedDes& des,
                              const AnnotatedOutput& output, TupleId tuple,
                              const LogProb* baseline) {
  bool lab = des.label(tuple) == Tri::True;
  const auto& terms = output.prov.groups();
  auto some_term_is_singleton = [&] {
    for (const auto& t : terms)
      if (t.size() == 1 && t[0] == tuple) return true;
    return false;
  };
  auto every_term_contains = [&] {
    for (const auto& t : terms)
      if (!std::binary_search(t.begin(), t.end(), tuple)) return false;
    return true;
  };
  auto guard_risky = [&]() -> FastPathResult {
    // With every flipping world agreeing with the tuple's label the MES is
    // (1 - err) times a constant; shrinking err raises it only if positive.
    LogProb base = baseline ? *baseline : mes(des, output).log_value;
    return base.is_zero() ? FastPathResult::NotRisky : FastPathResult::Risky;
  };

  if (output.derived == Tri::True) {
    // Flipping worlds falsify the DNF. A falsifying world with the variable
    // at 1 exists iff no term is exactly {x}; one with the variable at 0
    // always exists.
    if (lab) {
      if (some_term_is_singleton()) return FastPathResult::NotRisky;
      return FastPathResult::Unknown;
    }
    if (some_term_is_singleton()) return guard_risky();
    return FastPathResult::Unknown;
  }
  // derived = 0: flipping worlds satisfy the DNF. A satisfying world with the
  // variable at 1 always exists; one with it at 0 exists iff some term avoids
  // the variable.
  if (lab) {
    if (every_term_contains()) return guard_risky();
    return FastPathResult::Unknown;
  }
  if (every_term_contains()) return FastPathResult::NotRisky;
  return FastPathResult::Unknown;
}

}  // namespace

std::string to_string(RiskClass c) {
  switch (c) {
    case RiskClass::Risky: return "risky";
    case RiskClass::Safe: return "safe";
    default: return "undetermined";
  }
}

RiskReport is_risky(const AnnotatedDes& des, const AnnotatedOutput& output,
                    TupleId tuple) {
  check_candidate(des, output, tuple);
  LogProb baseline = mes(des, output).log_value;
  LogProb zero = mes_with_err(des, output, tuple, 0.0);
  RiskReport r;
  r.tuple = tuple;
  r.baseline_mes = baseline;
  r.zero_err_mes = zero;
  r.cls = zero.log() > baseline.log() + kMesLogTol ? RiskClass::Risky
                                                   : RiskClass::Safe;
  return r;
}

bool is_risky_at(const AnnotatedDes& des, const AnnotatedOutput& output,
                 TupleId tuple, double q) {
  check_candidate(des, output, tuple);
  if (!(q >= 0.0 && q < *des.err(tuple)))
    throw PreconditionError("probe q must lie in [0, err(tuple))");
  LogProb baseline = mes(des, output).log_value;
  LogProb probed = mes_with_err(des, output, tuple, q);
  return probed.log() > baseline.log() + kMesLogTol;
}

FastPathResult fast_path_risky(const AnnotatedDes& des,
                               const AnnotatedOutput& output, TupleId tuple) {
  check_candidate(des, output, tuple);
  return fast_path_impl(des, output, tuple, nullptr);
}

std::vector<RiskReport> classify_tuples(const AnnotatedDes& des,
                                        const AnnotatedOutput& output,
                                        const RiskyLimits& limits) {
  if (!is_known(output.derived))
    throw PreconditionError("risky analysis needs a known output label");
  std::vector<TupleId> candidates;
  for (TupleId t : rel_tuples(des, output))
    if (des.labeled(t) && *des.err(t) > 0.0) candidates.push_back(t);

  LogProb baseline = mes(des, output).log_value;
  auto deadline = std::chrono::steady_clock::now() +
                  std::chrono::duration_cast<std::chrono::steady_clock::duration>(
                      std::chrono::duration<double>(limits.wall_seconds));

  std::vector<RiskReport> reports;
  int processed = 0;
  for (TupleId t : candidates) {
    RiskReport r;
    r.tuple = t;
    r.baseline_mes = baseline;
    bool within = processed < limits.max_candidates &&
                  std::chrono::steady_clock::now() < deadline;
    if (!within) {
      reports.push_back(r);  // undetermined
      continue;
    }
    ++processed;
    double e = *des.err(t);
    switch (fast_path_impl(des, output, t, &baseline)) {
      case FastPathResult::NotRisky:
        r.cls = RiskClass::Safe;
        break;
      case FastPathResult::Risky:
        r.cls = RiskClass::Risky;
        // All flipping worlds keep the label: MES(0) = baseline / (1 - err).
        r.zero_err_mes = LogProb::from_log(baseline.log() - std::log1p(-e));
        break;
      case FastPathResult::Unknown: {
        LogProb zero = mes_with_err(des, output, t, 0.0);
        r.zero_err_mes = zero;
        r.cls = zero.log() > baseline.log() + kMesLogTol ? RiskClass::Risky
                                                         : RiskClass::Safe;
        break;
      }
    }
    if (limits.probe_impairing && r.cls == RiskClass::Risky) {
      double q = e - limits.impairing_epsilon;
      if (q > 0.0) {
        LogProb probed = mes_with_err(des, output, t, q);
        r.probed_q = q;
        r.impairing_approx = probed.log() > baseline.log() + kMesLogTol;
      }
    }
    reports.push_back(std::move(r));
  }
  return reports;
}

}  // namespace veriscope
