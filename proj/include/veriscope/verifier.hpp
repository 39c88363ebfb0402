#pragma once

#include <cstdint>
#include <initializer_list>

#include "veriscope/errors.hpp"

namespace veriscope {

// Simulated external verifier. MajorityVote aggregates n independent votes,
// each wrong with probability worker_error; the achieved error probability of
// the aggregated label is majority_error(n, worker_error). FixedOracle casts
// a single unit-cost vote that is wrong with probability oracle_error.
struct VerifierModel {
  enum class Kind { MajorityVote, FixedOracle };
  Kind kind = Kind::MajorityVote;
  double worker_error = 0.1;  // must stay in (0, 0.5), away from 0.5 by 1e-6
  double oracle_error = 0.0;
  int vote_cap = 10001;

  void validate() const;
};

// P[majority of n votes is wrong], each vote independently wrong with
// probability w. n must be odd (no ties).
double majority_error(int n, double w);

// Minimal odd n with majority_error(n, w) <= target. Throws
// PreconditionError when no n <= cap reaches the target.
int votes_needed(double w, double target, int cap = 10001);

// Smallest error probability the verifier can reach with the remaining
// budget (and the vote cap). 1.0 when nothing is affordable.
double reachable_floor(const VerifierModel& model, long remaining_budget);

// splitmix64-based seed derivation: every random stream in the system is
// addressed by a path of integers under one master seed.
uint64_t derive_seed(uint64_t base, std::initializer_list<uint64_t> path);

// Deterministic generator with explicit, libstdc++-independent draw logic so
// identical seeds give byte-identical artifacts.
class Rng {
 public:
  explicit Rng(uint64_t seed) : state_(seed ? seed : 0x9E3779B97F4A7C15ULL) {}

  uint64_t next();
  double uniform01();                      // [0, 1)
  double uniform(double lo, double hi);
  bool bernoulli(double p);
  uint64_t below(uint64_t n);              // [0, n)

 private:
  uint64_t state_;
};

}  // namespace veriscope
