#include "veriscope/verifier.hpp"

#include <algorithm>
#include <cmath>

namespace veriscope {

void VerifierModel::validate() const {
  if (kind == Kind::MajorityVote) {
    if (!(worker_error > 0.0 && worker_error < 0.5 - 1e-6))
      throw ConfigError("worker error must lie in (0, 0.5) away from 0.5");
  } else {
    if (!(oracle_error >= 0.0 && oracle_error <= 0.5))
      throw ConfigError("oracle error must lie in [0, 0.5]");
  }
  if (vote_cap < 1) throw ConfigError("vote cap must be >= 1");
}

double majority_error(int n, double w) {
  if (n < 1 || n % 2 == 0)
    throw PreconditionError("majority_error requires an odd positive n");
  if (w <= 0.0) return 0.0;
  double lw = std::log(w);
  double l1w = std::log1p(-w);
  double lgn = std::lgamma(n + 1.0);
  double sum = 0.0;
  for (int k = (n + 1) / 2; k <= n; ++k) {
    sum += std::exp(lgn - std::lgamma(k + 1.0) - std::lgamma(n - k + 1.0) +
                    k * lw + (n - k) * l1w);
  }
  return std::min(1.0, sum);
}

int votes_needed(double w, double target, int cap) {
  if (!(w > 0.0 && w < 0.5))
    throw PreconditionError("votes_needed: worker error must be in (0, 0.5)");
  if (!(target > 0.0 && target < 0.5))
    throw PreconditionError("votes_needed: target must be in (0, 0.5)");
  if (majority_error(1, w) <= target) return 1;
  int hi = cap % 2 == 0 ? cap - 1 : cap;
  if (hi < 1 || majority_error(hi, w) > target)
    throw PreconditionError("votes_needed: target unreachable within cap");
  // majority_error is decreasing in odd n; binary search over odd counts.
  int lo = 1;  // majority_error(lo) > target, majority_error(hi) <= target
  while (hi - lo > 2) {
    int mid = lo + (hi - lo) / 2;
    if (mid % 2 == 0) ++mid;
    if (mid >= hi) mid = hi - 2;
    if (majority_error(mid, w) <= target)
      hi = mid;
    else
      lo = mid;
  }
  return hi;
}

double reachable_floor(const VerifierModel& model, long remaining_budget) {
  if (remaining_budget < 1) return 1.0;
  if (model.kind == VerifierModel::Kind::FixedOracle) return model.oracle_error;
  long n = std::min<long>(remaining_budget, model.vote_cap);
  if (n % 2 == 0) --n;
  return majority_error(static_cast<int>(n), model.worker_error);
}

namespace {

uint64_t splitmix64(uint64_t x) {
  x += 0x9E3779B97F4A7C15ULL;
  uint64_t z = x;
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

}  // namespace

uint64_t derive_seed(uint64_t base, std::initializer_list<uint64_t> path) {
  uint64_t x = splitmix64(base);
  for (uint64_t p : path) x = splitmix64(x ^ (p * 0xD1B54A32D192ED03ULL));
  return x;
}

uint64_t Rng::next() {
  // canonical splitmix64 step: counter state, mixed output, 2^64 period
  state_ += 0x9E3779B97F4A7C15ULL;
  uint64_t z = state_;
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

double Rng::uniform01() {
  return static_cast<double>(next() >> 11) * 0x1.0p-53;
}

double Rng::uniform(double lo, double hi) {
  return lo + (hi - lo) * uniform01();
}

bool Rng::bernoulli(double p) { return uniform01() < p; }

uint64_t Rng::below(uint64_t n) { return n == 0 ? 0 : next() % n; }

}  // namespace veriscope
