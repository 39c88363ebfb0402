#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "helpers.hpp"

using namespace veriscope;
using namespace veriscope::testing;

TEST_CASE("majority_error matches the binomial oracle") {
  for (double w : {0.05, 0.1, 0.25, 0.4, 0.49}) {
    for (int n : {1, 3, 5, 7, 9, 15, 25}) {
      CHECK(majority_error(n, w) ==
            doctest::Approx(binomial_majority_error_oracle(n, w)).epsilon(1e-9));
    }
  }
  CHECK(majority_error(1, 0.1) == doctest::Approx(0.1));
  CHECK(majority_error(3, 0.1) == doctest::Approx(0.028).epsilon(1e-9));
  CHECK(majority_error(5, 0.0) == 0.0);
  CHECK_THROWS_AS(majority_error(4, 0.1), PreconditionError);
}

TEST_CASE("majority_error decreases in n for w < 1/2") {
  for (double w : {0.1, 0.3, 0.45}) {
    double prev = 1.0;
    for (int n = 1; n <= 41; n += 2) {
      double e = majority_error(n, w);
      CHECK(e < prev);
      prev = e;
    }
  }
}

TEST_CASE("votes_needed") {
  CHECK(votes_needed(0.1, 0.05) == 3);   // P(>=2 of 3) = 0.028 <= 0.05
  CHECK(votes_needed(0.1, 0.2) == 1);    // target above w: one vote
  CHECK(votes_needed(0.3, 0.29) == 3);   // one vote misses barely
  CHECK_THROWS_AS(votes_needed(0.49, 1e-6), PreconditionError);  // beyond cap
  CHECK_THROWS_AS(votes_needed(0.6, 0.1), PreconditionError);
  CHECK_THROWS_AS(votes_needed(0.1, 0.0), PreconditionError);
  // minimality: the next smaller odd count misses the target
  Rng rng(53);
  for (int round = 0; round < 40; ++round) {
    double w = rng.uniform(0.02, 0.45);
    double target = rng.uniform(0.001, 0.4);
    int n = votes_needed(w, target);
    CHECK(majority_error(n, w) <= target);
    if (n > 1) CHECK(majority_error(n - 2, w) > target);
  }
}

TEST_CASE("reachable_floor") {
  VerifierModel mv;
  mv.kind = VerifierModel::Kind::MajorityVote;
  mv.worker_error = 0.1;
  CHECK(reachable_floor(mv, 0) == 1.0);
  CHECK(reachable_floor(mv, 1) == doctest::Approx(0.1));
  CHECK(reachable_floor(mv, 4) == doctest::Approx(majority_error(3, 0.1)));
  CHECK(reachable_floor(mv, 1000000) ==
        doctest::Approx(majority_error(10001, 0.1)));
  VerifierModel oracle;
  oracle.kind = VerifierModel::Kind::FixedOracle;
  oracle.oracle_error = 0.05;
  CHECK(reachable_floor(oracle, 3) == doctest::Approx(0.05));
}

TEST_CASE("model validation") {
  VerifierModel bad;
  bad.worker_error = 0.5;
  CHECK_THROWS_AS(bad.validate(), ConfigError);
  bad.worker_error = 0.4999999;
  CHECK_THROWS_AS(bad.validate(), ConfigError);  // within 1e-6 of 0.5
  bad.worker_error = 0.3;
  CHECK_NOTHROW(bad.validate());
}

TEST_CASE("rng determinism and seed derivation") {
  Rng a(12345), b(12345), c(54321);
  bool all_equal = true, any_diff = false;
  for (int i = 0; i < 100; ++i) {
    uint64_t x = a.next(), y = b.next(), z = c.next();
    all_equal = all_equal && x == y;
    any_diff = any_diff || x != z;
  }
  CHECK(all_equal);
  CHECK(any_diff);
  CHECK(derive_seed(1, {2, 3}) == derive_seed(1, {2, 3}));
  CHECK(derive_seed(1, {2, 3}) != derive_seed(1, {3, 2}));
  CHECK(derive_seed(1, {2}) != derive_seed(2, {2}));

  Rng u(7);
  for (int i = 0; i < 1000; ++i) {
    double v = u.uniform01();
    CHECK(v >= 0.0);
    CHECK(v < 1.0);
  }
  double lo = u.uniform(0.2, 0.499);
  CHECK(lo >= 0.2);
  CHECK(lo < 0.499);
}
