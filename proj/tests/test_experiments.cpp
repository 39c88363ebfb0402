#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "helpers.hpp"

using namespace veriscope;
using namespace veriscope::testing;

TEST_CASE("WCS scenario: adversarial initialization") {
  auto ex = load_running_example();
  Scenario s = gen_scenario(ScenarioKind::Wcs, ex.des, 99);
  for (TupleId t = 0; t < 12; ++t) {
    CHECK(s.truth(t));
    CHECK(s.des.label(t) == Tri::False);
    CHECK(*s.des.err(t) == doctest::Approx(0.499));
  }
}

TEST_CASE("AVG scenario: ranges, determinism, empirical flip rate") {
  auto ex = load_running_example();
  Scenario s = gen_scenario(ScenarioKind::Avg, ex.des, 7);
  Scenario same = gen_scenario(ScenarioKind::Avg, ex.des, 7);
  Scenario other = gen_scenario(ScenarioKind::Avg, ex.des, 8);
  bool identical = true, differs = false;
  for (TupleId t = 0; t < 12; ++t) {
    CHECK(s.des.labeled(t));
    CHECK(*s.des.err(t) >= 0.2);
    CHECK(*s.des.err(t) < 0.499);
    identical = identical && s.des.label(t) == same.des.label(t) &&
                *s.des.err(t) == *same.des.err(t) && s.truth(t) == same.truth(t);
    differs = differs || *s.des.err(t) != *other.des.err(t);
  }
  CHECK(identical);
  CHECK(differs);

  // flip frequency per tuple tracks its err within 3 sigma
  const int draws = 4000;
  int flips = 0;
  double err0 = 0.0;
  for (int i = 0; i < draws; ++i) {
    Scenario d = gen_scenario(ScenarioKind::Avg, ex.des, 1000 + i);
    bool label1 = d.des.label(0) == Tri::True;
    if (label1 != d.truth(0)) ++flips;
    err0 += *d.des.err(0);
  }
  double mean_err = err0 / draws;  // E[err] ~ 0.3495 under U[0.2, 0.499]
  double sigma = std::sqrt(mean_err * (1 - mean_err) / draws);
  CHECK(std::fabs(double(flips) / draws - mean_err) < 3 * sigma + 0.01);
}

TEST_CASE("RLBL scenario: untouched labels, required truth") {
  auto ex = load_running_example();
  Scenario s = gen_scenario(ScenarioKind::Rlbl, ex.des, 3, &ex.truth);
  CHECK(s.des.label(A2) == Tri::False);
  CHECK(*s.des.err(E2) == doctest::Approx(0.4));
  CHECK(s.truth == ex.truth);
  CHECK_THROWS_AS(gen_scenario(ScenarioKind::Rlbl, ex.des, 3), ConfigError);
}

TEST_CASE("f1 on the running example vs the Table-2 ground truth") {
  auto ex = load_running_example();
  // predictions (1, unknown->0, 0); truths all 0 under v_full
  F1Stats f = f1_of_outputs(ex.des, ex.outputs, ex.truth);
  CHECK(f.precision == doctest::Approx(0.0));
  CHECK(f.recall == doctest::Approx(1.0));  // 0/0 convention
  CHECK(f.f1 == doctest::Approx(0.0));

  // all predictions equal truth
  std::vector<Tri> perfect;
  for (const auto& o : ex.outputs)
    perfect.push_back(tri_of(eval_bool(o.prov, ex.truth)));
  F1Stats g = f1_score(perfect, ex.outputs, ex.truth);
  CHECK(g.precision == doctest::Approx(1.0));
  CHECK(g.recall == doctest::Approx(1.0));
  CHECK(g.f1 == doctest::Approx(1.0));

  // empty output set: (1, 1, 1) by convention
  std::vector<AnnotatedOutput> none;
  F1Stats h = f1_score({}, none, ex.truth);
  CHECK(h.f1 == doctest::Approx(1.0));
}

TEST_CASE("f1_auc of step traces") {
  auto ex = load_running_example();
  std::vector<AnnotatedOutput> outs{ex.outputs[0]};
  World truth_true = World::constant(12, true);  // o1 truly correct
  auto step = [&](long cost, Tri derived) {
    TraceStep s;
    s.cost = cost;
    s.derived = {derived};
    s.max_mes = LogProb::from_linear(0.5);
    return s;
  };
  SUBCASE("constant F1 = 1 over budget 1000") {
    ReductionTrace t;
    t.steps = {step(0, Tri::True)};
    CHECK(f1_auc(t, outs, truth_true, 1000) == doctest::Approx(1000.0));
  }
  SUBCASE("jump from 0 to 1 at cost 500") {
    ReductionTrace t;
    t.steps = {step(0, Tri::False), step(500, Tri::True)};
    CHECK(f1_auc(t, outs, truth_true, 1000) == doctest::Approx(500.0));
  }
  SUBCASE("three-step staircase") {
    // F1 is 0 on [0,200), 1 on [200,700), 0 on [700,1000] -> area 500
    ReductionTrace t;
    t.steps = {step(0, Tri::False), step(200, Tri::True), step(700, Tri::False)};
    CHECK(f1_auc(t, outs, truth_true, 1000) == doctest::Approx(500.0));
  }
}

TEST_CASE("f1_auc is monotone under pointwise dominance") {
  auto ex = load_running_example();
  std::vector<AnnotatedOutput> outs{ex.outputs[0], ex.outputs[2]};
  World truth_true = World::constant(12, true);
  auto mk = [&](std::vector<std::pair<long, std::vector<Tri>>> steps) {
    ReductionTrace t;
    for (auto& [cost, derived] : steps) {
      TraceStep s;
      s.cost = cost;
      s.derived = derived;
      t.steps.push_back(s);
    }
    return t;
  };
  // dominated trace answers correctly strictly later
  auto good = mk({{0, {Tri::True, Tri::False}}, {100, {Tri::True, Tri::True}}});
  auto bad = mk({{0, {Tri::True, Tri::False}}, {400, {Tri::True, Tri::True}}});
  CHECK(f1_auc(good, outs, truth_true, 1000) >=
        f1_auc(bad, outs, truth_true, 1000));
}

TEST_CASE("mes_log_ratio conventions") {
  auto mk = [](double initial, double final_linear) {
    ReductionTrace t;
    TraceStep a, b;
    a.max_mes = LogProb::from_linear(initial);
    b.max_mes = LogProb::from_linear(final_linear);
    t.steps = {a, b};
    return t;
  };
  CHECK(*mes_log_ratio(mk(0.224, 0.05)) ==
        doctest::Approx(2.002348638212).epsilon(1e-9));
  CHECK(*mes_log_ratio(mk(0.3, 0.3)) == doctest::Approx(1.0));
  CHECK(std::isinf(*mes_log_ratio(mk(0.3, 0.0))));
  CHECK(!mes_log_ratio(mk(0.0, 0.1)).has_value());
  CHECK(!mes_log_ratio(mk(1.0, 0.5)).has_value());
  // > 1 iff reduced
  CHECK(*mes_log_ratio(mk(0.3, 0.2)) > 1.0);
  CHECK(*mes_log_ratio(mk(0.3, 0.4)) < 1.0);
}

TEST_CASE("run_comparison: paired scenario draws and aggregation") {
  auto ex = load_running_example();
  std::vector<StrategySpec> strategies;
  StrategySpec mr;
  mr.mesreduce = true;
  strategies.push_back(mr);
  StrategySpec rnd;
  rnd.mesreduce = false;
  rnd.kind = BaselineKind::Random;
  rnd.target_p = 0.1;
  strategies.push_back(rnd);

  VerifierModel model;
  model.kind = VerifierModel::Kind::MajorityVote;
  model.worker_error = 0.2;

  ReduceConfig config;
  auto rows = run_comparison(ex.des, ex.outputs, {ScenarioKind::Avg},
                             strategies, Budget{60, 0}, 3, 77, config, model,
                             /*jobs=*/2);
  REQUIRE(rows.size() == 2);
  CHECK(rows[0].strategy == "mesreduce");
  CHECK(rows[1].strategy == "random(p=0.1)");
  for (const auto& row : rows) {
    CHECK(row.runs.size() == 3);
    for (const auto& run : row.runs) {
      // step-0 snapshots of the paired repeats agree across strategies
      CHECK(run.trace.steps.front().cost == 0);
    }
  }
  // paired design: identical initial max MES per repeat across strategies
  for (int r = 0; r < 3; ++r) {
    CHECK(rows[0].runs[size_t(r)].trace.steps.front().max_mes.log() ==
          doctest::Approx(
              rows[1].runs[size_t(r)].trace.steps.front().max_mes.log()));
  }
  // identical-seed determinism of the whole comparison
  auto again = run_comparison(ex.des, ex.outputs, {ScenarioKind::Avg},
                              strategies, Budget{60, 0}, 3, 77, config, model,
                              /*jobs=*/1);
  for (size_t i = 0; i < rows.size(); ++i) {
    CHECK(rows[i].worst_f1_auc == doctest::Approx(again[i].worst_f1_auc));
    CHECK(rows[i].mean_mes_log_ratio.has_value() ==
          again[i].mean_mes_log_ratio.has_value());
  }
}
