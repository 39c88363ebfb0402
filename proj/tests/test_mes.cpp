#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "helpers.hpp"

using namespace veriscope;
using namespace veriscope::testing;

namespace {

AnnotatedDes with_err(const AnnotatedDes& des, TupleId t, double err) {
  AnnotatedDes out = des;
  out.set_verification(t, des.label(t), err);
  return out;
}

}  // namespace

TEST_CASE("rel_tuples") {
  auto ex = load_running_example();
  CHECK(rel_tuples(ex.des, ex.outputs[2]) == std::vector<TupleId>{A4, R3, E4});
  CHECK(rel_tuples(ex.des, ex.outputs[0]).size() == 5);
  auto des = make_des(2, {{0, Tri::True}}, {{0, 0.1}});
  auto out = make_output(des, ProvExpr::dnf({{0}}));
  CHECK(rel_tuples(des, out) == std::vector<TupleId>{0});
}

TEST_CASE("MES golden values of the running example") {
  auto ex = load_running_example();
  const auto& o1 = ex.outputs[0];
  const auto& o3 = ex.outputs[2];

  MesScore s1 = mes(ex.des, o1);
  CHECK(s1.method == MesMethod::Ilp);
  CHECK(s1.log_value.linear() == doctest::Approx(0.224).epsilon(1e-9));
  // worst case flips only e2
  CHECK(s1.worst_world.at(A1));
  CHECK(s1.worst_world.at(R1));
  CHECK(!s1.worst_world.at(E2));

  MesScore s3 = mes(ex.des, o3);
  CHECK(s3.method == MesMethod::TermScan);
  CHECK(s3.log_value.is_zero());

  MesScore b1 = mes_brute_force(ex.des, o1);
  CHECK(b1.log_value.linear() == doctest::Approx(0.224).epsilon(1e-9));
  CHECK(mes_brute_force(ex.des, o3).log_value.is_zero());
}

TEST_CASE("MES perturbation goldens (err overrides)") {
  auto ex = load_running_example();
  const auto& o1 = ex.outputs[0];
  auto check = [&](TupleId t, double e, double expected) {
    AnnotatedDes des = with_err(ex.des, t, e);
    CHECK(mes(des, o1).log_value.linear() ==
          doctest::Approx(expected).epsilon(1e-9));
    CHECK(mes_brute_force(des, o1).log_value.linear() ==
          doctest::Approx(expected).epsilon(1e-9));
  };
  check(A1, 0.1, 0.288);
  check(R1, 0.1, 0.252);
  check(E2, 0.01, 0.2376);  // 0.3 * 0.8 * 0.99, the worst case flips a1
  check(E2, 0.1, 0.216);
}

TEST_CASE("mes dispatch rejects unknown-labeled outputs") {
  auto ex = load_running_example();
  CHECK_THROWS_AS(mes(ex.des, ex.outputs[1]), PreconditionError);
}

TEST_CASE("mes_incorrect examples") {
  auto ex = load_running_example();
  // o3: single term, a4 labeled 0 with err 0 -> zero sentinel
  MesScore s = mes_incorrect(ex.des, ex.outputs[2]);
  CHECK(s.log_value.is_zero());

  // single-term (x), v(x)=0, err 0.25 -> MES 0.25 with witness x=1
  auto des = make_des(1, {{0, Tri::False}}, {{0, 0.25}});
  auto out = make_output(des, ProvExpr::dnf({{0}}));
  MesScore single = mes_incorrect(des, out);
  CHECK(single.log_value.linear() == doctest::Approx(0.25));
  CHECK(single.worst_world.at(0));
}

TEST_CASE("all-tuples-risky example: MES is 0.1029 under both labelings") {
  auto ex = load_running_example();
  auto lf1 = load_labels("fixtures/qex2_labels/labels_v1.csv", 12);
  AnnotatedDes v1 = build_annotated_des(ex.db, lf1.labels, lf1.errs);
  auto outs1 = evaluate_with_provenance(v1, ex.qex2);
  REQUIRE(outs1.size() == 3);
  CHECK(outs1[0].derived == Tri::False);
  MesScore m1 = mes(v1, outs1[0]);
  CHECK(m1.method == MesMethod::TermScan);
  CHECK(m1.log_value.linear() == doctest::Approx(0.1029).epsilon(1e-9));

  auto lf2 = load_labels("fixtures/qex2_labels/labels_v2.csv", 12);
  AnnotatedDes v2 = build_annotated_des(ex.db, lf2.labels, lf2.errs);
  auto outs2 = evaluate_with_provenance(v2, ex.qex2);
  CHECK(outs2[0].derived == Tri::True);
  MesScore m2 = mes(v2, outs2[0]);
  CHECK(m2.method == MesMethod::Ilp);
  CHECK(m2.log_value.linear() == doctest::Approx(0.1029).epsilon(1e-9));
}

TEST_CASE("zero-error-1-certificate") {
  SUBCASE("certain term certifies") {
    auto des = make_des(1, {{0, Tri::True}}, {{0, 0.0}});
    auto out = make_output(des, ProvExpr::dnf({{0}}));
    CHECK(exists_zero_error_one_certificate(des, out));
    CHECK(mes_correct_ilp(des, out).log_value.is_zero());
  }
  SUBCASE("positive err anywhere in the term breaks the certificate") {
    auto des = make_des(2, {{0, Tri::True}, {1, Tri::True}},
                        {{0, 0.0}, {1, 0.2}});
    auto out = make_output(des, ProvExpr::dnf({{0, 1}}));
    CHECK(!exists_zero_error_one_certificate(des, out));
    // the only positive-probability falsifying world flips x1
    CHECK(mes_correct_ilp(des, out).log_value.linear() == doctest::Approx(0.2));
  }
  SUBCASE("running-example o1 has no certificate") {
    auto ex = load_running_example();
    CHECK(!exists_zero_error_one_certificate(ex.des, ex.outputs[0]));
  }
}

TEST_CASE("mes_cnf_dual examples") {
  SUBCASE("two unit clauses") {
    auto des = make_des(2, {{0, Tri::True}, {1, Tri::True}},
                        {{0, 0.2}, {1, 0.2}});
    auto out = make_output(des, ProvExpr::cnf({{0}, {1}}));
    REQUIRE(out.derived == Tri::True);
    MesScore s = mes_cnf_dual(des, out);
    CHECK(s.log_value.linear() == doctest::Approx(0.16));  // 0.2 * 0.8
    CHECK(s.method == MesMethod::CnfDual);
    CHECK(mes(des, out).log_value.linear() == doctest::Approx(0.16));
  }
  SUBCASE("single clause") {
    auto des = make_des(1, {{0, Tri::True}}, {{0, 0.3}});
    auto out = make_output(des, ProvExpr::cnf({{0}}));
    CHECK(mes_cnf_dual(des, out).log_value.linear() == doctest::Approx(0.3));
  }
  SUBCASE("err-0 variable alone in a clause forces 0") {
    auto des = make_des(1, {{0, Tri::True}}, {{0, 0.0}});
    auto out = make_output(des, ProvExpr::cnf({{0}}));
    CHECK(mes_cnf_dual(des, out).log_value.is_zero());
  }
}

TEST_CASE("mes_brute_force basics") {
  auto des = make_des(1, {{0, Tri::True}}, {{0, 0.4}});
  auto out = make_output(des, ProvExpr::dnf({{0}}));
  CHECK(mes_brute_force(des, out).log_value.linear() == doctest::Approx(0.4));
  // variable cap enforced
  auto big = make_des(25, {{0, Tri::False}}, {{0, 0.4}});
  std::vector<VarId> term;
  for (VarId v = 0; v < 25; ++v) term.push_back(v);
  auto big_out = AnnotatedOutput{{}, ProvExpr::dnf({term}), Tri::False};
  CHECK_THROWS_AS(mes_brute_force(big, big_out), PreconditionError);
}

TEST_CASE("oracle equivalence on random instances") {
  Rng rng(331);
  int done = 0;
  while (done < 150) {
    auto inst = random_known_instance(rng, ProvForm::Dnf, Tri::Unknown, 8, 4, 3);
    if (!inst) continue;
    double expected = brute_force_mes_oracle(inst->des, inst->output);
    MesScore got = mes(inst->des, inst->output);
    MesScore brute = mes_brute_force(inst->des, inst->output);
    CHECK(got.log_value.linear() == doctest::Approx(expected).epsilon(1e-9));
    CHECK(brute.log_value.linear() == doctest::Approx(expected).epsilon(1e-9));
    // witness validity
    if (!got.log_value.is_zero()) {
      World w = World::constant(inst->des.tuple_count(), false);
      for (const auto& [v, b] : got.worst_world) w.set(v, b);
      bool target = inst->output.derived != Tri::True;
      CHECK(eval_bool(inst->output.prov, w) == target);
      auto rel = rel_tuples(inst->des, inst->output);
      CHECK(labeling_probability(inst->des, w, rel).log() ==
            doctest::Approx(got.log_value.log()).epsilon(1e-9));
    }
    ++done;
  }
}

TEST_CASE("cnf dual agrees with brute force on random instances") {
  Rng rng(337);
  int done = 0;
  while (done < 80) {
    auto inst = random_known_instance(rng, ProvForm::Cnf, Tri::True, 8, 4, 3);
    if (!inst) continue;
    double expected = brute_force_mes_oracle(inst->des, inst->output);
    CHECK(mes_cnf_dual(inst->des, inst->output).log_value.linear() ==
          doctest::Approx(expected).epsilon(1e-9));
    ++done;
  }
}

TEST_CASE("zero law: MES is 0 iff every flipping world hits an err-0 mismatch") {
  Rng rng(347);
  int done = 0;
  while (done < 100) {
    auto inst =
        random_known_instance(rng, ProvForm::Dnf, Tri::Unknown, 6, 3, 3, 0.2, 0.5);
    if (!inst) continue;
    double oracle = brute_force_mes_oracle(inst->des, inst->output);
    CHECK(mes(inst->des, inst->output).log_value.is_zero() == (oracle == 0.0));
    ++done;
  }
}

TEST_CASE("normalization neutrality: duplicate terms change nothing") {
  Rng rng(353);
  int done = 0;
  while (done < 50) {
    auto inst = random_known_instance(rng, ProvForm::Dnf, Tri::Unknown, 6, 3, 3);
    if (!inst) continue;
    auto groups = inst->output.prov.groups();
    groups.push_back(groups.front());
    AnnotatedOutput padded{{}, ProvExpr(ProvForm::Dnf, groups),
                           inst->output.derived};
    CHECK(rel_tuples(inst->des, padded) == rel_tuples(inst->des, inst->output));
    CHECK(mes(inst->des, padded).log_value.linear() ==
          doctest::Approx(mes(inst->des, inst->output).log_value.linear()));
    ++done;
  }
}

TEST_CASE("mes_set and averaged_mes") {
  auto ex = load_running_example();
  std::vector<AnnotatedOutput> pair{ex.outputs[0], ex.outputs[2]};
  SetMes set = mes_set(ex.des, pair);
  CHECK(set.argmax_index == 0);
  CHECK(set.score.log_value.linear() == doctest::Approx(0.224).epsilon(1e-9));

  std::vector<AnnotatedOutput> only{ex.outputs[2]};
  CHECK(mes_set(ex.des, only).score.log_value.is_zero());

  CHECK_THROWS_AS(mes_set(ex.des, ex.outputs), PreconditionError);  // o2 is ⊥

  auto avg = averaged_mes(LogProb::from_linear(0.224), 3);
  REQUIRE(avg.has_value());
  CHECK(*avg == doctest::Approx(std::pow(0.224, -1.0 / 3.0)).epsilon(1e-12));
  CHECK(*avg == doctest::Approx(1.646584390021).epsilon(1e-9));
  CHECK(*averaged_mes(LogProb::one(), 5) == doctest::Approx(1.0));
  CHECK(!averaged_mes(LogProb::zero(), 3).has_value());
  CHECK(!averaged_mes(LogProb::from_linear(0.5), 0).has_value());
  CHECK(labeled_rel_count(ex.des, ex.outputs[0]) == 3);
}
