#include "veriscope/mes.hpp"

#include <algorithm>
#include <cmath>

#include "veriscope/errors.hpp"
#include "veriscope/ilp.hpp"
#include "veriscope/provenance.hpp"

namespace veriscope {

namespace {

// Probability of the observed labels under a world restricted to the
// provenance variables. Only labeled tuples contribute.
LogProb witness_score(const AnnotatedDes& des,
                      const std::map<VarId, bool>& world) {
  LogProb p = LogProb::one();
  for (const auto& [t, bit] : world) {
    Tri l = des.label(t);
    if (!is_known(l)) continue;
    double e = *des.err(t);
    bool match = (l == Tri::True) == bit;
    p *= LogProb::from_linear(match ? 1.0 - e : e);
  }
  return p;
}

// Lexicographic order over ascending variable ids; both maps share keys.
bool witness_less(const std::map<VarId, bool>& a,
                  const std::map<VarId, bool>& b) {
  auto ia = a.begin();
  auto ib = b.begin();
  for (; ia != a.end() && ib != b.end(); ++ia, ++ib) {
    if (ia->second != ib->second) return !ia->second;
  }
  return false;
}

// Fuzzy max with the lexicographically-smallest-witness tie rule.
struct Best {
  bool set = false;
  LogProb score;
  std::map<VarId, bool> witness;

  void offer(LogProb s, std::map<VarId, bool> w) {
    if (!set) {
      set = true;
      score = s;
      witness = std::move(w);
      return;
    }
    double d = s.log() - score.log();
    bool tie = (s.is_zero() && score.is_zero()) ||
               (std::isfinite(d) && std::fabs(d) <= kMesLogTol);
    if (tie) {
      if (witness_less(w, witness)) witness = std::move(w);
    } else if (s > score) {
      score = s;
      witness = std::move(w);
    }
  }
};

void require_known(const AnnotatedOutput& output) {
  if (!is_known(output.derived))
    throw PreconditionError(
        "MES is undefined for an unknown-labeled output; re-verify to obtain "
        "a label first");
}

}  // namespace

std::string to_string(MesMethod m) {
  switch (m) {
    case MesMethod::TermScan: return "term-scan";
    case MesMethod::Ilp: return "ilp";
    case MesMethod::CnfDual: return "cnf-dual";
    default: return "brute-force";
  }
}

std::vector<TupleId> rel_tuples(const AnnotatedDes& des,
                                const AnnotatedOutput& output) {
  // Variable ids are tuple ids; Rel is exactly vars of the provenance.
  (void)des;
  return vars(output.prov);
}

MesScore mes(const AnnotatedDes& des, const AnnotatedOutput& output) {
  require_known(output);
  if (output.derived == Tri::False) {
    if (output.prov.form() != ProvForm::Dnf)
      throw PreconditionError(
          "MES of an incorrect-labeled output requires DNF provenance");
    return mes_incorrect(des, output);
  }
  if (output.prov.form() == ProvForm::Cnf) return mes_cnf_dual(des, output);
  return mes_correct_ilp(des, output);
}

MesScore mes_incorrect(const AnnotatedDes& des, const AnnotatedOutput& output) {
  if (output.derived != Tri::False)
    throw PreconditionError("mes_incorrect requires a 0-labeled output");
  if (output.prov.form() != ProvForm::Dnf)
    throw PreconditionError("mes_incorrect requires DNF provenance");
  std::vector<VarId> all = vars(output.prov);
  Best best;
  for (const auto& term : output.prov.groups()) {
    std::map<VarId, bool> world;
    for (VarId v : all) {
      if (std::binary_search(term.begin(), term.end(), v))
        world[v] = true;
      else if (des.labeled(v))
        world[v] = des.label(v) == Tri::True;
      else
        world[v] = true;
    }
    LogProb score = witness_score(des, world);
    best.offer(score, std::move(world));
  }
  return {best.score, std::move(best.witness), MesMethod::TermScan};
}

MesScore mes_cnf_dual(const AnnotatedDes& des, const AnnotatedOutput& output) {
  if (output.derived != Tri::True)
    throw PreconditionError("mes_cnf_dual requires a 1-labeled output");
  if (output.prov.form() != ProvForm::Cnf)
    throw PreconditionError("mes_cnf_dual requires CNF provenance");
  std::vector<VarId> all = vars(output.prov);
  Best best;
  for (const auto& clause : output.prov.groups()) {
    std::map<VarId, bool> world;
    for (VarId v : all) {
      if (std::binary_search(clause.begin(), clause.end(), v))
        world[v] = false;
      else if (des.labeled(v))
        world[v] = des.label(v) == Tri::True;
      else
        world[v] = false;
    }
    LogProb score = witness_score(des, world);
    best.offer(score, std::move(world));
  }
  return {best.score, std::move(best.witness), MesMethod::CnfDual};
}

bool exists_zero_error_one_certificate(const AnnotatedDes& des,
                                       const AnnotatedOutput& output) {
  if (!is_known(output.derived) || output.derived != Tri::True)
    throw PreconditionError(
        "the zero-error certificate applies to 1-labeled outputs");
  for (const auto& term : output.prov.groups()) {
    bool cert = true;
    for (VarId v : term) {
      if (!(des.labeled(v) && des.label(v) == Tri::True && *des.err(v) == 0.0)) {
        cert = false;
        break;
      }
    }
    if (cert) return true;
  }
  return false;
}

MesScore mes_correct_ilp(const AnnotatedDes& des, const AnnotatedOutput& output) {
  if (output.derived != Tri::True)
    throw PreconditionError("mes_correct_ilp requires a 1-labeled output");
  if (output.prov.form() != ProvForm::Dnf)
    throw PreconditionError("mes_correct_ilp requires DNF provenance");
  if (exists_zero_error_one_certificate(des, output))
    return {LogProb::zero(), {}, MesMethod::Ilp};

  std::vector<VarId> all = vars(output.prov);
  double beta = 0.0;
  BinaryProgram program;
  program.variables = all;
  program.groups = output.prov.groups();
  std::vector<VarId> free_vars;
  for (VarId v : all) {
    if (!des.labeled(v)) {
      program.fixed[v] = false;  // unlabeled: probability-free, keep falsifying
      continue;
    }
    bool lab = des.label(v) == Tri::True;
    double p = *des.err(v);
    if (p == 0.0) {
      program.fixed[v] = lab;  // flipping a certain label has probability 0
      continue;
    }
    beta += lab ? std::log(p) : std::log1p(-p);
    program.objective[v] =
        lab ? std::log1p(-p) - std::log(p) : std::log(p) - std::log1p(-p);
    free_vars.push_back(v);
  }

  auto solution = solve_binary_max(program);
  if (!solution) return {LogProb::zero(), {}, MesMethod::Ilp};

  // Lexicographically smallest optimal world: greedily pin free variables to
  // 0 in ascending id order whenever the optimum survives.
  double xi = solution->objective;
  BinaryProgram pinned = program;
  for (VarId v : free_vars) {
    pinned.fixed[v] = false;
    auto trial = solve_binary_max(pinned);
    if (!trial || trial->objective < xi - kMesLogTol) pinned.fixed[v] = true;
  }
  std::map<VarId, bool> world;
  for (VarId v : all) world[v] = pinned.fixed.at(v);

  return {LogProb::from_log(xi + beta), std::move(world), MesMethod::Ilp};
}

MesScore mes_brute_force(const AnnotatedDes& des, const AnnotatedOutput& output,
                         int var_cap) {
  require_known(output);
  std::vector<VarId> all = vars(output.prov);
  if (static_cast<int>(all.size()) > var_cap)
    throw PreconditionError("mes_brute_force: " + std::to_string(all.size()) +
                            " variables exceed the cap of " +
                            std::to_string(var_cap));
  bool target = output.derived != Tri::True;  // flipped value of the formula
  size_t n = all.size();
  World world = World::constant(des.tuple_count(), false);
  Best best;
  for (uint64_t mask = 0; mask < (uint64_t{1} << n); ++mask) {
    std::map<VarId, bool> assignment;
    for (size_t i = 0; i < n; ++i) {
      bool bit = (mask >> (n - 1 - i)) & 1;  // ascending mask = lex order
      assignment[all[i]] = bit;
      world.set(all[i], bit);
    }
    if (eval_bool(output.prov, world) != target) continue;
    LogProb score = witness_score(des, assignment);
    best.offer(score, std::move(assignment));
  }
  if (!best.set) return {LogProb::zero(), {}, MesMethod::BruteForce};
  return {best.score, std::move(best.witness), MesMethod::BruteForce};
}

SetMes mes_set(const AnnotatedDes& des, std::span<const AnnotatedOutput> outputs) {
  if (outputs.empty())
    throw PreconditionError("mes_set requires at least one output");
  SetMes out;
  bool first = true;
  for (size_t i = 0; i < outputs.size(); ++i) {
    MesScore s = mes(des, outputs[i]);
    if (first || s.log_value > out.score.log_value) {
      out.score = std::move(s);
      out.argmax_index = i;
      first = false;
    }
  }
  return out;
}

std::optional<double> averaged_mes(LogProb score, int n) {
  if (score.is_zero() || n == 0) return std::nullopt;
  return std::exp(-score.log() / n);
}

int labeled_rel_count(const AnnotatedDes& des, const AnnotatedOutput& output) {
  int n = 0;
  for (TupleId t : rel_tuples(des, output))
    if (des.labeled(t)) ++n;
  return n;
}

}  // namespace veriscope
