#pragma once

#include <map>
#include <optional>
#include <span>
#include <vector>

#include "veriscope/log_prob.hpp"
#include "veriscope/model.hpp"
#include "veriscope/query.hpp"

namespace veriscope {

enum class MesMethod : uint8_t { TermScan, Ilp, CnfDual, BruteForce };

std::string to_string(MesMethod m);

// Maximal Error Score of one output: the maximal labeling probability over
// the worlds where the output's derived label is erroneous, restricted to the
// output's related tuples. worst_world is that world restricted to the
// provenance variables; empty when the score is the zero sentinel and no
// positive-probability flipping world exists.
struct MesScore {
  LogProb log_value;
  std::map<VarId, bool> worst_world;
  MesMethod method = MesMethod::TermScan;
};

// Log-space tolerance for score comparisons and tie detection.
inline constexpr double kMesLogTol = 1e-12;

// Tuples whose variables occur in the output's provenance (Rel).
std::vector<TupleId> rel_tuples(const AnnotatedDes& des,
                                const AnnotatedOutput& output);

// Dispatch: derived=0 -> term scan; derived=1 -> CNF dual for clause-form
// provenance, otherwise the 0-1 program. Unknown labels are a precondition
// error (the caller must re-verify first).
MesScore mes(const AnnotatedDes& des, const AnnotatedOutput& output);

// Incorrect-labeled output, DNF provenance: one candidate world per term
// (term variables 1, other labeled tuples at their labels, unlabeled 1);
// the maximum over terms is the MES.
MesScore mes_incorrect(const AnnotatedDes& des, const AnnotatedOutput& output);

// Correct-labeled output, DNF provenance: 0-1 maximization of the log
// labeling probability over label-flipping worlds; every term must keep at
// least one variable at 0.
MesScore mes_correct_ilp(const AnnotatedDes& des, const AnnotatedOutput& output);

// True iff some term is fully labeled correct with zero error probability;
// then no positive-probability world falsifies the provenance and the MES of
// a correct-labeled output is 0.
bool exists_zero_error_one_certificate(const AnnotatedDes& des,
                                       const AnnotatedOutput& output);

// Correct-labeled output, CNF provenance: dual term scan, one candidate world
// per clause (clause variables 0, other labeled tuples at their labels,
// unlabeled 0).
MesScore mes_cnf_dual(const AnnotatedDes& des, const AnnotatedOutput& output);

// Independent oracle: enumerates all assignments to the provenance variables
// (up to var_cap of them) and maximizes the labeling probability over the
// label-flipping ones.
MesScore mes_brute_force(const AnnotatedDes& des, const AnnotatedOutput& output,
                         int var_cap = 20);

struct SetMes {
  MesScore score;
  size_t argmax_index = 0;
};

// Max of per-output MES; all outputs must have known derived labels.
SetMes mes_set(const AnnotatedDes& des, std::span<const AnnotatedOutput> outputs);

// score^(-1/n) where n is the number of factors in the maximizing product
// (the labeled tuples of the Rel set); absent for zero scores or n = 0.
std::optional<double> averaged_mes(LogProb score, int n);

// Number of labeled tuples among rel_tuples (the n of averaged_mes).
int labeled_rel_count(const AnnotatedDes& des, const AnnotatedOutput& output);

}  // namespace veriscope
