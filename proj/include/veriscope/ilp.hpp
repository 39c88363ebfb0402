#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "veriscope/model.hpp"

namespace veriscope {

// 0-1 maximization instance of the class needed by the correct-output MES
// reduction: a linear objective, one "not all ones" cardinality constraint
// per group (bound = |group| - 1), and variables fixed to constants.
struct BinaryProgram {
  std::map<VarId, double> objective;          // missing vars default to 0
  std::vector<std::vector<VarId>> groups;
  std::map<VarId, bool> fixed;
  std::vector<VarId> variables;               // universe; must cover the above
};

struct IlpSolution {
  double objective = 0.0;
  std::map<VarId, bool> assignment;           // total over `variables`
};

// Exact depth-first branch and bound. Upper bound: decided contribution plus
// the positive part of undecided coefficients. A group with |group|-1 ones
// forces its remaining undecided variables to 0. Branches on the undecided
// variable with the largest |c| (ties: smallest id), trying the sign of c
// first. Deterministic for identical input; ties among optima resolve to the
// first assignment found in this order. nullopt = infeasible.
std::optional<IlpSolution> solve_binary_max(const BinaryProgram& program);

// Line-oriented dump/parse for test fixtures:
//   var <id> <coefficient>
//   group <id> <id> ...
//   fix <id> <0|1>
std::string dump_program(const BinaryProgram& program);
BinaryProgram parse_program(const std::string& text);

}  // namespace veriscope
