#include "veriscope/ilp.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "veriscope/errors.hpp"

namespace veriscope {

namespace {

constexpr int kUndecided = -1;

struct Search {
  // Dense-index view of the program.
  std::vector<VarId> ids;                 // index -> var id
  std::vector<double> coef;               // index -> objective coefficient
  std::vector<int> value;                 // index -> 0/1/kUndecided
  std::vector<char> is_fixed;
  std::vector<std::vector<int>> groups;   // member indices
  std::vector<std::vector<int>> groups_of;  // var index -> group indices
  std::vector<int> ones;                  // per group: count of ones
  std::vector<int> undecided;             // per group: count of undecided

  double best_value = -std::numeric_limits<double>::infinity();
  std::vector<int> best_assignment;
  bool found = false;

  struct Change {
    int var;
  };
  std::vector<int> trail;

  bool assign(int v, int val) {
    value[static_cast<size_t>(v)] = val;
    trail.push_back(v);
    for (int g : groups_of[static_cast<size_t>(v)]) {
      undecided[static_cast<size_t>(g)]--;
      if (val == 1) {
        ones[static_cast<size_t>(g)]++;
        // bound is |group| - 1
        if (ones[static_cast<size_t>(g)] >=
            static_cast<int>(groups[static_cast<size_t>(g)].size()))
          return false;
      }
    }
    return true;
  }

  void undo_to(size_t mark) {
    while (trail.size() > mark) {
      int v = trail.back();
      trail.pop_back();
      int val = value[static_cast<size_t>(v)];
      value[static_cast<size_t>(v)] = kUndecided;
      for (int g : groups_of[static_cast<size_t>(v)]) {
        undecided[static_cast<size_t>(g)]++;
        if (val == 1) ones[static_cast<size_t>(g)]--;
      }
    }
  }

  // Zero-forces the remaining members of every saturated group. Returns
  // false on conflict (a saturated group whose member is already 1 is caught
  // in assign()).
  bool propagate() {
    bool changed = true;
    while (changed) {
      changed = false;
      for (size_t g = 0; g < groups.size(); ++g) {
        if (undecided[g] == 0) continue;
        if (ones[g] == static_cast<int>(groups[g].size()) - 1) {
          for (int v : groups[g]) {
            if (value[static_cast<size_t>(v)] == kUndecided) {
              if (!assign(v, 0)) return false;
              changed = true;
            }
          }
        }
      }
    }
    return true;
  }

  double decided_value() const {
    double s = 0.0;
    for (size_t v = 0; v < value.size(); ++v)
      if (value[v] == 1) s += coef[v];
    return s;
  }

  double optimistic_bound() const {
    double s = decided_value();
    for (size_t v = 0; v < value.size(); ++v)
      if (value[v] == kUndecided && coef[v] > 0) s += coef[v];
    return s;
  }

  int pick_branch_var() const {
    int best = -1;
    double best_mag = -1.0;
    for (size_t v = 0; v < value.size(); ++v) {
      if (value[v] != kUndecided) continue;
      double mag = std::fabs(coef[v]);
      if (mag > best_mag) {
        best_mag = mag;
        best = static_cast<int>(v);
      }
    }
    return best;
  }

  void dfs() {
    if (found && optimistic_bound() <= best_value) return;
    int v = pick_branch_var();
    if (v < 0) {
      double val = decided_value();
      if (!found || val > best_value) {
        found = true;
        best_value = val;
        best_assignment = value;
      }
      return;
    }
    int first = coef[static_cast<size_t>(v)] >= 0 ? 1 : 0;
    for (int attempt = 0; attempt < 2; ++attempt) {
      int bit = attempt == 0 ? first : 1 - first;
      size_t mark = trail.size();
      if (assign(v, bit) && propagate()) dfs();
      undo_to(mark);
    }
  }
};

}  // namespace

std::optional<IlpSolution> solve_binary_max(const BinaryProgram& program) {
  // Universe = declared variables plus anything mentioned elsewhere.
  std::vector<VarId> ids = program.variables;
  auto add = [&](VarId v) { ids.push_back(v); };
  for (const auto& [v, c] : program.objective) add(v);
  for (const auto& g : program.groups)
    for (VarId v : g) add(v);
  for (const auto& [v, b] : program.fixed) add(v);
  std::sort(ids.begin(), ids.end());
  ids.erase(std::unique(ids.begin(), ids.end()), ids.end());

  std::map<VarId, int> index;
  for (size_t i = 0; i < ids.size(); ++i) index[ids[i]] = static_cast<int>(i);

  Search s;
  s.ids = ids;
  s.coef.assign(ids.size(), 0.0);
  for (const auto& [v, c] : program.objective)
    s.coef[static_cast<size_t>(index[v])] = c;
  s.value.assign(ids.size(), kUndecided);
  s.is_fixed.assign(ids.size(), 0);
  s.groups_of.assign(ids.size(), {});
  for (const auto& g : program.groups) {
    std::vector<int> members;
    for (VarId v : g) members.push_back(index[v]);
    std::sort(members.begin(), members.end());
    members.erase(std::unique(members.begin(), members.end()), members.end());
    int gi = static_cast<int>(s.groups.size());
    for (int m : members) s.groups_of[static_cast<size_t>(m)].push_back(gi);
    s.groups.push_back(std::move(members));
  }
  s.ones.assign(s.groups.size(), 0);
  s.undecided.assign(s.groups.size(), 0);
  for (size_t g = 0; g < s.groups.size(); ++g)
    s.undecided[g] = static_cast<int>(s.groups[g].size());

  for (const auto& [v, b] : program.fixed) {
    int idx = index[v];
    s.is_fixed[static_cast<size_t>(idx)] = 1;
    if (!s.assign(idx, b ? 1 : 0)) return std::nullopt;
  }
  if (!s.propagate()) return std::nullopt;

  s.dfs();
  if (!s.found) return std::nullopt;

  IlpSolution sol;
  sol.objective = s.best_value;
  for (size_t i = 0; i < ids.size(); ++i)
    sol.assignment[ids[i]] = s.best_assignment[i] == 1;
  return sol;
}

std::string dump_program(const BinaryProgram& program) {
  std::ostringstream out;
  for (const auto& [v, c] : program.objective)
    out << "var " << v << ' ' << c << '\n';
  for (const auto& g : program.groups) {
    out << "group";
    for (VarId v : g) out << ' ' << v;
    out << '\n';
  }
  for (const auto& [v, b] : program.fixed)
    out << "fix " << v << ' ' << (b ? 1 : 0) << '\n';
  return out.str();
}

BinaryProgram parse_program(const std::string& text) {
  BinaryProgram p;
  std::istringstream in(text);
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty() || line[0] == '#') continue;
    std::istringstream ls(line);
    std::string kind;
    ls >> kind;
    if (kind == "var") {
      VarId v;
      double c;
      ls >> v >> c;
      p.objective[v] = c;
    } else if (kind == "group") {
      std::vector<VarId> g;
      VarId v;
      while (ls >> v) g.push_back(v);
      p.groups.push_back(std::move(g));
    } else if (kind == "fix") {
      VarId v;
      int b;
      ls >> v >> b;
      p.fixed[v] = b != 0;
    } else {
      throw DataError("parse_program: unknown line kind '" + kind + "'");
    }
  }
  return p;
}

}  // namespace veriscope
