#pragma once

#include <span>
#include <string>
#include <vector>

#include "veriscope/model.hpp"
#include "veriscope/tri.hpp"

namespace veriscope {

enum class ProvForm : uint8_t { Dnf, Cnf };

// Monotone provenance expression over tuple variables: a disjunction of
// conjunctive terms (DNF) or a conjunction of disjunctive clauses (CNF).
// Groups are kept sorted and duplicate-free internally; the group *sequence*
// is preserved as given (normalize() dedupes identical groups).
class ProvExpr {
 public:
  ProvExpr(ProvForm form, std::vector<std::vector<VarId>> groups);

  ProvForm form() const { return form_; }
  const std::vector<std::vector<VarId>>& groups() const { return groups_; }

  static ProvExpr dnf(std::vector<std::vector<VarId>> groups) {
    return ProvExpr(ProvForm::Dnf, std::move(groups));
  }
  static ProvExpr cnf(std::vector<std::vector<VarId>> groups) {
    return ProvExpr(ProvForm::Cnf, std::move(groups));
  }

  // Structural equality after sorting the group sequence.
  bool equivalent_structure(const ProvExpr& other) const;

 private:
  ProvForm form_;
  std::vector<std::vector<VarId>> groups_;
};

// K3 value under a (possibly partial) labeling indexed by variable id.
// Every variable of the expression must be covered by `labels`.
Tri eval_k3(const ProvExpr& expr, std::span<const Tri> labels);

// Classical monotone evaluation under a total world.
bool eval_bool(const ProvExpr& expr, const World& world);

// Sorted, duplicate-free union of all groups.
std::vector<VarId> vars(const ProvExpr& expr);

// Removes exactly duplicated groups. Absorption (dropping supersets of other
// groups) changes vars() and therefore Rel and MES; it is opt-in and OFF by
// default.
ProvExpr normalize(const ProvExpr& expr, bool absorption = false);

// Disjunction of two DNF expressions: concatenated term lists, then dedupe.
ProvExpr disjoin(const ProvExpr& a, const ProvExpr& b);

// Textual form: DNF "(v1&v2)|(v3)", CNF "(v1|v2)&(v3)".
std::string to_string(const ProvExpr& expr);
ProvExpr parse_prov(const std::string& text);

}  // namespace veriscope
