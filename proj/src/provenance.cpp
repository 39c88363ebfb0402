#include "veriscope/provenance.hpp"

#include <algorithm>
#include <set>

#include "veriscope/errors.hpp"

namespace veriscope {

ProvExpr::ProvExpr(ProvForm form, std::vector<std::vector<VarId>> groups)
    : form_(form), groups_(std::move(groups)) {
  if (groups_.empty()) throw DataError("provenance expression has no groups");
  for (auto& g : groups_) {
    if (g.empty()) throw DataError("provenance expression has an empty group");
    std::sort(g.begin(), g.end());
    g.erase(std::unique(g.begin(), g.end()), g.end());
  }
}

bool ProvExpr::equivalent_structure(const ProvExpr& other) const {
  if (form_ != other.form_) return false;
  auto a = groups_, b = other.groups_;
  std::sort(a.begin(), a.end());
  std::sort(b.begin(), b.end());
  return a == b;
}

namespace {

Tri label_of(std::span<const Tri> labels, VarId v) {
  if (v < 0 || static_cast<size_t>(v) >= labels.size())
    throw PreconditionError("eval_k3: no label entry for variable " +
                            std::to_string(v));
  return labels[static_cast<size_t>(v)];
}

}  // namespace

Tri eval_k3(const ProvExpr& expr, std::span<const Tri> labels) {
  bool dnf = expr.form() == ProvForm::Dnf;
  Tri acc = dnf ? Tri::False : Tri::True;
  for (const auto& group : expr.groups()) {
    Tri g = dnf ? Tri::True : Tri::False;
    for (VarId v : group) {
      Tri l = label_of(labels, v);
      g = dnf ? k3_and(g, l) : k3_or(g, l);
    }
    acc = dnf ? k3_or(acc, g) : k3_and(acc, g);
    if (acc == (dnf ? Tri::True : Tri::False)) return acc;
  }
  return acc;
}

bool eval_bool(const ProvExpr& expr, const World& world) {
  bool dnf = expr.form() == ProvForm::Dnf;
  for (const auto& group : expr.groups()) {
    bool g = dnf;
    for (VarId v : group) {
      bool val = world(v);
      g = dnf ? (g && val) : (g || val);
    }
    if (g == dnf) return dnf;  // satisfied term / falsified clause decide
  }
  return !dnf;
}

std::vector<VarId> vars(const ProvExpr& expr) {
  std::set<VarId> s;
  for (const auto& g : expr.groups()) s.insert(g.begin(), g.end());
  return {s.begin(), s.end()};
}

ProvExpr normalize(const ProvExpr& expr, bool absorption) {
  std::vector<std::vector<VarId>> out;
  for (const auto& g : expr.groups()) {
    if (std::find(out.begin(), out.end(), g) == out.end()) out.push_back(g);
  }
  if (absorption) {
    // Drop any group that is a strict superset of another kept group.
    std::vector<std::vector<VarId>> kept;
    for (const auto& g : out) {
      bool absorbed = false;
      for (const auto& h : out) {
        if (h.size() < g.size() &&
            std::includes(g.begin(), g.end(), h.begin(), h.end())) {
          absorbed = true;
          break;
        }
      }
      if (!absorbed) kept.push_back(g);
    }
    out = std::move(kept);
  }
  return ProvExpr(expr.form(), std::move(out));
}

ProvExpr disjoin(const ProvExpr& a, const ProvExpr& b) {
  if (a.form() != ProvForm::Dnf || b.form() != ProvForm::Dnf)
    throw PreconditionError("disjoin requires two DNF expressions");
  auto groups = a.groups();
  groups.insert(groups.end(), b.groups().begin(), b.groups().end());
  return normalize(ProvExpr(ProvForm::Dnf, std::move(groups)));
}

std::string to_string(const ProvExpr& expr) {
  bool dnf = expr.form() == ProvForm::Dnf;
  std::string inner(1, dnf ? '&' : '|');
  std::string outer(1, dnf ? '|' : '&');
  std::string out;
  for (size_t i = 0; i < expr.groups().size(); ++i) {
    if (i) out += outer;
    out += '(';
    const auto& g = expr.groups()[i];
    for (size_t j = 0; j < g.size(); ++j) {
      if (j) out += inner;
      out += 'v' + std::to_string(g[j]);
    }
    out += ')';
  }
  return out;
}

ProvExpr parse_prov(const std::string& text) {
  size_t i = 0;
  auto fail = [&](const std::string& msg) {
    throw DataError("parse_prov: " + msg + " at offset " + std::to_string(i));
  };
  std::vector<std::vector<VarId>> groups;
  char inner = 0, outer = 0;
  while (i < text.size()) {
    if (text[i] != '(') fail("expected '('");
    ++i;
    std::vector<VarId> group;
    while (true) {
      if (i >= text.size() || text[i] != 'v') fail("expected variable");
      ++i;
      size_t start = i;
      while (i < text.size() && std::isdigit(static_cast<unsigned char>(text[i])))
        ++i;
      if (start == i) fail("expected variable number");
      group.push_back(static_cast<VarId>(std::stol(text.substr(start, i - start))));
      if (i < text.size() && (text[i] == '&' || text[i] == '|')) {
        if (inner && text[i] != inner) fail("mixed connectives inside group");
        inner = text[i];
        ++i;
        continue;
      }
      break;
    }
    if (i >= text.size() || text[i] != ')') fail("expected ')'");
    ++i;
    groups.push_back(std::move(group));
    if (i < text.size()) {
      if (text[i] != '&' && text[i] != '|') fail("expected group connective");
      if (outer && text[i] != outer) fail("mixed group connectives");
      outer = text[i];
      ++i;
    }
  }
  if (inner && outer && inner == outer)
    throw DataError("parse_prov: ambiguous form");
  ProvForm form = ProvForm::Dnf;
  if (outer == '&' || (!outer && inner == '|')) form = ProvForm::Cnf;
  return ProvExpr(form, std::move(groups));
}

}  // namespace veriscope
