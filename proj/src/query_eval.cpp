#include <algorithm>
#include <cctype>
#include <map>

#include "veriscope/errors.hpp"
#include "veriscope/query.hpp"

namespace veriscope {

namespace {

struct Row {
  std::vector<Cell> cells;
  std::vector<TupleId> derivation;  // sorted, unique
};

// Cells order first by type tag, then by value; gives the deterministic
// output ordering and the grouping key.
int compare_cells(const Cell& a, const Cell& b) {
  if (a.index() != b.index()) return a.index() < b.index() ? -1 : 1;
  switch (a.index()) {
    case 0: {
      const auto& x = std::get<std::string>(a);
      const auto& y = std::get<std::string>(b);
      return x < y ? -1 : (y < x ? 1 : 0);
    }
    case 1: {
      auto x = std::get<int64_t>(a), y = std::get<int64_t>(b);
      return x < y ? -1 : (y < x ? 1 : 0);
    }
    case 2: {
      auto x = std::get<double>(a), y = std::get<double>(b);
      return x < y ? -1 : (y < x ? 1 : 0);
    }
    default: {
      const auto& x = std::get<Date>(a);
      const auto& y = std::get<Date>(b);
      return x < y ? -1 : (y < x ? 1 : 0);
    }
  }
}

int compare_rows(const std::vector<Cell>& a, const std::vector<Cell>& b) {
  for (size_t i = 0; i < std::min(a.size(), b.size()); ++i) {
    int c = compare_cells(a[i], b[i]);
    if (c) return c;
  }
  return a.size() < b.size() ? -1 : (a.size() > b.size() ? 1 : 0);
}

struct RowLess {
  bool operator()(const std::vector<Cell>& a,
                  const std::vector<Cell>& b) const {
    return compare_rows(a, b) < 0;
  }
};

double as_double(const Cell& c) {
  return c.index() == 1 ? static_cast<double>(std::get<int64_t>(c))
                        : std::get<double>(c);
}

Cell operand_value(const ScalarExpr& e, const std::vector<Cell>& row) {
  switch (e.kind) {
    case ScalarExpr::Kind::Literal:
      return e.literal;
    case ScalarExpr::Kind::Column:
      return row[static_cast<size_t>(e.column_offset)];
    default:  // Year
      return Cell(static_cast<int64_t>(
          std::get<Date>(row[static_cast<size_t>(e.column_offset)]).year));
  }
}

bool atom_holds(const Atom& a, const std::vector<Cell>& row) {
  Cell l = operand_value(a.lhs, row);
  Cell r = operand_value(a.rhs, row);
  if (a.op == CmpOp::ILike)
    return ilike_match(std::get<std::string>(l), std::get<std::string>(r));
  int c;
  if (l.index() != r.index()) {
    // mixed int/float, validated at bind time
    double x = as_double(l), y = as_double(r);
    c = x < y ? -1 : (x > y ? 1 : 0);
  } else {
    c = compare_cells(l, r);
  }
  switch (a.op) {
    case CmpOp::Eq: return c == 0;
    case CmpOp::Ne: return c != 0;
    case CmpOp::Lt: return c < 0;
    case CmpOp::Le: return c <= 0;
    case CmpOp::Gt: return c > 0;
    default: return c >= 0;  // Ge
  }
}

std::vector<TupleId> merge_derivations(const std::vector<TupleId>& a,
                                       const std::vector<TupleId>& b) {
  std::vector<TupleId> out;
  out.reserve(a.size() + b.size());
  std::set_union(a.begin(), a.end(), b.begin(), b.end(),
                 std::back_inserter(out));
  return out;
}

std::vector<Row> eval_node(const AnnotatedDes& des, const PlanNode& node);

std::vector<Row> eval_scan(const AnnotatedDes& des, const ScanOp& scan) {
  const auto& relations = des.db().relations();
  if (scan.relation_index < 0 ||
      static_cast<size_t>(scan.relation_index) >= relations.size() ||
      relations[static_cast<size_t>(scan.relation_index)].schema.name !=
          scan.relation)
    throw PreconditionError("plan does not match the database: relation '" +
                            scan.relation + "'");
  const Relation& rel = relations[static_cast<size_t>(scan.relation_index)];
  std::vector<Row> rows;
  rows.reserve(rel.rows.size());
  for (const auto& t : rel.rows) rows.push_back({t.values, {t.id}});
  return rows;
}

std::vector<Row> eval_join(const AnnotatedDes& des, const JoinOp& join) {
  std::vector<Row> acc = eval_node(des, *join.inputs.front());
  for (size_t i = 1; i < join.inputs.size(); ++i) {
    std::vector<Row> right = eval_node(des, *join.inputs[i]);
    std::vector<Row> next;
    next.reserve(acc.size() * right.size());
    for (const auto& a : acc) {
      for (const auto& b : right) {
        Row r;
        r.cells = a.cells;
        r.cells.insert(r.cells.end(), b.cells.begin(), b.cells.end());
        r.derivation = merge_derivations(a.derivation, b.derivation);
        next.push_back(std::move(r));
      }
    }
    acc = std::move(next);
  }
  return acc;
}

std::vector<Row> eval_node(const AnnotatedDes& des, const PlanNode& node) {
  if (const auto* scan = std::get_if<ScanOp>(&node.op)) return eval_scan(des, *scan);
  if (const auto* join = std::get_if<JoinOp>(&node.op)) return eval_join(des, *join);
  if (const auto* sel = std::get_if<SelectOp>(&node.op)) {
    std::vector<Row> rows = eval_node(des, *sel->input);
    std::vector<Row> kept;
    for (auto& r : rows) {
      bool ok = true;
      for (const auto& a : sel->atoms)
        if (!atom_holds(a, r.cells)) {
          ok = false;
          break;
        }
      if (ok) kept.push_back(std::move(r));
    }
    return kept;
  }
  if (const auto* proj = std::get_if<ProjectOp>(&node.op)) {
    std::vector<Row> rows = eval_node(des, *proj->input);
    for (auto& r : rows) {
      std::vector<Cell> cells;
      cells.reserve(proj->columns.size());
      for (int c : proj->columns) cells.push_back(r.cells[static_cast<size_t>(c)]);
      r.cells = std::move(cells);
    }
    return rows;
  }
  const auto& u = std::get<UnionOp>(node.op);
  std::vector<Row> rows;
  for (const auto& input : u.inputs) {
    auto part = eval_node(des, *input);
    rows.insert(rows.end(), std::make_move_iterator(part.begin()),
                std::make_move_iterator(part.end()));
  }
  return rows;
}

std::vector<Tri> label_snapshot(const AnnotatedDes& des) {
  std::vector<Tri> labels(static_cast<size_t>(des.tuple_count()));
  for (TupleId t = 0; t < des.tuple_count(); ++t)
    labels[static_cast<size_t>(t)] = des.label(t);
  return labels;
}

}  // namespace

bool ilike_match(const std::string& text, const std::string& pattern) {
  auto low = [](char c) {
    return static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  };
  size_t t = 0, p = 0;
  size_t star = std::string::npos, mark = 0;
  while (t < text.size()) {
    if (p < pattern.size() && pattern[p] == '%') {
      star = p++;
      mark = t;
    } else if (p < pattern.size() && low(pattern[p]) == low(text[t])) {
      ++p;
      ++t;
    } else if (star != std::string::npos) {
      p = star + 1;
      t = ++mark;
    } else {
      return false;
    }
  }
  while (p < pattern.size() && pattern[p] == '%') ++p;
  return p == pattern.size();
}

std::vector<AnnotatedOutput> evaluate_with_provenance(const AnnotatedDes& des,
                                                      const QueryPlan& plan) {
  std::vector<Row> rows = eval_node(des, *plan.root);

  // Group derivations by projected values; terms deduped, first-seen order.
  std::map<std::vector<Cell>, std::vector<std::vector<VarId>>, RowLess> grouped;
  for (auto& r : rows) {
    auto& terms = grouped[r.cells];
    std::vector<VarId> term(r.derivation.begin(), r.derivation.end());
    if (std::find(terms.begin(), terms.end(), term) == terms.end())
      terms.push_back(std::move(term));
  }

  std::vector<Tri> labels = label_snapshot(des);
  std::vector<AnnotatedOutput> outputs;
  outputs.reserve(grouped.size());
  for (auto& [values, terms] : grouped) {
    ProvExpr prov(ProvForm::Dnf, terms);
    Tri derived = eval_k3(prov, labels);
    outputs.push_back({values, std::move(prov), derived});
  }
  return outputs;  // map iteration is already sorted by values
}

Tri derive_output_label(const AnnotatedOutput& output,
                        std::span<const Tri> labels) {
  return eval_k3(output.prov, labels);
}

void refresh_derived_labels(const AnnotatedDes& des,
                            std::vector<AnnotatedOutput>& outputs) {
  std::vector<Tri> labels = label_snapshot(des);
  for (auto& o : outputs) o.derived = eval_k3(o.prov, labels);
}

}  // namespace veriscope
