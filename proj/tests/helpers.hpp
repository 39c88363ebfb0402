#pragma once

#include <map>
#include <memory>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "veriscope/experiments.hpp"
#include "veriscope/io.hpp"
#include "veriscope/mes.hpp"
#include "veriscope/provenance.hpp"
#include "veriscope/query.hpp"
#include "veriscope/reduce.hpp"
#include "veriscope/verifier.hpp"

namespace veriscope::testing {

// --- synthetic single-relation databases keyed by variable id ---

inline std::shared_ptr<const Database> make_plain_db(int n) {
  Relation rel;
  rel.schema.name = "T";
  rel.schema.columns = {{"v", ColumnType::Int}};
  for (int i = 0; i < n; ++i) {
    Tuple t;
    t.values = {Cell(static_cast<int64_t>(i))};
    rel.rows.push_back(std::move(t));
  }
  return std::make_shared<const Database>(std::vector<Relation>{std::move(rel)});
}

inline AnnotatedDes make_des(int n, const std::map<TupleId, Tri>& labels,
                             const std::map<TupleId, double>& errs) {
  return build_annotated_des(make_plain_db(n), labels, errs);
}

inline std::vector<Tri> labels_of(const AnnotatedDes& des) {
  std::vector<Tri> out(static_cast<size_t>(des.tuple_count()));
  for (TupleId t = 0; t < des.tuple_count(); ++t)
    out[static_cast<size_t>(t)] = des.label(t);
  return out;
}

inline AnnotatedOutput make_output(const AnnotatedDes& des, ProvExpr prov) {
  auto labels = labels_of(des);
  Tri derived = eval_k3(prov, labels);
  return AnnotatedOutput{{}, std::move(prov), derived};
}

// --- independent oracles ---

// Plain product form of the labeling probability (no log space).
inline double labeling_probability_oracle(const AnnotatedDes& des,
                                          const World& world,
                                          const std::vector<TupleId>& subset) {
  double p = 1.0;
  for (TupleId t : subset) {
    if (!des.labeled(t)) continue;
    double e = *des.err(t);
    bool match = (des.label(t) == Tri::True) == world(t);
    p *= match ? 1.0 - e : e;
  }
  return p;
}

// Binomial majority-failure tail via a Pascal triangle; independent of the
// lgamma-based implementation.
inline double binomial_majority_error_oracle(int n, double w) {
  std::vector<double> c(static_cast<size_t>(n) + 1, 0.0);
  c[0] = 1.0;
  for (int row = 1; row <= n; ++row)
    for (int k = row; k >= 1; --k) c[static_cast<size_t>(k)] += c[static_cast<size_t>(k - 1)];
  double s = 0.0;
  for (int k = (n + 1) / 2; k <= n; ++k)
    s += c[static_cast<size_t>(k)] * std::pow(w, k) * std::pow(1.0 - w, n - k);
  return s;
}

// Exhaustive MES over all assignments to the provenance variables,
// maximizing the plain-product labeling probability.
inline double brute_force_mes_oracle(const AnnotatedDes& des,
                                     const AnnotatedOutput& output) {
  auto vs = vars(output.prov);
  bool target = output.derived != Tri::True;
  World world = World::constant(des.tuple_count(), false);
  double best = 0.0;
  for (uint64_t mask = 0; mask < (uint64_t{1} << vs.size()); ++mask) {
    for (size_t i = 0; i < vs.size(); ++i)
      world.set(vs[i], (mask >> i) & 1);
    if (eval_bool(output.prov, world) != target) continue;
    best = std::max(best, labeling_probability_oracle(des, world, vs));
  }
  return best;
}

// --- random instances ---

inline ProvExpr random_monotone(Rng& rng, ProvForm form, int n_vars,
                                int max_groups, int max_size) {
  int m = 1 + static_cast<int>(rng.below(static_cast<uint64_t>(max_groups)));
  std::vector<std::vector<VarId>> groups;
  for (int g = 0; g < m; ++g) {
    int size = 1 + static_cast<int>(rng.below(
                       static_cast<uint64_t>(std::min(max_size, n_vars))));
    std::set<VarId> s;
    while (static_cast<int>(s.size()) < size)
      s.insert(static_cast<VarId>(rng.below(static_cast<uint64_t>(n_vars))));
    groups.emplace_back(s.begin(), s.end());
  }
  return ProvExpr(form, std::move(groups));
}

inline AnnotatedDes random_label_des(Rng& rng, int n_vars, double p_unknown,
                                     double p_zero_err) {
  std::map<TupleId, Tri> labels;
  std::map<TupleId, double> errs;
  for (TupleId t = 0; t < n_vars; ++t) {
    if (rng.bernoulli(p_unknown)) continue;
    labels[t] = tri_of(rng.bernoulli(0.5));
    errs[t] = rng.bernoulli(p_zero_err) ? 0.0 : rng.uniform(0.0, 0.5);
  }
  return make_des(n_vars, labels, errs);
}

struct RandomInstance {
  AnnotatedDes des;
  AnnotatedOutput output;
};

// Draws instances until the derived label is known (and matches `want` when
// specified). want == Tri::Unknown means "any known label".
inline std::optional<RandomInstance> random_known_instance(
    Rng& rng, ProvForm form, Tri want, int n_vars, int max_groups,
    int max_size, double p_unknown = 0.25, double p_zero_err = 0.15) {
  for (int attempt = 0; attempt < 400; ++attempt) {
    ProvExpr expr = random_monotone(rng, form, n_vars, max_groups, max_size);
    AnnotatedDes des = random_label_des(rng, n_vars, p_unknown, p_zero_err);
    Tri derived = eval_k3(expr, labels_of(des));
    if (!is_known(derived)) continue;
    if (want != Tri::Unknown && derived != want) continue;
    return RandomInstance{std::move(des),
                          AnnotatedOutput{{}, std::move(expr), derived}};
  }
  return std::nullopt;
}

// --- running-example fixture ---

struct RunningExample {
  std::vector<RelationSchema> schemas;
  std::shared_ptr<const Database> db;
  AnnotatedDes des;
  QueryPlan qex;
  QueryPlan qex2;
  std::vector<AnnotatedOutput> outputs;   // of qex: o1, o2, o3 in sorted order
  std::vector<AnnotatedOutput> outputs2;  // of qex2
  World truth;
};

inline RunningExample load_running_example(
    const std::string& root = "fixtures/running_example") {
  RunningExample ex;
  ex.schemas = load_schema(root + "/schema.txt");
  ex.db = load_database(ex.schemas, root);
  LabelFile lf = load_labels(root + "/labels.csv", ex.db->tuple_count());
  ex.des = build_annotated_des(ex.db, lf.labels, lf.errs);
  ex.qex = parse_query(read_text_file(root + "/qex.sql"), ex.schemas);
  ex.qex2 = parse_query(read_text_file(root + "/qex2.sql"), ex.schemas);
  ex.outputs = evaluate_with_provenance(ex.des, ex.qex);
  ex.outputs2 = evaluate_with_provenance(ex.des, ex.qex2);
  ex.truth = load_truth(root + "/truth.csv", ex.db->tuple_count());
  return ex;
}

// Variable ids of the running example, in ingestion order.
enum RunningVars : TupleId {
  A1 = 0, A2 = 1, A3 = 2, A4 = 3,
  R1 = 4, R2 = 5, R3 = 6, R4 = 7,
  E1 = 8, E2 = 9, E3 = 10, E4 = 11,
};

// Copy of a database keeping only rows whose tuple id satisfies `keep`.
// Tuple ids are reassigned; only values are meaningful afterwards.
inline std::shared_ptr<const Database> filter_database(
    const Database& db, const std::set<TupleId>& keep) {
  std::vector<Relation> rels;
  for (const auto& rel : db.relations()) {
    Relation out;
    out.schema = rel.schema;
    for (const auto& row : rel.rows)
      if (keep.count(row.id)) out.rows.push_back(row);
    rels.push_back(std::move(out));
  }
  return std::make_shared<const Database>(std::move(rels));
}

// Evaluates the plan over a plain database (no labels) and returns the bare
// output value rows.
inline std::set<std::vector<std::string>> plain_eval_values(
    std::shared_ptr<const Database> db, const QueryPlan& plan) {
  AnnotatedDes des = build_annotated_des(std::move(db), {}, {});
  std::set<std::vector<std::string>> out;
  for (const auto& o : evaluate_with_provenance(des, plan)) {
    std::vector<std::string> row;
    for (const auto& c : o.values) row.push_back(cell_to_string(c));
    out.insert(std::move(row));
  }
  return out;
}

inline std::vector<std::string> string_row(const AnnotatedOutput& o) {
  std::vector<std::string> row;
  for (const auto& c : o.values) row.push_back(cell_to_string(c));
  return row;
}

}  // namespace veriscope::testing
