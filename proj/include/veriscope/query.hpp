#pragma once

#include <memory>
#include <string>
#include <variant>
#include <vector>

#include "veriscope/model.hpp"
#include "veriscope/provenance.hpp"

namespace veriscope {

// Comparison operator of a predicate atom.
enum class CmpOp : uint8_t { Eq, Ne, Lt, Le, Gt, Ge, ILike };

// Scalar operand: a resolved column, a literal, or YEAR(column) on a date
// column (also written DATE_PART('YEAR', column)).
struct ScalarExpr {
  enum class Kind : uint8_t { Column, Literal, Year } kind = Kind::Literal;
  int column_offset = -1;  // position in the block's concatenated row
  Cell literal;
  ColumnType type = ColumnType::String;  // result type
  std::string display;                   // original text, for diagnostics
};

struct Atom {
  ScalarExpr lhs;
  CmpOp op = CmpOp::Eq;
  ScalarExpr rhs;
};

struct PlanNode;
using PlanPtr = std::unique_ptr<PlanNode>;

struct ScanOp {
  std::string relation;
  std::string alias;
  int relation_index = -1;
};

// n-ary cross product; predicates live in the Select above it.
struct JoinOp {
  std::vector<PlanPtr> inputs;
};

struct SelectOp {
  PlanPtr input;
  std::vector<Atom> atoms;  // conjunction
};

struct ProjectOp {
  PlanPtr input;
  std::vector<int> columns;  // offsets into the input row
  bool distinct = true;
};

struct UnionOp {
  std::vector<PlanPtr> inputs;
};

struct PlanNode {
  std::variant<ScanOp, JoinOp, SelectOp, ProjectOp, UnionOp> op;
};

struct QueryPlan {
  PlanPtr root;
  std::vector<std::string> output_columns;
  std::vector<ColumnType> output_types;
};

// Output tuple with its DNF provenance and the 3-valued label derived from
// the current input labels.
struct AnnotatedOutput {
  std::vector<Cell> values;
  ProvExpr prov;
  Tri derived = Tri::Unknown;
};

// Parses and binds the SPJU subset
//   SELECT DISTINCT cols FROM rel [AS a] (, rel [AS a])*
//     [WHERE atom (AND atom)*]  { UNION ... }
// against the given schemas. Throws QueryError with a byte offset on syntax
// errors, unknown relations/columns, and atom type mismatches.
QueryPlan parse_query(const std::string& text,
                      const std::vector<RelationSchema>& schemas);

// Set-semantics evaluation with provenance: one DNF term per derivation (one
// variable per joined base tuple), duplicate terms deduped, derived label by
// K3 evaluation, outputs sorted by values.
std::vector<AnnotatedOutput> evaluate_with_provenance(const AnnotatedDes& des,
                                                      const QueryPlan& plan);

// K3 value of the output's provenance under the given labels.
Tri derive_output_label(const AnnotatedOutput& output,
                        std::span<const Tri> labels);

// Replaces each output's derived label with its K3 value under des's current
// labels (used after verification steps; the provenance itself is static).
void refresh_derived_labels(const AnnotatedDes& des,
                            std::vector<AnnotatedOutput>& outputs);

bool ilike_match(const std::string& text, const std::string& pattern);

}  // namespace veriscope
