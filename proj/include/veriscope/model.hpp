#pragma once

#include <compare>
#include <cstdint>
#include <map>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include "veriscope/errors.hpp"
#include "veriscope/log_prob.hpp"
#include "veriscope/tri.hpp"

namespace veriscope {

using TupleId = int32_t;
// Variable ids coincide with tuple ids (the L bijection is the identity).
using VarId = int32_t;

struct Date {
  int year = 0;
  int month = 0;
  int day = 0;
  auto operator<=>(const Date&) const = default;
};

// Accepts ISO-8601 (2018-03-04) or DD.MM.YYYY (04.03.2018).
Date parse_date(const std::string& text);
std::string format_date(const Date& d);  // DD.MM.YYYY

enum class ColumnType : uint8_t { String, Int, Float, Date };

ColumnType column_type_from_string(const std::string& s);
std::string to_string(ColumnType t);

using Cell = std::variant<std::string, int64_t, double, Date>;

ColumnType cell_type(const Cell& c);
std::string cell_to_string(const Cell& c);
Cell parse_cell(const std::string& text, ColumnType type);

struct ColumnSchema {
  std::string name;
  ColumnType type = ColumnType::String;
};

struct RelationSchema {
  std::string name;
  std::vector<ColumnSchema> columns;
  std::optional<std::string> key_column;

  int column_index(const std::string& column) const;
};

struct Tuple {
  TupleId id = -1;
  std::vector<Cell> values;
};

struct Relation {
  RelationSchema schema;
  std::vector<Tuple> rows;
};

// Relational database. Tuple ids are dense integers assigned here, in
// (relation, row) order, so a given set of input files always produces the
// same ids.
class Database {
 public:
  Database() = default;
  explicit Database(std::vector<Relation> relations);

  const std::vector<Relation>& relations() const { return relations_; }
  int relation_index(const std::string& name) const;
  const Relation* find(const std::string& name) const;

  TupleId tuple_count() const { return static_cast<TupleId>(locator_.size()); }
  const Tuple& tuple(TupleId t) const;
  const Relation& relation_of(TupleId t) const;

 private:
  std::vector<Relation> relations_;
  std::vector<std::pair<int32_t, int32_t>> locator_;  // id -> (relation, row)
};

// A possible world: a total Boolean labeling of the database.
class World {
 public:
  World() = default;
  explicit World(std::vector<uint8_t> bits) : bits_(std::move(bits)) {}
  static World constant(TupleId n, bool value) {
    return World(std::vector<uint8_t>(static_cast<size_t>(n), value ? 1 : 0));
  }

  bool operator()(TupleId t) const { return bits_[static_cast<size_t>(t)] != 0; }
  void set(TupleId t, bool v) { bits_[static_cast<size_t>(t)] = v ? 1 : 0; }
  TupleId size() const { return static_cast<TupleId>(bits_.size()); }
  bool operator==(const World&) const = default;

 private:
  std::vector<uint8_t> bits_;
};

// Annotated DES: the database plus a partial 3-valued correctness labeling
// and, for every labeled tuple, an error probability in [0, 0.5].
// The database is shared and never mutated; copying an AnnotatedDes copies
// only the label/err vectors, which keeps what-if probes (err := 0, err := q)
// cheap.
class AnnotatedDes {
 public:
  AnnotatedDes() = default;

  const Database& db() const { return *db_; }
  const std::shared_ptr<const Database>& db_ptr() const { return db_; }
  TupleId tuple_count() const { return db_->tuple_count(); }

  Tri label(TupleId t) const { return labels_[static_cast<size_t>(t)]; }
  bool labeled(TupleId t) const { return is_known(label(t)); }
  std::optional<double> err(TupleId t) const {
    if (!labeled(t)) return std::nullopt;
    return errs_[static_cast<size_t>(t)];
  }

  // Overwrites one tuple's verification state. err must accompany a known
  // label and lie in [0, 0.5]; an Unknown label must come without err.
  void set_verification(TupleId t, Tri label, std::optional<double> err);

  friend AnnotatedDes build_annotated_des(std::shared_ptr<const Database> db,
                                          const std::map<TupleId, Tri>& labels,
                                          const std::map<TupleId, double>& errs);

 private:
  std::shared_ptr<const Database> db_;
  std::vector<Tri> labels_;
  std::vector<double> errs_;  // NaN where unlabeled
};

// Validates and assembles an AnnotatedDes. Rejects labels on unknown tuple
// ids, err outside [0, 0.5], err on unlabeled tuples, and labeled tuples
// without err.
AnnotatedDes build_annotated_des(std::shared_ptr<const Database> db,
                                 const std::map<TupleId, Tri>& labels,
                                 const std::map<TupleId, double>& errs);

// Probability of observing the DES labels given the world, restricted to
// `subset` (Eq. of the labeling probability): matching labels contribute
// 1 - err, mismatching ones err, unlabeled tuples nothing. An err-0 mismatch
// yields the zero sentinel.
LogProb labeling_probability(const AnnotatedDes& des, const World& world,
                             std::span<const TupleId> subset);

// Tuple-level -> cell-level triplet transform: one (ID, Attribute, Value) row
// per non-key cell. Requires a designated key column.
Relation to_cell_level(const Relation& relation);

}  // namespace veriscope
