#include "veriscope/model.hpp"

#include <cctype>
#include <charconv>
#include <cmath>
#include <cstdio>

namespace veriscope {

namespace {

bool all_digits(const std::string& s, size_t from, size_t to) {
  if (from >= to || to > s.size()) return false;
  for (size_t i = from; i < to; ++i)
    if (!std::isdigit(static_cast<unsigned char>(s[i]))) return false;
  return true;
}

int to_int(const std::string& s, size_t from, size_t to) {
  int v = 0;
  for (size_t i = from; i < to; ++i) v = v * 10 + (s[i] - '0');
  return v;
}

}  // namespace

Date parse_date(const std::string& text) {
  Date d;
  if (text.size() == 10 && text[4] == '-' && text[7] == '-' &&
      all_digits(text, 0, 4) && all_digits(text, 5, 7) && all_digits(text, 8, 10)) {
    d.year = to_int(text, 0, 4);
    d.month = to_int(text, 5, 7);
    d.day = to_int(text, 8, 10);
  } else if (text.size() == 10 && text[2] == '.' && text[5] == '.' &&
             all_digits(text, 0, 2) && all_digits(text, 3, 5) &&
             all_digits(text, 6, 10)) {
    d.day = to_int(text, 0, 2);
    d.month = to_int(text, 3, 5);
    d.year = to_int(text, 6, 10);
  } else {
    throw DataError("unparsable date: '" + text + "'");
  }
  if (d.month < 1 || d.month > 12 || d.day < 1 || d.day > 31)
    throw DataError("date out of range: '" + text + "'");
  return d;
}

std::string format_date(const Date& d) {
  char buf[16];
  std::snprintf(buf, sizeof(buf), "%02d.%02d.%04d", d.day, d.month, d.year);
  return buf;
}

ColumnType column_type_from_string(const std::string& s) {
  if (s == "string") return ColumnType::String;
  if (s == "int") return ColumnType::Int;
  if (s == "float") return ColumnType::Float;
  if (s == "date") return ColumnType::Date;
  throw ConfigError("unknown column type '" + s + "'");
}

std::string to_string(ColumnType t) {
  switch (t) {
    case ColumnType::String: return "string";
    case ColumnType::Int: return "int";
    case ColumnType::Float: return "float";
    default: return "date";
  }
}

ColumnType cell_type(const Cell& c) {
  switch (c.index()) {
    case 0: return ColumnType::String;
    case 1: return ColumnType::Int;
    case 2: return ColumnType::Float;
    default: return ColumnType::Date;
  }
}

std::string cell_to_string(const Cell& c) {
  switch (c.index()) {
    case 0: return std::get<std::string>(c);
    case 1: return std::to_string(std::get<int64_t>(c));
    case 2: {
      char buf[32];
      std::snprintf(buf, sizeof(buf), "%.12g", std::get<double>(c));
      return buf;
    }
    default: return format_date(std::get<Date>(c));
  }
}

Cell parse_cell(const std::string& text, ColumnType type) {
  switch (type) {
    case ColumnType::String:
      return text;
    case ColumnType::Int: {
      int64_t v = 0;
      auto [p, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
      if (ec != std::errc() || p != text.data() + text.size())
        throw DataError("unparsable int: '" + text + "'");
      return v;
    }
    case ColumnType::Float: {
      size_t pos = 0;
      double v;
      try {
        v = std::stod(text, &pos);
      } catch (const std::exception&) {
        throw DataError("unparsable float: '" + text + "'");
      }
      if (pos != text.size()) throw DataError("unparsable float: '" + text + "'");
      return v;
    }
    default:
      return parse_date(text);
  }
}

int RelationSchema::column_index(const std::string& column) const {
  for (size_t i = 0; i < columns.size(); ++i)
    if (columns[i].name == column) return static_cast<int>(i);
  return -1;
}

Database::Database(std::vector<Relation> relations)
    : relations_(std::move(relations)) {
  TupleId next = 0;
  for (size_t r = 0; r < relations_.size(); ++r) {
    auto& rel = relations_[r];
    for (size_t i = 0; i < rel.rows.size(); ++i) {
      if (rel.rows[i].values.size() != rel.schema.columns.size())
        throw DataError("relation " + rel.schema.name + ": row arity mismatch");
      rel.rows[i].id = next++;
      locator_.emplace_back(static_cast<int32_t>(r), static_cast<int32_t>(i));
    }
  }
}

int Database::relation_index(const std::string& name) const {
  for (size_t i = 0; i < relations_.size(); ++i)
    if (relations_[i].schema.name == name) return static_cast<int>(i);
  return -1;
}

const Relation* Database::find(const std::string& name) const {
  int i = relation_index(name);
  return i < 0 ? nullptr : &relations_[static_cast<size_t>(i)];
}

const Tuple& Database::tuple(TupleId t) const {
  auto [r, i] = locator_.at(static_cast<size_t>(t));
  return relations_[static_cast<size_t>(r)].rows[static_cast<size_t>(i)];
}

const Relation& Database::relation_of(TupleId t) const {
  auto [r, i] = locator_.at(static_cast<size_t>(t));
  (void)i;
  return relations_[static_cast<size_t>(r)];
}

void AnnotatedDes::set_verification(TupleId t, Tri label,
                                    std::optional<double> err) {
  if (t < 0 || t >= tuple_count())
    throw DataError("set_verification: unknown tuple id " + std::to_string(t));
  if (is_known(label)) {
    if (!err) throw DataError("labeled tuple requires an error probability");
    if (!(*err >= 0.0 && *err <= 0.5))
      throw DataError("error probability outside [0, 0.5]");
  } else if (err) {
    throw DataError("unlabeled tuple cannot carry an error probability");
  }
  labels_[static_cast<size_t>(t)] = label;
  errs_[static_cast<size_t>(t)] =
      err ? *err : std::numeric_limits<double>::quiet_NaN();
}

AnnotatedDes build_annotated_des(std::shared_ptr<const Database> db,
                                 const std::map<TupleId, Tri>& labels,
                                 const std::map<TupleId, double>& errs) {
  AnnotatedDes des;
  des.db_ = std::move(db);
  TupleId n = des.db_->tuple_count();
  des.labels_.assign(static_cast<size_t>(n), Tri::Unknown);
  des.errs_.assign(static_cast<size_t>(n),
                   std::numeric_limits<double>::quiet_NaN());
  for (const auto& [t, l] : labels) {
    if (t < 0 || t >= n)
      throw DataError("label for unknown tuple id " + std::to_string(t));
    des.labels_[static_cast<size_t>(t)] = l;
  }
  for (const auto& [t, e] : errs) {
    if (t < 0 || t >= n)
      throw DataError("err for unknown tuple id " + std::to_string(t));
    if (!is_known(des.labels_[static_cast<size_t>(t)]))
      throw DataError("err given for unlabeled tuple " + std::to_string(t));
    if (!(e >= 0.0 && e <= 0.5))
      throw DataError("err outside [0, 0.5] for tuple " + std::to_string(t));
    des.errs_[static_cast<size_t>(t)] = e;
  }
  for (TupleId t = 0; t < n; ++t) {
    if (is_known(des.labels_[static_cast<size_t>(t)]) &&
        std::isnan(des.errs_[static_cast<size_t>(t)]))
      throw DataError("labeled tuple " + std::to_string(t) + " has no err");
  }
  return des;
}

LogProb labeling_probability(const AnnotatedDes& des, const World& world,
                             std::span<const TupleId> subset) {
  LogProb p = LogProb::one();
  for (TupleId t : subset) {
    if (t < 0 || t >= des.tuple_count())
      throw PreconditionError("labeling_probability: tuple id out of range");
    Tri l = des.label(t);
    if (!is_known(l)) continue;
    double e = *des.err(t);
    bool match = (l == Tri::True) == world(t);
    p *= LogProb::from_linear(match ? 1.0 - e : e);
    if (p.is_zero()) return LogProb::zero();
  }
  return p;
}

Relation to_cell_level(const Relation& relation) {
  if (!relation.schema.key_column)
    throw PreconditionError("to_cell_level: relation " + relation.schema.name +
                            " has no key column");
  int key = relation.schema.column_index(*relation.schema.key_column);
  if (key < 0)
    throw PreconditionError("to_cell_level: key column '" +
                            *relation.schema.key_column + "' not in schema");
  ColumnType key_type = relation.schema.columns[static_cast<size_t>(key)].type;

  Relation out;
  out.schema.name = relation.schema.name + "C";
  out.schema.columns = {{"ID", key_type},
                        {"Attribute", ColumnType::String},
                        {"Value", ColumnType::String}};
  out.schema.key_column = std::nullopt;
  for (const auto& row : relation.rows) {
    for (size_t c = 0; c < relation.schema.columns.size(); ++c) {
      if (static_cast<int>(c) == key) continue;
      Tuple t;
      t.values = {row.values[static_cast<size_t>(key)],
                  Cell(relation.schema.columns[c].name),
                  Cell(cell_to_string(row.values[c]))};
      out.rows.push_back(std::move(t));
    }
  }
  return out;
}

}  // namespace veriscope
