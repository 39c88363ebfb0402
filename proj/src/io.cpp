#include "veriscope/io.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>

#include "veriscope/errors.hpp"

namespace veriscope {

std::vector<std::vector<std::string>> parse_csv(const std::string& text) {
  std::vector<std::vector<std::string>> rows;
  std::vector<std::string> row;
  std::string field;
  bool quoted = false;
  bool field_started = false;
  size_t i = 0;
  auto end_field = [&] {
    row.push_back(field);
    field.clear();
    field_started = false;
  };
  auto end_row = [&] {
    end_field();
    rows.push_back(row);
    row.clear();
  };
  while (i < text.size()) {
    char c = text[i];
    if (quoted) {
      if (c == '"') {
        if (i + 1 < text.size() && text[i + 1] == '"') {
          field += '"';
          i += 2;
          continue;
        }
        quoted = false;
        ++i;
        continue;
      }
      field += c;
      ++i;
      continue;
    }
    if (c == '"' && !field_started) {
      quoted = true;
      field_started = true;
      ++i;
      continue;
    }
    if (c == ',') {
      end_field();
      ++i;
      continue;
    }
    if (c == '\n' || c == '\r') {
      if (c == '\r' && i + 1 < text.size() && text[i + 1] == '\n') ++i;
      ++i;
      end_row();
      continue;
    }
    field += c;
    field_started = true;
    ++i;
  }
  if (quoted) throw DataError("unterminated quoted CSV field");
  if (field_started || !row.empty()) end_row();
  return rows;
}

std::string read_text_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("cannot open file: " + path);
  std::ostringstream out;
  out << in.rdbuf();
  return out.str();
}

void write_text_file(const std::string& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ConfigError("cannot write file: " + path);
  out << content;
}

std::vector<std::vector<std::string>> read_csv_file(const std::string& path) {
  return parse_csv(read_text_file(path));
}

std::string csv_escape(const std::string& field) {
  if (field.find_first_of(",\"\n\r") == std::string::npos) return field;
  std::string out = "\"";
  for (char c : field) {
    if (c == '"') out += "\"\"";
    else out += c;
  }
  out += '"';
  return out;
}

void write_csv_file(const std::string& path,
                    const std::vector<std::string>& header,
                    const std::vector<std::vector<std::string>>& rows) {
  std::ostringstream out;
  auto emit = [&](const std::vector<std::string>& fields) {
    for (size_t i = 0; i < fields.size(); ++i) {
      if (i) out << ',';
      out << csv_escape(fields[i]);
    }
    out << '\n';
  };
  emit(header);
  for (const auto& r : rows) emit(r);
  write_text_file(path, out.str());
}

namespace {

std::string trim(const std::string& s) {
  size_t a = s.find_first_not_of(" \t\r\n");
  if (a == std::string::npos) return "";
  size_t b = s.find_last_not_of(" \t\r\n");
  return s.substr(a, b - a + 1);
}

}  // namespace

std::vector<RelationSchema> load_schema(const std::string& path) {
  std::istringstream in(read_text_file(path));
  std::vector<RelationSchema> schemas;
  RelationSchema* current = nullptr;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    std::string s = trim(line);
    if (s.empty() || s[0] == '#') continue;
    if (s.front() == '[' && s.back() == ']') {
      RelationSchema rs;
      rs.name = trim(s.substr(1, s.size() - 2));
      if (rs.name.empty())
        throw ConfigError(path + ":" + std::to_string(lineno) +
                          ": empty relation name");
      schemas.push_back(rs);
      current = &schemas.back();
      continue;
    }
    size_t eq = s.find('=');
    if (eq == std::string::npos || !current)
      throw ConfigError(path + ":" + std::to_string(lineno) +
                        ": expected [Relation] or key = value");
    std::string key = trim(s.substr(0, eq));
    std::string value = trim(s.substr(eq + 1));
    if (key == "key") {
      current->key_column = value;
    } else {
      current->columns.push_back({key, column_type_from_string(value)});
    }
  }
  if (schemas.empty()) throw ConfigError(path + ": no relations declared");
  for (const auto& rs : schemas) {
    if (rs.columns.empty())
      throw ConfigError(path + ": relation " + rs.name + " has no columns");
    if (rs.key_column && rs.column_index(*rs.key_column) < 0)
      throw ConfigError(path + ": relation " + rs.name + " key column '" +
                        *rs.key_column + "' not declared");
  }
  return schemas;
}

std::shared_ptr<const Database> load_database(
    const std::vector<RelationSchema>& schemas, const std::string& dir) {
  std::vector<Relation> relations;
  for (const auto& schema : schemas) {
    std::string path = dir + "/" + schema.name + ".csv";
    auto rows = read_csv_file(path);
    if (rows.empty()) throw DataError(path + ": missing header row");
    const auto& header = rows.front();
    if (header.size() != schema.columns.size())
      throw DataError(path + ": header arity differs from schema");
    for (size_t c = 0; c < header.size(); ++c) {
      if (trim(header[c]) != schema.columns[c].name)
        throw DataError(path + ": header column '" + header[c] +
                        "' does not match schema column '" +
                        schema.columns[c].name + "'");
    }
    Relation rel;
    rel.schema = schema;
    for (size_t r = 1; r < rows.size(); ++r) {
      if (rows[r].size() != schema.columns.size())
        throw DataError(path + ": row " + std::to_string(r + 1) +
                        " arity mismatch");
      Tuple t;
      for (size_t c = 0; c < rows[r].size(); ++c)
        t.values.push_back(parse_cell(rows[r][c], schema.columns[c].type));
      rel.rows.push_back(std::move(t));
    }
    relations.push_back(std::move(rel));
  }
  return std::make_shared<const Database>(std::move(relations));
}

LabelFile load_labels(const std::string& path, TupleId tuple_count) {
  auto rows = read_csv_file(path);
  LabelFile out;
  if (rows.empty()) return out;  // empty file: everything unlabeled
  size_t start = 0;
  if (!rows[0].empty() && rows[0][0] == "tuple_id") start = 1;
  for (size_t r = start; r < rows.size(); ++r) {
    const auto& row = rows[r];
    if (row.size() < 2)
      throw DataError(path + ": row " + std::to_string(r + 1) +
                      " needs tuple_id,label[,err]");
    TupleId t = static_cast<TupleId>(std::stol(row[0]));
    if (t < 0 || t >= tuple_count)
      throw DataError(path + ": unknown tuple id " + row[0]);
    const std::string& label = row[1];
    std::string err = row.size() > 2 ? trim(row[2]) : "";
    if (label == "unknown") {
      if (!err.empty())
        throw DataError(path + ": unknown label cannot carry err (tuple " +
                        row[0] + ")");
      out.labels[t] = Tri::Unknown;
      continue;
    }
    if (label != "0" && label != "1")
      throw DataError(path + ": label must be 0, 1, or unknown (tuple " +
                      row[0] + ")");
    if (err.empty())
      throw DataError(path + ": labeled tuple " + row[0] + " needs err");
    out.labels[t] = label == "1" ? Tri::True : Tri::False;
    out.errs[t] = std::stod(err);
  }
  return out;
}

World load_truth(const std::string& path, TupleId tuple_count) {
  auto rows = read_csv_file(path);
  std::vector<uint8_t> bits(static_cast<size_t>(tuple_count), 0);
  std::vector<uint8_t> seen(static_cast<size_t>(tuple_count), 0);
  size_t start = 0;
  if (!rows.empty() && !rows[0].empty() && rows[0][0] == "tuple_id") start = 1;
  for (size_t r = start; r < rows.size(); ++r) {
    const auto& row = rows[r];
    if (row.size() < 2)
      throw DataError(path + ": row " + std::to_string(r + 1) +
                      " needs tuple_id,label");
    TupleId t = static_cast<TupleId>(std::stol(row[0]));
    if (t < 0 || t >= tuple_count)
      throw DataError(path + ": unknown tuple id " + row[0]);
    if (row[1] != "0" && row[1] != "1")
      throw DataError(path + ": ground-truth label must be 0 or 1");
    bits[static_cast<size_t>(t)] = row[1] == "1" ? 1 : 0;
    seen[static_cast<size_t>(t)] = 1;
  }
  for (TupleId t = 0; t < tuple_count; ++t)
    if (!seen[static_cast<size_t>(t)])
      throw DataError(path + ": ground truth missing tuple " +
                      std::to_string(t));
  return World(std::move(bits));
}

std::string format_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.12g", v);
  return buf;
}

}  // namespace veriscope
