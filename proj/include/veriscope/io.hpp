#pragma once

#include <map>
#include <memory>
#include <string>
#include <vector>

#include "veriscope/model.hpp"
#include "veriscope/tri.hpp"

namespace veriscope {

// Minimal RFC-4180-style CSV: comma separator, double-quote quoting with ""
// escapes, \n or \r\n line ends. First row is the header.
std::vector<std::vector<std::string>> parse_csv(const std::string& text);
std::vector<std::vector<std::string>> read_csv_file(const std::string& path);
std::string csv_escape(const std::string& field);
void write_csv_file(const std::string& path,
                    const std::vector<std::string>& header,
                    const std::vector<std::vector<std::string>>& rows);

std::string read_text_file(const std::string& path);
void write_text_file(const std::string& path, const std::string& content);

// Schema file: one [RelationName] section per relation (section order fixes
// tuple-id assignment order), "key = <column>" optionally naming the key,
// and one "<column> = <string|int|float|date>" line per CSV column in header
// order.
std::vector<RelationSchema> load_schema(const std::string& path);

// Loads <name>.csv from `dir` for every schema entry, typed per the schema.
std::shared_ptr<const Database> load_database(
    const std::vector<RelationSchema>& schemas, const std::string& dir);

struct LabelFile {
  std::map<TupleId, Tri> labels;
  std::map<TupleId, double> errs;
};

// Labels CSV: tuple_id,label,err with label in {0,1,unknown}; unknown rows
// leave err empty. Unlisted tuples stay unlabeled.
LabelFile load_labels(const std::string& path, TupleId tuple_count);

// Ground truth CSV: tuple_id,label in {0,1}; must cover every tuple.
World load_truth(const std::string& path, TupleId tuple_count);

// %.12g, the 12-significant-digit convention of all report files.
std::string format_double(double v);

}  // namespace veriscope
