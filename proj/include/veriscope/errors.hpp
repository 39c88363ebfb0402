#pragma once

#include <stdexcept>
#include <string>

namespace veriscope {

// Bad configuration, bad input files, schema violations. CLI exit code 2.
struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct DataError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Query text rejected; `position` is a byte offset into the query string.
struct QueryError : std::runtime_error {
  size_t position;
  QueryError(const std::string& msg, size_t pos)
      : std::runtime_error(msg + " (at offset " + std::to_string(pos) + ")"),
        position(pos) {}
};

// Operation called outside its contract (e.g. MES of an unknown-labeled
// output). CLI exit code 3.
struct PreconditionError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

}  // namespace veriscope
