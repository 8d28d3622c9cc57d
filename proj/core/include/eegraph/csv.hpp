#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "eegraph/matrix.hpp"

namespace eegraph::csv {

/// Shortest decimal form that round-trips a double exactly.
std::string format_double(double x);

std::vector<std::string> split(const std::string& line, char delim = ',');

/// Parses a whole numeric CSV. A non-numeric first row is treated as a
/// header and returned separately. Throws Error{non_numeric_cell} with
/// 1-based row/column on any other parse failure, Error{shape_mismatch}
/// on ragged rows.
struct NumericCsv {
  Matrix data;
  std::optional<std::vector<std::string>> header;
};
NumericCsv read_numeric(const std::filesystem::path& path);

void write_matrix(const std::filesystem::path& path, const Matrix& m,
                  const std::vector<std::string>* header = nullptr);

/// Row-oriented writer for small report tables.
class Writer {
 public:
  explicit Writer(const std::filesystem::path& path);
  ~Writer();
  Writer(const Writer&) = delete;
  Writer& operator=(const Writer&) = delete;

  void row(const std::vector<std::string>& cells);

 private:
  struct Impl;
  Impl* impl_;
};

}  // namespace eegraph::csv
