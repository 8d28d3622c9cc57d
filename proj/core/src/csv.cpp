#include "eegraph/csv.hpp"

#include <charconv>
#include <cstdio>
#include <fstream>

#include "eegraph/error.hpp"

namespace eegraph::csv {

std::string format_double(double x) {
  // Shortest representation that round-trips exactly.
  char buf[40];
  const auto res = std::to_chars(buf, buf + sizeof(buf), x);
  return std::string(buf, res.ptr);
}

std::vector<std::string> split(const std::string& line, char delim) {
  std::vector<std::string> out;
  size_t start = 0;
  while (true) {
    size_t pos = line.find(delim, start);
    if (pos == std::string::npos) {
      out.push_back(line.substr(start));
      break;
    }
    out.push_back(line.substr(start, pos - start));
    start = pos + 1;
  }
  return out;
}

namespace {

std::string trim(const std::string& s) {
  size_t a = s.find_first_not_of(" \t\r\n");
  if (a == std::string::npos) return "";
  size_t b = s.find_last_not_of(" \t\r\n");
  return s.substr(a, b - a + 1);
}

bool parse_cell(const std::string& raw, double& out) {
  std::string t = trim(raw);
  if (t.empty()) return false;
  const char* first = t.data();
  const char* last = t.data() + t.size();
  auto [ptr, ec] = std::from_chars(first, last, out);
  return ec == std::errc() && ptr == last;
}

}  // namespace

NumericCsv read_numeric(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(Errc::file_not_found, path.string());

  NumericCsv result;
  std::vector<double> values;
  int cols = -1;
  int data_row = 0;  // 1-based index among data rows
  std::string line;
  bool first_line = true;
  while (std::getline(in, line)) {
    if (trim(line).empty()) continue;
    std::vector<std::string> cells = split(line);
    if (first_line) {
      first_line = false;
      bool numeric = true;
      double tmp;
      for (const auto& c : cells)
        if (!parse_cell(c, tmp)) { numeric = false; break; }
      if (!numeric) {
        result.header = std::vector<std::string>();
        for (const auto& c : cells) result.header->push_back(trim(c));
        cols = static_cast<int>(cells.size());
        continue;
      }
    }
    if (cols < 0) cols = static_cast<int>(cells.size());
    if (static_cast<int>(cells.size()) != cols)
      throw Error(Errc::shape_mismatch,
                  path.string() + ": row " + std::to_string(data_row + 1) +
                      " has " + std::to_string(cells.size()) +
                      " columns, expected " + std::to_string(cols));
    ++data_row;
    for (size_t c = 0; c < cells.size(); ++c) {
      double x;
      if (!parse_cell(cells[c], x))
        throw Error(Errc::non_numeric_cell,
                    path.string() + ": row " + std::to_string(data_row) +
                        ", column " + std::to_string(c + 1) + ": '" +
                        trim(cells[c]) + "'");
      values.push_back(x);
    }
  }
  if (cols < 0) cols = 0;
  result.data.rows = data_row;
  result.data.cols = cols;
  result.data.v = std::move(values);
  return result;
}

void write_matrix(const std::filesystem::path& path, const Matrix& m,
                  const std::vector<std::string>* header) {
  std::ofstream out(path);
  if (!out) throw Error(Errc::file_not_found, "cannot open for write: " + path.string());
  if (header) {
    for (size_t i = 0; i < header->size(); ++i)
      out << (i ? "," : "") << (*header)[i];
    out << '\n';
  }
  for (int r = 0; r < m.rows; ++r) {
    for (int c = 0; c < m.cols; ++c)
      out << (c ? "," : "") << format_double(m(r, c));
    out << '\n';
  }
}

struct Writer::Impl {
  std::ofstream out;
};

Writer::Writer(const std::filesystem::path& path) : impl_(new Impl) {
  impl_->out.open(path);
  if (!impl_->out)
    throw Error(Errc::file_not_found, "cannot open for write: " + path.string());
}

Writer::~Writer() { delete impl_; }

void Writer::row(const std::vector<std::string>& cells) {
  for (size_t i = 0; i < cells.size(); ++i)
    impl_->out << (i ? "," : "") << cells[i];
  impl_->out << '\n';
}

}  // namespace eegraph::csv
