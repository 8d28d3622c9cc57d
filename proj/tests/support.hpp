#pragma once

#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "eegraph/dataset.hpp"
#include "eegraph/error.hpp"
#include "eegraph/matrix.hpp"
#include "eegraph/rng.hpp"
#include "eegraph/tape.hpp"

namespace test {

/// Runs f and reports the library error code it threw, if any.
template <typename F>
std::optional<eegraph::Errc> thrown_code(F&& f) {
  try {
    f();
  } catch (const eegraph::Error& e) {
    return e.code();
  }
  return std::nullopt;
}

/// Runs f and reports the library error message it threw, if any.
template <typename F>
std::string thrown_message(F&& f) {
  try {
    f();
  } catch (const eegraph::Error& e) {
    return e.what();
  }
  return "";
}

using eegraph::Matrix;

/// Unique scratch directory, removed on destruction.
class TempDir {
 public:
  explicit TempDir(const std::string& tag) {
    static int counter = 0;
    path_ = std::filesystem::temp_directory_path() /
            ("eegraph_test_" + tag + "_" + std::to_string(::getpid()) + "_" +
             std::to_string(counter++));
    std::filesystem::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  const std::filesystem::path& path() const { return path_; }

 private:
  std::filesystem::path path_;
};

inline std::vector<double> tone(double freq_hz, double sample_rate_hz, double duration_s,
                                double amp = 1.0, double phase = 0.0) {
  const int n = static_cast<int>(duration_s * sample_rate_hz + 0.5);
  std::vector<double> x(static_cast<size_t>(n));
  for (int i = 0; i < n; ++i)
    x[static_cast<size_t>(i)] = amp * std::sin(2.0 * M_PI * freq_hz * i / sample_rate_hz + phase);
  return x;
}

inline double rms(const std::vector<double>& x) {
  double s = 0.0;
  for (double v : x) s += v * v;
  return std::sqrt(s / static_cast<double>(x.size()));
}

inline Matrix column_matrix(const std::vector<std::vector<double>>& cols) {
  Matrix m(static_cast<int>(cols.at(0).size()), static_cast<int>(cols.size()));
  for (int c = 0; c < m.cols; ++c)
    for (int r = 0; r < m.rows; ++r) m(r, c) = cols[static_cast<size_t>(c)][static_cast<size_t>(r)];
  return m;
}

inline Matrix random_matrix(int rows, int cols, eegraph::Rng& rng, double scale = 1.0) {
  Matrix m(rows, cols);
  for (double& v : m.v) v = scale * (2.0 * rng.uniform() - 1.0);
  return m;
}

/// Central-difference check of every element of every leaf against the tape
/// gradient. `build` must be a pure function of the leaf values.
using BuildFn = std::function<eegraph::Var(eegraph::Tape&, const std::vector<eegraph::Var>&)>;

inline double gradcheck_max_rel_err(std::vector<Matrix> leaves, const BuildFn& build,
                                    double eps = 1e-5) {
  namespace eg = eegraph;
  const auto eval = [&](const std::vector<Matrix>& vals) {
    eg::Tape t;
    std::vector<eg::Var> vars;
    vars.reserve(vals.size());
    for (const Matrix& m : vals) vars.push_back(t.leaf(m, false));
    return t.scalar(build(t, vars));
  };

  eg::Tape t;
  std::vector<eg::Var> vars;
  vars.reserve(leaves.size());
  for (const Matrix& m : leaves) vars.push_back(t.leaf(m, true));
  t.backward(build(t, vars));

  double worst = 0.0;
  for (size_t li = 0; li < leaves.size(); ++li) {
    const Matrix& g = t.grad(vars[li]);
    for (size_t k = 0; k < leaves[li].v.size(); ++k) {
      std::vector<Matrix> bumped = leaves;
      bumped[li].v[k] += eps;
      const double up = eval(bumped);
      bumped[li].v[k] -= 2.0 * eps;
      const double dn = eval(bumped);
      const double fd = (up - dn) / (2.0 * eps);
      const double an = g.v[k];
      const double denom = std::max({1.0, std::abs(fd), std::abs(an)});
      worst = std::max(worst, std::abs(fd - an) / denom);
    }
  }
  return worst;
}

}  // namespace test
