#include "eegraph/fft.hpp"

#include <fftw3.h>

#include <map>
#include <mutex>

namespace eegraph::fft {

namespace {

// FFTW planning is not thread-safe; execution via the new-array interface
// is. Plans are created once per (size, direction) with FFTW_ESTIMATE so
// output is deterministic, and FFTW_UNALIGNED so any buffer may be used.
class PlanCache {
 public:
  fftw_plan get(int n, int sign) {
    std::lock_guard<std::mutex> lock(mutex_);
    auto key = std::make_pair(n, sign);
    auto it = plans_.find(key);
    if (it != plans_.end()) return it->second;
    std::vector<std::complex<double>> dummy(static_cast<size_t>(n));
    fftw_plan plan = fftw_plan_dft_1d(
        n, reinterpret_cast<fftw_complex*>(dummy.data()),
        reinterpret_cast<fftw_complex*>(dummy.data()), sign,
        FFTW_ESTIMATE | FFTW_UNALIGNED);
    plans_.emplace(key, plan);
    return plan;
  }

 private:
  std::mutex mutex_;
  std::map<std::pair<int, int>, fftw_plan> plans_;
};

PlanCache& cache() {
  static PlanCache c;
  return c;
}

void execute(std::vector<std::complex<double>>& x, int sign) {
  if (x.empty()) return;
  fftw_plan plan = cache().get(static_cast<int>(x.size()), sign);
  auto* buf = reinterpret_cast<fftw_complex*>(x.data());
  fftw_execute_dft(plan, buf, buf);
}

}  // namespace

void forward(std::vector<std::complex<double>>& x) { execute(x, FFTW_FORWARD); }

void inverse(std::vector<std::complex<double>>& x) {
  execute(x, FFTW_BACKWARD);
  const double scale = 1.0 / static_cast<double>(x.size());
  for (auto& v : x) v *= scale;
}

}  // namespace eegraph::fft
