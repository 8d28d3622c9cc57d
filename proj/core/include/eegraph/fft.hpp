#pragma once

#include <complex>
#include <vector>

namespace eegraph::fft {

/// Unnormalized forward DFT in place.
void forward(std::vector<std::complex<double>>& x);

/// Inverse DFT in place, scaled by 1/N.
void inverse(std::vector<std::complex<double>>& x);

}  // namespace eegraph::fft
