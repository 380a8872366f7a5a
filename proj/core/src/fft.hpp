#pragma once

#include <complex>
#include <vector>

namespace bdcalc::detail {

// In-place radix-2 FFT; size must be a power of two.
void fft_pow2(std::vector<std::complex<double>>& a, bool inverse);

}  // namespace bdcalc::detail
