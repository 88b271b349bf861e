#pragma once

#include <complex>
#include <cstddef>
#include <vector>

namespace ripple {

using cplx = std::complex<double>;
using cvec = std::vector<cplx>;

// Normalized DFT pair: forward gives c_m = (1/n) sum_j f_j e^{-2 pi i m j / n},
// inverse reconstructs f_j = sum_m c_m e^{2 pi i m j / n}.
void fft_forward(const cplx* in, cplx* out, std::size_t n);
void fft_inverse(const cplx* in, cplx* out, std::size_t n);

cvec fft_forward(const cvec& in);
cvec fft_inverse(const cvec& in);

// Signed mode index for storage slot i (Nyquist slot maps to -n/2).
inline long mode_index(std::size_t i, std::size_t n) {
  return i < n / 2 ? static_cast<long>(i) : static_cast<long>(i) - static_cast<long>(n);
}

// Zero-pad (m > n) or truncate (m < n) a spectrum; the Nyquist coefficient is
// split evenly on padding and dropped on truncation.
cvec resize_spectrum(const cvec& c, std::size_t m);

}  // namespace ripple
