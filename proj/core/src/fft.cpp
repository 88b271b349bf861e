#include "ripple/fft.hpp"

#include <fftw3.h>

#include <map>
#include <mutex>
#include <stdexcept>
#include <utility>

namespace ripple {

namespace {

struct PlanCache {
  std::mutex mu;
  std::map<std::pair<std::size_t, int>, fftw_plan> plans;

  fftw_plan get(std::size_t n, int sign) {
    std::lock_guard<std::mutex> lock(mu);
    auto key = std::make_pair(n, sign);
    auto it = plans.find(key);
    if (it != plans.end()) return it->second;
    auto* a = static_cast<fftw_complex*>(fftw_malloc(sizeof(fftw_complex) * n));
    auto* b = static_cast<fftw_complex*>(fftw_malloc(sizeof(fftw_complex) * n));
    fftw_plan p = fftw_plan_dft_1d(static_cast<int>(n), a, b, sign,
                                   FFTW_ESTIMATE | FFTW_UNALIGNED);
    fftw_free(a);
    fftw_free(b);
    if (!p) throw std::runtime_error("fftw plan creation failed");
    plans.emplace(key, p);
    return p;
  }
};

PlanCache& cache() {
  static PlanCache c;
  return c;
}

void run(const cplx* in, cplx* out, std::size_t n, int sign) {
  fftw_plan p = cache().get(n, sign);
  if (in == out) {
    cvec tmp(in, in + n);
    fftw_execute_dft(p, reinterpret_cast<fftw_complex*>(tmp.data()),
                     reinterpret_cast<fftw_complex*>(out));
  } else {
    fftw_execute_dft(p, reinterpret_cast<fftw_complex*>(const_cast<cplx*>(in)),
                     reinterpret_cast<fftw_complex*>(out));
  }
}

}  // namespace

void fft_forward(const cplx* in, cplx* out, std::size_t n) {
  run(in, out, n, FFTW_FORWARD);
  const double s = 1.0 / static_cast<double>(n);
  for (std::size_t i = 0; i < n; ++i) out[i] *= s;
}

void fft_inverse(const cplx* in, cplx* out, std::size_t n) { run(in, out, n, FFTW_BACKWARD); }

cvec fft_forward(const cvec& in) {
  cvec out(in.size());
  fft_forward(in.data(), out.data(), in.size());
  return out;
}

cvec fft_inverse(const cvec& in) {
  cvec out(in.size());
  fft_inverse(in.data(), out.data(), in.size());
  return out;
}

cvec resize_spectrum(const cvec& c, std::size_t m) {
  const std::size_t n = c.size();
  cvec out(m, cplx(0.0));
  if (m == n) return c;
  if (m > n) {
    const std::size_t h = n / 2;
    for (std::size_t i = 0; i < h; ++i) out[i] = c[i];
    for (std::size_t i = h + 1; i < n; ++i) out[m - (n - i)] = c[i];
    out[h] = 0.5 * c[h];
    out[m - h] = 0.5 * c[h];
  } else {
    const std::size_t h = m / 2;
    for (std::size_t i = 0; i < h; ++i) out[i] = c[i];
    for (std::size_t i = 1; i < h; ++i) out[m - i] = c[n - i];
  }
  return out;
}

}  // namespace ripple
