#include "ripple/fourier.hpp"

#include <cmath>
#include <stdexcept>

namespace ripple {

namespace symbols {

MultiplierSymbol abs_pow(double s) {
  return {[s](double xi) { return cplx(std::pow(std::abs(xi), s)); }, 0.0, s};
}

MultiplierSymbol signed_pow(double s) {
  return {[s](double xi) { return cplx((xi > 0 ? 1.0 : -1.0) * std::pow(std::abs(xi), s)); }, 0.0, s};
}

MultiplierSymbol dx() {
  return {[](double xi) { return cplx(xi); }, 0.0, 1.0};
}

MultiplierSymbol ddx() {
  return {[](double xi) { return cplx(0.0, xi); }, 0.0, 1.0};
}

MultiplierSymbol japanese(double s) {
  return {[s](double xi) { return cplx(std::pow(1.0 + xi * xi, 0.5 * s)); }, 1.0, s};
}

MultiplierSymbol half_wave(double t) {
  return {[t](double xi) {
            const double ph = t * std::sqrt(std::abs(xi));
            return cplx(std::cos(ph), std::sin(ph));
          },
          1.0, 0.0};
}

}  // namespace symbols

GridFunction apply_multiplier(const GridFunction& f, const MultiplierSymbol& m) {
  const std::size_t n = f.size();
  cvec c = f.spectrum();
  double cmax = 0.0;
  for (const auto& z : c) cmax = std::max(cmax, std::abs(z));
  for (std::size_t i = 0; i < n; ++i) {
    cplx v;
    if (i == n / 2) {
      const double k = f.nyquist();
      v = 0.5 * (m(k) + m(-k));
    } else {
      v = m(f.wavenumber(i));
    }
    if (!std::isfinite(v.real()) || !std::isfinite(v.imag())) {
      if (std::abs(c[i]) > 1e-13 * cmax) throw std::invalid_argument("non-finite multiplier value on a populated mode");
      v = 0.0;
    }
    c[i] *= v;
  }
  return GridFunction::from_spectrum(f.length(), std::move(c));
}

GridFunction derivative(const GridFunction& f) { return apply_multiplier(f, symbols::ddx()); }

double smooth_step(double t) {
  if (t <= 0.0) return 0.0;
  if (t >= 1.0) return 1.0;
  const double a = std::exp(-1.0 / t);
  const double b = std::exp(-1.0 / (1.0 - t));
  return a / (a + b);
}

double lp_rho(double xi) { return 1.0 - smooth_step(std::abs(xi) - 1.0); }

double lp_phi(double xi) { return lp_rho(xi) - lp_rho(2.0 * xi); }

namespace {

GridFunction real_multiplier(const GridFunction& f, const std::function<double(double)>& m) {
  MultiplierSymbol s{[&m](double xi) { return cplx(m(xi)); }, m(0.0), 0.0};
  return apply_multiplier(f, s);
}

GridFunction block(const GridFunction& f, int j) {
  if (j < 0) return low_pass(f, -1);
  return lp_block(f, j);
}

}  // namespace

GridFunction lp_block(const GridFunction& f, int j) {
  const double s = std::ldexp(1.0, -j);
  return real_multiplier(f, [s](double xi) { return lp_phi(s * xi); });
}

GridFunction low_pass(const GridFunction& f, int m) {
  const double s = std::ldexp(1.0, -m);
  return real_multiplier(f, [s](double xi) { return lp_rho(s * xi); });
}

int lp_top_index(const GridFunction& f) {
  return static_cast<int>(std::ceil(std::log2(f.nyquist()))) + 1;
}

double sobolev_norm(const GridFunction& f, double s) {
  const auto& c = f.spectrum();
  double acc = 0.0;
  for (std::size_t i = 0; i < c.size(); ++i) {
    const double k = i == c.size() / 2 ? f.nyquist() : f.wavenumber(i);
    acc += std::pow(1.0 + k * k, s) * std::norm(c[i]);
  }
  return std::sqrt(acc * f.length());
}

double holder_norm(const GridFunction& f, double rho) {
  double sup = 0.0;
  for (int j = 0; j <= lp_top_index(f); ++j)
    sup = std::max(sup, std::pow(2.0, j * rho) * lp_block(f, j).max_abs());
  return sup + low_pass(f, -1).max_abs();
}

GridFunction paraproduct(const GridFunction& a, const GridFunction& f) {
  require_same_grid(a, f);
  GridFunction out(f.size(), f.length());
  for (int j = 0; j <= lp_top_index(f); ++j) {
    const int m = j - kParaproductGap;
    if (m < -1) continue;
    out += product(low_pass(a, m), lp_block(f, j));
  }
  return out;
}

GridFunction bony_remainder(const GridFunction& a, const GridFunction& f) {
  require_same_grid(a, f);
  GridFunction out(f.size(), f.length());
  const int top = lp_top_index(f);
  for (int j = -1; j <= top; ++j) {
    const GridFunction aj = block(a, j);
    for (int k = std::max(-1, j - kParaproductGap + 1); k <= std::min(top, j + kParaproductGap - 1); ++k)
      out += product(aj, block(f, k));
  }
  return out;
}

GridFunction product(const GridFunction& a, const GridFunction& b) {
  require_same_grid(a, b);
  const std::size_t n = a.size();
  const std::size_t m = 3 * n / 2;
  cvec pa = fft_inverse(resize_spectrum(a.spectrum(), m));
  const cvec pb = fft_inverse(resize_spectrum(b.spectrum(), m));
  for (std::size_t j = 0; j < m; ++j) pa[j] *= pb[j];
  return GridFunction::from_spectrum(a.length(), resize_spectrum(fft_forward(pa), n));
}

GridFunction product_raw(const GridFunction& a, const GridFunction& b) {
  require_same_grid(a, b);
  cvec s(a.size());
  for (std::size_t j = 0; j < s.size(); ++j) s[j] = a[j] * b[j];
  return GridFunction(a.length(), std::move(s));
}

cplx inner(const GridFunction& a, const GridFunction& b) {
  require_same_grid(a, b);
  cplx acc = 0.0;
  for (std::size_t j = 0; j < a.size(); ++j) acc += std::conj(a[j]) * b[j];
  return acc * a.dx();
}

double integral(const GridFunction& f) {
  double acc = 0.0;
  for (std::size_t j = 0; j < f.size(); ++j) acc += f[j].real();
  return acc * f.dx();
}

}  // namespace ripple
