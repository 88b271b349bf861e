#include "ripple/grid.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>

namespace ripple {

bool is_power_of_two(std::size_t n) { return n != 0 && (n & (n - 1)) == 0; }

namespace {

void validate(std::size_t n, double length) {
  if (!is_power_of_two(n) || n < 16)
    throw std::invalid_argument("grid size must be a power of two and at least 16");
  if (!(length > 0.0) || !std::isfinite(length))
    throw std::invalid_argument("domain length must be positive");
}

void check_finite(const cvec& v) {
  for (const auto& z : v)
    if (!std::isfinite(z.real()) || !std::isfinite(z.imag()))
      throw std::invalid_argument("non-finite sample value");
}

}  // namespace

GridFunction::GridFunction(std::size_t n_points, double domain_length)
    : length_(domain_length), samples_(n_points, 0.0), spectrum_(n_points, 0.0) {
  validate(n_points, domain_length);
}

GridFunction::GridFunction(double domain_length, cvec samples)
    : length_(domain_length), samples_(std::move(samples)) {
  validate(samples_.size(), domain_length);
  check_finite(samples_);
  spectrum_ = fft_forward(samples_);
}

GridFunction GridFunction::from_spectrum(double domain_length, cvec coeffs) {
  GridFunction g;
  validate(coeffs.size(), domain_length);
  check_finite(coeffs);
  g.length_ = domain_length;
  g.samples_ = fft_inverse(coeffs);
  g.spectrum_ = std::move(coeffs);
  return g;
}

GridFunction GridFunction::from_function(std::size_t n_points, double domain_length,
                                         const std::function<cplx(double)>& fn) {
  validate(n_points, domain_length);
  cvec s(n_points);
  const double h = domain_length / static_cast<double>(n_points);
  for (std::size_t j = 0; j < n_points; ++j) s[j] = fn(-0.5 * domain_length + h * static_cast<double>(j));
  return GridFunction(domain_length, std::move(s));
}

double GridFunction::wavenumber(std::size_t i) const {
  return 2.0 * std::numbers::pi * static_cast<double>(mode_index(i, size())) / length_;
}

double GridFunction::nyquist() const {
  return std::numbers::pi * static_cast<double>(size()) / length_;
}

cplx GridFunction::eval(double x) const {
  const std::size_t n = size();
  const double d = x - origin();
  cplx acc = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    if (i == n / 2) {
      acc += spectrum_[i] * std::cos(nyquist() * d);
    } else {
      const double k = wavenumber(i);
      acc += spectrum_[i] * cplx(std::cos(k * d), std::sin(k * d));
    }
  }
  return acc;
}

GridFunction GridFunction::conj() const {
  cvec s(samples_.size());
  for (std::size_t j = 0; j < s.size(); ++j) s[j] = std::conj(samples_[j]);
  return GridFunction(length_, std::move(s));
}

GridFunction GridFunction::real() const {
  cvec s(samples_.size());
  for (std::size_t j = 0; j < s.size(); ++j) s[j] = samples_[j].real();
  return GridFunction(length_, std::move(s));
}

GridFunction GridFunction::imag() const {
  cvec s(samples_.size());
  for (std::size_t j = 0; j < s.size(); ++j) s[j] = samples_[j].imag();
  return GridFunction(length_, std::move(s));
}

GridFunction GridFunction::relabel(double new_length) const {
  GridFunction g = *this;
  validate(size(), new_length);
  g.length_ = new_length;
  return g;
}

GridFunction& GridFunction::operator+=(const GridFunction& o) {
  require_same_grid(*this, o);
  for (std::size_t j = 0; j < size(); ++j) {
    samples_[j] += o.samples_[j];
    spectrum_[j] += o.spectrum_[j];
  }
  return *this;
}

GridFunction& GridFunction::operator-=(const GridFunction& o) {
  require_same_grid(*this, o);
  for (std::size_t j = 0; j < size(); ++j) {
    samples_[j] -= o.samples_[j];
    spectrum_[j] -= o.spectrum_[j];
  }
  return *this;
}

GridFunction& GridFunction::operator*=(cplx s) {
  for (std::size_t j = 0; j < size(); ++j) {
    samples_[j] *= s;
    spectrum_[j] *= s;
  }
  return *this;
}

double GridFunction::max_abs() const {
  double m = 0.0;
  for (const auto& z : samples_) m = std::max(m, std::abs(z));
  return m;
}

double GridFunction::l2() const {
  double s = 0.0;
  for (const auto& z : samples_) s += std::norm(z);
  return std::sqrt(s * dx());
}

GridFunction operator+(GridFunction a, const GridFunction& b) { return a += b; }
GridFunction operator-(GridFunction a, const GridFunction& b) { return a -= b; }
GridFunction operator*(cplx s, GridFunction a) { return a *= s; }
GridFunction operator*(GridFunction a, cplx s) { return a *= s; }
GridFunction operator-(GridFunction a) { return a *= -1.0; }

bool same_grid(const GridFunction& a, const GridFunction& b) {
  return a.size() == b.size() && std::abs(a.length() - b.length()) <= 1e-12 * a.length();
}

void require_same_grid(const GridFunction& a, const GridFunction& b) {
  if (!same_grid(a, b)) throw std::invalid_argument("grid functions live on different grids");
}

}  // namespace ripple
