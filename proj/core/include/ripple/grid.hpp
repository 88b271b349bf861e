#pragma once

#include <functional>
#include <vector>

#include "ripple/fft.hpp"

namespace ripple {

// Complex samples on a uniform periodic grid x_j = -L/2 + j L / n, kept together
// with their normalized Fourier coefficients.
class GridFunction {
 public:
  GridFunction() = default;
  GridFunction(std::size_t n_points, double domain_length);
  GridFunction(double domain_length, cvec samples);

  static GridFunction from_spectrum(double domain_length, cvec coeffs);
  static GridFunction from_function(std::size_t n_points, double domain_length,
                                    const std::function<cplx(double)>& fn);

  std::size_t size() const { return samples_.size(); }
  double length() const { return length_; }
  double dx() const { return length_ / static_cast<double>(samples_.size()); }
  double origin() const { return -0.5 * length_; }
  double x(std::size_t j) const { return origin() + dx() * static_cast<double>(j); }
  // Angular wavenumber stored in slot i.
  double wavenumber(std::size_t i) const;
  double nyquist() const;

  const cvec& samples() const { return samples_; }
  const cvec& spectrum() const { return spectrum_; }
  const cplx& operator[](std::size_t j) const { return samples_[j]; }

  // Trigonometric interpolant at an arbitrary point.
  cplx eval(double x) const;

  GridFunction conj() const;
  GridFunction real() const;
  GridFunction imag() const;
  // Same samples on a torus of a different length (pure relabelling).
  GridFunction relabel(double new_length) const;

  GridFunction& operator+=(const GridFunction& o);
  GridFunction& operator-=(const GridFunction& o);
  GridFunction& operator*=(cplx s);

  double max_abs() const;
  // Sample-side L2 norm (sum |f_j|^2 dx)^{1/2}.
  double l2() const;
  // Mean value (zero mode).
  cplx mean() const { return spectrum_.empty() ? cplx(0.0) : spectrum_[0]; }

 private:
  double length_ = 0.0;
  cvec samples_;
  cvec spectrum_;
};

GridFunction operator+(GridFunction a, const GridFunction& b);
GridFunction operator-(GridFunction a, const GridFunction& b);
GridFunction operator*(cplx s, GridFunction a);
GridFunction operator*(GridFunction a, cplx s);
GridFunction operator-(GridFunction a);

bool same_grid(const GridFunction& a, const GridFunction& b);
void require_same_grid(const GridFunction& a, const GridFunction& b);
bool is_power_of_two(std::size_t n);

}  // namespace ripple
