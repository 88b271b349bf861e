#include "ripple/fit.hpp"

#include <algorithm>
#include <boost/math/distributions/students_t.hpp>
#include <cmath>
#include <stdexcept>

namespace ripple {

LineFit fit_line(const std::vector<double>& x, const std::vector<double>& y, double confidence) {
  if (x.size() != y.size()) throw std::invalid_argument("fit: sample arrays differ in length");
  const std::size_t n = x.size();
  if (n < 3) throw std::invalid_argument("fit: at least three samples required");
  double mx = 0.0, my = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    if (!std::isfinite(x[i]) || !std::isfinite(y[i])) throw std::invalid_argument("fit: non-finite sample");
    mx += x[i];
    my += y[i];
  }
  mx /= n;
  my /= n;
  double sxx = 0.0, sxy = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    sxx += (x[i] - mx) * (x[i] - mx);
    sxy += (x[i] - mx) * (y[i] - my);
  }
  if (!(sxx > 0.0)) throw std::invalid_argument("fit: degenerate abscissae");
  LineFit f;
  f.samples = n;
  f.slope = sxy / sxx;
  f.intercept = my - f.slope * mx;
  double rss = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double r = y[i] - f.intercept - f.slope * x[i];
    rss += r * r;
  }
  const double dof = static_cast<double>(n - 2);
  f.slope_stderr = std::sqrt(rss / dof / sxx);
  const boost::math::students_t dist(dof);
  f.slope_ci = boost::math::quantile(dist, 0.5 + 0.5 * confidence) * f.slope_stderr;
  return f;
}

LineFit fit_loglog(const std::vector<double>& x, const std::vector<double>& y, double confidence) {
  std::vector<double> lx(x.size()), ly(y.size());
  for (std::size_t i = 0; i < x.size(); ++i) {
    if (!(x[i] > 0.0)) throw std::invalid_argument("fit: nonpositive abscissa");
    lx[i] = std::log(x[i]);
  }
  for (std::size_t i = 0; i < y.size(); ++i) {
    if (!(y[i] > 0.0)) throw std::invalid_argument("fit: nonpositive value");
    ly[i] = std::log(y[i]);
  }
  return fit_line(lx, ly, confidence);
}

PowerLawFit fit_power_law(const std::vector<double>& t, const std::vector<double>& value, double confidence,
                          std::size_t min_samples, double min_decades) {
  if (t.size() < min_samples) throw std::invalid_argument("fit_power_law: too few samples");
  const auto [lo, hi] = std::minmax_element(t.begin(), t.end());
  if (!(*lo > 0.0) || std::log10(*hi / *lo) < min_decades - 1e-12)
    throw std::invalid_argument("fit_power_law: samples span less than the required decades");
  const LineFit f = fit_loglog(t, value, confidence);
  PowerLawFit p;
  p.exponent = f.slope;
  p.ci = f.slope_ci;
  p.prefactor = std::exp(f.intercept);
  p.samples = f.samples;
  return p;
}

}  // namespace ripple
