#pragma once

#include <cstddef>
#include <vector>

namespace ripple {

struct LineFit {
  double slope = 0.0;
  double intercept = 0.0;
  double slope_stderr = 0.0;
  // Half-width of the two-sided Student-t confidence interval on the slope.
  double slope_ci = 0.0;
  std::size_t samples = 0;
};

// Ordinary least squares y = intercept + slope * x (at least three samples).
LineFit fit_line(const std::vector<double>& x, const std::vector<double>& y, double confidence = 0.95);

// Slope of log(y) against log(x); every value must be positive.
LineFit fit_loglog(const std::vector<double>& x, const std::vector<double>& y, double confidence = 0.95);

struct PowerLawFit {
  double exponent = 0.0;
  double ci = 0.0;
  double prefactor = 0.0;
  std::size_t samples = 0;
};

// value ~ prefactor * t^exponent from at least min_samples points spanning min_decades.
PowerLawFit fit_power_law(const std::vector<double>& t, const std::vector<double>& value, double confidence = 0.95,
                          std::size_t min_samples = 8, double min_decades = 1.0);

}  // namespace ripple
