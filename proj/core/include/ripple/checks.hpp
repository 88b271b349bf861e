#pragma once

#include <cstdint>
#include <vector>

#include "ripple/scattering.hpp"

namespace ripple {

// Check suites for the operator-level properties, shared by the command-line driver and the acceptance run.

struct DnoCheckParams {
  int flat_samples = 5;
  std::size_t flat_points = 256;
  int flat_max_mode = 24;
  double flat_tolerance = 1e-8;
  std::size_t manufactured_points = 1024;
  double manufactured_tolerance = 1e-6;
  double slope_tolerance = 0.2;
  std::uint64_t seed = 1;
};

// Flat surface against |D| on random band-limited psi.
Check dno_flat_check(const DnoCheckParams& p = {});
// Harmonic manufactured solution (|k| - i k eta') e^{ikx} e^{|k| eta}.
Check dno_manufactured_check(const DnoCheckParams& p = {});
// Cubic Taylor remainder of the quadratic expansion.
Check dno_taylor_check(const DnoCheckParams& p = {});
std::vector<Check> dno_checks(const DnoCheckParams& p = {});

// Residual slopes of the full right-hand side after removing its linear, quadratic and cubic parts.
std::vector<Check> ladder_checks(double tolerance = 0.3);

struct ConservationCheckParams {
  std::size_t n_points = 32;
  double epsilon = 0.03;
  double t_end = 10.0;
  double dt = 0.01;
  double hamiltonian_tolerance = 1e-6;
  double defect_factor = 10.0;
};

// Hamiltonian drift along the full flow from t = 1, and the one-step defect of scaled trajectories.
std::vector<Check> conservation_checks(const ConservationCheckParams& p = {});

// Composition residual slopes for N = 0, 1, 2 against N + 1 - margin.
std::vector<Check> symbol_checks(double margin = 0.2);

// Lagrangian class defect slope (target 1) and the wrong-Lagrangian control (target 0).
std::vector<Check> class_checks(double slope_tolerance = 0.1, double control_tolerance = 0.2);

}  // namespace ripple
