#pragma once

#include <stdexcept>
#include <utility>
#include <vector>

#include "ripple/grid.hpp"

namespace ripple {

struct SurfaceState {
  GridFunction eta;
  GridFunction psi;
};

SurfaceState make_state(GridFunction eta, GridFunction psi);
SurfaceState scale_state(const SurfaceState& s, double eps);

struct DnoOptions {
  double depth = 0.0;  // 0 maps the whole half-line z < 0; > 0 truncates with a transparent bottom
  double tol = 1e-10;
  int max_iter = 200;
  double damping = 0.8;
  int n_layers = 0;  // 0 selects a size from n_points and tol
  bool check_slope = true;
  double slope_threshold = 0.1;
  double gamma = 1.0;
};

class SolverDivergence : public std::runtime_error {
 public:
  SolverDivergence(const std::string& what, std::vector<double> history)
      : std::runtime_error(what), residual_history(std::move(history)) {}
  std::vector<double> residual_history;
};

class SlopeGateError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct StripSolution {
  std::size_t n_points = 0;
  std::size_t n_layers = 0;
  double depth = 0.0;
  std::vector<double> z;  // layer heights, z[0] = 0 down to z.back() = -depth
  cvec phi;               // row-major, phi[i * n_points + j] = phi(x_j, z_i)
  int iterations_used = 0;
  double residual = 0.0;  // discrete L2 residual of P phi on interior layers
  std::vector<double> update_history;
  GridFunction g;         // G(eta) psi
};

// Holder norm of eta' at order gamma - 1.
double slope_measure(const SurfaceState& s, double gamma = 1.0);

StripSolution solve_strip(const SurfaceState& state, const DnoOptions& opt = {});
GridFunction dno_elliptic(const SurfaceState& state, const DnoOptions& opt = {});
GridFunction dno_elliptic(const SurfaceState& state, double depth, double tol, int max_iter);

// |D| psi - |D|(eta |D| psi) - d_x(eta d_x psi)
GridFunction dno_quadratic(const SurfaceState& state);

// B = (G + eta' psi') / (1 + eta'^2), V = psi' - B eta'
std::pair<GridFunction, GridFunction> traces_BV(const SurfaceState& state, const GridFunction& g_eta_psi);

// omega = psi - T_B eta
GridFunction good_unknown(const SurfaceState& state, const GridFunction& B);

}  // namespace ripple
