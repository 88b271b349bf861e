#pragma once

#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "ripple/dno.hpp"
#include "ripple/grid.hpp"

namespace ripple {

enum class DnoMode { elliptic, quadratic };
enum class ModelTag { full, cubic };
enum class Scheme { rk4, if_rk4 };

std::string to_string(ModelTag m);
std::string to_string(Scheme s);

struct Trajectory {
  ModelTag model = ModelTag::cubic;
  double epsilon = 0.0;
  bool uniform = true;
  std::vector<double> times;
  std::vector<SurfaceState> full;   // model == full
  std::vector<GridFunction> cubic;  // model == cubic

  std::size_t size() const { return times.size(); }
  double t_begin() const { return times.front(); }
  double t_end() const { return times.back(); }
  // u = |D|^{1/2} psi + i eta at snapshot i, for either model.
  GridFunction u(std::size_t i) const;
  // (eta, psi) at snapshot i, for either model (psi recovered with zero mean).
  SurfaceState state(std::size_t i) const;
};

Trajectory make_full_trajectory(double t0, SurfaceState s0, double epsilon);
Trajectory make_cubic_trajectory(double t0, GridFunction u0, double epsilon);

// u = |D|^{1/2} psi + i eta and its inverse (psi has zero mean).
GridFunction to_complex(const SurfaceState& s);
SurfaceState from_complex(const GridFunction& u);

// (d_t eta, d_t psi) for the full system.
std::pair<GridFunction, GridFunction> rhs_full(const SurfaceState& s, DnoMode mode, const DnoOptions& opt = {});
// d_t u induced by the full system: |D|^{1/2} psi_t + i eta_t.
GridFunction rhs_full_complex(const SurfaceState& s, DnoMode mode, const DnoOptions& opt = {});

struct CubicTerms {
  bool linear = true;
  bool quadratic = true;
  bool cubic = true;
};

// Quadratic and cubic nonlinearities of the cubic model (D_t u = |D|^{1/2}u + Q + C).
GridFunction cubic_model_quadratic(const GridFunction& u);
GridFunction cubic_model_cubic(const GridFunction& u);
// d_t u = i (|D|^{1/2} u + Q(u) + C(u)).
GridFunction rhs_cubic(const GridFunction& u, const CubicTerms& terms = {});

class BlowUpError : public std::runtime_error {
 public:
  BlowUpError(const std::string& w, double t) : std::runtime_error(w), last_valid_time(t) {}
  double last_valid_time;
};

class WrapAroundError : public std::runtime_error {
 public:
  WrapAroundError(const std::string& w, double t) : std::runtime_error(w), time(t) {}
  double time;
};

struct StepOptions {
  int save_every = 1;
  double blowup_threshold = 1e6;
  CubicTerms terms;
  DnoMode dno_mode = DnoMode::elliptic;
  DnoOptions dno;
  // Relative boundary amplitude allowed by the wrap-around monitor; <= 0 disables it.
  double wrap_tolerance = 1e-10;
  double wrap_margin = 0.05;
};

// Conservative explicit step for the dispersion |xi|^{1/2} on this grid.
double stable_dt(const GridFunction& f, double safety = 0.5);

Trajectory step_integrate(Trajectory traj, double t_end, double dt, Scheme scheme, const StepOptions& opt = {});

// Single steps (exposed for defect measurements).
SurfaceState rk4_step_full(const SurfaceState& s, double dt, DnoMode mode, const DnoOptions& opt = {});
GridFunction step_cubic(const GridFunction& u, double dt, Scheme scheme, const CubicTerms& terms = {});

double hamiltonian(const SurfaceState& s, const DnoOptions& opt = {});

// (eta, psi)(t, x) -> (lambda^{-2} eta, lambda^{-3} psi)(lambda t, lambda^2 x); the grid is relabelled
// to length L / lambda^2 and times become t / lambda.
Trajectory scale_solution(const Trajectory& traj, double lambda);

// Relative one-step defect |U_{i+1} - Phi_dt(U_i)| / |U_{i+1}| of a stored full trajectory.
double one_step_defect(const Trajectory& traj, std::size_t i, const DnoOptions& opt = {});

struct ZFieldRow {
  double t = 0.0;
  std::vector<double> M;  // M_s^{(k)}, k = 0..k_max
  std::vector<double> N;  // N_rho^{(k)}
};

// Z = t d_t + 2 x d_x with second-order centred differences in t.
std::vector<ZFieldRow> z_field_diagnostics(const Trajectory& traj, int k_max, double s, double rho,
                                           std::size_t stride = 1);
// M and N for k <= 1 with d_t taken from the equation instead of time differences (the good-unknown
// derivative by a directional difference in state space). Avoids the O(t dt^2) stencil error of Z on
// oscillating solutions.
std::vector<ZFieldRow> z_field_first_order(const Trajectory& traj, double s, double rho, std::size_t stride = 1,
                                           const DnoOptions& opt = {});
// Z^p F at snapshot i of a sequence of grid functions sampled at the given times.
GridFunction z_power(const std::vector<GridFunction>& seq, const std::vector<double>& times, std::size_t i, int p);

// Initial data.
SurfaceState bump_data(std::size_t n, double L, double eps, double width, double center = 0.0);
GridFunction wavepacket_data(std::size_t n, double L, double eps, double width, double xi0, double center = 0.0);

}  // namespace ripple
