#pragma once

#include <array>
#include <functional>
#include <string>
#include <vector>

#include "ripple/fit.hpp"
#include "ripple/grid.hpp"

namespace ripple {

struct NormalFormParams {
  double beta = 0.05;
  double kappa = 0.15;
  // chi(s) = rho(s / chi_radius): one on |s| <= chi_radius, zero for |s| >= 2 chi_radius.
  // chi0(s) = rho(2 s / chi_radius), so supp chi0 lies where chi is one.
  double chi_radius = 1.0;
  double x_floor = 0.05;
  double t0 = 20.0;
  // Amplitude bound for the transform to be a local diffeomorphism.
  double nf_radius = 0.5;
};

double nf_chi(double s, const NormalFormParams& p);
double nf_chi0(double s, const NormalFormParams& p);

// Pointwise field on a punctured X-grid at time t with weight ell.
struct ProfileField {
  std::vector<double> x;
  std::vector<cplx> values;
  double t = 0.0;
  int ell = 0;

  std::size_t size() const { return x.size(); }
  double max_abs() const;
};

// Symmetric grid of n points on [-x_max, x_max] with |X| < x_floor removed.
std::vector<double> punctured_grid(std::size_t n, double x_max, double x_floor);
ProfileField make_profile_field(std::vector<double> x, double t, int ell, const std::function<cplx(double)>& f);

using SymbolFn = std::function<double(double)>;  // function of d omega

// Coefficients of the profile ODE and of its normal-form transform.
struct CoefficientSet {
  // Phi_j = (1 - chi)(X h^-beta) |d omega|^{5/2} Gamma_j(d omega), j = 3, -1, -3; default zero.
  SymbolFn gamma3, gamma_m1, gamma_m3;
  // Phi_1 closed form when set; otherwise Phi_1 uses gamma1.
  bool paper_mode = true;
  SymbolFn gamma1;
  // Scale of the quadratic terms (0 gives the linearized flow).
  double quadratic_scale = 1.0;
  // Free symbols of the transform; default zero.
  SymbolFn m3, m_m1, m_m3;
  // Injected Gamma-tilde-prime symbols; when empty they follow from the coefficient algebra.
  SymbolFn gtp3, gtp_m1, gtp_m3;
};

// All coefficients at one point (X, t).
struct PointCoefficients {
  double lambda = 0.0;             // 1/2 (1 - chi) |d omega|^{1/2}
  cplx q_plus = 0.0, q_minus = 0.0;  // coefficients of w^2 and conj(w)^2
  double phi3 = 0.0, phi1 = 0.0, phi_m1 = 0.0, phi_m3 = 0.0;
  cplx a = 0.0, b = 0.0;           // quadratic coefficients of the transform
  double c3 = 0.0, c_m1 = 0.0, c_m3 = 0.0;  // cubic coefficients of the transform
};

PointCoefficients point_coefficients(double X, double t, int ell, const CoefficientSet& c, const NormalFormParams& p = {});

// D_t w = lambda w + q+ w^2 + q- wbar^2 + h (Phi3 w^3 + Phi1 |w|^2 w + Phi-1 |w|^2 wbar + Phi-3 wbar^3) + h^{1+kappa} r.
ProfileField ode_rhs_w(const ProfileField& w, const CoefficientSet& c, const NormalFormParams& p = {},
                       const ProfileField* remainder = nullptr);

ProfileField nf_forward(const ProfileField& w, const CoefficientSet& c, const NormalFormParams& p = {});
// Fixed-point inversion of nf_forward.
ProfileField nf_inverse(const ProfileField& f, const CoefficientSet& c, const NormalFormParams& p = {},
                        double tol = 1e-15, int max_iter = 200);

// Monomial coefficients up to degree three, indexed by (i, j) for z^i conj(z)^j.
struct CubicPoly {
  std::array<std::array<cplx, 4>, 4> c{};
  cplx& operator()(int i, int j) { return c[i][j]; }
  cplx operator()(int i, int j) const { return c[i][j]; }
};

// Taylor coefficients of nf_inverse: w = sum c_ij f^i fbar^j + O(|f|^4).
CubicPoly inverse_series(double X, double t, int ell, const CoefficientSet& c, const NormalFormParams& p = {});
// D_t f expressed in (f, fbar) up to degree three, with frozen h (explicit t-dependence of the transform excluded).
CubicPoly transformed_rhs(double X, double t, int ell, const CoefficientSet& c, const NormalFormParams& p = {});

// Gamma-tilde-prime symbols read off the transformed equation with M = 0, normalized by h (1 - chi) |d omega|^{5/2}.
struct GammaTildePrime {
  double g3 = 0.0, g_m1 = 0.0, g_m3 = 0.0;
};
GammaTildePrime gamma_tilde_prime(double dw, int ell, const CoefficientSet& c, const NormalFormParams& p = {});

// M3 = G'3, M-1 = -G'-1, M-3 = -G'-3 / 2, with G' injected or computed.
CoefficientSet choose_M_cancelling(const CoefficientSet& c, int ell, const NormalFormParams& p = {});

// D_t f = 1/2 (1 - chi) |d omega|^{1/2} [1 + (|d omega|^2 / t) <d omega>^{-2 ell} |f|^2] f + t^{-1-kappa} r.
ProfileField reduced_rhs(const ProfileField& f, const NormalFormParams& p = {}, const ProfileField* remainder = nullptr);

struct ProfileTrajectory {
  std::vector<double> t;
  std::vector<ProfileField> f;
  std::size_t size() const { return t.size(); }
};

// Remainder injected at time t (amplitude of the t^{-1-kappa} or h^{1+kappa} term).
using RemainderFn = std::function<cplx(double t, double x, cplx value)>;

// Pointwise RK4 on the reduced flow, saving every save_every steps (and the final time).
ProfileTrajectory integrate_reduced(const ProfileField& f0, double t_end, double dt, const NormalFormParams& p = {},
                                    int save_every = 1, const RemainderFn& remainder = {});
// Pointwise RK4 on the full profile ODE.
ProfileTrajectory integrate_w(const ProfileField& w0, double t_end, double dt, const CoefficientSet& c,
                              const NormalFormParams& p = {}, int save_every = 1, const RemainderFn& remainder = {});

// Closed-form phase of the zero-remainder reduced flow at X after time t from t_begin.
double reduced_phase(double X, double t_begin, double t, double modulus, int ell, const NormalFormParams& p = {});

enum class ResidualMode {
  total,      // chain rule through the ODE plus the explicit t-dependence of the transform
  algebraic,  // chain rule through the ODE with the transform coefficients frozen in t
};

struct CancellationReport {
  std::vector<double> t;
  std::vector<double> residual;  // sup over X
  double slope = 0.0;            // decay exponent of the residual in t
  double slope_ci = 0.0;
  double prefactor = 0.0;
};

CancellationReport cancellation_residual(const ProfileTrajectory& w_traj, const CoefficientSet& c,
                                         const NormalFormParams& p = {}, ResidualMode mode = ResidualMode::total);

struct AlphaExtraction {
  std::vector<double> x;
  std::vector<cplx> alpha;
  std::vector<double> theta;  // Theta at the final time
  double residual = 0.0;      // sup over the last decade of |f e^{-i Theta} - alpha|
  std::vector<double> residual_t;
  std::vector<double> residual_history;  // sup_X |f e^{-i Theta} - alpha| at each stored time
  double kappa_fit = 0.0;  // decay exponent of sup_X |g(2t) - g(t)|, g = f e^{-i Theta}
};

// Theta by cumulative quadrature along the stored |f|, interpolated linearly between snapshots.
AlphaExtraction extract_alpha(const ProfileTrajectory& f_traj, const NormalFormParams& p = {});

// eps alpha exp[i t / (4|X|) + i (eps^2 / 64) (|alpha|^2 / |X|^5) log t].
cplx asymptotic_eval(cplx alpha, double t, double X, double epsilon, int ell = 0, const NormalFormParams& p = {});
// Unwrapped phase of asymptotic_eval and its t-derivative.
double asymptotic_phase(cplx alpha, double t, double X, double epsilon);
double asymptotic_phase_rate(cplx alpha, double t, double X, double epsilon);

// Least-squares fit of phase(t) = a + b log t over samples, returning b.
LineFit fit_log_coefficient(const std::vector<double>& t, const std::vector<double>& phase);
// Continuous unwrapping of a phase sequence.
std::vector<double> unwrap_phase(const std::vector<double>& phase);

}  // namespace ripple
