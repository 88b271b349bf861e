#pragma once

#include <array>
#include <functional>
#include <limits>
#include <string>
#include <utility>
#include <vector>

#include "ripple/evolution.hpp"
#include "ripple/fit.hpp"
#include "ripple/grid.hpp"

namespace ripple {

// Phase-space symbol a(x, xi).
struct Symbol2D {
  using Fn = std::function<cplx(double, double)>;
  using Factor = std::function<cplx(double)>;

  Fn eval;
  // Optional separable form a = sum_r p_r(x) q_r(xi), used as a fast path.
  std::vector<std::pair<Factor, Factor>> terms;
  // Optional exact partial derivatives d_x^i d_xi^k a.
  std::function<cplx(double, double, int, int)> derivative;
  bool x_independent = false;
  std::string support_meta;
  std::array<double, 4> order_meta{};  // (l, l', d, d')

  cplx operator()(double x, double xi) const { return eval(x, xi); }
};

namespace symbols2d {
Symbol2D constant(cplx c);
Symbol2D of_xi(std::function<cplx(double)> q);
Symbol2D of_x(std::function<cplx(double)> p);
Symbol2D separable(std::vector<std::pair<Symbol2D::Factor, Symbol2D::Factor>> terms);
// x xi
Symbol2D x_xi();
// x xi + |xi|^{1/2}
Symbol2D linear_flow();
// xi - l d omega(x)
Symbol2D lagrangian_equation(int ell = 1);
}  // namespace symbols2d

// omega(x) = 1 / (4|x|) and d omega(x) = -sgn(x) / (4 x^2).
double phase_omega(double x);
double phase_domega(double x);

// d_x^i d_xi^k a at (x, xi): exact when available, else eighth-order central differences.
cplx symbol_derivative(const Symbol2D& a, double x, double xi, int i, int k);

// (Op_h(a) f)(x) = sum_k a(x, h k) f^_k e^{ikx}. Modes with |f^_k| below populated_tol * max are skipped
// on the direct path.
GridFunction op_h_quantize(const Symbol2D& a, const GridFunction& f, double h, double populated_tol = 1e-15);

struct CompositionReport {
  int order = 0;
  std::vector<double> h;
  std::vector<double> residual;  // sup norm, relative to |f|_inf
  bool exact = false;            // all residuals at roundoff level
  double slope = 0.0;            // +infinity when exact
  double slope_ci = 0.0;
};

// Residual of Op_h(a1) Op_h(a2) f against Op_h(sum_{j<=N} (h/i)^j / j! d_xi^j a1 d_x^j a2) f.
CompositionReport compose_residual(const Symbol2D& a1, const Symbol2D& a2, int order, const std::vector<double>& h_values,
                                   const std::function<GridFunction(double)>& test_f);

// v(X) = sqrt(t) u(t, tX) on the relabelled grid of length L / t, and its inverse.
GridFunction to_profile(const GridFunction& u, double t);
GridFunction from_profile(const GridFunction& v, double t);

// Quadratic and cubic terms of the profile equation, with Op_h multipliers at h = 1/t.
GridFunction profile_quadratic(const GridFunction& v, double h);
GridFunction profile_cubic(const GridFunction& v, double h);

struct ProfileResidual {
  double t = 0.0;
  double h = 0.0;
  double lhs_inf = 0.0;       // |(D_t - Op_h(x xi + |xi|^{1/2})) v|_inf
  double quadratic_inf = 0.0; // |sqrt(h) Q_0(V)|_inf
  double cubic_inf = 0.0;     // |h C_0(V)|_inf
  double defect_inf = 0.0;    // |lhs - sqrt(h) Q_0 - h(-i v / 2 + C_0)|_inf
  double defect_l2 = 0.0;
  double identity_inf = 0.0;  // |D_t v + i h Z v + Op_h(x xi) v|_inf, relative to |D_t v|_inf
};

// Profile equation residual at snapshot i of a cubic or full trajectory (centred time differences).
ProfileResidual equation_residual(const Trajectory& traj, std::size_t i);

struct DyadicDecomposition {
  double h = 0.0;
  int j_min = 0;
  int j_max = 0;
  GridFunction v_low;   // sum_{j<j_min} Delta_j^h v
  GridFunction v_high;  // sum_{j>j_max} Delta_j^h v
  std::vector<int> j;
  std::vector<double> h_j;
  std::vector<GridFunction> w;  // Theta*_{-j} Delta_j^h v on the dilated grid

  // v_low + v_high + sum_j Theta*_j w_j.
  GridFunction reassemble() const;
};

struct DyadicParams {
  double C = 4.0;
  double sigma = 0.3;
  double beta = 0.05;
};

// Index set J(h, C) = {j : C^{-1} h^{2(1-sigma)} <= 2^j <= C h^{-2 beta}} as [j_min, j_max].
std::pair<int, int> dyadic_range(double h, const DyadicParams& p);
DyadicDecomposition dyadic_decompose(const GridFunction& v, double h, const DyadicParams& p = {});
// Delta_j^h = phi(2^{-j} h D).
GridFunction semiclassical_block(const GridFunction& v, double h, int j);
// Theta*_j v = v(2^{j/2} .) as a relabelled grid function.
GridFunction theta_dilate(const GridFunction& v, int j);
// a_j(x, xi) = a(2^{-j/2} x, 2^j xi).
Symbol2D dilate_symbol(const Symbol2D& a, int j);

double lp_norm(const GridFunction& f, double p);

struct ClassDefectSample {
  double h = 0.0;
  double hbar = 0.0;
  double norm = 0.0;         // |v|_p
  double defect_hbar = 0.0;  // |Op_hbar(e) v|_p
  double defect_h = 0.0;     // |Op_h(e) v|_p
};

struct ClassDefectReport {
  std::vector<ClassDefectSample> samples;
  double bound_constant = 0.0;  // best constant in the size estimate
  double i_constant = 0.0;      // best constant with gain h^{1/2} + hbar
  double j_constant = 0.0;      // best constant with gain hbar
  double slope_hbar = 0.0;      // log-log slope of defect_hbar against hbar
  double slope_hbar_ci = 0.0;
  std::string classification;   // "J", "I" or "none"
};

struct ClassParams {
  double nu = 0.0;
  double mu = 0.0;
  double gamma = 0.0;
  double p = std::numeric_limits<double>::infinity();
  double sigma = 0.3;
  double beta = 0.05;
  double C0 = 8.0;
};

// Best constants and defect slopes of a two-parameter family against an equation e of a Lagrangian.
ClassDefectReport class_defect(const std::function<GridFunction(double, double)>& family, const Symbol2D& e,
                               const std::vector<std::pair<double, double>>& pairs, const ClassParams& params = {});

struct CutoffParams {
  double width = 0.2;  // Gamma supported in [-width, width], equal to one on half of it
  double C0 = 8.0;     // Phi equal to one on [1/C0, C0]
};

double cutoff_Gamma(double s, double width);
double cutoff_Phi(double xi, double C0);
// gamma_{l Lambda}(x, xi) = Phi(xi) Gamma((xi - l d omega(x)) / |l d omega(x)|), or Phi (1 - Gamma) when complement.
Symbol2D harmonic_cutoff_symbol(int ell, const CutoffParams& p = {}, bool complement = false);
GridFunction microlocal_cutoff(const GridFunction& w, double h, int ell, const CutoffParams& p = {});
// |(Op(gamma)^2 - Op(gamma)) w| / (h |w|).
double cutoff_idempotence_constant(const GridFunction& w, double h, int ell, const CutoffParams& p = {});

struct HarmonicParams {
  CutoffParams cutoff;
  double beta = 0.05;
  // chi(s) = rho(2 s / chi_radius): one for |s| <= chi_radius / 2, zero beyond chi_radius.
  double chi_radius = 0.25;
  // Region |X| in [x_min, x_max]; when x_max <= x_min the region is where |w_Lambda| >= region_fraction * max.
  double x_min = 0.0;
  double x_max = 0.0;
  double region_fraction = 0.3;
};

struct HarmonicReport {
  double t = 0.0;
  double h = 0.0;
  double lambda_inf = 0.0;  // |w_Lambda|_inf on the region
  double plus_l2 = 0.0;     // |Op_h(gamma_{2 Lambda}) v| / sqrt(h) on the region
  double minus_l2 = 0.0;
  double ratio = 0.0;       // plus_l2 / minus_l2
  double predicted_ratio = 0.0;
  double mismatch_plus = 0.0;   // relative sup mismatch against the bound-harmonic prediction
  double mismatch_minus = 0.0;
  double region_lo = 0.0;
  double region_hi = 0.0;
};

// Second-harmonic content of a cubic-model trajectory at snapshot i against the quadratic prediction.
HarmonicReport harmonic_extract(const Trajectory& traj, std::size_t i, const HarmonicParams& p = {});

struct EFRow {
  double t = 0.0;
  std::vector<double> E;  // E_k, k = 0..k_max
  std::vector<double> F;
};

// Dyadic L^inf / L^2 functionals of the profile with weights 2^{j_+ b} and 2^{j_+ a}.
std::vector<EFRow> functionals_EF(const Trajectory& traj, int k_max, double a, double b, const DyadicParams& p = {},
                                  std::size_t stride = 1);
// E_0 / F_0 of a single profile at h.
std::pair<double, double> profile_EF0(const GridFunction& v, double h, double a, double b, const DyadicParams& p = {});

}  // namespace ripple
