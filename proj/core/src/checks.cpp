#include "ripple/checks.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>

#include "ripple/fourier.hpp"
#include "ripple/semiclassical.hpp"

namespace ripple {

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;
const cplx I(0.0, 1.0);

double rel(const GridFunction& a, const GridFunction& b) { return (a - b).l2() / b.l2(); }

SurfaceState periodic_state(std::size_t n, double eps) {
  auto eta = GridFunction::from_function(n, kTwoPi, [&](double x) {
    return cplx(eps * (std::cos(x) + 0.5 * std::sin(2 * x) - 0.2 * std::cos(3 * x)));
  });
  auto psi = GridFunction::from_function(n, kTwoPi, [&](double x) {
    return cplx(eps * (std::sin(x) - 0.4 * std::cos(2 * x) + 0.3 * std::sin(4 * x)));
  });
  return {eta, psi};
}

DnoOptions tight_dno() {
  DnoOptions o;
  o.tol = 1e-13;
  o.damping = 1.0;
  return o;
}

double slope(double e1, double r1, double e2, double r2) { return std::log(r1 / r2) / std::log(e1 / e2); }

double bump(double x, double a, double b) {
  if (x <= a || x >= b) return 0.0;
  const double s = (x - a) / (b - a);
  return std::exp(1.0 - 1.0 / (4.0 * s * (1.0 - s)));
}

}  // namespace

Check dno_flat_check(const DnoCheckParams& p) {
  std::mt19937_64 rng(p.seed);
  std::normal_distribution<double> amp(0.0, 1.0);
  std::uniform_real_distribution<double> phase(0.0, kTwoPi);
  double flat = 0.0;
  for (int s = 0; s < p.flat_samples; ++s) {
    std::vector<std::pair<double, double>> modes(p.flat_max_mode);
    for (auto& m : modes) m = {amp(rng), phase(rng)};
    const GridFunction psi = GridFunction::from_function(p.flat_points, kTwoPi, [&](double x) {
      double v = 0.0;
      for (int k = 1; k <= p.flat_max_mode; ++k) v += modes[k - 1].first * std::cos(k * x + modes[k - 1].second);
      return cplx(v);
    });
    const SurfaceState st{GridFunction(p.flat_points, kTwoPi), psi};
    flat = std::max(flat, rel(dno_elliptic(st), apply_multiplier(psi, symbols::abs_pow(1.0))));
  }
  return check_at_most("dno_flat", "max relative L2 error against |D| psi", flat, p.flat_tolerance);
}

Check dno_manufactured_check(const DnoCheckParams& p) {
  const std::size_t n = p.manufactured_points;
  const int k = 3;
  const auto eta = GridFunction::from_function(
      n, kTwoPi, [](double x) { return cplx(0.03 * std::cos(x) + 0.02 * std::sin(2 * x)); });
  const auto deta = derivative(eta);
  cvec psi(n), expect(n);
  for (std::size_t j = 0; j < n; ++j) {
    const cplx e = std::exp(I * (k * eta.x(j))) * std::exp(double(k) * eta[j].real());
    psi[j] = e;
    expect[j] = (double(k) - I * double(k) * deta[j].real()) * e;
  }
  const SurfaceState ms{eta, GridFunction(kTwoPi, psi)};
  return check_at_most("dno_manufactured", "relative L2 error against (|k| - i k eta') e^{ikx} e^{|k| eta}",
                       rel(dno_elliptic(ms), GridFunction(kTwoPi, expect)), p.manufactured_tolerance);
}

Check dno_taylor_check(const DnoCheckParams& p) {
  std::vector<double> le, lr;
  for (double eps : {0.04, 0.02, 0.01, 0.005}) {
    const SurfaceState s = periodic_state(64, eps);
    le.push_back(eps);
    lr.push_back((dno_elliptic(s, tight_dno()) - dno_quadratic(s)).l2());
  }
  const double sl = fit_loglog(le, lr).slope;
  return check_at_most("dno_taylor_slope", "abs(slope - 3) of the quadratic-expansion remainder", std::abs(sl - 3.0),
                       p.slope_tolerance);
}

std::vector<Check> dno_checks(const DnoCheckParams& p) {
  return {dno_flat_check(p), dno_manufactured_check(p), dno_taylor_check(p)};
}

std::vector<Check> ladder_checks(double tolerance) {
  const double eps[] = {0.04, 0.02, 0.01, 0.005};
  double r[4][3];
  const CubicTerms lin{true, false, false}, quad{true, true, false}, cub{true, true, true};
  for (int e = 0; e < 4; ++e) {
    const SurfaceState s = periodic_state(128, eps[e]);
    const GridFunction full = rhs_full_complex(s, DnoMode::elliptic, tight_dno());
    const GridFunction u = to_complex(s);
    r[e][0] = (full - rhs_cubic(u, lin)).l2();
    r[e][1] = (full - rhs_cubic(u, quad)).l2();
    r[e][2] = (full - rhs_cubic(u, cub)).l2();
  }
  std::vector<Check> out;
  const char* names[] = {"ladder_linear", "ladder_quadratic", "ladder_cubic"};
  for (int j = 0; j < 3; ++j) {
    double worst = 0.0;
    for (int e = 0; e + 1 < 4; ++e)
      worst = std::max(worst, std::abs(slope(eps[e], r[e][j], eps[e + 1], r[e + 1][j]) - (j + 2.0)));
    out.push_back(check_at_most(names[j], "max abs(slope - " + std::to_string(j + 2) + ") over consecutive eps",
                                worst, tolerance));
  }
  return out;
}

std::vector<Check> conservation_checks(const ConservationCheckParams& p) {
  StepOptions opt;
  opt.wrap_tolerance = 0.0;
  opt.dno = tight_dno();
  opt.dno.tol = 1e-12;
  opt.save_every = std::max(1, static_cast<int>(std::lround(0.5 / p.dt)));
  const SurfaceState s0 = periodic_state(p.n_points, p.epsilon);
  const Trajectory tr = step_integrate(make_full_trajectory(1.0, s0, p.epsilon), p.t_end, p.dt, Scheme::rk4, opt);
  const double h0 = hamiltonian(s0, opt.dno);
  double drift = 0.0;
  for (const auto& s : tr.full) drift = std::max(drift, std::abs(hamiltonian(s, opt.dno) - h0) / std::abs(h0));
  std::vector<Check> out;
  out.push_back(check_at_most("hamiltonian_drift", "max relative drift over [1, t_end]", drift,
                              p.hamiltonian_tolerance));

  StepOptions one = opt;
  one.save_every = 1;
  const Trajectory base = step_integrate(make_full_trajectory(1.0, s0, p.epsilon), 1.1, 0.05, Scheme::rk4, one);
  const double d0 = std::max(one_step_defect(base, 0, opt.dno), 1e-15);
  double ratio = 0.0;
  for (double lambda : {0.5, 2.0})
    ratio = std::max(ratio, one_step_defect(scale_solution(base, lambda), 0, opt.dno) / d0);
  out.push_back(check_at_most("scaling_defect", "max scaled / baseline one-step defect", ratio, p.defect_factor));
  return out;
}

std::vector<Check> symbol_checks(double margin) {
  Symbol2D a1, a2;
  a1.eval = [](double x, double xi) { return cplx(std::cos(x) / (1.0 + xi * xi), std::exp(-x * x) * xi); };
  a2.eval = [](double x, double xi) { return cplx(std::exp(-0.5 * x * x) * std::sqrt(1.0 + xi * xi), std::sin(x)); };
  const std::vector<double> hs{0.2, 0.1, 0.05, 0.025};
  const auto packet = [](double h) {
    return GridFunction::from_function(2048, 40.0, [=](double x) { return std::exp(-x * x) * std::exp(I * x / h); });
  };
  std::vector<Check> out;
  for (int N : {0, 1, 2}) {
    const CompositionReport r = compose_residual(a1, a2, N, hs, packet);
    out.push_back(check_at_least("composition_order_" + std::to_string(N), "residual slope in h", r.slope,
                                 N + 1.0 - margin));
  }
  return out;
}

std::vector<Check> class_checks(double slope_tolerance, double control_tolerance) {
  const auto profile = [](int ell) {
    return [ell](double, double hbar) {
      return GridFunction::from_function(4096, 4.0, [=](double x) {
        const double th = bump(x, 0.3, 1.2);
        return th == 0.0 ? cplx(0.0) : th * std::exp(I * (ell * phase_omega(x) / hbar));
      });
    };
  };
  const double h = 0.01;
  const std::vector<std::pair<double, double>> pairs{{h, 0.04}, {h, 0.02}, {h, 0.01}, {h, 0.005}};
  const ClassDefectReport on = class_defect(profile(1), symbols2d::lagrangian_equation(1), pairs);
  const ClassDefectReport off = class_defect(profile(2), symbols2d::lagrangian_equation(1), pairs);
  return {check_at_most("class_defect_slope", "abs(defect slope in hbar - 1)", std::abs(on.slope_hbar - 1.0),
                        slope_tolerance),
          check_at_most("class_control_slope", "abs(defect slope in hbar) on the wrong Lagrangian",
                        std::abs(off.slope_hbar), control_tolerance)};
}

}  // namespace ripple
