#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <map>
#include <random>

#include "ripple/normalform.hpp"

using namespace ripple;

namespace {

const cplx I(0.0, 1.0);
const double kSqrt2 = std::numbers::sqrt2;

double bump(double x, double a, double b) {
  if (x <= a || x >= b) return 0.0;
  const double s = (x - a) / (b - a);
  return std::exp(1.0 - 1.0 / (4.0 * s * (1.0 - s)));
}

double jb(double z) { return std::sqrt(1.0 + z * z); }

// |X| giving |d omega| = z.
double x_for_domega(double z) { return 0.5 / std::sqrt(z); }

// Late enough that both cutoffs vanish at |X| for the given parameters.
double saturated_time(double X, const NormalFormParams& p) {
  return std::pow(4.0 * p.chi_radius / std::abs(X), 1.0 / p.beta) * 2.0 + 100.0;
}

CoefficientSet generic_gammas() {
  CoefficientSet c;
  c.gamma3 = [](double z) { return 0.3 + 0.1 * z; };
  c.gamma_m1 = [](double z) { return -0.7 / (1.0 + z * z); };
  c.gamma_m3 = [](double z) { return 0.25 * std::cos(z); };
  return c;
}

cplx eval_poly(const CubicPoly& P, cplx f) {
  cplx r = 0.0;
  for (int i = 0; i < 4; ++i)
    for (int j = 0; i + j < 4; ++j) r += P(i, j) * std::pow(f, i) * std::pow(std::conj(f), j);
  return r;
}

ProfileField bump_field(double eps, double t0) {
  return make_profile_field(punctured_grid(81, 2.0, 0.05), t0, 0,
                            [&](double X) { return eps * bump(std::abs(X), 0.4, 1.8) * cplx(1.0, 0.5); });
}

}  // namespace

TEST(ProfileOde, ZeroFieldGivesZero) {
  const auto w = make_profile_field(punctured_grid(41, 2.0, 0.05), 30.0, 1, [](double) { return cplx(0.0); });
  EXPECT_EQ(ode_rhs_w(w, generic_gammas()).max_abs(), 0.0);
  EXPECT_EQ(nf_forward(w, choose_M_cancelling(generic_gammas(), 1)).max_abs(), 0.0);
  EXPECT_EQ(reduced_rhs(w).max_abs(), 0.0);
}

TEST(ProfileOde, PunctureRejected) {
  ProfileField w;
  w.x = {0.01};
  w.values = {0.1};
  w.t = 30.0;
  EXPECT_THROW(ode_rhs_w(w, {}), std::domain_error);
  EXPECT_THROW(point_coefficients(0.0, 30.0, 0, {}), std::domain_error);
}

TEST(ProfileOde, QuadraticCoefficientRatio) {
  const double expect = (1.0 + kSqrt2) / (3.0 * (kSqrt2 - 1.0));
  for (int ell : {0, 1, 2})
    for (double X : punctured_grid(41, 3.0, 0.05)) {
      const PointCoefficients k = point_coefficients(X, 1e4, ell, {});
      if (k.lambda == 0.0) continue;
      EXPECT_NEAR(std::abs(k.q_plus) / std::abs(k.q_minus), expect, 1e-13 * expect);
    }
}

TEST(ProfileOde, Phi1ClosedForm) {
  const double X = x_for_domega(1.0);
  for (double t : {20.0, 1e3, 1e8}) {
    const double cut = 1.0 - nf_chi(X * std::pow(t, 0.05), {});
    const PointCoefficients k = point_coefficients(X, t, 0, {});
    EXPECT_NEAR(k.phi1, cut * (3.0 * (3.0 - 2.0 * kSqrt2) / 16.0 + 0.5), 1e-15);
  }
}

TEST(ProfileOde, RhsMatchesFormula) {
  const double X = -0.8, t = 400.0, h = 1.0 / t;
  const int ell = 1;
  const CoefficientSet c = generic_gammas();
  const auto w = make_profile_field({X}, t, ell, [](double) { return cplx(0.2, -0.1); });
  const cplx v = w.values[0], vb = std::conj(v);
  const double z = -1.0 / (4.0 * X * X) * (X > 0 ? 1.0 : -1.0), ad = std::abs(z);
  const double cut = 1.0 - nf_chi(X * std::pow(t, 0.05), {});
  const double L = std::pow(jb(z), -2.0 * ell), K = jb(2.0 * z) * L;
  const double w52 = cut * std::pow(ad, 2.5);
  const cplx expect =
      0.5 * cut * std::sqrt(ad) * v -
      I * (std::sqrt(h) / 8.0) * cut * std::pow(ad, 1.5) * K * ((1.0 + kSqrt2) * v * v - 3.0 * (1.0 - kSqrt2) * vb * vb) +
      h * w52 *
          (c.gamma3(z) * v * v * v + (3.0 * K * K * (3.0 - 2.0 * kSqrt2) / 16.0 + 0.5 * L) * v * v * vb +
           c.gamma_m1(z) * v * vb * vb + c.gamma_m3(z) * vb * vb * vb);
  EXPECT_LT(std::abs(ode_rhs_w(w, c).values[0] - expect), 1e-15);
}

TEST(NormalForm, QuadraticTermsCancel) {
  NormalFormParams p;
  p.chi_radius = 0.25;
  for (int ell : {0, 1, 2})
    for (double X : punctured_grid(61, 2.0, 0.05)) {
      const double t = saturated_time(X, p);
      const CubicPoly T = transformed_rhs(X, t, ell, generic_gammas(), p);
      const double scale = std::sqrt(1.0 / t) * std::pow(std::abs(1.0 / (4.0 * X * X)), 1.5);
      EXPECT_LE(std::abs(T(2, 0)), 1e-14 * scale);
      EXPECT_LE(std::abs(T(1, 1)), 1e-14 * scale);
      EXPECT_LE(std::abs(T(0, 2)), 1e-14 * scale);
      EXPECT_NEAR(T(1, 0).real(), 0.5 / (2.0 * std::abs(X)), 1e-15);
    }
}

TEST(NormalForm, CubicTermsCancelWithChosenM) {
  NormalFormParams p;
  p.chi_radius = 0.25;
  for (int ell : {0, 1, 2}) {
    const CoefficientSet c = choose_M_cancelling(generic_gammas(), ell, p);
    for (double X : punctured_grid(61, 2.0, 0.05)) {
      const double t = saturated_time(X, p), h = 1.0 / t;
      const double z = 1.0 / (4.0 * X * X);
      const double scale = h * std::pow(z, 2.5);
      const CubicPoly T = transformed_rhs(X, t, ell, c, p);
      EXPECT_LE(std::abs(T(3, 0)), 1e-14 * scale) << X;
      EXPECT_LE(std::abs(T(1, 2)), 1e-14 * scale) << X;
      EXPECT_LE(std::abs(T(0, 3)), 1e-14 * scale) << X;
      EXPECT_NEAR(T(2, 1).real(), 0.5 * std::pow(jb(z), -2.0 * ell) * scale, 1e-13 * scale) << X;
      EXPECT_LE(std::abs(T(2, 1).imag()), 1e-14 * scale);
    }
  }
}

TEST(NormalForm, SurvivingCubicIndependentOfM) {
  NormalFormParams p;
  p.chi_radius = 0.25;
  const double X = 0.9, t = saturated_time(X, p);
  const CubicPoly a = transformed_rhs(X, t, 1, generic_gammas(), p);
  CoefficientSet c = generic_gammas();
  c.m3 = [](double) { return 2.0; };
  c.m_m1 = [](double) { return -1.5; };
  c.m_m3 = [](double) { return 0.4; };
  const CubicPoly b = transformed_rhs(X, t, 1, c, p);
  EXPECT_NEAR(std::abs(a(2, 1) - b(2, 1)), 0.0, 1e-18);
}

TEST(NormalForm, InjectedZeroGammaTildeGivesZeroM) {
  CoefficientSet c = generic_gammas();
  c.gtp3 = c.gtp_m1 = c.gtp_m3 = [](double) { return 0.0; };
  const CoefficientSet m = choose_M_cancelling(c, 0);
  for (double z : {0.1, 1.0, 7.0}) {
    EXPECT_EQ(m.m3(z), 0.0);
    EXPECT_EQ(m.m_m1(z), 0.0);
    EXPECT_EQ(m.m_m3(z), 0.0);
  }
}

TEST(NormalForm, InjectedGammaTildeLinearRelations) {
  CoefficientSet c;
  c.gtp3 = [](double z) { return z; };
  c.gtp_m1 = [](double z) { return 2.0 * z; };
  c.gtp_m3 = [](double z) { return 3.0 * z; };
  const CoefficientSet m = choose_M_cancelling(c, 0);
  EXPECT_DOUBLE_EQ(m.m3(0.5), 0.5);
  EXPECT_DOUBLE_EQ(m.m_m1(0.5), -1.0);
  EXPECT_DOUBLE_EQ(m.m_m3(0.5), -0.75);
}

TEST(NormalForm, ComputedGammaTildePrimeIsReal) {
  for (int ell : {0, 1})
    for (double z : {0.2, 1.0, 5.0}) {
      const double X = x_for_domega(z);
      NormalFormParams p;
      p.chi_radius = 0.25;
      const CubicPoly T = transformed_rhs(X, saturated_time(X, p), ell, generic_gammas(), p);
      const double scale = std::pow(z, 2.5);
      EXPECT_LE(std::abs(T(3, 0).imag()), 1e-14 * scale);
      EXPECT_LE(std::abs(T(1, 2).imag()), 1e-14 * scale);
      EXPECT_LE(std::abs(T(0, 3).imag()), 1e-14 * scale);
    }
}

TEST(NormalForm, InverseCubicCoefficient) {
  NormalFormParams p;
  p.chi_radius = 0.25;
  for (int ell : {0, 1, 2})
    for (double X : {-1.3, -0.6, 0.3, 0.7, 1.9}) {
      const double t = saturated_time(X, p), h = 1.0 / t, z = 1.0 / (4.0 * X * X);
      const double K2 = std::pow(jb(2.0 * z), 2.0 * ell) * std::pow(jb(z), -4.0 * ell);
      const double expect = (3.0 - 2.0 * kSqrt2) / 8.0 * K2 * h * z * z;
      for (const CoefficientSet& c : {CoefficientSet{}, choose_M_cancelling(generic_gammas(), ell, p)}) {
        const CubicPoly S = inverse_series(X, t, ell, c, p);
        EXPECT_NEAR(S(2, 1).real(), expect, 1e-13 * expect);
        EXPECT_LE(std::abs(S(2, 1).imag()), 1e-13 * expect);
      }
    }
}

TEST(NormalForm, RoundTripExact) {
  const CoefficientSet c = choose_M_cancelling(generic_gammas(), 1);
  const auto w = make_profile_field(punctured_grid(41, 2.0, 0.05), 50.0, 1,
                                    [](double X) { return 0.3 * std::exp(-X * X) * cplx(std::cos(5 * X), std::sin(3 * X)); });
  const ProfileField back = nf_inverse(nf_forward(w, c), c);
  for (std::size_t q = 0; q < w.size(); ++q) EXPECT_LT(std::abs(back.values[q] - w.values[q]), 1e-14);
}

TEST(NormalForm, SeriesInverseDefectDecaysInH) {
  NormalFormParams p;
  p.chi_radius = 0.25;
  const double X = 0.9;
  const CoefficientSet c = choose_M_cancelling(generic_gammas(), 0, p);
  std::vector<double> ts, defect;
  for (double t = 1e2; t <= 1e6; t *= 3.0) {
    const auto w = make_profile_field({X}, t, 0, [](double) { return cplx(0.3, 0.2); });
    const cplx f = nf_forward(w, c, p).values[0];
    ts.push_back(t);
    defect.push_back(std::abs(eval_poly(inverse_series(X, t, 0, c, p), f) - w.values[0]));
  }
  EXPECT_GE(-fit_loglog(ts, defect).slope, 1.2);
}

TEST(NormalForm, AmplitudeRadiusEnforced) {
  const auto w = make_profile_field({1.0}, 50.0, 0, [](double) { return cplx(0.8); });
  EXPECT_THROW(nf_forward(w, {}), std::domain_error);
  EXPECT_THROW(nf_inverse(w, {}), std::domain_error);
}

TEST(ReducedFlow, PhaseRateAtUnitX) {
  const double eps = 0.07, t = 300.0;
  NormalFormParams p;
  p.chi_radius = 0.25;
  const auto f = make_profile_field({1.0, -1.0}, t, 0, [&](double) { return cplx(eps, 0.0); });
  const ProfileField r = reduced_rhs(f, p);
  for (const cplx& v : r.values) EXPECT_NEAR(v.real() / eps - 0.25, eps * eps / (64.0 * t), 1e-16);
}

TEST(ReducedFlow, RhsIsRealMultiple) {
  const auto f = make_profile_field(punctured_grid(41, 2.0, 0.05), 80.0, 1,
                                    [](double X) { return cplx(std::sin(X), 0.3); });
  const ProfileField r = reduced_rhs(f);
  for (std::size_t q = 0; q < f.size(); ++q) EXPECT_LT(std::abs((r.values[q] / f.values[q]).imag()), 1e-15);
}

TEST(ReducedFlow, ZeroStaysZero) {
  const auto f = make_profile_field(punctured_grid(11, 2.0, 0.05), 20.0, 0, [](double) { return cplx(0.0); });
  const ProfileTrajectory tr = integrate_reduced(f, 40.0, 0.1);
  for (const ProfileField& s : tr.f) EXPECT_EQ(s.max_abs(), 0.0);
}

TEST(ReducedFlow, StepSizeChecked) {
  const auto f = make_profile_field({1.0}, 20.0, 0, [](double) { return cplx(0.1); });
  EXPECT_THROW(integrate_reduced(f, 40.0, 0.2), std::invalid_argument);
}

TEST(ReducedFlow, ModulusAndClosedFormPhase) {
  NormalFormParams p;
  p.chi_radius = 0.25;
  const std::vector<double> xs = {-1.7, -1.0, -0.3, 0.12, 0.5, 1.0};
  const auto f0 = make_profile_field(xs, 20.0, 0, [](double X) { return 0.1 * std::polar(1.0, X); });
  const ProfileTrajectory tr = integrate_reduced(f0, 2000.0, 0.1, p, 1);
  for (std::size_t q = 0; q < xs.size(); ++q) {
    std::vector<double> ph;
    for (const ProfileField& s : tr.f) ph.push_back(std::arg(s.values[q] / f0.values[q]));
    const std::vector<double> un = unwrap_phase(ph);
    for (std::size_t i = 0; i < tr.size(); ++i) {
      EXPECT_LE(std::abs(std::abs(tr.f[i].values[q]) - 0.1), 1e-10);
      EXPECT_NEAR(un[i], reduced_phase(xs[q], 20.0, tr.t[i], 0.1, 0, p), 1e-8) << xs[q] << " " << tr.t[i];
    }
  }
}

TEST(ReducedFlow, LogCoefficientAtUnitX) {
  NormalFormParams p;
  p.chi_radius = 0.25;
  const auto f0 = make_profile_field({1.0}, 20.0, 0, [](double) { return cplx(0.1, 0.0); });
  const ProfileTrajectory tr = integrate_reduced(f0, 2000.0, 0.1, p, 50);
  std::vector<double> ph;
  for (const ProfileField& s : tr.f) ph.push_back(std::arg(s.values[0]));
  std::vector<double> un = unwrap_phase(ph);
  for (std::size_t i = 0; i < un.size(); ++i) un[i] -= 0.25 * tr.t[i];
  EXPECT_NEAR(fit_log_coefficient(tr.t, un).slope, 1.5625e-4, 1e-7);
}

TEST(Cancellation, LinearizedFlowLeavesNoResidual) {
  NormalFormParams p;
  p.chi_radius = 0.25;
  CoefficientSet c;
  c.quadratic_scale = 0.0;
  c = choose_M_cancelling(c, 0, p);
  const ProfileTrajectory tr = integrate_w(bump_field(0.1, 50.0), 500.0, 0.1, c, p, 200);
  for (ResidualMode mode : {ResidualMode::algebraic, ResidualMode::total}) {
    const CancellationReport r = cancellation_residual(tr, c, p, mode);
    for (double v : r.residual) EXPECT_LE(v, 1e-15);
  }
}

class CancellationRun : public ::testing::Test {
 protected:
  static const ProfileTrajectory& run(double eps) {
    static std::map<double, ProfileTrajectory> cache;
    auto it = cache.find(eps);
    if (it == cache.end()) it = cache.emplace(eps, integrate_w(bump_field(eps, 50.0), 2000.0, 0.1, coeffs(), params(), 20)).first;
    return it->second;
  }
  static NormalFormParams params() {
    NormalFormParams p;
    p.chi_radius = 0.25;
    return p;
  }
  static const CoefficientSet& coeffs() {
    static const CoefficientSet c = choose_M_cancelling(CoefficientSet{}, 0, params());
    return c;
  }
};

TEST_F(CancellationRun, FrozenCoefficientSlopeAndQuarticScaling) {
  const CancellationReport a = cancellation_residual(run(0.1), coeffs(), params(), ResidualMode::algebraic);
  const CancellationReport b = cancellation_residual(run(0.2), coeffs(), params(), ResidualMode::algebraic);
  EXPECT_GE(a.slope, 1.25);
  EXPECT_GE(b.slope, 1.25);
  const double ratio = b.prefactor / a.prefactor;
  EXPECT_GE(ratio, 8.0);
  EXPECT_LE(ratio, 32.0);
}

TEST_F(CancellationRun, TotalDerivativeSlope) {
  const CancellationReport a = cancellation_residual(run(0.1), coeffs(), params(), ResidualMode::total);
  const CancellationReport b = cancellation_residual(run(0.2), coeffs(), params(), ResidualMode::total);
  EXPECT_GE(a.slope, 1.25);
  // The explicit t-dependence of the quadratic transform is quadratic in amplitude.
  EXPECT_NEAR(b.prefactor / a.prefactor, 4.0, 0.5);
}

TEST(Cancellation, NeedsSnapshots) {
  ProfileTrajectory tr;
  tr.t = {50.0};
  tr.f = {bump_field(0.1, 50.0)};
  EXPECT_THROW(cancellation_residual(tr, {}), std::invalid_argument);
}

TEST(ExtractAlpha, ZeroRemainderRecoversInitialData) {
  NormalFormParams p;
  p.chi_radius = 0.25;
  const auto f0 = make_profile_field(punctured_grid(21, 2.0, 0.05), 20.0, 0,
                                     [](double X) { return 0.1 * std::exp(-X * X) * std::polar(1.0, 2.0 * X); });
  const AlphaExtraction ex = extract_alpha(integrate_reduced(f0, 2000.0, 0.1, p, 10), p);
  EXPECT_LE(ex.residual, 1e-8);
  for (std::size_t q = 0; q < f0.size(); ++q) EXPECT_LT(std::abs(ex.alpha[q] - f0.values[q]), 1e-8);
}

TEST(ExtractAlpha, ZeroDataGivesZero) {
  const auto f0 = make_profile_field(punctured_grid(11, 2.0, 0.05), 20.0, 0, [](double) { return cplx(0.0); });
  const AlphaExtraction ex = extract_alpha(integrate_reduced(f0, 2000.0, 0.1, {}, 100));
  for (const cplx& a : ex.alpha) EXPECT_EQ(a, cplx(0.0));
}

TEST(ExtractAlpha, ShortTrajectoryRejected) {
  const auto f0 = make_profile_field({1.0}, 20.0, 0, [](double) { return cplx(0.1); });
  EXPECT_THROW(extract_alpha(integrate_reduced(f0, 1000.0, 0.1, {}, 100)), std::invalid_argument);
}

TEST(ExtractAlpha, InjectedRemainderDecayRate) {
  NormalFormParams p;
  p.chi_radius = 0.25;
  const double eps = 0.05;
  const auto f0 = make_profile_field({-1.0, 0.6, 1.0}, 20.0, 0, [](double) { return cplx(0.1); });
  // Real multiple of f: a phase perturbation of size eps t^{-1-kappa}, integrable in t.
  const RemainderFn r = [&](double, double, cplx v) { return eps * v; };
  const ProfileTrajectory tr = integrate_reduced(f0, 2e4, 0.1, p, 100, r);
  const AlphaExtraction ex = extract_alpha(tr, p);
  EXPECT_NEAR(ex.kappa_fit, p.kappa, 0.02);
  EXPECT_GT(ex.kappa_fit, 0.5 * p.kappa);
  EXPECT_LT(ex.kappa_fit, 1.5 * p.kappa);
}

TEST(Asymptotic, ZeroProfile) { EXPECT_EQ(asymptotic_eval(0.0, 100.0, 0.7, 0.1), cplx(0.0)); }

TEST(Asymptotic, PhaseDerivative) {
  const cplx alpha(0.8, -0.3);
  const double eps = 0.1;
  for (double X : {-1.2, 0.4, 1.0})
    for (double t : {50.0, 1e3, 1e5}) {
      const double expect = 1.0 / (4.0 * std::abs(X)) + eps * eps * std::norm(alpha) / (64.0 * std::pow(std::abs(X), 5) * t);
      EXPECT_NEAR(asymptotic_phase_rate(alpha, t, X, eps), expect, 1e-12);
      const double dt = 1e-3 * t;
      const double fd = (asymptotic_phase(alpha, t + dt, X, eps) - asymptotic_phase(alpha, t - dt, X, eps)) / (2.0 * dt);
      EXPECT_NEAR(fd, expect, 1e-8);
    }
}

TEST(Asymptotic, EvalForm) {
  const cplx alpha(0.5, 0.2);
  const double t = 700.0, X = -0.9, eps = 0.05;
  const cplx v = asymptotic_eval(alpha, t, X, eps);
  EXPECT_NEAR(std::abs(v), eps * std::abs(alpha), 1e-15);
  const double ph = t / (4.0 * 0.9) + eps * eps / 64.0 * std::norm(alpha) / std::pow(0.9, 5) * std::log(t);
  EXPECT_LT(std::abs(v - eps * alpha * std::polar(1.0, ph)), 1e-14);
}

TEST(Asymptotic, GaugeIdentityAtRandomPoints) {
  std::mt19937_64 gen(7);
  std::uniform_real_distribution<double> u(0.05, 3.0);
  std::bernoulli_distribution sgn(0.5);
  const cplx alpha(1.0, 0.0);
  for (int k = 0; k < 1000; ++k) {
    const double X = sgn(gen) ? u(gen) : -u(gen);
    const double z = -(X > 0 ? 1.0 : -1.0) / (4.0 * X * X);
    const double from_symbol = 0.5 * std::sqrt(std::abs(z)) * z * z;
    const double eps = 1.0, t = std::exp(1.0);
    const double log_coef = asymptotic_phase(alpha, t, X, eps) - asymptotic_phase(alpha, 1.0, X, eps) -
                            (t - 1.0) / (4.0 * std::abs(X));
    EXPECT_NEAR(log_coef, from_symbol, 1e-11 * from_symbol) << X;
  }
}

TEST(Phase, UnwrapRemovesJumps) {
  std::vector<double> raw, truth;
  for (int i = 0; i < 200; ++i) {
    truth.push_back(0.3 * i);
    raw.push_back(std::remainder(0.3 * i, 2.0 * std::numbers::pi));
  }
  const std::vector<double> un = unwrap_phase(raw);
  for (std::size_t i = 0; i < un.size(); ++i) EXPECT_NEAR(un[i], truth[i], 1e-12);
}

TEST(Phase, LogCoefficientFit) {
  std::vector<double> t, ph;
  for (double s = 10.0; s < 1e4; s *= 1.3) {
    t.push_back(s);
    ph.push_back(0.4 + 2.5e-3 * std::log(s));
  }
  EXPECT_NEAR(fit_log_coefficient(t, ph).slope, 2.5e-3, 1e-14);
}
