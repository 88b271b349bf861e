#include <gtest/gtest.h>

#include <cmath>
#include <numbers>

#include "ripple/fourier.hpp"
#include "ripple/semiclassical.hpp"

using namespace ripple;

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;
const cplx I(0.0, 1.0);

GridFunction gaussian_packet(std::size_t n, double L, double xi0, double h) {
  return GridFunction::from_function(n, L, [=](double x) { return std::exp(-x * x) * std::exp(I * xi0 * x / h); });
}

Symbol2D generic_a1() {
  Symbol2D a;
  a.eval = [](double x, double xi) { return cplx(std::cos(x) / (1.0 + xi * xi), std::exp(-x * x) * xi); };
  return a;
}

Symbol2D generic_a2() {
  Symbol2D a;
  a.eval = [](double x, double xi) { return cplx(std::exp(-0.5 * x * x) * std::sqrt(1.0 + xi * xi), std::sin(x)); };
  return a;
}

// Smooth bump supported in [a, b].
double bump(double x, double a, double b) {
  if (x <= a || x >= b) return 0.0;
  const double s = (x - a) / (b - a);
  return std::exp(1.0 - 1.0 / (4.0 * s * (1.0 - s)));
}

GridFunction lagrangian_profile(double hbar, int ell, double x_hi = 1.2, std::size_t n = 4096, double L = 4.0) {
  return GridFunction::from_function(n, L, [=](double x) {
    const double th = bump(x, 0.3, x_hi);
    return th == 0.0 ? cplx(0.0) : th * std::exp(I * (ell * phase_omega(x) / hbar));
  });
}

// Exact linear flow of a packet, saved at the given times.
Trajectory linear_packet_trajectory(const std::vector<double>& times, double eps, double width = 10.0,
                                    std::size_t n = 4096, double L = 2048.0) {
  const GridFunction u0 = wavepacket_data(n, L, eps, width, 1.0, 0.0);
  Trajectory tr = make_cubic_trajectory(1.0, u0, eps);
  tr.times.clear();
  tr.cubic.clear();
  tr.uniform = false;
  for (double t : times) {
    tr.times.push_back(t);
    tr.cubic.push_back(apply_multiplier(u0, symbols::half_wave(t - 1.0)));
  }
  return tr;
}

// Cubic-model packet run shared by the slow tests.
const Trajectory& packet_run() {
  static const Trajectory tr = [] {
    StepOptions o;
    o.wrap_tolerance = 0.0;
    o.save_every = 200;
    return step_integrate(make_cubic_trajectory(1.0, wavepacket_data(4096, 2048.0, 0.05, 10.0, 1.0, 0.0), 0.05), 501.0,
                          0.25, Scheme::if_rk4, o);
  }();
  return tr;
}

}  // namespace

TEST(Quantization, IdentitySymbolIsIdentity) {
  const GridFunction f = gaussian_packet(256, 20.0, 1.0, 0.1);
  Symbol2D one;
  one.eval = [](double, double) { return cplx(1.0); };
  EXPECT_LT((op_h_quantize(one, f, 0.1) - f).max_abs(), 1e-12);
  EXPECT_LT((op_h_quantize(symbols2d::constant(1.0), f, 0.1) - f).max_abs(), 1e-12);
}

TEST(Quantization, XIndependentMatchesMultiplier) {
  const GridFunction f = gaussian_packet(256, 20.0, 1.0, 0.25);
  const double h = 0.25;
  Symbol2D a;
  a.eval = [](double, double xi) { return cplx(std::sqrt(std::abs(xi))); };
  const GridFunction direct = op_h_quantize(a, f, h);
  const GridFunction mult = std::sqrt(h) * apply_multiplier(f, symbols::abs_pow(0.5));
  EXPECT_LT((direct - mult).max_abs(), 1e-12 * f.max_abs());
}

TEST(Quantization, LeftQuantizationOfXXiOnExponential) {
  const double h = 0.5;
  const int k = 3;
  const GridFunction f = GridFunction::from_function(64, kTwoPi, [&](double x) { return std::exp(I * double(k) * x); });
  Symbol2D generic;
  generic.eval = symbols2d::x_xi().eval;
  const GridFunction g = op_h_quantize(generic, f, h);
  for (std::size_t j = 0; j < f.size(); ++j) EXPECT_NEAR(std::abs(g[j] - f.x(j) * h * k * f[j]), 0.0, 1e-12);
  EXPECT_LT((op_h_quantize(symbols2d::x_xi(), f, h) - g).max_abs(), 1e-12);
}

TEST(Quantization, LinearInSymbolAndFunction) {
  const double h = 0.2;
  const GridFunction f = gaussian_packet(256, 20.0, 1.0, h);
  const GridFunction g = gaussian_packet(256, 20.0, -0.5, h).conj();
  const Symbol2D a = generic_a1(), b = generic_a2();
  Symbol2D sum;
  sum.eval = [&](double x, double xi) { return a(x, xi) + 2.0 * b(x, xi); };
  const GridFunction lhs = op_h_quantize(sum, f + 3.0 * g, h);
  const GridFunction rhs = op_h_quantize(a, f, h) + 3.0 * op_h_quantize(a, g, h) + 2.0 * op_h_quantize(b, f, h) +
                           6.0 * op_h_quantize(b, g, h);
  EXPECT_LT((lhs - rhs).max_abs(), 1e-11 * rhs.max_abs());
}

TEST(Composition, XXiAfterXiIsExact) {
  Symbol2D xi;
  xi.eval = [](double, double s) { return cplx(s); };
  const std::vector<double> hs{0.4, 0.2, 0.1, 0.05};
  const auto rep = compose_residual(symbols2d::x_xi(), xi, 1, hs, [](double h) { return gaussian_packet(512, 40.0, 1.0, h); });
  EXPECT_TRUE(rep.exact);
  EXPECT_TRUE(std::isinf(rep.slope));
}

TEST(Composition, XiAfterXXiHasFirstOrderRemainderAtOrderZero) {
  Symbol2D xi;
  xi.eval = [](double, double s) { return cplx(s); };
  const std::vector<double> hs{0.4, 0.2, 0.1, 0.05};
  auto f = [](double h) { return gaussian_packet(512, 40.0, 1.0, h); };
  const auto r0 = compose_residual(xi, symbols2d::x_xi(), 0, hs, f);
  EXPECT_FALSE(r0.exact);
  EXPECT_NEAR(r0.slope, 1.0, 0.1);
  // The first-order correction closes the calculus exactly for this pair.
  EXPECT_TRUE(compose_residual(xi, symbols2d::x_xi(), 1, hs, f).exact);
}

class CompositionOrder : public ::testing::TestWithParam<int> {};

TEST_P(CompositionOrder, GenericSymbolsGainOneOrderPerTerm) {
  const int N = GetParam();
  const std::vector<double> hs{0.2, 0.1, 0.05, 0.025};
  const auto rep = compose_residual(generic_a1(), generic_a2(), N, hs,
                                    [](double h) { return gaussian_packet(2048, 40.0, 1.0, h); });
  EXPECT_GE(rep.slope, N + 0.8) << "N = " << N;
}

INSTANTIATE_TEST_SUITE_P(Orders, CompositionOrder, ::testing::Values(0, 1, 2));

TEST(Profile, RoundTripIsExact) {
  const GridFunction u = wavepacket_data(512, 256.0, 0.1, 5.0, 1.0, 0.0);
  const GridFunction v = to_profile(u, 37.0);
  EXPECT_NEAR(v.length(), 256.0 / 37.0, 1e-12);
  EXPECT_LT((from_profile(v, 37.0) - u).max_abs(), 1e-15);
  EXPECT_NEAR(v.max_abs(), std::sqrt(37.0) * u.max_abs(), 1e-14);
  EXPECT_THROW(to_profile(u, 0.5), std::invalid_argument);
}

TEST(Profile, LinearFlowProfileIsUniformlyBounded) {
  // A narrow packet reaches the dispersive regime well before t = 50.
  const Trajectory tr = linear_packet_trajectory({50.0, 100.0, 200.0, 300.0, 400.0, 500.0}, 1e-3, 2.0);
  const double ref = to_profile(tr.u(0), tr.times[0]).max_abs();
  for (std::size_t i = 0; i < tr.size(); ++i) {
    const double m = to_profile(tr.u(i), tr.times[i]).max_abs();
    EXPECT_NEAR(m / ref, 1.0, 0.1) << "t = " << tr.times[i];
  }
}

TEST(Profile, LinearFlowConcentratesOnLagrangian) {
  const Trajectory tr = linear_packet_trajectory({500.0}, 1e-3);
  const double t = tr.times[0], h = 1.0 / t;
  const GridFunction v = to_profile(tr.u(0), t);
  const GridFunction dv = derivative(v);
  std::size_t jp = 0;
  for (std::size_t j = 0; j < v.size(); ++j)
    if (std::abs(v[j]) > std::abs(v[jp])) jp = j;
  const double X = v.x(jp);
  const double local_xi = h * (dv[jp] / v[jp]).imag();
  EXPECT_NEAR(X, -0.5, 0.02);
  EXPECT_NEAR(local_xi / phase_domega(X), 1.0, 0.05);
}

TEST(EquationResidual, RejectsStencilUnderflow) {
  const Trajectory tr = linear_packet_trajectory({10.0, 11.0}, 1e-3, 5.0, 256, 128.0);
  EXPECT_THROW(equation_residual(tr, 0), std::out_of_range);
  EXPECT_THROW(equation_residual(tr, 1), std::out_of_range);
}

TEST(EquationResidual, LinearFlowSatisfiesIdentityAndHomogeneousEquation) {
  const double dt = 1e-3;
  const Trajectory tr = linear_packet_trajectory({100.0 - dt, 100.0, 100.0 + dt}, 1e-6);
  const ProfileResidual r = equation_residual(tr, 1);
  EXPECT_LT(r.identity_inf, 1e-5);
  // Linear data: the left side reduces to -i h v / 2.
  const double vmax = to_profile(tr.u(1), 100.0).max_abs();
  EXPECT_NEAR(r.lhs_inf / (0.5 * r.h * vmax), 1.0, 1e-3);
  // What remains is the nonlinear forcing the linear flow does not carry.
  EXPECT_LT(r.defect_inf, 2.0 * (r.quadratic_inf + r.cubic_inf) + 1e-6 * r.lhs_inf);
}

TEST(EquationResidual, CubicModelDefectIsStencilSized) {
  const double eps = 0.05, dt = 0.01;
  StepOptions o;
  o.wrap_tolerance = 0.0;
  const Trajectory tr = step_integrate(
      make_cubic_trajectory(1.0, wavepacket_data(1024, 256.0, eps, 5.0, 1.0, 0.0), eps), 1.0 + 2 * dt, dt,
      Scheme::if_rk4, o);
  ASSERT_EQ(tr.size(), 3u);
  const ProfileResidual r = equation_residual(tr, 1);
  EXPECT_GT(r.quadratic_inf, 1e3 * r.defect_inf);
  EXPECT_LT(r.identity_inf, 1e-3);
}

TEST(Dyadic, IndexSetMatchesDefinition) {
  const DyadicParams p;
  for (double h : {1.0 / 20, 1.0 / 100, 1.0 / 500}) {
    const auto [lo, hi] = dyadic_range(h, p);
    EXPECT_GE(std::exp2(lo), std::pow(h, 2 * (1 - p.sigma)) / p.C);
    EXPECT_LT(std::exp2(lo - 1), std::pow(h, 2 * (1 - p.sigma)) / p.C);
    EXPECT_LE(std::exp2(hi), p.C * std::pow(h, -2 * p.beta));
    EXPECT_GT(std::exp2(hi + 1), p.C * std::pow(h, -2 * p.beta));
  }
  EXPECT_THROW(dyadic_range(0.1, DyadicParams{4.0, 0.7, 0.05}), std::invalid_argument);
}

TEST(Dyadic, DecompositionReassembles) {
  const double h = 1.0 / 50;
  const GridFunction v = lagrangian_profile(h, 1, 1.2, 2048, 4.0) + gaussian_packet(2048, 4.0, 0.0, 1.0);
  const DyadicDecomposition d = dyadic_decompose(v, h);
  EXPECT_EQ(d.w.size(), static_cast<std::size_t>(d.j_max - d.j_min + 1));
  EXPECT_LT((d.reassemble() - v).max_abs(), 1e-10 * v.max_abs());
  for (std::size_t q = 0; q < d.j.size(); ++q) EXPECT_DOUBLE_EQ(d.h_j[q], h * std::exp2(-0.5 * d.j[q]));
}

TEST(Dyadic, SingleBlockInputLandsInOneBlock) {
  const double h = 1.0 / 64;
  const int j = 1;
  // A mode with h k = 2^j sits where phi(2^{-j} h k) = 1 and every other block vanishes.
  const double L = kTwoPi;
  const double k = std::exp2(j) / h;
  const GridFunction v = GridFunction::from_function(1024, L, [&](double x) { return std::exp(I * k * x); });
  const DyadicDecomposition d = dyadic_decompose(v, h);
  for (std::size_t q = 0; q < d.j.size(); ++q) {
    const double m = theta_dilate(d.w[q], d.j[q]).max_abs();
    if (d.j[q] == j)
      EXPECT_NEAR(m, 1.0, 1e-12);
    else
      EXPECT_LT(m, 1e-12);
  }
  EXPECT_LT(d.v_low.max_abs() + d.v_high.max_abs(), 1e-12);
}

TEST(Dyadic, ConjugationIdentity) {
  const double h = 0.05;
  const GridFunction f = gaussian_packet(512, 16.0, 1.0, h);
  for (const Symbol2D& a : {symbols2d::x_xi(), generic_a1()}) {
    for (int j : {-2, -1, 1, 3}) {
      const GridFunction lhs = theta_dilate(op_h_quantize(a, theta_dilate(f, j), h), -j).relabel(f.length());
      const GridFunction rhs = op_h_quantize(dilate_symbol(a, j), f, h * std::exp2(-0.5 * j));
      EXPECT_LT((lhs - rhs).max_abs(), 1e-10 * std::max(rhs.max_abs(), 1.0)) << "j = " << j;
    }
  }
}

TEST(ClassDefect, OscillatoryProfileOnLagrangianGainsHbar) {
  const double h = 0.01;
  std::vector<std::pair<double, double>> pairs{{h, 0.04}, {h, 0.02}, {h, 0.01}, {h, 0.005}};
  const auto rep = class_defect([](double, double hb) { return lagrangian_profile(hb, 1); },
                                symbols2d::lagrangian_equation(1), pairs);
  EXPECT_NEAR(rep.slope_hbar, 1.0, 0.1);
  EXPECT_EQ(rep.classification, "J");
  EXPECT_GT(rep.j_constant, 0.0);
}

TEST(ClassDefect, NonOscillatoryProfileAgainstXi) {
  const double h = 0.01;
  std::vector<std::pair<double, double>> pairs{{h, 0.04}, {h, 0.02}, {h, 0.01}};
  Symbol2D xi;
  xi.eval = [](double, double s) { return cplx(s); };
  xi.x_independent = true;
  const auto rep = class_defect(
      [](double, double) { return GridFunction::from_function(1024, 4.0, [](double x) { return cplx(bump(x, 0.3, 1.2)); }); },
      xi, pairs);
  EXPECT_NEAR(rep.slope_hbar, 1.0, 1e-6);
}

TEST(ClassDefect, WrongLagrangianGivesNoGain) {
  const double h = 0.01;
  std::vector<std::pair<double, double>> pairs{{h, 0.04}, {h, 0.02}, {h, 0.01}, {h, 0.005}};
  const auto rep = class_defect([](double, double hb) { return lagrangian_profile(hb, 2); },
                                symbols2d::lagrangian_equation(1), pairs);
  EXPECT_LT(std::abs(rep.slope_hbar), 0.2);
  EXPECT_EQ(rep.classification, "none");
}

TEST(ClassDefect, RejectsPairsOutsideCorridor) {
  std::vector<std::pair<double, double>> pairs{{0.01, 0.5}, {0.01, 1e-6}, {0.01, 0.01}};
  EXPECT_THROW(class_defect([](double, double hb) { return lagrangian_profile(hb, 1, 1.2, 256); },
                            symbols2d::lagrangian_equation(1), pairs),
               std::invalid_argument);
}

TEST(Cutoffs, PartitionOfPhi) {
  const CutoffParams p;
  const Symbol2D g = harmonic_cutoff_symbol(1, p), gc = harmonic_cutoff_symbol(1, p, true);
  for (double x : {-2.0, -0.7, -0.3, 0.25, 0.5, 1.5})
    for (double xi = -20.0; xi <= 20.0; xi += 0.01)
      EXPECT_NEAR(std::abs(g(x, xi) + gc(x, xi) - cutoff_Phi(xi, p.C0)), 0.0, 1e-12);
}

TEST(Cutoffs, ProfilesAndSupports) {
  EXPECT_EQ(cutoff_Gamma(0.05, 0.2), 1.0);
  EXPECT_EQ(cutoff_Gamma(-0.2, 0.2), 0.0);
  EXPECT_EQ(cutoff_Phi(1.0, 8.0), 1.0);
  EXPECT_EQ(cutoff_Phi(8.0, 8.0), 1.0);
  EXPECT_EQ(cutoff_Phi(1.0 / 16, 8.0), 0.0);
  EXPECT_EQ(cutoff_Phi(16.0, 8.0), 0.0);
}

TEST(Cutoffs, OppositeSignWindowIsDisjointFromLagrangian) {
  const double h = 1.0 / 800;
  const GridFunction w = lagrangian_profile(h, 1, 0.6);
  EXPECT_LT(microlocal_cutoff(w, h, -1).l2(), 1e-5 * w.l2());
}

TEST(Cutoffs, HarmonicWindowsSharpenAsHShrinks) {
  double prev2 = 1.0, prev1 = 1.0;
  for (double h : {1.0 / 100, 1.0 / 200, 1.0 / 400, 1.0 / 800}) {
    const GridFunction w = lagrangian_profile(h, 1, 0.6);
    const double leak2 = microlocal_cutoff(w, h, 2).l2() / w.l2();
    const double err1 = (microlocal_cutoff(w, h, 1) - w).l2() / w.l2();
    EXPECT_LT(leak2, prev2) << "h = " << h;
    EXPECT_LT(err1, prev1) << "h = " << h;
    prev2 = leak2;
    prev1 = err1;
  }
  EXPECT_LT(prev2, 1e-2);
  EXPECT_LT(prev1, 0.3);
}

TEST(Harmonics, LinearFlowCarriesNoSecondHarmonic) {
  const Trajectory tr = linear_packet_trajectory({500.0}, 0.05);
  const HarmonicReport r = harmonic_extract(tr, 0);
  EXPECT_GT(r.lambda_inf, 0.1);
  // Only the microlocal leakage of the linear wave remains.
  EXPECT_LT(r.plus_l2, 1e-4 * r.lambda_inf);
  EXPECT_LT(r.minus_l2, 1e-4 * r.lambda_inf);
}

TEST(Harmonics, CubicRunMagnitudeRatio) {
  const Trajectory& tr = packet_run();
  ASSERT_EQ(tr.size(), 11u);
  for (std::size_t i = 4; i < tr.size(); ++i) {
    const HarmonicReport r = harmonic_extract(tr, i);
    EXPECT_NEAR(r.ratio / r.predicted_ratio, 1.0, 0.05) << "t = " << r.t;
    EXPECT_NEAR(r.region_lo, 0.45, 0.02);
    EXPECT_NEAR(r.region_hi, 0.55, 0.02);
    // Leading-order prediction: the residual is the O(h) correction, bounded but not small at this h.
    EXPECT_LT(r.mismatch_plus, 0.5);
    EXPECT_LT(r.mismatch_minus, 0.5);
  }
}

TEST(Functionals, ZeroSolution) {
  Trajectory tr = make_cubic_trajectory(10.0, GridFunction(256, 128.0), 0.0);
  for (int q = 1; q <= 4; ++q) {
    tr.times.push_back(10.0 + q);
    tr.cubic.push_back(GridFunction(256, 128.0));
  }
  const auto rows = functionals_EF(tr, 2, 0.5, 0.25);
  ASSERT_EQ(rows.size(), 1u);
  for (double e : rows[0].E) EXPECT_EQ(e, 0.0);
  for (double f : rows[0].F) EXPECT_EQ(f, 0.0);
  EXPECT_THROW(functionals_EF(tr, 3, 0.5, 0.25), std::invalid_argument);
}

TEST(Functionals, E0MatchesDirectDyadicSup) {
  const double h = 1.0 / 100, a = 0.5, b = 0.25;
  const DyadicParams p;
  const GridFunction v = lagrangian_profile(h, 1);
  const auto [jmin, jmax] = dyadic_range(h, p);
  (void)jmax;
  const double slow = std::pow(h, 1.0 - 2.0 * (1.0 - p.sigma));
  double e0 = apply_multiplier(v, MultiplierSymbol{[&](double k) { return cplx(lp_rho(2.0 * slow * k)); }, 1.0}).max_abs();
  double f0 = apply_multiplier(v, MultiplierSymbol{[&](double k) { return cplx(lp_rho(2.0 * slow * k)); }, 1.0}).l2();
  for (int j = jmin - 1; j <= 20; ++j) {
    const GridFunction blk =
        apply_multiplier(v, MultiplierSymbol{[&](double k) { return cplx(lp_phi(std::ldexp(h, -j) * k)); }, 0.0});
    e0 = std::max(e0, std::exp2(std::max(j, 0) * b) * blk.max_abs());
    f0 = std::max(f0, std::exp2(std::max(j, 0) * a) * blk.l2());
  }
  const auto [E, F] = profile_EF0(v, h, a, b, p);
  EXPECT_NEAR(E, e0, 1e-12 * e0);
  EXPECT_NEAR(F, f0, 1e-12 * f0);
}

TEST(Functionals, E0PlateauOnSmallRun) {
  StepOptions o;
  o.wrap_tolerance = 0.0;
  o.save_every = 100;
  const Trajectory tr = step_integrate(
      make_cubic_trajectory(1.0, wavepacket_data(2048, 1024.0, 0.05, 2.0, 1.0, 0.0), 0.05), 501.0, 0.5,
      Scheme::if_rk4, o);
  const auto rows = functionals_EF(tr, 0, 0.5, 0.25);
  double ref = 0.0;
  for (const auto& r : rows) {
    if (r.t < 50.0) continue;
    if (ref == 0.0) ref = r.E[0];
    EXPECT_LT(r.E[0], 2.0 * ref) << "t = " << r.t;
    EXPECT_GT(r.E[0], 0.5 * ref) << "t = " << r.t;
  }
  EXPECT_GT(ref, 0.0);
}

TEST(Fit, LineAndPowerLaw) {
  std::vector<double> x, y;
  for (int q = 0; q < 10; ++q) {
    x.push_back(q);
    y.push_back(2.0 - 0.5 * q);
  }
  const LineFit lf = fit_line(x, y);
  EXPECT_NEAR(lf.slope, -0.5, 1e-14);
  EXPECT_NEAR(lf.intercept, 2.0, 1e-13);
  EXPECT_NEAR(lf.slope_ci, 0.0, 1e-12);
  EXPECT_THROW(fit_line({1.0, 2.0}, {1.0, 2.0}), std::invalid_argument);

  std::vector<double> t, v;
  for (int q = 0; q < 12; ++q) {
    t.push_back(10.0 * std::pow(1.5, q));
    v.push_back(3.0 * std::pow(t.back(), -0.5) * (1.0 + 0.01 * ((q % 2) ? 1.0 : -1.0)));
  }
  const PowerLawFit pf = fit_power_law(t, v);
  EXPECT_NEAR(pf.exponent, -0.5, 0.01);
  EXPECT_NEAR(pf.prefactor, 3.0, 0.1);
  EXPECT_GT(pf.ci, 0.0);
  EXPECT_LT(pf.ci, 0.02);
  EXPECT_THROW(fit_power_law({1.0, 2.0, 3.0}, {1.0, 1.0, 1.0}), std::invalid_argument);
  std::vector<double> narrow(t.begin(), t.begin() + 8), vn(v.begin(), v.begin() + 8);
  for (double& s : narrow) s = 100.0 + s / 100.0;
  EXPECT_THROW(fit_power_law(narrow, vn), std::invalid_argument);
}
