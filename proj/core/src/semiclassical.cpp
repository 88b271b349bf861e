#include "ripple/semiclassical.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>

#include "ripple/fourier.hpp"

namespace ripple {

namespace {

constexpr double kPi = std::numbers::pi;

// Spectral multiplier m(k) on the grid; the Nyquist slot uses the even part.
GridFunction spectral_map(const GridFunction& f, const std::function<cplx(double)>& m) {
  const std::size_t n = f.size();
  cvec c = f.spectrum();
  for (std::size_t i = 0; i < n; ++i) {
    if (c[i] == cplx(0.0)) continue;
    const double k = 2.0 * kPi * static_cast<double>(mode_index(i, n)) / f.length();
    c[i] *= i == n / 2 ? 0.5 * (m(k) + m(-k)) : m(k);
  }
  return GridFunction::from_spectrum(f.length(), std::move(c));
}

GridFunction pointwise(const GridFunction& f, const std::function<cplx(double)>& p) {
  cvec s(f.size());
  for (std::size_t j = 0; j < s.size(); ++j) s[j] = p(f.x(j)) * f[j];
  return GridFunction(f.length(), std::move(s));
}

}  // namespace

double phase_omega(double x) { return 0.25 / std::abs(x); }

double phase_domega(double x) { return (x > 0 ? -0.25 : 0.25) / (x * x); }

namespace symbols2d {

Symbol2D constant(cplx c) {
  Symbol2D s;
  s.eval = [c](double, double) { return c; };
  s.x_independent = true;
  s.derivative = [c](double, double, int i, int k) { return (i == 0 && k == 0) ? c : cplx(0.0); };
  return s;
}

Symbol2D of_xi(std::function<cplx(double)> q) {
  Symbol2D s;
  s.eval = [q](double, double xi) { return q(xi); };
  s.x_independent = true;
  return s;
}

Symbol2D of_x(std::function<cplx(double)> p) {
  Symbol2D s;
  s.eval = [p](double x, double) { return p(x); };
  s.terms.push_back({p, [](double) { return cplx(1.0); }});
  return s;
}

Symbol2D separable(std::vector<std::pair<Symbol2D::Factor, Symbol2D::Factor>> terms) {
  Symbol2D s;
  s.terms = std::move(terms);
  const auto t = s.terms;
  s.eval = [t](double x, double xi) {
    cplx acc = 0.0;
    for (const auto& [p, q] : t) acc += p(x) * q(xi);
    return acc;
  };
  return s;
}

Symbol2D x_xi() {
  Symbol2D s = separable({{[](double x) { return cplx(x); }, [](double xi) { return cplx(xi); }}});
  s.derivative = [](double x, double xi, int i, int k) -> cplx {
    const double px = i == 0 ? x : (i == 1 ? 1.0 : 0.0);
    const double qx = k == 0 ? xi : (k == 1 ? 1.0 : 0.0);
    return px * qx;
  };
  return s;
}

Symbol2D linear_flow() {
  return separable({{[](double x) { return cplx(x); }, [](double xi) { return cplx(xi); }},
                    {[](double) { return cplx(1.0); }, [](double xi) { return cplx(std::sqrt(std::abs(xi))); }}});
}

Symbol2D lagrangian_equation(int ell) {
  const double l = ell;
  Symbol2D s = separable({{[](double) { return cplx(1.0); }, [](double xi) { return cplx(xi); }},
                          {[l](double x) { return cplx(x == 0.0 ? 0.0 : -l * phase_domega(x)); },
                           [](double) { return cplx(1.0); }}});
  s.support_meta = "equation of l*Lambda";
  return s;
}

}  // namespace symbols2d

cplx symbol_derivative(const Symbol2D& a, double x, double xi, int i, int k) {
  if (i < 0 || k < 0) throw std::invalid_argument("symbol_derivative: negative order");
  if (a.derivative) return a.derivative(x, xi, i, k);
  if (i == 0 && k == 0) return a(x, xi);
  static constexpr double c1[4] = {4.0 / 5.0, -1.0 / 5.0, 4.0 / 105.0, -1.0 / 280.0};
  static constexpr double c2[5] = {-205.0 / 72.0, 8.0 / 5.0, -1.0 / 5.0, 8.0 / 315.0, -1.0 / 560.0};
  constexpr double step = 0.02;
  // Peel one derivative at a time; second derivatives use the direct stencil.
  const bool in_x = i > 0;
  const int order = in_x ? i : k;
  const int use = order >= 2 ? 2 : 1;
  const int ri = in_x ? i - use : i;
  const int rk = in_x ? k : k - use;
  auto inner = [&](double dx_, double dxi_) { return symbol_derivative(a, x + dx_, xi + dxi_, ri, rk); };
  auto shift = [&](int q) { return in_x ? inner(q * step, 0.0) : inner(0.0, q * step); };
  cplx acc = 0.0;
  if (use == 1) {
    for (int q = 1; q <= 4; ++q) acc += c1[q - 1] * (shift(q) - shift(-q));
    return acc / step;
  }
  acc = c2[0] * shift(0);
  for (int q = 1; q <= 4; ++q) acc += c2[q] * (shift(q) + shift(-q));
  return acc / (step * step);
}

GridFunction op_h_quantize(const Symbol2D& a, const GridFunction& f, double h, double populated_tol) {
  if (!(h > 0.0 && h <= 1.0)) throw std::invalid_argument("op_h_quantize: h must lie in (0, 1]");
  if (a.x_independent) return spectral_map(f, [&](double k) { return a(0.0, h * k); });
  if (!a.terms.empty()) {
    GridFunction out(f.size(), f.length());
    for (const auto& [p, q] : a.terms) out += pointwise(spectral_map(f, [&](double k) { return q(h * k); }), p);
    return out;
  }
  const std::size_t n = f.size();
  const double L = f.length();
  const cvec& c = f.spectrum();
  double cmax = 0.0;
  for (const auto& z : c) cmax = std::max(cmax, std::abs(z));
  std::vector<std::size_t> modes;
  for (std::size_t i = 0; i < n; ++i)
    if (std::abs(c[i]) > populated_tol * cmax && c[i] != cplx(0.0)) modes.push_back(i);
  cvec roots(n);
  for (std::size_t q = 0; q < n; ++q) roots[q] = std::polar(1.0, 2.0 * kPi * static_cast<double>(q) / n);
  cvec out(n, 0.0);
#pragma omp parallel for schedule(static)
  for (std::size_t j = 0; j < n; ++j) {
    const double x = f.x(j);
    cplx acc = 0.0;
    for (std::size_t i : modes) {
      const long m = mode_index(i, n);
      const double k = 2.0 * kPi * static_cast<double>(m) / L;
      // Coefficients are indexed from the first sample: f_j = sum c_m e^{2 pi i m j / n}.
      const std::size_t idx = static_cast<std::size_t>(((m % static_cast<long>(n)) + static_cast<long>(n)) % static_cast<long>(n)) * j % n;
      const cplx e = roots[idx];
      const cplx sym = i == n / 2 ? 0.5 * (a(x, h * k) + a(x, -h * k)) : a(x, h * k);
      acc += sym * c[i] * e;
    }
    out[j] = acc;
  }
  return GridFunction(L, std::move(out));
}

CompositionReport compose_residual(const Symbol2D& a1, const Symbol2D& a2, int order, const std::vector<double>& h_values,
                                   const std::function<GridFunction(double)>& test_f) {
  if (h_values.size() < 3) throw std::invalid_argument("compose_residual: at least three h values required");
  if (order < 0) throw std::invalid_argument("compose_residual: negative order");
  CompositionReport rep;
  rep.order = order;
  rep.exact = true;
  for (double h : h_values) {
    const GridFunction f = test_f(h);
    const GridFunction lhs = op_h_quantize(a1, op_h_quantize(a2, f, h), h);
    Symbol2D c;
    c.x_independent = a1.x_independent && a2.x_independent;
    c.eval = [&, h](double x, double xi) {
      cplx acc = 0.0;
      double fact = 1.0;
      cplx pw = 1.0;
      for (int j = 0; j <= order; ++j) {
        if (j > 0) {
          fact *= j;
          pw *= cplx(0.0, -h);
        }
        const cplx d1 = j == 0 ? a1(x, xi) : symbol_derivative(a1, x, xi, 0, j);
        if (d1 == cplx(0.0)) continue;
        const cplx d2 = j == 0 ? a2(x, xi) : (a2.x_independent ? cplx(0.0) : symbol_derivative(a2, x, xi, j, 0));
        acc += pw / fact * d1 * d2;
      }
      return acc;
    };
    const GridFunction rhs = op_h_quantize(c, f, h);
    const double r = (lhs - rhs).max_abs() / std::max(f.max_abs(), 1e-300);
    rep.h.push_back(h);
    rep.residual.push_back(r);
    if (r > 1e-12) rep.exact = false;
  }
  if (rep.exact) {
    rep.slope = std::numeric_limits<double>::infinity();
  } else {
    std::vector<double> hh, rr;
    for (std::size_t q = 0; q < rep.h.size(); ++q)
      if (rep.residual[q] > 0.0) {
        hh.push_back(rep.h[q]);
        rr.push_back(rep.residual[q]);
      }
    const LineFit fit = fit_loglog(hh, rr);
    rep.slope = fit.slope;
    rep.slope_ci = fit.slope_ci;
  }
  return rep;
}

GridFunction to_profile(const GridFunction& u, double t) {
  if (!(t >= 1.0)) throw std::invalid_argument("to_profile: t must be at least 1");
  return std::sqrt(t) * u.relabel(u.length() / t);
}

GridFunction from_profile(const GridFunction& v, double t) {
  if (!(t >= 1.0)) throw std::invalid_argument("from_profile: t must be at least 1");
  return (1.0 / std::sqrt(t)) * v.relabel(v.length() * t);
}

GridFunction profile_quadratic(const GridFunction& v, double h) {
  return cubic_model_quadratic(v.relabel(v.length() / h)).relabel(v.length());
}

GridFunction profile_cubic(const GridFunction& v, double h) {
  return cubic_model_cubic(v.relabel(v.length() / h)).relabel(v.length());
}

namespace {

// Centred first derivative in time on a possibly non-uniform stencil.
GridFunction time_derivative(const GridFunction& fm, const GridFunction& f0, const GridFunction& fp, double tm, double t0,
                             double tp) {
  const double hm = t0 - tm, hp = tp - t0;
  return (-hp / (hm * (hm + hp))) * fm + ((hp - hm) / (hm * hp)) * f0 + (hm / (hp * (hm + hp))) * fp;
}

}  // namespace

ProfileResidual equation_residual(const Trajectory& traj, std::size_t i) {
  if (i == 0 || i + 1 >= traj.size()) throw std::out_of_range("equation_residual: stencil underflow");
  const double t = traj.times[i];
  const double h = 1.0 / t;
  const GridFunction u = traj.u(i);
  const GridFunction ut = time_derivative(traj.u(i - 1), u, traj.u(i + 1), traj.times[i - 1], t, traj.times[i + 1]);
  const GridFunction ux = derivative(u);
  cvec xs(u.size()), zs(u.size());
  for (std::size_t j = 0; j < xs.size(); ++j) {
    xs[j] = ut[j] + u.x(j) / t * ux[j];
    zs[j] = t * ut[j] + 2.0 * u.x(j) * ux[j] + 0.5 * u[j];
  }
  const GridFunction v = to_profile(u, t);
  const cplx I(0.0, 1.0);
  // D_t v = -i d_t v with d_t v = sqrt(t) (u_t + (x/t) u_x)(tX) + v / (2t).
  const GridFunction dtv = -I * (to_profile(GridFunction(u.length(), std::move(xs)), t) + (0.5 / t) * v);
  const GridFunction zv = to_profile(GridFunction(u.length(), std::move(zs)), t);
  const GridFunction opxxi = op_h_quantize(symbols2d::x_xi(), v, h);
  const GridFunction half = std::sqrt(h) * apply_multiplier(v, symbols::abs_pow(0.5));
  const GridFunction lhs = dtv - opxxi - half;
  const GridFunction q = std::sqrt(h) * profile_quadratic(v, h);
  const GridFunction c = h * profile_cubic(v, h);
  const GridFunction defect = lhs - q - c + (0.5 * h) * I * v;
  ProfileResidual r;
  r.t = t;
  r.h = h;
  r.lhs_inf = lhs.max_abs();
  r.quadratic_inf = q.max_abs();
  r.cubic_inf = c.max_abs();
  r.defect_inf = defect.max_abs();
  r.defect_l2 = defect.l2();
  const GridFunction ident = dtv + (I * h) * zv + opxxi;
  r.identity_inf = ident.max_abs() / std::max(dtv.max_abs(), 1e-300);
  return r;
}

std::pair<int, int> dyadic_range(double h, const DyadicParams& p) {
  if (!(p.sigma > 0.0 && p.sigma < 0.5) || !(p.beta > 0.0) || !(p.C >= 1.0))
    throw std::invalid_argument("dyadic parameters out of range");
  const double lo = std::log2(std::pow(h, 2.0 * (1.0 - p.sigma)) / p.C);
  const double hi = std::log2(p.C * std::pow(h, -2.0 * p.beta));
  return {static_cast<int>(std::ceil(lo - 1e-12)), static_cast<int>(std::floor(hi + 1e-12))};
}

GridFunction semiclassical_block(const GridFunction& v, double h, int j) {
  const double s = std::ldexp(h, -j);
  return spectral_map(v, [s](double k) { return cplx(lp_phi(s * k)); });
}

GridFunction theta_dilate(const GridFunction& v, int j) { return v.relabel(v.length() * std::exp2(-0.5 * j)); }

Symbol2D dilate_symbol(const Symbol2D& a, int j) {
  Symbol2D b;
  const double sx = std::exp2(-0.5 * j), sxi = std::exp2(j);
  b.eval = [a, sx, sxi](double x, double xi) { return a(sx * x, sxi * xi); };
  b.x_independent = a.x_independent;
  for (const auto& [p, q] : a.terms)
    b.terms.push_back({[p, sx](double x) { return p(sx * x); }, [q, sxi](double xi) { return q(sxi * xi); }});
  return b;
}

GridFunction DyadicDecomposition::reassemble() const {
  GridFunction acc = v_low + v_high;
  for (std::size_t q = 0; q < w.size(); ++q) acc += theta_dilate(w[q], j[q]).relabel(acc.length());
  return acc;
}

DyadicDecomposition dyadic_decompose(const GridFunction& v, double h, const DyadicParams& p) {
  if (!(h > 0.0 && h <= 1.0)) throw std::invalid_argument("dyadic_decompose: h must lie in (0, 1]");
  const auto [jmin, jmax] = dyadic_range(h, p);
  if (jmin > jmax) throw std::domain_error("dyadic_decompose: empty index set J(h, C)");
  DyadicDecomposition d;
  d.h = h;
  d.j_min = jmin;
  d.j_max = jmax;
  const double slo = std::ldexp(h, -(jmin - 1));
  const double shi = std::ldexp(h, -jmax);
  d.v_low = spectral_map(v, [slo](double k) { return cplx(lp_rho(slo * k)); });
  d.v_high = spectral_map(v, [shi](double k) { return cplx(1.0 - lp_rho(shi * k)); });
  for (int j = jmin; j <= jmax; ++j) {
    d.j.push_back(j);
    d.h_j.push_back(h * std::exp2(-0.5 * j));
    d.w.push_back(theta_dilate(semiclassical_block(v, h, j), -j));
  }
  return d;
}

double lp_norm(const GridFunction& f, double p) {
  if (std::isinf(p)) return f.max_abs();
  if (p == 2.0) return f.l2();
  if (!(p >= 1.0)) throw std::invalid_argument("lp_norm: p must be at least 1");
  double acc = 0.0;
  for (std::size_t j = 0; j < f.size(); ++j) acc += std::pow(std::abs(f[j]), p);
  return std::pow(acc * f.dx(), 1.0 / p);
}

ClassDefectReport class_defect(const std::function<GridFunction(double, double)>& family, const Symbol2D& e,
                               const std::vector<std::pair<double, double>>& pairs, const ClassParams& prm) {
  if (pairs.size() < 3) throw std::invalid_argument("class_defect: at least three (h, hbar) pairs required");
  ClassDefectReport rep;
  const double inv_p = std::isinf(prm.p) ? 0.0 : 1.0 / prm.p;
  std::vector<double> hb, dh, gain_i, di;
  for (const auto& [h, hbar] : pairs) {
    const bool corridor = hbar >= std::pow(h, 1.0 + prm.beta) / prm.C0 &&
                          hbar <= prm.C0 * std::pow(h, prm.sigma) && hbar <= 1.0 && h <= 1.0;
    if (!corridor) throw std::invalid_argument("class_defect: (h, hbar) outside the admissible corridor");
    const GridFunction v = family(h, hbar);
    ClassDefectSample s;
    s.h = h;
    s.hbar = hbar;
    s.norm = lp_norm(v, prm.p);
    s.defect_hbar = lp_norm(op_h_quantize(e, v, hbar), prm.p);
    s.defect_h = lp_norm(op_h_quantize(e, v, h), prm.p);
    const double corr = std::pow(1.0 + h / hbar, -2.0 * prm.gamma) * std::pow(h, prm.nu);
    const double wb = corr * std::pow(hbar / h, prm.mu + inv_p);
    const double wd = corr * std::pow(h / hbar, prm.mu + inv_p);
    rep.bound_constant = std::max(rep.bound_constant, s.norm / wb);
    rep.i_constant = std::max(rep.i_constant, s.defect_h / (wd * (std::sqrt(h) + hbar)));
    rep.j_constant = std::max(rep.j_constant, s.defect_hbar / (wd * hbar));
    rep.samples.push_back(s);
    hb.push_back(hbar);
    dh.push_back(std::max(s.defect_hbar, 1e-300));
    gain_i.push_back(std::sqrt(h) + hbar);
    di.push_back(std::max(s.defect_h, 1e-300));
  }
  const LineFit fj = fit_loglog(hb, dh);
  rep.slope_hbar = fj.slope;
  rep.slope_hbar_ci = fj.slope_ci;
  if (rep.slope_hbar >= 0.9) {
    rep.classification = "J";
  } else {
    bool spread = false;
    for (double g : gain_i) spread = spread || std::abs(g / gain_i.front() - 1.0) > 1e-3;
    rep.classification = spread && fit_loglog(gain_i, di).slope >= 0.9 ? "I" : "none";
  }
  return rep;
}

double cutoff_Gamma(double s, double width) {
  const double a = std::abs(s);
  const double half = 0.5 * width;
  if (a <= half) return 1.0;
  if (a >= width) return 0.0;
  return 1.0 - smooth_step((a - half) / half);
}

double cutoff_Phi(double xi, double C0) {
  const double a = std::abs(xi);
  const double lo = 0.5 / C0;
  if (a <= lo || a >= 2.0 * C0) return 0.0;
  return smooth_step((a - lo) / lo) * (1.0 - smooth_step((a - C0) / C0));
}

Symbol2D harmonic_cutoff_symbol(int ell, const CutoffParams& p, bool complement) {
  Symbol2D s;
  const double l = ell;
  s.eval = [l, p, complement](double x, double xi) -> cplx {
    const double phi = cutoff_Phi(xi, p.C0);
    if (phi == 0.0) return 0.0;
    double g = 0.0;
    if (x != 0.0) {
      const double dw = phase_domega(x);
      const double scale = std::abs(dw) * std::max(std::abs(l), 1.0);
      g = cutoff_Gamma((xi - l * dw) / scale, p.width);
    }
    return phi * (complement ? 1.0 - g : g);
  };
  s.support_meta = "near l*Lambda";
  return s;
}

GridFunction microlocal_cutoff(const GridFunction& w, double h, int ell, const CutoffParams& p) {
  return op_h_quantize(harmonic_cutoff_symbol(ell, p), w, h);
}

double cutoff_idempotence_constant(const GridFunction& w, double h, int ell, const CutoffParams& p) {
  const GridFunction g1 = microlocal_cutoff(w, h, ell, p);
  const GridFunction g2 = microlocal_cutoff(g1, h, ell, p);
  return (g2 - g1).l2() / (h * std::max(w.l2(), 1e-300));
}

HarmonicReport harmonic_extract(const Trajectory& traj, std::size_t i, const HarmonicParams& prm) {
  const double t = traj.times.at(i);
  const double h = 1.0 / t;
  const GridFunction v = to_profile(traj.u(i), t);
  const GridFunction wl = microlocal_cutoff(v, h, 1, prm.cutoff);
  const double sh = std::sqrt(h);
  const GridFunction wp = (1.0 / sh) * microlocal_cutoff(v, h, 2, prm.cutoff);
  const GridFunction wm = (1.0 / sh) * microlocal_cutoff(v, h, -2, prm.cutoff);
  HarmonicReport r;
  r.t = t;
  r.h = h;
  double lo = prm.x_min, hi = prm.x_max;
  std::vector<bool> in(v.size(), false);
  if (hi > lo) {
    for (std::size_t j = 0; j < v.size(); ++j) in[j] = std::abs(v.x(j)) >= lo && std::abs(v.x(j)) <= hi;
  } else {
    const double thr = prm.region_fraction * wl.max_abs();
    lo = std::numeric_limits<double>::infinity();
    hi = 0.0;
    for (std::size_t j = 0; j < v.size(); ++j) {
      in[j] = std::abs(wl[j]) >= thr && thr > 0.0;
      if (in[j]) {
        lo = std::min(lo, std::abs(v.x(j)));
        hi = std::max(hi, std::abs(v.x(j)));
      }
    }
  }
  r.region_lo = lo;
  r.region_hi = hi;
  const double cp = (1.0 + std::sqrt(2.0)) / 4.0, cm = (1.0 - std::sqrt(2.0)) / 4.0;
  double pl2 = 0.0, ml2 = 0.0, ep = 0.0, em = 0.0, np = 0.0, nm = 0.0;
  const cplx I(0.0, 1.0);
  for (std::size_t j = 0; j < v.size(); ++j) {
    if (!in[j]) continue;
    const double x = v.x(j);
    const double cut = x == 0.0 ? 0.0 : 1.0 - lp_rho(2.0 * x * std::pow(h, -prm.beta) / prm.chi_radius);
    const double adw = x == 0.0 ? 0.0 : std::abs(phase_domega(x));
    const cplx pp = -I * cut * cp * adw * wl[j] * wl[j];
    const cplx pm = -I * cut * cm * adw * std::conj(wl[j]) * std::conj(wl[j]);
    pl2 += std::norm(wp[j]);
    ml2 += std::norm(wm[j]);
    ep = std::max(ep, std::abs(wp[j] - pp));
    em = std::max(em, std::abs(wm[j] - pm));
    np = std::max(np, std::abs(pp));
    nm = std::max(nm, std::abs(pm));
    r.lambda_inf = std::max(r.lambda_inf, std::abs(wl[j]));
  }
  r.plus_l2 = std::sqrt(pl2 * v.dx());
  r.minus_l2 = std::sqrt(ml2 * v.dx());
  r.ratio = r.minus_l2 > 0.0 ? r.plus_l2 / r.minus_l2 : std::numeric_limits<double>::infinity();
  r.predicted_ratio = cp / std::abs(cm);
  r.mismatch_plus = np > 0.0 ? ep / np : 0.0;
  r.mismatch_minus = nm > 0.0 ? em / nm : 0.0;
  return r;
}

namespace {

struct DyadicSup {
  double low_inf = 0.0, low_l2 = 0.0, sup_inf = 0.0, sup_l2 = 0.0;
};

DyadicSup dyadic_sup(const GridFunction& v, double h, double a, double b, const DyadicParams& p) {
  DyadicSup s;
  const auto [jmin, jmax] = dyadic_range(h, p);
  (void)jmax;
  const int j0 = jmin - 1;
  const double slow = std::pow(h, -2.0 * (1.0 - p.sigma)) * h;
  const GridFunction low = spectral_map(v, [slow](double k) { return cplx(lp_rho(2.0 * slow * k)); });
  s.low_inf = low.max_abs();
  s.low_l2 = low.l2();
  const int jtop = static_cast<int>(std::ceil(std::log2(std::max(h * v.nyquist(), 1e-300)))) + 1;
  for (int j = j0; j <= jtop; ++j) {
    const GridFunction blk = semiclassical_block(v, h, j);
    const int jp = std::max(j, 0);
    s.sup_inf = std::max(s.sup_inf, std::exp2(jp * b) * blk.max_abs());
    s.sup_l2 = std::max(s.sup_l2, std::exp2(jp * a) * blk.l2());
  }
  return s;
}

}  // namespace

std::pair<double, double> profile_EF0(const GridFunction& v, double h, double a, double b, const DyadicParams& p) {
  const DyadicSup s = dyadic_sup(v, h, a, b, p);
  return {std::max(s.low_inf, s.sup_inf), std::max(s.low_l2, s.sup_l2)};
}

std::vector<EFRow> functionals_EF(const Trajectory& traj, int k_max, double a, double b, const DyadicParams& p,
                                  std::size_t stride) {
  if (k_max < 0) throw std::invalid_argument("functionals_EF: negative k_max");
  if (traj.size() < static_cast<std::size_t>(2 * k_max + 1))
    throw std::invalid_argument("functionals_EF: insufficient snapshots");
  std::vector<GridFunction> us;
  us.reserve(traj.size());
  for (std::size_t i = 0; i < traj.size(); ++i) us.push_back(traj.u(i));
  std::vector<EFRow> rows;
  for (std::size_t i = k_max; i + k_max < traj.size(); i += std::max<std::size_t>(1, stride)) {
    EFRow row;
    row.t = traj.times[i];
    const double h = 1.0 / row.t;
    std::vector<GridFunction> zu;
    for (int q = 0; q <= k_max; ++q) zu.push_back(z_power(us, traj.times, i, q));
    double e = 0.0, f = 0.0;
    for (int k = 0; k <= k_max; ++k) {
      // Z acting on the profile equals (Z + 1/2) acting on u.
      GridFunction acc(us[i].size(), us[i].length());
      double binom = 1.0;
      for (int q = 0; q <= k; ++q) {
        acc += (binom * std::pow(0.5, k - q)) * zu[q];
        binom = binom * (k - q) / (q + 1);
      }
      const DyadicSup s = dyadic_sup(to_profile(acc, row.t), h, a, b, p);
      e += std::max(s.low_inf, s.sup_inf);
      f += std::max(s.low_l2, s.sup_l2);
      row.E.push_back(e);
      row.F.push_back(f);
    }
    rows.push_back(std::move(row));
  }
  return rows;
}

}  // namespace ripple
