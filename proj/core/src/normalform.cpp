#include "ripple/normalform.hpp"

#include <boost/math/quadrature/gauss.hpp>
#include <boost/math/quadrature/gauss_kronrod.hpp>

#include <algorithm>
#include <cmath>
#include <limits>
#include <memory>
#include <mutex>
#include <numbers>
#include <stdexcept>
#include <unordered_map>

#include "ripple/fourier.hpp"
#include "ripple/semiclassical.hpp"

namespace ripple {

namespace {

const cplx I(0.0, 1.0);
const double kSqrt2 = std::numbers::sqrt2;

double jbracket(double z) { return std::sqrt(1.0 + z * z); }

// Polynomials in (z, zbar) truncated at total degree three.
struct Poly {
  cplx c[4][4] = {};
  Poly operator+(const Poly& o) const {
    Poly r;
    for (int i = 0; i < 4; ++i)
      for (int j = 0; i + j < 4; ++j) r.c[i][j] = c[i][j] + o.c[i][j];
    return r;
  }
  Poly operator-(const Poly& o) const {
    Poly r;
    for (int i = 0; i < 4; ++i)
      for (int j = 0; i + j < 4; ++j) r.c[i][j] = c[i][j] - o.c[i][j];
    return r;
  }
  Poly operator*(const Poly& o) const {
    Poly r;
    for (int i = 0; i < 4; ++i)
      for (int j = 0; i + j < 4; ++j) {
        if (c[i][j] == cplx(0.0)) continue;
        for (int k = 0; i + j + k < 4; ++k)
          for (int l = 0; i + j + k + l < 4; ++l) r.c[i + k][j + l] += c[i][j] * o.c[k][l];
      }
    return r;
  }
  Poly scaled(cplx s) const {
    Poly r;
    for (int i = 0; i < 4; ++i)
      for (int j = 0; i + j < 4; ++j) r.c[i][j] = s * c[i][j];
    return r;
  }
  // Polynomial of conj(P(z, zbar)) in (z, zbar).
  Poly conj_swap() const {
    Poly r;
    for (int i = 0; i < 4; ++i)
      for (int j = 0; i + j < 4; ++j) r.c[j][i] = std::conj(c[i][j]);
    return r;
  }
  Poly d_z() const {
    Poly r;
    for (int i = 1; i < 4; ++i)
      for (int j = 0; i + j < 4; ++j) r.c[i - 1][j] = double(i) * c[i][j];
    return r;
  }
  Poly d_zbar() const {
    Poly r;
    for (int i = 0; i < 4; ++i)
      for (int j = 1; i + j < 4; ++j) r.c[i][j - 1] = double(j) * c[i][j];
    return r;
  }
  // P(W, Wbar) for W without constant term.
  Poly compose(const Poly& W) const {
    const Poly Wb = W.conj_swap();
    Poly pw[4], pb[4];
    pw[0].c[0][0] = pb[0].c[0][0] = 1.0;
    for (int k = 1; k < 4; ++k) {
      pw[k] = pw[k - 1] * W;
      pb[k] = pb[k - 1] * Wb;
    }
    Poly r;
    for (int i = 0; i < 4; ++i)
      for (int j = 0; i + j < 4; ++j)
        if (c[i][j] != cplx(0.0)) r = r + (pw[i] * pb[j]).scaled(c[i][j]);
    return r;
  }
};

double eval_or_zero(const SymbolFn& f, double z) { return f ? f(z) : 0.0; }

// Coefficients with explicit h and cutoff values.
PointCoefficients raw_coefficients(double dw, double h, double cut, double cut0, int ell, const CoefficientSet& c) {
  PointCoefficients k;
  const double ad = std::abs(dw);
  const double L = std::pow(jbracket(dw), -2.0 * ell);
  const double K = std::pow(jbracket(2.0 * dw), ell) * L;
  const double sh = std::sqrt(h);
  k.lambda = 0.5 * cut * std::sqrt(ad);
  const double qs = c.quadratic_scale;
  k.q_plus = -I * (qs * sh / 8.0 * cut * std::pow(ad, 1.5) * K * (1.0 + kSqrt2));
  k.q_minus = -I * (qs * sh / 8.0 * cut * std::pow(ad, 1.5) * K * (-3.0 * (1.0 - kSqrt2)));
  const double w52 = cut * std::pow(ad, 2.5);
  k.phi1 = c.paper_mode ? w52 * (qs * qs * K * K * 3.0 * (3.0 - 2.0 * kSqrt2) / 16.0 + 0.5 * L)
                        : w52 * eval_or_zero(c.gamma1, dw);
  k.phi3 = w52 * eval_or_zero(c.gamma3, dw);
  k.phi_m1 = w52 * eval_or_zero(c.gamma_m1, dw);
  k.phi_m3 = w52 * eval_or_zero(c.gamma_m3, dw);
  k.a = I * (qs * sh / 4.0 * cut0 * ad * K * (1.0 + kSqrt2));
  k.b = I * (qs * sh / 4.0 * cut0 * ad * K * (1.0 - kSqrt2));
  const double w2 = h * cut0 * cut0 * ad * ad;
  k.c3 = w2 * eval_or_zero(c.m3, dw);
  k.c_m1 = w2 * eval_or_zero(c.m_m1, dw);
  k.c_m3 = w2 * eval_or_zero(c.m_m3, dw);
  return k;
}

Poly rhs_poly(const PointCoefficients& k, double h) {
  Poly P;
  P.c[1][0] = k.lambda;
  P.c[2][0] = k.q_plus;
  P.c[0][2] = k.q_minus;
  P.c[3][0] = h * k.phi3;
  P.c[2][1] = h * k.phi1;
  P.c[1][2] = h * k.phi_m1;
  P.c[0][3] = h * k.phi_m3;
  return P;
}

Poly transform_poly(const PointCoefficients& k) {
  Poly F;
  F.c[1][0] = 1.0;
  F.c[2][0] = k.a;
  F.c[0][2] = k.b;
  F.c[3][0] = k.c3;
  F.c[1][2] = k.c_m1;
  F.c[0][3] = k.c_m3;
  return F;
}

Poly inverse_poly(const Poly& F) {
  Poly id;
  id.c[1][0] = 1.0;
  const Poly N = F - id;
  Poly W = id;
  for (int it = 0; it < 4; ++it) W = id - N.compose(W);
  return W;
}

CubicPoly to_cubic(const Poly& p) {
  CubicPoly r;
  for (int i = 0; i < 4; ++i)
    for (int j = 0; i + j < 4; ++j) r.c[i][j] = p.c[i][j];
  return r;
}

void check_point(double X, const NormalFormParams& p) {
  if (!(std::abs(X) >= p.x_floor)) throw std::domain_error("profile field: point inside the puncture |X| < x_floor");
}

void check_field(const ProfileField& f, const NormalFormParams& p) {
  if (f.values.size() != f.x.size()) throw std::invalid_argument("profile field: size mismatch");
  for (std::size_t q = 0; q < f.size(); ++q) {
    check_point(f.x[q], p);
    if (!std::isfinite(f.values[q].real()) || !std::isfinite(f.values[q].imag()))
      throw std::domain_error("profile field: non-finite value");
  }
}

double cut_of(double X, double t, const NormalFormParams& p) { return 1.0 - nf_chi(X * std::pow(t, p.beta), p); }
double cut0_of(double X, double t, const NormalFormParams& p) { return 1.0 - nf_chi0(X * std::pow(t, p.beta), p); }

// Restriction of [t_begin, t_end] to the cutoff transition [a, b]; (1 - chi) vanishes before it and is one
// from sat = max(b, t_begin) on.
struct CutZones {
  double a, b, sat;
};
CutZones cut_zones(double X, double t_begin, double t_end, const NormalFormParams& p) {
  const double t_zero = std::pow(p.chi_radius / std::abs(X), 1.0 / p.beta);
  const double t_one = std::pow(2.0 * p.chi_radius / std::abs(X), 1.0 / p.beta);
  CutZones z;
  z.a = std::clamp(t_zero, t_begin, t_end);
  z.b = std::clamp(t_one, t_begin, t_end);
  z.sat = std::max(t_one, t_begin);
  return z;
}

// 1/2 (1 - chi) |d omega|^{1/2}
double linear_rate(double X, double t, const NormalFormParams& p) {
  return 0.5 * cut_of(X, t, p) * std::sqrt(std::abs(phase_domega(X)));
}

cplx forward_value(const PointCoefficients& k, cplx w) {
  const cplx wb = std::conj(w);
  return w + k.a * w * w + k.b * wb * wb + k.c3 * w * w * w + k.c_m3 * wb * wb * wb + k.c_m1 * w * wb * wb;
}

cplx reduced_value(double X, double t, int ell, cplx f, const NormalFormParams& p) {
  const double ad = std::abs(phase_domega(X));
  const double L = std::pow(jbracket(phase_domega(X)), -2.0 * ell);
  return 0.5 * cut_of(X, t, p) * std::sqrt(ad) * (1.0 + ad * ad / t * L * std::norm(f)) * f;
}

cplx w_value(const PointCoefficients& k, double h, cplx w) {
  const cplx wb = std::conj(w);
  return k.lambda * w + k.q_plus * w * w + k.q_minus * wb * wb +
         h * (k.phi3 * w * w * w + k.phi1 * w * w * wb + k.phi_m1 * w * wb * wb + k.phi_m3 * wb * wb * wb);
}

// Integrating-factor RK4: the linear rotation rate lin(X, t) is integrated exactly by quadrature and RK4
// advances y = exp(-i Phi) v, where Phi is the accumulated linear phase and rest is the remaining D_t term.
template <class Lin, class Rest>
ProfileTrajectory rk4_pointwise(const ProfileField& y0, double t_end, double dt, int save_every, Lin&& lin,
                                Rest&& rest) {
  if (!(dt > 0.0 && dt <= 0.1)) throw std::invalid_argument("profile ODE: dt must lie in (0, 0.1]");
  if (save_every < 1) throw std::invalid_argument("profile ODE: save_every must be positive");
  if (!(t_end >= y0.t)) throw std::invalid_argument("profile ODE: t_end before start");
  const auto steps = static_cast<long>(std::ceil((t_end - y0.t) / dt - 1e-9));
  const double h = steps > 0 ? (t_end - y0.t) / steps : 0.0;
  ProfileTrajectory tr;
  tr.t.push_back(y0.t);
  for (long s = 1; s <= steps; ++s)
    if (s % save_every == 0 || s == steps) tr.t.push_back(y0.t + s * h);
  tr.f.assign(tr.t.size(), y0);
  for (std::size_t i = 0; i < tr.t.size(); ++i) tr.f[i].t = tr.t[i];
  const std::size_t n = y0.size();
  using boost::math::quadrature::gauss;
#pragma omp parallel for schedule(static)
  for (std::size_t q = 0; q < n; ++q) {
    const double X = y0.x[q];
    auto rate = [&](double tau) { return lin(X, tau); };
    // d_t y = i exp(-i Phi) rest(t, exp(i Phi) y)
    auto g = [&](double tau, double phi, cplx y) {
      const cplx e = std::exp(I * phi);
      return I * std::conj(e) * rest(X, tau, e * y);
    };
    cplx y = y0.values[q];
    double phi = 0.0;
    std::size_t slot = 1;
    for (long s = 1; s <= steps; ++s) {
      const double t = y0.t + (s - 1) * h;
      const double phm = phi + gauss<double, 10>::integrate(rate, t, t + 0.5 * h);
      const double php = phm + gauss<double, 10>::integrate(rate, t + 0.5 * h, t + h);
      const cplx k1 = g(t, phi, y);
      const cplx k2 = g(t + 0.5 * h, phm, y + 0.5 * h * k1);
      const cplx k3 = g(t + 0.5 * h, phm, y + 0.5 * h * k2);
      const cplx k4 = g(t + h, php, y + h * k3);
      y += h / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
      phi = php;
      if (s % save_every == 0 || s == steps) tr.f[slot++].values[q] = std::exp(I * phi) * y;
    }
  }
  return tr;
}

}  // namespace

double nf_chi(double s, const NormalFormParams& p) { return lp_rho(s / p.chi_radius); }
double nf_chi0(double s, const NormalFormParams& p) { return lp_rho(2.0 * s / p.chi_radius); }

double ProfileField::max_abs() const {
  double m = 0.0;
  for (const cplx& v : values) m = std::max(m, std::abs(v));
  return m;
}

std::vector<double> punctured_grid(std::size_t n, double x_max, double x_floor) {
  if (n < 2 || !(x_max > x_floor)) throw std::invalid_argument("punctured_grid: bad extent");
  std::vector<double> x;
  for (std::size_t q = 0; q < n; ++q) {
    const double X = -x_max + 2.0 * x_max * static_cast<double>(q) / static_cast<double>(n - 1);
    if (std::abs(X) >= x_floor) x.push_back(X);
  }
  return x;
}

ProfileField make_profile_field(std::vector<double> x, double t, int ell, const std::function<cplx(double)>& f) {
  ProfileField r;
  r.t = t;
  r.ell = ell;
  r.values.reserve(x.size());
  for (double X : x) r.values.push_back(f(X));
  r.x = std::move(x);
  return r;
}

PointCoefficients point_coefficients(double X, double t, int ell, const CoefficientSet& c, const NormalFormParams& p) {
  check_point(X, p);
  return raw_coefficients(phase_domega(X), 1.0 / t, cut_of(X, t, p), cut0_of(X, t, p), ell, c);
}

ProfileField ode_rhs_w(const ProfileField& w, const CoefficientSet& c, const NormalFormParams& p,
                       const ProfileField* remainder) {
  check_field(w, p);
  if (remainder && remainder->size() != w.size()) throw std::invalid_argument("ode_rhs_w: remainder size mismatch");
  const double h = 1.0 / w.t;
  ProfileField r = w;
  for (std::size_t q = 0; q < w.size(); ++q) {
    const PointCoefficients k = point_coefficients(w.x[q], w.t, w.ell, c, p);
    r.values[q] = w_value(k, h, w.values[q]);
    if (remainder) r.values[q] += std::pow(h, 1.0 + p.kappa) * remainder->values[q];
  }
  return r;
}

ProfileField nf_forward(const ProfileField& w, const CoefficientSet& c, const NormalFormParams& p) {
  check_field(w, p);
  if (w.max_abs() > p.nf_radius) throw std::domain_error("nf_forward: amplitude outside the diffeomorphism radius");
  ProfileField f = w;
  for (std::size_t q = 0; q < w.size(); ++q)
    f.values[q] = forward_value(point_coefficients(w.x[q], w.t, w.ell, c, p), w.values[q]);
  return f;
}

ProfileField nf_inverse(const ProfileField& f, const CoefficientSet& c, const NormalFormParams& p, double tol,
                        int max_iter) {
  check_field(f, p);
  if (f.max_abs() > p.nf_radius) throw std::domain_error("nf_inverse: amplitude outside the diffeomorphism radius");
  ProfileField w = f;
  for (std::size_t q = 0; q < f.size(); ++q) {
    const PointCoefficients k = point_coefficients(f.x[q], f.t, f.ell, c, p);
    const cplx target = f.values[q];
    cplx v = target;
    bool done = false;
    for (int it = 0; it < max_iter && !done; ++it) {
      const cplx next = target - (forward_value(k, v) - v);
      done = std::abs(next - v) <= tol * std::max(std::abs(target), 1e-300);
      v = next;
    }
    if (!done) throw std::runtime_error("nf_inverse: fixed point did not converge");
    w.values[q] = v;
  }
  return w;
}

CubicPoly inverse_series(double X, double t, int ell, const CoefficientSet& c, const NormalFormParams& p) {
  return to_cubic(inverse_poly(transform_poly(point_coefficients(X, t, ell, c, p))));
}

namespace {

Poly transformed_poly(const PointCoefficients& k, double h) {
  const Poly P = rhs_poly(k, h);
  const Poly F = transform_poly(k);
  // D_t zbar = -conj(D_t z)
  const Poly dtf = F.d_z() * P - F.d_zbar() * P.conj_swap();
  return dtf.compose(inverse_poly(F));
}

}  // namespace

CubicPoly transformed_rhs(double X, double t, int ell, const CoefficientSet& c, const NormalFormParams& p) {
  return to_cubic(transformed_poly(point_coefficients(X, t, ell, c, p), 1.0 / t));
}

GammaTildePrime gamma_tilde_prime(double dw, int ell, const CoefficientSet& c, const NormalFormParams&) {
  CoefficientSet c0 = c;
  c0.m3 = c0.m_m1 = c0.m_m3 = nullptr;
  const PointCoefficients k = raw_coefficients(dw, 1.0, 1.0, 1.0, ell, c0);
  const Poly T = transformed_poly(k, 1.0);
  const double norm = std::pow(std::abs(dw), 2.5);
  GammaTildePrime g;
  g.g3 = -T.c[3][0].real() / norm;
  g.g_m1 = -T.c[1][2].real() / norm;
  g.g_m3 = -T.c[0][3].real() / norm;
  return g;
}

CoefficientSet choose_M_cancelling(const CoefficientSet& c, int ell, const NormalFormParams& p) {
  CoefficientSet r = c;
  const bool injected = c.gtp3 || c.gtp_m1 || c.gtp_m3;
  if (injected) {
    const SymbolFn g3 = c.gtp3, gm1 = c.gtp_m1, gm3 = c.gtp_m3;
    r.m3 = [g3](double z) { return eval_or_zero(g3, z); };
    r.m_m1 = [gm1](double z) { return -eval_or_zero(gm1, z); };
    r.m_m3 = [gm3](double z) { return -0.5 * eval_or_zero(gm3, z); };
    return r;
  }
  // The symbols depend on d omega only; memoize since the ODE evaluates them at every stage.
  struct Cache {
    CoefficientSet base;
    int ell;
    NormalFormParams p;
    std::mutex lock;
    std::unordered_map<double, GammaTildePrime> values;
    GammaTildePrime get(double z) {
      {
        std::lock_guard<std::mutex> g(lock);
        if (auto it = values.find(z); it != values.end()) return it->second;
      }
      const GammaTildePrime v = gamma_tilde_prime(z, ell, base, p);
      std::lock_guard<std::mutex> g(lock);
      values.emplace(z, v);
      return v;
    }
  };
  auto cache = std::make_shared<Cache>();
  cache->base = c;
  cache->base.m3 = cache->base.m_m1 = cache->base.m_m3 = nullptr;
  cache->ell = ell;
  cache->p = p;
  r.m3 = [cache](double z) { return cache->get(z).g3; };
  r.m_m1 = [cache](double z) { return -cache->get(z).g_m1; };
  r.m_m3 = [cache](double z) { return -0.5 * cache->get(z).g_m3; };
  return r;
}

ProfileField reduced_rhs(const ProfileField& f, const NormalFormParams& p, const ProfileField* remainder) {
  check_field(f, p);
  if (remainder && remainder->size() != f.size()) throw std::invalid_argument("reduced_rhs: remainder size mismatch");
  ProfileField r = f;
  for (std::size_t q = 0; q < f.size(); ++q) {
    r.values[q] = reduced_value(f.x[q], f.t, f.ell, f.values[q], p);
    if (remainder) r.values[q] += std::pow(f.t, -1.0 - p.kappa) * remainder->values[q];
  }
  return r;
}

ProfileTrajectory integrate_reduced(const ProfileField& f0, double t_end, double dt, const NormalFormParams& p,
                                    int save_every, const RemainderFn& remainder) {
  check_field(f0, p);
  const int ell = f0.ell;
  return rk4_pointwise(f0, t_end, dt, save_every, [&](double X, double t) { return linear_rate(X, t, p); },
                       [&](double X, double t, cplx v) {
    cplx r = reduced_value(X, t, ell, v, p) - linear_rate(X, t, p) * v;
    if (remainder) r += std::pow(t, -1.0 - p.kappa) * remainder(t, X, v);
    return r;
  });
}

ProfileTrajectory integrate_w(const ProfileField& w0, double t_end, double dt, const CoefficientSet& c,
                              const NormalFormParams& p, int save_every, const RemainderFn& remainder) {
  check_field(w0, p);
  const int ell = w0.ell;
  return rk4_pointwise(w0, t_end, dt, save_every, [&](double X, double t) { return linear_rate(X, t, p); },
                       [&](double X, double t, cplx v) {
    const double h = 1.0 / t;
    cplx r = w_value(point_coefficients(X, t, ell, c, p), h, v) - linear_rate(X, t, p) * v;
    if (remainder) r += std::pow(h, 1.0 + p.kappa) * remainder(t, X, v);
    return r;
  });
}

double reduced_phase(double X, double t_begin, double t, double modulus, int ell, const NormalFormParams& p) {
  const double ad = std::abs(phase_domega(X));
  const double L = std::pow(jbracket(phase_domega(X)), -2.0 * ell);
  const double k = ad * ad * L * modulus * modulus;
  const CutZones z = cut_zones(X, t_begin, t, p);
  double acc = 0.0;
  if (z.b > z.a)
    acc += boost::math::quadrature::gauss_kronrod<double, 61>::integrate(
        [&](double tau) { return cut_of(X, tau, p) * (1.0 + k / tau); }, z.a, z.b, 12, 1e-12);
  if (t > z.sat) acc += (t - z.sat) + k * std::log(t / z.sat);
  return 0.5 * std::sqrt(ad) * acc;
}

CancellationReport cancellation_residual(const ProfileTrajectory& w_traj, const CoefficientSet& c,
                                         const NormalFormParams& p, ResidualMode mode) {
  const std::size_t n = w_traj.size();
  if (n < 3) throw std::invalid_argument("cancellation_residual: at least three snapshots required");
  CancellationReport rep;
  for (std::size_t i = 0; i < n; ++i) {
    const ProfileField& w = w_traj.f[i];
    const double t = w_traj.t[i];
    const double h = 1.0 / t;
    const double dt = 1e-4 * t;
    double sup = 0.0;
    for (std::size_t q = 0; q < w.size(); ++q) {
      const PointCoefficients k = point_coefficients(w.x[q], t, w.ell, c, p);
      const cplx wv = w.values[q];
      const cplx wb = std::conj(wv);
      const cplx P = w_value(k, h, wv);
      const cplx Fz = 1.0 + 2.0 * k.a * wv + 3.0 * k.c3 * wv * wv + k.c_m1 * wb * wb;
      const cplx Fzb = 2.0 * k.b * wb + 3.0 * k.c_m3 * wb * wb + 2.0 * k.c_m1 * wv * wb;
      cplx dtf = Fz * P - Fzb * std::conj(P);
      if (mode == ResidualMode::total) {
        const cplx fp = forward_value(point_coefficients(w.x[q], t + dt, w.ell, c, p), wv);
        const cplx fm = forward_value(point_coefficients(w.x[q], t - dt, w.ell, c, p), wv);
        dtf += -I * (fp - fm) / (2.0 * dt);
      }
      sup = std::max(sup, std::abs(dtf - reduced_value(w.x[q], t, w.ell, forward_value(k, wv), p)));
    }
    rep.t.push_back(t);
    rep.residual.push_back(sup);
  }
  std::vector<double> tt, rr;
  for (std::size_t i = 0; i < rep.t.size(); ++i)
    if (rep.residual[i] > 0.0) {
      tt.push_back(rep.t[i]);
      rr.push_back(rep.residual[i]);
    }
  if (tt.size() < 3) {
    rep.slope = std::numeric_limits<double>::infinity();
    return rep;
  }
  const LineFit fit = fit_loglog(tt, rr);
  if (!std::isfinite(fit.slope)) throw std::runtime_error("cancellation_residual: degenerate fit");
  rep.slope = -fit.slope;
  rep.slope_ci = fit.slope_ci;
  rep.prefactor = std::exp(fit.intercept);
  return rep;
}

AlphaExtraction extract_alpha(const ProfileTrajectory& tr, const NormalFormParams& p) {
  const std::size_t n = tr.size();
  if (n < 3) throw std::invalid_argument("extract_alpha: at least three snapshots required");
  if (!(tr.t.back() >= 100.0 * tr.t.front())) throw std::invalid_argument("extract_alpha: need t_max >= 100 T0");
  const ProfileField& f0 = tr.f.front();
  const std::size_t m = f0.size();
  AlphaExtraction ex;
  ex.x = f0.x;
  ex.alpha.assign(m, 0.0);
  ex.theta.assign(m, 0.0);
  std::vector<std::vector<double>> theta(n, std::vector<double>(m, 0.0));
  for (std::size_t q = 0; q < m; ++q) {
    const double X = f0.x[q];
    check_point(X, p);
    const double ad = std::abs(phase_domega(X));
    const double L = std::pow(jbracket(phase_domega(X)), -2.0 * f0.ell);
    double nl = 0.0, lin = 0.0;
    for (std::size_t i = 1; i < n; ++i) {
      const double ta = tr.t[i - 1], tb = tr.t[i];
      // (1 - chi)/tau integrated exactly against |f|^2 interpolated linearly between snapshots.
      const double ma = std::norm(tr.f[i - 1].values[q]), mb = std::norm(tr.f[i].values[q]);
      const double slope = (mb - ma) / (tb - ta);
      const CutZones z = cut_zones(X, ta, tb, p);
      double part = 0.0;
      if (z.b > z.a)
        part += boost::math::quadrature::gauss<double, 20>::integrate(
            [&](double tau) { return cut_of(X, tau, p) * (ma + slope * (tau - ta)) / tau; }, z.a, z.b);
      if (tb > z.sat) part += (ma - slope * ta) * std::log(tb / z.sat) + slope * (tb - z.sat);
      nl += ad * ad * L * part;
      // Linear part in closed form with zero modulus, accumulated interval by interval.
      lin += reduced_phase(X, ta, tb, 0.0, f0.ell, p);
      theta[i][q] = lin + 0.5 * std::sqrt(ad) * nl;
    }
    ex.theta[q] = theta[n - 1][q];
    ex.alpha[q] = tr.f.back().values[q] * std::exp(-I * ex.theta[q]);
  }
  const double t_last = tr.t.back();
  for (std::size_t i = 0; i < n; ++i) {
    double sup = 0.0;
    for (std::size_t q = 0; q < m; ++q)
      sup = std::max(sup, std::abs(tr.f[i].values[q] * std::exp(-I * theta[i][q]) - ex.alpha[q]));
    ex.residual_t.push_back(tr.t[i]);
    ex.residual_history.push_back(sup);
    if (tr.t[i] >= 0.1 * t_last) ex.residual = std::max(ex.residual, sup);
  }
  // Convergence rate from Cauchy increments sup_X |g(2 t) - g(t)|, g = f exp(-i Theta), which decay like t^-kappa
  // without the bias of comparing to the value at the final time.
  std::vector<double> tt, rr;
  std::size_t i = 0;
  while (true) {
    const auto next = std::lower_bound(tr.t.begin(), tr.t.end(), 2.0 * tr.t[i]);
    if (next == tr.t.end()) break;
    const auto j = static_cast<std::size_t>(next - tr.t.begin());
    double sup = 0.0;
    for (std::size_t q = 0; q < m; ++q)
      sup = std::max(sup, std::abs(tr.f[j].values[q] * std::exp(-I * theta[j][q]) -
                                   tr.f[i].values[q] * std::exp(-I * theta[i][q])));
    if (sup > 1e-14) {
      tt.push_back(tr.t[i]);
      rr.push_back(sup);
    }
    i = j;
  }
  if (tt.size() >= 3) {
    ex.kappa_fit = -fit_loglog(tt, rr).slope;
    if (ex.residual > 1e-8 && ex.residual > ex.residual_history.front())
      throw std::runtime_error("extract_alpha: residual not decreasing");
  }
  return ex;
}

double asymptotic_phase(cplx alpha, double t, double X, double epsilon) {
  const double ax = std::abs(X);
  return t / (4.0 * ax) + epsilon * epsilon / 64.0 * std::norm(alpha) / std::pow(ax, 5) * std::log(t);
}

double asymptotic_phase_rate(cplx alpha, double t, double X, double epsilon) {
  const double ax = std::abs(X);
  return 1.0 / (4.0 * ax) + epsilon * epsilon * std::norm(alpha) / (64.0 * std::pow(ax, 5) * t);
}

cplx asymptotic_eval(cplx alpha, double t, double X, double epsilon, int, const NormalFormParams& p) {
  check_point(X, p);
  return epsilon * alpha * std::exp(I * asymptotic_phase(alpha, t, X, epsilon));
}

std::vector<double> unwrap_phase(const std::vector<double>& phase) {
  std::vector<double> out(phase.size());
  double shift = 0.0;
  for (std::size_t i = 0; i < phase.size(); ++i) {
    if (i > 0) {
      const double d = phase[i] + shift - out[i - 1];
      shift -= 2.0 * std::numbers::pi * std::round(d / (2.0 * std::numbers::pi));
    }
    out[i] = phase[i] + shift;
  }
  return out;
}

LineFit fit_log_coefficient(const std::vector<double>& t, const std::vector<double>& phase) {
  std::vector<double> lt(t.size());
  std::transform(t.begin(), t.end(), lt.begin(), [](double s) { return std::log(s); });
  return fit_line(lt, phase);
}

}  // namespace ripple
