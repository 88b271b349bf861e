#include "ripple/evolution.hpp"

#include <cmath>
#include <map>
#include <memory>
#include <mutex>
#include <numbers>

#include "ripple/fourier.hpp"

namespace ripple {

std::string to_string(ModelTag m) { return m == ModelTag::full ? "full" : "cubic"; }
std::string to_string(Scheme s) { return s == Scheme::rk4 ? "rk4" : "if_rk4"; }

GridFunction to_complex(const SurfaceState& s) {
  GridFunction u = apply_multiplier(s.psi.real(), symbols::abs_pow(0.5));
  u += cplx(0.0, 1.0) * s.eta.real();
  return u;
}

SurfaceState from_complex(const GridFunction& u) {
  cvec c = u.real().spectrum();
  c[0] = 0.0;
  const GridFunction re = GridFunction::from_spectrum(u.length(), std::move(c));
  return {u.imag(), apply_multiplier(re, symbols::abs_pow(-0.5)).real()};
}

GridFunction Trajectory::u(std::size_t i) const {
  return model == ModelTag::full ? to_complex(full.at(i)) : cubic.at(i);
}

SurfaceState Trajectory::state(std::size_t i) const {
  return model == ModelTag::full ? full.at(i) : from_complex(cubic.at(i));
}

Trajectory make_full_trajectory(double t0, SurfaceState s0, double epsilon) {
  Trajectory t;
  t.model = ModelTag::full;
  t.epsilon = epsilon;
  t.times.push_back(t0);
  t.full.push_back(std::move(s0));
  return t;
}

Trajectory make_cubic_trajectory(double t0, GridFunction u0, double epsilon) {
  Trajectory t;
  t.model = ModelTag::cubic;
  t.epsilon = epsilon;
  t.times.push_back(t0);
  t.cubic.push_back(std::move(u0));
  return t;
}

namespace {

// Pointwise evaluation of a nonlinear expression on a 3/2-padded grid.
template <class F>
GridFunction padded_pointwise(const std::vector<const GridFunction*>& in, F&& fn) {
  const std::size_t n = in.front()->size();
  const std::size_t m = 3 * n / 2;
  std::vector<cvec> phys;
  for (const auto* g : in) phys.push_back(fft_inverse(resize_spectrum(g->spectrum(), m)));
  cvec out(m);
  std::vector<cplx> args(in.size());
  for (std::size_t j = 0; j < m; ++j) {
    for (std::size_t q = 0; q < in.size(); ++q) args[q] = phys[q][j];
    out[j] = fn(args);
  }
  return GridFunction::from_spectrum(in.front()->length(), resize_spectrum(fft_forward(out), n));
}

}  // namespace

std::pair<GridFunction, GridFunction> rhs_full(const SurfaceState& s, DnoMode mode, const DnoOptions& opt) {
  const GridFunction g = mode == DnoMode::elliptic ? dno_elliptic(s, opt) : dno_quadratic(s);
  const GridFunction ex = derivative(s.eta);
  const GridFunction px = derivative(s.psi);
  GridFunction nl = padded_pointwise({&ex, &px, &g}, [](const std::vector<cplx>& a) {
    const cplx e = a[0], p = a[1], gg = a[2];
    const cplx num = gg + e * p;
    return -0.5 * p * p + num * num / (2.0 * (1.0 + e * e));
  });
  GridFunction pt = nl - s.eta;
  return {g.real(), pt.real()};
}

GridFunction rhs_full_complex(const SurfaceState& s, DnoMode mode, const DnoOptions& opt) {
  auto [et, pt] = rhs_full(s, mode, opt);
  GridFunction u = apply_multiplier(pt, symbols::abs_pow(0.5));
  u += cplx(0.0, 1.0) * et;
  return u;
}

namespace {

// Precomputed multiplier tables and padded-product machinery for the cubic model.
struct CubicOperator {
  std::size_t n = 0, m = 0;
  double length = 0.0;
  std::vector<double> H, A, S, H3, A2, D;

  CubicOperator(std::size_t n_, double L) : n(n_), m(2 * n_), length(L) {
    H.resize(n);
    A.resize(n);
    S.resize(n);
    H3.resize(n);
    A2.resize(n);
    D.resize(n);
    for (std::size_t i = 0; i < n; ++i) {
      const long mi = mode_index(i, n);
      const double k = 2.0 * std::numbers::pi * static_cast<double>(mi) / L;
      const double ak = std::abs(k);
      const bool nyq = i == n / 2;
      H[i] = std::sqrt(ak);
      A[i] = ak;
      S[i] = nyq || mi == 0 ? 0.0 : (k > 0 ? 1.0 : -1.0) * std::sqrt(ak);
      H3[i] = ak * std::sqrt(ak);
      A2[i] = ak * ak;
      D[i] = nyq ? 0.0 : k;
    }
  }

  cvec to_padded(const cvec& c, const std::vector<double>* mult) const {
    cvec t(m, 0.0);
    const std::size_t h = n / 2;
    for (std::size_t i = 0; i < h; ++i) t[i] = mult ? (*mult)[i] * c[i] : c[i];
    for (std::size_t i = h + 1; i < n; ++i) t[m - (n - i)] = mult ? (*mult)[i] * c[i] : c[i];
    fft_inverse(t.data(), t.data(), m);
    return t;
  }

  // Forward transform of padded samples truncated to |mode| < n/2.
  cvec from_padded(cvec p) const {
    fft_forward(p.data(), p.data(), m);
    cvec c(n, 0.0);
    const std::size_t h = n / 2;
    for (std::size_t i = 0; i < h; ++i) c[i] = p[i];
    for (std::size_t i = 1; i < h; ++i) c[n - i] = p[m - i];
    return c;
  }

  // Q(u) + C(u) in spectral form, according to the enabled terms.
  cvec nonlinear(const cvec& uh, bool quad, bool cub) const {
    cvec out(n, 0.0);
    if (!quad && !cub) return out;
    const std::size_t h = n / 2;
    // a = u + conj(u), b = u - conj(u) in spectral form.
    cvec ah(n), bh(n);
    for (std::size_t i = 0; i < n; ++i) {
      const std::size_t j = (n - i) % n;
      ah[i] = uh[i] + std::conj(uh[j]);
      bh[i] = uh[i] - std::conj(uh[j]);
    }
    ah[h] = bh[h] = 0.0;
    const cvec b = to_padded(bh, nullptr);
    const cvec ha = to_padded(ah, &H);
    const cvec sa = to_padded(ah, &S);
    cvec bha(m);
    for (std::size_t j = 0; j < m; ++j) bha[j] = b[j] * ha[j];
    const cvec bha_h = from_padded(bha);

    cvec gh(m, 0.0), ga(m, 0.0), ga2(m, 0.0), gd(m, 0.0);
    const cplx I(0.0, 1.0);
    if (quad) {
      for (std::size_t j = 0; j < m; ++j) {
        gh[j] += -I / 8.0 * (sa[j] * sa[j] + ha[j] * ha[j]);
        gd[j] += -I / 4.0 * b[j] * sa[j];
      }
    }
    if (cub) {
      const cvec h3a = to_padded(ah, &H3);
      const cvec abha = to_padded(bha_h, &A);
      for (std::size_t j = 0; j < m; ++j) {
        const cplx b2 = b[j] * b[j];
        gh[j] += (ha[j] * abha[j] - ha[j] * b[j] * h3a[j]) / 8.0;
        ga[j] += -b[j] * abha[j] / 8.0 + b2 * h3a[j] / 16.0;
        ga2[j] += b2 * ha[j] / 16.0;
      }
    }
    const cvec ch = from_padded(std::move(gh));
    const cvec cd = quad ? from_padded(std::move(gd)) : cvec(n, 0.0);
    const cvec ca = cub ? from_padded(std::move(ga)) : cvec(n, 0.0);
    const cvec ca2 = cub ? from_padded(std::move(ga2)) : cvec(n, 0.0);
    for (std::size_t i = 0; i < n; ++i) {
      out[i] = H[i] * ch[i] + A[i] * ca[i] + A2[i] * ca2[i] + D[i] * cd[i];
      if (quad) out[i] += I / 4.0 * A[i] * bha_h[i];
    }
    return out;
  }

  // d_t u = i (H u + N(u)).
  cvec rhs(const cvec& uh, const CubicTerms& t) const {
    cvec out = nonlinear(uh, t.quadratic, t.cubic);
    const cplx I(0.0, 1.0);
    for (std::size_t i = 0; i < n; ++i) out[i] = I * ((t.linear ? H[i] * uh[i] : cplx(0.0)) + out[i]);
    return out;
  }
};

std::shared_ptr<const CubicOperator> cubic_operator(std::size_t n, double L) {
  static std::mutex mu;
  static std::map<std::pair<std::size_t, double>, std::shared_ptr<const CubicOperator>> cache;
  std::lock_guard<std::mutex> lock(mu);
  auto key = std::make_pair(n, L);
  auto it = cache.find(key);
  if (it != cache.end()) return it->second;
  auto op = std::make_shared<CubicOperator>(n, L);
  if (cache.size() > 16) cache.clear();
  cache.emplace(key, op);
  return op;
}

}  // namespace

GridFunction cubic_model_quadratic(const GridFunction& u) {
  const auto op = cubic_operator(u.size(), u.length());
  return GridFunction::from_spectrum(u.length(), op->nonlinear(u.spectrum(), true, false));
}

GridFunction cubic_model_cubic(const GridFunction& u) {
  const auto op = cubic_operator(u.size(), u.length());
  return GridFunction::from_spectrum(u.length(), op->nonlinear(u.spectrum(), false, true));
}

GridFunction rhs_cubic(const GridFunction& u, const CubicTerms& terms) {
  const auto op = cubic_operator(u.size(), u.length());
  return GridFunction::from_spectrum(u.length(), op->rhs(u.spectrum(), terms));
}

double stable_dt(const GridFunction& f, double safety) {
  return safety * 2.8 / std::sqrt(f.nyquist());
}

namespace {

cvec axpy(const cvec& x, cplx a, const cvec& y) {
  cvec r(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) r[i] = x[i] + a * y[i];
  return r;
}

cvec cubic_step_spectral(const CubicOperator& op, const cvec& u, double dt, Scheme scheme, const CubicTerms& t) {
  const std::size_t n = u.size();
  if (scheme == Scheme::rk4) {
    const cvec k1 = op.rhs(u, t);
    const cvec k2 = op.rhs(axpy(u, 0.5 * dt, k1), t);
    const cvec k3 = op.rhs(axpy(u, 0.5 * dt, k2), t);
    const cvec k4 = op.rhs(axpy(u, dt, k3), t);
    cvec r(n);
    for (std::size_t i = 0; i < n; ++i) r[i] = u[i] + dt / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
    return r;
  }
  // Integrating factor: exact linear propagator, RK4 on the nonlinearity.
  cvec e1(n), e2(n);
  for (std::size_t i = 0; i < n; ++i) {
    const double w = t.linear ? op.H[i] : 0.0;
    e1[i] = std::polar(1.0, w * dt);
    e2[i] = std::polar(1.0, 0.5 * w * dt);
  }
  const bool nl = t.quadratic || t.cubic;
  auto N = [&](const cvec& v) {
    cvec r = op.nonlinear(v, t.quadratic, t.cubic);
    for (auto& z : r) z *= cplx(0.0, 1.0);
    return r;
  };
  cvec r(n);
  if (!nl) {
    for (std::size_t i = 0; i < n; ++i) r[i] = e1[i] * u[i];
    return r;
  }
  const cvec k1 = N(u);
  cvec tmp(n);
  for (std::size_t i = 0; i < n; ++i) tmp[i] = e2[i] * (u[i] + 0.5 * dt * k1[i]);
  const cvec k2 = N(tmp);
  for (std::size_t i = 0; i < n; ++i) tmp[i] = e2[i] * u[i] + 0.5 * dt * k2[i];
  const cvec k3 = N(tmp);
  for (std::size_t i = 0; i < n; ++i) tmp[i] = e1[i] * u[i] + dt * e2[i] * k3[i];
  const cvec k4 = N(tmp);
  for (std::size_t i = 0; i < n; ++i)
    r[i] = e1[i] * u[i] + dt / 6.0 * (e1[i] * k1[i] + 2.0 * e2[i] * (k2[i] + k3[i]) + k4[i]);
  return r;
}

double spectral_norm_max(const cvec& c) {
  double s = 0.0;
  for (const auto& z : c) s += std::abs(z);
  return s;  // bounds the sup norm
}

void check_wrap(const GridFunction& u, const StepOptions& opt, double t) {
  if (opt.wrap_tolerance <= 0.0) return;
  const std::size_t n = u.size();
  const std::size_t edge = std::max<std::size_t>(1, static_cast<std::size_t>(opt.wrap_margin * n));
  double peak = 0.0, boundary = 0.0;
  for (std::size_t j = 0; j < n; ++j) {
    const double a = std::abs(u[j]);
    peak = std::max(peak, a);
    if (j < edge || j >= n - edge) boundary = std::max(boundary, a);
  }
  if (peak > 0.0 && boundary > opt.wrap_tolerance * peak)
    throw WrapAroundError("wrap-around monitor tripped: boundary/peak = " + std::to_string(boundary / peak), t);
}

}  // namespace

GridFunction step_cubic(const GridFunction& u, double dt, Scheme scheme, const CubicTerms& terms) {
  const auto op = cubic_operator(u.size(), u.length());
  return GridFunction::from_spectrum(u.length(), cubic_step_spectral(*op, u.spectrum(), dt, scheme, terms));
}

SurfaceState rk4_step_full(const SurfaceState& s, double dt, DnoMode mode, const DnoOptions& opt) {
  auto add = [](const SurfaceState& a, double h, const std::pair<GridFunction, GridFunction>& k) {
    return SurfaceState{a.eta + h * k.first, a.psi + h * k.second};
  };
  const auto k1 = rhs_full(s, mode, opt);
  const auto k2 = rhs_full(add(s, 0.5 * dt, k1), mode, opt);
  const auto k3 = rhs_full(add(s, 0.5 * dt, k2), mode, opt);
  const auto k4 = rhs_full(add(s, dt, k3), mode, opt);
  SurfaceState r = s;
  r.eta += (dt / 6.0) * (k1.first + 2.0 * k2.first + 2.0 * k3.first + k4.first);
  r.psi += (dt / 6.0) * (k1.second + 2.0 * k2.second + 2.0 * k3.second + k4.second);
  return {r.eta.real(), r.psi.real()};
}

Trajectory step_integrate(Trajectory traj, double t_end, double dt, Scheme scheme, const StepOptions& opt) {
  if (traj.times.empty()) throw std::invalid_argument("trajectory has no initial state");
  if (!(dt > 0.0)) throw std::invalid_argument("time step must be positive");
  double t = traj.times.back();
  const long steps = std::lround(std::ceil((t_end - t) / dt - 1e-9));
  if (steps <= 0) return traj;
  const double h = (t_end - t) / static_cast<double>(steps);
  const double t_start = t;
  if (traj.model == ModelTag::cubic) {
    const GridFunction u0 = traj.cubic.back();
    if (std::abs(u0.mean()) > 1e-12 * std::max(1.0, u0.max_abs()))
      throw std::invalid_argument("cubic model requires zero-mean data");
    if (scheme == Scheme::rk4 && opt.terms.linear && h > stable_dt(u0, 1.0))
      throw std::invalid_argument("time step exceeds the explicit stability bound");
    const auto op = cubic_operator(u0.size(), u0.length());
    cvec u = u0.spectrum();
    for (long s = 1; s <= steps; ++s) {
      cvec next = cubic_step_spectral(*op, u, h, scheme, opt.terms);
      if (!(spectral_norm_max(next) < opt.blowup_threshold))
        throw BlowUpError("solution norm exceeded blow-up threshold", t);
      u = std::move(next);
      t = t_start + h * static_cast<double>(s);
      if (s % opt.save_every == 0 || s == steps) {
        traj.times.push_back(t);
        traj.cubic.push_back(GridFunction::from_spectrum(u0.length(), u));
        check_wrap(traj.cubic.back(), opt, t);
      }
    }
  } else {
    if (scheme != Scheme::rk4) throw std::invalid_argument("the full system is integrated with rk4");
    SurfaceState s0 = traj.full.back();
    if (h > stable_dt(s0.eta, 1.0)) throw std::invalid_argument("time step exceeds the explicit stability bound");
    for (long s = 1; s <= steps; ++s) {
      SurfaceState next = rk4_step_full(s0, h, opt.dno_mode, opt.dno);
      if (!(next.eta.max_abs() < opt.blowup_threshold && next.psi.max_abs() < opt.blowup_threshold))
        throw BlowUpError("solution norm exceeded blow-up threshold", t);
      s0 = std::move(next);
      t = t_start + h * static_cast<double>(s);
      if (s % opt.save_every == 0 || s == steps) {
        traj.times.push_back(t);
        traj.full.push_back(s0);
        check_wrap(to_complex(s0), opt, t);
      }
    }
  }
  return traj;
}

double hamiltonian(const SurfaceState& s, const DnoOptions& opt) {
  const GridFunction g = dno_elliptic(s, opt);
  return 0.5 * integral(product_raw(s.eta, s.eta)) + 0.5 * integral(product_raw(s.psi, g));
}

Trajectory scale_solution(const Trajectory& traj, double lambda) {
  if (!(lambda > 0.0)) throw std::invalid_argument("scaling parameter must be positive");
  Trajectory out = traj;
  const double l2 = lambda * lambda;
  for (std::size_t i = 0; i < traj.size(); ++i) {
    out.times[i] = traj.times[i] / lambda;
    if (traj.model == ModelTag::full) {
      const auto& s = traj.full[i];
      out.full[i] = {(1.0 / l2) * s.eta.relabel(s.eta.length() / l2),
                     (1.0 / (l2 * lambda)) * s.psi.relabel(s.psi.length() / l2)};
    } else {
      const auto& u = traj.cubic[i];
      // u = |D|^{1/2} psi + i eta scales as lambda^{-2} under the same map.
      out.cubic[i] = (1.0 / l2) * u.relabel(u.length() / l2);
    }
  }
  return out;
}

double one_step_defect(const Trajectory& traj, std::size_t i, const DnoOptions& opt) {
  if (traj.model != ModelTag::full) throw std::invalid_argument("defect is defined for full trajectories");
  if (i + 1 >= traj.size()) throw std::out_of_range("defect index");
  const double dt = traj.times[i + 1] - traj.times[i];
  const SurfaceState p = rk4_step_full(traj.full[i], dt, DnoMode::elliptic, opt);
  const auto& q = traj.full[i + 1];
  const double num = std::hypot((p.eta - q.eta).l2(), (p.psi - q.psi).l2());
  const double den = std::hypot(q.eta.l2(), q.psi.l2());
  return num / den;
}

GridFunction z_power(const std::vector<GridFunction>& seq, const std::vector<double>& times, std::size_t i, int p) {
  if (p == 0) return seq.at(i);
  if (i < static_cast<std::size_t>(p) || i + p >= seq.size())
    throw std::out_of_range("insufficient snapshots for Z^p");
  auto z_once = [&](std::size_t j, const std::function<GridFunction(std::size_t)>& f) {
    const double tm = times[j - 1], t0 = times[j], tp = times[j + 1];
    // Second-order derivative on a possibly non-uniform three-point stencil.
    const double hm = t0 - tm, hp = tp - t0;
    const GridFunction fm = f(j - 1), f0 = f(j), fp = f(j + 1);
    GridFunction dt = (-hp / (hm * (hm + hp))) * fm + ((hp - hm) / (hm * hp)) * f0 + (hm / (hp * (hm + hp))) * fp;
    const GridFunction fx = derivative(f0);
    cvec xs(f0.size());
    for (std::size_t q = 0; q < xs.size(); ++q) xs[q] = 2.0 * f0.x(q) * fx[q];
    return t0 * dt + GridFunction(f0.length(), std::move(xs));
  };
  std::function<GridFunction(std::size_t, int)> rec = [&](std::size_t j, int q) -> GridFunction {
    if (q == 0) return seq[j];
    return z_once(j, [&](std::size_t jj) { return rec(jj, q - 1); });
  };
  return rec(i, p);
}

std::vector<ZFieldRow> z_field_diagnostics(const Trajectory& traj, int k_max, double s, double rho, std::size_t stride) {
  if (traj.size() < static_cast<std::size_t>(2 * k_max + 1))
    throw std::invalid_argument("insufficient snapshots for Z-field diagnostics");
  std::vector<GridFunction> etas, hw;
  etas.reserve(traj.size());
  hw.reserve(traj.size());
  for (std::size_t i = 0; i < traj.size(); ++i) {
    const SurfaceState st = traj.state(i);
    const GridFunction g = traj.model == ModelTag::full ? dno_elliptic(st) : dno_quadratic(st);
    const GridFunction B = traces_BV(st, g).first.real();
    const GridFunction omega = good_unknown(st, B);
    etas.push_back(st.eta);
    hw.push_back(apply_multiplier(omega, symbols::abs_pow(0.5)));
  }
  std::vector<GridFunction> psis;
  for (std::size_t i = 0; i < traj.size(); ++i) psis.push_back(apply_multiplier(traj.state(i).psi, symbols::abs_pow(0.5)));
  std::vector<ZFieldRow> rows;
  for (std::size_t i = k_max; i + k_max < traj.size(); i += std::max<std::size_t>(1, stride)) {
    ZFieldRow r;
    r.t = traj.times[i];
    double macc = 0.0, nacc = 0.0;
    for (int p = 0; p <= k_max; ++p) {
      const GridFunction ze = z_power(etas, traj.times, i, p);
      const GridFunction zw = z_power(hw, traj.times, i, p);
      const GridFunction zp = z_power(psis, traj.times, i, p);
      macc += sobolev_norm(ze, s - p) + sobolev_norm(zw, s - p);
      nacc += holder_norm(ze, rho - p) + holder_norm(zp, rho - p);
      r.M.push_back(macc);
      r.N.push_back(nacc);
    }
    rows.push_back(std::move(r));
  }
  return rows;
}

namespace {

GridFunction z_from_dt(const GridFunction& f, const GridFunction& dt_f, double t) {
  const GridFunction fx = derivative(f);
  cvec xs(f.size());
  for (std::size_t q = 0; q < xs.size(); ++q) xs[q] = 2.0 * f.x(q) * fx[q];
  return t * dt_f + GridFunction(f.length(), std::move(xs));
}

SurfaceState state_step(const SurfaceState& s, const SurfaceState& ds, double d) {
  return {s.eta + d * ds.eta, s.psi + d * ds.psi};
}

}  // namespace

std::vector<ZFieldRow> z_field_first_order(const Trajectory& traj, double s, double rho, std::size_t stride,
                                           const DnoOptions& opt) {
  const bool full = traj.model == ModelTag::full;
  auto dno = [&](const SurfaceState& st) { return full ? dno_elliptic(st, opt) : dno_quadratic(st); };
  auto hw = [&](const SurfaceState& st) {
    return apply_multiplier(good_unknown(st, traces_BV(st, dno(st)).first.real()), symbols::abs_pow(0.5));
  };
  // Directional step in time units for the good-unknown derivative.
  constexpr double kDelta = 1e-3;
  std::vector<ZFieldRow> rows;
  for (std::size_t i = 0; i < traj.size(); i += std::max<std::size_t>(1, stride)) {
    const double t = traj.times[i];
    const SurfaceState st = traj.state(i);
    SurfaceState ds;
    if (full) {
      auto [et, pt] = rhs_full(st, DnoMode::elliptic, opt);
      ds = {et, pt};
    } else {
      ds = from_complex(rhs_cubic(traj.u(i)));
    }
    const GridFunction w0 = hw(st);
    const GridFunction dw = (1.0 / (2.0 * kDelta)) * (hw(state_step(st, ds, kDelta)) - hw(state_step(st, ds, -kDelta)));
    const GridFunction hp = apply_multiplier(st.psi, symbols::abs_pow(0.5));
    const GridFunction zeta = z_from_dt(st.eta, ds.eta, t);
    const GridFunction zw = z_from_dt(w0, dw, t);
    const GridFunction zp = z_from_dt(hp, apply_multiplier(ds.psi, symbols::abs_pow(0.5)), t);
    ZFieldRow r;
    r.t = t;
    r.M.push_back(sobolev_norm(st.eta, s) + sobolev_norm(w0, s));
    r.N.push_back(holder_norm(st.eta, rho) + holder_norm(hp, rho));
    r.M.push_back(r.M[0] + sobolev_norm(zeta, s - 1) + sobolev_norm(zw, s - 1));
    r.N.push_back(r.N[0] + holder_norm(zeta, rho - 1) + holder_norm(zp, rho - 1));
    rows.push_back(std::move(r));
  }
  return rows;
}

SurfaceState bump_data(std::size_t n, double L, double eps, double width, double center) {
  auto mask = [](GridFunction f) {
    cvec c = f.spectrum();
    double mx = 0.0;
    for (const auto& z : c) mx = std::max(mx, std::abs(z));
    for (auto& z : c)
      if (std::abs(z) < 1e-16 * mx) z = 0.0;
    return GridFunction::from_spectrum(f.length(), std::move(c)).real();
  };
  auto gauss = [=](double x) {
    const double y = (x - center) / width;
    return std::abs(y) > 8.0 ? 0.0 : std::exp(-0.5 * y * y);
  };
  const GridFunction eta = GridFunction::from_function(n, L, [&](double x) { return cplx(eps * gauss(x)); });
  const GridFunction psi = GridFunction::from_function(n, L, [&](double x) {
    return cplx(-eps * (x - center) / width * gauss(x));
  });
  return {mask(eta), mask(psi)};
}

GridFunction wavepacket_data(std::size_t n, double L, double eps, double width, double xi0, double center) {
  GridFunction u = GridFunction::from_function(n, L, [=](double x) {
    const double y = (x - center) / width;
    return eps * std::exp(-0.5 * y * y) * std::exp(cplx(0.0, xi0 * (x - center)));
  });
  cvec c = u.spectrum();
  c[0] = 0.0;
  c[n / 2] = 0.0;
  return GridFunction::from_spectrum(L, std::move(c));
}

}  // namespace ripple
