#include "ripple/dno.hpp"

#include <Eigen/Dense>
#include <cmath>
#include <map>
#include <memory>
#include <mutex>
#include <numbers>
#include <limits>
#include <tuple>

#include "ripple/fourier.hpp"

namespace ripple {

SurfaceState make_state(GridFunction eta, GridFunction psi) {
  require_same_grid(eta, psi);
  return {std::move(eta), std::move(psi)};
}

SurfaceState scale_state(const SurfaceState& s, double eps) { return {eps * s.eta, eps * s.psi}; }

double slope_measure(const SurfaceState& s, double gamma) {
  return holder_norm(derivative(s.eta).real(), std::max(0.0, gamma - 1.0));
}

namespace {

using RowMat = Eigen::Matrix<cplx, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

// Chebyshev collocation in s = exp(kappa z) on [s_b, 1]; node 0 is the surface.
struct StripOperator {
  int N = 0;
  double kappa = 0.0;
  double depth = 0.0;
  Eigen::VectorXd s;
  Eigen::MatrixXd sd;   // kappa s d/ds  (= d/dz)
  Eigen::MatrixXd lap;  // kappa^2 (s^2 d2/ds2 + s d/ds)  (= d2/dz2)
  Eigen::RowVectorXd bottom_d;  // d/ds at the bottom node
  bool infinite = false;
  std::vector<Eigen::MatrixXd> inv;  // inverse collocation matrix per |m|
};

std::shared_ptr<const StripOperator> build_operator(std::size_t n, double length, int N, double depth) {
  auto op = std::make_shared<StripOperator>();
  op->N = N;
  op->kappa = 2.0 * std::numbers::pi / length;
  op->depth = depth;
  const double sb = std::isinf(depth) ? 0.0 : std::exp(-op->kappa * depth);
  const int M = N + 1;
  Eigen::VectorXd tau(M);
  for (int i = 0; i < M; ++i) tau(i) = std::cos(std::numbers::pi * i / N);
  // Chebyshev differentiation matrix on [-1, 1].
  Eigen::MatrixXd D = Eigen::MatrixXd::Zero(M, M);
  auto c = [&](int i) { return (i == 0 || i == N) ? 2.0 : 1.0; };
  for (int i = 0; i < M; ++i) {
    for (int j = 0; j < M; ++j) {
      if (i == j) continue;
      const double sign = ((i + j) % 2 == 0) ? 1.0 : -1.0;
      D(i, j) = c(i) / c(j) * sign / (tau(i) - tau(j));
    }
    D(i, i) = 0.0;
    for (int j = 0; j < M; ++j)
      if (j != i) D(i, i) -= D(i, j);
  }
  const double scale = 2.0 / (1.0 - sb);
  D *= scale;
  op->s.resize(M);
  for (int i = 0; i < M; ++i) op->s(i) = sb + (1.0 - sb) * 0.5 * (tau(i) + 1.0);
  const Eigen::MatrixXd S = op->s.asDiagonal();
  const Eigen::MatrixXd SD = op->kappa * S * D;
  const Eigen::MatrixXd LAP = op->kappa * op->kappa * (S * S * D * D + S * D);
  op->sd = SD;
  op->bottom_d = D.row(N);
  op->infinite = sb == 0.0;
  op->lap = LAP;
  const std::size_t half = n / 2;
  op->inv.resize(half + 1);
  for (std::size_t m = 0; m <= half; ++m) {
    const double k = op->kappa * static_cast<double>(m);
    Eigen::MatrixXd A = LAP;
    A.diagonal().array() -= k * k;
    A.row(0).setZero();
    A(0, 0) = 1.0;
    if (sb == 0.0) {
      // s = 0 is z = -infinity: the collocated equation reads -k^2 phi(0) = F(0)
      // for k != 0; for k = 0 its s-derivative fixes phi'(0).
      if (m == 0) A.row(N) = op->kappa * op->kappa * D.row(N);
    } else if (m == 0) {
      A.row(N) = D.row(N);
    } else {
      A.row(N) = SD.row(N);
      A(N, N) -= k;
    }
    op->inv[m] = Eigen::PartialPivLU<Eigen::MatrixXd>(A).inverse();
  }
  return op;
}

std::shared_ptr<const StripOperator> cached_operator(std::size_t n, double length, int N, double depth) {
  static std::mutex mu;
  static std::map<std::tuple<std::size_t, double, int, double>, std::shared_ptr<const StripOperator>> cache;
  auto key = std::make_tuple(n, length, N, depth);
  {
    std::lock_guard<std::mutex> lock(mu);
    auto it = cache.find(key);
    if (it != cache.end()) return it->second;
  }
  auto op = build_operator(n, length, N, depth);
  std::lock_guard<std::mutex> lock(mu);
  if (cache.size() > 16) cache.clear();
  cache.emplace(key, op);
  return op;
}

int default_layers(std::size_t n, double tol) {
  const double M = 0.5 * static_cast<double>(n);
  const int N = static_cast<int>(std::ceil(1.3 * std::sqrt(M * std::log(1.0 / tol)) + 16.0));
  return std::clamp(N, 24, 320);
}

using RealRowMat = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

Eigen::Map<RealRowMat> real_view(RowMat& a) {
  return {reinterpret_cast<double*>(a.data()), a.rows(), 2 * a.cols()};
}

Eigen::Map<const RealRowMat> real_view(const RowMat& a) {
  return {reinterpret_cast<const double*>(a.data()), a.rows(), 2 * a.cols()};
}

// Real matrix acting on each Fourier column of a complex row-major field.
RowMat apply_real(const Eigen::MatrixXd& op, const RowMat& x) {
  RowMat out(op.rows(), x.cols());
  real_view(out).noalias() = op * real_view(x);
  return out;
}

void rows_inverse(RowMat& a) {
  const std::size_t n = static_cast<std::size_t>(a.cols());
  for (Eigen::Index i = 0; i < a.rows(); ++i) fft_inverse(a.row(i).data(), a.row(i).data(), n);
}

void rows_forward(RowMat& a) {
  const std::size_t n = static_cast<std::size_t>(a.cols());
  for (Eigen::Index i = 0; i < a.rows(); ++i) fft_forward(a.row(i).data(), a.row(i).data(), n);
}

}  // namespace

StripSolution solve_strip(const SurfaceState& state, const DnoOptions& opt) {
  require_same_grid(state.eta, state.psi);
  if (opt.check_slope) {
    const double sm = slope_measure(state, opt.gamma);
    if (sm >= opt.slope_threshold)
      throw SlopeGateError("surface slope " + std::to_string(sm) + " exceeds gate " +
                           std::to_string(opt.slope_threshold));
  }
  const std::size_t n = state.psi.size();
  const double length = state.psi.length();
  const double kappa = 2.0 * std::numbers::pi / length;
  const double depth = opt.depth > 0.0 ? opt.depth : std::numeric_limits<double>::infinity();
  const int N = opt.n_layers > 0 ? opt.n_layers : default_layers(n, opt.tol);
  const auto op = cached_operator(n, length, N, depth);
  const int M = N + 1;

  std::vector<double> k(n);
  for (std::size_t i = 0; i < n; ++i) k[i] = (i == n / 2) ? 0.0 : state.psi.wavenumber(i);
  std::vector<std::size_t> absm(n);
  std::vector<double> kabs(n);
  for (std::size_t i = 0; i < n; ++i) {
    absm[i] = static_cast<std::size_t>(std::labs(mode_index(i, n)));
    kabs[i] = kappa * static_cast<double>(absm[i]);
  }

  const cvec& psih = state.psi.spectrum();
  const GridFunction e1 = derivative(state.eta);
  const GridFunction e2 = derivative(e1);

  // Harmonic lift phi0 = exp(z|D|) psi and its z-derivatives.
  RowMat p0(M, n), p0z(M, n), p0zz(M, n);
  for (int i = 0; i < M; ++i) {
    const double si = op->s(i);
    for (std::size_t m = 0; m < n; ++m) {
      const double ak = kabs[m];
      const cplx v = psih[m] * std::pow(si, static_cast<double>(absm[m]));
      p0(i, m) = v;
      p0z(i, m) = ak * v;
      p0zz(i, m) = ak * ak * v;
    }
  }

  double psi_scale = 0.0;
  for (const auto& c : psih) psi_scale += std::norm(c);
  psi_scale = std::sqrt(psi_scale);

  auto source = [&](const RowMat& pc) {
    RowMat fz = apply_real(op->sd, pc);
    RowMat fzz = apply_real(op->lap, pc);
    fz += p0z;
    fzz += p0zz;
    RowMat fxz(M, n);
    for (int i = 0; i < M; ++i)
      for (std::size_t m = 0; m < n; ++m) fxz(i, m) = cplx(0.0, k[m]) * fz(i, m);
    rows_inverse(fz);
    rows_inverse(fzz);
    rows_inverse(fxz);
    RowMat F(M, n);
    for (int i = 0; i < M; ++i)
      for (std::size_t j = 0; j < n; ++j) {
        const double a = e1[j].real();
        const double b = e2[j].real();
        F(i, j) = -a * a * fzz(i, j) + 2.0 * a * fxz(i, j) + b * fz(i, j);
      }
    rows_forward(F);
    return F;
  };

  auto solve = [&](const RowMat& F) {
    RowMat out(M, n);
    const auto fv = real_view(F);
    auto ov = real_view(out);
    Eigen::MatrixXd rhs(M, 2);
    for (std::size_t m = 0; m < n; ++m) {
      rhs = fv.middleCols(2 * m, 2);
      rhs.row(0).setZero();
      if (!op->infinite) {
        rhs.row(N).setZero();
      } else if (absm[m] == 0) {
        rhs.row(N) = op->bottom_d * fv.middleCols(2 * m, 2);
      }
      ov.middleCols(2 * m, 2).noalias() = op->inv[absm[m]] * rhs;
    }
    return out;
  };

  StripSolution res;
  RowMat pc = RowMat::Zero(M, n);
  const double scale = std::max(psi_scale, 1e-300);
  int it = 0;
  bool converged = psi_scale == 0.0;
  while (!converged) {
    if (it >= opt.max_iter)
      throw SolverDivergence("elliptic iteration did not converge", res.update_history);
    const RowMat target = solve(source(pc));
    const double upd = (target - pc).norm() / std::sqrt(static_cast<double>(M)) / scale;
    pc += opt.damping * (target - pc);
    ++it;
    res.update_history.push_back(upd);
    if (!std::isfinite(upd) || upd > 1e6)
      throw SolverDivergence("elliptic iteration diverged", res.update_history);
    if (upd <= opt.tol) converged = true;
  }

  // Residual of P phi = Delta phi_c - F(phi) on interior layers.
  {
    const RowMat F = source(pc);
    RowMat r = apply_real(op->lap, pc);
    for (int i = 0; i < M; ++i)
      for (std::size_t m = 0; m < n; ++m) r(i, m) -= kabs[m] * kabs[m] * pc(i, m) + F(i, m);
    double acc = 0.0;
    for (int i = 1; i < N; ++i)
      for (std::size_t m = 0; m < n; ++m) acc += std::norm(r(i, m));
    res.residual = std::sqrt(acc / std::max(1, N - 1)) / scale;
  }

  // G = (1 + eta'^2) phi_z - eta' psi' at the surface.
  const RowMat dz = apply_real(op->sd.topRows(1), pc);
  cvec phiz(n);
  for (std::size_t m = 0; m < n; ++m) phiz[m] = p0z(0, m) + dz(0, m);
  fft_inverse(phiz.data(), phiz.data(), n);
  const GridFunction dpsi = derivative(state.psi);
  cvec g(n);
  for (std::size_t j = 0; j < n; ++j) {
    const double a = e1[j].real();
    g[j] = (1.0 + a * a) * phiz[j] - a * dpsi[j];
  }

  RowMat phi = p0 + pc;
  rows_inverse(phi);
  res.n_points = n;
  res.n_layers = static_cast<std::size_t>(M);
  res.depth = depth;
  res.z.resize(M);
  for (int i = 0; i < M; ++i)
    res.z[i] = op->s(i) > 0.0 ? std::log(op->s(i)) / kappa : -std::numeric_limits<double>::infinity();
  res.z[0] = 0.0;
  res.phi.assign(phi.data(), phi.data() + phi.size());
  res.iterations_used = it;
  res.g = GridFunction(length, std::move(g));
  return res;
}

GridFunction dno_elliptic(const SurfaceState& state, const DnoOptions& opt) {
  return solve_strip(state, opt).g;
}

GridFunction dno_elliptic(const SurfaceState& state, double depth, double tol, int max_iter) {
  DnoOptions opt;
  opt.depth = depth;
  opt.tol = tol;
  opt.max_iter = max_iter;
  return dno_elliptic(state, opt);
}

GridFunction dno_quadratic(const SurfaceState& state) {
  const auto absd = symbols::abs_pow(1.0);
  const GridFunction dpsi = apply_multiplier(state.psi, absd);
  GridFunction out = dpsi;
  out -= apply_multiplier(product(state.eta, dpsi), absd);
  out -= derivative(product(state.eta, derivative(state.psi)));
  return out;
}

std::pair<GridFunction, GridFunction> traces_BV(const SurfaceState& state, const GridFunction& g) {
  const GridFunction e1 = derivative(state.eta);
  const GridFunction p1 = derivative(state.psi);
  const std::size_t n = g.size();
  cvec b(n), v(n);
  for (std::size_t j = 0; j < n; ++j) {
    const cplx a = e1[j];
    b[j] = (g[j] + a * p1[j]) / (1.0 + a * a);
    v[j] = p1[j] - b[j] * a;
  }
  return {GridFunction(g.length(), std::move(b)), GridFunction(g.length(), std::move(v))};
}

GridFunction good_unknown(const SurfaceState& state, const GridFunction& B) {
  return state.psi - paraproduct(B, state.eta);
}

}  // namespace ripple
