#include "ripple/scattering.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <numeric>
#include <set>
#include <sstream>
#include <stdexcept>

#include <Eigen/Dense>
#include <boost/math/distributions/students_t.hpp>

#include "json.hpp"
#include "ripple/fourier.hpp"
#include "ripple/io.hpp"
#include "ripple/semiclassical.hpp"

namespace ripple {

using nlohmann::ordered_json;

std::string to_string(ExperimentModel m) {
  switch (m) {
    case ExperimentModel::full: return "full";
    case ExperimentModel::cubic: return "cubic";
    case ExperimentModel::linear: return "linear";
    case ExperimentModel::reduced_ode: return "reduced_ode";
  }
  return "cubic";
}

ExperimentModel experiment_model_from_string(const std::string& s) {
  if (s == "full") return ExperimentModel::full;
  if (s == "cubic") return ExperimentModel::cubic;
  if (s == "linear") return ExperimentModel::linear;
  if (s == "reduced_ode") return ExperimentModel::reduced_ode;
  throw std::invalid_argument("unknown model '" + s + "'");
}

namespace {

void require_keys(const ordered_json& j, const std::string& where, std::initializer_list<const char*> allowed) {
  if (!j.is_object()) throw std::invalid_argument(where + " must be an object");
  const std::set<std::string> ok(allowed.begin(), allowed.end());
  for (const auto& [k, v] : j.items())
    if (!ok.count(k)) throw std::invalid_argument("unknown key '" + k + "' in " + where);
}

template <class T>
void get(const ordered_json& j, const char* key, T& out) {
  if (j.contains(key)) out = j.at(key).get<T>();
}

ordered_json sub(const ordered_json& j, const char* key) {
  return j.contains(key) ? j.at(key) : ordered_json::object();
}

}  // namespace

ExperimentConfig parse_config(const std::string& json_text) {
  ordered_json j;
  try {
    j = ordered_json::parse(json_text);
  } catch (const std::exception& e) {
    throw std::invalid_argument(std::string("config is not valid JSON: ") + e.what());
  }
  require_keys(j, "config", {"model", "grid", "data", "time", "analysis", "tolerances", "parameters", "seed",
                             "output_dir", "store_snapshots"});
  ExperimentConfig c;
  try {
    if (j.contains("model")) c.model = experiment_model_from_string(j.at("model").get<std::string>());
    const ordered_json g = sub(j, "grid");
    require_keys(g, "grid", {"n_points", "domain_length"});
    get(g, "n_points", c.n_points);
    get(g, "domain_length", c.domain_length);
    const ordered_json d = sub(j, "data");
    require_keys(d, "data", {"epsilon", "shape", "width", "xi0", "center"});
    get(d, "epsilon", c.epsilon);
    get(d, "shape", c.data.shape);
    get(d, "width", c.data.width);
    get(d, "xi0", c.data.xi0);
    get(d, "center", c.data.center);
    const ordered_json t = sub(j, "time");
    require_keys(t, "time", {"t0", "t_end", "dt", "save_every", "scheme"});
    get(t, "t0", c.t0);
    get(t, "t_end", c.t_end);
    get(t, "dt", c.dt);
    get(t, "save_every", c.save_every);
    if (t.contains("scheme")) {
      const std::string s = t.at("scheme").get<std::string>();
      if (s == "rk4") c.scheme = Scheme::rk4;
      else if (s == "if_rk4") c.scheme = Scheme::if_rk4;
      else throw std::invalid_argument("unknown scheme '" + s + "'");
    }
    const ordered_json a = sub(j, "analysis");
    require_keys(a, "analysis", {"decay", "ray_phase", "log_phase", "conservation", "z_diagnostics", "harmonics",
                                 "normal_form", "x_list", "fit_t_min", "core_fraction"});
    get(a, "decay", c.analysis.decay);
    get(a, "ray_phase", c.analysis.ray_phase);
    get(a, "log_phase", c.analysis.log_phase);
    get(a, "conservation", c.analysis.conservation);
    get(a, "z_diagnostics", c.analysis.z_diagnostics);
    get(a, "harmonics", c.analysis.harmonics);
    get(a, "normal_form", c.analysis.normal_form);
    get(a, "x_list", c.x_list);
    get(a, "fit_t_min", c.fit_t_min);
    get(a, "core_fraction", c.core_fraction);
    const ordered_json tol = sub(j, "tolerances");
    require_keys(tol, "tolerances", {"decay", "phase_drift", "log_phase", "plateau", "conservation", "z_growth",
                                     "e0_band", "harmonic", "harmonic_t_min", "harmonic_t_max", "nf_slope_min"});
    get(tol, "decay", c.decay_tolerance);
    get(tol, "phase_drift", c.phase_drift_tolerance);
    get(tol, "log_phase", c.log_phase_tolerance);
    get(tol, "plateau", c.plateau_tolerance);
    get(tol, "conservation", c.conservation_tolerance);
    get(tol, "z_growth", c.z_growth_tolerance);
    get(tol, "e0_band", c.e0_band);
    get(tol, "harmonic", c.harmonic_tolerance);
    get(tol, "harmonic_t_min", c.harmonic_t_min);
    get(tol, "harmonic_t_max", c.harmonic_t_max);
    get(tol, "nf_slope_min", c.nf_slope_min);
    const ordered_json p = sub(j, "parameters");
    require_keys(p, "parameters", {"sobolev_s", "holder_rho", "chi_radius", "wrap_tolerance"});
    get(p, "sobolev_s", c.sobolev_s);
    get(p, "holder_rho", c.holder_rho);
    get(p, "chi_radius", c.chi_radius);
    get(p, "wrap_tolerance", c.wrap_tolerance);
    get(j, "seed", c.seed);
    get(j, "output_dir", c.output_dir);
    get(j, "store_snapshots", c.store_snapshots);
  } catch (const nlohmann::json::exception& e) {
    throw std::invalid_argument(std::string("config field has the wrong type: ") + e.what());
  }
  validate(c);
  return c;
}

ExperimentConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_config(ss.str());
}

std::string config_to_json(const ExperimentConfig& c) {
  ordered_json j;
  j["model"] = to_string(c.model);
  j["grid"] = {{"n_points", c.n_points}, {"domain_length", c.domain_length}};
  j["data"] = {{"epsilon", c.epsilon},
               {"shape", c.data.shape},
               {"width", c.data.width},
               {"xi0", c.data.xi0},
               {"center", c.data.center}};
  j["time"] = {{"t0", c.t0},
               {"t_end", c.t_end},
               {"dt", c.dt},
               {"save_every", c.save_every},
               {"scheme", to_string(c.scheme)}};
  j["analysis"] = {{"decay", c.analysis.decay},
                   {"ray_phase", c.analysis.ray_phase},
                   {"log_phase", c.analysis.log_phase},
                   {"conservation", c.analysis.conservation},
                   {"z_diagnostics", c.analysis.z_diagnostics},
                   {"harmonics", c.analysis.harmonics},
                   {"normal_form", c.analysis.normal_form},
                   {"x_list", c.x_list},
                   {"fit_t_min", c.fit_t_min},
                   {"core_fraction", c.core_fraction}};
  j["tolerances"] = {{"decay", c.decay_tolerance},
                     {"phase_drift", c.phase_drift_tolerance},
                     {"log_phase", c.log_phase_tolerance},
                     {"plateau", c.plateau_tolerance},
                     {"conservation", c.conservation_tolerance},
                     {"z_growth", c.z_growth_tolerance},
                     {"e0_band", c.e0_band},
                     {"harmonic", c.harmonic_tolerance},
                     {"harmonic_t_min", c.harmonic_t_min},
                     {"harmonic_t_max", c.harmonic_t_max},
                     {"nf_slope_min", c.nf_slope_min}};
  j["parameters"] = {{"sobolev_s", c.sobolev_s},
                     {"holder_rho", c.holder_rho},
                     {"chi_radius", c.chi_radius},
                     {"wrap_tolerance", c.wrap_tolerance}};
  j["seed"] = c.seed;
  j["output_dir"] = c.output_dir;
  j["store_snapshots"] = c.store_snapshots;
  return j.dump(2);
}

void validate(const ExperimentConfig& c) {
  auto fail = [](const std::string& m) { throw std::invalid_argument("invalid config: " + m); };
  const bool profile = c.model == ExperimentModel::reduced_ode;
  if (!profile && !is_power_of_two(c.n_points)) fail("grid.n_points must be a power of two");
  if (profile && c.x_list.empty() && c.n_points < 2) fail("grid.n_points must be at least 2");
  if (!(c.domain_length > 0.0)) fail("grid.domain_length must be positive");
  if (!(c.epsilon >= 0.0) || !std::isfinite(c.epsilon)) fail("data.epsilon must be finite and nonnegative");
  if (c.data.shape != "wavepacket" && c.data.shape != "bump") fail("data.shape must be wavepacket or bump");
  if (!(c.data.width > 0.0)) fail("data.width must be positive");
  if (!(c.t0 > 0.0)) fail("time.t0 must be positive");
  if (!(c.t_end > c.t0)) fail("time.t_end must exceed time.t0");
  if (!(c.dt > 0.0) || c.dt > c.t_end - c.t0) fail("time.dt must lie in (0, t_end - t0]");
  if (c.save_every < 1) fail("time.save_every must be at least 1");
  if (!(c.fit_t_min > 0.0)) fail("analysis.fit_t_min must be positive");
  if (!(c.core_fraction >= 0.0 && c.core_fraction <= 1.0)) fail("analysis.core_fraction must lie in [0, 1]");
  for (double x : c.x_list)
    if (!(std::abs(x) > 0.0) || !std::isfinite(x)) fail("analysis.x_list entries must be finite and nonzero");
  if ((c.analysis.log_phase || c.analysis.ray_phase) && c.t_end / std::max(c.t0, c.fit_t_min) < 30.0)
    fail("phase fits need t_end / max(t0, fit_t_min) >= 30");
  if (c.analysis.conservation && c.model == ExperimentModel::cubic)
    fail("the cubic model has no conservation check");
  if (c.analysis.z_diagnostics && (c.model == ExperimentModel::linear || profile))
    fail("z diagnostics need the full or cubic model");
  if (c.analysis.harmonics && c.model != ExperimentModel::cubic) fail("harmonics need the cubic model");
  if (c.analysis.normal_form && !profile) fail("normal_form analysis needs the reduced_ode model");
  if (c.analysis.decay && profile) fail("decay needs a PDE model");
  if (c.analysis.harmonics && !(c.harmonic_t_max > c.harmonic_t_min)) fail("empty harmonic window");
  if (!(c.chi_radius > 0.0)) fail("parameters.chi_radius must be positive");
  for (double v : {c.decay_tolerance, c.phase_drift_tolerance, c.log_phase_tolerance, c.plateau_tolerance,
                   c.conservation_tolerance, c.z_growth_tolerance, c.harmonic_tolerance})
    if (!(v >= 0.0)) fail("tolerances must be nonnegative");
  if (!(c.e0_band >= 1.0)) fail("tolerances.e0_band must be at least 1");
}

std::vector<RaySamples> sample_rays(const Trajectory& traj, const std::vector<double>& x_list, double t_min) {
  if (traj.size() == 0) throw std::invalid_argument("empty trajectory");
  const double scale = traj.epsilon > 0.0 ? 1.0 / traj.epsilon : 1.0;
  std::vector<RaySamples> rays(x_list.size());
  for (std::size_t r = 0; r < rays.size(); ++r) rays[r].x = x_list[r];
  for (std::size_t i = 0; i < traj.size(); ++i) {
    const double t = traj.times[i];
    if (t < t_min) continue;
    const GridFunction u = traj.u(i);
    const double half = 0.5 * u.length();
    for (auto& ray : rays) {
      const double x = t * ray.x;
      if (std::abs(x) >= half) continue;
      ray.t.push_back(t);
      ray.v.push_back(std::sqrt(t) * scale * u.eval(x));
    }
  }
  return rays;
}

std::vector<RaySamples> sample_rays(const ProfileTrajectory& traj, double epsilon, double t_min) {
  if (traj.size() == 0) throw std::invalid_argument("empty trajectory");
  const double scale = epsilon > 0.0 ? 1.0 / epsilon : 1.0;
  const std::size_t m = traj.f.front().size();
  std::vector<RaySamples> rays(m);
  for (std::size_t q = 0; q < m; ++q) rays[q].x = traj.f.front().x[q];
  for (std::size_t i = 0; i < traj.size(); ++i) {
    if (traj.t[i] < t_min) continue;
    for (std::size_t q = 0; q < m; ++q) {
      rays[q].t.push_back(traj.t[i]);
      rays[q].v.push_back(scale * traj.f[i].values[q]);
    }
  }
  return rays;
}

namespace {

// |alpha| as the mean modulus over the last decade, with the max relative deviation.
std::pair<double, double> plateau(const RaySamples& ray) {
  const double t_last = ray.t.back();
  double sum = 0.0;
  std::size_t n = 0;
  for (std::size_t k = 0; k < ray.t.size(); ++k)
    if (ray.t[k] >= 0.1 * t_last) {
      sum += std::abs(ray.v[k]);
      ++n;
    }
  const double mean = sum / static_cast<double>(n);
  if (!(mean > 0.0) || !std::isfinite(mean)) return {mean, 0.0};
  double dev = 0.0;
  for (std::size_t k = 0; k < ray.t.size(); ++k)
    if (ray.t[k] >= 0.1 * t_last) dev = std::max(dev, std::abs(std::abs(ray.v[k]) - mean) / mean);
  return {mean, dev};
}

}  // namespace

RayFit fit_ray(const RaySamples& ray, double epsilon) {
  const std::size_t n = ray.t.size();
  if (n < 4) throw std::invalid_argument("ray X=" + std::to_string(ray.x) + " has fewer than 4 samples");
  if (ray.t.back() / ray.t.front() < 30.0)
    throw std::invalid_argument("ray X=" + std::to_string(ray.x) + " spans t_end / t_begin < 30");
  RayFit f;
  f.x = ray.x;
  const auto [mod, dev] = plateau(ray);
  if (!(mod > 0.0) || !std::isfinite(mod))
    throw std::runtime_error("no plateau detected on ray X=" + std::to_string(ray.x));
  f.plateau_deviation = dev;

  const double ax = std::abs(ray.x);
  std::vector<double> raw(n);
  for (std::size_t k = 0; k < n; ++k)
    raw[k] = std::arg(ray.v[k] * std::polar(1.0, -std::remainder(ray.t[k] / (4.0 * ax), 2.0 * M_PI)));
  const std::vector<double> phase = unwrap_phase(raw);
  for (std::size_t k = 1; k < n; ++k)
    if (std::abs(phase[k] - phase[k - 1]) > 1.0)
      throw std::runtime_error("phase-unwrap failure on ray X=" + std::to_string(ray.x) + " near t=" +
                               std::to_string(ray.t[k]));

  // phase = a + b log t + c / t
  Eigen::MatrixXd A(n, 3);
  Eigen::VectorXd y(n);
  for (std::size_t k = 0; k < n; ++k) {
    A(k, 0) = 1.0;
    A(k, 1) = std::log(ray.t[k]);
    A(k, 2) = 1.0 / ray.t[k];
    y(k) = phase[k];
  }
  const Eigen::Matrix3d G = A.transpose() * A;
  const Eigen::Vector3d coef = G.ldlt().solve(A.transpose() * y);
  f.log_coefficient = coef(1);
  f.inverse_t_coefficient = coef(2);
  if (n > 3) {
    const double sse = (y - A * coef).squaredNorm();
    const double var = sse / static_cast<double>(n - 3);
    const double se = std::sqrt(std::max(0.0, var * G.inverse()(1, 1)));
    const boost::math::students_t dist(static_cast<double>(n - 3));
    f.log_coefficient_ci = boost::math::quantile(dist, 0.975) * se;
  }
  f.alpha = std::polar(mod, coef(0));
  f.predicted = epsilon * epsilon * mod * mod / (64.0 * std::pow(ax, 5));
  f.ratio = f.predicted > 0.0 ? f.log_coefficient / f.predicted : 0.0;
  return f;
}

ScatteringFit fit_log_phase(const std::vector<RaySamples>& rays, double epsilon, double core_fraction) {
  if (rays.empty()) throw std::invalid_argument("fit_log_phase needs at least one ray");
  ScatteringFit out;
  double peak = 0.0;
  std::vector<double> mods(rays.size(), 0.0);
  for (std::size_t r = 0; r < rays.size(); ++r) {
    if (rays[r].t.empty()) continue;
    mods[r] = plateau(rays[r]).first;
    if (std::isfinite(mods[r])) peak = std::max(peak, mods[r]);
  }
  if (!(peak > 0.0)) throw std::runtime_error("no plateau detected on any ray");
  double sum_fit = 0.0, sum_pred = 0.0;
  for (std::size_t r = 0; r < rays.size(); ++r) {
    const bool core = mods[r] >= core_fraction * peak;
    RayFit f;
    if (core) {
      f = fit_ray(rays[r], epsilon);
    } else {
      try {
        f = fit_ray(rays[r], epsilon);
      } catch (const std::exception&) {
        f.x = rays[r].x;
        f.log_coefficient = f.ratio = std::nan("");
      }
    }
    f.core = core;
    if (core) {
      sum_fit += f.log_coefficient;
      sum_pred += f.predicted;
    }
    out.rays.push_back(f);
  }
  out.aggregate_ratio = sum_pred > 0.0 ? sum_fit / sum_pred : 0.0;
  return out;
}

Check check_at_most(std::string name, std::string metric, double value, double tolerance) {
  return {std::move(name), std::move(metric), value, tolerance, value <= tolerance};
}

Check check_at_least(std::string name, std::string metric, double value, double tolerance) {
  return {std::move(name), std::move(metric), value, tolerance, value >= tolerance};
}

std::string report_json(const std::vector<Check>& checks) {
  ordered_json j;
  j["checks"] = ordered_json::array();
  bool pass = true;
  for (const Check& c : checks) {
    ordered_json e;
    e["check_name"] = c.name;
    e["metric"] = c.metric;
    e["value"] = std::isfinite(c.value) ? ordered_json(c.value) : ordered_json(nullptr);
    e["tolerance"] = c.tolerance;
    e["pass"] = c.pass;
    j["checks"].push_back(e);
    pass = pass && c.pass;
  }
  j["pass"] = pass;
  return j.dump(2) + "\n";
}

std::vector<Check> parse_report(const std::string& json_text) {
  const ordered_json j = ordered_json::parse(json_text);
  std::vector<Check> out;
  for (const auto& e : j.at("checks")) {
    Check c;
    c.name = e.at("check_name").get<std::string>();
    c.metric = e.at("metric").get<std::string>();
    c.value = e.at("value").is_null() ? std::nan("") : e.at("value").get<double>();
    c.tolerance = e.at("tolerance").get<double>();
    c.pass = e.at("pass").get<bool>();
    out.push_back(c);
  }
  return out;
}

namespace {

std::ofstream open_out(const std::filesystem::path& p) {
  std::ofstream out(p);
  if (!out) throw std::runtime_error("cannot write " + p.string());
  out.precision(17);
  return out;
}

}  // namespace

void emit_report(const std::string& dir, const std::vector<Check>& checks, const ScatteringFit& fit) {
  std::filesystem::create_directories(dir);
  open_out(std::filesystem::path(dir) / "report.json") << report_json(checks);
  auto out = open_out(std::filesystem::path(dir) / "rays.csv");
  out << "X,alpha_abs,alpha_arg,log_coefficient,log_coefficient_ci,inverse_t_coefficient,predicted,ratio,"
         "plateau_deviation,core\n";
  for (const RayFit& r : fit.rays)
    out << r.x << ',' << std::abs(r.alpha) << ',' << std::arg(r.alpha) << ',' << r.log_coefficient << ','
        << r.log_coefficient_ci << ',' << r.inverse_t_coefficient << ',' << r.predicted << ',' << r.ratio << ','
        << r.plateau_deviation << ',' << (r.core ? 1 : 0) << '\n';
}

namespace {

double smooth_bump(double x, double a, double b) {
  if (x <= a || x >= b) return 0.0;
  const double s = (x - a) / (b - a);
  return std::exp(1.0 - 1.0 / (4.0 * s * (1.0 - s)));
}

std::vector<double> default_rays(const ExperimentConfig& c) {
  if (!c.x_list.empty()) return c.x_list;
  // Positive frequencies travel to X < 0.
  const double side = (c.data.shape == "wavepacket" && c.data.xi0 < 0.0) ? 1.0 : -1.0;
  std::vector<double> xs(16);
  for (std::size_t k = 0; k < xs.size(); ++k)
    xs[k] = side * 0.3 * std::pow(10.0, static_cast<double>(k) / 15.0);
  return xs;
}

GridFunction initial_complex(const ExperimentConfig& c) {
  if (c.data.shape == "bump")
    return to_complex(bump_data(c.n_points, c.domain_length, c.epsilon, c.data.width, c.data.center));
  return wavepacket_data(c.n_points, c.domain_length, c.epsilon, c.data.width, c.data.xi0, c.data.center);
}

Trajectory build_pde(const ExperimentConfig& c) {
  StepOptions opt;
  opt.save_every = c.save_every;
  opt.wrap_tolerance = c.wrap_tolerance;
  if (c.model == ExperimentModel::linear) {
    const GridFunction u0 = initial_complex(c);
    Trajectory tr = make_cubic_trajectory(c.t0, u0, c.epsilon);
    const double stride = c.dt * c.save_every;
    const auto steps = static_cast<std::size_t>(std::floor((c.t_end - c.t0) / stride + 1e-9));
    for (std::size_t k = 1; k <= steps; ++k) {
      const double t = c.t0 + stride * static_cast<double>(k);
      tr.times.push_back(t);
      tr.cubic.push_back(apply_multiplier(u0, symbols::half_wave(t - c.t0)));
    }
    return tr;
  }
  if (c.model == ExperimentModel::cubic)
    return step_integrate(make_cubic_trajectory(c.t0, initial_complex(c), c.epsilon), c.t_end, c.dt, c.scheme, opt);
  const SurfaceState s0 = c.data.shape == "bump"
                              ? bump_data(c.n_points, c.domain_length, c.epsilon, c.data.width, c.data.center)
                              : from_complex(initial_complex(c));
  return step_integrate(make_full_trajectory(c.t0, s0, c.epsilon), c.t_end, c.dt, Scheme::rk4, opt);
}

NormalFormParams profile_params(const ExperimentConfig& c) {
  NormalFormParams p;
  p.chi_radius = c.chi_radius;
  p.t0 = c.t0;
  return p;
}

ProfileField initial_profile(const ExperimentConfig& c, double eps) {
  std::vector<double> xs = c.x_list;
  if (xs.empty()) xs = punctured_grid(c.n_points, 0.5 * c.domain_length, 0.05);
  const DataSpec d = c.data;
  return make_profile_field(xs, c.t0, 0, [&](double X) -> cplx {
    const double a = std::abs(X);
    if (d.shape == "bump") return eps * smooth_bump(a, d.center - d.width, d.center + d.width) * cplx(1.0, 0.5);
    const double s = (a - d.center) / d.width;
    return eps * std::exp(-0.5 * s * s) * std::polar(1.0, d.xi0 * X);
  });
}

// Time after which the cutoff at X is saturated.
double saturation_time(double X, const NormalFormParams& p) {
  return std::pow(2.0 * p.chi_radius / std::abs(X), 1.0 / p.beta);
}

template <class F>
auto stage(const char* name, F&& f) -> decltype(f()) {
  try {
    return f();
  } catch (const std::exception& e) {
    throw std::runtime_error(std::string("stage ") + name + ": " + e.what());
  }
}

void write_ray_samples(const std::filesystem::path& p, const std::vector<RaySamples>& rays) {
  auto out = open_out(p);
  out << "X,t,re,im\n";
  for (const RaySamples& r : rays)
    for (std::size_t k = 0; k < r.t.size(); ++k)
      out << r.x << ',' << r.t[k] << ',' << r.v[k].real() << ',' << r.v[k].imag() << '\n';
}

void write_series(const std::filesystem::path& p, const std::string& header, const std::vector<double>& t,
                  const std::vector<std::vector<double>>& cols) {
  auto out = open_out(p);
  out << "t," << header << '\n';
  for (std::size_t k = 0; k < t.size(); ++k) {
    out << t[k];
    for (const auto& col : cols) out << ',' << col[k];
    out << '\n';
  }
}

std::string snapshot_name(const char* stem, std::size_t i) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%s_%05zu.csv", stem, i);
  return buf;
}

void write_manifest(const std::filesystem::path& dir, const ExperimentConfig& c, const std::vector<double>& times,
                    const std::vector<std::string>& files, const std::string& columns) {
  ordered_json m;
  m["model_tag"] = to_string(c.model);
  m["epsilon"] = c.epsilon;
  m["scheme"] = c.model == ExperimentModel::full ? "rk4" : to_string(c.scheme);
  m["dt"] = c.dt;
  m["save_every"] = c.save_every;
  m["grid"] = {{"n_points", c.n_points}, {"domain_length", c.domain_length}};
  m["columns"] = columns;
  m["times"] = times;
  m["files"] = files;
  open_out(dir / "manifest.json") << m.dump(2) << '\n';
}

void store_pde(const std::filesystem::path& dir, const ExperimentConfig& c, const Trajectory& tr) {
  const auto sd = dir / "snapshots";
  std::filesystem::create_directories(sd);
  std::vector<std::string> files;
  for (std::size_t i = 0; i < tr.size(); ++i) {
    files.push_back(snapshot_name("u", i));
    write_grid_csv((sd / files.back()).string(), tr.u(i));
  }
  write_manifest(sd, c, tr.times, files, "x, Re u = |D|^{1/2} psi, Im u = eta");
}

void store_profile(const std::filesystem::path& dir, const ExperimentConfig& c, const ProfileTrajectory& tr) {
  const auto sd = dir / "snapshots";
  std::filesystem::create_directories(sd);
  std::vector<std::string> files;
  for (std::size_t i = 0; i < tr.size(); ++i) {
    files.push_back(snapshot_name("f", i));
    auto out = open_out(sd / files.back());
    out << "X,re,im\n";
    const ProfileField& f = tr.f[i];
    for (std::size_t q = 0; q < f.size(); ++q) out << f.x[q] << ',' << f.values[q].real() << ',' << f.values[q].imag() << '\n';
  }
  write_manifest(sd, c, tr.t, files, "X, Re f, Im f");
}

void pde_checks(const ExperimentConfig& c, ExperimentResult& res, const std::filesystem::path* dir) {
  const Trajectory tr = stage("simulate", [&] { return build_pde(c); });
  const bool zero = c.epsilon == 0.0;
  if (dir && c.store_snapshots) stage("store", [&] { store_pde(*dir, c, tr); });

  std::vector<double> ts, sup;
  for (std::size_t i = 0; i < tr.size(); ++i) {
    ts.push_back(tr.times[i]);
    sup.push_back(tr.u(i).max_abs());
  }
  if (dir) write_series(*dir / "sup_norm.csv", "sup_abs_u", ts, {sup});

  if (c.analysis.decay && !zero) {
    stage("decay", [&] {
      std::vector<double> t, v;
      for (std::size_t k = 0; k < ts.size(); ++k)
        if (ts[k] >= c.fit_t_min) {
          t.push_back(ts[k]);
          v.push_back(sup[k]);
        }
      const PowerLawFit f = fit_power_law(t, v);
      res.fit.decay_exponent = f.exponent;
      res.fit.decay_ci = f.ci;
      res.checks.push_back(check_at_most("decay_exponent", "abs(exponent + 0.5)", std::abs(f.exponent + 0.5),
                                         c.decay_tolerance));
    });
  }

  if ((c.analysis.ray_phase || c.analysis.log_phase) && !zero) {
    stage("log_phase", [&] {
      const std::vector<RaySamples> rays = sample_rays(tr, default_rays(c), c.fit_t_min);
      if (dir) write_ray_samples(*dir / "ray_samples.csv", rays);
      const double fe = res.fit.decay_exponent, fci = res.fit.decay_ci;
      res.fit = fit_log_phase(rays, c.epsilon, c.core_fraction);
      res.fit.decay_exponent = fe;
      res.fit.decay_ci = fci;
      double drift = 0.0, dev = 0.0;
      for (const RayFit& r : res.fit.rays)
        if (r.core) {
          drift = std::max(drift, std::abs(r.log_coefficient) * std::log(10.0));
          dev = std::max(dev, r.plateau_deviation);
        }
      if (c.analysis.ray_phase)
        res.checks.push_back(check_at_most("ray_phase_drift", "max over core rays of rad per decade", drift,
                                           c.phase_drift_tolerance));
      if (c.analysis.log_phase) {
        res.checks.push_back(check_at_most("log_phase_ratio", "abs(aggregate fitted / predicted - 1)",
                                           std::abs(res.fit.aggregate_ratio - 1.0), c.log_phase_tolerance));
        res.checks.push_back(check_at_most("modulus_plateau", "max relative deviation over the last decade", dev,
                                           c.plateau_tolerance));
      }
    });
  }

  if (c.analysis.conservation) {
    stage("conservation", [&] {
      std::vector<double> q;
      std::string name, metric;
      if (c.model == ExperimentModel::full) {
        for (std::size_t i = 0; i < tr.size(); ++i) q.push_back(hamiltonian(tr.full[i]));
        name = "hamiltonian_drift";
      } else {
        for (std::size_t i = 0; i < tr.size(); ++i) q.push_back(tr.u(i).l2());
        name = "l2_drift";
      }
      double drift = 0.0;
      for (double v : q) drift = std::max(drift, std::abs(v - q.front()));
      if (std::abs(q.front()) > 0.0) drift /= std::abs(q.front());
      if (dir) write_series(*dir / "conserved.csv", name == "l2_drift" ? "l2" : "hamiltonian", ts, {q});
      res.checks.push_back(check_at_most(name, "max relative change from t0", drift, c.conservation_tolerance));
    });
  }

  if (c.analysis.z_diagnostics) {
    stage("z_diagnostics", [&] {
      const std::size_t stride = std::max<std::size_t>(1, tr.size() / 100);
      const std::vector<ZFieldRow> rows = z_field_first_order(tr, c.sobolev_s, c.holder_rho, stride);
      const std::vector<EFRow> ef = functionals_EF(tr, 0, 0.5, 0.25, {}, stride);
      std::vector<double> t, m1, zt, m0, m1all;
      for (const ZFieldRow& r : rows) {
        zt.push_back(r.t);
        m0.push_back(r.M[0]);
        m1all.push_back(r.M[1]);
        if (r.t >= c.fit_t_min) {
          t.push_back(r.t);
          m1.push_back(r.M[1]);
        }
      }
      if (dir) write_series(*dir / "z_field.csv", "M0,M1", zt, {m0, m1all});
      const bool flat = std::all_of(m1.begin(), m1.end(), [](double v) { return v == 0.0; });
      const double growth = flat ? 0.0 : fit_power_law(t, m1).exponent;
      res.checks.push_back(
          check_at_most("z_growth_exponent", "fitted exponent of M_s^(1)", growth, c.z_growth_tolerance));
      double lo = INFINITY, hi = 0.0;
      std::vector<double> et, e0;
      for (const EFRow& r : ef) {
        et.push_back(r.t);
        e0.push_back(r.E[0]);
        if (r.t >= c.fit_t_min) {
          lo = std::min(lo, r.E[0]);
          hi = std::max(hi, r.E[0]);
        }
      }
      if (dir) write_series(*dir / "e0.csv", "E0", et, {e0});
      const double band = hi == 0.0 ? 1.0 : hi / lo;
      res.checks.push_back(check_at_most("e0_plateau", "max / min of E_0", band, c.e0_band));
    });
  }

  if (c.analysis.harmonics && !zero) {
    stage("harmonics", [&] {
      double worst = 0.0;
      std::size_t used = 0;
      auto out = dir ? open_out(*dir / "harmonics.csv") : std::ofstream();
      if (dir) out << "t,ratio,predicted_ratio\n";
      for (std::size_t i = 0; i < tr.size(); ++i) {
        if (tr.times[i] < c.harmonic_t_min || tr.times[i] > c.harmonic_t_max) continue;
        const HarmonicReport h = harmonic_extract(tr, i);
        worst = std::max(worst, std::abs(h.ratio / h.predicted_ratio - 1.0));
        ++used;
        if (dir) out << h.t << ',' << h.ratio << ',' << h.predicted_ratio << '\n';
      }
      if (used == 0) throw std::invalid_argument("no snapshot inside the harmonic window");
      res.checks.push_back(
          check_at_most("harmonic_ratio", "max abs(ratio / (1+sqrt2)^2 - 1)", worst, c.harmonic_tolerance));
    });
  }
}

void profile_checks(const ExperimentConfig& c, ExperimentResult& res, const std::filesystem::path* dir) {
  const NormalFormParams p = profile_params(c);
  const ProfileField f0 = initial_profile(c, c.epsilon);
  const ProfileTrajectory tr =
      stage("simulate", [&] { return integrate_reduced(f0, c.t_end, c.dt, p, c.save_every); });
  const bool zero = c.epsilon == 0.0;
  if (dir && c.store_snapshots) stage("store", [&] { store_profile(*dir, c, tr); });

  if (c.analysis.conservation) {
    double drift = 0.0;
    for (const ProfileField& f : tr.f)
      for (std::size_t q = 0; q < f.size(); ++q)
        drift = std::max(drift, std::abs(std::abs(f.values[q]) - std::abs(f0.values[q])));
    const double peak = f0.max_abs();
    if (peak > 0.0) drift /= peak;
    res.checks.push_back(check_at_most("modulus_drift", "max relative change of |f|", drift, c.conservation_tolerance));
  }

  if ((c.analysis.log_phase || c.analysis.ray_phase) && !zero) {
    stage("log_phase", [&] {
      std::vector<RaySamples> rays;
      for (RaySamples& r : sample_rays(tr, c.epsilon, c.fit_t_min))
        if (saturation_time(r.x, p) <= c.fit_t_min) rays.push_back(std::move(r));
      if (rays.empty()) throw std::invalid_argument("no ray has a saturated cutoff after fit_t_min");
      if (dir) write_ray_samples(*dir / "ray_samples.csv", rays);
      res.fit = fit_log_phase(rays, c.epsilon, c.core_fraction);
      double worst = 0.0, dev = 0.0;
      for (const RayFit& r : res.fit.rays)
        if (r.core) {
          worst = std::max(worst, std::abs(r.ratio - 1.0));
          dev = std::max(dev, r.plateau_deviation);
        }
      if (c.analysis.log_phase) {
        res.checks.push_back(
            check_at_most("log_phase_ratio", "max over core rays of abs(ratio - 1)", worst, c.log_phase_tolerance));
        res.checks.push_back(check_at_most("modulus_plateau", "max relative deviation over the last decade", dev,
                                           c.plateau_tolerance));
      }
      // kappa is only meaningful when a remainder moves f e^{-i Theta} off its limit.
      res.fit.residual_kappa = std::nan("");
      if (tr.t.back() / tr.t.front() >= 100.0) {
        const AlphaExtraction ex = extract_alpha(tr, p);
        if (ex.residual_history.front() > 1e-10) res.fit.residual_kappa = ex.kappa_fit;
        if (dir) {
          auto out = open_out(*dir / "alpha.csv");
          out << "X,alpha_abs,alpha_arg,log_coefficient,residual\n";
          for (std::size_t q = 0; q < ex.x.size(); ++q) {
            double b = std::nan("");
            for (const RayFit& r : res.fit.rays)
              if (r.x == ex.x[q]) b = r.log_coefficient;
            out << ex.x[q] << ',' << std::abs(ex.alpha[q]) << ',' << std::arg(ex.alpha[q]) << ',' << b << ','
                << ex.residual << '\n';
          }
        }
      }
    });
  }

  if (c.analysis.normal_form) {
    stage("normal_form", [&] {
      const CoefficientSet coeffs = choose_M_cancelling(CoefficientSet{}, 0, p);
      double quad = 0.0;
      for (double X : f0.x) {
        const double t = 2.0 * std::max(saturation_time(X, p), c.t0) + 100.0;
        const CubicPoly T = transformed_rhs(X, t, 0, coeffs, p);
        const double scale = std::sqrt(1.0 / t) * std::pow(1.0 / (4.0 * X * X), 1.5);
        quad = std::max({quad, std::abs(T(2, 0)) / scale, std::abs(T(1, 1)) / scale, std::abs(T(0, 2)) / scale});
      }
      res.checks.push_back(check_at_most("nf_quadratic_cancellation", "max relative quadratic coefficient", quad,
                                         1e-14));
      if (zero) return;
      const auto run = [&](double eps) {
        return integrate_w(initial_profile(c, eps), c.t_end, c.dt, coeffs, p, c.save_every);
      };
      const CancellationReport a = cancellation_residual(run(c.epsilon), coeffs, p, ResidualMode::algebraic);
      const CancellationReport b = cancellation_residual(run(2.0 * c.epsilon), coeffs, p, ResidualMode::algebraic);
      if (dir) write_series(*dir / "nf_residual.csv", "residual_eps,residual_2eps", a.t, {a.residual, b.residual});
      res.checks.push_back(check_at_least("nf_residual_slope", "min decay exponent at eps and 2 eps",
                                          std::min(a.slope, b.slope), c.nf_slope_min));
    });
  }
}

}  // namespace

ExperimentResult run_experiment(const ExperimentConfig& cfg) {
  stage("config", [&] {
    validate(cfg);
    return 0;
  });
  std::filesystem::path dir;
  const bool write = !cfg.output_dir.empty();
  if (write) {
    dir = cfg.output_dir;
    stage("output", [&] {
      std::filesystem::create_directories(dir);
      open_out(dir / "config.json") << config_to_json(cfg) << '\n';
      return 0;
    });
  }
  ExperimentResult res;
  if (cfg.model == ExperimentModel::reduced_ode)
    profile_checks(cfg, res, write ? &dir : nullptr);
  else
    pde_checks(cfg, res, write ? &dir : nullptr);
  res.pass = std::all_of(res.checks.begin(), res.checks.end(), [](const Check& c) { return c.pass; });
  if (write) stage("report", [&] {
    emit_report(dir.string(), res.checks, res.fit);
    return 0;
  });
  return res;
}

}  // namespace ripple
