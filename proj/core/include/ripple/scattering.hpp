#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "ripple/evolution.hpp"
#include "ripple/fit.hpp"
#include "ripple/normalform.hpp"

namespace ripple {

enum class ExperimentModel { full, cubic, linear, reduced_ode };

std::string to_string(ExperimentModel m);
ExperimentModel experiment_model_from_string(const std::string& s);

struct DataSpec {
  std::string shape = "wavepacket";  // wavepacket | bump
  double width = 2.0;
  double xi0 = 2.0;
  double center = 0.0;
};

struct AnalysisSpec {
  bool decay = false;
  bool ray_phase = false;
  bool log_phase = false;
  bool conservation = false;
  bool z_diagnostics = false;
  bool harmonics = false;
  bool normal_form = false;
};

struct ExperimentConfig {
  ExperimentModel model = ExperimentModel::cubic;
  std::size_t n_points = 4096;
  double domain_length = 2048.0;
  double epsilon = 0.05;
  DataSpec data;
  double t0 = 1.0;
  double t_end = 500.0;
  double dt = 0.25;
  int save_every = 8;
  Scheme scheme = Scheme::if_rk4;
  AnalysisSpec analysis;
  // Rays; empty selects 16 values with |X| in [0.3, 3] on the side the data propagates to.
  std::vector<double> x_list;
  double fit_t_min = 10.0;
  // Rays whose plateau |alpha| is below core_fraction * max are excluded from ratio and drift checks.
  double core_fraction = 0.6;
  double decay_tolerance = 0.02;
  double phase_drift_tolerance = 0.1;
  double log_phase_tolerance = 0.25;
  double plateau_tolerance = 0.1;
  double conservation_tolerance = 1e-6;
  double z_growth_tolerance = 0.1;
  double e0_band = 2.0;
  double harmonic_tolerance = 0.25;
  double harmonic_t_min = 200.0;
  double harmonic_t_max = 500.0;
  double nf_slope_min = 1.25;
  double sobolev_s = 2.0;
  double holder_rho = 0.5;
  double chi_radius = 0.25;
  double wrap_tolerance = 0.0;
  std::uint64_t seed = 0;
  std::string output_dir;
  // One CSV per saved time plus manifest.json under output_dir/snapshots.
  bool store_snapshots = false;
};

// Strict JSON parsing (unknown keys are errors) followed by validate().
ExperimentConfig parse_config(const std::string& json_text);
ExperimentConfig load_config(const std::string& path);
std::string config_to_json(const ExperimentConfig& c);
void validate(const ExperimentConfig& c);

// v(t) = sqrt(t) u(t, t X) / epsilon along one ray.
struct RaySamples {
  double x = 0.0;
  std::vector<double> t;
  std::vector<cplx> v;
};

std::vector<RaySamples> sample_rays(const Trajectory& traj, const std::vector<double>& x_list, double t_min);
// Reduced-flow trajectories already hold the profile; v = f / epsilon.
std::vector<RaySamples> sample_rays(const ProfileTrajectory& traj, double epsilon, double t_min);

struct RayFit {
  double x = 0.0;
  cplx alpha = 0.0;               // plateau modulus with the fitted constant phase
  double plateau_deviation = 0.0;  // max |(|v| - |alpha|)| / |alpha| over the last decade
  double log_coefficient = 0.0;    // b in arg v - t/(4|X|) = a + b log t + c / t
  double log_coefficient_ci = 0.0;
  double inverse_t_coefficient = 0.0;
  double predicted = 0.0;          // eps^2 |alpha|^2 / (64 |X|^5)
  double ratio = 0.0;
  bool core = false;
};

struct ScatteringFit {
  double decay_exponent = 0.0;
  double decay_ci = 0.0;
  std::vector<RayFit> rays;
  double aggregate_ratio = 0.0;   // sum of fitted over sum of predicted coefficients on core rays
  double residual_kappa = 0.0;
};

// Needs t_end / t_begin >= 30 on every ray.
RayFit fit_ray(const RaySamples& ray, double epsilon);
ScatteringFit fit_log_phase(const std::vector<RaySamples>& rays, double epsilon, double core_fraction = 0.6);

struct Check {
  std::string name;
  std::string metric;
  double value = 0.0;
  double tolerance = 0.0;
  bool pass = false;
};

Check check_at_most(std::string name, std::string metric, double value, double tolerance);
Check check_at_least(std::string name, std::string metric, double value, double tolerance);

// {"checks": [{check_name, metric, value, tolerance, pass}...], "pass": bool} with stable key order.
std::string report_json(const std::vector<Check>& checks);
std::vector<Check> parse_report(const std::string& json_text);
// Writes report.json and rays.csv into dir.
void emit_report(const std::string& dir, const std::vector<Check>& checks, const ScatteringFit& fit);

struct ExperimentResult {
  std::vector<Check> checks;
  ScatteringFit fit;
  bool pass = true;
};

// Runs the configured model and analyses; writes artifacts when output_dir is set. Errors name the failing stage.
ExperimentResult run_experiment(const ExperimentConfig& cfg);

}  // namespace ripple
