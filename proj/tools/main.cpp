#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <set>
#include <sstream>
#include <string>

#include <omp.h>

#include "CLI11.hpp"
#include "json.hpp"
#include "ripple/checks.hpp"
#include "ripple/scattering.hpp"

using namespace ripple;
using nlohmann::json;

namespace {

constexpr int kExitPass = 0;
constexpr int kExitFail = 1;
constexpr int kExitUsage = 2;
constexpr int kExitError = 3;

std::string slurp(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::invalid_argument("cannot open " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

// Optional parameter file for the operator-level suites; unknown keys are errors.
json suite_params(const std::string& path, std::initializer_list<const char*> allowed) {
  if (path.empty()) return json::object();
  const json j = json::parse(slurp(path));
  if (!j.is_object()) throw std::invalid_argument("parameter file must hold a JSON object");
  const std::set<std::string> ok(allowed.begin(), allowed.end());
  for (const auto& [k, v] : j.items())
    if (!ok.count(k)) throw std::invalid_argument("unknown key '" + k + "' in " + path);
  return j;
}

template <class T>
void get(const json& j, const char* key, T& out) {
  if (j.contains(key)) out = j.at(key).get<T>();
}

int finish(const std::vector<Check>& checks, const ScatteringFit& fit, const std::string& out) {
  if (!out.empty()) emit_report(out, checks, fit);
  bool pass = true;
  for (const Check& c : checks) {
    std::cout << (c.pass ? "PASS " : "FAIL ") << c.name << "  " << c.metric << " = " << c.value
              << "  (tolerance " << c.tolerance << ")\n";
    pass = pass && c.pass;
  }
  return pass ? kExitPass : kExitFail;
}

int experiment(const std::string& config, const std::string& out, const std::function<void(ExperimentConfig&)>& adjust) {
  ExperimentConfig c = parse_config(slurp(config));
  if (!out.empty()) c.output_dir = out;
  adjust(c);
  validate(c);
  const ExperimentResult r = run_experiment(c);
  return finish(r.checks, r.fit, "");
}

void apply_thread_override() {
  if (const char* v = std::getenv("RIPPLE_THREADS")) {
    const int n = std::atoi(v);
    if (n < 1) throw std::invalid_argument("RIPPLE_THREADS must be a positive integer");
    omp_set_num_threads(n);
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"ripple: deep-water gravity wave experiments"};
  app.require_subcommand(1);
  std::string config, out;
  auto add = [&](const char* name, const char* help, bool config_required) {
    CLI::App* s = app.add_subcommand(name, help);
    auto* opt = s->add_option("--config", config, "JSON configuration file");
    if (config_required) opt->required()->check(CLI::ExistingFile);
    else opt->check(CLI::ExistingFile);
    s->add_option("--out", out, "output directory");
    return s;
  };
  CLI::App* simulate = add("simulate", "integrate a model and store snapshots", true);
  CLI::App* scatter = add("scatter-fit", "decay and logarithmic phase fits along rays", true);
  CLI::App* nf = add("nf-check", "normal-form cancellation and reduced-flow phase", true);
  CLI::App* ode = add("ode-run", "reduced-flow integration with alpha extraction", true);
  CLI::App* harm = add("harmonics", "second-harmonic magnitude ratio on a cubic-model run", true);
  CLI::App* dno = add("dno-verify", "Dirichlet-Neumann operator checks", false);
  CLI::App* sym = add("symbol-check", "composition residual slopes", false);
  CLI::App* cls = add("class-check", "Lagrangian class defect slopes", false);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? kExitPass : kExitUsage;
  }

  try {
    apply_thread_override();
    if (simulate->parsed())
      return experiment(config, out, [](ExperimentConfig& c) {
        if (c.output_dir.empty()) throw std::invalid_argument("simulate needs --out or output_dir");
        c.store_snapshots = true;
      });
    if (scatter->parsed())
      return experiment(config, out, [](ExperimentConfig& c) {
        if (!c.analysis.decay && !c.analysis.ray_phase && !c.analysis.log_phase) c.analysis.log_phase = true;
      });
    if (nf->parsed())
      return experiment(config, out, [](ExperimentConfig& c) {
        if (c.model != ExperimentModel::reduced_ode) throw std::invalid_argument("nf-check needs model reduced_ode");
        c.analysis.normal_form = true;
      });
    if (ode->parsed())
      return experiment(config, out, [](ExperimentConfig& c) {
        if (c.model != ExperimentModel::reduced_ode) throw std::invalid_argument("ode-run needs model reduced_ode");
        c.analysis.log_phase = true;
      });
    if (harm->parsed())
      return experiment(config, out, [](ExperimentConfig& c) { c.analysis.harmonics = true; });
    if (dno->parsed()) {
      const json j = suite_params(config, {"flat_samples", "flat_points", "flat_max_mode", "flat_tolerance",
                                           "manufactured_points", "manufactured_tolerance", "slope_tolerance", "seed"});
      DnoCheckParams p;
      get(j, "flat_samples", p.flat_samples);
      get(j, "flat_points", p.flat_points);
      get(j, "flat_max_mode", p.flat_max_mode);
      get(j, "flat_tolerance", p.flat_tolerance);
      get(j, "manufactured_points", p.manufactured_points);
      get(j, "manufactured_tolerance", p.manufactured_tolerance);
      get(j, "slope_tolerance", p.slope_tolerance);
      get(j, "seed", p.seed);
      return finish(dno_checks(p), {}, out);
    }
    if (sym->parsed()) {
      const json j = suite_params(config, {"margin"});
      double margin = 0.2;
      get(j, "margin", margin);
      return finish(symbol_checks(margin), {}, out);
    }
    if (cls->parsed()) {
      const json j = suite_params(config, {"slope_tolerance", "control_tolerance"});
      double a = 0.1, b = 0.2;
      get(j, "slope_tolerance", a);
      get(j, "control_tolerance", b);
      return finish(class_checks(a, b), {}, out);
    }
  } catch (const std::invalid_argument& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitError;
  }
  return kExitUsage;
}
