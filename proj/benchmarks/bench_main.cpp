#include <benchmark/benchmark.h>

#include <cmath>
#include <numbers>

#include "ripple/dno.hpp"
#include "ripple/evolution.hpp"
#include "ripple/fourier.hpp"
#include "ripple/normalform.hpp"
#include "ripple/semiclassical.hpp"

using namespace ripple;

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

SurfaceState wave_state(std::size_t n, double eps) {
  auto eta = GridFunction::from_function(n, kTwoPi, [&](double x) { return cplx(eps * std::cos(x)); });
  auto psi = GridFunction::from_function(n, kTwoPi, [&](double x) { return cplx(eps * std::sin(x)); });
  return {eta, psi};
}

void BM_ApplyMultiplier(benchmark::State& st) {
  const auto n = static_cast<std::size_t>(st.range(0));
  const GridFunction u = wavepacket_data(n, n / 2.0, 0.05, 2.0, 2.0);
  for (auto _ : st) benchmark::DoNotOptimize(apply_multiplier(u, symbols::half_wave(1.0)));
  st.SetComplexityN(st.range(0));
}
BENCHMARK(BM_ApplyMultiplier)->RangeMultiplier(4)->Range(1 << 10, 1 << 16)->Complexity(benchmark::oNLogN);

void BM_DnoElliptic(benchmark::State& st) {
  const SurfaceState s = wave_state(static_cast<std::size_t>(st.range(0)), 0.03);
  for (auto _ : st) benchmark::DoNotOptimize(dno_elliptic(s));
}
BENCHMARK(BM_DnoElliptic)->RangeMultiplier(2)->Range(64, 512)->Unit(benchmark::kMillisecond);

void BM_DnoQuadratic(benchmark::State& st) {
  const SurfaceState s = wave_state(static_cast<std::size_t>(st.range(0)), 0.03);
  for (auto _ : st) benchmark::DoNotOptimize(dno_quadratic(s));
}
BENCHMARK(BM_DnoQuadratic)->RangeMultiplier(4)->Range(256, 1 << 14);

void BM_CubicStep(benchmark::State& st) {
  const auto n = static_cast<std::size_t>(st.range(0));
  const GridFunction u = wavepacket_data(n, n / 2.0, 0.05, 2.0, 2.0);
  for (auto _ : st) benchmark::DoNotOptimize(step_cubic(u, 0.25, Scheme::if_rk4));
}
BENCHMARK(BM_CubicStep)->RangeMultiplier(4)->Range(1 << 10, 1 << 14);

void BM_ReducedFlow(benchmark::State& st) {
  NormalFormParams p;
  p.chi_radius = 0.25;
  const auto f0 = make_profile_field(punctured_grid(static_cast<std::size_t>(st.range(0)), 2.0, 0.05), 20.0, 0,
                                     [](double X) { return 0.1 * std::exp(-X * X); });
  for (auto _ : st) benchmark::DoNotOptimize(integrate_reduced(f0, 220.0, 0.1, p, 100));
}
BENCHMARK(BM_ReducedFlow)->Arg(21)->Arg(81)->Unit(benchmark::kMillisecond);

void BM_HarmonicCutoff(benchmark::State& st) {
  const GridFunction u = wavepacket_data(4096, 2048.0, 0.05, 10.0, 1.0);
  const GridFunction v = to_profile(apply_multiplier(u, symbols::half_wave(200.0)), 201.0);
  for (auto _ : st) benchmark::DoNotOptimize(microlocal_cutoff(v, 1.0 / 201.0, 1));
}
BENCHMARK(BM_HarmonicCutoff)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
