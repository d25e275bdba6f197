// Serial reference path against the OpenMP per-x path on the ellipsoid pipeline.
#include <benchmark/benchmark.h>

#include <numbers>

#include "slowman/homological.hpp"

using namespace slowman;

namespace {

constexpr double kPi = std::numbers::pi;

struct Setup {
  ProblemSpec spec = builtin_bent_ellipsoid(1.0, 5.0 / 3.0);
  UniformGrid1D xg{0.1 * kPi, 0.9 * kPi, 64};
  OrbitFamily fam;
  std::vector<FloquetFrame> frames;
  ProjectorField field;

  Setup() {
    fam = family_from_closed_form(
        spec, [](double x, double phi) { return bent_ellipsoid_orbit(1.0, 5.0 / 3.0, x, phi); },
        [](double) { return 2 * kPi; }, xg, 256);
    frames = compute_frames(spec, fam);
    field = build_projector_field(frames);
  }
};

const Setup& setup() {
  static const Setup s;
  return s;
}

ExecutionPolicy policy(const benchmark::State& st) {
  return st.range(0) ? ExecutionPolicy::parallel : ExecutionPolicy::serial;
}

void family(benchmark::State& st) {
  const auto& s = setup();
  for (auto _ : st)
    benchmark::DoNotOptimize(family_from_closed_form(
        s.spec, [](double x, double phi) { return bent_ellipsoid_orbit(1.0, 5.0 / 3.0, x, phi); },
        [](double) { return 2 * kPi; }, s.xg, 256, policy(st)));
}

void frames(benchmark::State& st) {
  const auto& s = setup();
  for (auto _ : st) benchmark::DoNotOptimize(compute_frames(s.spec, s.fam, {}, policy(st)));
}

void projectors(benchmark::State& st) {
  const auto& s = setup();
  for (auto _ : st) benchmark::DoNotOptimize(build_projector_field(s.frames, 1e8, policy(st)));
}

void homological(benchmark::State& st) {
  const auto& s = setup();
  for (auto _ : st) benchmark::DoNotOptimize(solve_order(s.spec, s.fam, s.frames, s.field, {}, 1, {}, policy(st)));
}

}  // namespace

// Arg 0 = serial, 1 = parallel.
BENCHMARK(family)->Arg(0)->Arg(1)->Unit(benchmark::kMillisecond)->UseRealTime();
BENCHMARK(frames)->Arg(0)->Arg(1)->Unit(benchmark::kMillisecond)->UseRealTime();
BENCHMARK(projectors)->Arg(0)->Arg(1)->Unit(benchmark::kMillisecond)->UseRealTime();
BENCHMARK(homological)->Arg(0)->Arg(1)->Unit(benchmark::kMillisecond)->UseRealTime();

BENCHMARK_MAIN();
