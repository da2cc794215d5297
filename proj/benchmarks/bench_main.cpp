#include <benchmark/benchmark.h>

#include "rotsym/check.hpp"
#include "rotsym/fit.hpp"
#include "rotsym/matching.hpp"
#include "rotsym/metrics.hpp"
#include "rotsym/rng.hpp"
#include "rotsym/synth.hpp"

using namespace rotsym;

namespace {

const CameraIntrinsics kK{1000.0, 640.0, 360.0};

static void BM_RodriguesRotate(benchmark::State& state) {
  SplitMix64 rng(1);
  const Vector3 axis = normalize_axis({rng.gaussian(), rng.gaussian(), rng.gaussian() + 0.5});
  const Vector3 r{0.3, -0.2, 0.1};
  double theta = 0.7;
  for (auto _ : state) {
    benchmark::DoNotOptimize(rodrigues_rotate(r, axis, theta));
    theta += 1e-6;
  }
}
BENCHMARK(BM_RodriguesRotate);

static void BM_ReconstructPolygon(benchmark::State& state) {
  SplitMix64 rng(2);
  const PolygonParams3D p = random_params_for_group(
      rng, state.range(0) == 2 ? RotationGroup::C2 : RotationGroup::C8);
  for (auto _ : state) {
    benchmark::DoNotOptimize(reconstruct_polygon(p));
  }
}
BENCHMARK(BM_ReconstructPolygon)->Arg(2)->Arg(8);

static void BM_SolveAssignment(benchmark::State& state) {
  SplitMix64 rng(3);
  const int n = static_cast<int>(state.range(0));
  Matrix cost(n, n);
  for (double& v : cost.data) v = rng.uniform(0, 100);
  for (auto _ : state) {
    benchmark::DoNotOptimize(solve_assignment(cost));
  }
}
BENCHMARK(BM_SolveAssignment)->Arg(4)->Arg(8)->Arg(16)->Arg(32);

static void BM_AnalyticJacobian(benchmark::State& state) {
  SplitMix64 rng(4);
  const PolygonParams3D p = random_params_for_group(rng, RotationGroup::C8);
  for (auto _ : state) {
    benchmark::DoNotOptimize(analytic_jacobian(p, kK));
  }
}
BENCHMARK(BM_AnalyticJacobian);

static void BM_FitPolygon(benchmark::State& state) {
  SplitMix64 rng(5);
  const PolygonParams3D truth = random_params_for_group(rng, RotationGroup::C4);
  const ForwardResult f = forward(truth, kK);
  Polygon2D obs;
  obs.group = truth.group;
  obs.center = f.center;
  obs.vertices = f.vertices;
  PolygonParams3D init = truth;
  init.center.x += 0.02;
  init.seed.y -= 0.015;
  for (auto _ : state) {
    benchmark::DoNotOptimize(fit_polygon(obs, truth.group, kK, init));
  }
}
BENCHMARK(BM_FitPolygon);

static void BM_EvaluateSplit(benchmark::State& state) {
  SynthConfig cfg;
  cfg.seed = 6;
  cfg.n_scenes = static_cast<int>(state.range(0));
  cfg.min_polygons = 2;
  cfg.max_polygons = 5;
  const auto sampled = sample_scenes(cfg, 1);
  std::vector<Scene> gt;
  for (const auto& s : sampled) gt.push_back(s.ground_truth);
  NoiseSpec noise;
  noise.center_sigma = 0.01;
  noise.vertex_sigma = 0.01;
  const auto pred = perturb_scenes(sampled, noise, cfg.seed, 1);
  EvalConfig ec;
  ec.with_f1 = true;
  for (auto _ : state) {
    benchmark::DoNotOptimize(evaluate(gt, pred, ec));
  }
}
BENCHMARK(BM_EvaluateSplit)->Arg(4)->Arg(16)->Unit(benchmark::kMillisecond);

static void BM_RenderScoreMap(benchmark::State& state) {
  SynthConfig cfg;
  cfg.seed = 7;
  cfg.n_scenes = 1;
  cfg.min_polygons = 8;
  cfg.max_polygons = 8;
  const Scene scene = sample_scene(cfg, 0).ground_truth;
  for (auto _ : state) {
    benchmark::DoNotOptimize(render_score_map(scene, 5));
  }
}
BENCHMARK(BM_RenderScoreMap)->Unit(benchmark::kMicrosecond);

}  // namespace

BENCHMARK_MAIN();
