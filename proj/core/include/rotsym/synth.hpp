#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <vector>

#include "rotsym/geometry.hpp"
#include "rotsym/rng.hpp"
#include "rotsym/scene.hpp"
#include "rotsym/types.hpp"

namespace rotsym {

/// Synthetic-scene generator configuration. Centers live inside the model
/// point-cloud box ([-1, 1] m in x-y, depth up to 4 m); everything is
/// deterministic given (seed, scene index).
struct SynthConfig {
  std::uint64_t seed = 1;
  int n_scenes = 10;
  int min_polygons = 1;
  int max_polygons = 4;
  std::map<RotationGroup, double> group_weights;  // empty: uniform over all groups

  double x_min = -0.7, x_max = 0.7;
  double y_min = -0.4, y_max = 0.4;
  double z_min = 0.8, z_max = 3.5;
  double radius_min = 0.08, radius_max = 0.35;

  int image_width = 1280;
  int image_height = 720;

  enum class AxisMode { Random, Frontoparallel };
  AxisMode axis_mode = AxisMode::Random;

  enum class FocalMode { Fixed, Sampled };
  FocalMode focal_mode = FocalMode::Fixed;
  double focal = 1000.0;
  double focal_range_min = 600.0;
  double focal_range_max = 1600.0;
  double focal_clip_lo = 2.0 / 3.0;  // normalized-focal clipping bounds
  double focal_clip_hi = 4.0 / 3.0;

  void validate() const;  // ConfigError on violation

  /// Log-scale class skew preset: SO2 and C2 dominate, the sparse cyclic
  /// groups trail off. Arbitrary weights remain allowed.
  static std::map<RotationGroup, double> skewed_weights();
};

/// Confidence model: score = max_score * exp(-decay * perturbation_norm).
struct ScoreModel {
  double max_score = 1.0;
  double decay = 25.0;
};

struct NoiseSpec {
  double center_sigma = 0.0;      // meters
  double vertex_sigma = 0.0;      // meters, applied to the seed vertex
  double axis_jitter_sigma = 0.0; // radians
  double drop_rate = 0.0;
  double spurious_rate = 0.0;
  ScoreModel score_model;

  void validate() const;
};

struct SampledScene {
  std::vector<PolygonParams3D> params;
  CameraIntrinsics intrinsics;
  Scene ground_truth;
};

/// Generates scene `index` of the dataset: 3D instances with known
/// parameters, plus the projected ground truth. Deterministic given
/// (cfg.seed, index); throws ConfigError when the sampling region is
/// infeasible (radius too large for the depth range).
SampledScene sample_scene(const SynthConfig& cfg, int index);

/// Jitters the 3D parameters, re-reconstructs and re-projects (so
/// predictions still satisfy the 3D priors), applies drops and spurious
/// insertions, and assigns confidences from the score model.
Scene perturb_scene(const SampledScene& gt, const NoiseSpec& noise, SplitMix64& rng);

/// clamp(f / image_w, lo, hi) * image_w.
double clip_normalized_focal(double f, double image_w, double lo, double hi);

/// Whole-dataset helpers; parallel over scene indices with per-scene
/// substreams, so output is identical for any worker count.
std::vector<SampledScene> sample_scenes(const SynthConfig& cfg, int workers);
std::vector<Scene> perturb_scenes(std::span<const SampledScene> gt, const NoiseSpec& noise,
                                  std::uint64_t seed, int workers);

}  // namespace rotsym
