#include "rotsym/synth.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numbers>

#include "rotsym/parallel.hpp"
#include "rotsym/projection.hpp"

namespace rotsym {

namespace {

constexpr double kPi = std::numbers::pi;
constexpr std::uint64_t kSampleStream = 0;
constexpr std::uint64_t kNoiseStream = 1;
constexpr double kMinVertexDepth = 0.05;  // meters; keeps projections well-posed
constexpr int kMaxDraws = 1000;

Vector3 random_unit(SplitMix64& rng) {
  while (true) {
    const Vector3 g{rng.gaussian(), rng.gaussian(), rng.gaussian()};
    const double n = g.norm();
    if (n > 1e-6) return g / n;
  }
}

// Axes with |z| below the margin sit on the canonical-sign boundary where
// the reconstruction flips vertex order; keep sampled axes away from it.
Vector3 random_axis(SplitMix64& rng) {
  while (true) {
    const Vector3 u = random_unit(rng);
    if (std::abs(u.z) >= 1e-3) return u;
  }
}

Vector3 random_perpendicular(SplitMix64& rng, const Vector3& axis_unit) {
  while (true) {
    const Vector3 g = random_unit(rng);
    const Vector3 p = g - axis_unit * dot(axis_unit, g);
    const double n = p.norm();
    if (n > 1e-6) return p / n;
  }
}

std::map<RotationGroup, double> effective_weights(const SynthConfig& cfg) {
  if (!cfg.group_weights.empty()) return cfg.group_weights;
  std::map<RotationGroup, double> w;
  for (RotationGroup g : kAllGroups) w[g] = 1.0;
  return w;
}

RotationGroup weighted_group(SplitMix64& rng, const std::map<RotationGroup, double>& weights) {
  double total = 0.0;
  for (RotationGroup g : kAllGroups) {
    const auto it = weights.find(g);
    if (it != weights.end() && it->second > 0.0) total += it->second;
  }
  const double u = rng.uniform01() * total;
  double cum = 0.0;
  RotationGroup last = RotationGroup::C4;
  for (RotationGroup g : kAllGroups) {
    const auto it = weights.find(g);
    if (it == weights.end() || it->second <= 0.0) continue;
    cum += it->second;
    last = g;
    if (u < cum) return g;
  }
  return last;
}

PolygonParams3D sample_polygon(SplitMix64& rng, const SynthConfig& cfg, RotationGroup grp) {
  for (int tries = 0; tries < kMaxDraws; ++tries) {
    PolygonParams3D p;
    p.group = grp;
    p.center = {rng.uniform(cfg.x_min, cfg.x_max), rng.uniform(cfg.y_min, cfg.y_max),
                rng.uniform(cfg.z_min, cfg.z_max)};
    p.axis = cfg.axis_mode == SynthConfig::AxisMode::Frontoparallel ? Vector3{0.0, 0.0, 1.0}
                                                                    : random_axis(rng);
    const double radius = rng.uniform(cfg.radius_min, cfg.radius_max);
    p.seed = p.center + random_perpendicular(rng, p.axis) * radius;
    p.angle_bias = grp == RotationGroup::C2 ? rng.uniform(0.1, kPi / 2.0 - 0.1) : 0.0;

    if (p.center.z < kMinVertexDepth || p.seed.z < kMinVertexDepth) continue;
    bool ok = true;
    for (const Vector3& v : reconstruct_polygon(p)) {
      if (v.z < kMinVertexDepth) {
        ok = false;
        break;
      }
    }
    if (ok) return p;
  }
  throw ConfigError(
      "synth: no placement keeps the polygon in front of the camera; "
      "is the radius range too large for the depth range?");
}

std::string scene_id(int index) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "scene_%04d", index);
  return buf;
}

}  // namespace

void SynthConfig::validate() const {
  if (n_scenes < 0) throw ConfigError("synth config: n_scenes must be >= 0");
  if (min_polygons < 0 || max_polygons < min_polygons) {
    throw ConfigError("synth config: invalid polygons_per_scene range");
  }
  if (!(x_min < x_max) || x_min < -1.0 || x_max > 1.0) {
    throw ConfigError("synth config: x range must be non-degenerate and within [-1, 1]");
  }
  if (!(y_min < y_max) || y_min < -1.0 || y_max > 1.0) {
    throw ConfigError("synth config: y range must be non-degenerate and within [-1, 1]");
  }
  if (!(z_min < z_max) || !(z_min > 0.2) || z_max > 4.0) {
    throw ConfigError("synth config: z range must be non-degenerate and within (0.2, 4]");
  }
  if (!(radius_min > 0.0) || !(radius_min <= radius_max)) {
    throw ConfigError("synth config: invalid radius range");
  }
  if (image_width <= 0 || image_height <= 0) {
    throw ConfigError("synth config: image dimensions must be positive");
  }
  if (focal_mode == FocalMode::Fixed) {
    if (!(focal > 0.0)) throw ConfigError("synth config: focal length must be positive");
  } else {
    if (!(focal_range_min > 0.0) || !(focal_range_min <= focal_range_max)) {
      throw ConfigError("synth config: invalid focal range");
    }
  }
  if (!(focal_clip_lo > 0.0) || !(focal_clip_lo < focal_clip_hi)) {
    throw ConfigError("synth config: invalid normalized-focal clip bounds");
  }
  if (!group_weights.empty()) {
    double total = 0.0;
    for (const auto& [g, w] : group_weights) {
      if (w < 0.0) throw ConfigError("synth config: negative group weight");
      total += w;
    }
    if (!(total > 0.0)) throw ConfigError("synth config: group weights sum to zero");
  }
}

std::map<RotationGroup, double> SynthConfig::skewed_weights() {
  return {{RotationGroup::SO2, 8.0}, {RotationGroup::C2, 5.0}, {RotationGroup::C3, 0.6},
          {RotationGroup::C4, 2.0},  {RotationGroup::C5, 0.6}, {RotationGroup::C6, 0.6},
          {RotationGroup::C8, 1.2}};
}

void NoiseSpec::validate() const {
  if (center_sigma < 0.0 || vertex_sigma < 0.0 || axis_jitter_sigma < 0.0) {
    throw ConfigError("noise spec: sigmas must be >= 0");
  }
  if (drop_rate < 0.0 || drop_rate > 1.0 || spurious_rate < 0.0 || spurious_rate > 1.0) {
    throw ConfigError("noise spec: rates must be in [0, 1]");
  }
  if (score_model.max_score < 0.0 || score_model.max_score > 1.0) {
    throw ConfigError("noise spec: max_score must be in [0, 1]");
  }
  if (score_model.decay < 0.0) throw ConfigError("noise spec: decay must be >= 0");
}

SampledScene sample_scene(const SynthConfig& cfg, int index) {
  cfg.validate();
  SplitMix64 rng = substream(cfg.seed, kSampleStream, static_cast<std::uint64_t>(index));

  SampledScene out;
  double f = cfg.focal;
  if (cfg.focal_mode == SynthConfig::FocalMode::Sampled) {
    f = rng.uniform(cfg.focal_range_min, cfg.focal_range_max);
    f = clip_normalized_focal(f, cfg.image_width, cfg.focal_clip_lo, cfg.focal_clip_hi);
  }
  out.intrinsics = {f, cfg.image_width / 2.0, cfg.image_height / 2.0};

  Scene scene;
  scene.id = scene_id(index);
  scene.width = cfg.image_width;
  scene.height = cfg.image_height;
  scene.intrinsics = out.intrinsics;

  const auto weights = effective_weights(cfg);
  const int n_polys = rng.uniform_int(cfg.min_polygons, cfg.max_polygons);
  for (int k = 0; k < n_polys; ++k) {
    const RotationGroup grp = weighted_group(rng, weights);
    const PolygonParams3D params = sample_polygon(rng, cfg, grp);
    scene.polygons.push_back(project_polygon(params, out.intrinsics));
    out.params.push_back(params);
  }
  out.ground_truth = std::move(scene);
  return out;
}

Scene perturb_scene(const SampledScene& gt, const NoiseSpec& noise, SplitMix64& rng) {
  noise.validate();
  Scene out = gt.ground_truth;
  out.polygons.clear();
  const CameraIntrinsics& K = gt.intrinsics;

  for (const PolygonParams3D& p : gt.params) {
    // The stream is consumed identically whether or not the instance is
    // dropped, so drop decisions do not shift later draws.
    const double u_drop = rng.uniform01();
    const Vector3 dc{rng.gaussian() * noise.center_sigma, rng.gaussian() * noise.center_sigma,
                     rng.gaussian() * noise.center_sigma};
    const Vector3 ds{rng.gaussian() * noise.vertex_sigma, rng.gaussian() * noise.vertex_sigma,
                     rng.gaussian() * noise.vertex_sigma};
    const double jitter_angle = rng.gaussian() * noise.axis_jitter_sigma;
    const Vector3 axis_unit = normalize_axis(p.axis);
    const Vector3 perp = random_perpendicular(rng, axis_unit);
    if (u_drop < noise.drop_rate) continue;

    const bool no_jitter = dc.x == 0.0 && dc.y == 0.0 && dc.z == 0.0 && ds.x == 0.0 &&
                           ds.y == 0.0 && ds.z == 0.0 && jitter_angle == 0.0;
    PolygonParams3D q = p;
    if (!no_jitter) {
      q.center = p.center + dc;
      q.seed = p.seed + ds;
      q.axis = rodrigues_rotate(axis_unit, perp, jitter_angle);
    }

    const double radius = (p.seed - p.center).norm();
    const double mag = dc.norm() + ds.norm() + std::abs(jitter_angle) * radius;
    const double score = std::clamp(
        noise.score_model.max_score * std::exp(-noise.score_model.decay * mag), 0.0, 1.0);

    Polygon2D poly;
    try {
      poly = project_polygon(q, K);
    } catch (const Error&) {
      poly = project_polygon(p, K);  // jitter pushed a point behind the camera
    }
    poly.scores = {{p.group, score}};
    out.polygons.push_back(std::move(poly));
  }

  // Spurious detections: clones of existing instances displaced in the
  // point-cloud box, carrying low confidence.
  const int n_gt = static_cast<int>(gt.params.size());
  for (int i = 0; i < n_gt; ++i) {
    const double u_spur = rng.uniform01();
    const PolygonParams3D& src = gt.params[rng.uniform_int(0, n_gt - 1)];
    const Vector3 shift{rng.uniform(-0.4, 0.4), rng.uniform(-0.4, 0.4),
                        rng.uniform(-0.5, 0.5)};
    const double score = rng.uniform(0.02, 0.3) * noise.score_model.max_score;
    if (u_spur >= noise.spurious_rate) continue;

    PolygonParams3D q = src;
    q.center = src.center + shift;
    q.center.z = std::clamp(q.center.z, 0.5, 4.0);
    q.seed = src.seed + (q.center - src.center);
    try {
      Polygon2D poly = project_polygon(q, K);
      poly.scores = {{q.group, score}};
      out.polygons.push_back(std::move(poly));
    } catch (const Error&) {
      // displaced clone fell behind the camera; skip it
    }
  }
  return out;
}

double clip_normalized_focal(double f, double image_w, double lo, double hi) {
  return std::clamp(f / image_w, lo, hi) * image_w;
}

std::vector<SampledScene> sample_scenes(const SynthConfig& cfg, int workers) {
  cfg.validate();
  std::vector<SampledScene> out(static_cast<std::size_t>(cfg.n_scenes));
  parallel_for(cfg.n_scenes, workers, [&](int i) { out[i] = sample_scene(cfg, i); });
  return out;
}

std::vector<Scene> perturb_scenes(std::span<const SampledScene> gt, const NoiseSpec& noise,
                                  std::uint64_t seed, int workers) {
  noise.validate();
  std::vector<Scene> out(gt.size());
  parallel_for(static_cast<int>(gt.size()), workers, [&](int i) {
    SplitMix64 rng = substream(seed, kNoiseStream, static_cast<std::uint64_t>(i));
    out[i] = perturb_scene(gt[i], noise, rng);
  });
  return out;
}

}  // namespace rotsym
