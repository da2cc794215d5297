#pragma once

#include <algorithm>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "rotsym/geometry.hpp"
#include "rotsym/types.hpp"

namespace rotsym {

/// A detected or annotated symmetry instance in image space. Ground-truth
/// instances carry no scores; predictions carry one confidence per group
/// they claim. SO2 instances carry no vertices.
struct Polygon2D {
  Point2D center;
  std::vector<Point2D> vertices;
  RotationGroup group = RotationGroup::C4;
  std::map<RotationGroup, double> scores;
  std::optional<PolygonParams3D> params3d;

  bool has_score(RotationGroup g) const { return scores.count(g) > 0; }

  double score_for(RotationGroup g) const {
    const auto it = scores.find(g);
    if (it == scores.end()) {
      throw MissingScore("prediction lacks a confidence for group " +
                         std::string(group_name(g)));
    }
    return it->second;
  }

  /// No-object confidence: none of the per-group binary classifiers fires.
  double no_object_score() const {
    double best = 0.0;
    for (const auto& [g, s] : scores) best = std::max(best, s);
    return std::clamp(1.0 - best, 0.0, 1.0);
  }
};

/// An image's worth of ground truth or predictions.
struct Scene {
  std::string id;
  int width = 0;
  int height = 0;
  std::optional<CameraIntrinsics> intrinsics;
  std::vector<Polygon2D> polygons;

  /// Scenes that omit intrinsics fall back to f = 1000 with the principal
  /// point at the image center.
  CameraIntrinsics intrinsics_or_default() const {
    if (intrinsics) return *intrinsics;
    return CameraIntrinsics{1000.0, width / 2.0, height / 2.0};
  }
};

/// Focal length used when a scene file names no intrinsics.
inline constexpr double kDefaultFocalLength = 1000.0;

}  // namespace rotsym
