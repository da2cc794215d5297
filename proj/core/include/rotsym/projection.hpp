#pragma once

#include <vector>

#include "rotsym/geometry.hpp"
#include "rotsym/scene.hpp"
#include "rotsym/types.hpp"

namespace rotsym {

/// Minimum depth accepted by the projection. Points nearer than this (or
/// behind the camera) raise BehindCamera rather than being clamped.
inline constexpr double kDepthEpsilon = 1e-6;

/// Pinhole projection (f*x/z + cx, f*y/z + cy).
Point2D project_point(const Vector3& p, const CameraIntrinsics& K);

/// Reconstructs the polygon's 3D vertices and projects center and vertices
/// pointwise. The group tag is carried through, the 3D parameters are kept
/// for round trips, and confidence is left for the producer to fill.
/// BehindCamera names the failing point ("center" or "vertex k").
Polygon2D project_polygon(const PolygonParams3D& p, const CameraIntrinsics& K);

/// Camera-query grid in camera x-y space. Cells sample at their centers;
/// the depth list generates one 3D reference point per (cell, depth).
struct CameraGridSpec {
  int nx = 50;
  int ny = 50;
  double x_min = -1.0, x_max = 1.0;
  double y_min = -1.0, y_max = 1.0;
  std::vector<double> depths = {0.5, 1.5, 2.5, 3.5};

  void validate() const;  // ConfigError on violation
};

struct ReferenceSample {
  Point2D point;
  bool in_bounds = false;
};

/// Projected reference points for every (cell, depth) of a grid, laid out
/// as ((i * ny + j) * n_depths + d).
struct ReferenceSamples {
  int nx = 0;
  int ny = 0;
  int n_depths = 0;
  std::vector<ReferenceSample> samples;

  const ReferenceSample& at(int i, int j, int d) const {
    return samples[(static_cast<std::size_t>(i) * ny + j) * n_depths + d];
  }
};

/// Projects every grid reference point and flags whether it lands inside
/// the image: 0 <= u < width and 0 <= v < height.
ReferenceSamples cca_reference_points(const CameraGridSpec& grid, const CameraIntrinsics& K,
                                      double image_w, double image_h);

}  // namespace rotsym
