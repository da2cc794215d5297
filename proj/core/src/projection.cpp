#include "rotsym/projection.hpp"

#include <string>

namespace rotsym {

Point2D project_point(const Vector3& p, const CameraIntrinsics& K) {
  if (!(p.z >= kDepthEpsilon)) {
    throw BehindCamera("point", p.z);
  }
  return {K.f * p.x / p.z + K.cx, K.f * p.y / p.z + K.cy};
}

Polygon2D project_polygon(const PolygonParams3D& p, const CameraIntrinsics& K) {
  Polygon2D out;
  out.group = p.group;
  out.params3d = p;

  if (!(p.center.z >= kDepthEpsilon)) {
    throw BehindCamera("center", p.center.z);
  }
  out.center = project_point(p.center, K);

  const std::vector<Vector3> vertices = reconstruct_polygon(p);
  out.vertices.reserve(vertices.size());
  for (std::size_t k = 0; k < vertices.size(); ++k) {
    if (!(vertices[k].z >= kDepthEpsilon)) {
      throw BehindCamera("vertex " + std::to_string(k + 1), vertices[k].z);
    }
    out.vertices.push_back(project_point(vertices[k], K));
  }
  return out;
}

void CameraGridSpec::validate() const {
  if (nx < 1 || ny < 1) throw ConfigError("camera grid: nx and ny must be positive");
  if (!(x_min < x_max) || !(y_min < y_max)) {
    throw ConfigError("camera grid: x/y ranges must be non-degenerate");
  }
  if (depths.empty()) throw ConfigError("camera grid: depth list is empty");
  if (!(depths.front() > 0.0)) throw ConfigError("camera grid: depths must be positive");
  for (std::size_t i = 1; i < depths.size(); ++i) {
    if (!(depths[i] > depths[i - 1])) {
      throw ConfigError("camera grid: depths must be strictly increasing");
    }
  }
}

ReferenceSamples cca_reference_points(const CameraGridSpec& grid, const CameraIntrinsics& K,
                                      double image_w, double image_h) {
  grid.validate();
  const int nd = static_cast<int>(grid.depths.size());
  ReferenceSamples out{grid.nx, grid.ny, nd, {}};
  out.samples.reserve(static_cast<std::size_t>(grid.nx) * grid.ny * nd);

  const double cell_w = (grid.x_max - grid.x_min) / grid.nx;
  const double cell_h = (grid.y_max - grid.y_min) / grid.ny;
  for (int i = 0; i < grid.nx; ++i) {
    const double x = grid.x_min + (i + 0.5) * cell_w;
    for (int j = 0; j < grid.ny; ++j) {
      const double y = grid.y_min + (j + 0.5) * cell_h;
      for (int d = 0; d < nd; ++d) {
        const Point2D pt = project_point({x, y, grid.depths[d]}, K);
        const bool in_bounds =
            pt.u >= 0.0 && pt.u < image_w && pt.v >= 0.0 && pt.v < image_h;
        out.samples.push_back({pt, in_bounds});
      }
    }
  }
  return out;
}

}  // namespace rotsym
