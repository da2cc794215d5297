#pragma once

#include <array>
#include <cmath>
#include <stdexcept>
#include <string>
#include <string_view>

#include "rotsym/errors.hpp"

namespace rotsym {

/// 3D point or direction in camera coordinates, meters. +z points away
/// from the camera along the optical axis.
struct Vector3 {
  double x = 0.0;
  double y = 0.0;
  double z = 0.0;

  Vector3 operator+(const Vector3& o) const { return {x + o.x, y + o.y, z + o.z}; }
  Vector3 operator-(const Vector3& o) const { return {x - o.x, y - o.y, z - o.z}; }
  Vector3 operator-() const { return {-x, -y, -z}; }
  Vector3 operator*(double s) const { return {x * s, y * s, z * s}; }
  Vector3 operator/(double s) const { return {x / s, y / s, z / s}; }
  Vector3& operator+=(const Vector3& o) {
    x += o.x; y += o.y; z += o.z;
    return *this;
  }

  double squared_norm() const { return x * x + y * y + z * z; }
  double norm() const { return std::sqrt(squared_norm()); }
  bool finite() const { return std::isfinite(x) && std::isfinite(y) && std::isfinite(z); }
};

inline Vector3 operator*(double s, const Vector3& v) { return v * s; }

inline double dot(const Vector3& a, const Vector3& b) {
  return a.x * b.x + a.y * b.y + a.z * b.z;
}

inline Vector3 cross(const Vector3& a, const Vector3& b) {
  return {a.y * b.z - a.z * b.y, a.z * b.x - a.x * b.z, a.x * b.y - a.y * b.x};
}

/// 2D image coordinates, pixels.
struct Point2D {
  double u = 0.0;
  double v = 0.0;

  bool finite() const { return std::isfinite(u) && std::isfinite(v); }
};

/// l1 distance in pixels.
inline double l1_distance(const Point2D& a, const Point2D& b) {
  return std::abs(a.u - b.u) + std::abs(a.v - b.v);
}

/// Euclidean distance in pixels.
inline double euclidean_distance(const Point2D& a, const Point2D& b) {
  return std::hypot(a.u - b.u, a.v - b.v);
}

/// Pinhole parameters: focal length and principal point, pixels.
struct CameraIntrinsics {
  double f = 1000.0;
  double cx = 0.0;
  double cy = 0.0;
};

/// Rotation symmetry group tag. SO2 denotes continuous rotation symmetry
/// (a center with no finite vertex set); the cyclic tags carry an order.
enum class RotationGroup { SO2, C2, C3, C4, C5, C6, C8 };

inline constexpr std::array<RotationGroup, 7> kAllGroups = {
    RotationGroup::SO2, RotationGroup::C2, RotationGroup::C3, RotationGroup::C4,
    RotationGroup::C5,  RotationGroup::C6, RotationGroup::C8};

inline constexpr std::array<RotationGroup, 6> kCyclicGroups = {
    RotationGroup::C2, RotationGroup::C3, RotationGroup::C4,
    RotationGroup::C5, RotationGroup::C6, RotationGroup::C8};

/// Order N of a cyclic group. SO2 has no finite order; asking for one is a
/// programming error, not a recoverable domain condition.
inline int group_order(RotationGroup g) {
  switch (g) {
    case RotationGroup::C2: return 2;
    case RotationGroup::C3: return 3;
    case RotationGroup::C4: return 4;
    case RotationGroup::C5: return 5;
    case RotationGroup::C6: return 6;
    case RotationGroup::C8: return 8;
    case RotationGroup::SO2: break;
  }
  throw std::invalid_argument("group_order: SO2 has no finite order");
}

/// Number of vertices an instance of this group carries. C2 objects are
/// rectangles and carry four vertices; SO2 carries none.
inline int vertex_count(RotationGroup g) {
  if (g == RotationGroup::SO2) return 0;
  if (g == RotationGroup::C2) return 4;
  return group_order(g);
}

inline std::string_view group_name(RotationGroup g) {
  switch (g) {
    case RotationGroup::SO2: return "SO2";
    case RotationGroup::C2: return "C2";
    case RotationGroup::C3: return "C3";
    case RotationGroup::C4: return "C4";
    case RotationGroup::C5: return "C5";
    case RotationGroup::C6: return "C6";
    case RotationGroup::C8: return "C8";
  }
  return "?";
}

inline RotationGroup parse_group(std::string_view name) {
  for (RotationGroup g : kAllGroups) {
    if (group_name(g) == name) return g;
  }
  throw ConfigError("unknown rotation group tag: '" + std::string(name) + "'");
}

}  // namespace rotsym
