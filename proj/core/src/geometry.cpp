#include "rotsym/geometry.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>

namespace rotsym {

namespace {

constexpr double kPi = std::numbers::pi;

Vector3 radial_vector(const PolygonParams3D& p) {
  const Vector3 r = p.seed - p.center;
  if (r.norm() < kAxisEpsilon) {
    throw DegenerateSeed("seed vertex coincides with the rotation center");
  }
  return r;
}

}  // namespace

Vector3 normalize_axis(const Vector3& a) {
  const double n = a.norm();
  if (!(n >= kAxisEpsilon)) {  // also rejects NaN
    throw ZeroAxis("axis norm " + std::to_string(n) + " below " +
                   std::to_string(kAxisEpsilon));
  }
  Vector3 unit = a / n;
  const bool flip = unit.z < 0.0 ||
                    (unit.z == 0.0 && (unit.y < 0.0 || (unit.y == 0.0 && unit.x < 0.0)));
  return flip ? -unit : unit;
}

Vector3 rodrigues_rotate(const Vector3& r, const Vector3& axis_unit, double angle) {
  const double c = std::cos(angle);
  const double s = std::sin(angle);
  return r * c + cross(axis_unit, r) * s + axis_unit * (dot(axis_unit, r) * (1.0 - c));
}

std::array<double, 4> c2_rotation_angles(double angle_bias) {
  return {0.0, kPi / 4.0 + angle_bias, kPi, kPi + kPi / 4.0 + angle_bias};
}

std::vector<Vector3> reconstruct_vertices(const PolygonParams3D& p) {
  if (p.group == RotationGroup::SO2 || p.group == RotationGroup::C2) {
    throw std::invalid_argument("reconstruct_vertices: needs a cyclic group other than C2");
  }
  const Vector3 axis = normalize_axis(p.axis);
  const Vector3 r = radial_vector(p);
  const int n = group_order(p.group);
  std::vector<Vector3> out;
  out.reserve(static_cast<std::size_t>(n));
  for (int k = 1; k <= n; ++k) {
    const double theta = 2.0 * kPi * static_cast<double>(k) / static_cast<double>(n);
    out.push_back(p.center + rodrigues_rotate(r, axis, theta));
  }
  return out;
}

std::vector<Vector3> reconstruct_vertices_c2(const PolygonParams3D& p) {
  if (p.group != RotationGroup::C2) {
    throw std::invalid_argument("reconstruct_vertices_c2: group must be C2");
  }
  const Vector3 axis = normalize_axis(p.axis);
  const Vector3 r = radial_vector(p);
  std::vector<Vector3> out;
  out.reserve(4);
  for (double theta : c2_rotation_angles(p.angle_bias)) {
    out.push_back(p.center + rodrigues_rotate(r, axis, theta));
  }
  return out;
}

std::vector<Vector3> reconstruct_polygon(const PolygonParams3D& p) {
  if (p.group == RotationGroup::SO2) return {};
  if (p.group == RotationGroup::C2) return reconstruct_vertices_c2(p);
  return reconstruct_vertices(p);
}

}  // namespace rotsym
