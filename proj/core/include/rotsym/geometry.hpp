#pragma once

#include <array>
#include <vector>

#include "rotsym/types.hpp"

namespace rotsym {

/// Norm threshold below which axes and seed offsets count as degenerate:
/// well below any plausible scene scale, above accumulated rounding.
inline constexpr double kAxisEpsilon = 1e-9;

/// Regression-style parameterization of one rotation-symmetric polygon:
/// center, seed vertex, rotation axis, and an angle bias that shapes C2
/// rectangles. All other vertices are generated, never stored.
struct PolygonParams3D {
  Vector3 center;
  Vector3 seed;             // one boundary vertex, distinct from center
  Vector3 axis;             // stored unnormalized; every consumer normalizes
  double angle_bias = 0.0;  // radians in [0, pi/2]; only C2 reads it
  RotationGroup group = RotationGroup::C4;
};

/// Unit axis with a canonical sign: prefer z > 0, break ties toward y > 0,
/// then x > 0. An axis and its negation describe the same symmetry; tests
/// and fits need one representative.
/// Throws ZeroAxis when |a| < kAxisEpsilon.
Vector3 normalize_axis(const Vector3& a);

/// Rodrigues' rotation of r around the unit axis by the given angle:
/// r cos t + (a x r) sin t + a (a . r) (1 - cos t).
Vector3 rodrigues_rotate(const Vector3& r, const Vector3& axis_unit, double angle);

/// The four C2 rotation angles for a given bias: {0, pi/4+b, pi, 5pi/4+b}.
/// Opposite entries differ by pi, so the vertices form a rectangle for any
/// bias in [0, pi/2] and a square at b = pi/4.
std::array<double, 4> c2_rotation_angles(double angle_bias);

/// Vertices v_k = c + R(axis, 2 pi k / N)(s - c) for k = 1..N. Requires a
/// cyclic group other than C2. The last vertex closes the turn and equals
/// the seed up to floating error.
/// Throws ZeroAxis / DegenerateSeed on degenerate parameters.
std::vector<Vector3> reconstruct_vertices(const PolygonParams3D& p);

/// The four-vertex C2 rectangle construction (see c2_rotation_angles).
std::vector<Vector3> reconstruct_vertices_c2(const PolygonParams3D& p);

/// Group dispatch: SO2 yields no vertices, C2 the rectangle construction,
/// all other cyclic groups the N-vertex reconstruction.
std::vector<Vector3> reconstruct_polygon(const PolygonParams3D& p);

}  // namespace rotsym
