#pragma once

#include <optional>
#include <vector>

#include "rotsym/geometry.hpp"
#include "rotsym/matching.hpp"
#include "rotsym/scene.hpp"
#include "rotsym/types.hpp"

namespace rotsym {

/// Projected center and vertices of one parameterized polygon, the
/// forward map the Jacobians differentiate. Identical to project_polygon,
/// exposed separately so the derivative contract can name it.
struct ForwardResult {
  Point2D center;
  std::vector<Point2D> vertices;
};

ForwardResult forward(const PolygonParams3D& params, const CameraIntrinsics& K);

/// Parameter layout of all Jacobians: [c.x c.y c.z s.x s.y s.z a.x a.y a.z beta].
inline constexpr int kFitParamCount = 10;

/// d(projected center, vertices)/d(params), 2(V+1) x 10, rows ordered
/// center u, center v, vertex1 u, vertex1 v, ... The beta column is zero
/// for every group except C2. The axis enters through normalize_axis; its
/// Jacobian is the unit-sphere tangent projector scaled by 1/|a|, with the
/// canonical sign folded in.
/// Throws Degenerate within 10x machine thresholds of a precondition
/// boundary (axis norm, seed offset, point depths).
Matrix analytic_jacobian(const PolygonParams3D& params, const CameraIntrinsics& K);

/// Central-difference Jacobian, the oracle the analytic one is checked
/// against in tests and `check` runs.
Matrix finite_diff_jacobian(const PolygonParams3D& params, const CameraIntrinsics& K,
                            double step);

/// Max over columns of |analytic - reference| / max(|analytic column|, 1e-9),
/// Euclidean column norms.
double jacobian_max_relative_error(const Matrix& analytic, const Matrix& reference);

struct FitOptions {
  int max_iterations = 200;
  double rms_change_tol = 1e-10;  // px
  double lambda_init = 1e-3;
  double lambda_scale = 10.0;
  double lambda_max = 1e14;
};

struct FitReport {
  PolygonParams3D params;
  double rms_reprojection = 0.0;  // px, per residual coordinate
  double l1_reprojection = 0.0;   // px, summed l1 over points (the training-loss metric)
  int iterations = 0;
  bool converged = false;
};

/// Plausible starting point when no 3D parameters are known: center and
/// first vertex back-projected at a fixed depth, frontoparallel axis,
/// mid-range angle bias.
PolygonParams3D default_fit_init(const Polygon2D& observed, RotationGroup group,
                                 const CameraIntrinsics& K, double depth_guess = 2.0);

/// Recovers 3D polygon parameters from an observed 2D center + vertex set
/// by damped least squares on the squared reprojection residual. The
/// optimizer works in an unconstrained 10-dimensional space: the raw axis
/// keeps its normalization gauge and beta maps onto (0, pi/2) through a
/// sigmoid. Observed vertices are an unordered set; the correspondence is
/// re-solved every evaluation. Fitted polygons satisfy the reconstruction
/// invariants by construction.
FitReport fit_polygon(const Polygon2D& observed, RotationGroup group, const CameraIntrinsics& K,
                      std::optional<PolygonParams3D> init = std::nullopt,
                      const FitOptions& options = {});

}  // namespace rotsym
