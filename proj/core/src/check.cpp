#include "rotsym/check.hpp"

#include <cmath>
#include <cstdio>
#include <numbers>

#include "rotsym/fit.hpp"

namespace rotsym {

namespace {

constexpr double kPi = std::numbers::pi;

Vector3 random_unit(SplitMix64& rng) {
  while (true) {
    const Vector3 g{rng.gaussian(), rng.gaussian(), rng.gaussian()};
    const double n = g.norm();
    if (n > 1e-6) return g / n;
  }
}

std::string params_to_string(const PolygonParams3D& p) {
  char buf[320];
  std::snprintf(buf, sizeof(buf),
                "group=%s c=(%.17g, %.17g, %.17g) s=(%.17g, %.17g, %.17g) "
                "a=(%.17g, %.17g, %.17g) beta=%.17g",
                std::string(group_name(p.group)).c_str(), p.center.x, p.center.y, p.center.z,
                p.seed.x, p.seed.y, p.seed.z, p.axis.x, p.axis.y, p.axis.z, p.angle_bias);
  return buf;
}

}  // namespace

PolygonParams3D random_params_for_group(SplitMix64& rng, RotationGroup group) {
  PolygonParams3D p;
  p.group = group;
  p.center = {rng.uniform(-0.8, 0.8), rng.uniform(-0.8, 0.8), rng.uniform(0.8, 3.5)};
  Vector3 axis = random_unit(rng);
  while (std::abs(axis.z) < 1e-3) axis = random_unit(rng);  // off the sign boundary
  p.axis = axis;
  const double radius = rng.uniform(0.1, 0.5);
  Vector3 perp;
  while (true) {
    const Vector3 g = random_unit(rng);
    perp = g - axis * dot(axis, g);
    const double n = perp.norm();
    if (n > 1e-6) {
      perp = perp / n;
      break;
    }
  }
  p.seed = p.center + perp * radius;
  p.angle_bias = group == RotationGroup::C2 ? rng.uniform(0.1, kPi / 2.0 - 0.1) : 0.0;
  return p;
}

PolygonParams3D random_nondegenerate_params(SplitMix64& rng) {
  const RotationGroup group = kCyclicGroups[rng.uniform_int(0, kCyclicGroups.size() - 1)];
  return random_params_for_group(rng, group);
}

std::optional<std::string> polygon_invariant_violation(const PolygonParams3D& params,
                                                       double tolerance) {
  const std::vector<Vector3> vertices = reconstruct_polygon(params);
  if (vertices.empty()) return std::nullopt;  // SO2 has nothing to check

  const Vector3 axis = normalize_axis(params.axis);
  const double radius = (params.seed - params.center).norm();
  const double length_tol = tolerance * std::max(1.0, radius);

  double r_min = vertices.front().norm();
  double r_max = 0.0;
  r_min = 1e300;
  double h_min = 1e300;
  double h_max = -1e300;
  for (const Vector3& v : vertices) {
    const Vector3 d = v - params.center;
    const double r = d.norm();
    r_min = std::min(r_min, r);
    r_max = std::max(r_max, r);
    const double h = dot(d, axis);
    h_min = std::min(h_min, h);
    h_max = std::max(h_max, h);
  }
  if (r_max - r_min > tolerance * radius) {
    return "equal-radius violation: spread " + std::to_string(r_max - r_min);
  }
  if (h_max - h_min > tolerance) {
    return "coplanarity violation: axial spread " + std::to_string(h_max - h_min);
  }

  const bool is_c2 = params.group == RotationGroup::C2;
  const Vector3 closure = is_c2 ? vertices.front() : vertices.back();
  if ((closure - params.seed).norm() > length_tol) {
    return "closure violation: seed not reproduced";
  }

  if (!is_c2) {
    const int n = static_cast<int>(vertices.size());
    const double step = 2.0 * kPi / n;
    double side_min = 1e300;
    double side_max = 0.0;
    for (int k = 0; k < n; ++k) {
      const Vector3 d0 = vertices[k] - params.center;
      const Vector3 d1 = vertices[(k + 1) % n] - params.center;
      const Vector3 p0 = d0 - axis * dot(d0, axis);
      const Vector3 p1 = d1 - axis * dot(d1, axis);
      const double angle = std::atan2(cross(p0, p1).norm(), dot(p0, p1));
      if (std::abs(angle - step) > tolerance) {
        return "central-angle violation at k=" + std::to_string(k);
      }
      const double side = (vertices[(k + 1) % n] - vertices[k]).norm();
      side_min = std::min(side_min, side);
      side_max = std::max(side_max, side);
    }
    if (side_max > 0.0 && (side_max - side_min) / side_max > tolerance) {
      return "side-length violation: relative spread " +
             std::to_string((side_max - side_min) / side_max);
    }
  }

  PolygonParams3D flipped = params;
  flipped.axis = -params.axis;
  const std::vector<Vector3> mirrored = reconstruct_polygon(flipped);
  if (mirrored.size() != vertices.size()) {
    return "axis-sign violation: vertex counts differ";
  }
  for (const Vector3& v : vertices) {
    double best = 1e300;
    for (const Vector3& m : mirrored) best = std::min(best, (v - m).norm());
    if (best > length_tol) {
      return "axis-sign violation: vertex set changed under negated axis";
    }
  }
  return std::nullopt;
}

CheckSummary run_self_checks(const CheckOptions& options) {
  CheckSummary summary;
  SplitMix64 rng = substream(options.seed, 7, 0);
  const CameraIntrinsics K{1000.0, 640.0, 360.0};

  for (int i = 0; i < options.n; ++i) {
    const PolygonParams3D p = random_nondegenerate_params(rng);

    if (const auto violation = polygon_invariant_violation(p)) {
      summary.failures.push_back({*violation, p});
    }
    ++summary.geometry_checked;

    Matrix analytic = analytic_jacobian(p, K);
    if (options.inject_jacobian_fault) {
      analytic.at(2, 0) += 1.0;  // deliberately wrong, for fault-injection tests
    }
    const Matrix fd = finite_diff_jacobian(p, K, options.fd_step);
    const double err = jacobian_max_relative_error(analytic, fd);
    if (err > options.jacobian_tolerance) {
      summary.failures.push_back(
          {"jacobian relative error " + std::to_string(err) + " exceeds tolerance", p});
    }
    ++summary.jacobian_checked;
  }
  return summary;
}

std::string summarize_checks(const CheckSummary& summary) {
  std::string out;
  out += "jacobian checks run: " + std::to_string(summary.jacobian_checked) + "\n";
  out += "geometry invariant sweeps run: " + std::to_string(summary.geometry_checked) + "\n";
  if (summary.ok()) {
    out += "all checks passed\n";
  } else {
    for (const CheckFailure& f : summary.failures) {
      out += "FAIL: " + f.what + "\n  " + params_to_string(f.params) + "\n";
    }
  }
  return out;
}

}  // namespace rotsym
