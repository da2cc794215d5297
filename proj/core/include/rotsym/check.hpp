#pragma once

#include <optional>
#include <span>
#include <string>
#include <vector>

#include "rotsym/geometry.hpp"
#include "rotsym/rng.hpp"
#include "rotsym/types.hpp"

namespace rotsym {

/// Random non-degenerate polygon parameters for randomized checks: center
/// inside the point-cloud box, unit axis kept away from the canonical-sign
/// boundary, seed on a perpendicular radius, interior angle bias for C2.
PolygonParams3D random_params_for_group(SplitMix64& rng, RotationGroup group);
PolygonParams3D random_nondegenerate_params(SplitMix64& rng);  // cycles C2..C8

/// Verifies the reconstruction invariants on one polygon: equal radii,
/// coplanarity, equal central angles and side lengths (non-C2), full-turn
/// closure, and axis-sign invariance of the vertex set. Returns a
/// description of the first violation, or nullopt when all hold.
std::optional<std::string> polygon_invariant_violation(const PolygonParams3D& params,
                                                       double tolerance = 1e-9);

struct CheckOptions {
  int n = 500;
  std::uint64_t seed = 20250809;
  double jacobian_tolerance = 1e-5;
  double fd_step = 1e-6;
  bool inject_jacobian_fault = false;  // test fixture: corrupts one entry
};

struct CheckFailure {
  std::string what;
  PolygonParams3D params;
};

struct CheckSummary {
  int jacobian_checked = 0;
  int geometry_checked = 0;
  std::vector<CheckFailure> failures;

  bool ok() const { return failures.empty(); }
};

/// Randomized gradient checks (analytic vs central-difference Jacobians)
/// plus geometry invariant sweeps.
CheckSummary run_self_checks(const CheckOptions& options);

/// Prints one line per check family plus any failing samples.
std::string summarize_checks(const CheckSummary& summary);

}  // namespace rotsym
