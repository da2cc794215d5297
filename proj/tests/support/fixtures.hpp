#pragma once

#include <string>
#include <utility>

#include "rotsym/geometry.hpp"
#include "rotsym/rng.hpp"
#include "rotsym/scene.hpp"

namespace rotsym::test {

/// Two-polygon scene pair (1000x800): a C4 square and a C3 triangle with
/// hand-perturbed, shuffled predictions plus one spurious low-confidence
/// C2. The expected assignment is P1->A, P2->B, padding->C by a wide
/// margin.
std::pair<Scene, Scene> loss_fixture();

/// The total set loss of the fixture, written as one straight-line scalar
/// computation with the known correspondences. Normalized coordinates,
/// unit no-object weight.
double loss_fixture_oracle();

/// Relative jitter for fit-recovery experiments: scales center/seed
/// components by (1 + magnitude * g), tilts the axis by a random angle of
/// the same relative size, and nudges beta inside its range.
PolygonParams3D jitter_params(const PolygonParams3D& p, double magnitude, SplitMix64& rng);

struct CliResult {
  int exit_code = -1;
  std::string output;  // stdout + stderr
};

/// Runs the rotsym CLI (path baked in at build time) with the given
/// argument string.
CliResult run_cli(const std::string& args);

/// Fresh scratch directory under the system temp root.
std::string make_temp_dir(const std::string& tag);

}  // namespace rotsym::test
