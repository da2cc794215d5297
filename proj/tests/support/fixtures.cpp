#include "support/fixtures.hpp"

#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <numbers>
#include <stdexcept>

#ifndef ROTSYM_CLI_PATH
#define ROTSYM_CLI_PATH "rotsym"
#endif

namespace rotsym::test {

std::pair<Scene, Scene> loss_fixture() {
  Scene gt;
  gt.id = "fixture";
  gt.width = 1000;
  gt.height = 800;

  Polygon2D p1;
  p1.group = RotationGroup::C4;
  p1.center = {500.0, 400.0};
  p1.vertices = {{500.0, 500.0}, {400.0, 400.0}, {500.0, 300.0}, {600.0, 400.0}};
  gt.polygons.push_back(p1);

  Polygon2D p2;
  p2.group = RotationGroup::C3;
  p2.center = {300.0, 300.0};
  p2.vertices = {{350.0, 300.0}, {275.0, 343.30126953125}, {275.0, 256.69873046875}};
  gt.polygons.push_back(p2);

  Scene pred = gt;
  pred.polygons.clear();

  Polygon2D a;  // matches P1; vertices shuffled
  a.group = RotationGroup::C4;
  a.center = {510.0, 408.0};
  a.vertices = {{398.0, 402.0}, {604.0, 403.0}, {505.0, 498.0}, {502.0, 296.0}};
  a.scores = {{RotationGroup::C4, 0.8}, {RotationGroup::C3, 0.05}, {RotationGroup::C2, 0.1}};
  pred.polygons.push_back(a);

  Polygon2D b;  // matches P2; vertices shuffled
  b.group = RotationGroup::C3;
  b.center = {290.0, 310.0};
  b.vertices = {{277.0, 341.30126953125}, {348.0, 304.0}, {272.0, 254.69873046875}};
  b.scores = {{RotationGroup::C3, 0.6}, {RotationGroup::C4, 0.02}, {RotationGroup::C2, 0.03}};
  pred.polygons.push_back(b);

  Polygon2D c;  // spurious; absorbs the no-object row
  c.group = RotationGroup::C2;
  c.center = {800.0, 600.0};
  c.vertices = {{780.0, 590.0}, {820.0, 590.0}, {820.0, 610.0}, {780.0, 610.0}};
  c.scores = {{RotationGroup::C2, 0.3}, {RotationGroup::C4, 0.01}, {RotationGroup::C3, 0.02}};
  pred.polygons.push_back(c);

  return {gt, pred};
}

double loss_fixture_oracle() {
  const double w = 1000.0;
  const double h = 800.0;

  // P1 <-> A. Correspondence: (500,500)->(505,498), (400,400)->(398,402),
  // (500,300)->(502,296), (600,400)->(604,403).
  const double center_p1 = -std::log(0.8) + 10.0 / w + 8.0 / h;
  const double vertex_p1 = (5.0 / w + 2.0 / h) + (2.0 / w + 2.0 / h) +
                           (2.0 / w + 4.0 / h) + (4.0 / w + 3.0 / h);

  // P2 <-> B. Correspondence: (350,300)->(348,304),
  // (275,343.30126953125)->(277,341.30126953125),
  // (275,256.69873046875)->(272,254.69873046875).
  const double center_p2 = -std::log(0.6) + 10.0 / w + 10.0 / h;
  const double vertex_p2 = (2.0 / w + 4.0 / h) + (2.0 / w + 2.0 / h) + (3.0 / w + 2.0 / h);

  // Padding row <-> C: p(no object) = 1 - max score = 0.7.
  const double no_object = -std::log(1.0 - 0.3);

  return center_p1 + vertex_p1 + center_p2 + vertex_p2 + no_object;
}

PolygonParams3D jitter_params(const PolygonParams3D& p, double magnitude, SplitMix64& rng) {
  PolygonParams3D out = p;
  out.center.x *= 1.0 + magnitude * rng.gaussian();
  out.center.y *= 1.0 + magnitude * rng.gaussian();
  out.center.z *= 1.0 + magnitude * rng.gaussian();
  out.seed.x *= 1.0 + magnitude * rng.gaussian();
  out.seed.y *= 1.0 + magnitude * rng.gaussian();
  out.seed.z *= 1.0 + magnitude * rng.gaussian();

  const Vector3 axis = normalize_axis(p.axis);
  Vector3 perp;
  while (true) {
    const Vector3 g{rng.gaussian(), rng.gaussian(), rng.gaussian()};
    perp = g - axis * dot(axis, g);
    const double n = perp.norm();
    if (n > 1e-6) {
      perp = perp / n;
      break;
    }
  }
  out.axis = rodrigues_rotate(axis, perp, magnitude * rng.gaussian());
  if (p.group == RotationGroup::C2) {
    constexpr double kHalfPi = std::numbers::pi / 2.0;
    out.angle_bias = std::clamp(p.angle_bias * (1.0 + magnitude * rng.gaussian()), 0.02,
                                kHalfPi - 0.02);
  }
  return out;
}

CliResult run_cli(const std::string& args) {
  const std::string cmd = std::string(ROTSYM_CLI_PATH) + " " + args + " 2>&1";
  FILE* pipe = popen(cmd.c_str(), "r");
  if (pipe == nullptr) throw std::runtime_error("popen failed for: " + cmd);
  CliResult result;
  char buf[4096];
  std::size_t n = 0;
  while ((n = fread(buf, 1, sizeof(buf), pipe)) > 0) {
    result.output.append(buf, n);
  }
  const int status = pclose(pipe);
  result.exit_code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  return result;
}

std::string make_temp_dir(const std::string& tag) {
  std::string tmpl = "/tmp/rotsym_" + tag + "_XXXXXX";
  if (mkdtemp(tmpl.data()) == nullptr) {
    throw std::runtime_error("mkdtemp failed");
  }
  return tmpl;
}

}  // namespace rotsym::test
