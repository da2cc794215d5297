#include <doctest.h>

#include <cmath>

#include "rotsym/matching.hpp"
#include "rotsym/rng.hpp"
#include "support/fixtures.hpp"
#include "support/oracles.hpp"

using namespace rotsym;

namespace {

Matrix random_matrix(SplitMix64& rng, int rows, int cols, bool integer_valued = false) {
  Matrix m(rows, cols);
  for (int r = 0; r < rows; ++r) {
    for (int c = 0; c < cols; ++c) {
      m.at(r, c) = integer_valued ? static_cast<double>(rng.uniform_int(0, 20))
                                  : rng.uniform(-10, 10);
    }
  }
  return m;
}

Polygon2D make_pred(double u, double v, RotationGroup g, double score) {
  Polygon2D p;
  p.center = {u, v};
  p.group = g;
  p.scores[g] = score;
  return p;
}

Polygon2D make_gt(double u, double v, RotationGroup g) {
  Polygon2D p;
  p.center = {u, v};
  p.group = g;
  return p;
}

}  // namespace

TEST_CASE("solve_assignment: fixed examples") {
  Matrix diag(2, 2);
  diag.at(0, 0) = 0;
  diag.at(0, 1) = 5;
  diag.at(1, 0) = 5;
  diag.at(1, 1) = 0;
  Assignment a = solve_assignment(diag);
  CHECK(a.pairs == std::vector<std::pair<int, int>>{{0, 0}, {1, 1}});
  CHECK(a.total_cost == 0.0);

  Matrix cross(2, 2);
  cross.at(0, 0) = 1;
  cross.at(0, 1) = 2;
  cross.at(1, 0) = 2;
  cross.at(1, 1) = 4;
  a = solve_assignment(cross);
  CHECK(a.pairs == std::vector<std::pair<int, int>>{{0, 1}, {1, 0}});
  CHECK(a.total_cost == 4.0);
}

TEST_CASE("solve_assignment: shape and finiteness errors") {
  CHECK_THROWS_AS(solve_assignment(Matrix(3, 2)), ShapeError);
  Matrix bad(2, 2);
  bad.at(1, 1) = std::numeric_limits<double>::infinity();
  CHECK_THROWS_AS(solve_assignment(bad), ShapeError);
  bad.at(1, 1) = std::nan("");
  CHECK_THROWS_AS(solve_assignment(bad), ShapeError);
  CHECK(solve_assignment(Matrix(0, 4)).pairs.empty());
}

TEST_CASE("solve_assignment equals brute force on random matrices") {
  SplitMix64 rng(101);
  for (int trial = 0; trial < 300; ++trial) {
    const int rows = rng.uniform_int(1, 6);
    const int cols = rng.uniform_int(rows, 6);
    const Matrix m = random_matrix(rng, rows, cols);
    const Assignment fast = solve_assignment(m);
    const Assignment slow = test::brute_force_assignment(m);
    CHECK(fast.total_cost == slow.total_cost);
    CHECK(fast.pairs == slow.pairs);
  }
}

TEST_CASE("solve_assignment: lexicographic tie-breaking") {
  // all-zero matrices are one big tie; rows take columns in order
  Matrix zeros(3, 5);
  CHECK(solve_assignment(zeros).pairs ==
        std::vector<std::pair<int, int>>{{0, 0}, {1, 1}, {2, 2}});

  // integer-valued duplicates: exact arithmetic, compare with brute force
  SplitMix64 rng(103);
  for (int trial = 0; trial < 300; ++trial) {
    const int rows = rng.uniform_int(1, 5);
    const int cols = rng.uniform_int(rows, 6);
    Matrix m = random_matrix(rng, rows, cols, /*integer_valued=*/true);
    for (int r = 0; r < rows; ++r) {
      for (int c = 0; c < cols; ++c) m.at(r, c) = std::fmod(m.at(r, c), 3.0);  // force ties
    }
    const Assignment fast = solve_assignment(m);
    const Assignment slow = test::brute_force_assignment(m);
    CHECK(fast.total_cost == slow.total_cost);
    CHECK(fast.pairs == slow.pairs);
  }
}

TEST_CASE("adding a constant to every cost entry keeps the argmin") {
  SplitMix64 rng(107);
  for (int trial = 0; trial < 100; ++trial) {
    const int n = rng.uniform_int(2, 6);
    const Matrix m = random_matrix(rng, n, n, /*integer_valued=*/true);
    const double shift = static_cast<double>(rng.uniform_int(1, 9));
    Matrix shifted = m;
    for (double& v : shifted.data) v += shift;
    const Assignment base = solve_assignment(m);
    const Assignment moved = solve_assignment(shifted);
    CHECK(base.pairs == moved.pairs);
    CHECK(moved.total_cost == base.total_cost + n * shift);  // exact: small integers
  }
}

TEST_CASE("center_cost_matrix: exact hit and padding rows") {
  const MatchConfig cfg;  // reg_weight 10, normalized
  std::vector<Polygon2D> gt = {make_gt(500, 500, RotationGroup::C4)};
  std::vector<Polygon2D> pred = {make_pred(500, 500, RotationGroup::C4, 1.0),
                                 make_pred(100, 100, RotationGroup::C4, 0.25)};
  const Matrix cost = center_cost_matrix(gt, pred, cfg, 1000, 1000);
  REQUIRE(cost.rows == 2);
  REQUIRE(cost.cols == 2);
  CHECK(cost.at(0, 0) == doctest::Approx(-1.0).epsilon(1e-15));
  CHECK(cost.at(1, 0) == 0.0);  // padded no-object row
  CHECK(cost.at(1, 1) == 0.0);
}

TEST_CASE("center_cost_matrix: the two-prediction arithmetic example") {
  MatchConfig cfg;
  cfg.reg_weight = 1.0;
  cfg.normalize_coords = false;
  std::vector<Polygon2D> gt = {make_gt(100, 100, RotationGroup::C4)};
  std::vector<Polygon2D> pred = {make_pred(101, 100, RotationGroup::C4, 0.9),
                                 make_pred(300, 300, RotationGroup::C4, 0.8)};
  const Matrix cost = center_cost_matrix(gt, pred, cfg, 0, 0);
  CHECK(cost.at(0, 0) == doctest::Approx(0.1).epsilon(1e-12));
  CHECK(cost.at(0, 1) == doctest::Approx(399.2).epsilon(1e-12));
  const Assignment sigma = match_centers(gt, pred, cfg, 0, 0);
  CHECK(sigma.pairs == std::vector<std::pair<int, int>>{{0, 0}, {1, 1}});
}

TEST_CASE("center_cost_matrix: errors") {
  const MatchConfig cfg;
  std::vector<Polygon2D> gt = {make_gt(0, 0, RotationGroup::C4),
                               make_gt(1, 1, RotationGroup::C3)};
  std::vector<Polygon2D> one_pred = {make_pred(0, 0, RotationGroup::C4, 0.5)};
  CHECK_THROWS_AS(center_cost_matrix(gt, one_pred, cfg, 100, 100), ShapeError);

  std::vector<Polygon2D> two_preds = {make_pred(0, 0, RotationGroup::C4, 0.5),
                                      make_pred(1, 1, RotationGroup::C4, 0.5)};
  CHECK_THROWS_AS(center_cost_matrix(gt, two_preds, cfg, 100, 100), MissingScore);
}

TEST_CASE("match_centers: identity on exact predictions, all-padding on empty gt") {
  const MatchConfig cfg;
  std::vector<Polygon2D> gt = {make_gt(100, 100, RotationGroup::C4),
                               make_gt(700, 500, RotationGroup::C3)};
  std::vector<Polygon2D> pred = {make_pred(100, 100, RotationGroup::C4, 1.0),
                                 make_pred(700, 500, RotationGroup::C3, 1.0)};
  pred[0].scores[RotationGroup::C3] = 0.0;
  pred[1].scores[RotationGroup::C4] = 0.0;
  CHECK(match_centers(gt, pred, cfg, 1000, 800).pairs ==
        std::vector<std::pair<int, int>>{{0, 0}, {1, 1}});

  CHECK(match_centers({}, pred, cfg, 1000, 800).pairs ==
        std::vector<std::pair<int, int>>{{0, 0}, {1, 1}});
}

TEST_CASE("match_vertices: identity, cyclic shift, brute force") {
  std::vector<Point2D> square = {{0, 0}, {1, 0}, {1, 1}, {0, 1}};
  Assignment rho = match_vertices(square, square);
  CHECK(rho.total_cost == 0.0);
  CHECK(rho.pairs == std::vector<std::pair<int, int>>{{0, 0}, {1, 1}, {2, 2}, {3, 3}});

  std::vector<Point2D> rotated = {{0, 1}, {0, 0}, {1, 0}, {1, 1}};
  rho = match_vertices(square, rotated);
  CHECK(rho.total_cost == 0.0);
  CHECK(rho.pairs == std::vector<std::pair<int, int>>{{0, 1}, {1, 2}, {2, 3}, {3, 0}});

  SplitMix64 rng(113);
  for (int trial = 0; trial < 100; ++trial) {
    std::vector<Point2D> a(5), b(5);
    for (int i = 0; i < 5; ++i) {
      a[i] = {rng.uniform(0, 100), rng.uniform(0, 100)};
      b[i] = {rng.uniform(0, 100), rng.uniform(0, 100)};
    }
    Matrix cost(5, 5);
    for (int i = 0; i < 5; ++i) {
      for (int j = 0; j < 5; ++j) cost.at(i, j) = l1_distance(a[i], b[j]);
    }
    // l1 costs carry exact real-valued ties (crossing pairs sum equally), so
    // two optimal pairings can differ; their float totals agree to rounding.
    const Assignment fast = match_vertices(a, b);
    const Assignment slow = test::brute_force_assignment(cost);
    CHECK(fast.total_cost == doctest::Approx(slow.total_cost).epsilon(1e-12));
  }
  CHECK_THROWS_AS(match_vertices(square, std::vector<Point2D>{{0, 0}}), ShapeError);
}

TEST_CASE("match_vertices cost is invariant under input permutations") {
  SplitMix64 rng(127);
  std::vector<Point2D> a(6), b(6);
  for (int i = 0; i < 6; ++i) {
    a[i] = {rng.uniform(0, 50), rng.uniform(0, 50)};
    b[i] = {rng.uniform(0, 50), rng.uniform(0, 50)};
  }
  const double base = match_vertices(a, b).total_cost;
  for (int trial = 0; trial < 20; ++trial) {
    std::vector<Point2D> pa = a, pb = b;
    for (int i = 5; i > 0; --i) {
      std::swap(pa[i], pa[rng.uniform_int(0, i)]);
      std::swap(pb[i], pb[rng.uniform_int(0, i)]);
    }
    CHECK(match_vertices(pa, pb).total_cost == doctest::Approx(base).epsilon(1e-12));
  }
}

TEST_CASE("center_loss arithmetic") {
  const MatchConfig cfg;
  Polygon2D gt = make_gt(500, 400, RotationGroup::C4);
  Polygon2D pred = make_pred(500, 400, RotationGroup::C4, 1.0);
  CHECK(center_loss(gt, pred, cfg, 1000, 800) == 0.0);

  pred.scores[RotationGroup::C4] = 0.5;
  CHECK(center_loss(gt, pred, cfg, 1000, 800) ==
        doctest::Approx(std::log(2.0)).epsilon(1e-12));

  pred.scores[RotationGroup::C4] = 0.0;  // clamped, stays finite
  CHECK(std::isfinite(center_loss(gt, pred, cfg, 1000, 800)));
}

TEST_CASE("total_loss: zero iff predictions are exact and fully confident") {
  auto [gt, pred] = test::loss_fixture();
  Scene exact = gt;
  for (Polygon2D& poly : exact.polygons) {
    poly.scores = {{RotationGroup::C3, 0.0}, {RotationGroup::C4, 0.0}};
    poly.scores[poly.group] = 1.0;
  }
  CHECK(total_loss(gt, exact, MatchConfig{}) == 0.0);

  // any perturbation makes it positive
  exact.polygons[0].center.u += 1.0;
  CHECK(total_loss(gt, exact, MatchConfig{}) > 0.0);
}

TEST_CASE("total_loss matches the hand-written scalar oracle") {
  auto [gt, pred] = test::loss_fixture();

  // the fixture's intended matching is what the solver finds
  const Assignment sigma = match_centers(gt.polygons, pred.polygons, MatchConfig{},
                                         gt.width, gt.height);
  CHECK(sigma.pairs == std::vector<std::pair<int, int>>{{0, 0}, {1, 1}, {2, 2}});

  const double loss = total_loss(gt, pred, MatchConfig{});
  CHECK(loss == doctest::Approx(test::loss_fixture_oracle()).epsilon(1e-13));
  CHECK(std::abs(loss - test::loss_fixture_oracle()) <= 1e-12);
}

TEST_CASE("total_loss: no-object weight scales the padding term") {
  auto [gt, pred] = test::loss_fixture();
  MatchConfig heavy;
  heavy.no_object_weight = 3.0;
  const double base = total_loss(gt, pred, MatchConfig{});
  const double heavy_loss = total_loss(gt, pred, heavy);
  const double no_object_term = -std::log(0.7);
  CHECK(heavy_loss - base == doctest::Approx(2.0 * no_object_term).epsilon(1e-12));
}
