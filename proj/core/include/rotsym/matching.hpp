#pragma once

#include <span>
#include <utility>
#include <vector>

#include "rotsym/scene.hpp"
#include "rotsym/types.hpp"

namespace rotsym {

/// Dense row-major matrix of doubles, just big enough for cost matrices
/// and Jacobians.
struct Matrix {
  int rows = 0;
  int cols = 0;
  std::vector<double> data;

  Matrix() = default;
  Matrix(int r, int c, double fill = 0.0)
      : rows(r), cols(c), data(static_cast<std::size_t>(r) * c, fill) {}

  double& at(int r, int c) { return data[static_cast<std::size_t>(r) * cols + c]; }
  double at(int r, int c) const { return data[static_cast<std::size_t>(r) * cols + c]; }
};

/// A minimum-cost injection of rows into columns. Pairs are listed by
/// ascending row; total_cost is the sum of matrix entries at the pairs.
struct Assignment {
  std::vector<std::pair<int, int>> pairs;
  double total_cost = 0.0;
};

struct MatchConfig {
  double reg_weight = 10.0;       // weight on the l1 center distance in the matching cost
  bool normalize_coords = true;   // divide pixel coordinates by image width/height
  double no_object_weight = 1.0;  // weight of the no-object term for padded rows
};

/// Log arguments are clamped to this floor so degenerate confidences keep
/// losses finite.
inline constexpr double kLogClamp = 1e-12;

/// Exact minimum-cost assignment of rows to columns (rows <= cols). Among
/// equal-cost optima the lexicographically smallest pair list wins.
/// Throws ShapeError on rows > cols or non-finite entries.
Assignment solve_assignment(const Matrix& cost);

/// Matching cost between ground-truth instances (rows, padded with
/// no-object entries up to the prediction count) and predictions:
///   row i real:  -p_hat_j(g_i) + reg_weight * |c_i - c_j|_1
///   row i padded: 0
/// Coordinates are normalized by the image dimensions when configured.
/// Throws ShapeError when gt outnumbers pred, MissingScore when a
/// prediction lacks the confidence for a ground-truth group.
Matrix center_cost_matrix(std::span<const Polygon2D> gt, std::span<const Polygon2D> pred,
                          const MatchConfig& cfg, double image_w, double image_h);

/// Rotation center matching: the optimal full bijection over the padded
/// cost matrix, no-object rows included.
Assignment match_centers(std::span<const Polygon2D> gt, std::span<const Polygon2D> pred,
                         const MatchConfig& cfg, double image_w, double image_h);

/// Rotation vertex matching: the bijection between two equally sized
/// vertex lists minimizing the summed l1 distance.
Assignment match_vertices(std::span<const Point2D> gt_vertices,
                          std::span<const Point2D> pred_vertices);

/// -log p_hat(g_gt) + |c - c_hat|_1 for one matched pair.
double center_loss(const Polygon2D& gt, const Polygon2D& pred, const MatchConfig& cfg,
                   double image_w, double image_h);

/// Summed l1 vertex distance under a given vertex correspondence.
double vertex_loss(std::span<const Point2D> gt_vertices, std::span<const Point2D> pred_vertices,
                   const Assignment& vertex_pairs, const MatchConfig& cfg, double image_w,
                   double image_h);

/// Full set loss for a scene pair: center matching, then per-pair center
/// and vertex losses; predictions matched to padding contribute
/// no_object_weight * -log p_hat(no object).
double total_loss(const Scene& gt, const Scene& pred, const MatchConfig& cfg);

}  // namespace rotsym
