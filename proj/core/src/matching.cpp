#include "rotsym/matching.hpp"

#include <cmath>
#include <limits>
#include <numeric>
#include <string>

namespace rotsym {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

/// Shortest-augmenting-path assignment (Jonker-Volgenant style potentials)
/// over a subset of rows and columns of the full matrix. row_ids must be
/// ascending; the returned total is summed in that order.
struct CoreResult {
  std::vector<int> row_to_col;  // positions into col_ids
  double total = 0.0;
};

CoreResult assign_core(const Matrix& cost, const std::vector<int>& row_ids,
                       const std::vector<int>& col_ids) {
  const int n = static_cast<int>(row_ids.size());
  const int m = static_cast<int>(col_ids.size());
  CoreResult res;
  res.row_to_col.assign(n, -1);
  if (n == 0) return res;

  std::vector<double> u(n + 1, 0.0), v(m + 1, 0.0);
  std::vector<int> p(m + 1, 0), way(m + 1, 0);
  std::vector<double> minv(m + 1, 0.0);
  std::vector<char> used(m + 1, 0);

  for (int i = 1; i <= n; ++i) {
    p[0] = i;
    int j0 = 0;
    std::fill(minv.begin(), minv.end(), kInf);
    std::fill(used.begin(), used.end(), 0);
    do {
      used[j0] = 1;
      const int i0 = p[j0];
      int j1 = -1;
      double delta = kInf;
      for (int j = 1; j <= m; ++j) {
        if (used[j]) continue;
        const double cur = cost.at(row_ids[i0 - 1], col_ids[j - 1]) - u[i0] - v[j];
        if (cur < minv[j]) {
          minv[j] = cur;
          way[j] = j0;
        }
        if (minv[j] < delta) {
          delta = minv[j];
          j1 = j;
        }
      }
      for (int j = 0; j <= m; ++j) {
        if (used[j]) {
          u[p[j]] += delta;
          v[j] -= delta;
        } else {
          minv[j] -= delta;
        }
      }
      j0 = j1;
    } while (p[j0] != 0);
    do {
      const int j1 = way[j0];
      p[j0] = p[j1];
      j0 = j1;
    } while (j0);
  }

  for (int j = 1; j <= m; ++j) {
    if (p[j] != 0) res.row_to_col[p[j] - 1] = j - 1;
  }
  for (int r = 0; r < n; ++r) {
    res.total += cost.at(row_ids[r], col_ids[res.row_to_col[r]]);
  }
  return res;
}

double normalized_l1(const Point2D& a, const Point2D& b, const MatchConfig& cfg,
                     double image_w, double image_h) {
  if (!cfg.normalize_coords) return l1_distance(a, b);
  return std::abs(a.u - b.u) / image_w + std::abs(a.v - b.v) / image_h;
}

}  // namespace

Assignment solve_assignment(const Matrix& cost) {
  if (cost.rows > cost.cols) {
    throw ShapeError("solve_assignment: " + std::to_string(cost.rows) + " rows exceed " +
                     std::to_string(cost.cols) + " columns");
  }
  for (int r = 0; r < cost.rows; ++r) {
    for (int c = 0; c < cost.cols; ++c) {
      if (!std::isfinite(cost.at(r, c))) {
        throw ShapeError("solve_assignment: non-finite cost at (" + std::to_string(r) + ", " +
                         std::to_string(c) + ")");
      }
    }
  }

  Assignment out;
  const int n = cost.rows;
  const int m = cost.cols;
  if (n == 0) return out;

  // Fix rows in ascending order; per row take the smallest free column that
  // still completes to the optimal total of the remaining subproblem. This
  // makes ties resolve to the lexicographically smallest pair list.
  std::vector<char> col_used(m, 0);
  std::vector<int> chosen(n, -1);
  for (int i = 0; i < n; ++i) {
    std::vector<int> rows_left;
    rows_left.reserve(n - i);
    for (int r = i; r < n; ++r) rows_left.push_back(r);
    std::vector<int> free_cols;
    free_cols.reserve(m);
    for (int j = 0; j < m; ++j) {
      if (!col_used[j]) free_cols.push_back(j);
    }

    const double target = assign_core(cost, rows_left, free_cols).total;
    const std::vector<int> rows_rest(rows_left.begin() + 1, rows_left.end());

    int pick = -1;
    double fallback_total = kInf;
    int fallback_j = -1;
    for (const int j : free_cols) {
      std::vector<int> cols_rest;
      cols_rest.reserve(free_cols.size() - 1);
      for (const int j2 : free_cols) {
        if (j2 != j) cols_rest.push_back(j2);
      }
      const double completion =
          rows_rest.empty() ? 0.0 : assign_core(cost, rows_rest, cols_rest).total;
      const double total = cost.at(i, j) + completion;
      if (total == target) {
        pick = j;
        break;
      }
      if (total < fallback_total) {
        fallback_total = total;
        fallback_j = j;
      }
    }
    if (pick < 0) pick = fallback_j;  // float-rounding gap between subproblem sums
    chosen[i] = pick;
    col_used[pick] = 1;
  }

  out.pairs.reserve(n);
  for (int i = 0; i < n; ++i) {
    out.pairs.emplace_back(i, chosen[i]);
    out.total_cost += cost.at(i, chosen[i]);
  }
  return out;
}

Matrix center_cost_matrix(std::span<const Polygon2D> gt, std::span<const Polygon2D> pred,
                          const MatchConfig& cfg, double image_w, double image_h) {
  const int n_gt = static_cast<int>(gt.size());
  const int n_pred = static_cast<int>(pred.size());
  if (n_gt > n_pred) {
    throw ShapeError("center_cost_matrix: " + std::to_string(n_gt) +
                     " ground-truth instances but only " + std::to_string(n_pred) +
                     " predictions");
  }
  if (cfg.normalize_coords && (!(image_w > 0.0) || !(image_h > 0.0))) {
    throw ConfigError("center_cost_matrix: image dimensions must be positive");
  }

  Matrix cost(n_pred, n_pred, 0.0);  // rows past n_gt stay zero (no-object padding)
  for (int i = 0; i < n_gt; ++i) {
    for (int j = 0; j < n_pred; ++j) {
      const double dist = normalized_l1(gt[i].center, pred[j].center, cfg, image_w, image_h);
      cost.at(i, j) = -pred[j].score_for(gt[i].group) + cfg.reg_weight * dist;
    }
  }
  return cost;
}

Assignment match_centers(std::span<const Polygon2D> gt, std::span<const Polygon2D> pred,
                         const MatchConfig& cfg, double image_w, double image_h) {
  return solve_assignment(center_cost_matrix(gt, pred, cfg, image_w, image_h));
}

Assignment match_vertices(std::span<const Point2D> gt_vertices,
                          std::span<const Point2D> pred_vertices) {
  if (gt_vertices.size() != pred_vertices.size()) {
    throw ShapeError("match_vertices: vertex counts differ (" +
                     std::to_string(gt_vertices.size()) + " vs " +
                     std::to_string(pred_vertices.size()) + ")");
  }
  const int n = static_cast<int>(gt_vertices.size());
  Matrix cost(n, n);
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) {
      cost.at(i, j) = l1_distance(gt_vertices[i], pred_vertices[j]);
    }
  }
  return solve_assignment(cost);
}

double center_loss(const Polygon2D& gt, const Polygon2D& pred, const MatchConfig& cfg,
                   double image_w, double image_h) {
  const double p = std::max(pred.score_for(gt.group), kLogClamp);
  return -std::log(p) + normalized_l1(gt.center, pred.center, cfg, image_w, image_h);
}

double vertex_loss(std::span<const Point2D> gt_vertices, std::span<const Point2D> pred_vertices,
                   const Assignment& vertex_pairs, const MatchConfig& cfg, double image_w,
                   double image_h) {
  double total = 0.0;
  for (const auto& [i, j] : vertex_pairs.pairs) {
    total += normalized_l1(gt_vertices[i], pred_vertices[j], cfg, image_w, image_h);
  }
  return total;
}

double total_loss(const Scene& gt, const Scene& pred, const MatchConfig& cfg) {
  const double w = gt.width;
  const double h = gt.height;
  const Assignment sigma = match_centers(gt.polygons, pred.polygons, cfg, w, h);

  double total = 0.0;
  for (const auto& [row, col] : sigma.pairs) {
    if (row < static_cast<int>(gt.polygons.size())) {
      const Polygon2D& g = gt.polygons[row];
      const Polygon2D& d = pred.polygons[col];
      total += center_loss(g, d, cfg, w, h);
      if (!g.vertices.empty()) {
        if (d.vertices.size() != g.vertices.size()) {
          throw ShapeError("total_loss: matched pair has mismatched vertex counts; "
                           "the group fixes both sides");
        }
        const Assignment rho = match_vertices(g.vertices, d.vertices);
        total += vertex_loss(g.vertices, d.vertices, rho, cfg, w, h);
      }
    } else {
      const double p = std::max(pred.polygons[col].no_object_score(), kLogClamp);
      total += cfg.no_object_weight * -std::log(p);
    }
  }
  return total;
}

}  // namespace rotsym
