#include "support/oracles.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

namespace rotsym::test {

Mat3x3 axis_angle_matrix(const Vector3& a, double angle) {
  const double c = std::cos(angle);
  const double s = std::sin(angle);
  const double o = 1.0 - c;
  Mat3x3 R;
  R.m[0][0] = c + o * a.x * a.x;
  R.m[0][1] = o * a.x * a.y - s * a.z;
  R.m[0][2] = o * a.x * a.z + s * a.y;
  R.m[1][0] = o * a.y * a.x + s * a.z;
  R.m[1][1] = c + o * a.y * a.y;
  R.m[1][2] = o * a.y * a.z - s * a.x;
  R.m[2][0] = o * a.z * a.x - s * a.y;
  R.m[2][1] = o * a.z * a.y + s * a.x;
  R.m[2][2] = c + o * a.z * a.z;
  return R;
}

namespace {

void enumerate_assignments(const Matrix& cost, int row, std::vector<char>& used,
                           std::vector<int>& current, double sum, double& best,
                           std::vector<int>& best_cols) {
  if (row == cost.rows) {
    if (sum < best) {
      best = sum;
      best_cols = current;
    }
    return;
  }
  for (int j = 0; j < cost.cols; ++j) {
    if (used[j]) continue;
    used[j] = 1;
    current[row] = j;
    enumerate_assignments(cost, row + 1, used, current, sum + cost.at(row, j), best, best_cols);
    used[j] = 0;
  }
}

}  // namespace

Assignment brute_force_assignment(const Matrix& cost) {
  std::vector<char> used(cost.cols, 0);
  std::vector<int> current(cost.rows, -1);
  std::vector<int> best_cols(cost.rows, -1);
  double best = std::numeric_limits<double>::infinity();
  enumerate_assignments(cost, 0, used, current, 0.0, best, best_cols);

  Assignment out;
  for (int i = 0; i < cost.rows; ++i) {
    out.pairs.emplace_back(i, best_cols[i]);
    out.total_cost += cost.at(i, best_cols[i]);
  }
  return out;
}

namespace {

struct RefDet {
  double score;
  bool tp;
};

double ref_score(const Polygon2D& poly) {
  return poly.scores.empty() ? 1.0 : poly.scores.at(poly.group);
}

std::vector<std::pair<int, int>> permutation_match(const std::vector<Point2D>& gt,
                                                   const std::vector<Point2D>& pred) {
  if (gt.empty() || pred.empty()) return {};
  std::vector<std::pair<int, int>> out;
  if (gt.size() <= pred.size()) {
    Matrix cost(static_cast<int>(gt.size()), static_cast<int>(pred.size()));
    for (int i = 0; i < cost.rows; ++i) {
      for (int j = 0; j < cost.cols; ++j) {
        cost.at(i, j) = std::hypot(gt[i].u - pred[j].u, gt[i].v - pred[j].v);
      }
    }
    out = brute_force_assignment(cost).pairs;
  } else {
    Matrix cost(static_cast<int>(pred.size()), static_cast<int>(gt.size()));
    for (int i = 0; i < cost.rows; ++i) {
      for (int j = 0; j < cost.cols; ++j) {
        cost.at(i, j) = std::hypot(pred[i].u - gt[j].u, pred[i].v - gt[j].v);
      }
    }
    for (const auto& [pj, gi] : brute_force_assignment(cost).pairs) out.emplace_back(gi, pj);
    std::sort(out.begin(), out.end());
  }
  return out;
}

std::vector<std::pair<int, int>> permutation_vertex_match(const std::vector<Point2D>& gt,
                                                          const std::vector<Point2D>& pred) {
  Matrix cost(static_cast<int>(gt.size()), static_cast<int>(pred.size()));
  for (int i = 0; i < cost.rows; ++i) {
    for (int j = 0; j < cost.cols; ++j) {
      cost.at(i, j) = std::abs(gt[i].u - pred[j].u) + std::abs(gt[i].v - pred[j].v);
    }
  }
  return brute_force_assignment(cost).pairs;
}

double ref_ap(std::vector<RefDet> dets, long n_gt) {
  if (n_gt <= 0) return 0.0;
  std::sort(dets.begin(), dets.end(),
            [](const RefDet& a, const RefDet& b) { return a.score > b.score; });
  std::vector<double> recalls;
  std::vector<double> precisions;
  long tp = 0;
  long fp = 0;
  for (std::size_t i = 0; i < dets.size(); ++i) {
    if (dets[i].tp) ++tp; else ++fp;
    const bool score_boundary = i + 1 == dets.size() || dets[i + 1].score != dets[i].score;
    if (score_boundary) {
      recalls.push_back(static_cast<double>(tp) / static_cast<double>(n_gt));
      precisions.push_back(static_cast<double>(tp) / static_cast<double>(tp + fp));
    }
  }
  for (int k = static_cast<int>(precisions.size()) - 2; k >= 0; --k) {
    precisions[k] = std::max(precisions[k], precisions[k + 1]);
  }
  double ap = 0.0;
  double prev = 0.0;
  for (std::size_t k = 0; k < recalls.size(); ++k) {
    ap += (recalls[k] - prev) * precisions[k];
    prev = recalls[k];
  }
  return ap;
}

struct RefGroupAccum {
  std::vector<RefDet> dets;
  long n_gt = 0;
  long n_pred = 0;
};

}  // namespace

EvalReport reference_evaluate(std::span<const Scene> gt, std::span<const Scene> pred,
                              double tau, int dilation_px, int n_thresholds) {
  EvalReport report;
  report.config.tau = tau;
  report.config.dilation_px = dilation_px;
  report.config.n_thresholds = n_thresholds;
  report.config.with_f1 = true;
  report.n_scenes = static_cast<long>(gt.size());

  std::map<RotationGroup, RefGroupAccum> centers;
  std::map<RotationGroup, RefGroupAccum> vertices;
  std::vector<long long> f1_tp(n_thresholds, 0), f1_fp(n_thresholds, 0), f1_fn(n_thresholds, 0);
  std::vector<double> thresholds(n_thresholds);
  for (int k = 0; k < n_thresholds; ++k) {
    thresholds[k] = static_cast<double>(k + 1) / static_cast<double>(n_thresholds + 1);
  }

  for (std::size_t si = 0; si < gt.size(); ++si) {
    const Scene& g = gt[si];
    const Scene* p = nullptr;
    for (const Scene& cand : pred) {
      if (cand.id == g.id) {
        p = &cand;
        break;
      }
    }
    if (p == nullptr) throw IdMismatch("reference evaluator: no prediction for " + g.id);
    report.n_gt_polygons += static_cast<long>(g.polygons.size());
    report.n_pred_polygons += static_cast<long>(p->polygons.size());
    const double thresh = tau * std::max(g.width, g.height);

    for (RotationGroup grp : kAllGroups) {
      std::vector<Point2D> gt_centers;
      std::vector<const Polygon2D*> gt_polys;
      std::vector<Point2D> pred_centers;
      std::vector<const Polygon2D*> pred_polys;
      for (const Polygon2D& poly : g.polygons) {
        if (poly.group == grp) {
          gt_centers.push_back(poly.center);
          gt_polys.push_back(&poly);
        }
      }
      for (const Polygon2D& poly : p->polygons) {
        if (poly.group == grp) {
          pred_centers.push_back(poly.center);
          pred_polys.push_back(&poly);
        }
      }
      if (gt_centers.empty() && pred_centers.empty()) continue;

      const auto pairs = permutation_match(gt_centers, pred_centers);

      RefGroupAccum& cacc = centers[grp];
      cacc.n_gt += static_cast<long>(gt_centers.size());
      cacc.n_pred += static_cast<long>(pred_centers.size());
      std::vector<char> matched_tp(pred_centers.size(), 0);
      for (const auto& [gi, pj] : pairs) {
        const double d = std::hypot(gt_centers[gi].u - pred_centers[pj].u,
                                    gt_centers[gi].v - pred_centers[pj].v);
        matched_tp[pj] = d < thresh;
      }
      for (std::size_t j = 0; j < pred_centers.size(); ++j) {
        cacc.dets.push_back({ref_score(*pred_polys[j]), matched_tp[j] != 0});
      }

      if (grp == RotationGroup::SO2) continue;
      RefGroupAccum& vacc = vertices[grp];
      for (const Polygon2D* gp : gt_polys) {
        vacc.n_gt += static_cast<long>(gp->vertices.size());
      }
      for (const auto& [gi, pj] : pairs) {
        const Polygon2D& gp = *gt_polys[gi];
        const Polygon2D& pp = *pred_polys[pj];
        vacc.n_pred += static_cast<long>(pp.vertices.size());
        const double score = ref_score(pp);
        for (const auto& [vk, vl] : permutation_vertex_match(gp.vertices, pp.vertices)) {
          const double d = std::hypot(gp.vertices[vk].u - pp.vertices[vl].u,
                                      gp.vertices[vk].v - pp.vertices[vl].v);
          vacc.dets.push_back({score, d < thresh});
        }
      }
    }

    // Pixel-level F1 from first principles: per-pixel distance test
    // against every center, no stamping.
    const double r2 = static_cast<double>(dilation_px) * dilation_px;
    for (int y = 0; y < g.height; ++y) {
      for (int x = 0; x < g.width; ++x) {
        double gt_val = 0.0;
        for (const Polygon2D& poly : g.polygons) {
          const double dx = x - poly.center.u;
          const double dy = y - poly.center.v;
          if (dx * dx + dy * dy <= r2) gt_val = std::max(gt_val, ref_score(poly));
        }
        double pred_val = 0.0;
        for (const Polygon2D& poly : p->polygons) {
          const double dx = x - poly.center.u;
          const double dy = y - poly.center.v;
          if (dx * dx + dy * dy <= r2) pred_val = std::max(pred_val, ref_score(poly));
        }
        if (gt_val == 0.0 && pred_val == 0.0) continue;
        for (int k = 0; k < n_thresholds; ++k) {
          const bool gpos = gt_val > thresholds[k];
          const bool ppos = pred_val > thresholds[k];
          if (gpos && ppos) ++f1_tp[k];
          if (!gpos && ppos) ++f1_fp[k];
          if (gpos && !ppos) ++f1_fn[k];
        }
      }
    }
  }

  auto finalize = [](std::map<RotationGroup, RefGroupAccum>& accum) {
    APResult result;
    double sum = 0.0;
    int n = 0;
    for (auto& [grp, acc] : accum) {
      APResult::GroupResult gr;
      gr.ap = ref_ap(std::move(acc.dets), acc.n_gt);
      gr.n_gt = acc.n_gt;
      gr.n_pred = acc.n_pred;
      result.per_group[grp] = gr;
      if (acc.n_gt > 0) {
        sum += gr.ap;
        ++n;
      }
    }
    result.mean = n > 0 ? sum / n : 0.0;
    return result;
  };
  report.center = finalize(centers);
  report.vertex = finalize(vertices);

  double best = 0.0;
  for (int k = 0; k < n_thresholds; ++k) {
    const long long denom = 2 * f1_tp[k] + f1_fp[k] + f1_fn[k];
    if (denom > 0) best = std::max(best, 2.0 * static_cast<double>(f1_tp[k]) / denom);
  }
  report.f1 = best;
  return report;
}

}  // namespace rotsym::test
