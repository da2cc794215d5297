#include "rotsym/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <string>

#include "rotsym/matching.hpp"
#include "rotsym/parallel.hpp"

namespace rotsym {

namespace {

struct Detection {
  double score = 0.0;
  int scene_ord = 0;
  int poly_ord = 0;
  int sub_ord = 0;
  bool tp = false;
};

bool detection_order(const Detection& a, const Detection& b) {
  if (a.score != b.score) return a.score > b.score;
  if (a.scene_ord != b.scene_ord) return a.scene_ord < b.scene_ord;
  if (a.poly_ord != b.poly_ord) return a.poly_ord < b.poly_ord;
  return a.sub_ord < b.sub_ord;
}

struct GroupAccum {
  std::vector<Detection> dets;
  long n_gt = 0;
  long n_pred = 0;
};

using GroupAccumMap = std::map<RotationGroup, GroupAccum>;

void merge_accum(GroupAccumMap& into, GroupAccumMap& from) {
  for (auto& [g, acc] : from) {
    GroupAccum& dst = into[g];
    dst.n_gt += acc.n_gt;
    dst.n_pred += acc.n_pred;
    dst.dets.insert(dst.dets.end(), acc.dets.begin(), acc.dets.end());
  }
}

/// All-points interpolated AP over confidence-ranked detections.
/// Detections with equal confidence enter the PR curve as one block, so
/// the result is independent of tie ordering.
double ap_from_detections(std::vector<Detection> dets, long n_gt) {
  if (n_gt <= 0) return 0.0;
  std::sort(dets.begin(), dets.end(), detection_order);

  std::vector<std::pair<double, double>> points;  // (recall, precision)
  long tp = 0;
  long fp = 0;
  std::size_t i = 0;
  while (i < dets.size()) {
    std::size_t j = i;
    while (j < dets.size() && dets[j].score == dets[i].score) {
      if (dets[j].tp) ++tp; else ++fp;
      ++j;
    }
    points.emplace_back(static_cast<double>(tp) / static_cast<double>(n_gt),
                        static_cast<double>(tp) / static_cast<double>(tp + fp));
    i = j;
  }
  for (int k = static_cast<int>(points.size()) - 2; k >= 0; --k) {
    points[k].second = std::max(points[k].second, points[k + 1].second);
  }
  double ap = 0.0;
  double prev_recall = 0.0;
  for (const auto& [recall, precision] : points) {
    ap += (recall - prev_recall) * precision;
    prev_recall = recall;
  }
  return ap;
}

/// Detection confidence of a prediction for a group. Score-less polygons
/// (ground truth re-evaluated as predictions) count as fully confident;
/// a populated score map missing its own group stays an error.
double detection_score(const Polygon2D& poly, RotationGroup grp) {
  if (poly.scores.empty()) return 1.0;
  return poly.score_for(grp);
}

/// Distance-only bipartite pairing of two point lists: the maximum
/// matching minimizing total Euclidean distance. Returns (gt, pred) index
/// pairs sorted by gt index.
std::vector<std::pair<int, int>> proximity_pairs(const std::vector<Point2D>& gt,
                                                 const std::vector<Point2D>& pred) {
  if (gt.empty() || pred.empty()) return {};
  std::vector<std::pair<int, int>> out;
  if (gt.size() <= pred.size()) {
    Matrix cost(static_cast<int>(gt.size()), static_cast<int>(pred.size()));
    for (int i = 0; i < cost.rows; ++i) {
      for (int j = 0; j < cost.cols; ++j) {
        cost.at(i, j) = euclidean_distance(gt[i], pred[j]);
      }
    }
    out = solve_assignment(cost).pairs;
  } else {
    Matrix cost(static_cast<int>(pred.size()), static_cast<int>(gt.size()));
    for (int i = 0; i < cost.rows; ++i) {
      for (int j = 0; j < cost.cols; ++j) {
        cost.at(i, j) = euclidean_distance(pred[i], gt[j]);
      }
    }
    for (const auto& [pj, gi] : solve_assignment(cost).pairs) {
      out.emplace_back(gi, pj);
    }
    std::sort(out.begin(), out.end());
  }
  return out;
}

void eval_scene_centers(const Scene& gt, const Scene& pred, double tau, int scene_ord,
                        GroupAccumMap& out) {
  const double thresh = tau * std::max(gt.width, gt.height);
  for (RotationGroup grp : kAllGroups) {
    std::vector<Point2D> gt_centers;
    std::vector<Point2D> pred_centers;
    std::vector<double> pred_scores;
    std::vector<int> pred_ords;
    for (const Polygon2D& poly : gt.polygons) {
      if (poly.group == grp) gt_centers.push_back(poly.center);
    }
    for (std::size_t i = 0; i < pred.polygons.size(); ++i) {
      const Polygon2D& poly = pred.polygons[i];
      if (poly.group != grp) continue;
      pred_centers.push_back(poly.center);
      pred_scores.push_back(detection_score(poly, grp));
      pred_ords.push_back(static_cast<int>(i));
    }
    if (gt_centers.empty() && pred_centers.empty()) continue;

    GroupAccum& acc = out[grp];
    acc.n_gt += static_cast<long>(gt_centers.size());
    acc.n_pred += static_cast<long>(pred_centers.size());

    std::vector<char> is_tp(pred_centers.size(), 0);
    for (const auto& [gi, pj] : proximity_pairs(gt_centers, pred_centers)) {
      is_tp[pj] = euclidean_distance(gt_centers[gi], pred_centers[pj]) < thresh;
    }
    for (std::size_t j = 0; j < pred_centers.size(); ++j) {
      acc.dets.push_back({pred_scores[j], scene_ord, pred_ords[j], 0, is_tp[j] != 0});
    }
  }
}

void eval_scene_vertices(const Scene& gt, const Scene& pred, double tau, int scene_ord,
                         GroupAccumMap& out) {
  const double thresh = tau * std::max(gt.width, gt.height);
  for (RotationGroup grp : kCyclicGroups) {
    std::vector<int> gt_polys;
    std::vector<int> pred_polys;
    for (std::size_t i = 0; i < gt.polygons.size(); ++i) {
      if (gt.polygons[i].group == grp) gt_polys.push_back(static_cast<int>(i));
    }
    for (std::size_t i = 0; i < pred.polygons.size(); ++i) {
      if (pred.polygons[i].group == grp) pred_polys.push_back(static_cast<int>(i));
    }
    if (gt_polys.empty() && pred_polys.empty()) continue;

    GroupAccum& acc = out[grp];
    for (const int gi : gt_polys) {
      acc.n_gt += static_cast<long>(gt.polygons[gi].vertices.size());
    }

    std::vector<Point2D> gt_centers;
    std::vector<Point2D> pred_centers;
    for (const int gi : gt_polys) gt_centers.push_back(gt.polygons[gi].center);
    for (const int pj : pred_polys) pred_centers.push_back(pred.polygons[pj].center);

    // Vertices enter the pool only for polygon pairs produced by the
    // center-proximity matching.
    for (const auto& [gi, pj] : proximity_pairs(gt_centers, pred_centers)) {
      const Polygon2D& g = gt.polygons[gt_polys[gi]];
      const Polygon2D& p = pred.polygons[pred_polys[pj]];
      if (g.vertices.size() != p.vertices.size()) {
        throw ShapeError("vertex_ap: matched " + std::string(group_name(grp)) +
                         " polygons with differing vertex counts in scene " + gt.id);
      }
      const double score = detection_score(p, grp);
      const Assignment rho = match_vertices(g.vertices, p.vertices);
      acc.n_pred += static_cast<long>(p.vertices.size());
      for (const auto& [k, l] : rho.pairs) {
        const bool tp = euclidean_distance(g.vertices[k], p.vertices[l]) < thresh;
        acc.dets.push_back({score, scene_ord, pred_polys[pj], k, tp});
      }
    }
  }
}

APResult finalize_ap(GroupAccumMap& accum) {
  APResult result;
  double sum = 0.0;
  int n_groups = 0;
  for (auto& [g, acc] : accum) {
    APResult::GroupResult gr;
    gr.ap = ap_from_detections(std::move(acc.dets), acc.n_gt);
    gr.n_gt = acc.n_gt;
    gr.n_pred = acc.n_pred;
    result.per_group[g] = gr;
    if (acc.n_gt > 0) {
      sum += gr.ap;
      ++n_groups;
    }
  }
  result.mean = n_groups > 0 ? sum / n_groups : 0.0;
  return result;
}

/// gt[i] pairs with pred[pred_index[i]]; ids must match one-to-one.
std::vector<int> pair_scenes_by_id(std::span<const Scene> gt, std::span<const Scene> pred) {
  if (gt.size() != pred.size()) {
    throw IdMismatch("scene counts differ: " + std::to_string(gt.size()) +
                     " ground truth vs " + std::to_string(pred.size()) + " predictions");
  }
  std::map<std::string, int> by_id;
  for (std::size_t i = 0; i < pred.size(); ++i) {
    if (!by_id.emplace(pred[i].id, static_cast<int>(i)).second) {
      throw IdMismatch("duplicate prediction scene id '" + pred[i].id + "'");
    }
  }
  std::vector<int> index(gt.size(), -1);
  std::map<std::string, bool> seen;
  for (std::size_t i = 0; i < gt.size(); ++i) {
    if (!seen.emplace(gt[i].id, true).second) {
      throw IdMismatch("duplicate ground-truth scene id '" + gt[i].id + "'");
    }
    const auto it = by_id.find(gt[i].id);
    if (it == by_id.end()) {
      throw IdMismatch("no prediction scene for id '" + gt[i].id + "'");
    }
    index[i] = it->second;
  }
  return index;
}

}  // namespace

APResult center_ap(std::span<const Scene> gt, std::span<const Scene> pred, double tau) {
  EvalConfig cfg;
  cfg.tau = tau;
  return evaluate(gt, pred, cfg).center;
}

APResult vertex_ap(std::span<const Scene> gt, std::span<const Scene> pred, double tau) {
  EvalConfig cfg;
  cfg.tau = tau;
  return evaluate(gt, pred, cfg).vertex;
}

ScoreMap render_score_map(const Scene& scene, int dilation_px, bool square) {
  if (dilation_px < 0) throw ConfigError("render_score_map: dilation must be >= 0");
  ScoreMap map(scene.width, scene.height);
  const double r = dilation_px;
  for (const Polygon2D& poly : scene.polygons) {
    const double s = poly.scores.empty()
                         ? 1.0
                         : std::clamp(poly.score_for(poly.group), 0.0, 1.0);
    const int x_lo = std::max(0, static_cast<int>(std::ceil(poly.center.u - r)));
    const int x_hi = std::min(scene.width - 1, static_cast<int>(std::floor(poly.center.u + r)));
    const int y_lo = std::max(0, static_cast<int>(std::ceil(poly.center.v - r)));
    const int y_hi = std::min(scene.height - 1, static_cast<int>(std::floor(poly.center.v + r)));
    for (int y = y_lo; y <= y_hi; ++y) {
      for (int x = x_lo; x <= x_hi; ++x) {
        const double dx = x - poly.center.u;
        const double dy = y - poly.center.v;
        const bool inside = square ? (std::abs(dx) <= r && std::abs(dy) <= r)
                                   : (dx * dx + dy * dy <= r * r);
        if (inside) map.at(x, y) = std::max(map.at(x, y), s);
      }
    }
  }
  return map;
}

F1Accumulator::F1Accumulator(int n_thresholds) {
  if (n_thresholds < 1) throw ConfigError("F1Accumulator: n_thresholds must be positive");
  thresholds_.resize(n_thresholds);
  for (int k = 0; k < n_thresholds; ++k) {
    thresholds_[k] = static_cast<double>(k + 1) / static_cast<double>(n_thresholds + 1);
  }
  tp_.assign(n_thresholds, 0);
  fp_.assign(n_thresholds, 0);
  fn_.assign(n_thresholds, 0);
}

void F1Accumulator::add(const ScoreMap& gt, const ScoreMap& pred) {
  if (gt.width != pred.width || gt.height != pred.height) {
    throw ShapeError("F1Accumulator: map dimensions differ");
  }
  for (std::size_t idx = 0; idx < gt.values.size(); ++idx) {
    const double gv = gt.values[idx];
    const double pv = pred.values[idx];
    if (gv == 0.0 && pv == 0.0) continue;
    // number of thresholds strictly below each value
    const int kp = static_cast<int>(
        std::lower_bound(thresholds_.begin(), thresholds_.end(), pv) - thresholds_.begin());
    const int kg = static_cast<int>(
        std::lower_bound(thresholds_.begin(), thresholds_.end(), gv) - thresholds_.begin());
    const int both = std::min(kp, kg);
    for (int k = 0; k < both; ++k) ++tp_[k];
    for (int k = kg; k < kp; ++k) ++fp_[k];
    for (int k = kp; k < kg; ++k) ++fn_[k];
  }
}

void F1Accumulator::merge(const F1Accumulator& other) {
  if (other.thresholds_.size() != thresholds_.size()) {
    throw ShapeError("F1Accumulator: threshold grids differ");
  }
  for (std::size_t k = 0; k < tp_.size(); ++k) {
    tp_[k] += other.tp_[k];
    fp_[k] += other.fp_[k];
    fn_[k] += other.fn_[k];
  }
}

double F1Accumulator::max_f1() const {
  double best = 0.0;
  for (std::size_t k = 0; k < tp_.size(); ++k) {
    const long long denom = 2 * tp_[k] + fp_[k] + fn_[k];
    if (denom > 0) {
      best = std::max(best, 2.0 * static_cast<double>(tp_[k]) / static_cast<double>(denom));
    }
  }
  return best;
}

double max_f1(std::span<const ScoreMap> gt, std::span<const ScoreMap> pred, int n_thresholds) {
  if (gt.size() != pred.size()) {
    throw ShapeError("max_f1: map counts differ");
  }
  F1Accumulator acc(n_thresholds);
  for (std::size_t i = 0; i < gt.size(); ++i) acc.add(gt[i], pred[i]);
  return acc.max_f1();
}

EvalReport evaluate(std::span<const Scene> gt, std::span<const Scene> pred,
                    const EvalConfig& cfg) {
  const std::vector<int> pred_index = pair_scenes_by_id(gt, pred);
  const int n = static_cast<int>(gt.size());

  struct SceneResult {
    GroupAccumMap center;
    GroupAccumMap vertex;
    std::optional<F1Accumulator> f1;
  };
  std::vector<SceneResult> per_scene(n);

  parallel_for(n, cfg.workers, [&](int i) {
    const Scene& g = gt[i];
    const Scene& p = pred[pred_index[i]];
    eval_scene_centers(g, p, cfg.tau, i, per_scene[i].center);
    eval_scene_vertices(g, p, cfg.tau, i, per_scene[i].vertex);
    if (cfg.with_f1) {
      F1Accumulator acc(cfg.n_thresholds);
      acc.add(render_score_map(g, cfg.dilation_px, cfg.square_dilation),
              render_score_map(p, cfg.dilation_px, cfg.square_dilation));
      per_scene[i].f1 = std::move(acc);
    }
  });

  EvalReport report;
  report.config = cfg;
  report.n_scenes = n;
  GroupAccumMap center_accum;
  GroupAccumMap vertex_accum;
  F1Accumulator f1_accum(cfg.n_thresholds);
  for (int i = 0; i < n; ++i) {
    merge_accum(center_accum, per_scene[i].center);
    merge_accum(vertex_accum, per_scene[i].vertex);
    if (per_scene[i].f1) f1_accum.merge(*per_scene[i].f1);
    report.n_gt_polygons += static_cast<long>(gt[i].polygons.size());
    report.n_pred_polygons += static_cast<long>(pred[pred_index[i]].polygons.size());
  }

  report.center = finalize_ap(center_accum);
  report.vertex = finalize_ap(vertex_accum);
  if (cfg.with_f1) report.f1 = f1_accum.max_f1();
  return report;
}

}  // namespace rotsym
