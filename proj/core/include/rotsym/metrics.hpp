#pragma once

#include <map>
#include <optional>
#include <span>
#include <vector>

#include "rotsym/scene.hpp"
#include "rotsym/types.hpp"

namespace rotsym {

/// Dense per-pixel confidence grid, values in [0, 1], row-major.
struct ScoreMap {
  int width = 0;
  int height = 0;
  std::vector<double> values;

  ScoreMap() = default;
  ScoreMap(int w, int h) : width(w), height(h), values(static_cast<std::size_t>(w) * h, 0.0) {}

  double& at(int x, int y) { return values[static_cast<std::size_t>(y) * width + x]; }
  double at(int x, int y) const { return values[static_cast<std::size_t>(y) * width + x]; }
};

/// Per-group average precision plus the detection universe it was computed
/// over. The mean averages groups present in the ground truth, unweighted.
struct APResult {
  struct GroupResult {
    double ap = 0.0;
    long n_gt = 0;
    long n_pred = 0;
  };
  std::map<RotationGroup, GroupResult> per_group;
  double mean = 0.0;
};

/// Evaluation protocol constants. Defaults pin the reference protocol:
/// tau = 0.025, 5 px dilation, 100 binarization thresholds.
struct EvalConfig {
  double tau = 0.025;
  int dilation_px = 5;
  int n_thresholds = 100;
  bool square_dilation = false;  // Chebyshev stamp instead of a disk
  bool with_f1 = false;
  int workers = 1;
};

/// Per-group center AP at threshold d < tau * max(w, h). Predicted centers
/// are bipartitely matched to ground-truth centers per image and group by
/// total Euclidean distance; the PR curve ranks detections by confidence
/// across the whole split and integrates with all-points interpolation.
/// Throws IdMismatch when scene ids do not pair one-to-one.
APResult center_ap(std::span<const Scene> gt, std::span<const Scene> pred, double tau);

/// Per-group vertex AP. Polygons are first matched by center proximity;
/// the vertex sets of each matched pair are then matched by summed l1
/// distance, and each matched vertex counts as a true positive under the
/// same distance threshold as centers. Unmatched ground-truth vertices
/// count as misses; SO2 has no vertices and never appears.
APResult vertex_ap(std::span<const Scene> gt, std::span<const Scene> pred, double tau);

/// Renders a scene's centers into a dilated score map: each center stamps
/// a disk of the given radius holding its confidence (1.0 for ground
/// truth, which carries no scores); overlaps keep the maximum.
ScoreMap render_score_map(const Scene& scene, int dilation_px, bool square = false);

/// Streaming pixel-level F1 over binarization thresholds k/(n+1), k=1..n.
class F1Accumulator {
 public:
  explicit F1Accumulator(int n_thresholds);

  void add(const ScoreMap& gt, const ScoreMap& pred);  // ShapeError on dim mismatch
  void merge(const F1Accumulator& other);
  double max_f1() const;

  int n_thresholds() const { return static_cast<int>(thresholds_.size()); }

 private:
  std::vector<double> thresholds_;
  std::vector<long long> tp_, fp_, fn_;
};

/// Maximum pixel-level F1 over the threshold grid, maps paired by index.
double max_f1(std::span<const ScoreMap> gt, std::span<const ScoreMap> pred, int n_thresholds);

struct EvalReport {
  EvalConfig config;
  long n_scenes = 0;
  long n_gt_polygons = 0;
  long n_pred_polygons = 0;
  APResult center;
  APResult vertex;
  std::optional<double> f1;
};

/// Full evaluation of a prediction split against ground truth: center AP,
/// vertex AP and (optionally) the dilated score-map max-F1. Scenes may be
/// processed in parallel; results are identical for any worker count.
EvalReport evaluate(std::span<const Scene> gt, std::span<const Scene> pred,
                    const EvalConfig& cfg);

}  // namespace rotsym
