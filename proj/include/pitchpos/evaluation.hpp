#pragma once

#include <span>
#include <string>
#include <vector>

#include "pitchpos/geometry.hpp"
#include "pitchpos/projection.hpp"

namespace pitchpos {

struct GroundTruthFrame {
  int frame = 0;
  struct Player {
    int id = 0;
    TeamLabel team = TeamLabel::A;  // referee rows use Other
    Vec2 position = Vec2::Zero();
  };
  std::vector<Player> players;
};

struct HungarianResult {
  std::vector<int> assignment;  // per prediction: matched gt index or -1
  double total_cost = 0.0;      // sum of matched distances
  std::vector<double> distances;
};

/// Minimum-total-L2-cost assignment of min(m, n) pairs. Rectangular inputs
/// are padded with a large constant dummy cost; dummy pairs are excluded
/// from the distances.
HungarianResult hungarian_match(std::span<const Vec2> pred, std::span<const Vec2> gt);

/// Indices of ground-truth players whose forward projection has positive
/// depth and lands in the image rectangle expanded by border_tol on each
/// side (fraction of width/height).
std::vector<int> visible_gt(std::span<const Vec2> gt_positions, const Homography& h, int image_w,
                            int image_h, double border_tol);

struct PmConfig {
  double zeta = 0.3;         // ratio tolerance, [0, 1)
  double border_tol = 0.05;  // visibility tolerance at the image borders
};

/// Player-mismatch filter: keep iff n_gt_visible > 0 and
/// 1 - zeta < n_real / n_gt_visible < 1 + zeta (strict on both sides).
bool pm_filter(int n_real, int n_gt_visible, const PmConfig& cfg);

enum class AggMode { Mean, Median, BestQ };

AggMode agg_mode_from_name(const std::string& name);
const char* agg_mode_name(AggMode mode);

/// Per-frame aggregation of matched distances. BestQ averages the
/// k = max(1, floor(q * n)) smallest distances. Throws on empty input.
double aggregate_frame(std::vector<double> distances, AggMode mode, double q = 0.8);

struct ReportConfig {
  bool use_sv = false;
  bool use_pm = false;
  bool team_constraint = false;
  PmConfig pm;
  AggMode agg = AggMode::BestQ;
  double q = 0.8;
  int image_w = 1280;
  int image_h = 720;
  std::vector<double> thresholds = {2.0, 3.0};
};

struct MetricsReport {
  std::string match = "match";
  bool use_sv = false, use_pm = false, team_constraint = false;
  AggMode agg = AggMode::BestQ;
  int total_frames = 0;
  int kept_frames = 0;    // survived the configured filters
  int scored_frames = 0;  // kept frames that produced at least one distance
  // Ground-truth mode per scored frame: matched against the visible subset
  // (a homography was available) or against all ground-truth players.
  int frames_gt_visible = 0;
  int frames_gt_all = 0;
  double ratio = 0.0;  // kept / total
  double d_mean = 0.0;
  double d_median = 0.0;
  std::vector<double> thresholds;
  std::vector<double> acc;  // fraction of kept frames with aggregate <= l
  bool empty = false;       // no frame survived
  std::vector<double> frame_aggregates;  // per scored frame, for histograms
};

/// Minimal SVG histogram of the per-frame aggregates of a report.
void write_error_histogram_svg(const MetricsReport& report, const std::string& path,
                               int bins = 30);

/// Full evaluation of one match: filters, per-frame Hungarian matching
/// against the visible ground truth (all ground truth when a frame has no
/// homography), aggregation, and accuracy thresholds.
MetricsReport match_report(std::span<const FrameEstimate> estimates,
                           std::span<const GroundTruthFrame> gt, const ReportConfig& cfg);

/// Team-constrained variant: matches within each team under the label
/// permutation (A->A or A->B, chosen per match by minimal d_mean), averages
/// the per-team aggregates per frame. Other/unassigned predictions are
/// excluded; frames with one side empty score on the remaining team.
MetricsReport team_constrained_report(std::span<const FrameEstimate> estimates,
                                      std::span<const GroundTruthFrame> gt,
                                      const ReportConfig& cfg);

/// Unweighted mean of per-match reports (requires identical configuration).
MetricsReport overall_report(std::span<const MetricsReport> per_match);

struct SbdScores {
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;
  int matched = 0;
};

/// Shot-boundary scores with +-delta frame tolerance: each ground-truth cut
/// greedily takes the nearest unmatched predicted cut within the tolerance
/// (ascending ground-truth order; distance ties take the earlier cut).
SbdScores sbd_f1(std::span<const int> pred_cuts, std::span<const int> gt_cuts, int delta);

}  // namespace pitchpos
