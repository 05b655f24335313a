#include "pitchpos/evaluation.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <map>
#include <stdexcept>

#include "pitchpos/io.hpp"

namespace pitchpos {

namespace {

constexpr double kDummyCost = 1e6;  // far above any on-field distance

// Shortest-augmenting-path assignment on a square cost matrix (O(n^3)).
// Returns row -> column.
std::vector<int> solve_square_assignment(const std::vector<std::vector<double>>& cost) {
  const int n = static_cast<int>(cost.size());
  std::vector<double> u(static_cast<std::size_t>(n) + 1, 0.0);
  std::vector<double> v(static_cast<std::size_t>(n) + 1, 0.0);
  std::vector<int> match(static_cast<std::size_t>(n) + 1, 0);  // column -> row
  std::vector<int> path(static_cast<std::size_t>(n) + 1, 0);

  for (int i = 1; i <= n; ++i) {
    match[0] = i;
    int j0 = 0;
    std::vector<double> min_slack(static_cast<std::size_t>(n) + 1,
                                  std::numeric_limits<double>::infinity());
    std::vector<char> used(static_cast<std::size_t>(n) + 1, 0);
    do {
      used[static_cast<std::size_t>(j0)] = 1;
      const int i0 = match[static_cast<std::size_t>(j0)];
      int j1 = 0;
      double delta = std::numeric_limits<double>::infinity();
      for (int j = 1; j <= n; ++j) {
        if (used[static_cast<std::size_t>(j)]) continue;
        const double cur = cost[static_cast<std::size_t>(i0 - 1)][static_cast<std::size_t>(j - 1)] -
                           u[static_cast<std::size_t>(i0)] - v[static_cast<std::size_t>(j)];
        if (cur < min_slack[static_cast<std::size_t>(j)]) {
          min_slack[static_cast<std::size_t>(j)] = cur;
          path[static_cast<std::size_t>(j)] = j0;
        }
        if (min_slack[static_cast<std::size_t>(j)] < delta) {
          delta = min_slack[static_cast<std::size_t>(j)];
          j1 = j;
        }
      }
      for (int j = 0; j <= n; ++j) {
        if (used[static_cast<std::size_t>(j)]) {
          u[static_cast<std::size_t>(match[static_cast<std::size_t>(j)])] += delta;
          v[static_cast<std::size_t>(j)] -= delta;
        } else {
          min_slack[static_cast<std::size_t>(j)] -= delta;
        }
      }
      j0 = j1;
    } while (match[static_cast<std::size_t>(j0)] != 0);
    do {
      const int j1 = path[static_cast<std::size_t>(j0)];
      match[static_cast<std::size_t>(j0)] = match[static_cast<std::size_t>(j1)];
      j0 = j1;
    } while (j0);
  }

  std::vector<int> row_to_col(static_cast<std::size_t>(n), -1);
  for (int j = 1; j <= n; ++j) {
    if (match[static_cast<std::size_t>(j)] > 0) {
      row_to_col[static_cast<std::size_t>(match[static_cast<std::size_t>(j)] - 1)] = j - 1;
    }
  }
  return row_to_col;
}

}  // namespace

HungarianResult hungarian_match(std::span<const Vec2> pred, std::span<const Vec2> gt) {
  HungarianResult out;
  const int m = static_cast<int>(pred.size());
  const int n = static_cast<int>(gt.size());
  out.assignment.assign(static_cast<std::size_t>(m), -1);
  if (m == 0 || n == 0) return out;

  const int s = std::max(m, n);
  std::vector<std::vector<double>> cost(static_cast<std::size_t>(s),
                                        std::vector<double>(static_cast<std::size_t>(s), kDummyCost));
  for (int i = 0; i < m; ++i) {
    for (int j = 0; j < n; ++j) {
      cost[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)] =
          (pred[static_cast<std::size_t>(i)] - gt[static_cast<std::size_t>(j)]).norm();
    }
  }
  const auto row_to_col = solve_square_assignment(cost);
  for (int i = 0; i < m; ++i) {
    const int j = row_to_col[static_cast<std::size_t>(i)];
    if (j >= 0 && j < n) {
      out.assignment[static_cast<std::size_t>(i)] = j;
      const double d = cost[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)];
      out.distances.push_back(d);
      out.total_cost += d;
    }
  }
  return out;
}

std::vector<int> visible_gt(std::span<const Vec2> gt_positions, const Homography& h, int image_w,
                            int image_h, double border_tol) {
  std::vector<int> kept;
  const double tx = border_tol * image_w;
  const double ty = border_tol * image_h;
  for (int i = 0; i < static_cast<int>(gt_positions.size()); ++i) {
    const Vec2& p = gt_positions[static_cast<std::size_t>(i)];
    if (h.depth(p) <= 0.0) continue;
    const auto q = h.try_apply(p);
    if (!q) continue;
    if (q->x() >= -tx && q->x() <= image_w + tx && q->y() >= -ty && q->y() <= image_h + ty) {
      kept.push_back(i);
    }
  }
  return kept;
}

bool pm_filter(int n_real, int n_gt_visible, const PmConfig& cfg) {
  if (!(cfg.zeta >= 0.0 && cfg.zeta < 1.0)) {
    throw std::invalid_argument("pm_filter: zeta must lie in [0, 1)");
  }
  if (n_gt_visible <= 0) return false;
  const double ratio = static_cast<double>(n_real) / n_gt_visible;
  return ratio > 1.0 - cfg.zeta && ratio < 1.0 + cfg.zeta;
}

AggMode agg_mode_from_name(const std::string& name) {
  if (name == "mean") return AggMode::Mean;
  if (name == "median") return AggMode::Median;
  if (name == "best_q") return AggMode::BestQ;
  throw std::invalid_argument("unknown aggregation mode: " + name);
}

const char* agg_mode_name(AggMode mode) {
  switch (mode) {
    case AggMode::Mean: return "mean";
    case AggMode::Median: return "median";
    case AggMode::BestQ: return "best_q";
  }
  return "best_q";
}

double aggregate_frame(std::vector<double> distances, AggMode mode, double q) {
  if (distances.empty()) throw std::invalid_argument("aggregate_frame: empty distance set");
  std::sort(distances.begin(), distances.end());
  const std::size_t n = distances.size();
  switch (mode) {
    case AggMode::Mean: {
      double s = 0.0;
      for (const double d : distances) s += d;
      return s / static_cast<double>(n);
    }
    case AggMode::Median: {
      if (n % 2 == 1) return distances[n / 2];
      return 0.5 * (distances[n / 2 - 1] + distances[n / 2]);
    }
    case AggMode::BestQ: {
      if (!(q > 0.0 && q <= 1.0)) throw std::invalid_argument("aggregate_frame: q must lie in (0, 1]");
      const std::size_t k = std::max<std::size_t>(1, static_cast<std::size_t>(std::floor(q * static_cast<double>(n))));
      double s = 0.0;
      for (std::size_t i = 0; i < k; ++i) s += distances[i];
      return s / static_cast<double>(k);
    }
  }
  throw std::logic_error("aggregate_frame: unhandled mode");
}

namespace {

struct FrameScore {
  bool kept = false;
  bool scored = false;
  bool gt_visible_mode = false;
  double aggregate = 0.0;
};

MetricsReport reduce_frames(const std::vector<FrameScore>& scores, const ReportConfig& cfg) {
  MetricsReport rep;
  rep.use_sv = cfg.use_sv;
  rep.use_pm = cfg.use_pm;
  rep.team_constraint = cfg.team_constraint;
  rep.agg = cfg.agg;
  rep.thresholds = cfg.thresholds;
  rep.total_frames = static_cast<int>(scores.size());

  std::vector<double> agg;
  for (const auto& s : scores) {
    if (!s.kept) continue;
    ++rep.kept_frames;
    if (s.scored) {
      agg.push_back(s.aggregate);
      if (s.gt_visible_mode) {
        ++rep.frames_gt_visible;
      } else {
        ++rep.frames_gt_all;
      }
    }
  }
  rep.frame_aggregates = agg;
  rep.scored_frames = static_cast<int>(agg.size());
  rep.ratio = rep.total_frames > 0 ? static_cast<double>(rep.kept_frames) / rep.total_frames : 0.0;
  if (agg.empty()) {
    rep.empty = true;
    rep.acc.assign(cfg.thresholds.size(), 0.0);
    return rep;
  }
  double sum = 0.0;
  for (const double a : agg) sum += a;
  rep.d_mean = sum / static_cast<double>(agg.size());
  std::vector<double> sorted = agg;
  std::sort(sorted.begin(), sorted.end());
  rep.d_median = sorted.size() % 2 == 1
                     ? sorted[sorted.size() / 2]
                     : 0.5 * (sorted[sorted.size() / 2 - 1] + sorted[sorted.size() / 2]);
  for (const double l : cfg.thresholds) {
    int hit = 0;
    for (const double a : agg) {
      if (a <= l) ++hit;
    }
    rep.acc.push_back(static_cast<double>(hit) / static_cast<double>(agg.size()));
  }
  return rep;
}

std::vector<Vec2> finite_predictions(const FrameEstimate& est, bool team_only, TeamLabel team) {
  std::vector<Vec2> out;
  for (const auto& p : est.players) {
    if (!p.valid || !p.position.allFinite()) continue;
    if (team_only && p.team != team) continue;
    out.push_back(p.position);
  }
  return out;
}

// Shared per-frame filter pipeline; returns false when the frame is dropped.
// gt_visible_out receives the ground-truth indices the frame is scored
// against (the visible subset when a homography exists, otherwise all).
bool frame_kept(const FrameEstimate& est, const GroundTruthFrame& gt, const ReportConfig& cfg,
                int n_real, std::vector<int>& gt_visible_out) {
  if (cfg.use_sv && !est.sv_keep) return false;
  gt_visible_out.clear();
  if (est.has_homography) {
    std::vector<Vec2> gt_pos;
    gt_pos.reserve(gt.players.size());
    for (const auto& p : gt.players) gt_pos.push_back(p.position);
    gt_visible_out = visible_gt(gt_pos, est.h, cfg.image_w, cfg.image_h, cfg.pm.border_tol);
  } else {
    for (int i = 0; i < static_cast<int>(gt.players.size()); ++i) gt_visible_out.push_back(i);
  }
  if (cfg.use_pm && !pm_filter(n_real, static_cast<int>(gt_visible_out.size()), cfg.pm)) {
    return false;
  }
  return true;
}

}  // namespace

MetricsReport match_report(std::span<const FrameEstimate> estimates,
                           std::span<const GroundTruthFrame> gt, const ReportConfig& cfg) {
  std::map<int, const GroundTruthFrame*> gt_by_frame;
  for (const auto& g : gt) gt_by_frame[g.frame] = &g;

  std::vector<FrameScore> scores;
  scores.reserve(estimates.size());
  for (const auto& est : estimates) {
    const auto it = gt_by_frame.find(est.frame);
    if (it == gt_by_frame.end()) continue;  // no ground truth, nothing to score
    const GroundTruthFrame& g = *it->second;
    FrameScore fs;
    const std::vector<Vec2> preds = finite_predictions(est, false, TeamLabel::A);
    std::vector<int> vis;
    if (!frame_kept(est, g, cfg, static_cast<int>(preds.size()), vis)) {
      scores.push_back(fs);
      continue;
    }
    fs.kept = true;
    fs.gt_visible_mode = est.has_homography;
    std::vector<Vec2> gt_pos;
    gt_pos.reserve(vis.size());
    for (const int i : vis) gt_pos.push_back(g.players[static_cast<std::size_t>(i)].position);
    const auto match = hungarian_match(preds, gt_pos);
    if (!match.distances.empty()) {
      fs.scored = true;
      fs.aggregate = aggregate_frame(match.distances, cfg.agg, cfg.q);
    }
    scores.push_back(fs);
  }
  return reduce_frames(scores, cfg);
}

namespace {

// Scores one frame under a fixed team permutation; swap = pred A vs gt B.
FrameScore team_frame_score(const FrameEstimate& est, const GroundTruthFrame& g,
                            const ReportConfig& cfg, bool swap) {
  FrameScore fs;
  const std::vector<Vec2> preds_a = finite_predictions(est, true, TeamLabel::A);
  const std::vector<Vec2> preds_b = finite_predictions(est, true, TeamLabel::B);
  const int n_real = static_cast<int>(preds_a.size() + preds_b.size());
  std::vector<int> vis;
  if (!frame_kept(est, g, cfg, n_real, vis)) return fs;
  fs.kept = true;
  fs.gt_visible_mode = est.has_homography;

  std::vector<Vec2> gt_a, gt_b;
  for (const int i : vis) {
    const auto& p = g.players[static_cast<std::size_t>(i)];
    if (p.team == TeamLabel::A) {
      (swap ? gt_b : gt_a).push_back(p.position);
    } else if (p.team == TeamLabel::B) {
      (swap ? gt_a : gt_b).push_back(p.position);
    }
  }
  double sum = 0.0;
  int teams = 0;
  for (int side = 0; side < 2; ++side) {
    const auto& preds = side == 0 ? preds_a : preds_b;
    const auto& gts = side == 0 ? gt_a : gt_b;
    if (preds.empty() || gts.empty()) continue;  // frame scores on the other team
    const auto match = hungarian_match(preds, gts);
    if (match.distances.empty()) continue;
    sum += aggregate_frame(match.distances, cfg.agg, cfg.q);
    ++teams;
  }
  if (teams > 0) {
    fs.scored = true;
    fs.aggregate = sum / teams;
  }
  return fs;
}

}  // namespace

MetricsReport team_constrained_report(std::span<const FrameEstimate> estimates,
                                      std::span<const GroundTruthFrame> gt,
                                      const ReportConfig& cfg) {
  std::map<int, const GroundTruthFrame*> gt_by_frame;
  for (const auto& g : gt) gt_by_frame[g.frame] = &g;

  // The A/B identities are arbitrary per match: evaluate both permutations
  // over the whole match and keep the one with the lower d_mean.
  MetricsReport best;
  bool have = false;
  for (const bool swap : {false, true}) {
    std::vector<FrameScore> scores;
    for (const auto& est : estimates) {
      const auto it = gt_by_frame.find(est.frame);
      if (it == gt_by_frame.end()) continue;
      scores.push_back(team_frame_score(est, *it->second, cfg, swap));
    }
    MetricsReport rep = reduce_frames(scores, cfg);
    rep.team_constraint = true;
    if (!have || (!rep.empty && (best.empty || rep.d_mean < best.d_mean))) {
      best = rep;
      have = true;
    }
  }
  return best;
}

MetricsReport overall_report(std::span<const MetricsReport> per_match) {
  if (per_match.empty()) throw std::invalid_argument("overall_report: no matches");
  MetricsReport out = per_match.front();
  out.match = "overall";
  out.frame_aggregates.clear();
  int used = 0;
  out.d_mean = out.d_median = out.ratio = 0.0;
  out.acc.assign(out.thresholds.size(), 0.0);
  out.total_frames = out.kept_frames = out.scored_frames = 0;
  out.frames_gt_visible = out.frames_gt_all = 0;
  for (const auto& r : per_match) {
    out.total_frames += r.total_frames;
    out.kept_frames += r.kept_frames;
    out.scored_frames += r.scored_frames;
    out.frames_gt_visible += r.frames_gt_visible;
    out.frames_gt_all += r.frames_gt_all;
    out.ratio += r.ratio;
    if (r.empty) continue;
    out.d_mean += r.d_mean;
    out.d_median += r.d_median;
    for (std::size_t i = 0; i < out.acc.size() && i < r.acc.size(); ++i) out.acc[i] += r.acc[i];
    ++used;
  }
  out.ratio /= static_cast<double>(per_match.size());
  if (used == 0) {
    out.empty = true;
    return out;
  }
  out.empty = false;
  out.d_mean /= used;
  out.d_median /= used;
  for (auto& a : out.acc) a /= used;
  return out;
}

void write_error_histogram_svg(const MetricsReport& report, const std::string& path, int bins) {
  if (bins < 1) throw std::invalid_argument("write_error_histogram_svg: bins must be >= 1");
  std::ofstream f(path);
  if (!f) throw std::runtime_error("write_error_histogram_svg: cannot open " + path);
  const auto& d = report.frame_aggregates;
  const double hi = d.empty() ? 1.0 : *std::max_element(d.begin(), d.end());
  const double bin_w = hi > 0.0 ? hi / bins : 1.0;
  std::vector<int> counts(static_cast<std::size_t>(bins), 0);
  for (const double v : d) {
    int b = static_cast<int>(v / bin_w);
    if (b >= bins) b = bins - 1;
    ++counts[static_cast<std::size_t>(b)];
  }
  const int peak = counts.empty() ? 1 : std::max(1, *std::max_element(counts.begin(), counts.end()));
  const int w = 640, h = 360, margin = 40;
  f << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << w << "\" height=\"" << h
    << "\">\n";
  f << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  const double plot_w = w - 2.0 * margin, plot_h = h - 2.0 * margin;
  for (int b = 0; b < bins; ++b) {
    const double bar_h = plot_h * counts[static_cast<std::size_t>(b)] / peak;
    const double x = margin + plot_w * b / bins;
    f << "<rect x=\"" << x << "\" y=\"" << (margin + plot_h - bar_h) << "\" width=\""
      << (plot_w / bins - 1.0) << "\" height=\"" << bar_h << "\" fill=\"#4878a8\"/>\n";
  }
  f << "<line x1=\"" << margin << "\" y1=\"" << (h - margin) << "\" x2=\"" << (w - margin)
    << "\" y2=\"" << (h - margin) << "\" stroke=\"black\"/>\n";
  f << "<text x=\"" << margin << "\" y=\"" << (h - margin + 24)
    << "\" font-size=\"12\">0</text>\n";
  f << "<text x=\"" << (w - margin - 30) << "\" y=\"" << (h - margin + 24)
    << "\" font-size=\"12\">" << fmt6(hi) << " m</text>\n";
  f << "<text x=\"" << margin << "\" y=\"" << (margin - 12) << "\" font-size=\"12\">"
    << report.match << ": per-frame error, " << d.size() << " frames</text>\n";
  f << "</svg>\n";
}

SbdScores sbd_f1(std::span<const int> pred_cuts, std::span<const int> gt_cuts, int delta) {
  if (delta < 0) throw std::invalid_argument("sbd_f1: delta must be >= 0");
  std::vector<int> gt_sorted(gt_cuts.begin(), gt_cuts.end());
  std::sort(gt_sorted.begin(), gt_sorted.end());
  std::vector<char> used(pred_cuts.size(), 0);

  int matched = 0;
  for (const int g : gt_sorted) {
    int best = -1;
    for (int i = 0; i < static_cast<int>(pred_cuts.size()); ++i) {
      if (used[static_cast<std::size_t>(i)]) continue;
      const int off = std::abs(pred_cuts[static_cast<std::size_t>(i)] - g);
      if (off > delta) continue;
      if (best < 0 || off < std::abs(pred_cuts[static_cast<std::size_t>(best)] - g) ||
          (off == std::abs(pred_cuts[static_cast<std::size_t>(best)] - g) &&
           pred_cuts[static_cast<std::size_t>(i)] < pred_cuts[static_cast<std::size_t>(best)])) {
        best = i;
      }
    }
    if (best >= 0) {
      used[static_cast<std::size_t>(best)] = 1;
      ++matched;
    }
  }

  SbdScores s;
  s.matched = matched;
  // Vacuous conventions: no predictions means no false positives, no ground
  // truth means nothing was missed.
  s.precision = pred_cuts.empty()
                    ? 1.0
                    : static_cast<double>(matched) / static_cast<double>(pred_cuts.size());
  s.recall = gt_cuts.empty() ? 1.0
                             : static_cast<double>(matched) / static_cast<double>(gt_cuts.size());
  s.f1 = (s.precision + s.recall) > 0.0 ? 2.0 * s.precision * s.recall / (s.precision + s.recall) : 0.0;
  return s;
}

}  // namespace pitchpos
