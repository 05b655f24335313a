#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "pitchpos/geometry.hpp"
#include "pitchpos/projection.hpp"

namespace pitchpos {

/// Hue-circular embedding of mean HSV: (s cos 2*pi*h, s sin 2*pi*h, v).
/// Keeps red jerseys near hue 0/1 in one cluster.
Vec3 hsv_embed(double h, double s, double v);

/// RGB crop of a detection box, channels in [0, 1], row-major.
struct RgbCrop {
  int width = 0;
  int height = 0;
  std::vector<Vec3> rgb;

  const Vec3& at(int x, int y) const { return rgb[static_cast<std::size_t>(y) * width + x]; }
};

void rgb_to_hsv(const Vec3& rgb, double& h, double& s, double& v);

/// Color feature of a full-box crop: upper half, bilinear rescale to 20x20,
/// central 16x16, per-pixel HSV, channel means (hue circularly), embedded.
Vec3 color_feature(const RgbCrop& box_crop);

struct TeamClusterConfig {
  double n_cls = 0.2;  // cluster-mass fraction in [0, 0.5]
  double eps_lo = 0.01, eps_hi = 0.5, eps_step = 0.01;
  int sample_frames = 20;  // frames drawn for the epsilon grid search
  std::uint64_t seed = 7;
};

/// Density-based clustering. Labels >= 0 are cluster ids in discovery
/// order, -1 is noise. A point is core iff it has >= min_pts neighbors
/// within L2 distance eps (inclusive of itself); border points join the
/// first cluster (lowest seed index) that reaches them.
std::vector<int> dbscan(std::span<const Vec3> features, double eps, int min_pts);

/// |Other| + ||A| - |B|| for an exactly-two-cluster labeling; +infinity
/// otherwise (the configuration is rejected).
double cluster_cost(std::span<const int> labels);

/// Grid search for the eps minimizing cluster_cost with
/// min_pts = max(2, round(n_cls * N)); ties take the smallest eps.
/// Empty when no eps yields exactly two clusters.
std::optional<double> epsilon_search(std::span<const Vec3> features, const TeamClusterConfig& cfg);

/// Per-detection color features of one match, parallel arrays.
struct MatchColorData {
  std::vector<int> frame;
  std::vector<Vec3> feature;
};

/// Full team assignment: epsilon grid search on features from
/// cfg.sample_frames randomly drawn frames (seeded), then one clustering of
/// all detections. The two largest clusters become A (larger; size ties go
/// to the lower mean detection index) and B; everything else is Other.
/// Throws std::runtime_error when no feasible eps exists.
std::vector<TeamLabel> assign_teams(const MatchColorData& data, const TeamClusterConfig& cfg);

}  // namespace pitchpos
