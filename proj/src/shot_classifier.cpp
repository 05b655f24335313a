#include "pitchpos/shot_classifier.hpp"

#include <cmath>
#include <stdexcept>

namespace pitchpos {

ShotScore shot_change_score(const ShotSegment& shot) {
  const int n = shot.frame_count();
  if (n != static_cast<int>(shot.homographies.size()) || n < 1) {
    throw std::invalid_argument("shot_change_score: frame range and homography list disagree");
  }
  if (n < 2) return {0.0, false};

  // Entry trajectories of the canonicalized matrices; failed frames stay NaN.
  std::vector<std::array<double, 9>> entries(static_cast<std::size_t>(n));
  for (int t = 0; t < n; ++t) {
    auto& e = entries[static_cast<std::size_t>(t)];
    if (shot.homographies[static_cast<std::size_t>(t)].has_value()) {
      const Mat3& m = shot.homographies[static_cast<std::size_t>(t)]->matrix();
      for (int i = 0; i < 9; ++i) e[static_cast<std::size_t>(i)] = m(i / 3, i % 3);
    } else {
      e.fill(std::numeric_limits<double>::quiet_NaN());
    }
  }

  // Per-entry min-max over the valid frames; a constant entry maps to 0.
  std::array<double, 9> lo{}, hi{};
  lo.fill(std::numeric_limits<double>::infinity());
  hi.fill(-std::numeric_limits<double>::infinity());
  for (const auto& e : entries) {
    if (std::isnan(e[0])) continue;
    for (int i = 0; i < 9; ++i) {
      lo[static_cast<std::size_t>(i)] = std::min(lo[static_cast<std::size_t>(i)], e[static_cast<std::size_t>(i)]);
      hi[static_cast<std::size_t>(i)] = std::max(hi[static_cast<std::size_t>(i)], e[static_cast<std::size_t>(i)]);
    }
  }
  auto normalized = [&](const std::array<double, 9>& e, int i) {
    const double range = hi[static_cast<std::size_t>(i)] - lo[static_cast<std::size_t>(i)];
    if (!(range > 0.0)) return 0.0;
    return (e[static_cast<std::size_t>(i)] - lo[static_cast<std::size_t>(i)]) / range;
  };

  // All nine normalized entries flipping 0 <-> 1 bounds a pair's change.
  const double kFailedPairChange = 3.0;
  double sum = 0.0;
  for (int t = 0; t + 1 < n; ++t) {
    const auto& a = entries[static_cast<std::size_t>(t)];
    const auto& b = entries[static_cast<std::size_t>(t + 1)];
    if (std::isnan(a[0]) || std::isnan(b[0])) {
      sum += kFailedPairChange;
      continue;
    }
    double sq = 0.0;
    for (int i = 0; i < 9; ++i) {
      const double d = normalized(a, i) - normalized(b, i);
      sq += d * d;
    }
    sum += std::sqrt(sq);
  }
  return {sum / (n - 1), true};
}

ShotType classify_shot(const ShotScore& score, double tau) {
  if (!score.classifiable) return ShotType::Other;
  return score.mean_change <= tau ? ShotType::MainCamera : ShotType::Other;
}

}  // namespace pitchpos
