#pragma once

#include <optional>
#include <vector>

#include "pitchpos/geometry.hpp"

namespace pitchpos {

/// One shot with its per-frame registration output; nullopt marks a frame
/// where registration failed.
struct ShotSegment {
  int start_frame = 0;
  int end_frame = 0;  // inclusive
  std::vector<std::optional<Homography>> homographies;

  int frame_count() const { return end_frame - start_frame + 1; }
};

struct ShotScore {
  double mean_change = 0.0;  // average L_H over consecutive frame pairs
  bool classifiable = true;  // false for single-frame shots
};

/// Mean homography change: canonicalize, min-max normalize each of the nine
/// entries across the shot (constant entries map to 0), L_H per consecutive
/// pair is the Frobenius norm of the normalized difference. Pairs touching a
/// failed frame contribute the all-entries-flip bound of 3.0.
ShotScore shot_change_score(const ShotSegment& shot);

enum class ShotType { MainCamera, Other };

/// MainCamera iff the score is classifiable and mean_change <= tau.
ShotType classify_shot(const ShotScore& score, double tau);

constexpr double kDefaultShotTau = 0.35;

}  // namespace pitchpos
