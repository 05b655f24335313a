#pragma once

#include <cstdint>
#include <vector>

#include "pitchpos/camera.hpp"
#include "pitchpos/evaluation.hpp"
#include "pitchpos/field_model.hpp"
#include "pitchpos/projection.hpp"
#include "pitchpos/team_assignment.hpp"

namespace pitchpos {

struct Hsv {
  double h = 0.0, s = 0.0, v = 0.0;
};

enum class AgentKind { Player, Goalkeeper, Referee };

// Default palettes are pairwise separated by >= 72 degrees of hue, so the
// clusters stay apart under moderate color noise; team A sits at the hue
// wraparound on purpose.
struct TeamPalettes {
  Hsv team_a{0.00, 0.85, 0.90};      // red
  Hsv team_b{0.55, 0.85, 0.80};      // blue-cyan
  Hsv goalkeeper{0.80, 0.80, 0.85};  // purple
  Hsv referee{0.25, 0.85, 0.95};     // yellow-green
  Hsv other{0.0, 0.05, 0.35};        // dark gray: staff / false positives
};

struct MatchConfig {
  int frames = 500;
  double frame_rate = 25.0;
  int players_per_team = 11;  // goalkeepers included when gk_distinct
  bool gk_distinct = true;    // first player of each team keeps to the box
  bool include_referee = true;
  bool referee_in_gt = false;  // broadcast data usually lacks referee truth
  double v_max = 8.0;          // m/s cap on player motion

  double field_length = 105.0;
  double field_width = 68.0;

  // Camera: one location drawn uniformly from the box below, then smooth
  // pan/tilt tracking of the player centroid clamped to the ranges, and a
  // slow focal oscillation.
  Vec3 cam_loc_lo = Vec3(51.5, -47.0, 16.5);
  Vec3 cam_loc_hi = Vec3(52.5, -43.0, 17.5);
  double pan_min_deg = -25.0, pan_max_deg = 25.0;
  double tilt_min_deg = -13.0, tilt_max_deg = -7.0;
  double focal_min = 2600.0, focal_max = 3400.0;
  double focal_period_s = 30.0;

  int image_w = 1280;
  int image_h = 720;
  TeamPalettes palettes;
};

struct SyntheticMatch {
  MatchConfig cfg;
  FieldTemplate field;

  struct Agent {
    int id = 0;
    AgentKind kind = AgentKind::Player;
    TeamLabel team = TeamLabel::A;  // referee carries Other
    Hsv palette;
    bool in_gt = true;
  };
  std::vector<Agent> agents;
  std::vector<std::vector<Vec2>> positions;  // [frame][agent]
  std::vector<CameraPose> poses;             // per frame
  std::vector<Homography> homographies;      // per frame, from poses

  std::vector<GroundTruthFrame> ground_truth() const;
};

/// Deterministic synthetic match: seeded waypoint trajectories inside the
/// field (speed-capped), a smooth centroid-tracking camera, and per-frame
/// homographies consistent with the poses.
/// RNG streams forked from the seed: 10 trajectories, 11 camera.
SyntheticMatch generate_match(const MatchConfig& cfg, std::uint64_t seed);

struct NoiseConfig {
  double anchor_sigma_px = 0.0;
  double dropout_prob = 0.0;
  double false_positive_rate = 0.0;  // expected count per frame (Poisson)
  double color_sigma = 0.0;          // per HSV channel
  double h_corruption_prob = 0.0;
  double h_corruption_mag_m = 0.0;  // max field-corner displacement
};

/// Per-detection classification truth for scoring the team assignment:
/// field players map to their team, everything else to Other.
enum class DetectionSource { TeamA, TeamB, Goalkeeper, Referee, FalsePositive };

struct SynthDetections {
  std::vector<Detection> detections;  // ordered by frame, then agent id, then FPs
  MatchColorData colors;              // parallel to detections
  std::vector<DetectionSource> source;
  std::vector<int> detection_id;  // id within its frame
};

/// Projects visible agents through the true homographies into noisy boxes
/// (anchor noise, dropout, Poisson false positives) and draws color features
/// from the agent palettes. RNG stream forked from the seed: 20.
SynthDetections corrupt_detections(const SyntheticMatch& match, const NoiseConfig& noise,
                                   std::uint64_t seed);

struct CorruptedHomographies {
  std::vector<Homography> homographies;
  std::vector<char> corrupted;  // per frame
};

/// With probability h_corruption_prob a frame's homography is replaced by
/// one whose inverse displaces the field corners by up to the configured
/// magnitude (max displacement equals the magnitude exactly). The error mix
/// covers offset failures (caught by self-verification) and rare focal-style
/// compressions (caught only by the player-mismatch count check). RNG stream
/// forked from the seed: 30.
CorruptedHomographies corrupt_homographies(const SyntheticMatch& match, const NoiseConfig& noise,
                                           std::uint64_t seed);

}  // namespace pitchpos
