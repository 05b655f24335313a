#pragma once

#include <optional>
#include <span>
#include <vector>

#include "pitchpos/field_model.hpp"
#include "pitchpos/geometry.hpp"

namespace pitchpos {

enum class TeamLabel { A, B, Other, Unassigned };

const char* team_label_name(TeamLabel label);
TeamLabel team_label_from_name(const std::string& name);

/// Ingested player bounding box, image pixels.
struct Detection {
  int frame = 0;
  double x1 = 0, y1 = 0, x2 = 0, y2 = 0;
  double confidence = 1.0;

  bool valid_box() const { return x1 < x2 && y1 < y2; }
};

/// Bottom-center of the box: the player's ground contact point.
Vec2 detection_anchor(const Detection& box);

/// Field position via the inverse homography; empty when the point maps to
/// infinity. Throws std::domain_error on a singular homography.
std::optional<Vec2> project_position(const Homography& h, const Vec2& image_point);

struct SvConfig {
  double rho = 3.0;  // meters of tolerance outside the field rectangle
};

/// Self-verification: keep unless any position falls strictly more than rho
/// meters outside the field rectangle (boundary-inclusive keep). Positions
/// without a value (points at infinity) force a discard.
bool self_verify(std::span<const std::optional<Vec2>> positions, const FieldTemplate& field,
                 const SvConfig& cfg);

struct FrameEstimate {
  int frame = 0;
  bool has_homography = false;
  Homography h;
  bool sv_keep = true;

  struct Player {
    Vec2 position = Vec2::Zero();
    int detection_id = -1;
    TeamLabel team = TeamLabel::Unassigned;
    bool valid = true;  // false when the projection hit infinity
  };
  std::vector<Player> players;
};

/// Anchors projected through H, then self-verified. All detections must
/// share one frame index (std::invalid_argument otherwise).
FrameEstimate extract_frame_positions(std::span<const Detection> detections, const Homography& h,
                                      const FieldTemplate& field, const SvConfig& cfg);

}  // namespace pitchpos
