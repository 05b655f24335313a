#include "pitchpos/projection.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

namespace pitchpos {

const char* team_label_name(TeamLabel label) {
  switch (label) {
    case TeamLabel::A: return "A";
    case TeamLabel::B: return "B";
    case TeamLabel::Other: return "other";
    case TeamLabel::Unassigned: return "unassigned";
  }
  return "unassigned";
}

TeamLabel team_label_from_name(const std::string& name) {
  if (name == "A") return TeamLabel::A;
  if (name == "B") return TeamLabel::B;
  if (name == "other") return TeamLabel::Other;
  if (name == "unassigned") return TeamLabel::Unassigned;
  throw std::invalid_argument("unknown team label: " + name);
}

Vec2 detection_anchor(const Detection& box) {
  if (!box.valid_box()) throw std::invalid_argument("detection_anchor: degenerate box");
  return Vec2((box.x1 + box.x2) / 2.0, box.y2);
}

std::optional<Vec2> project_position(const Homography& h, const Vec2& image_point) {
  return h.inverse().try_apply(image_point);
}

bool self_verify(std::span<const std::optional<Vec2>> positions, const FieldTemplate& field,
                 const SvConfig& cfg) {
  if (cfg.rho < 0.0) throw std::invalid_argument("self_verify: rho must be >= 0");
  for (const auto& p : positions) {
    if (!p || !p->allFinite()) return false;
    if (p->x() < -cfg.rho || p->x() > field.length + cfg.rho ||
        p->y() < -cfg.rho || p->y() > field.width + cfg.rho) {
      return false;
    }
  }
  return true;
}

FrameEstimate extract_frame_positions(std::span<const Detection> detections, const Homography& h,
                                      const FieldTemplate& field, const SvConfig& cfg) {
  FrameEstimate out;
  out.has_homography = true;
  out.h = h;
  if (!detections.empty()) out.frame = detections.front().frame;

  const Homography inv = h.inverse();
  std::vector<std::optional<Vec2>> positions;
  positions.reserve(detections.size());
  int det_id = 0;
  for (const auto& d : detections) {
    if (d.frame != out.frame) {
      throw std::invalid_argument("extract_frame_positions: mixed frame indices");
    }
    const auto p = inv.try_apply(detection_anchor(d));
    positions.push_back(p);
    FrameEstimate::Player player;
    player.detection_id = det_id++;
    if (p && p->allFinite()) {
      player.position = *p;
    } else {
      player.valid = false;
    }
    out.players.push_back(player);
  }
  out.sv_keep = self_verify(positions, field, cfg);
  return out;
}

}  // namespace pitchpos
