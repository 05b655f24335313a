#include "pitchpos/synth.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "pitchpos/rng.hpp"

namespace pitchpos {

std::vector<GroundTruthFrame> SyntheticMatch::ground_truth() const {
  std::vector<GroundTruthFrame> out;
  out.reserve(positions.size());
  for (int t = 0; t < static_cast<int>(positions.size()); ++t) {
    GroundTruthFrame g;
    g.frame = t;
    for (std::size_t a = 0; a < agents.size(); ++a) {
      if (!agents[a].in_gt) continue;
      g.players.push_back({agents[a].id, agents[a].team, positions[static_cast<std::size_t>(t)][a]});
    }
    out.push_back(std::move(g));
  }
  return out;
}

namespace {

struct Box2 {
  double x0, y0, x1, y1;
};

// Waypoint walker: head toward the current waypoint at a per-agent preferred
// speed, pick a fresh waypoint when close. Stays inside `bounds`.
struct Walker {
  Vec2 pos;
  Vec2 waypoint;
  double speed;  // m/s, strictly below v_max

  void step(Rng& rng, const Box2& bounds, double dt) {
    if ((waypoint - pos).norm() < 0.5) {
      // Draw into locals: argument evaluation order is unspecified, and the
      // stream must be identical across compilers.
      const double wx = rng.uniform(bounds.x0, bounds.x1);
      const double wy = rng.uniform(bounds.y0, bounds.y1);
      waypoint = Vec2(wx, wy);
    }
    const Vec2 to = waypoint - pos;
    const double dist = to.norm();
    const double step_len = std::min(dist, speed * dt);
    if (dist > 1e-9) pos += to * (step_len / dist);
  }
};

}  // namespace

SyntheticMatch generate_match(const MatchConfig& cfg, std::uint64_t seed) {
  if (cfg.frames <= 0 || cfg.frame_rate <= 0.0 || cfg.players_per_team < 1) {
    throw std::invalid_argument("generate_match: invalid config");
  }
  SyntheticMatch match;
  match.cfg = cfg;
  match.field = standard_field(cfg.field_length, cfg.field_width);

  Rng traj_rng = Rng(seed).fork(10);
  Rng cam_rng = Rng(seed).fork(11);

  const double margin = 1.0;
  const Box2 field_box{margin, margin, cfg.field_length - margin, cfg.field_width - margin};
  const double cy = cfg.field_width / 2.0;
  const Box2 gk_box_a{0.5, cy - 15.0, 10.0, cy + 15.0};
  const Box2 gk_box_b{cfg.field_length - 10.0, cy - 15.0, cfg.field_length - 0.5, cy + 15.0};

  std::vector<Walker> walkers;
  std::vector<Box2> bounds;
  int next_id = 0;
  auto add_agent = [&](AgentKind kind, TeamLabel team, const Hsv& palette, const Box2& box,
                       bool in_gt) {
    SyntheticMatch::Agent a;
    a.id = next_id++;
    a.kind = kind;
    a.team = team;
    a.palette = palette;
    a.in_gt = in_gt;
    match.agents.push_back(a);
    Walker w;
    const double px = traj_rng.uniform(box.x0, box.x1);
    const double py = traj_rng.uniform(box.y0, box.y1);
    const double wx = traj_rng.uniform(box.x0, box.x1);
    const double wy = traj_rng.uniform(box.y0, box.y1);
    w.pos = Vec2(px, py);
    w.waypoint = Vec2(wx, wy);
    w.speed = traj_rng.uniform(1.0, 0.8 * cfg.v_max);
    walkers.push_back(w);
    bounds.push_back(box);
  };

  for (int side = 0; side < 2; ++side) {
    const TeamLabel team = side == 0 ? TeamLabel::A : TeamLabel::B;
    const Hsv palette = side == 0 ? cfg.palettes.team_a : cfg.palettes.team_b;
    int field_players = 0;
    const int n_field = cfg.players_per_team - (cfg.gk_distinct ? 1 : 0);
    for (int i = 0; i < cfg.players_per_team; ++i) {
      const bool gk = cfg.gk_distinct && i == 0;
      if (gk) {
        add_agent(AgentKind::Goalkeeper, team, cfg.palettes.goalkeeper,
                  side == 0 ? gk_box_a : gk_box_b, true);
        continue;
      }
      // Field players hold formation bands across the width, so every frame
      // has someone near each touchline the way a real team keeps width.
      const double band_lo = 3.0, band_hi = cfg.field_width - 3.0;
      const double bh = (band_hi - band_lo) / std::max(1, n_field);
      const Box2 band{margin, band_lo + field_players * bh, cfg.field_length - margin,
                      band_lo + (field_players + 1) * bh};
      ++field_players;
      add_agent(AgentKind::Player, team, palette, band, true);
    }
  }
  if (cfg.include_referee) {
    add_agent(AgentKind::Referee, TeamLabel::Other, cfg.palettes.referee, field_box,
              cfg.referee_in_gt);
  }

  const double dt = 1.0 / cfg.frame_rate;
  const double cam_x = cam_rng.uniform(cfg.cam_loc_lo.x(), cfg.cam_loc_hi.x());
  const double cam_y = cam_rng.uniform(cfg.cam_loc_lo.y(), cfg.cam_loc_hi.y());
  const double cam_z = cam_rng.uniform(cfg.cam_loc_lo.z(), cfg.cam_loc_hi.z());
  const Vec3 cam_loc(cam_x, cam_y, cam_z);
  const double focal_mid = 0.5 * (cfg.focal_min + cfg.focal_max);
  const double focal_amp = 0.5 * (cfg.focal_max - cfg.focal_min);
  const double focal_phase = cam_rng.uniform(0.0, 2.0 * M_PI);

  match.positions.resize(static_cast<std::size_t>(cfg.frames));
  match.poses.reserve(static_cast<std::size_t>(cfg.frames));
  match.homographies.reserve(static_cast<std::size_t>(cfg.frames));

  Vec2 aim_ema = Vec2(cfg.field_length / 2.0, cfg.field_width / 2.0);
  for (int t = 0; t < cfg.frames; ++t) {
    auto& frame_pos = match.positions[static_cast<std::size_t>(t)];
    frame_pos.reserve(walkers.size());
    Vec2 centroid = Vec2::Zero();
    for (std::size_t a = 0; a < walkers.size(); ++a) {
      if (t > 0) walkers[a].step(traj_rng, bounds[a], dt);
      frame_pos.push_back(walkers[a].pos);
      centroid += walkers[a].pos;
    }
    centroid /= static_cast<double>(walkers.size());
    aim_ema = 0.92 * aim_ema + 0.08 * centroid;

    CameraPose pose;
    pose.location = cam_loc;
    aim_at(cam_loc, aim_ema, pose.pan_deg, pose.tilt_deg);
    pose.pan_deg = std::clamp(pose.pan_deg, cfg.pan_min_deg, cfg.pan_max_deg);
    pose.tilt_deg = std::clamp(pose.tilt_deg, cfg.tilt_min_deg, cfg.tilt_max_deg);
    pose.focal_length =
        focal_mid + focal_amp * std::sin(2.0 * M_PI * t / (cfg.frame_rate * cfg.focal_period_s) + focal_phase);
    match.poses.push_back(pose);
    match.homographies.push_back(pose_to_homography(pose, cfg.image_w, cfg.image_h));
  }
  return match;
}

namespace {

double wrap01(double x) {
  x = std::fmod(x, 1.0);
  return x < 0.0 ? x + 1.0 : x;
}

Hsv noisy_palette(const Hsv& base, double sigma, Rng& rng) {
  Hsv out;
  out.h = wrap01(base.h + rng.normal(0.0, sigma));
  out.s = std::clamp(base.s + rng.normal(0.0, sigma), 0.0, 1.0);
  out.v = std::clamp(base.v + rng.normal(0.0, sigma), 0.0, 1.0);
  return out;
}

DetectionSource source_of(const SyntheticMatch::Agent& agent) {
  switch (agent.kind) {
    case AgentKind::Goalkeeper: return DetectionSource::Goalkeeper;
    case AgentKind::Referee: return DetectionSource::Referee;
    case AgentKind::Player:
      return agent.team == TeamLabel::A ? DetectionSource::TeamA : DetectionSource::TeamB;
  }
  return DetectionSource::FalsePositive;
}

}  // namespace

SynthDetections corrupt_detections(const SyntheticMatch& match, const NoiseConfig& noise,
                                   std::uint64_t seed) {
  if (noise.dropout_prob < 0.0 || noise.dropout_prob > 1.0 || noise.anchor_sigma_px < 0.0 ||
      noise.false_positive_rate < 0.0 || noise.color_sigma < 0.0) {
    throw std::invalid_argument("corrupt_detections: invalid noise config");
  }
  Rng rng = Rng(seed).fork(20);
  SynthDetections out;
  const int w = match.cfg.image_w, h = match.cfg.image_h;

  for (int t = 0; t < static_cast<int>(match.positions.size()); ++t) {
    const Homography& hom = match.homographies[static_cast<std::size_t>(t)];
    const Mat3 rot = pose_rotation(match.poses[static_cast<std::size_t>(t)]);
    const Vec3 cam = match.poses[static_cast<std::size_t>(t)].location;
    int det_id = 0;
    auto emit = [&](const Vec2& anchor, double box_h, DetectionSource src, const Hsv& palette) {
      Detection d;
      d.frame = t;
      const double box_w = 0.45 * box_h;
      d.x1 = anchor.x() - box_w / 2.0;
      d.x2 = anchor.x() + box_w / 2.0;
      d.y1 = anchor.y() - box_h;
      d.y2 = anchor.y();
      d.confidence = 1.0;
      out.detections.push_back(d);
      const Hsv c = noisy_palette(palette, noise.color_sigma, rng);
      out.colors.frame.push_back(t);
      out.colors.feature.push_back(hsv_embed(c.h, c.s, c.v));
      out.source.push_back(src);
      out.detection_id.push_back(det_id++);
    };

    for (std::size_t a = 0; a < match.agents.size(); ++a) {
      const Vec2& pos = match.positions[static_cast<std::size_t>(t)][a];
      if (hom.depth(pos) <= 0.0) continue;
      const auto proj = hom.try_apply(pos);
      if (!proj || proj->x() < 0.0 || proj->x() > w - 1.0 || proj->y() < 0.0 || proj->y() > h - 1.0) {
        continue;
      }
      if (noise.dropout_prob > 0.0 && rng.uniform() < noise.dropout_prob) continue;
      Vec2 anchor = *proj;
      if (noise.anchor_sigma_px > 0.0) {
        anchor.x() += rng.normal(0.0, noise.anchor_sigma_px);
        anchor.y() += rng.normal(0.0, noise.anchor_sigma_px);
      }
      // Apparent player height from the camera-frame depth of the feet.
      const double depth = (rot * (Vec3(pos.x(), pos.y(), 0.0) - cam)).z();
      const double f_px = match.poses[static_cast<std::size_t>(t)].focal_length * (w / 1280.0);
      const double box_h = std::clamp(depth > 1.0 ? f_px * 1.8 / depth : 40.0, 8.0, 240.0);
      emit(anchor, box_h, source_of(match.agents[a]), match.agents[a].palette);
    }
    const int n_fp = noise.false_positive_rate > 0.0 ? rng.poisson(noise.false_positive_rate) : 0;
    for (int i = 0; i < n_fp; ++i) {
      const double fx = rng.uniform(0.0, w - 1.0);
      const double fy = rng.uniform(h * 0.2, h - 1.0);
      emit(Vec2(fx, fy), rng.uniform(20.0, 80.0), DetectionSource::FalsePositive,
           match.cfg.palettes.other);
    }
  }
  return out;
}

CorruptedHomographies corrupt_homographies(const SyntheticMatch& match, const NoiseConfig& noise,
                                           std::uint64_t seed) {
  if (noise.h_corruption_prob < 0.0 || noise.h_corruption_prob > 1.0 ||
      noise.h_corruption_mag_m < 0.0) {
    throw std::invalid_argument("corrupt_homographies: invalid noise config");
  }
  Rng rng = Rng(seed).fork(30);
  CorruptedHomographies out;
  out.homographies = match.homographies;
  out.corrupted.assign(match.homographies.size(), 0);
  if (noise.h_corruption_prob <= 0.0 || noise.h_corruption_mag_m <= 0.0) return out;

  const double length = match.cfg.field_length;
  const double width = match.cfg.field_width;
  const std::vector<Vec2> corners = {Vec2(0, 0), Vec2(length, 0), Vec2(length, width), Vec2(0, width)};

  for (std::size_t t = 0; t < out.homographies.size(); ++t) {
    if (rng.uniform() >= noise.h_corruption_prob) continue;
    // Two gross-failure modes, both rescaled so the largest field-corner
    // displacement equals the magnitude exactly:
    //   - offset (dominant): the visible region lands in the wrong place,
    //     mostly along the camera's depth axis, which for a broadcast camera
    //     runs across the field; self-verification sees these.
    //   - compression (rare): a wrong focal length squeezes the projected
    //     positions toward the view center; they stay on the pitch and only
    //     the player-mismatch count check can flag the frame.
    std::vector<Vec2> displaced(4);
    if (rng.uniform() < 0.05) {
      Vec2 center(match.cfg.field_length / 2.0, match.cfg.field_width / 2.0);
      const auto c = out.homographies[t].inverse().try_apply(
          Vec2(match.cfg.image_w / 2.0, match.cfg.image_h / 2.0));
      if (c && c->allFinite()) center = *c;
      double max_dist = 0.0;
      for (const auto& corner : corners) max_dist = std::max(max_dist, (corner - center).norm());
      const double k = noise.h_corruption_mag_m / max_dist;
      for (int i = 0; i < 4; ++i) {
        displaced[static_cast<std::size_t>(i)] =
            corners[static_cast<std::size_t>(i)] +
            (center - corners[static_cast<std::size_t>(i)]) * k;
      }
    } else {
      const double shift_x = rng.uniform(-0.15, 0.15);
      const Vec2 shift(shift_x, rng.uniform() < 0.5 ? 1.0 : -1.0);
      std::vector<Vec2> delta(4);
      double max_mag = 0.0;
      for (int i = 0; i < 4; ++i) {
        const double ja = rng.uniform(0.0, 2.0 * M_PI);
        delta[static_cast<std::size_t>(i)] = shift + 0.05 * Vec2(std::cos(ja), std::sin(ja));
        max_mag = std::max(max_mag, delta[static_cast<std::size_t>(i)].norm());
      }
      for (int i = 0; i < 4; ++i) {
        displaced[static_cast<std::size_t>(i)] =
            corners[static_cast<std::size_t>(i)] +
            delta[static_cast<std::size_t>(i)] * (noise.h_corruption_mag_m / max_mag);
      }
    }
    // M maps true corners to displaced ones; H' = H o M^-1 sends the image
    // of each corner back to its displaced field position.
    const Homography m = fit_homography(corners, displaced);
    out.homographies[t] = compose(out.homographies[t], m.inverse());
    out.corrupted[t] = 1;
  }
  return out;
}

}  // namespace pitchpos
