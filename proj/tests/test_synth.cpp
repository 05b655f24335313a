#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <map>

#include "pitchpos/rng.hpp"
#include "pitchpos/synth.hpp"

using namespace pitchpos;

TEST_CASE("generate_match is deterministic given the seed") {
  MatchConfig cfg;
  cfg.frames = 60;
  const SyntheticMatch a = generate_match(cfg, 77);
  const SyntheticMatch b = generate_match(cfg, 77);
  REQUIRE(a.positions.size() == b.positions.size());
  for (std::size_t t = 0; t < a.positions.size(); ++t) {
    for (std::size_t p = 0; p < a.positions[t].size(); ++p) {
      CHECK(a.positions[t][p] == b.positions[t][p]);
    }
    CHECK(a.homographies[t].matrix() == b.homographies[t].matrix());
  }
  const SyntheticMatch c = generate_match(cfg, 78);
  CHECK(a.positions[10][3] != c.positions[10][3]);
}

TEST_CASE("players stay in the field and respect the speed cap") {
  MatchConfig cfg;
  cfg.frames = 1000;
  const SyntheticMatch m = generate_match(cfg, 5);
  const double step_cap = cfg.v_max / cfg.frame_rate;
  for (std::size_t t = 0; t < m.positions.size(); ++t) {
    for (std::size_t p = 0; p < m.positions[t].size(); ++p) {
      const Vec2& pos = m.positions[t][p];
      CHECK(pos.x() >= 0.0);
      CHECK(pos.x() <= cfg.field_length);
      CHECK(pos.y() >= 0.0);
      CHECK(pos.y() <= cfg.field_width);
      if (t > 0) {
        CHECK((pos - m.positions[t - 1][p]).norm() <= step_cap + 1e-9);
      }
    }
  }
}

TEST_CASE("homographies are consistent with the poses and camera ranges hold") {
  MatchConfig cfg;
  cfg.frames = 50;
  const SyntheticMatch m = generate_match(cfg, 9);
  for (int t = 0; t < cfg.frames; ++t) {
    const Homography h = pose_to_homography(m.poses[static_cast<std::size_t>(t)], cfg.image_w, cfg.image_h);
    CHECK((h.matrix() - m.homographies[static_cast<std::size_t>(t)].matrix()).norm() < 1e-12);
    CHECK(m.poses[static_cast<std::size_t>(t)].pan_deg >= cfg.pan_min_deg - 1e-9);
    CHECK(m.poses[static_cast<std::size_t>(t)].pan_deg <= cfg.pan_max_deg + 1e-9);
    CHECK(m.poses[static_cast<std::size_t>(t)].tilt_deg >= cfg.tilt_min_deg - 1e-9);
    CHECK(m.poses[static_cast<std::size_t>(t)].tilt_deg <= cfg.tilt_max_deg + 1e-9);
    CHECK(m.poses[static_cast<std::size_t>(t)].focal_length >= cfg.focal_min - 1e-9);
    CHECK(m.poses[static_cast<std::size_t>(t)].focal_length <= cfg.focal_max + 1e-9);
  }
}

TEST_CASE("ground truth carries 22 players and the referee only when configured") {
  MatchConfig cfg;
  cfg.frames = 5;
  cfg.referee_in_gt = false;
  const SyntheticMatch m = generate_match(cfg, 3);
  const auto gt = m.ground_truth();
  REQUIRE(gt.size() == 5);
  CHECK(gt[0].players.size() == 22);

  MatchConfig cfg2 = cfg;
  cfg2.referee_in_gt = true;
  const auto gt2 = generate_match(cfg2, 3).ground_truth();
  CHECK(gt2[0].players.size() == 23);
}

TEST_CASE("corrupt_detections: zero noise reproduces the projected anchors") {
  MatchConfig cfg;
  cfg.frames = 40;
  const SyntheticMatch m = generate_match(cfg, 11);
  const SynthDetections det = corrupt_detections(m, NoiseConfig{}, 11);
  CHECK(!det.detections.empty());
  for (std::size_t i = 0; i < det.detections.size(); ++i) {
    const Detection& d = det.detections[i];
    const Vec2 anchor = detection_anchor(d);
    // Anchor matches the projection of some agent in this frame (or is a
    // false positive, of which there are none here).
    const Homography& h = m.homographies[static_cast<std::size_t>(d.frame)];
    double best = 1e9;
    for (std::size_t a = 0; a < m.agents.size(); ++a) {
      const auto q = h.try_apply(m.positions[static_cast<std::size_t>(d.frame)][a]);
      if (q) best = std::min(best, (*q - anchor).norm());
    }
    CHECK(best < 1e-9);
  }
}

TEST_CASE("corrupt_detections: dropout thins detections within binomial bounds") {
  MatchConfig cfg;
  cfg.frames = 200;
  const SyntheticMatch m = generate_match(cfg, 13);
  const SynthDetections base = corrupt_detections(m, NoiseConfig{}, 13);
  NoiseConfig noise;
  noise.dropout_prob = 0.3;
  const SynthDetections dropped = corrupt_detections(m, noise, 13);
  const double keep_ratio =
      static_cast<double>(dropped.detections.size()) / static_cast<double>(base.detections.size());
  // ~4 sigma band around the expected 0.7 keep rate.
  const double sigma = std::sqrt(0.3 * 0.7 / static_cast<double>(base.detections.size()));
  CHECK(keep_ratio > 0.7 - 4 * sigma);
  CHECK(keep_ratio < 0.7 + 4 * sigma);
}

TEST_CASE("corrupt_detections: false positives carry the 'other' palette") {
  MatchConfig cfg;
  cfg.frames = 100;
  const SyntheticMatch m = generate_match(cfg, 17);
  NoiseConfig noise;
  noise.false_positive_rate = 1.0;
  const SynthDetections det = corrupt_detections(m, noise, 17);
  int fps = 0;
  const Vec3 other = hsv_embed(m.cfg.palettes.other.h, m.cfg.palettes.other.s, m.cfg.palettes.other.v);
  for (std::size_t i = 0; i < det.detections.size(); ++i) {
    if (det.source[i] != DetectionSource::FalsePositive) continue;
    ++fps;
    CHECK((det.colors.feature[i] - other).norm() < 1e-9);  // zero color noise
  }
  // Poisson(1) over 100 frames.
  CHECK(fps > 60);
  CHECK(fps < 150);
}

TEST_CASE("corrupt_detections: anchor noise displaces anchors by about sigma") {
  MatchConfig cfg;
  cfg.frames = 50;
  const SyntheticMatch m = generate_match(cfg, 19);
  NoiseConfig noise;
  noise.anchor_sigma_px = 2.0;
  const SynthDetections noisy = corrupt_detections(m, noise, 19);
  double sum = 0.0;
  int n = 0;
  for (std::size_t i = 0; i < noisy.detections.size(); ++i) {
    const Detection& d = noisy.detections[i];
    const Vec2 anchor = detection_anchor(d);
    const Homography& h = m.homographies[static_cast<std::size_t>(d.frame)];
    double best = 1e9;
    for (std::size_t a = 0; a < m.agents.size(); ++a) {
      const auto q = h.try_apply(m.positions[static_cast<std::size_t>(d.frame)][a]);
      if (q) best = std::min(best, (*q - anchor).norm());
    }
    sum += best;
    ++n;
  }
  // Mean |N(0, sigma I2)| = sigma * sqrt(pi/2) ~ 2.5 px; nearest-agent bias
  // pulls it slightly down.
  const double mean = sum / n;
  CHECK(mean > 1.5);
  CHECK(mean < 3.0);
}

TEST_CASE("corrupt_homographies: probability 0 is the identity transformation") {
  MatchConfig cfg;
  cfg.frames = 30;
  const SyntheticMatch m = generate_match(cfg, 23);
  const CorruptedHomographies c = corrupt_homographies(m, NoiseConfig{}, 23);
  for (int t = 0; t < cfg.frames; ++t) {
    CHECK(c.homographies[static_cast<std::size_t>(t)].matrix() ==
          m.homographies[static_cast<std::size_t>(t)].matrix());
    CHECK(c.corrupted[static_cast<std::size_t>(t)] == 0);
  }
}

TEST_CASE("corrupt_homographies: corner displacement max equals the magnitude") {
  MatchConfig cfg;
  cfg.frames = 120;
  const SyntheticMatch m = generate_match(cfg, 29);
  NoiseConfig noise;
  noise.h_corruption_prob = 1.0;
  noise.h_corruption_mag_m = 20.0;
  const CorruptedHomographies c = corrupt_homographies(m, noise, 29);
  const std::vector<Vec2> corners = {Vec2(0, 0), Vec2(105, 0), Vec2(105, 68), Vec2(0, 68)};
  for (int t = 0; t < cfg.frames; ++t) {
    REQUIRE(c.corrupted[static_cast<std::size_t>(t)] == 1);
    const Homography inv = c.homographies[static_cast<std::size_t>(t)].inverse();
    double max_disp = 0.0;
    for (const auto& corner : corners) {
      const auto img = m.homographies[static_cast<std::size_t>(t)].try_apply(corner);
      REQUIRE(img.has_value());
      const auto back = inv.try_apply(*img);
      REQUIRE(back.has_value());
      max_disp = std::max(max_disp, (*back - corner).norm());
    }
    CHECK(max_disp == doctest::Approx(20.0).epsilon(1e-6));
  }
}

TEST_CASE("corrupt_homographies: probability 0.1 over 1000 frames is binomial") {
  MatchConfig cfg;
  cfg.frames = 1000;
  const SyntheticMatch m = generate_match(cfg, 31);
  NoiseConfig noise;
  noise.h_corruption_prob = 0.1;
  noise.h_corruption_mag_m = 20.0;
  const CorruptedHomographies c = corrupt_homographies(m, noise, 31);
  int count = 0;
  for (const char f : c.corrupted) count += f;
  CHECK(count > 70);
  CHECK(count < 130);
  // Untouched frames stay bitwise identical.
  for (int t = 0; t < cfg.frames; ++t) {
    if (!c.corrupted[static_cast<std::size_t>(t)]) {
      CHECK(c.homographies[static_cast<std::size_t>(t)].matrix() ==
            m.homographies[static_cast<std::size_t>(t)].matrix());
    }
  }
}
