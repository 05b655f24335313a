#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <map>

#include "pitchpos/camera.hpp"
#include "pitchpos/projection.hpp"
#include "pitchpos/rng.hpp"
#include "pitchpos/synth.hpp"

using namespace pitchpos;

TEST_CASE("detection anchor is the bottom-center of the box") {
  CHECK(detection_anchor({0, 100, 50, 120, 90}).isApprox(Vec2(110, 90)));
  CHECK(detection_anchor({0, 0, 0, 2, 2}).isApprox(Vec2(1, 2)));
  CHECK_THROWS_AS(detection_anchor({0, 5, 5, 5, 9}), std::invalid_argument);
  CHECK_FALSE(Detection{0, 5, 5, 5, 9}.valid_box());
}

TEST_CASE("project_position: identity and top-view scale") {
  CHECK(project_position(Homography(), Vec2(3, 4))->isApprox(Vec2(3, 4)));
  Mat3 s = Mat3::Identity();
  s(0, 0) = 10.0;
  s(1, 1) = 10.0;
  CHECK(project_position(Homography(s), Vec2(525, 340))->isApprox(Vec2(52.5, 34.0)));
}

TEST_CASE("project_position inverts the forward projection on the field plane") {
  Rng rng(3);
  for (int it = 0; it < 500; ++it) {
    CameraPose pose;
    pose.location = Vec3(rng.uniform(45, 60), rng.uniform(-60, -20), rng.uniform(10, 23));
    pose.focal_length = rng.uniform(1500, 5000);
    pose.pan_deg = rng.uniform(-35, 35);
    pose.tilt_deg = rng.uniform(-18, -6);
    const Homography h = pose_to_homography(pose, 1280, 720);
    const Vec2 p(rng.uniform(0, 105), rng.uniform(0, 68));
    const auto img = h.try_apply(p);
    if (!img) continue;
    const auto back = project_position(h, *img);
    REQUIRE(back.has_value());
    CHECK((*back - p).norm() < 1e-6);
  }
}

TEST_CASE("self_verify keeps in-field and boundary positions, discards beyond rho") {
  const FieldTemplate field = standard_field();
  const SvConfig cfg{3.0};
  std::vector<std::optional<Vec2>> inside = {Vec2(10, 10), Vec2(52.5, 34), Vec2(104, 67)};
  CHECK(self_verify(inside, field, cfg));

  std::vector<std::optional<Vec2>> beyond = {Vec2(10, 10), Vec2(-3.1, 30)};
  CHECK_FALSE(self_verify(beyond, field, cfg));

  std::vector<std::optional<Vec2>> boundary = {Vec2(-3.0, 30)};
  CHECK(self_verify(boundary, field, cfg));

  std::vector<std::optional<Vec2>> invalid = {Vec2(10, 10), std::nullopt};
  CHECK_FALSE(self_verify(invalid, field, cfg));

  std::vector<std::optional<Vec2>> empty;
  CHECK(self_verify(empty, field, cfg));

  // rho = infinity keeps every finite position but still rejects invalid ones.
  const SvConfig inf_cfg{std::numeric_limits<double>::infinity()};
  std::vector<std::optional<Vec2>> far = {Vec2(1e6, -1e6)};
  CHECK(self_verify(far, field, inf_cfg));
  CHECK_FALSE(self_verify(invalid, field, inf_cfg));
}

TEST_CASE("sv kept set is monotone in rho") {
  const FieldTemplate field = standard_field();
  Rng rng(4);
  const std::vector<double> rhos = {0.0, 1.0, 2.0, 3.0, 5.0};
  for (int it = 0; it < 200; ++it) {
    std::vector<std::optional<Vec2>> ps;
    const int n = rng.uniform_int(1, 8);
    for (int i = 0; i < n; ++i) {
      ps.emplace_back(Vec2(rng.uniform(-10, 115), rng.uniform(-10, 78)));
    }
    bool prev = false;
    for (const double rho : rhos) {
      const bool keep = self_verify(ps, field, SvConfig{rho});
      if (prev) CHECK(keep);  // once kept at a smaller rho, kept at larger
      prev = keep;
    }
  }
}

TEST_CASE("extract_frame_positions: empty detections give a kept frame") {
  const FieldTemplate field = standard_field();
  const Homography h = pose_to_homography(CameraPose{}, 1280, 720);
  const FrameEstimate fe = extract_frame_positions({}, h, field, SvConfig{3.0});
  CHECK(fe.sv_keep);
  CHECK(fe.players.empty());
}

TEST_CASE("extract_frame_positions: noiseless synthetic detections recover ground truth") {
  const FieldTemplate field = standard_field();
  Rng rng(5);
  CameraPose pose;
  pose.focal_length = 2000;
  const Homography h = pose_to_homography(pose, 1280, 720);
  std::vector<Detection> dets;
  std::vector<Vec2> truth;
  while (truth.size() < 20) {
    const Vec2 p(rng.uniform(0, 105), rng.uniform(0, 68));
    const auto img = h.try_apply(p);
    if (!img || img->x() < 20 || img->x() > 1260 || img->y() < 40 || img->y() > 700) continue;
    Detection d;
    d.frame = 9;
    d.x1 = img->x() - 8;
    d.x2 = img->x() + 8;
    d.y1 = img->y() - 30;
    d.y2 = img->y();
    dets.push_back(d);
    truth.push_back(p);
  }
  const FrameEstimate fe = extract_frame_positions(dets, h, field, SvConfig{3.0});
  CHECK(fe.frame == 9);
  CHECK(fe.sv_keep);
  REQUIRE(fe.players.size() == truth.size());
  for (std::size_t i = 0; i < truth.size(); ++i) {
    CHECK(fe.players[i].valid);
    CHECK(fe.players[i].detection_id == static_cast<int>(i));
    CHECK((fe.players[i].position - truth[i]).norm() < 1e-6);
  }
}

TEST_CASE("extract_frame_positions: gross homography corruption is usually sv-discarded") {
  // Statistical check over seeds with the canonical corruption generator:
  // 20 m corner displacement against real-ish detections.
  MatchConfig mc;
  mc.frames = 300;
  // Wide framing keeps the touchline strips in view, where a cross-field
  // shift of the projected positions is observable.
  mc.focal_min = 1500;
  mc.focal_max = 1900;
  mc.tilt_min_deg = -13;
  mc.tilt_max_deg = -9;
  const SyntheticMatch match = generate_match(mc, 61);
  const SynthDetections det = corrupt_detections(match, NoiseConfig{}, 61);
  NoiseConfig noise;
  noise.h_corruption_prob = 1.0;
  noise.h_corruption_mag_m = 20.0;
  const CorruptedHomographies corr = corrupt_homographies(match, noise, 61);
  std::map<int, std::vector<Detection>> by_frame;
  for (const auto& d : det.detections) by_frame[d.frame].push_back(d);
  int discarded = 0, total = 0, kept_true = 0;
  for (int t = 0; t < mc.frames; ++t) {
    const auto it = by_frame.find(t);
    if (it == by_frame.end()) continue;
    ++total;
    if (!extract_frame_positions(it->second, corr.homographies[static_cast<std::size_t>(t)],
                                 match.field, SvConfig{3.0})
             .sv_keep) {
      ++discarded;
    }
    if (extract_frame_positions(it->second, match.homographies[static_cast<std::size_t>(t)],
                                match.field, SvConfig{3.0})
            .sv_keep) {
      ++kept_true;
    }
  }
  CHECK(static_cast<double>(discarded) / total > 0.9);
  CHECK(kept_true == total);  // the true homographies all pass sv
}

TEST_CASE("mixed frame indices are rejected") {
  const FieldTemplate field = standard_field();
  std::vector<Detection> dets = {{1, 0, 0, 2, 2}, {2, 0, 0, 2, 2}};
  CHECK_THROWS_AS(extract_frame_positions(dets, Homography(), field, SvConfig{3.0}),
                  std::invalid_argument);
}

TEST_CASE("team label names round trip") {
  for (const TeamLabel t : {TeamLabel::A, TeamLabel::B, TeamLabel::Other, TeamLabel::Unassigned}) {
    CHECK(team_label_from_name(team_label_name(t)) == t);
  }
  CHECK_THROWS_AS(team_label_from_name("X"), std::invalid_argument);
}
