#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <filesystem>
#include <fstream>

#include "pitchpos/registration.hpp"
#include "pitchpos/rng.hpp"

using namespace pitchpos;

namespace {

CameraPose broadcast_pose(Rng& rng) {
  CameraPose p;
  p.location = Vec3(rng.uniform(50, 55), rng.uniform(-50, -40), rng.uniform(15, 19));
  p.focal_length = rng.uniform(2200, 4000);
  p.pan_deg = rng.uniform(-30, 30);
  p.tilt_deg = rng.uniform(-14, -6);
  return p;
}

EdgeImage render_pose(const FieldTemplate& field, const CameraPose& pose, int w, int h,
                      double line_width) {
  return render_edge_image(field, pose_to_homography(pose, w, h), w, h, line_width);
}

}  // namespace

TEST_CASE("descriptor: identical images, unit norm, invalid on empty") {
  const FieldTemplate field = standard_field();
  Rng rng(1);
  const CameraPose pose = broadcast_pose(rng);
  const EdgeImage full = render_pose(field, pose, 1280, 720, 2.0);
  const EdgeImage img = downsample_edges(full, 320, 180);
  DescriptorConfig cfg;
  const FeatureVector a = descriptor(img, cfg);
  const FeatureVector b = descriptor(img, cfg);
  REQUIRE(a.valid);
  CHECK(descriptor_distance(a, b) == 0.0);
  CHECK(a.values.cast<double>().norm() == doctest::Approx(1.0).epsilon(1e-6));
  CHECK(a.values.size() == 40 * 23);

  const EdgeImage empty(320, 180);
  const FeatureVector e = descriptor(empty, cfg);
  CHECK_FALSE(e.valid);
  CHECK(e.values.cast<double>().norm() == 0.0);
}

TEST_CASE("descriptor distance grows with displacement") {
  // Sparse synthetic strokes, shifted by 1 px and by 50 px.
  auto make = [](int shift) {
    EdgeImage img(320, 180);
    for (int y = 40; y < 140; ++y) img.set(80 + shift, y, 1);
    for (int x = 60; x < 260; ++x) img.set(x + shift < 320 ? x + shift : 319, 90, 1);
    return img;
  };
  DescriptorConfig cfg;
  const FeatureVector base = descriptor(make(0), cfg);
  const FeatureVector s1 = descriptor(make(1), cfg);
  const FeatureVector s50 = descriptor(make(50), cfg);
  const double d1 = descriptor_distance(base, s1);
  const double d50 = descriptor_distance(base, s50);
  CHECK(d1 > 0.0);
  CHECK(d1 < d50);
}

TEST_CASE("build_feature_db: counts, exclusions, deterministic files") {
  const FieldTemplate field = standard_field();
  PoseDistributionConfig pd = preset_wc14_base();
  pd.count = 40;
  pd.seed = 5;
  auto poses = sample_poses(pd);
  // A pose staring into the sky renders nothing and must be excluded.
  CameraPose sky;
  sky.tilt_deg = 60.0;
  poses.push_back(sky);

  DbBuildConfig bc;
  const FeatureDB db = build_feature_db(poses, field, bc);
  // Wide-pan poses close to the touchline can legitimately see no markings,
  // so only the sky pose is guaranteed excluded.
  CHECK(db.size() + db.excluded == 41);
  CHECK(db.excluded >= 1);
  for (int i = 0; i < db.size(); ++i) {
    CHECK(db.descriptors.row(i).cast<double>().norm() == doctest::Approx(1.0).epsilon(1e-6));
  }

  namespace fs = std::filesystem;
  const auto p1 = fs::temp_directory_path() / "pitchpos_db1.bin";
  const auto p2 = fs::temp_directory_path() / "pitchpos_db2.bin";
  save_feature_db(db, p1.string());
  const FeatureDB db2 = build_feature_db(poses, field, bc);
  save_feature_db(db2, p2.string());
  std::ifstream f1(p1, std::ios::binary), f2(p2, std::ios::binary);
  const std::string c1((std::istreambuf_iterator<char>(f1)), std::istreambuf_iterator<char>());
  const std::string c2((std::istreambuf_iterator<char>(f2)), std::istreambuf_iterator<char>());
  CHECK(c1 == c2);

  // Round trip.
  const FeatureDB loaded = load_feature_db(p1.string());
  CHECK(loaded.size() == db.size());
  CHECK(loaded.excluded == db.excluded);
  CHECK(loaded.descriptors == db.descriptors);
  CHECK(loaded.poses[3].focal_length == db.poses[3].focal_length);
  CHECK(loaded.cfg.grid_w == db.cfg.grid_w);
  fs::remove(p1);
  fs::remove(p2);
}

TEST_CASE("retrieve_nearest: self retrieval, full sort, brute-force oracle") {
  const FieldTemplate field = standard_field();
  PoseDistributionConfig pd = preset_wc14_base();
  pd.count = 60;
  pd.seed = 9;
  const auto poses = sample_poses(pd);
  DbBuildConfig bc;
  const FeatureDB db = build_feature_db(poses, field, bc);
  REQUIRE(db.size() == 60);

  // Entry i queried with its own descriptor comes back first at distance 0.
  for (int i = 0; i < db.size(); i += 7) {
    FeatureVector q;
    q.values = db.descriptors.row(i).transpose();
    q.valid = true;
    const auto hits = retrieve_nearest(db, q, 3);
    CHECK(hits[0].index == i);
    CHECK(hits[0].distance == 0.0);
  }

  // k = n returns the full ascending list; exact match with a linear scan.
  Rng rng(3);
  for (int trial = 0; trial < 10; ++trial) {
    FeatureVector q;
    q.values = Eigen::VectorXf(db.descriptors.cols());
    for (Eigen::Index j = 0; j < q.values.size(); ++j) {
      q.values(j) = static_cast<float>(rng.uniform(0.0, 0.1));
    }
    q.values /= q.values.norm();
    q.valid = true;
    const auto hits = retrieve_nearest(db, q, db.size());
    REQUIRE(static_cast<int>(hits.size()) == db.size());

    // Independent oracle: same double accumulation, explicit stable sort.
    std::vector<std::pair<double, int>> ref;
    for (int i = 0; i < db.size(); ++i) {
      double acc = 0.0;
      for (Eigen::Index j = 0; j < db.descriptors.cols(); ++j) {
        const double d = static_cast<double>(db.descriptors(i, j)) - static_cast<double>(q.values(j));
        acc += d * d;
      }
      ref.emplace_back(std::sqrt(acc), i);
    }
    std::stable_sort(ref.begin(), ref.end());
    for (int i = 0; i < db.size(); ++i) {
      CHECK(hits[static_cast<std::size_t>(i)].index == ref[static_cast<std::size_t>(i)].second);
      CHECK(hits[static_cast<std::size_t>(i)].distance == ref[static_cast<std::size_t>(i)].first);
    }
    for (int i = 1; i < db.size(); ++i) {
      CHECK(hits[static_cast<std::size_t>(i)].distance >=
            hits[static_cast<std::size_t>(i - 1)].distance);
    }
  }

  FeatureVector bad;
  bad.values = Eigen::VectorXf::Zero(db.descriptors.cols());
  bad.valid = false;
  CHECK_THROWS_AS(retrieve_nearest(db, bad, 1), std::invalid_argument);
}

TEST_CASE("end-to-end: a query rendered from a database pose recovers it at rank 1") {
  const FieldTemplate field = standard_field();
  PoseDistributionConfig pd = preset_extended();
  pd.count = 120;
  pd.seed = 21;
  const auto poses = sample_poses(pd);
  DbBuildConfig bc;
  const FeatureDB db = build_feature_db(poses, field, bc);

  Rng rng(4);
  for (int trial = 0; trial < 10; ++trial) {
    const int target = rng.uniform_int(0, db.size() - 1);
    const EdgeImage obs = render_pose(field, db.poses[static_cast<std::size_t>(target)], 1280, 720,
                                      bc.line_width);
    const EdgeImage small = downsample_edges(obs, db.cfg.input_w, db.cfg.input_h);
    const FeatureVector q = descriptor(small, db.cfg);
    REQUIRE(q.valid);
    const auto hits = retrieve_nearest(db, q, 1);
    CHECK(hits[0].index == target);
    CHECK(hits[0].distance < 1e-6);
  }
}

namespace {

double mean_corner_error(const Homography& a, const Homography& b, const FieldTemplate& field) {
  const std::vector<Vec2> corners = {Vec2(0, 0), Vec2(field.length, 0),
                                     Vec2(field.length, field.width), Vec2(0, field.width)};
  double sum = 0.0;
  for (const auto& c : corners) {
    const auto pa = a.try_apply(c);
    const auto pb = b.try_apply(c);
    if (!pa || !pb) return 1e9;
    sum += (*pa - *pb).norm();
  }
  return sum / 4.0;
}

// H_init displaced from h_true by at most max_px at the projected field corners.
Homography perturb_corners(const Homography& h_true, const FieldTemplate& field, double max_px,
                           Rng& rng) {
  const std::vector<Vec2> corners = {Vec2(0, 0), Vec2(field.length, 0),
                                     Vec2(field.length, field.width), Vec2(0, field.width)};
  std::vector<Vec2> img;
  for (const auto& c : corners) {
    const auto q = h_true.try_apply(c);
    REQUIRE(q.has_value());
    const double angle = rng.uniform(0, 2 * M_PI);
    const double r = rng.uniform(0.5, 1.0) * max_px;
    img.push_back(*q + r * Vec2(std::cos(angle), std::sin(angle)));
  }
  return fit_homography(corners, img);
}

}  // namespace

TEST_CASE("refine: zero-residual initialization is a fixed point") {
  const FieldTemplate field = standard_field();
  Rng rng(6);
  const CameraPose pose = broadcast_pose(rng);
  const Homography h = pose_to_homography(pose, 1280, 720);
  const EdgeImage obs = render_edge_image(field, h, 1280, 720, 2.0);
  RefinementParams params;
  const RefineResult res = refine_homography(h, obs, field, params);
  CHECK(res.iterations <= 1);
  CHECK((res.h.matrix() - h.matrix()).norm() < 1e-6);
  CHECK(res.residual < 0.5);
}

TEST_CASE("refine: recovers the true homography from a 2 px corner perturbation") {
  const FieldTemplate field = standard_field();
  Rng rng(7);
  RefinementParams params;
  // Full-field views keep all four corners near the image, where the corner
  // metric is well conditioned. Zoomed broadcast poses leave the corners
  // thousands of pixels outside the frame; extrapolation there amplifies the
  // rasterization-bias floor and is covered by the IoU checks instead.
  for (int trial = 0; trial < 8; ++trial) {
    Mat3 scale;
    scale << 11.0, 0, 60, 0, 9.5, 30, 0, 0, 1;
    const std::vector<Vec2> corners = {Vec2(0, 0), Vec2(field.length, 0),
                                       Vec2(field.length, field.width), Vec2(0, field.width)};
    std::vector<Vec2> warped;
    for (const auto& c : corners) {
      const Vec2 q = *Homography(scale).try_apply(c);
      const double angle = rng.uniform(0, 2 * M_PI);
      warped.push_back(q + rng.uniform(0.0, 20.0) * Vec2(std::cos(angle), std::sin(angle)));
    }
    const Homography h_true = fit_homography(corners, warped);
    const EdgeImage obs = render_edge_image(field, h_true, 1280, 720, 2.0);
    const Homography h_init = perturb_corners(h_true, field, 2.0, rng);
    const RefineResult res = refine_homography(h_init, obs, field, params);
    CHECK(res.refined);
    const double err = mean_corner_error(res.h, h_true, field);
    CHECK(err < 0.5);
  }
}

TEST_CASE("refine: all-zero observed image is flagged unrefined") {
  const FieldTemplate field = standard_field();
  const Homography h = pose_to_homography(CameraPose{}, 1280, 720);
  const EdgeImage empty(1280, 720);
  RefinementParams params;
  const RefineResult res = refine_homography(h, empty, field, params);
  CHECK_FALSE(res.refined);
  CHECK((res.h.matrix() - h.matrix()).norm() == 0.0);
}

TEST_CASE("refine: never returns a higher residual than the initialization") {
  const FieldTemplate field = standard_field();
  Rng rng(8);
  RefinementParams params;
  for (int trial = 0; trial < 6; ++trial) {
    const CameraPose pose = broadcast_pose(rng);
    const Homography h_true = pose_to_homography(pose, 1280, 720);
    const EdgeImage obs = render_edge_image(field, h_true, 1280, 720, 2.0);
    const DistanceImage dist = distance_transform(obs, params.truncation);
    const Homography h_init = perturb_corners(h_true, field, rng.uniform(1.0, 40.0), rng);
    // Initial residual, measured the same way refine reports it.
    auto residual_of = [&](const Homography& h) {
      double sum = 0.0;
      int n = 0;
      for (const auto& s : sample_template_points(field, params.sample_step_m)) {
        if (h.depth(s) <= 1e-9) continue;
        const auto q = h.try_apply(s);
        if (!q || q->x() < 1 || q->x() > 1278 || q->y() < 1 || q->y() > 718) continue;
        const int x = static_cast<int>(q->x());
        const int y = static_cast<int>(q->y());
        sum += dist.at(x, y);
        ++n;
      }
      return n > 0 ? sum / n : params.truncation;
    };
    const RefineResult res = refine_homography(h_init, obs, field, params);
    CHECK(res.residual <= residual_of(h_init) + 1.0);  // slack: grid vs bilinear sampling
  }
}

TEST_CASE("iou_part: identical poses give exactly 1") {
  const FieldTemplate field = standard_field();
  Rng rng(9);
  for (int trial = 0; trial < 10; ++trial) {
    const CameraPose pose = broadcast_pose(rng);
    const Homography h = pose_to_homography(pose, 1280, 720);
    CHECK(iou_part(h, h, 1280, 720, field) == 1.0);
  }
}

TEST_CASE("iou_part: disjoint field halves give 0") {
  const FieldTemplate field = standard_field();
  CameraPose left, right;
  left.location = right.location = Vec3(52.5, -45, 17);
  left.focal_length = right.focal_length = 6000;
  left.pan_deg = 28;   // positive pan looks toward -x
  right.pan_deg = -28;
  left.tilt_deg = right.tilt_deg = -10;
  const Homography hl = pose_to_homography(left, 1280, 720);
  const Homography hr = pose_to_homography(right, 1280, 720);
  CHECK(iou_part(hl, hr, 1280, 720, field) == 0.0);
}

TEST_CASE("iou_part: symmetric and invariant to projective rescaling") {
  const FieldTemplate field = standard_field();
  Rng rng(10);
  for (int trial = 0; trial < 20; ++trial) {
    const Homography a = pose_to_homography(broadcast_pose(rng), 1280, 720);
    const Homography b = pose_to_homography(broadcast_pose(rng), 1280, 720);
    const double ab = iou_part(a, b, 1280, 720, field);
    const double ba = iou_part(b, a, 1280, 720, field);
    CHECK(ab == doctest::Approx(ba).epsilon(1e-12));
    const Homography a_scaled(Mat3(-2.5 * a.matrix()));
    CHECK(iou_part(a_scaled, b, 1280, 720, field) == doctest::Approx(ab).epsilon(1e-12));
  }
}

namespace {

// Monte-Carlo IoU oracle over the field rectangle, with per-homography depth
// sign resolved by the majority side (mirrors the polygon construction).
double mc_iou(const Homography& h1, const Homography& h2, int w, int h,
              const FieldTemplate& field, int samples, Rng& rng) {
  auto in_image = [&](const Homography& hom, const Vec2& p, double sign) {
    if (sign * hom.depth(p) <= 0.0) return false;
    const auto q = hom.try_apply(p);
    return q && q->x() >= 0 && q->x() <= w && q->y() >= 0 && q->y() <= h;
  };
  long npp = 0, npm = 0, nmp = 0, nmm = 0;
  long n1p = 0, n1m = 0, n2p = 0, n2m = 0;
  std::vector<Vec2> pts;
  pts.reserve(static_cast<std::size_t>(samples));
  for (int i = 0; i < samples; ++i) {
    pts.emplace_back(rng.uniform(0, field.length), rng.uniform(0, field.width));
  }
  for (const auto& p : pts) {
    const bool a_p = in_image(h1, p, 1.0), a_m = in_image(h1, p, -1.0);
    const bool b_p = in_image(h2, p, 1.0), b_m = in_image(h2, p, -1.0);
    n1p += a_p;
    n1m += a_m;
    n2p += b_p;
    n2m += b_m;
    npp += a_p && b_p;
    npm += a_p && b_m;
    nmp += a_m && b_p;
    nmm += a_m && b_m;
  }
  const bool s1 = n1p >= n1m;
  const bool s2 = n2p >= n2m;
  const long inter = s1 ? (s2 ? npp : npm) : (s2 ? nmp : nmm);
  const long a = s1 ? n1p : n1m;
  const long b = s2 ? n2p : n2m;
  const long uni = a + b - inter;
  return uni > 0 ? static_cast<double>(inter) / static_cast<double>(uni) : 0.0;
}

}  // namespace

TEST_CASE("iou_part agrees with the Monte-Carlo raster oracle") {
  const FieldTemplate field = standard_field();
  Rng rng(11);
  for (int trial = 0; trial < 30; ++trial) {
    const Homography a = pose_to_homography(broadcast_pose(rng), 1280, 720);
    const Homography b = pose_to_homography(broadcast_pose(rng), 1280, 720);
    const double poly = iou_part(a, b, 1280, 720, field);
    const double mc = mc_iou(a, b, 1280, 720, field, 200000, rng);
    CHECK(std::abs(poly - mc) < 0.015);
  }
}

TEST_CASE("iou_part: degenerate homographies give 0") {
  const FieldTemplate field = standard_field();
  Mat3 singular = Mat3::Zero();
  singular(0, 0) = 1;
  singular(1, 0) = 1;
  singular(2, 2) = 1;
  const Homography ok = pose_to_homography(CameraPose{}, 1280, 720);
  CHECK(iou_part(Homography(singular), ok, 1280, 720, field) == 0.0);
  CHECK(iou_part(ok, Homography(singular), 1280, 720, field) == 0.0);
}

TEST_CASE("feature db loading rejects corrupt files") {
  namespace fs = std::filesystem;
  const auto dir = fs::temp_directory_path();
  const auto bad_magic = dir / "pitchpos_badmagic.bin";
  {
    std::ofstream f(bad_magic, std::ios::binary);
    f << "NOTADB!!" << std::string(64, '\0');
  }
  CHECK_THROWS_AS(load_feature_db(bad_magic.string()), std::runtime_error);
  fs::remove(bad_magic);

  // Truncated: valid header start, then EOF.
  const FieldTemplate field = standard_field();
  PoseDistributionConfig pd = preset_wc14_base();
  pd.count = 5;
  const FeatureDB db = build_feature_db(sample_poses(pd), field, DbBuildConfig{});
  const auto full = dir / "pitchpos_full.bin";
  save_feature_db(db, full.string());
  std::ifstream in(full, std::ios::binary);
  std::string bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  const auto truncated = dir / "pitchpos_trunc.bin";
  {
    std::ofstream f(truncated, std::ios::binary);
    f.write(bytes.data(), static_cast<std::streamsize>(bytes.size() / 2));
  }
  CHECK_THROWS_AS(load_feature_db(truncated.string()), std::runtime_error);
  fs::remove(full);
  fs::remove(truncated);
}

TEST_CASE("register_frame: refined registration of a fresh pose") {
  const FieldTemplate field = standard_field();
  PoseDistributionConfig pd;
  pd.x = ScalarDist::uniform(51.5, 52.5);
  pd.y = ScalarDist::uniform(-47, -43);
  pd.z = ScalarDist::uniform(16.5, 17.5);
  pd.focal = ScalarDist::uniform(2400, 3600);
  pd.pan = ScalarDist::uniform(-30, 30);
  pd.tilt = ScalarDist::uniform(-14, -6);
  pd.count = 800;
  pd.seed = 31;
  DbBuildConfig bc;
  const FeatureDB db = build_feature_db(sample_poses(pd), field, bc);

  Rng rng(12);
  RegisterFrameParams rp;
  int good = 0;
  const int trials = 5;
  for (int trial = 0; trial < trials; ++trial) {
    CameraPose pose;
    pose.location = Vec3(rng.uniform(51.6, 52.4), rng.uniform(-46.5, -43.5), rng.uniform(16.6, 17.4));
    pose.focal_length = rng.uniform(2500, 3500);
    pose.pan_deg = rng.uniform(-25, 25);
    pose.tilt_deg = rng.uniform(-13, -7);
    const Homography h_true = pose_to_homography(pose, 1280, 720);
    const EdgeImage obs = render_edge_image(field, h_true, 1280, 720, bc.line_width);
    const RegisterFrameResult res = register_frame(db, obs, field, rp);
    REQUIRE(res.ok);
    if (iou_part(res.h, h_true, 1280, 720, field) >= 0.95) ++good;
  }
  CHECK(good == trials);

  // Empty observation: registration reports failure instead of guessing.
  const EdgeImage empty(1280, 720);
  CHECK_FALSE(register_frame(db, empty, field, rp).ok);
}
