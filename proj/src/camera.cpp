#include "pitchpos/camera.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

#include "pitchpos/rng.hpp"

namespace pitchpos {

namespace {

constexpr double kRefImageWidth = 1280.0;

double deg2rad(double d) { return d * M_PI / 180.0; }

}  // namespace

Mat3 pose_rotation(const CameraPose& pose) {
  const double p = deg2rad(pose.pan_deg);
  const double t = deg2rad(pose.tilt_deg);
  Mat3 r_base;
  r_base << 1, 0, 0,
            0, 0, -1,
            0, 1, 0;
  // Pan about the vertical axis (camera -y after the base mapping).
  Mat3 r_pan;
  r_pan << std::cos(p), 0, std::sin(p),
           0, 1, 0,
           -std::sin(p), 0, std::cos(p);
  // Tilt about the camera x axis; the sign makes negative tilt look down.
  Mat3 r_tilt;
  r_tilt << 1, 0, 0,
            0, std::cos(t), std::sin(t),
            0, -std::sin(t), std::cos(t);
  return r_tilt * r_pan * r_base;
}

Homography pose_to_homography(const CameraPose& pose, int image_w, int image_h) {
  if (!(pose.location.z() > 0.0)) {
    throw std::invalid_argument("pose_to_homography: camera must be above the field plane");
  }
  if (!(pose.focal_length > 0.0)) {
    throw std::invalid_argument("pose_to_homography: focal length must be positive");
  }
  if (image_w <= 0 || image_h <= 0) {
    throw std::invalid_argument("pose_to_homography: empty image size");
  }
  const double f = pose.focal_length * (image_w / kRefImageWidth);
  Mat3 k;
  k << f, 0, image_w / 2.0,
       0, f, image_h / 2.0,
       0, 0, 1;
  const Mat3 r = pose_rotation(pose);
  Mat3 ext;  // [r1 r2 -R*C] restricted to the z = 0 plane
  ext.col(0) = r.col(0);
  ext.col(1) = r.col(1);
  ext.col(2) = -r * pose.location;
  return Homography(Mat3(k * ext));
}

void aim_at(const Vec3& location, const Vec2& target, double& pan_deg, double& tilt_deg) {
  const Vec3 d = (Vec3(target.x(), target.y(), 0.0) - location).normalized();
  // Look direction in this convention: (-sin(pan) cos(tilt), cos(pan) cos(tilt), sin(tilt)).
  tilt_deg = std::asin(d.z()) * 180.0 / M_PI;
  pan_deg = std::atan2(-d.x(), d.y()) * 180.0 / M_PI;
}

PoseDistributionConfig preset_wc14_base() { return PoseDistributionConfig{}; }

PoseDistributionConfig preset_extended() {
  PoseDistributionConfig c;
  c.pan = ScalarDist::uniform(-40.0, 40.0);
  c.tilt = ScalarDist::uniform(-20.0, -5.0);
  return c;
}

PoseDistributionConfig preset_uniform_focal() {
  PoseDistributionConfig c = preset_extended();
  c.focal = ScalarDist::uniform(1000.0, 6000.0);
  return c;
}

PoseDistributionConfig preset_uniform_focal_xyz() {
  PoseDistributionConfig c = preset_uniform_focal();
  c.x = ScalarDist::uniform(45.0, 60.0);
  c.y = ScalarDist::uniform(-66.0, -17.0);
  c.z = ScalarDist::uniform(10.0, 23.0);
  c.count = 100000;
  return c;
}

PoseDistributionConfig preset_by_name(const std::string& name) {
  if (name == "wc14-base") return preset_wc14_base();
  if (name == "extended") return preset_extended();
  if (name == "uniform-focal") return preset_uniform_focal();
  if (name == "uniform-focal-xyz") return preset_uniform_focal_xyz();
  throw std::invalid_argument("unknown pose preset: " + name);
}

namespace {

double draw(Rng& rng, const ScalarDist& d) {
  if (d.kind == ScalarDist::Kind::Normal) return rng.normal(d.a, d.b);
  return rng.uniform(d.a, d.b);
}

}  // namespace

std::vector<CameraPose> sample_poses(const PoseDistributionConfig& cfg) {
  if (cfg.count <= 0) throw std::invalid_argument("sample_poses: count must be positive");
  for (const ScalarDist* d : {&cfg.x, &cfg.y, &cfg.z, &cfg.focal, &cfg.pan, &cfg.tilt}) {
    if (d->kind == ScalarDist::Kind::Uniform && !(d->b >= d->a)) {
      throw std::invalid_argument("sample_poses: empty uniform range");
    }
    if (d->kind == ScalarDist::Kind::Normal && !(d->b >= 0.0)) {
      throw std::invalid_argument("sample_poses: negative standard deviation");
    }
  }
  Rng rng = Rng(cfg.seed).fork(1);
  std::vector<CameraPose> out;
  out.reserve(static_cast<std::size_t>(cfg.count));
  for (int i = 0; i < cfg.count; ++i) {
    CameraPose p;
    p.location.x() = draw(rng, cfg.x);
    p.location.y() = draw(rng, cfg.y);
    p.location.z() = draw(rng, cfg.z);
    p.focal_length = draw(rng, cfg.focal);
    p.pan_deg = draw(rng, cfg.pan);
    p.tilt_deg = draw(rng, cfg.tilt);
    out.push_back(p);
  }
  return out;
}

}  // namespace pitchpos
