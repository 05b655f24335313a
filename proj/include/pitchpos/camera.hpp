#pragma once

#include <cstdint>
#include <vector>

#include "pitchpos/geometry.hpp"

namespace pitchpos {

/// Pan-tilt-zoom pinhole camera over the field frame.
///
/// Repo-wide rotation convention (only self-consistency matters for the
/// synthetic pipeline, so it is pinned here once):
///   - world: x along the 105 m touchline, y across the pitch, z up; the
///     origin is the lower-left corner flag
///   - at pan = tilt = 0 the camera looks along +y with image x = world x
///     and image y pointing down
///   - pan rotates the view about the vertical axis (positive pan looks
///     toward -x), tilt pitches it (negative tilt looks down, matching the
///     broadcast ranges where cameras sit above the stands)
/// The full world-to-camera rotation is R = R_tilt * R_pan * R_base with
/// R_base = [[1,0,0],[0,0,-1],[0,1,0]].
struct CameraPose {
  Vec3 location = Vec3(52.5, -45.0, 17.0);  // meters, field frame; z > 0
  double focal_length = 3018.0;  // pixels at the 1280x720 reference image
  double pan_deg = 0.0;
  double tilt_deg = -10.0;
};

Mat3 pose_rotation(const CameraPose& pose);

/// Homography mapping the field plane (X, Y, z = 0) to image pixels:
/// K * R * [e1 e2 -C] with the principal point at the image center. The
/// focal length is interpreted at the 1280-wide reference image and scaled
/// proportionally for other sizes. Throws std::invalid_argument for a
/// degenerate pose (camera on the field plane, or non-positive focal).
Homography pose_to_homography(const CameraPose& pose, int image_w, int image_h);

/// Pan and tilt (degrees) that aim the optical axis from `location` at the
/// field point `target` (z = 0).
void aim_at(const Vec3& location, const Vec2& target, double& pan_deg, double& tilt_deg);

/// Scalar sampling distribution: Normal(mu, sigma) or Uniform(lo, hi).
struct ScalarDist {
  enum class Kind { Normal, Uniform };
  Kind kind = Kind::Uniform;
  double a = 0.0;  // mu or lo
  double b = 1.0;  // sigma or hi

  static ScalarDist normal(double mu, double sigma) { return {Kind::Normal, mu, sigma}; }
  static ScalarDist uniform(double lo, double hi) { return {Kind::Uniform, lo, hi}; }
};

/// Pose sampling configuration. Draw order per pose: x, y, z, focal, pan,
/// tilt from a single stream forked off the seed (fork tag 1), so lists are
/// bitwise reproducible given (config, seed).
struct PoseDistributionConfig {
  ScalarDist x = ScalarDist::normal(52.0, 2.0);
  ScalarDist y = ScalarDist::normal(-45.0, 9.0);
  ScalarDist z = ScalarDist::normal(17.0, 3.0);
  ScalarDist focal = ScalarDist::normal(3018.0, 716.0);
  ScalarDist pan = ScalarDist::uniform(-35.0, 35.0);
  ScalarDist tilt = ScalarDist::uniform(-15.0, -5.0);
  int count = 50000;
  std::uint64_t seed = 1;
};

// Camera distribution presets (WC14 statistics and the widened variants).
PoseDistributionConfig preset_wc14_base();
PoseDistributionConfig preset_extended();       // pan (-40, 40), tilt (-20, -5)
PoseDistributionConfig preset_uniform_focal();  // extended + focal U(1000, 6000)
PoseDistributionConfig preset_uniform_focal_xyz();  // + location U([45,-66,10],[60,-17,23]), 100000

/// Resolves one of "wc14-base", "extended", "uniform-focal",
/// "uniform-focal-xyz". Throws std::invalid_argument on unknown names.
PoseDistributionConfig preset_by_name(const std::string& name);

std::vector<CameraPose> sample_poses(const PoseDistributionConfig& cfg);

}  // namespace pitchpos
