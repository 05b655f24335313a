#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "pitchpos/camera.hpp"
#include "pitchpos/field_model.hpp"
#include "pitchpos/geometry.hpp"

namespace pitchpos {

/// Deterministic retrieval descriptor: Gaussian-blur the binary edge image,
/// pool to a coarse grid by area averaging, flatten, L2-normalize.
struct DescriptorConfig {
  double sigma = 4.0;  // blur, pixels at the descriptor input resolution
  int grid_w = 40;
  int grid_h = 23;
  int input_w = 320;  // edge images are downsampled to this before blurring
  int input_h = 180;
};

struct FeatureVector {
  Eigen::VectorXf values;
  bool valid = false;  // all-zero edge images yield an invalid descriptor
};

/// Expects `edges` at cfg.input_w x cfg.input_h; callers downsample first
/// (see downsample_edges). Throws on empty image dimensions.
FeatureVector descriptor(const EdgeImage& edges, const DescriptorConfig& cfg);

double descriptor_distance(const FeatureVector& a, const FeatureVector& b);

/// Synthetic reference database: one unit-norm descriptor row per camera
/// pose whose rendered edge image is non-empty.
struct FeatureDB {
  DescriptorConfig cfg;
  int render_w = 1280;
  int render_h = 720;
  double line_width = 2.0;
  Eigen::Matrix<float, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor> descriptors;
  std::vector<CameraPose> poses;
  int excluded = 0;  // poses skipped because they rendered no field pixels

  int size() const { return static_cast<int>(poses.size()); }
};

struct DbBuildConfig {
  int render_w = 1280;
  int render_h = 720;
  double line_width = 2.0;
  DescriptorConfig descriptor;
  unsigned threads = 0;  // 0 = hardware concurrency
};

FeatureDB build_feature_db(const std::vector<CameraPose>& poses, const FieldTemplate& field,
                           const DbBuildConfig& cfg);

// Binary container: magic/version header, descriptor config, row-major
// float32 descriptor block, then poses as full-precision CSV text.
void save_feature_db(const FeatureDB& db, const std::string& path);
FeatureDB load_feature_db(const std::string& path);

struct RetrievalHit {
  int index = -1;
  double distance = 0.0;
};

/// Exact k-nearest by L2 over the whole database, ascending distance, ties
/// broken by lower index. Distances accumulate in double so results are
/// independent of blocking. Throws on empty db, invalid query, or bad k.
std::vector<RetrievalHit> retrieve_nearest(const FeatureDB& db, const FeatureVector& query, int k);

struct RefinementParams {
  int max_iterations = 50;
  double convergence_threshold = 1e-4;  // Gauss-Newton update norm
  double truncation = 30.0;             // distance-transform clamp, pixels
  double damping = 0.5;                 // step shrink factor on rejection
  int max_damping_retries = 5;
  double sample_step_m = 0.25;          // template sampling along primitives
};

struct RefineResult {
  Homography h;
  double residual = 0.0;  // mean truncated distance over in-view samples, px
  bool refined = false;
  int iterations = 0;
};

/// Gauss-Newton minimization of the squared truncated distance-image value
/// of the observed edges at the projected template samples, over the eight
/// homography parameters (h33 fixed at 1). Never returns a result with a
/// higher residual than H_init; an all-zero observed image or singular
/// normal equations leave H_init unrefined.
RefineResult refine_homography(const Homography& h_init, const EdgeImage& observed,
                               const FieldTemplate& field, const RefinementParams& params);

/// IoU of the camera-visible field regions of two homographies: the image
/// rectangle is clipped against the positive-depth half-plane of each
/// inverse map, carried to the field plane, clipped to the field rectangle,
/// and intersected. Symmetric and invariant to projective rescaling.
double iou_part(const Homography& h_pred, const Homography& h_gt, int image_w, int image_h,
                const FieldTemplate& field);

/// Visible-field polygon used by iou_part; exposed for tests and tools.
Polygon visible_field_polygon(const Homography& h, int image_w, int image_h,
                              const FieldTemplate& field);

/// Full per-frame registration: descriptor, k-candidate retrieval, then
/// coarse-to-fine refinement of each candidate; returns the candidate with
/// the lowest final residual. `observed` must be render_w x render_h.
struct RegisterFrameParams {
  int candidates = 3;
  bool refine = true;
  int coarse_scale = 4;  // first refinement pass on a 1/coarse_scale image
  RefinementParams refinement;
};

struct RegisterFrameResult {
  bool ok = false;  // false when the observed image is empty or db is empty
  Homography h;
  int db_index = -1;
  double retrieval_distance = 0.0;
  double residual = 0.0;
  bool refined = false;
};

RegisterFrameResult register_frame(const FeatureDB& db, const EdgeImage& observed,
                                   const FieldTemplate& field, const RegisterFrameParams& params);

}  // namespace pitchpos
