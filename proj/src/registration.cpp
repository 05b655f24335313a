#include "pitchpos/registration.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <cstring>
#include <fstream>
#include <numeric>
#include <sstream>
#include <stdexcept>

#include "pitchpos/parallel.hpp"

namespace pitchpos {

namespace {

std::vector<float> gaussian_blur(const EdgeImage& img, double sigma) {
  const int w = img.width, h = img.height;
  std::vector<float> buf(static_cast<std::size_t>(w) * h);
  for (std::size_t i = 0; i < buf.size(); ++i) buf[i] = img.pixels[i] ? 1.0f : 0.0f;
  if (sigma <= 0.0) return buf;

  const int radius = std::max(1, static_cast<int>(std::ceil(3.0 * sigma)));
  std::vector<float> kernel(2 * radius + 1);
  float sum = 0.0f;
  for (int i = -radius; i <= radius; ++i) {
    kernel[i + radius] = static_cast<float>(std::exp(-0.5 * (i * i) / (sigma * sigma)));
    sum += kernel[i + radius];
  }
  for (auto& k : kernel) k /= sum;

  // Separable convolution with zero padding at the borders.
  std::vector<float> tmp(buf.size());
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      float acc = 0.0f;
      for (int i = -radius; i <= radius; ++i) {
        const int xx = x + i;
        if (xx >= 0 && xx < w) acc += kernel[i + radius] * buf[static_cast<std::size_t>(y) * w + xx];
      }
      tmp[static_cast<std::size_t>(y) * w + x] = acc;
    }
  }
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      float acc = 0.0f;
      for (int i = -radius; i <= radius; ++i) {
        const int yy = y + i;
        if (yy >= 0 && yy < h) acc += kernel[i + radius] * tmp[static_cast<std::size_t>(yy) * w + x];
      }
      buf[static_cast<std::size_t>(y) * w + x] = acc;
    }
  }
  return buf;
}

// Fractional-box area average of src into a gw x gh grid.
Eigen::VectorXf pool_area(const std::vector<float>& src, int w, int h, int gw, int gh) {
  Eigen::VectorXf out(gw * gh);
  const double sx = static_cast<double>(w) / gw;
  const double sy = static_cast<double>(h) / gh;
  for (int gy = 0; gy < gh; ++gy) {
    const double y0 = gy * sy, y1 = (gy + 1) * sy;
    for (int gx = 0; gx < gw; ++gx) {
      const double x0 = gx * sx, x1 = (gx + 1) * sx;
      double acc = 0.0;
      for (int y = static_cast<int>(std::floor(y0)); y < std::min(h, static_cast<int>(std::ceil(y1))); ++y) {
        const double wy = std::min<double>(y + 1, y1) - std::max<double>(y, y0);
        if (wy <= 0) continue;
        for (int x = static_cast<int>(std::floor(x0)); x < std::min(w, static_cast<int>(std::ceil(x1))); ++x) {
          const double wx = std::min<double>(x + 1, x1) - std::max<double>(x, x0);
          if (wx <= 0) continue;
          acc += wx * wy * src[static_cast<std::size_t>(y) * w + x];
        }
      }
      out(gy * gw + gx) = static_cast<float>(acc / (sx * sy));
    }
  }
  return out;
}

}  // namespace

FeatureVector descriptor(const EdgeImage& edges, const DescriptorConfig& cfg) {
  if (edges.width <= 0 || edges.height <= 0) {
    throw std::invalid_argument("descriptor: degenerate edge image");
  }
  if (cfg.grid_w <= 0 || cfg.grid_h <= 0) {
    throw std::invalid_argument("descriptor: degenerate grid size");
  }
  FeatureVector fv;
  const auto blurred = gaussian_blur(edges, cfg.sigma);
  fv.values = pool_area(blurred, edges.width, edges.height, cfg.grid_w, cfg.grid_h);
  const double norm = fv.values.cast<double>().norm();
  if (norm < 1e-12) {
    fv.values.setZero();
    fv.valid = false;
  } else {
    fv.values /= static_cast<float>(norm);
    fv.valid = true;
  }
  return fv;
}

double descriptor_distance(const FeatureVector& a, const FeatureVector& b) {
  if (a.values.size() != b.values.size()) {
    throw std::invalid_argument("descriptor_distance: dimension mismatch");
  }
  double d2 = 0.0;
  for (Eigen::Index i = 0; i < a.values.size(); ++i) {
    const double d = static_cast<double>(a.values(i)) - static_cast<double>(b.values(i));
    d2 += d * d;
  }
  return std::sqrt(d2);
}

FeatureDB build_feature_db(const std::vector<CameraPose>& poses, const FieldTemplate& field,
                           const DbBuildConfig& cfg) {
  if (poses.empty()) throw std::invalid_argument("build_feature_db: empty pose list");
  const int d = cfg.descriptor.grid_w * cfg.descriptor.grid_h;
  const std::size_t n = poses.size();
  std::vector<char> ok(n, 0);
  Eigen::Matrix<float, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor> rows(
      static_cast<Eigen::Index>(n), d);

  parallel_for(n, [&](std::size_t i) {
    try {
      const Homography h = pose_to_homography(poses[i], cfg.render_w, cfg.render_h);
      const EdgeImage img = render_edge_image(field, h, cfg.render_w, cfg.render_h, cfg.line_width);
      if (!img.any_lit()) return;
      const EdgeImage small = downsample_edges(img, cfg.descriptor.input_w, cfg.descriptor.input_h);
      const FeatureVector fv = descriptor(small, cfg.descriptor);
      if (!fv.valid) return;
      rows.row(static_cast<Eigen::Index>(i)) = fv.values.transpose();
      ok[i] = 1;
    } catch (const std::exception&) {
      // Degenerate pose (e.g. z <= 0): skip and count as excluded.
    }
  }, cfg.threads);

  FeatureDB db;
  db.cfg = cfg.descriptor;
  db.render_w = cfg.render_w;
  db.render_h = cfg.render_h;
  db.line_width = cfg.line_width;
  const std::size_t kept = static_cast<std::size_t>(std::count(ok.begin(), ok.end(), 1));
  db.descriptors.resize(static_cast<Eigen::Index>(kept), d);
  db.poses.reserve(kept);
  Eigen::Index r = 0;
  for (std::size_t i = 0; i < n; ++i) {
    if (!ok[i]) continue;
    db.descriptors.row(r++) = rows.row(static_cast<Eigen::Index>(i));
    db.poses.push_back(poses[i]);
  }
  db.excluded = static_cast<int>(n - kept);
  return db;
}

namespace {

constexpr char kDbMagic[8] = {'P', 'P', 'O', 'S', 'F', 'D', 'B', '1'};

template <typename T>
void write_raw(std::ostream& s, const T& v) {
  s.write(reinterpret_cast<const char*>(&v), sizeof(T));
}

template <typename T>
T read_raw(std::istream& s) {
  T v{};
  s.read(reinterpret_cast<char*>(&v), sizeof(T));
  if (!s) throw std::runtime_error("feature db: truncated file");
  return v;
}

}  // namespace

void save_feature_db(const FeatureDB& db, const std::string& path) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw std::runtime_error("save_feature_db: cannot open " + path);
  f.write(kDbMagic, sizeof(kDbMagic));
  write_raw<std::uint32_t>(f, 1);  // version
  write_raw<std::uint32_t>(f, static_cast<std::uint32_t>(db.size()));
  write_raw<std::uint32_t>(f, static_cast<std::uint32_t>(db.descriptors.cols()));
  write_raw<float>(f, static_cast<float>(db.cfg.sigma));
  write_raw<std::uint32_t>(f, static_cast<std::uint32_t>(db.cfg.grid_w));
  write_raw<std::uint32_t>(f, static_cast<std::uint32_t>(db.cfg.grid_h));
  write_raw<std::uint32_t>(f, static_cast<std::uint32_t>(db.cfg.input_w));
  write_raw<std::uint32_t>(f, static_cast<std::uint32_t>(db.cfg.input_h));
  write_raw<std::uint32_t>(f, static_cast<std::uint32_t>(db.render_w));
  write_raw<std::uint32_t>(f, static_cast<std::uint32_t>(db.render_h));
  write_raw<float>(f, static_cast<float>(db.line_width));
  write_raw<std::uint32_t>(f, static_cast<std::uint32_t>(db.excluded));
  f.write(reinterpret_cast<const char*>(db.descriptors.data()),
          static_cast<std::streamsize>(sizeof(float) * db.descriptors.size()));
  // Poses as full-precision CSV so registration output is not quantized.
  std::ostringstream ss;
  ss.precision(17);
  for (const auto& p : db.poses) {
    ss << p.location.x() << ',' << p.location.y() << ',' << p.location.z() << ','
       << p.focal_length << ',' << p.pan_deg << ',' << p.tilt_deg << '\n';
  }
  const std::string text = ss.str();
  f.write(text.data(), static_cast<std::streamsize>(text.size()));
  if (!f) throw std::runtime_error("save_feature_db: short write to " + path);
}

FeatureDB load_feature_db(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw std::runtime_error("load_feature_db: cannot open " + path);
  char magic[8];
  f.read(magic, sizeof(magic));
  if (!f || std::memcmp(magic, kDbMagic, sizeof(magic)) != 0) {
    throw std::runtime_error("load_feature_db: bad magic in " + path);
  }
  const auto version = read_raw<std::uint32_t>(f);
  if (version != 1) throw std::runtime_error("load_feature_db: unsupported version");
  const auto n = read_raw<std::uint32_t>(f);
  const auto d = read_raw<std::uint32_t>(f);
  FeatureDB db;
  db.cfg.sigma = read_raw<float>(f);
  db.cfg.grid_w = static_cast<int>(read_raw<std::uint32_t>(f));
  db.cfg.grid_h = static_cast<int>(read_raw<std::uint32_t>(f));
  db.cfg.input_w = static_cast<int>(read_raw<std::uint32_t>(f));
  db.cfg.input_h = static_cast<int>(read_raw<std::uint32_t>(f));
  db.render_w = static_cast<int>(read_raw<std::uint32_t>(f));
  db.render_h = static_cast<int>(read_raw<std::uint32_t>(f));
  db.line_width = read_raw<float>(f);
  db.excluded = static_cast<int>(read_raw<std::uint32_t>(f));
  if (static_cast<std::uint64_t>(db.cfg.grid_w) * db.cfg.grid_h != d) {
    throw std::runtime_error("load_feature_db: inconsistent descriptor size");
  }
  db.descriptors.resize(n, d);
  f.read(reinterpret_cast<char*>(db.descriptors.data()),
         static_cast<std::streamsize>(sizeof(float) * db.descriptors.size()));
  if (!f) throw std::runtime_error("load_feature_db: truncated descriptor block");
  db.poses.reserve(n);
  std::string line;
  for (std::uint32_t i = 0; i < n; ++i) {
    if (!std::getline(f, line)) throw std::runtime_error("load_feature_db: missing poses");
    CameraPose p;
    if (std::sscanf(line.c_str(), "%lf,%lf,%lf,%lf,%lf,%lf", &p.location.x(), &p.location.y(),
                    &p.location.z(), &p.focal_length, &p.pan_deg, &p.tilt_deg) != 6) {
      throw std::runtime_error("load_feature_db: bad pose row: " + line);
    }
    db.poses.push_back(p);
  }
  return db;
}

std::vector<RetrievalHit> retrieve_nearest(const FeatureDB& db, const FeatureVector& query, int k) {
  const int n = db.size();
  if (n == 0) throw std::invalid_argument("retrieve_nearest: empty database");
  if (!query.valid) throw std::invalid_argument("retrieve_nearest: invalid query descriptor");
  if (query.values.size() != db.descriptors.cols()) {
    throw std::invalid_argument("retrieve_nearest: descriptor dimension mismatch");
  }
  if (k < 1 || k > n) throw std::invalid_argument("retrieve_nearest: k out of range");

  std::vector<double> d2(static_cast<std::size_t>(n));
  const Eigen::Index dim = db.descriptors.cols();
  parallel_for(static_cast<std::size_t>(n), [&](std::size_t i) {
    const float* row = db.descriptors.data() + static_cast<std::size_t>(i) * dim;
    double acc = 0.0;
    for (Eigen::Index j = 0; j < dim; ++j) {
      const double diff = static_cast<double>(row[j]) - static_cast<double>(query.values(j));
      acc += diff * diff;
    }
    d2[i] = acc;
  });

  std::vector<int> order(static_cast<std::size_t>(n));
  std::iota(order.begin(), order.end(), 0);
  std::partial_sort(order.begin(), order.begin() + k, order.end(), [&](int a, int b) {
    if (d2[static_cast<std::size_t>(a)] != d2[static_cast<std::size_t>(b)])
      return d2[static_cast<std::size_t>(a)] < d2[static_cast<std::size_t>(b)];
    return a < b;
  });
  std::vector<RetrievalHit> hits(static_cast<std::size_t>(k));
  for (int i = 0; i < k; ++i) {
    hits[static_cast<std::size_t>(i)] = {order[static_cast<std::size_t>(i)],
                                         std::sqrt(d2[static_cast<std::size_t>(order[i])])};
  }
  return hits;
}

namespace {

double bilerp(const std::vector<float>& a, int w, double u, double v) {
  const int x0 = static_cast<int>(std::floor(u));
  const int y0 = static_cast<int>(std::floor(v));
  const double fx = u - x0, fy = v - y0;
  const std::size_t i = static_cast<std::size_t>(y0) * w + x0;
  return (1 - fx) * (1 - fy) * a[i] + fx * (1 - fy) * a[i + 1] +
         (1 - fx) * fy * a[i + w] + fx * fy * a[i + w + 1];
}

struct RefineWorkspace {
  const DistanceImage* dist = nullptr;
  std::vector<float> gx, gy;
  std::vector<Vec2> samples;

  void init(const DistanceImage& d, const FieldTemplate& field, double step) {
    dist = &d;
    const int w = d.width, h = d.height;
    gx.assign(d.values.size(), 0.0f);
    gy.assign(d.values.size(), 0.0f);
    for (int y = 1; y < h - 1; ++y) {
      for (int x = 1; x < w - 1; ++x) {
        const std::size_t i = static_cast<std::size_t>(y) * w + x;
        gx[i] = 0.5f * (d.values[i + 1] - d.values[i - 1]);
        gy[i] = 0.5f * (d.values[i + w] - d.values[i - w]);
      }
    }
    samples = sample_template_points(field, step);
  }
};

constexpr int kMinValidSamples = 20;

// A step must improve the mean residual by this much (pixels) to be taken.
// Keeps the solver from wandering inside the sub-pixel flat valley of the
// distance surface, so an already-optimal initialization stays put.
constexpr double kMinResidualDecrease = 1e-4;

// Mean truncated distance of the observed edges at the projected samples.
// Samples behind the camera or outside the interpolation margin are skipped.
double mean_residual(const RefineWorkspace& ws, const std::array<double, 8>& p, int* count) {
  const int w = ws.dist->width, h = ws.dist->height;
  double sum = 0.0;
  int n = 0;
  for (const auto& s : ws.samples) {
    const double x = s.x(), y = s.y();
    const double wz = p[6] * x + p[7] * y + 1.0;
    if (wz <= 1e-9) continue;
    const double u = (p[0] * x + p[1] * y + p[2]) / wz;
    const double v = (p[3] * x + p[4] * y + p[5]) / wz;
    if (u < 1.0 || u > w - 2.0 || v < 1.0 || v > h - 2.0) continue;
    sum += bilerp(ws.dist->values, w, u, v);
    ++n;
  }
  if (count) *count = n;
  return n > 0 ? sum / n : std::numeric_limits<double>::infinity();
}

// One Gauss-Newton system: A = J^T J, b = J^T r over the valid samples.
int gn_system(const RefineWorkspace& ws, const std::array<double, 8>& p,
              Eigen::Matrix<double, 8, 8>& a, Eigen::Matrix<double, 8, 1>& b) {
  const int w = ws.dist->width, h = ws.dist->height;
  a.setZero();
  b.setZero();
  int n = 0;
  for (const auto& s : ws.samples) {
    const double x = s.x(), y = s.y();
    const double wz = p[6] * x + p[7] * y + 1.0;
    if (wz <= 1e-9) continue;
    const double u = (p[0] * x + p[1] * y + p[2]) / wz;
    const double v = (p[3] * x + p[4] * y + p[5]) / wz;
    if (u < 1.0 || u > w - 2.0 || v < 1.0 || v > h - 2.0) continue;
    const double r = bilerp(ws.dist->values, w, u, v);
    const double dx = bilerp(ws.gx, w, u, v);
    const double dy = bilerp(ws.gy, w, u, v);
    Eigen::Matrix<double, 8, 1> j;
    j << dx * x / wz, dx * y / wz, dx / wz,
         dy * x / wz, dy * y / wz, dy / wz,
         -(dx * u + dy * v) * x / wz, -(dx * u + dy * v) * y / wz;
    a.noalias() += j * j.transpose();
    b.noalias() += j * r;
    ++n;
  }
  return n;
}

Homography params_to_homography(const std::array<double, 8>& p) {
  Mat3 m;
  m << p[0], p[1], p[2], p[3], p[4], p[5], p[6], p[7], 1.0;
  return Homography(m);
}

RefineResult refine_on_distance(const Homography& h_init, const DistanceImage& dist,
                                const FieldTemplate& field, const RefinementParams& params,
                                bool observed_lit) {
  if (params.max_iterations < 1 || params.convergence_threshold <= 0.0 ||
      params.truncation <= 0.0 || params.damping <= 0.0 || params.damping >= 1.0) {
    throw std::invalid_argument("refine_homography: invalid parameters");
  }
  RefineResult out;
  out.h = h_init;
  out.residual = params.truncation;
  if (!observed_lit) return out;  // no gradient signal anywhere
  const Mat3& m = h_init.matrix();
  if (!h_init.invertible() || m(2, 2) != 1.0) return out;  // cannot fix h33 = 1

  RefineWorkspace ws;
  ws.init(dist, field, params.sample_step_m);

  std::array<double, 8> p = {m(0, 0), m(0, 1), m(0, 2), m(1, 0),
                             m(1, 1), m(1, 2), m(2, 0), m(2, 1)};
  int count = 0;
  double best = mean_residual(ws, p, &count);
  out.residual = std::isfinite(best) ? best : params.truncation;
  if (count < kMinValidSamples) return out;
  bool accepted_any = false;
  for (int iter = 1; iter <= params.max_iterations; ++iter) {
    out.iterations = iter;
    Eigen::Matrix<double, 8, 8> a;
    Eigen::Matrix<double, 8, 1> b;
    gn_system(ws, p, a, b);

    if (a.norm() < 1e-12 || b.norm() < 1e-12) {
      // Zero gradient: either converged on the edge set, or everything sits
      // on the truncation plateau with no signal to follow.
      out.refined = best < 0.95 * params.truncation;
      return out;
    }
    // Jacobi equilibration: parameters mix pixel offsets (~1e2) with
    // perspective terms (~1e-3), which otherwise wrecks the conditioning.
    Eigen::Matrix<double, 8, 1> scale;
    for (int i = 0; i < 8; ++i) scale(i) = a(i, i) > 1e-300 ? 1.0 / std::sqrt(a(i, i)) : 1.0;
    const Eigen::Matrix<double, 8, 8> as = scale.asDiagonal() * a * scale.asDiagonal();
    const Eigen::Matrix<double, 8, 1> bs = scale.asDiagonal() * b;
    Eigen::Matrix<double, 8, 1> delta = -(scale.asDiagonal() * as.ldlt().solve(bs));
    if (!delta.allFinite() || (a * delta + b).norm() > 1e-6 * (b.norm() + 1.0)) {
      if (!accepted_any) return out;  // singular normal equations at the start
      out.refined = true;
      return out;
    }
    if (delta.norm() < params.convergence_threshold) {
      out.refined = true;  // stationary point
      return out;
    }

    double step = 1.0;
    bool accepted = false;
    std::array<double, 8> p_try = p;
    double trial = best;
    for (int retry = 0; retry <= params.max_damping_retries; ++retry) {
      for (int i = 0; i < 8; ++i) p_try[i] = p[i] + step * delta(i);
      int c = 0;
      trial = mean_residual(ws, p_try, &c);
      if (c >= kMinValidSamples && trial < best - kMinResidualDecrease) {
        accepted = true;
        break;
      }
      step *= params.damping;
    }
    if (!accepted) {
      // Either converged (no step helps near the minimum) or diverged while
      // still far from the edge structure; the residual tells them apart.
      out.refined = accepted_any || best < 0.5 * params.truncation;
      return out;
    }
    p = p_try;
    best = trial;
    accepted_any = true;
    out.h = params_to_homography(p);
    out.residual = best;
    if (step * delta.norm() < params.convergence_threshold) {
      out.refined = true;
      return out;
    }
  }
  out.refined = true;  // iteration budget exhausted while still improving
  return out;
}

}  // namespace

RefineResult refine_homography(const Homography& h_init, const EdgeImage& observed,
                               const FieldTemplate& field, const RefinementParams& params) {
  if (observed.width <= 0 || observed.height <= 0) {
    throw std::invalid_argument("refine_homography: empty observed image");
  }
  const bool lit = observed.any_lit();
  if (!lit) {
    RefineResult out;
    out.h = h_init;
    out.residual = params.truncation;
    return out;
  }
  const DistanceImage dist = distance_transform(observed, params.truncation);
  return refine_on_distance(h_init, dist, field, params, true);
}

Polygon visible_field_polygon(const Homography& h, int image_w, int image_h,
                              const FieldTemplate& field) {
  Homography inv;
  try {
    inv = h.inverse();
  } catch (const std::exception&) {
    return {};
  }
  const Polygon rect = rect_polygon(0.0, 0.0, image_w, image_h);
  const Vec3 row = inv.matrix().row(2).transpose();
  double scale = 0.0;
  for (const auto& c : rect) {
    scale = std::max(scale, std::abs(row.x() * c.x() + row.y() * c.y() + row.z()));
  }
  if (scale <= 0.0) return {};

  // The canonical form fixes the matrix only up to sign, so try both depth
  // orientations and keep the side that actually shows the field. This also
  // makes the result invariant to (negative) projective rescaling.
  Polygon best;
  double best_area = 0.0;
  for (const double sign : {1.0, -1.0}) {
    const Vec3 line(sign * row.x(), sign * row.y(), sign * row.z() - 1e-9 * scale);
    Polygon clipped = clip_halfplane(rect, line);
    if (clipped.size() < 3) continue;
    Polygon field_poly;
    field_poly.reserve(clipped.size());
    bool bad = false;
    for (const auto& q : clipped) {
      const auto p = inv.try_apply(q);
      if (!p) {
        bad = true;
        break;
      }
      field_poly.push_back(*p);
    }
    if (bad) continue;
    // Clip to the field rectangle before any area math; the mapped vertices
    // can be enormous near the horizon line.
    for (const Vec3& edge : {Vec3(1, 0, 0), Vec3(-1, 0, field.length),
                             Vec3(0, 1, 0), Vec3(0, -1, field.width)}) {
      field_poly = clip_halfplane(field_poly, edge);
      if (field_poly.size() < 3) break;
    }
    if (field_poly.size() < 3) continue;
    const double area = polygon_area(field_poly);
    if (area > best_area) {
      best_area = area;
      make_ccw(field_poly);
      best = field_poly;
    }
  }
  return best;
}

double iou_part(const Homography& h_pred, const Homography& h_gt, int image_w, int image_h,
                const FieldTemplate& field) {
  const Polygon a = visible_field_polygon(h_pred, image_w, image_h, field);
  const Polygon b = visible_field_polygon(h_gt, image_w, image_h, field);
  const double area_a = a.size() >= 3 ? polygon_area(a) : 0.0;
  const double area_b = b.size() >= 3 ? polygon_area(b) : 0.0;
  if (area_a <= 0.0 && area_b <= 0.0) return 0.0;  // degenerate: nothing visible
  if (a.size() < 3 || b.size() < 3) return 0.0;
  const Polygon inter = clip_convex(a, b);
  const double area_i = inter.size() >= 3 ? polygon_area(inter) : 0.0;
  const double area_u = area_a + area_b - area_i;
  if (area_u <= 0.0) return 0.0;
  return area_i / area_u;
}

namespace {

Homography scale_homography(const Homography& h, double sx, double sy) {
  Mat3 s;
  s << sx, 0, 0, 0, sy, 0, 0, 0, 1;
  return Homography(Mat3(s * h.matrix()));
}

}  // namespace

RegisterFrameResult register_frame(const FeatureDB& db, const EdgeImage& observed,
                                   const FieldTemplate& field, const RegisterFrameParams& params) {
  RegisterFrameResult out;
  if (db.size() == 0 || !observed.any_lit()) return out;
  const EdgeImage small = downsample_edges(observed, db.cfg.input_w, db.cfg.input_h);
  const FeatureVector q = descriptor(small, db.cfg);
  if (!q.valid) return out;

  const int k = std::min(std::max(1, params.candidates), db.size());
  const auto hits = retrieve_nearest(db, q, k);

  // Candidate refinement shares one distance transform per pyramid level.
  const int cs = std::max(1, params.coarse_scale);
  EdgeImage coarse;
  DistanceImage dist_full, dist_coarse;
  if (params.refine) {
    dist_full = distance_transform(observed, params.refinement.truncation);
    if (cs > 1 && observed.width / cs >= 32 && observed.height / cs >= 32) {
      coarse = downsample_edges(observed, observed.width / cs, observed.height / cs);
      dist_coarse = distance_transform(coarse, params.refinement.truncation);
    }
  }

  bool have = false;
  for (const auto& hit : hits) {
    Homography h0;
    try {
      Homography h_ref = pose_to_homography(db.poses[static_cast<std::size_t>(hit.index)],
                                            db.render_w, db.render_h);
      h0 = scale_homography(h_ref, static_cast<double>(observed.width) / db.render_w,
                            static_cast<double>(observed.height) / db.render_h);
    } catch (const std::exception&) {
      continue;
    }
    RegisterFrameResult cand;
    cand.ok = true;
    cand.db_index = hit.index;
    cand.retrieval_distance = hit.distance;
    if (!params.refine) {
      cand.h = h0;
      cand.residual = hit.distance;
    } else {
      Homography h1 = h0;
      if (dist_coarse.width > 0) {
        const double sx = static_cast<double>(coarse.width) / observed.width;
        const double sy = static_cast<double>(coarse.height) / observed.height;
        const RefineResult rc = refine_on_distance(scale_homography(h0, sx, sy), dist_coarse,
                                                   field, params.refinement, true);
        h1 = scale_homography(rc.h, 1.0 / sx, 1.0 / sy);
      }
      const RefineResult rf = refine_on_distance(h1, dist_full, field, params.refinement, true);
      cand.h = rf.h;
      cand.residual = rf.residual;
      cand.refined = rf.refined;
    }
    if (!have || cand.residual < out.residual) {
      out = cand;
      have = true;
    }
  }
  return out;
}

}  // namespace pitchpos
