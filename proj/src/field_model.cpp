#include "pitchpos/field_model.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <stdexcept>

namespace pitchpos {

namespace {

constexpr double kDepthEps = 1e-6;
constexpr double kArcStepRad = M_PI / 180.0;  // 1 degree polyline steps

// Law-of-the-game distances in meters, independent of pitch size.
constexpr double kCircleRadius = 9.15;
constexpr double kPenaltyAreaDepth = 16.5;
constexpr double kPenaltyAreaHalfWidth = 20.16;  // 16.5 * 2 + 7.32 goal, halved
constexpr double kGoalAreaDepth = 5.5;
constexpr double kGoalAreaHalfWidth = 9.16;
constexpr double kPenaltyMarkDist = 11.0;
constexpr double kMarkRadius = 0.15;

}  // namespace

bool EdgeImage::any_lit() const {
  return std::any_of(pixels.begin(), pixels.end(), [](std::uint8_t v) { return v != 0; });
}

std::size_t EdgeImage::lit_count() const {
  return static_cast<std::size_t>(std::count_if(pixels.begin(), pixels.end(),
                                                [](std::uint8_t v) { return v != 0; }));
}

FieldTemplate standard_field(double length, double width) {
  if (!(length >= 90.0 && length <= 120.0 && width >= 45.0 && width <= 90.0)) {
    throw std::invalid_argument("standard_field: dimensions outside lawful ranges");
  }
  FieldTemplate f;
  f.length = length;
  f.width = width;
  const double cy = width / 2.0;
  auto seg = [&f](double ax, double ay, double bx, double by) {
    f.segments.push_back({Vec2(ax, ay), Vec2(bx, by)});
  };

  // Touchlines and goal lines.
  seg(0, 0, length, 0);
  seg(0, width, length, width);
  seg(0, 0, 0, width);
  seg(length, 0, length, width);
  // Halfway line.
  seg(length / 2.0, 0, length / 2.0, width);
  // Penalty areas.
  for (int side = 0; side < 2; ++side) {
    const double x0 = side == 0 ? 0.0 : length;
    const double dir = side == 0 ? 1.0 : -1.0;
    const double xd = x0 + dir * kPenaltyAreaDepth;
    seg(x0, cy - kPenaltyAreaHalfWidth, xd, cy - kPenaltyAreaHalfWidth);
    seg(x0, cy + kPenaltyAreaHalfWidth, xd, cy + kPenaltyAreaHalfWidth);
    seg(xd, cy - kPenaltyAreaHalfWidth, xd, cy + kPenaltyAreaHalfWidth);
    const double xg = x0 + dir * kGoalAreaDepth;
    seg(x0, cy - kGoalAreaHalfWidth, xg, cy - kGoalAreaHalfWidth);
    seg(x0, cy + kGoalAreaHalfWidth, xg, cy + kGoalAreaHalfWidth);
    seg(xg, cy - kGoalAreaHalfWidth, xg, cy + kGoalAreaHalfWidth);
  }
  // Center circle and center mark.
  f.arcs.push_back({Vec2(length / 2.0, cy), kCircleRadius, 0.0, 2.0 * M_PI});
  f.arcs.push_back({Vec2(length / 2.0, cy), kMarkRadius, 0.0, 2.0 * M_PI});
  // Penalty marks and penalty arcs (the part outside the penalty area).
  const double half = std::acos((kPenaltyAreaDepth - kPenaltyMarkDist) / kCircleRadius);
  f.arcs.push_back({Vec2(kPenaltyMarkDist, cy), kMarkRadius, 0.0, 2.0 * M_PI});
  f.arcs.push_back({Vec2(length - kPenaltyMarkDist, cy), kMarkRadius, 0.0, 2.0 * M_PI});
  f.arcs.push_back({Vec2(kPenaltyMarkDist, cy), kCircleRadius, -half, half});
  f.arcs.push_back({Vec2(length - kPenaltyMarkDist, cy), kCircleRadius, M_PI - half, M_PI + half});
  return f;
}

namespace {

// Rasterizes the 2D segment [a, b] with round caps of the given radius.
void stamp_segment(EdgeImage& img, Vec2 a, Vec2 b, double radius) {
  const double w = img.width, h = img.height;
  // Liang-Barsky clip against the image rect padded by the stroke radius,
  // so off-screen spans never expand the scan box.
  const double pad = radius + 1.0;
  Vec2 d = b - a;
  double t0 = 0.0, t1 = 1.0;
  const double lo[2] = {-pad, -pad};
  const double hi[2] = {w - 1 + pad, h - 1 + pad};
  for (int axis = 0; axis < 2; ++axis) {
    const double p = d[axis];
    const double q0 = a[axis] - lo[axis];
    const double q1 = hi[axis] - a[axis];
    if (std::abs(p) < 1e-12) {
      if (q0 < 0 || q1 < 0) return;
    } else {
      double ta = -q0 / p, tb = q1 / p;
      if (p < 0) std::swap(ta, tb);
      t0 = std::max(t0, ta);
      t1 = std::min(t1, tb);
      if (t0 > t1) return;
    }
  }
  const Vec2 ca = a + t0 * d;
  const Vec2 cb = a + t1 * d;

  const int x0 = std::max(0, static_cast<int>(std::floor(std::min(ca.x(), cb.x()) - radius)));
  const int x1 = std::min(img.width - 1, static_cast<int>(std::ceil(std::max(ca.x(), cb.x()) + radius)));
  const int y0 = std::max(0, static_cast<int>(std::floor(std::min(ca.y(), cb.y()) - radius)));
  const int y1 = std::min(img.height - 1, static_cast<int>(std::ceil(std::max(ca.y(), cb.y()) + radius)));
  const Vec2 e = cb - ca;
  const double len2 = e.squaredNorm();
  const double r2 = radius * radius;
  for (int y = y0; y <= y1; ++y) {
    for (int x = x0; x <= x1; ++x) {
      const Vec2 p(x, y);
      double t = len2 > 0 ? (p - ca).dot(e) / len2 : 0.0;
      t = std::clamp(t, 0.0, 1.0);
      if ((p - (ca + t * e)).squaredNorm() <= r2) img.set(x, y, 1);
    }
  }
}

// Projects the field-space segment, clipping to positive projective depth,
// and stamps the image-space result. Depth is linear along the segment.
void project_and_stamp(EdgeImage& img, const Homography& h, Vec2 a, Vec2 b, double radius) {
  const double wa = h.depth(a);
  const double wb = h.depth(b);
  if (wa <= kDepthEps && wb <= kDepthEps) return;
  double ta = 0.0, tb = 1.0;
  if (wa <= kDepthEps) ta = (kDepthEps - wa) / (wb - wa);
  if (wb <= kDepthEps) tb = (kDepthEps - wa) / (wb - wa);
  const Vec2 fa = a + ta * (b - a);
  const Vec2 fb = a + tb * (b - a);
  auto pa = h.try_apply(fa);
  auto pb = h.try_apply(fb);
  if (!pa || !pb) return;
  stamp_segment(img, *pa, *pb, radius);
}

}  // namespace

EdgeImage render_edge_image(const FieldTemplate& tpl, const Homography& h, int width,
                            int height, double line_width) {
  if (width <= 0 || height <= 0) throw std::invalid_argument("render_edge_image: empty size");
  if (!h.invertible()) throw std::invalid_argument("render_edge_image: singular homography");
  EdgeImage img(width, height);
  const double radius = line_width / 2.0;
  for (const auto& s : tpl.segments) project_and_stamp(img, h, s.a, s.b, radius);
  for (const auto& arc : tpl.arcs) {
    const int steps = std::max(1, static_cast<int>(std::ceil((arc.end_rad - arc.start_rad) / kArcStepRad)));
    Vec2 prev = arc.center + arc.radius * Vec2(std::cos(arc.start_rad), std::sin(arc.start_rad));
    for (int i = 1; i <= steps; ++i) {
      const double t = arc.start_rad + (arc.end_rad - arc.start_rad) * i / steps;
      const Vec2 cur = arc.center + arc.radius * Vec2(std::cos(t), std::sin(t));
      project_and_stamp(img, h, prev, cur, radius);
      prev = cur;
    }
  }
  return img;
}

namespace {

// 1D lower envelope of parabolas (squared distances), Felzenszwalb-Huttenlocher.
void edt_1d(const std::vector<double>& f, std::vector<double>& d, int n) {
  static thread_local std::vector<int> v;
  static thread_local std::vector<double> z;
  v.assign(n, 0);
  z.assign(n + 1, 0.0);
  int k = 0;
  v[0] = 0;
  z[0] = -std::numeric_limits<double>::infinity();
  z[1] = std::numeric_limits<double>::infinity();
  for (int q = 1; q < n; ++q) {
    double s;
    while (true) {
      const int p = v[k];
      s = ((f[q] + q * static_cast<double>(q)) - (f[p] + p * static_cast<double>(p))) / (2.0 * (q - p));
      if (s <= z[k]) {
        --k;
      } else {
        break;
      }
    }
    ++k;
    v[k] = q;
    z[k] = s;
    z[k + 1] = std::numeric_limits<double>::infinity();
  }
  k = 0;
  for (int q = 0; q < n; ++q) {
    while (z[k + 1] < q) ++k;
    const int p = v[k];
    d[q] = (q - p) * static_cast<double>(q - p) + f[p];
  }
}

}  // namespace

DistanceImage distance_transform(const EdgeImage& edges, double truncation) {
  if (!(truncation > 0.0)) throw std::invalid_argument("distance_transform: truncation must be > 0");
  const int w = edges.width, h = edges.height;
  DistanceImage out;
  out.width = w;
  out.height = h;
  out.truncation = truncation;
  out.values.assign(static_cast<std::size_t>(w) * h, 0.0f);

  const double inf = 1e18;
  std::vector<double> grid(static_cast<std::size_t>(w) * h);
  for (std::size_t i = 0; i < grid.size(); ++i) grid[i] = edges.pixels[i] ? 0.0 : inf;

  std::vector<double> col(h), dcol(h);
  for (int x = 0; x < w; ++x) {
    for (int y = 0; y < h; ++y) col[y] = grid[static_cast<std::size_t>(y) * w + x];
    edt_1d(col, dcol, h);
    for (int y = 0; y < h; ++y) grid[static_cast<std::size_t>(y) * w + x] = dcol[y];
  }
  std::vector<double> row(w), drow(w);
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) row[x] = grid[static_cast<std::size_t>(y) * w + x];
    edt_1d(row, drow, w);
    for (int x = 0; x < w; ++x) {
      const double v = std::sqrt(drow[x]);
      out.values[static_cast<std::size_t>(y) * w + x] = static_cast<float>(std::min(v, truncation));
    }
  }
  return out;
}

EdgeImage downsample_edges(const EdgeImage& src, int width, int height) {
  if (width <= 0 || height <= 0) throw std::invalid_argument("downsample_edges: empty size");
  EdgeImage out(width, height);
  const double sx = static_cast<double>(src.width) / width;
  const double sy = static_cast<double>(src.height) / height;
  for (int y = 0; y < height; ++y) {
    const int ya = static_cast<int>(std::floor(y * sy));
    const int yb = std::min(src.height, static_cast<int>(std::ceil((y + 1) * sy)));
    for (int x = 0; x < width; ++x) {
      const int xa = static_cast<int>(std::floor(x * sx));
      const int xb = std::min(src.width, static_cast<int>(std::ceil((x + 1) * sx)));
      std::uint8_t v = 0;
      for (int yy = ya; yy < yb && !v; ++yy) {
        for (int xx = xa; xx < xb; ++xx) {
          if (src.at(xx, yy)) {
            v = 1;
            break;
          }
        }
      }
      out.set(x, y, v);
    }
  }
  return out;
}

std::vector<Vec2> sample_template_points(const FieldTemplate& tpl, double step) {
  if (!(step > 0.0)) throw std::invalid_argument("sample_template_points: step must be > 0");
  std::vector<Vec2> pts;
  for (const auto& s : tpl.segments) {
    const double len = (s.b - s.a).norm();
    const int n = std::max(1, static_cast<int>(std::ceil(len / step)));
    for (int i = 0; i <= n; ++i) pts.push_back(s.a + (s.b - s.a) * (static_cast<double>(i) / n));
  }
  for (const auto& arc : tpl.arcs) {
    const double len = arc.radius * (arc.end_rad - arc.start_rad);
    const int n = std::max(1, static_cast<int>(std::ceil(len / step)));
    for (int i = 0; i <= n; ++i) {
      const double t = arc.start_rad + (arc.end_rad - arc.start_rad) * i / n;
      pts.push_back(arc.center + arc.radius * Vec2(std::cos(t), std::sin(t)));
    }
  }
  return pts;
}

void write_pgm(const EdgeImage& img, const std::string& path) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw std::runtime_error("write_pgm: cannot open " + path);
  f << "P5\n" << img.width << " " << img.height << "\n255\n";
  std::vector<std::uint8_t> bytes(img.pixels.size());
  for (std::size_t i = 0; i < bytes.size(); ++i) bytes[i] = img.pixels[i] ? 255 : 0;
  f.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
  if (!f) throw std::runtime_error("write_pgm: short write to " + path);
}

EdgeImage read_pgm(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw std::runtime_error("read_pgm: cannot open " + path);
  std::string magic;
  f >> magic;
  if (magic != "P5") throw std::runtime_error("read_pgm: not a binary PGM: " + path);
  auto next_int = [&f, &path]() {
    // Skip whitespace and '#' comment lines between header fields.
    int c = f.peek();
    while (c == '#' || std::isspace(c)) {
      if (c == '#') {
        std::string line;
        std::getline(f, line);
      } else {
        f.get();
      }
      c = f.peek();
    }
    long v = -1;
    f >> v;
    if (!f || v < 0) throw std::runtime_error("read_pgm: bad header in " + path);
    return v;
  };
  const long w = next_int();
  const long h = next_int();
  const long maxval = next_int();
  if (w <= 0 || h <= 0 || maxval <= 0 || maxval > 255) {
    throw std::runtime_error("read_pgm: unsupported header in " + path);
  }
  f.get();  // single whitespace after maxval
  EdgeImage img(static_cast<int>(w), static_cast<int>(h));
  std::vector<std::uint8_t> bytes(img.pixels.size());
  f.read(reinterpret_cast<char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
  if (f.gcount() != static_cast<std::streamsize>(bytes.size())) {
    throw std::runtime_error("read_pgm: truncated pixel data in " + path);
  }
  for (std::size_t i = 0; i < bytes.size(); ++i) img.pixels[i] = bytes[i] ? 1 : 0;
  return img;
}

}  // namespace pitchpos
