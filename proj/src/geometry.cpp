#include "pitchpos/geometry.hpp"

#include <cmath>
#include <stdexcept>

namespace pitchpos {

Mat3 Homography::canonicalize(Mat3 m) {
  const double fro = m.norm();
  if (!(fro > 0.0) || !m.allFinite()) {
    throw std::domain_error("homography: zero or non-finite matrix");
  }
  if (std::abs(m(2, 2)) > 1e-12 * fro) {
    return m / m(2, 2);
  }
  m /= fro;
  // Sign is still free; pin it by making the largest-magnitude entry positive.
  int r = 0, c = 0;
  m.cwiseAbs().maxCoeff(&r, &c);
  if (m(r, c) < 0.0) m = -m;
  return m;
}

Vec2 Homography::apply(const Vec2& p) const {
  auto q = try_apply(p);
  if (!q) throw std::domain_error("homography: point maps to infinity");
  return *q;
}

bool Homography::invertible() const {
  // Determinant against the Hadamard bound (product of row norms). This is
  // scale-free and accepts valid maps with very unbalanced entries, e.g.
  // large translations, which a raw norm-based threshold would reject.
  const double bound = m_.row(0).norm() * m_.row(1).norm() * m_.row(2).norm();
  return std::abs(m_.determinant()) > 1e-12 * bound;
}

Homography Homography::inverse() const {
  if (!invertible()) throw std::domain_error("homography: singular matrix");
  return Homography(Mat3(m_.inverse()));
}

Homography compose(const Homography& a, const Homography& b) {
  return Homography(Mat3(a.matrix() * b.matrix()));
}

double polygon_signed_area(const Polygon& poly) {
  double s = 0.0;
  const std::size_t n = poly.size();
  for (std::size_t i = 0; i < n; ++i) {
    const Vec2& p = poly[i];
    const Vec2& q = poly[(i + 1) % n];
    s += p.x() * q.y() - q.x() * p.y();
  }
  return 0.5 * s;
}

double polygon_area(const Polygon& poly) { return std::abs(polygon_signed_area(poly)); }

void make_ccw(Polygon& poly) {
  if (polygon_signed_area(poly) < 0.0) std::reverse(poly.begin(), poly.end());
}

Polygon clip_halfplane(const Polygon& poly, const Vec3& line) {
  Polygon out;
  const std::size_t n = poly.size();
  if (n == 0) return out;
  out.reserve(n + 2);
  // Boundary-inclusive with a relative tolerance, so clipping a polygon by
  // its own edges keeps every vertex (cancellation can leave side values a
  // few ulp below zero).
  auto inside = [&line](const Vec2& p) {
    const double side = line.x() * p.x() + line.y() * p.y() + line.z();
    const double mag = std::abs(line.x() * p.x()) + std::abs(line.y() * p.y()) + std::abs(line.z());
    return side >= -1e-12 * mag;
  };
  auto side = [&line](const Vec2& p) { return line.x() * p.x() + line.y() * p.y() + line.z(); };
  for (std::size_t i = 0; i < n; ++i) {
    const Vec2& a = poly[i];
    const Vec2& b = poly[(i + 1) % n];
    const bool ia = inside(a);
    const bool ib = inside(b);
    if (ia) out.push_back(a);
    if (ia != ib) {
      const double da = side(a);
      const double db = side(b);
      const double t = da == db ? 0.0 : da / (da - db);
      out.push_back(a + t * (b - a));
    }
  }
  return out;
}

Polygon clip_convex(const Polygon& subject, const Polygon& clip) {
  Polygon out = subject;
  const std::size_t n = clip.size();
  if (n < 3) return {};
  for (std::size_t i = 0; i < n && !out.empty(); ++i) {
    const Vec2& a = clip[i];
    const Vec2& b = clip[(i + 1) % n];
    // Inside = left of edge a->b for a CCW clip polygon.
    const Vec3 line(-(b.y() - a.y()), b.x() - a.x(),
                    (b.y() - a.y()) * a.x() - (b.x() - a.x()) * a.y());
    out = clip_halfplane(out, line);
  }
  return out;
}

Polygon rect_polygon(double x0, double y0, double x1, double y1) {
  return {Vec2(x0, y0), Vec2(x1, y0), Vec2(x1, y1), Vec2(x0, y1)};
}

Homography fit_homography(const std::vector<Vec2>& from, const std::vector<Vec2>& to) {
  if (from.size() != to.size() || from.size() < 4) {
    throw std::invalid_argument("fit_homography: need >= 4 correspondences");
  }
  // Hartley normalization on both sides keeps the DLT well conditioned.
  auto normalizer = [](const std::vector<Vec2>& pts) {
    Vec2 mean = Vec2::Zero();
    for (const auto& p : pts) mean += p;
    mean /= static_cast<double>(pts.size());
    double scale = 0.0;
    for (const auto& p : pts) scale += (p - mean).norm();
    scale /= static_cast<double>(pts.size());
    if (scale < 1e-12) scale = 1.0;
    const double s = std::sqrt(2.0) / scale;
    Mat3 t;
    t << s, 0, -s * mean.x(), 0, s, -s * mean.y(), 0, 0, 1;
    return t;
  };
  const Mat3 tf = normalizer(from);
  const Mat3 tt = normalizer(to);

  const std::size_t n = from.size();
  Eigen::MatrixXd a(2 * n, 9);
  for (std::size_t i = 0; i < n; ++i) {
    const Vec3 p = tf * Vec3(from[i].x(), from[i].y(), 1.0);
    const Vec3 q = tt * Vec3(to[i].x(), to[i].y(), 1.0);
    const double x = p.x() / p.z(), y = p.y() / p.z();
    const double u = q.x() / q.z(), v = q.y() / q.z();
    a.row(2 * i) << -x, -y, -1, 0, 0, 0, u * x, u * y, u;
    a.row(2 * i + 1) << 0, 0, 0, -x, -y, -1, v * x, v * y, v;
  }
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(a, Eigen::ComputeFullV);
  const Eigen::VectorXd h = svd.matrixV().col(8);
  Mat3 m;
  m << h(0), h(1), h(2), h(3), h(4), h(5), h(6), h(7), h(8);
  if (svd.singularValues()(7) < 1e-10 * svd.singularValues()(0)) {
    throw std::invalid_argument("fit_homography: degenerate configuration");
  }
  return Homography(Mat3(tt.inverse() * m * tf));
}

}  // namespace pitchpos
