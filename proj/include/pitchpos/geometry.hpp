#pragma once

#include <Eigen/Dense>
#include <optional>
#include <vector>

namespace pitchpos {

using Vec2 = Eigen::Vector2d;
using Vec3 = Eigen::Vector3d;
using Mat3 = Eigen::Matrix3d;

/// 3x3 projective map between the field plane (meters) and the image plane
/// (pixels). Stored in canonical form: h33 = 1 whenever h33 is nonzero
/// relative to the matrix norm, otherwise unit Frobenius norm with the
/// largest-magnitude entry made positive. Canonicalization is idempotent.
class Homography {
 public:
  Homography() : m_(Mat3::Identity()) {}
  explicit Homography(const Mat3& m) : m_(canonicalize(m)) {}

  static Homography identity() { return Homography(); }

  const Mat3& matrix() const { return m_; }
  double at(int r, int c) const { return m_(r, c); }

  /// Projective depth of p: third row applied to (x, y, 1).
  double depth(const Vec2& p) const {
    return m_(2, 0) * p.x() + m_(2, 1) * p.y() + m_(2, 2);
  }

  /// Applies the map; empty when |depth| <= 1e-9 (point at infinity).
  std::optional<Vec2> try_apply(const Vec2& p) const {
    const double w = depth(p);
    if (std::abs(w) <= 1e-9) return std::nullopt;
    return Vec2((m_(0, 0) * p.x() + m_(0, 1) * p.y() + m_(0, 2)) / w,
                (m_(1, 0) * p.x() + m_(1, 1) * p.y() + m_(1, 2)) / w);
  }

  /// As try_apply, but throws std::domain_error at infinity.
  Vec2 apply(const Vec2& p) const;

  bool invertible() const;

  /// Inverse map, canonicalized. Throws std::domain_error if singular.
  Homography inverse() const;

  static Mat3 canonicalize(Mat3 m);

 private:
  Mat3 m_;
};

/// Composition of the underlying matrices, canonicalized.
Homography compose(const Homography& a, const Homography& b);

using Polygon = std::vector<Vec2>;

/// Absolute shoelace area.
double polygon_area(const Polygon& poly);

/// Signed shoelace area (positive for counter-clockwise).
double polygon_signed_area(const Polygon& poly);

/// Reorients in place to counter-clockwise.
void make_ccw(Polygon& poly);

/// Keeps the part of poly with line.x()*x + line.y()*y + line.z() >= 0.
Polygon clip_halfplane(const Polygon& poly, const Vec3& line);

/// Sutherland-Hodgman intersection of a polygon with a convex CCW clip
/// polygon. Subject may be any simple polygon; result may be empty.
Polygon clip_convex(const Polygon& subject, const Polygon& clip);

/// Axis-aligned rectangle as a CCW polygon.
Polygon rect_polygon(double x0, double y0, double x1, double y1);

/// Exact homography from >= 4 point correspondences by normalized DLT.
/// Least-squares when over-determined. Throws on degenerate input.
Homography fit_homography(const std::vector<Vec2>& from, const std::vector<Vec2>& to);

}  // namespace pitchpos
