#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "pitchpos/geometry.hpp"

namespace pitchpos {

/// Soccer pitch template in field coordinates (meters). Origin at the
/// lower-left corner flag, x along the long touchline, y across the pitch.
struct FieldTemplate {
  double length = 105.0;
  double width = 68.0;

  struct Segment {
    Vec2 a, b;
  };
  /// Circular arc, counter-clockwise from start_rad to end_rad.
  struct Arc {
    Vec2 center;
    double radius;
    double start_rad;
    double end_rad;
  };

  std::vector<Segment> segments;
  std::vector<Arc> arcs;
};

/// Standard pitch markings anchored to the given dimensions: touchlines,
/// goal lines, halfway line, center circle, penalty areas, goal areas,
/// penalty arcs, center mark, penalty marks. Law distances (9.15 m circle,
/// 16.5 m penalty area, 11 m mark, ...) are absolute and do not scale.
/// Throws std::invalid_argument outside the lawful ranges
/// length in [90, 120], width in [45, 90].
FieldTemplate standard_field(double length = 105.0, double width = 68.0);

/// Binary edge raster. Row-major, pixels[y * width + x] in {0, 1}.
struct EdgeImage {
  int width = 0;
  int height = 0;
  std::vector<std::uint8_t> pixels;

  EdgeImage() = default;
  EdgeImage(int w, int h) : width(w), height(h), pixels(static_cast<std::size_t>(w) * h, 0) {}

  std::uint8_t at(int x, int y) const { return pixels[static_cast<std::size_t>(y) * width + x]; }
  void set(int x, int y, std::uint8_t v) { pixels[static_cast<std::size_t>(y) * width + x] = v; }
  bool any_lit() const;
  std::size_t lit_count() const;
};

/// Per-pixel Euclidean distance (pixels) to the nearest lit pixel, clamped
/// at the truncation constant.
struct DistanceImage {
  int width = 0;
  int height = 0;
  double truncation = 0.0;
  std::vector<float> values;

  float at(int x, int y) const { return values[static_cast<std::size_t>(y) * width + x]; }
};

/// Rasterizes the template under H (field meters -> image pixels) with the
/// given stroke width. Primitive spans crossing the w = 0 plane are clipped
/// to positive projective depth before projecting; arcs become polylines
/// with 1 degree steps. A pixel is lit when its center lies within
/// line_width/2 of a projected primitive. Throws on singular H.
EdgeImage render_edge_image(const FieldTemplate& tpl, const Homography& h, int width,
                            int height, double line_width);

/// Exact Euclidean distance transform (Felzenszwalb-Huttenlocher), clamped
/// at truncation. truncation must be positive.
DistanceImage distance_transform(const EdgeImage& edges, double truncation);

/// Binary downsample: a target pixel is lit when any covered source pixel
/// is lit. Keeps thin strokes connected, unlike averaging + threshold.
EdgeImage downsample_edges(const EdgeImage& src, int width, int height);

/// Template primitives sampled every `step` meters along their arc length
/// (used by the registration refinement and by tests).
std::vector<Vec2> sample_template_points(const FieldTemplate& tpl, double step);

// Binary PGM (P5, maxval 255); any nonzero byte reads back as lit.
void write_pgm(const EdgeImage& img, const std::string& path);
EdgeImage read_pgm(const std::string& path);

}  // namespace pitchpos
