#include "pitchpos/team_assignment.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <limits>
#include <map>
#include <numeric>
#include <stdexcept>

#include "pitchpos/parallel.hpp"
#include "pitchpos/rng.hpp"

namespace pitchpos {

Vec3 hsv_embed(double h, double s, double v) {
  return Vec3(s * std::cos(2.0 * M_PI * h), s * std::sin(2.0 * M_PI * h), v);
}

void rgb_to_hsv(const Vec3& rgb, double& h, double& s, double& v) {
  const double r = rgb.x(), g = rgb.y(), b = rgb.z();
  const double mx = std::max({r, g, b});
  const double mn = std::min({r, g, b});
  const double delta = mx - mn;
  v = mx;
  s = mx > 0.0 ? delta / mx : 0.0;
  if (delta <= 0.0) {
    h = 0.0;
    return;
  }
  if (mx == r) {
    h = std::fmod((g - b) / delta, 6.0);
  } else if (mx == g) {
    h = (b - r) / delta + 2.0;
  } else {
    h = (r - g) / delta + 4.0;
  }
  h /= 6.0;
  if (h < 0.0) h += 1.0;
}

namespace {

// Bilinear resample of a crop region to out_w x out_h.
RgbCrop resample(const RgbCrop& src, int x0, int y0, int w, int h, int out_w, int out_h) {
  RgbCrop out;
  out.width = out_w;
  out.height = out_h;
  out.rgb.resize(static_cast<std::size_t>(out_w) * out_h);
  for (int y = 0; y < out_h; ++y) {
    // Map the target pixel center into the source region.
    const double sy = y0 + (y + 0.5) * h / out_h - 0.5;
    const double cy = std::clamp(sy, static_cast<double>(y0), static_cast<double>(y0 + h - 1));
    const int iy = std::min(static_cast<int>(std::floor(cy)), y0 + h - 2 >= y0 ? y0 + h - 2 : y0);
    const double fy = std::clamp(cy - iy, 0.0, 1.0);
    for (int x = 0; x < out_w; ++x) {
      const double sx = x0 + (x + 0.5) * w / out_w - 0.5;
      const double cx = std::clamp(sx, static_cast<double>(x0), static_cast<double>(x0 + w - 1));
      const int ix = std::min(static_cast<int>(std::floor(cx)), x0 + w - 2 >= x0 ? x0 + w - 2 : x0);
      const double fx = std::clamp(cx - ix, 0.0, 1.0);
      const int ix1 = std::min(ix + 1, x0 + w - 1);
      const int iy1 = std::min(iy + 1, y0 + h - 1);
      const Vec3 p = (1 - fx) * (1 - fy) * src.at(ix, iy) + fx * (1 - fy) * src.at(ix1, iy) +
                     (1 - fx) * fy * src.at(ix, iy1) + fx * fy * src.at(ix1, iy1);
      out.rgb[static_cast<std::size_t>(y) * out_w + x] = p;
    }
  }
  return out;
}

}  // namespace

Vec3 color_feature(const RgbCrop& box_crop) {
  if (box_crop.width <= 0 || box_crop.height <= 0) {
    throw std::invalid_argument("color_feature: empty crop");
  }
  // Upper half of the box covers the torso; scale to 20x20, keep the central
  // 16x16 to push out the surrounding grass.
  const int upper_h = std::max(1, box_crop.height / 2);
  const RgbCrop scaled = resample(box_crop, 0, 0, box_crop.width, upper_h, 20, 20);
  double sum_cos = 0.0, sum_sin = 0.0, sum_s = 0.0, sum_v = 0.0;
  int n = 0;
  for (int y = 2; y < 18; ++y) {
    for (int x = 2; x < 18; ++x) {
      double h, s, v;
      rgb_to_hsv(scaled.at(x, y), h, s, v);
      sum_cos += std::cos(2.0 * M_PI * h);
      sum_sin += std::sin(2.0 * M_PI * h);
      sum_s += s;
      sum_v += v;
      ++n;
    }
  }
  const double mean_s = sum_s / n;
  const double mean_v = sum_v / n;
  double mean_h = 0.0;
  if (sum_cos * sum_cos + sum_sin * sum_sin > 1e-18) {
    mean_h = std::atan2(sum_sin, sum_cos) / (2.0 * M_PI);
    if (mean_h < 0.0) mean_h += 1.0;
  }
  return hsv_embed(mean_h, mean_s, mean_v);
}

std::vector<int> dbscan(std::span<const Vec3> features, double eps, int min_pts) {
  if (!(eps > 0.0)) throw std::invalid_argument("dbscan: eps must be > 0");
  if (min_pts < 1) throw std::invalid_argument("dbscan: min_pts must be >= 1");
  const int n = static_cast<int>(features.size());
  constexpr int kUnvisited = -2;
  constexpr int kNoise = -1;
  std::vector<int> labels(static_cast<std::size_t>(n), kUnvisited);
  const double eps2 = eps * eps;

  auto region_query = [&](int i) {
    std::vector<int> out;
    for (int j = 0; j < n; ++j) {
      if ((features[static_cast<std::size_t>(i)] - features[static_cast<std::size_t>(j)]).squaredNorm() <= eps2) {
        out.push_back(j);
      }
    }
    return out;
  };

  int cluster = 0;
  for (int i = 0; i < n; ++i) {
    if (labels[static_cast<std::size_t>(i)] != kUnvisited) continue;
    const auto neighbors = region_query(i);
    if (static_cast<int>(neighbors.size()) < min_pts) {
      labels[static_cast<std::size_t>(i)] = kNoise;
      continue;
    }
    labels[static_cast<std::size_t>(i)] = cluster;
    std::deque<int> queue(neighbors.begin(), neighbors.end());
    while (!queue.empty()) {
      const int j = queue.front();
      queue.pop_front();
      if (labels[static_cast<std::size_t>(j)] == kNoise) {
        labels[static_cast<std::size_t>(j)] = cluster;  // border point
        continue;
      }
      if (labels[static_cast<std::size_t>(j)] != kUnvisited) continue;
      labels[static_cast<std::size_t>(j)] = cluster;
      const auto nj = region_query(j);
      if (static_cast<int>(nj.size()) >= min_pts) {
        queue.insert(queue.end(), nj.begin(), nj.end());
      }
    }
    ++cluster;
  }
  return labels;
}

double cluster_cost(std::span<const int> labels) {
  std::map<int, int> sizes;
  int noise = 0;
  for (const int l : labels) {
    if (l < 0) {
      ++noise;
    } else {
      ++sizes[l];
    }
  }
  if (sizes.size() != 2) return std::numeric_limits<double>::infinity();
  const int a = std::max(sizes[0], sizes[1]);
  const int b = std::min(sizes[0], sizes[1]);
  return static_cast<double>(noise) + static_cast<double>(a - b);
}

namespace {

int min_pts_for(double n_cls, std::size_t n) {
  return std::max(2, static_cast<int>(std::llround(n_cls * static_cast<double>(n))));
}

}  // namespace

std::optional<double> epsilon_search(std::span<const Vec3> features, const TeamClusterConfig& cfg) {
  if (!(cfg.n_cls >= 0.0 && cfg.n_cls <= 0.5)) {
    throw std::invalid_argument("epsilon_search: n_cls must lie in [0, 0.5]");
  }
  if (!(cfg.eps_lo > 0.0 && cfg.eps_step > 0.0 && cfg.eps_hi >= cfg.eps_lo)) {
    throw std::invalid_argument("epsilon_search: empty epsilon grid");
  }
  const int min_pts = min_pts_for(cfg.n_cls, features.size());
  if (static_cast<int>(features.size()) < 2 * min_pts) {
    throw std::invalid_argument("epsilon_search: need at least 2 * min_pts features");
  }
  std::vector<double> grid;
  for (double eps = cfg.eps_lo; eps <= cfg.eps_hi + 1e-12; eps += cfg.eps_step) grid.push_back(eps);
  std::vector<double> costs(grid.size());
  parallel_for(grid.size(), [&](std::size_t i) {
    costs[i] = cluster_cost(dbscan(features, grid[i], min_pts));
  });
  std::optional<double> best_eps;
  double best_cost = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < grid.size(); ++i) {
    if (costs[i] < best_cost) {  // strict: ties keep the smaller eps
      best_cost = costs[i];
      best_eps = grid[i];
    }
  }
  if (!std::isfinite(best_cost)) return std::nullopt;
  return best_eps;
}

std::vector<TeamLabel> assign_teams(const MatchColorData& data, const TeamClusterConfig& cfg) {
  const std::size_t n = data.feature.size();
  if (data.frame.size() != n) throw std::invalid_argument("assign_teams: ragged color data");
  if (n == 0) return {};

  // Seeded frame sample for the grid search (fork tag 2: frame sampling).
  std::vector<int> frames(data.frame.begin(), data.frame.end());
  std::sort(frames.begin(), frames.end());
  frames.erase(std::unique(frames.begin(), frames.end()), frames.end());
  Rng rng = Rng(cfg.seed).fork(2);
  std::vector<int> picked = frames;
  for (std::size_t i = picked.size(); i > 1; --i) {
    std::swap(picked[i - 1], picked[static_cast<std::size_t>(rng.uniform_int(0, static_cast<int>(i) - 1))]);
  }
  if (static_cast<int>(picked.size()) > cfg.sample_frames) {
    picked.resize(static_cast<std::size_t>(cfg.sample_frames));
  }
  std::sort(picked.begin(), picked.end());
  std::vector<Vec3> sample;
  for (std::size_t i = 0; i < n; ++i) {
    if (std::binary_search(picked.begin(), picked.end(), data.frame[i])) {
      sample.push_back(data.feature[i]);
    }
  }

  const auto eps = epsilon_search(sample, cfg);
  if (!eps) throw std::runtime_error("assign_teams: no epsilon yields two clusters");

  // Final clustering over every detection; min_pts keeps the same fraction
  // semantics on the full detection count.
  const auto labels = dbscan(data.feature, *eps, min_pts_for(cfg.n_cls, n));
  std::map<int, int> sizes;
  std::map<int, double> index_sum;
  for (std::size_t i = 0; i < n; ++i) {
    if (labels[i] >= 0) {
      ++sizes[labels[i]];
      index_sum[labels[i]] += static_cast<double>(i);
    }
  }
  std::vector<std::pair<int, int>> ranked;  // (cluster id, size)
  ranked.reserve(sizes.size());
  for (const auto& [id, size] : sizes) ranked.emplace_back(id, size);
  std::sort(ranked.begin(), ranked.end(), [](const auto& a, const auto& b) {
    if (a.second != b.second) return a.second > b.second;
    return a.first < b.first;
  });

  int id_a = -1, id_b = -1;
  if (ranked.size() >= 2) {
    id_a = ranked[0].first;
    id_b = ranked[1].first;
    if (ranked[0].second == ranked[1].second) {
      // Equal sizes: the cluster with the lower mean detection index is A.
      const double mean_a = index_sum[id_a] / ranked[0].second;
      const double mean_b = index_sum[id_b] / ranked[1].second;
      if (mean_b < mean_a) std::swap(id_a, id_b);
    }
  } else if (ranked.size() == 1) {
    id_a = ranked[0].first;
  }

  std::vector<TeamLabel> out(n, TeamLabel::Other);
  for (std::size_t i = 0; i < n; ++i) {
    if (labels[i] == id_a && id_a >= 0) {
      out[i] = TeamLabel::A;
    } else if (labels[i] == id_b && id_b >= 0) {
      out[i] = TeamLabel::B;
    }
  }
  return out;
}

}  // namespace pitchpos
