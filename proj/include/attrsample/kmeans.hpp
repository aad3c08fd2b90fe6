#pragma once

#include <cmath>
#include <limits>
#include <random>
#include <vector>

#include "attrsample/error.hpp"

namespace attrsample {

using Point = std::vector<double>;

inline double squared_distance(const Point& a, const Point& b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    double d = a[i] - b[i];
    s += d * d;
  }
  return s;
}

struct KMeansResult {
  std::vector<int> labels;
  std::vector<Point> centers;
  double sse = 0.0;
  /// SSE after each Lloyd iteration of the winning restart.
  std::vector<double> sse_trace;
};

struct KMeansOptions {
  std::size_t restarts = 10;
  std::size_t max_iterations = 100;
};

inline int nearest_center(const Point& p, const std::vector<Point>& centers) {
  int best = 0;
  double bd = std::numeric_limits<double>::infinity();
  for (std::size_t c = 0; c < centers.size(); ++c) {
    double d = squared_distance(p, centers[c]);
    if (d < bd) {
      bd = d;
      best = static_cast<int>(c);
    }
  }
  return best;
}

namespace detail {

template <class Rng>
std::vector<Point> kmeanspp_seed(const std::vector<Point>& pts, std::size_t k, Rng& rng) {
  std::vector<Point> centers;
  std::vector<bool> chosen(pts.size(), false);
  std::uniform_int_distribution<std::size_t> first(0, pts.size() - 1);
  std::size_t i0 = first(rng);
  centers.push_back(pts[i0]);
  chosen[i0] = true;
  std::vector<double> d2(pts.size());
  for (std::size_t i = 0; i < pts.size(); ++i) d2[i] = squared_distance(pts[i], centers[0]);
  while (centers.size() < k) {
    double total = 0.0;
    for (std::size_t i = 0; i < pts.size(); ++i)
      if (!chosen[i]) total += d2[i];
    std::size_t pick = pts.size();
    if (total > 0.0) {
      double r = std::uniform_real_distribution<double>(0.0, total)(rng);
      for (std::size_t i = 0; i < pts.size(); ++i) {
        if (chosen[i]) continue;
        pick = i;
        r -= d2[i];
        if (r < 0.0) break;
      }
    } else {
      // All remaining points coincide with a center: pick uniformly among them.
      std::vector<std::size_t> rest;
      for (std::size_t i = 0; i < pts.size(); ++i)
        if (!chosen[i]) rest.push_back(i);
      pick = rest[std::uniform_int_distribution<std::size_t>(0, rest.size() - 1)(rng)];
    }
    chosen[pick] = true;
    centers.push_back(pts[pick]);
    for (std::size_t i = 0; i < pts.size(); ++i) d2[i] = std::min(d2[i], squared_distance(pts[i], centers.back()));
  }
  return centers;
}

}  // namespace detail

/// Lloyd's k-means with k-means++ seeding; the restart with the lowest
/// within-cluster SSE wins. Deterministic given the rng state.
template <class Rng>
KMeansResult kmeans(const std::vector<Point>& pts, std::size_t k, Rng& rng, KMeansOptions opt = {}) {
  if (k == 0) throw ContractError("k-means needs k >= 1");
  if (pts.size() < k) throw DataError("k-means needs at least k points");
  const std::size_t dim = pts.front().size();
  KMeansResult best;
  best.sse = std::numeric_limits<double>::infinity();
  for (std::size_t r = 0; r < std::max<std::size_t>(opt.restarts, 1); ++r) {
    KMeansResult cur;
    cur.centers = detail::kmeanspp_seed(pts, k, rng);
    cur.labels.assign(pts.size(), -1);
    for (std::size_t it = 0; it < opt.max_iterations; ++it) {
      bool changed = false;
      for (std::size_t i = 0; i < pts.size(); ++i) {
        int c = nearest_center(pts[i], cur.centers);
        if (c != cur.labels[i]) {
          cur.labels[i] = c;
          changed = true;
        }
      }
      std::vector<Point> sums(k, Point(dim, 0.0));
      std::vector<std::size_t> counts(k, 0);
      for (std::size_t i = 0; i < pts.size(); ++i) {
        auto c = static_cast<std::size_t>(cur.labels[i]);
        ++counts[c];
        for (std::size_t j = 0; j < dim; ++j) sums[c][j] += pts[i][j];
      }
      for (std::size_t c = 0; c < k; ++c) {
        if (counts[c] == 0) {
          // Re-seed an empty cluster at the point farthest from its center.
          std::size_t far = 0;
          double fd = -1.0;
          for (std::size_t i = 0; i < pts.size(); ++i) {
            double d = squared_distance(pts[i], cur.centers[cur.labels[i]]);
            if (d > fd) {
              fd = d;
              far = i;
            }
          }
          cur.centers[c] = pts[far];
          changed = true;
          continue;
        }
        for (std::size_t j = 0; j < dim; ++j) cur.centers[c][j] = sums[c][j] / static_cast<double>(counts[c]);
      }
      double sse = 0.0;
      for (std::size_t i = 0; i < pts.size(); ++i) sse += squared_distance(pts[i], cur.centers[cur.labels[i]]);
      cur.sse_trace.push_back(sse);
      cur.sse = sse;
      if (!changed) break;
    }
    // Final assignment consistent with the final centers.
    cur.sse = 0.0;
    for (std::size_t i = 0; i < pts.size(); ++i) {
      cur.labels[i] = nearest_center(pts[i], cur.centers);
      cur.sse += squared_distance(pts[i], cur.centers[cur.labels[i]]);
    }
    if (cur.sse < best.sse) best = std::move(cur);
  }
  return best;
}

/// Column-wise z-score parameters fitted on one point set.
struct Standardizer {
  std::vector<double> mean;
  std::vector<double> scale;

  static Standardizer fit(const std::vector<Point>& pts) {
    Standardizer s;
    if (pts.empty()) return s;
    const std::size_t dim = pts.front().size();
    s.mean.assign(dim, 0.0);
    s.scale.assign(dim, 0.0);
    for (const auto& p : pts)
      for (std::size_t j = 0; j < dim; ++j) s.mean[j] += p[j];
    for (auto& m : s.mean) m /= static_cast<double>(pts.size());
    for (const auto& p : pts)
      for (std::size_t j = 0; j < dim; ++j) s.scale[j] += (p[j] - s.mean[j]) * (p[j] - s.mean[j]);
    for (auto& v : s.scale) {
      v = std::sqrt(v / static_cast<double>(pts.size()));
      if (!(v > 0.0)) v = 1.0;
    }
    return s;
  }

  Point apply(const Point& p) const {
    Point out(p.size());
    for (std::size_t j = 0; j < p.size(); ++j) out[j] = (p[j] - mean[j]) / scale[j];
    return out;
  }

  std::vector<Point> apply(const std::vector<Point>& pts) const {
    std::vector<Point> out;
    out.reserve(pts.size());
    for (const auto& p : pts) out.push_back(apply(p));
    return out;
  }
};

}  // namespace attrsample
