#pragma once

// Brute-force reference computations used to derive frozen test values.
// Deliberately share no code with the library: distances are recomputed
// from scratch and optima come from exhaustive grids.

#include <algorithm>
#include <cmath>
#include <limits>
#include <utility>
#include <vector>

namespace oracle {

using Vec = std::vector<double>;

inline double lp(const Vec& v, double p) {
  if (std::isinf(p)) {
    double m = 0.0;
    for (double x : v) m = std::max(m, std::abs(x));
    return m;
  }
  double s = 0.0;
  for (double x : v) s += std::pow(std::abs(x), p);
  return std::pow(s, 1.0 / p);
}

/// ||W A (a - b)||_p with A row-major (empty = identity) and weights W (empty = ones).
struct Dist {
  double p = 2.0;
  Vec A;
  Vec w;

  double operator()(const Vec& a, const Vec& b) const {
    const std::size_t d = a.size();
    Vec diff(d), z(d);
    for (std::size_t k = 0; k < d; ++k) diff[k] = a[k] - b[k];
    for (std::size_t r = 0; r < d; ++r) {
      double s = 0.0;
      if (A.empty()) {
        s = diff[r];
      } else {
        for (std::size_t c = 0; c < d; ++c) s += A[r * d + c] * diff[c];
      }
      z[r] = (w.empty() ? 1.0 : w[r]) * s;
    }
    return lp(z, p);
  }
};

inline double social(const Vec& y, const std::vector<Vec>& pts, const Dist& dist) {
  double s = 0.0;
  for (const Vec& x : pts) s += dist(x, y);
  return s;
}

inline double maximum(const Vec& y, const std::vector<Vec>& pts, const Dist& dist) {
  double m = 0.0;
  for (const Vec& x : pts) m = std::max(m, dist(x, y));
  return m;
}

struct GridMin {
  Vec point;
  double value = std::numeric_limits<double>::infinity();
};

/// Exhaustive 2-D grid over [lo, hi] with the given step.
template <class F>
GridMin grid2(F&& f, const Vec& lo, const Vec& hi, double step) {
  GridMin best;
  const auto nx = static_cast<long>(std::floor((hi[0] - lo[0]) / step + 0.5));
  const auto ny = static_cast<long>(std::floor((hi[1] - lo[1]) / step + 0.5));
  for (long i = 0; i <= nx; ++i) {
    for (long j = 0; j <= ny; ++j) {
      Vec y{lo[0] + static_cast<double>(i) * step, lo[1] + static_cast<double>(j) * step};
      const double v = f(y);
      if (v < best.value) best = {y, v};
    }
  }
  return best;
}

/// Branch-and-bound grid: a coarse grid over the box, then four rounds that
/// refine tenfold around every node whose value is within `slack(step)` of the
/// round's best, where slack(step) bounds how far the node nearest the
/// minimizer can sit above the minimum. Every cell that can hold the minimizer
/// is kept, so the final value exceeds the minimum by at most slack(coarse / 1e4),
/// provided the box contains a minimizer.
inline constexpr std::size_t kMaxSurvivors = 256;

template <class F, class S>
GridMin refine2(F&& f, const Vec& lo, const Vec& hi, double coarse, S&& slack) {
  using Key = std::pair<long long, long long>;
  const auto nx = static_cast<long long>(std::floor((hi[0] - lo[0]) / coarse + 0.5));
  const auto ny = static_cast<long long>(std::floor((hi[1] - lo[1]) / coarse + 0.5));
  std::vector<std::pair<Key, double>> level;
  double step = coarse;
  auto at = [&](const Key& k) {
    return Vec{lo[0] + static_cast<double>(k.first) * step, lo[1] + static_cast<double>(k.second) * step};
  };
  for (long long i = 0; i <= nx; ++i) {
    for (long long j = 0; j <= ny; ++j) level.push_back({{i, j}, f(at({i, j}))});
  }
  GridMin best;
  auto prune = [&]() {
    double lowest = std::numeric_limits<double>::infinity();
    Key arg{0, 0};
    for (const auto& [k, v] : level) {
      if (v < lowest) lowest = v, arg = k;
    }
    if (lowest < best.value) best = {at(arg), lowest};
    const double cut = lowest + slack(step);
    std::erase_if(level, [cut](const auto& e) { return e.second > cut; });
    // Flat optimal regions would otherwise grow a hundredfold per round; any
    // survivor of a flat region is as good as the rest.
    if (level.size() > kMaxSurvivors) {
      std::nth_element(level.begin(), level.begin() + kMaxSurvivors, level.end(),
                       [](const auto& a, const auto& b) { return a.second < b.second; });
      level.resize(kMaxSurvivors);
    }
  };
  prune();
  for (int round = 0; round < 4; ++round) {
    std::vector<Key> parents;
    for (const auto& e : level) parents.push_back(e.first);
    step /= 10.0;
    std::vector<Key> keys;
    for (const Key& k : parents) {
      for (long long i = -10; i <= 10; ++i) {
        for (long long j = -10; j <= 10; ++j) keys.push_back({k.first * 10 + i, k.second * 10 + j});
      }
    }
    std::sort(keys.begin(), keys.end());
    keys.erase(std::unique(keys.begin(), keys.end()), keys.end());
    level.clear();
    for (const Key& k : keys) level.push_back({k, f(at(k))});
    prune();
  }
  return best;
}

}  // namespace oracle
