#include "facloc/objectives.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <numeric>

#include <Eigen/Dense>

namespace facloc {

std::string to_string(Objective obj) { return obj == Objective::max_cost ? "mc" : "sc"; }

Objective parse_objective(const std::string& text) {
  if (text == "mc" || text == "max_cost") return Objective::max_cost;
  if (text == "sc" || text == "social_cost") return Objective::social_cost;
  throw DomainError("unknown objective '" + text + "' (expected mc or sc)");
}

double max_cost_at(const Point& y, std::span<const Point> agents, const Norm& norm) {
  double m = 0.0;
  for (const Point& x : agents) m = std::max(m, norm.distance(x, y));
  return m;
}

double social_cost_at(const Point& y, std::span<const Point> agents, const Norm& norm) {
  double s = 0.0;
  for (const Point& x : agents) s += norm.distance(x, y);
  return s;
}

double cost_mc(const Lottery& lot, const Profile& profile, const Norm& norm) {
  if (lot.dim() != profile.dim()) throw DimensionError("cost_mc: dimension mismatch");
  double s = 0.0;
  for (const Atom& a : lot.atoms()) s += a.weight * max_cost_at(a.point, profile.points(), norm);
  return s;
}

double cost_sc(const Lottery& lot, const Profile& profile, const Norm& norm) {
  if (lot.dim() != profile.dim()) throw DimensionError("cost_sc: dimension mismatch");
  double s = 0.0;
  for (const Atom& a : lot.atoms()) s += a.weight * social_cost_at(a.point, profile.points(), norm);
  return s;
}

double cost(Objective obj, const Lottery& lot, const Profile& profile, const Norm& norm) {
  return obj == Objective::max_cost ? cost_mc(lot, profile, norm) : cost_sc(lot, profile, norm);
}

double gap_target(double value) noexcept { return 1e-6 * (1.0 + value); }

namespace {

// Agents mapped by the norm's linear part, so the objective becomes a plain
// p-norm problem over z = W A y.
struct Mapped {
  std::size_t n = 0;
  std::size_t d = 0;
  double p = 2.0;
  double q = 2.0;
  std::vector<double> z;  // n x d, row-major
  double scale = 1.0;     // max |z| entry, at least 1

  const double* at(std::size_t i) const { return z.data() + i * d; }
};

Mapped map_agents(std::span<const Point> agents, const Norm& norm) {
  if (agents.empty()) throw DomainError("optimizer: no agents");
  Mapped m;
  m.n = agents.size();
  m.d = agents.front().dim();
  m.p = norm.p();
  m.q = norm.q();
  m.z.reserve(m.n * m.d);
  for (const Point& x : agents) {
    if (x.dim() != m.d) throw DimensionError("optimizer: dimension mismatch");
    const auto zx = norm.to_canonical(x.coords());
    m.z.insert(m.z.end(), zx.begin(), zx.end());
  }
  for (double v : m.z) m.scale = std::max(m.scale, std::abs(v));
  return m;
}

double pdist(const double* a, const double* b, std::size_t d, double p) {
  if (p == 2.0) {
    double s = 0.0;
    for (std::size_t k = 0; k < d; ++k) s += (a[k] - b[k]) * (a[k] - b[k]);
    return std::sqrt(s);
  }
  if (p == 1.0) {
    double s = 0.0;
    for (std::size_t k = 0; k < d; ++k) s += std::abs(a[k] - b[k]);
    return s;
  }
  double m = 0.0;
  for (std::size_t k = 0; k < d; ++k) m = std::max(m, std::abs(a[k] - b[k]));
  if (std::isinf(p) || m == 0.0) return m;
  double s = 0.0;
  for (std::size_t k = 0; k < d; ++k) s += std::pow(std::abs(a[k] - b[k]) / m, p);
  return m * std::pow(s, 1.0 / p);
}

double sc_z(const Mapped& m, const double* y) {
  double s = 0.0;
  for (std::size_t i = 0; i < m.n; ++i) s += pdist(m.at(i), y, m.d, m.p);
  return s;
}

double mc_z(const Mapped& m, const double* y) {
  double s = 0.0;
  for (std::size_t i = 0; i < m.n; ++i) s = std::max(s, pdist(m.at(i), y, m.d, m.p));
  return s;
}

double dot(const std::vector<double>& a, const double* b) {
  double s = 0.0;
  for (std::size_t k = 0; k < a.size(); ++k) s += a[k] * b[k];
  return s;
}

// Unit dual vector s of v != 0: ||s||_q = 1 and <s, v> = ||v||_p.
std::vector<double> dual_vector(const std::vector<double>& v, double p, double len) {
  std::vector<double> s(v.size(), 0.0);
  if (p == 2.0) {
    for (std::size_t k = 0; k < v.size(); ++k) s[k] = v[k] / len;
  } else if (p == 1.0) {
    for (std::size_t k = 0; k < v.size(); ++k) s[k] = v[k] > 0.0 ? 1.0 : (v[k] < 0.0 ? -1.0 : 0.0);
  } else if (std::isinf(p)) {
    std::size_t best = 0;
    for (std::size_t k = 1; k < v.size(); ++k) {
      if (std::abs(v[k]) > std::abs(v[best])) best = k;
    }
    s[best] = v[best] >= 0.0 ? 1.0 : -1.0;
  } else {
    for (std::size_t k = 0; k < v.size(); ++k) {
      const double r = std::pow(std::abs(v[k]) / len, p - 1.0);
      s[k] = v[k] >= 0.0 ? r : -r;
    }
  }
  return s;
}

std::vector<double> diff(const double* a, const double* b, std::size_t d) {
  std::vector<double> v(d);
  for (std::size_t k = 0; k < d; ++k) v[k] = a[k] - b[k];
  return v;
}

// Min-Euclidean-norm point of conv{vs}. Exact by Caratheodory enumeration of
// affine hulls of at most d+1 generators; Frank-Wolfe for large sets.
std::vector<double> min_norm_weights(const std::vector<std::vector<double>>& vs) {
  const std::size_t k = vs.size();
  std::vector<double> best(k, 0.0);
  if (k == 0) return best;
  const std::size_t d = vs.front().size();
  auto hull_norm2 = [&](const std::vector<double>& lam) {
    std::vector<double> g(d, 0.0);
    for (std::size_t j = 0; j < k; ++j) {
      for (std::size_t c = 0; c < d; ++c) g[c] += lam[j] * vs[j][c];
    }
    double s = 0.0;
    for (double x : g) s += x * x;
    return s;
  };
  double best_norm = std::numeric_limits<double>::infinity();

  if (k <= 12) {
    const std::size_t max_size = std::min(k, d + 1);
    std::vector<std::size_t> idx;
    std::function<void(std::size_t)> visit = [&](std::size_t start) {
      if (!idx.empty()) {
        const std::size_t m = idx.size();
        Eigen::MatrixXd kkt = Eigen::MatrixXd::Zero(m + 1, m + 1);
        for (std::size_t a = 0; a < m; ++a) {
          for (std::size_t b = 0; b < m; ++b) {
            double g = 0.0;
            for (std::size_t c = 0; c < d; ++c) g += vs[idx[a]][c] * vs[idx[b]][c];
            kkt(a, b) = g;
          }
          kkt(a, m) = 1.0;
          kkt(m, a) = 1.0;
        }
        Eigen::VectorXd rhs = Eigen::VectorXd::Zero(m + 1);
        rhs(m) = 1.0;
        Eigen::FullPivLU<Eigen::MatrixXd> lu(kkt);
        if (lu.isInvertible()) {
          const Eigen::VectorXd sol = lu.solve(rhs);
          bool feasible = true;
          for (std::size_t a = 0; a < m; ++a) feasible = feasible && sol(a) >= -1e-12;
          if (feasible) {
            std::vector<double> lam(k, 0.0);
            double total = 0.0;
            for (std::size_t a = 0; a < m; ++a) total += (lam[idx[a]] = std::max(0.0, sol(a)));
            for (double& l : lam) l /= total;
            const double nrm = hull_norm2(lam);
            if (nrm < best_norm) {
              best_norm = nrm;
              best = lam;
            }
          }
        }
      }
      if (idx.size() == max_size) return;
      for (std::size_t j = start; j < k; ++j) {
        idx.push_back(j);
        visit(j + 1);
        idx.pop_back();
      }
    };
    visit(0);
    return best;
  }

  // Frank-Wolfe with line search.
  std::vector<double> lam(k, 1.0 / static_cast<double>(k));
  for (int it = 0; it < 5000; ++it) {
    std::vector<double> g(d, 0.0);
    for (std::size_t j = 0; j < k; ++j) {
      for (std::size_t c = 0; c < d; ++c) g[c] += lam[j] * vs[j][c];
    }
    std::size_t arg = 0;
    double lowest = std::numeric_limits<double>::infinity();
    for (std::size_t j = 0; j < k; ++j) {
      const double v = dot(vs[j], g.data());
      if (v < lowest) lowest = v, arg = j;
    }
    std::vector<double> dir(d);
    double dd = 0.0, gd = 0.0;
    for (std::size_t c = 0; c < d; ++c) {
      dir[c] = vs[arg][c] - g[c];
      dd += dir[c] * dir[c];
      gd += g[c] * dir[c];
    }
    if (dd == 0.0 || gd >= 0.0) break;
    const double t = std::clamp(-gd / dd, 0.0, 1.0);
    for (double& l : lam) l *= (1.0 - t);
    lam[arg] += t;
  }
  return lam;
}

std::size_t count_distinct(std::span<const Point> agents, std::vector<Point>* out = nullptr) {
  std::vector<Point> distinct;
  for (const Point& x : agents) {
    if (std::find(distinct.begin(), distinct.end(), x) == distinct.end()) distinct.push_back(x);
  }
  const std::size_t n = distinct.size();
  if (out) *out = std::move(distinct);
  return n;
}

Point to_point(const Norm& norm, const std::vector<double>& z) { return Point(norm.from_canonical(z)); }

double social_lb_mapped(const Mapped& m, const std::vector<double>& y) {
  const double tiny = 1e-14 * m.scale;
  std::vector<std::vector<double>> s(m.n, std::vector<double>(m.d, 0.0));
  std::vector<std::vector<bool>> free(m.n, std::vector<bool>(m.d, false));
  std::vector<bool> coincident(m.n, false);
  std::vector<double> fixed_sum(m.d, 0.0);
  std::size_t n_coincident = 0;
  for (std::size_t i = 0; i < m.n; ++i) {
    auto v = diff(m.at(i), y.data(), m.d);
    const double len = pnorm(v, m.p);
    if (len <= tiny) {
      coincident[i] = true;
      ++n_coincident;
      std::fill(free[i].begin(), free[i].end(), true);
      continue;
    }
    s[i] = dual_vector(v, m.p, len);
    if (m.p == 1.0) {
      for (std::size_t k = 0; k < m.d; ++k) free[i][k] = std::abs(v[k]) <= tiny;
    }
    for (std::size_t k = 0; k < m.d; ++k) {
      if (!free[i][k]) fixed_sum[k] += s[i][k];
    }
  }
  // Free subgradient entries absorb the imbalance of the fixed ones.
  if (m.p == 1.0) {
    for (std::size_t k = 0; k < m.d; ++k) {
      std::size_t cnt = 0;
      for (std::size_t i = 0; i < m.n; ++i) cnt += free[i][k];
      if (cnt == 0) continue;
      const double v = std::clamp(-fixed_sum[k] / static_cast<double>(cnt), -1.0, 1.0);
      for (std::size_t i = 0; i < m.n; ++i) {
        if (free[i][k]) s[i][k] = v;
      }
    }
  } else if (n_coincident > 0) {
    std::vector<double> share(m.d);
    for (std::size_t k = 0; k < m.d; ++k) share[k] = -fixed_sum[k] / static_cast<double>(n_coincident);
    const double len = pnorm(share, m.q);
    if (len > 1.0) {
      for (double& v : share) v /= len;
    }
    for (std::size_t i = 0; i < m.n; ++i) {
      if (coincident[i]) s[i] = share;
    }
  }
  std::vector<double> avg(m.d, 0.0);
  for (std::size_t i = 0; i < m.n; ++i) {
    for (std::size_t k = 0; k < m.d; ++k) avg[k] += s[i][k] / static_cast<double>(m.n);
  }
  double worst = 1.0;
  for (auto& si : s) {
    for (std::size_t k = 0; k < m.d; ++k) si[k] -= avg[k];
    worst = std::max(worst, pnorm(si, m.q));
  }
  double lb = 0.0;
  for (std::size_t i = 0; i < m.n; ++i) {
    auto v = diff(m.at(i), y.data(), m.d);
    lb += dot(s[i], v.data());
  }
  return std::max(0.0, lb / worst);
}

double max_lb_mapped(const Mapped& m, const std::vector<double>& y) {
  double half_diam = 0.0;
  for (std::size_t i = 0; i < m.n; ++i) {
    for (std::size_t j = i + 1; j < m.n; ++j) half_diam = std::max(half_diam, 0.5 * pdist(m.at(i), m.at(j), m.d, m.p));
  }
  const double value = mc_z(m, y.data());
  if (value == 0.0) return 0.0;
  std::vector<double> c(m.n);
  std::vector<std::vector<double>> s(m.n);
  for (std::size_t i = 0; i < m.n; ++i) {
    auto v = diff(m.at(i), y.data(), m.d);
    c[i] = pnorm(v, m.p);
    s[i] = c[i] > 0.0 ? dual_vector(v, m.p, c[i]) : std::vector<double>(m.d, 0.0);
  }
  // Any z* attaining the optimum satisfies ||y - z*|| <= 2 value.
  const double reach = 2.0 * value;
  double best = half_diam;
  for (double eps : {1e-12, 1e-10, 1e-8, 1e-6, 1e-4, 1e-2, 1.0}) {
    std::vector<std::size_t> active;
    std::vector<std::vector<double>> gens;
    for (std::size_t i = 0; i < m.n; ++i) {
      if (c[i] >= value * (1.0 - eps)) {
        active.push_back(i);
        gens.push_back(s[i]);
      }
    }
    const auto lam = min_norm_weights(gens);
    std::vector<double> g(m.d, 0.0);
    double weighted = 0.0;
    for (std::size_t a = 0; a < active.size(); ++a) {
      weighted += lam[a] * c[active[a]];
      for (std::size_t k = 0; k < m.d; ++k) g[k] += lam[a] * gens[a][k];
    }
    best = std::max(best, weighted - reach * pnorm(g, m.q));
  }
  return best;
}

// Pattern search over the mapped space. Returns the number of evaluations.
std::size_t pattern_search(const std::function<double(const double*)>& f, std::vector<double>& y, double& fy,
                           double step, double min_step, std::size_t budget) {
  const std::size_t d = y.size();
  std::vector<std::vector<double>> dirs;
  if (d <= 3) {
    std::size_t total = 1;
    for (std::size_t k = 0; k < d; ++k) total *= 3;
    for (std::size_t code = 0; code < total; ++code) {
      std::vector<double> v(d);
      std::size_t c = code;
      double len = 0.0;
      for (std::size_t k = 0; k < d; ++k) {
        v[k] = static_cast<double>(c % 3) - 1.0;
        c /= 3;
        len += v[k] * v[k];
      }
      if (len == 0.0) continue;
      for (double& x : v) x /= std::sqrt(len);
      dirs.push_back(std::move(v));
    }
  } else {
    for (std::size_t k = 0; k < d; ++k) {
      for (double sgn : {1.0, -1.0}) {
        std::vector<double> v(d, 0.0);
        v[k] = sgn;
        dirs.push_back(std::move(v));
      }
    }
  }
  std::size_t evals = 0;
  std::vector<double> trial(d);
  while (step >= min_step && evals < budget) {
    double best = fy;
    std::size_t arg = dirs.size();
    for (std::size_t j = 0; j < dirs.size(); ++j) {
      for (std::size_t k = 0; k < d; ++k) trial[k] = y[k] + step * dirs[j][k];
      const double v = f(trial.data());
      ++evals;
      if (v < best) best = v, arg = j;
    }
    if (arg < dirs.size()) {
      for (std::size_t k = 0; k < d; ++k) y[k] += step * dirs[arg][k];
      fy = best;
      step *= 2.0;
    } else {
      step *= 0.5;
    }
  }
  return evals;
}

struct GridOutcome {
  std::vector<double> best;
  double value;
  double step;
};

// Coarse-to-fine grid: step = extent / 20 over the padded box, then three
// rounds each refining the step tenfold around the incumbent.
GridOutcome grid_refine(const Mapped& m, const std::function<double(const double*)>& f) {
  std::vector<double> lo(m.d, std::numeric_limits<double>::infinity());
  std::vector<double> hi(m.d, -std::numeric_limits<double>::infinity());
  for (std::size_t i = 0; i < m.n; ++i) {
    for (std::size_t k = 0; k < m.d; ++k) {
      lo[k] = std::min(lo[k], m.at(i)[k]);
      hi[k] = std::max(hi[k], m.at(i)[k]);
    }
  }
  double extent = 0.0;
  for (std::size_t k = 0; k < m.d; ++k) extent = std::max(extent, hi[k] - lo[k]);
  GridOutcome out{lo, f(lo.data()), 0.0};
  if (extent == 0.0) return out;

  // Cap the node count for higher dimensions.
  const double cap = 20000.0;
  const auto per_dim_cap = static_cast<std::size_t>(std::max(3.0, std::floor(std::pow(cap, 1.0 / static_cast<double>(m.d)))));

  double step = extent / 20.0;
  std::vector<double> box_lo(m.d), box_hi(m.d);
  for (std::size_t k = 0; k < m.d; ++k) {
    box_lo[k] = lo[k] - step;
    box_hi[k] = hi[k] + step;
  }
  std::vector<double> node(m.d);
  for (int round = 0; round < 4; ++round) {
    std::vector<std::size_t> counts(m.d);
    std::vector<double> steps(m.d);
    std::size_t total = 1;
    for (std::size_t k = 0; k < m.d; ++k) {
      const double span = box_hi[k] - box_lo[k];
      std::size_t c = static_cast<std::size_t>(std::ceil(span / step - 1e-9)) + 1;
      c = std::clamp<std::size_t>(c, 1, per_dim_cap);
      counts[k] = c;
      steps[k] = c > 1 ? span / static_cast<double>(c - 1) : 0.0;
      total *= c;
    }
    for (std::size_t code = 0; code < total; ++code) {
      std::size_t c = code;
      for (std::size_t k = 0; k < m.d; ++k) {
        node[k] = box_lo[k] + steps[k] * static_cast<double>(c % counts[k]);
        c /= counts[k];
      }
      const double v = f(node.data());
      if (v < out.value) {
        out.value = v;
        out.best = node;
      }
    }
    double used = 0.0;
    for (std::size_t k = 0; k < m.d; ++k) {
      used = std::max(used, steps[k]);
      box_lo[k] = out.best[k] - steps[k];
      box_hi[k] = out.best[k] + steps[k];
    }
    out.step = used;
    step = used / 10.0;
  }
  return out;
}

// Epsilon-subgradient descent for max_i ||z_i - y||: move along the
// min-norm element of the hull of near-active dual vectors.
std::size_t max_descent(const Mapped& m, std::vector<double>& y, double& fy, std::size_t budget) {
  std::size_t evals = 0;
  double eps = 0.1;
  std::vector<double> trial(m.d);
  std::vector<double> c(m.n);
  std::vector<std::vector<double>> s(m.n);
  while (evals < budget && eps > 1e-15) {
    for (std::size_t i = 0; i < m.n; ++i) {
      auto v = diff(m.at(i), y.data(), m.d);
      c[i] = pnorm(v, m.p);
      s[i] = c[i] > 0.0 ? dual_vector(v, m.p, c[i]) : std::vector<double>(m.d, 0.0);
    }
    std::vector<std::vector<double>> gens;
    for (std::size_t i = 0; i < m.n; ++i) {
      if (c[i] >= fy * (1.0 - eps)) gens.push_back(s[i]);
    }
    const auto lam = min_norm_weights(gens);
    std::vector<double> g(m.d, 0.0);
    for (std::size_t a = 0; a < gens.size(); ++a) {
      for (std::size_t k = 0; k < m.d; ++k) g[k] += lam[a] * gens[a][k];
    }
    const double gl = pnorm(g, 2.0);
    if (gl <= 1e-15) {
      eps *= 0.25;
      continue;
    }
    double t = std::max(eps * fy, 1e-16 * m.scale) / gl;
    bool moved = false;
    for (int h = 0; h < 60 && evals < budget; ++h, t *= 0.5) {
      for (std::size_t k = 0; k < m.d; ++k) trial[k] = y[k] + t * g[k] / gl;
      const double v = mc_z(m, trial.data());
      ++evals;
      if (v < fy) {
        y = trial;
        fy = v;
        moved = true;
        break;
      }
    }
    if (!moved) eps *= 0.25;
    if (evals % 16 == 0 && fy - max_lb_mapped(m, y) <= 0.01 * gap_target(fy)) break;
  }
  return evals;
}

OptResult finish(Objective obj, std::span<const Point> agents, const Norm& norm, const Mapped& m,
                 const std::vector<double>& z, std::string method) {
  Point y = to_point(norm, z);
  const double value = obj == Objective::max_cost ? max_cost_at(y, agents, norm) : social_cost_at(y, agents, norm);
  const auto zy = norm.to_canonical(y.coords());
  const double lb = obj == Objective::max_cost ? max_lb_mapped(m, zy) : social_lb_mapped(m, zy);
  const double gap = std::max(0.0, value - lb);
  return OptResult{std::move(y), value, gap, gap <= gap_target(value), std::move(method)};
}

}  // namespace

double social_cost_lower_bound(std::span<const Point> agents, const Norm& norm, const Point& y) {
  const Mapped m = map_agents(agents, norm);
  return social_lb_mapped(m, norm.to_canonical(y.coords()));
}

double max_cost_lower_bound(std::span<const Point> agents, const Norm& norm, const Point& y) {
  const Mapped m = map_agents(agents, norm);
  return max_lb_mapped(m, norm.to_canonical(y.coords()));
}

OptResult weiszfeld_median(std::span<const Point> agents, const Norm& norm, std::size_t budget) {
  if (norm.p() != 2.0) throw DomainError("weiszfeld_median: requires p = 2");
  const Mapped m = map_agents(agents, norm);
  std::vector<Point> distinct;
  count_distinct(agents, &distinct);
  // Distinct mapped points with multiplicities.
  std::vector<std::vector<double>> pts;
  std::vector<double> mult;
  for (const Point& x : distinct) {
    pts.push_back(norm.to_canonical(x.coords()));
    mult.push_back(static_cast<double>(std::count(agents.begin(), agents.end(), x)));
  }
  const std::size_t k = pts.size();
  const std::size_t d = m.d;

  // resultant(j) = sum over other points of mult * unit vector toward them.
  auto resultant = [&](std::size_t j) {
    std::vector<double> r(d, 0.0);
    for (std::size_t i = 0; i < k; ++i) {
      if (i == j) continue;
      const double len = pdist(pts[i].data(), pts[j].data(), d, 2.0);
      for (std::size_t c = 0; c < d; ++c) r[c] += mult[i] * (pts[i][c] - pts[j][c]) / len;
    }
    return r;
  };

  // A data point is optimal iff its resultant is no longer than its multiplicity.
  for (std::size_t j = 0; j < k; ++j) {
    if (pnorm(resultant(j), 2.0) <= mult[j]) return finish(Objective::social_cost, agents, norm, m, pts[j], "weiszfeld");
  }

  std::vector<double> y(d, 0.0);
  for (std::size_t i = 0; i < m.n; ++i) {
    for (std::size_t c = 0; c < d; ++c) y[c] += m.at(i)[c] / static_cast<double>(m.n);
  }
  const double snap = 1e-9 * m.scale;
  for (std::size_t it = 0; it < budget; ++it) {
    std::size_t hit = k;
    for (std::size_t j = 0; j < k; ++j) {
      if (pdist(pts[j].data(), y.data(), d, 2.0) <= snap) hit = j;
    }
    std::vector<double> num(d, 0.0);
    double den = 0.0;
    for (std::size_t j = 0; j < k; ++j) {
      if (j == hit) continue;
      const double len = pdist(pts[j].data(), y.data(), d, 2.0);
      for (std::size_t c = 0; c < d; ++c) num[c] += mult[j] * pts[j][c] / len;
      den += mult[j] / len;
    }
    std::vector<double> next(d);
    for (std::size_t c = 0; c < d; ++c) next[c] = num[c] / den;
    if (hit < k) {
      // Escape step away from a non-optimal data point (Vardi-Zhang).
      const double r = pnorm(resultant(hit), 2.0);
      const double w = std::min(1.0, mult[hit] / r);
      for (std::size_t c = 0; c < d; ++c) next[c] = (1.0 - w) * next[c] + w * pts[hit][c];
    }
    const double moved = pdist(next.data(), y.data(), d, 2.0);
    y = std::move(next);
    if (moved <= 1e-15 * m.scale) break;
    if (it % 32 == 31 && sc_z(m, y.data()) - social_lb_mapped(m, y) <= 1e-3 * gap_target(sc_z(m, y.data()))) break;
  }
  return finish(Objective::social_cost, agents, norm, m, y, "weiszfeld");
}

OptResult grid_minimize(Objective obj, std::span<const Point> agents, const Norm& norm, std::size_t budget) {
  const Mapped m = map_agents(agents, norm);
  std::function<double(const double*)> f;
  if (obj == Objective::max_cost) f = [&m](const double* y) { return mc_z(m, y); };
  else f = [&m](const double* y) { return sc_z(m, y); };

  GridOutcome g = grid_refine(m, f);
  std::vector<double> y = g.best;
  double fy = g.value;
  // Data points and the mean are cheap extra starts.
  for (std::size_t i = 0; i < m.n; ++i) {
    const double v = f(m.at(i));
    if (v < fy) fy = v, y.assign(m.at(i), m.at(i) + m.d);
  }
  std::size_t used = 0;
  if (obj == Objective::max_cost) used += max_descent(m, y, fy, budget / 2);
  const double step = g.step > 0.0 ? 2.0 * g.step : m.scale;
  used += pattern_search(f, y, fy, step, 1e-14 * m.scale, budget > used ? budget - used : 0);
  if (obj == Objective::max_cost && used < budget) max_descent(m, y, fy, budget - used);
  return finish(obj, agents, norm, m, y, "grid+pattern");
}

OptResult opt_social_cost(std::span<const Point> agents, const Norm& norm, std::size_t budget) {
  const Mapped m = map_agents(agents, norm);
  std::vector<Point> distinct;
  if (count_distinct(agents, &distinct) == 1) {
    return finish(Objective::social_cost, agents, norm, m, norm.to_canonical(distinct.front().coords()), "exact");
  }
  if (norm.p() == 2.0) return weiszfeld_median(agents, norm, budget);
  if (norm.p() == 1.0) {
    // Separable in the mapped coordinates: any coordinate-wise median is optimal.
    std::vector<double> y(m.d);
    std::vector<double> column(m.n);
    for (std::size_t k = 0; k < m.d; ++k) {
      for (std::size_t i = 0; i < m.n; ++i) column[i] = m.at(i)[k];
      std::sort(column.begin(), column.end());
      y[k] = column[(m.n - 1) / 2];
    }
    return finish(Objective::social_cost, agents, norm, m, y, "coordinate-median");
  }
  if (std::isinf(norm.p()) && m.d == 2) {
    // ||v||_inf = (|v0 + v1| + |v0 - v1|) / 2: an L1 problem after a 45 degree turn.
    std::vector<double> u(m.n), w(m.n);
    for (std::size_t i = 0; i < m.n; ++i) {
      u[i] = m.at(i)[0] + m.at(i)[1];
      w[i] = m.at(i)[0] - m.at(i)[1];
    }
    std::sort(u.begin(), u.end());
    std::sort(w.begin(), w.end());
    const double mu = u[(m.n - 1) / 2], mw = w[(m.n - 1) / 2];
    const std::vector<double> y{(mu + mw) / 2.0, (mu - mw) / 2.0};
    return finish(Objective::social_cost, agents, norm, m, y, "rotated-median");
  }
  // Data points can be optimal exactly; the certificate recognizes them.
  OptResult best = grid_minimize(Objective::social_cost, agents, norm, budget);
  for (const Point& x : distinct) {
    OptResult at = finish(Objective::social_cost, agents, norm, m, norm.to_canonical(x.coords()), "data-point");
    if (at.certified_gap < best.certified_gap && at.value <= best.value + best.certified_gap) best = std::move(at);
  }
  return best;
}

OptResult opt_max_cost(std::span<const Point> agents, const Norm& norm, std::size_t budget) {
  const Mapped m = map_agents(agents, norm);
  std::vector<Point> distinct;
  const std::size_t k = count_distinct(agents, &distinct);
  if (k == 1) return finish(Objective::max_cost, agents, norm, m, norm.to_canonical(distinct.front().coords()), "exact");
  if (k == 2) {
    // The midpoint sits at half the diameter from both points under any norm.
    const Point mid = lerp(distinct[0], distinct[1], 0.5);
    return finish(Objective::max_cost, agents, norm, m, norm.to_canonical(mid.coords()), "two-point");
  }
  return grid_minimize(Objective::max_cost, agents, norm, budget);
}

OptResult optimum(Objective obj, std::span<const Point> agents, const Norm& norm, std::size_t budget) {
  return obj == Objective::max_cost ? opt_max_cost(agents, norm, budget) : opt_social_cost(agents, norm, budget);
}

RatioResult ratio_from(double mechanism_cost, OptResult opt) {
  const double value = opt.value;
  const double gap = opt.certified_gap;
  RatioResult r{mechanism_cost, std::move(opt)};
  if (value <= 0.0) {
    r.unbounded = mechanism_cost > 0.0;
    r.ratio = r.lo = r.hi = r.unbounded ? std::numeric_limits<double>::infinity() : 1.0;
  } else {
    r.ratio = mechanism_cost / value;
    r.lo = mechanism_cost / (value + gap);
    r.hi = value - gap > 0.0 ? mechanism_cost / (value - gap) : std::numeric_limits<double>::infinity();
  }
  return r;
}

RatioResult approx_ratio(const Mechanism& mech, const Profile& profile, const Norm& norm, Objective obj,
                         std::size_t budget) {
  const Lottery out = mech(profile, norm);
  return ratio_from(cost(obj, out, profile, norm), optimum(obj, profile.points(), norm, budget));
}

}  // namespace facloc
