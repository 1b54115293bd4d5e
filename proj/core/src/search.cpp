#include "facloc/search.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <functional>
#include <limits>
#include <thread>

#include "facloc/random.hpp"

namespace facloc {

namespace {

template <class F>
void parallel_for(std::size_t count, std::size_t workers, F&& body) {
  if (workers <= 1 || count <= 1) {
    for (std::size_t i = 0; i < count; ++i) body(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::vector<std::exception_ptr> errors(count);
  std::vector<std::thread> pool;
  const std::size_t threads = std::min(workers, count);
  pool.reserve(threads);
  for (std::size_t w = 0; w < threads; ++w) {
    pool.emplace_back([&] {
      for (std::size_t i = next++; i < count; i = next++) {
        try {
          body(i);
        } catch (...) {
          errors[i] = std::current_exception();
        }
      }
    });
  }
  for (auto& t : pool) t.join();
  for (auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
}

struct Box {
  std::vector<double> lo, hi;
  double diam = 1.0;

  Point clip(const Point& p) const {
    std::vector<double> c(p.coords().begin(), p.coords().end());
    for (std::size_t k = 0; k < c.size(); ++k) c[k] = std::clamp(c[k], lo[k], hi[k]);
    return Point(std::move(c));
  }
};

Box misreport_box(const Profile& profile, double bounding_scale) {
  const std::size_t d = profile.dim();
  Box b{std::vector<double>(d, std::numeric_limits<double>::infinity()),
        std::vector<double>(d, -std::numeric_limits<double>::infinity()), 0.0};
  for (const Point& x : profile.points()) {
    for (std::size_t k = 0; k < d; ++k) {
      b.lo[k] = std::min(b.lo[k], x[k]);
      b.hi[k] = std::max(b.hi[k], x[k]);
    }
  }
  for (std::size_t k = 0; k < d; ++k) b.diam = std::max(b.diam, b.hi[k] - b.lo[k]);
  if (b.diam == 0.0) b.diam = 1.0;
  for (std::size_t k = 0; k < d; ++k) {
    b.lo[k] -= bounding_scale * b.diam;
    b.hi[k] += bounding_scale * b.diam;
  }
  return b;
}

// Unit directions: all nonzero {-1,0,1}^d patterns for d <= 3, axes otherwise.
std::vector<Point> poll_directions(std::size_t d) {
  std::vector<Point> dirs;
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
      dirs.emplace_back(std::move(v));
    }
  } else {
    for (std::size_t k = 0; k < d; ++k) {
      dirs.push_back(Point::unit(d, k));
      dirs.push_back(Point::unit(d, k) * -1.0);
    }
  }
  return dirs;
}

Point gaussian(std::size_t d, CounterRng& rng) {
  std::vector<double> v(d);
  for (double& x : v) x = rng.normal();
  return Point(std::move(v));
}

void push_unique(std::vector<Profile>& out, Profile p) {
  if (std::find(out.begin(), out.end(), p) == out.end()) out.push_back(std::move(p));
}

// Shared candidate points around a profile and its output.
std::vector<Point> common_points(const Profile& profile, const Lottery& out) {
  std::vector<Point> c(profile.points().begin(), profile.points().end());
  c.push_back(mean(profile.points()));
  for (const Atom& a : out.atoms()) c.push_back(a.point);
  c.push_back(centroid(out));
  for (std::size_t i = 0; i < profile.size(); ++i) {
    for (std::size_t j = i + 1; j < profile.size(); ++j) c.push_back(lerp(profile[i], profile[j], 0.5));
  }
  return c;
}

std::vector<Point> near_support(const Lottery& out, double h, const std::vector<Point>& dirs) {
  std::vector<Point> c;
  for (const Atom& a : out.atoms()) {
    for (const Point& u : dirs) c.push_back(a.point + u * h);
  }
  return c;
}

// Gains of coalition members when they jointly report `lie`.
struct Evaluator {
  const Mechanism& mech;
  const Norm& norm;
  const Profile& profile;
  std::vector<std::size_t> coalition;
  std::vector<double> before;
  std::size_t evaluations = 0;

  Evaluator(const Mechanism& m, const Norm& nrm, const Profile& p, std::vector<std::size_t> s)
      : mech(m), norm(nrm), profile(p), coalition(std::move(s)) {
    const Lottery truth = mech(profile, norm);
    for (std::size_t i : coalition) before.push_back(expected_distance(profile[i], truth, norm));
  }

  double min_gain(const std::vector<Point>& lie) {
    std::vector<Point> reports(profile.points().begin(), profile.points().end());
    for (std::size_t s = 0; s < coalition.size(); ++s) reports[coalition[s]] = lie[s];
    const Lottery out = mech(Profile(std::move(reports)), norm);
    ++evaluations;
    double g = std::numeric_limits<double>::infinity();
    for (std::size_t s = 0; s < coalition.size(); ++s) {
      g = std::min(g, before[s] - expected_distance(profile[coalition[s]], out, norm));
    }
    return g;
  }
};

// Pattern search maximizing the minimum member gain. Moves are single-member
// axis/diagonal steps or the whole coalition stepping together.
void refine_joint(Evaluator& ev, const Box& box, std::vector<Point>& lie, double& gain, std::size_t rounds) {
  const std::size_t d = ev.profile.dim();
  const std::vector<Point> dirs = poll_directions(d);
  double step = box.diam / 4.0;
  const double min_step = 1e-7 * box.diam;
  for (std::size_t r = 0; r < rounds && step >= min_step; ++r) {
    double best = gain;
    std::vector<Point> arg;
    auto poll = [&](std::vector<Point> trial) {
      const double g = ev.min_gain(trial);
      if (g > best) {
        best = g;
        arg = std::move(trial);
      }
    };
    for (std::size_t s = 0; s < lie.size(); ++s) {
      for (const Point& u : dirs) {
        std::vector<Point> trial = lie;
        trial[s] = box.clip(trial[s] + u * step);
        poll(std::move(trial));
      }
    }
    if (lie.size() > 1) {
      for (const Point& u : dirs) {
        std::vector<Point> trial;
        for (const Point& p : lie) trial.push_back(box.clip(p + u * step));
        poll(std::move(trial));
      }
    }
    if (!arg.empty()) {
      lie = std::move(arg);
      gain = best;
    } else {
      step *= 0.5;
    }
  }
}

std::vector<std::vector<Point>> joint_candidates(const Profile& profile, const std::vector<std::size_t>& coalition,
                                                 const Lottery& out, const std::optional<Point>& median,
                                                 const Box& box, unsigned kinds, CounterRng& rng) {
  const std::size_t d = profile.dim();
  const std::size_t m = coalition.size();
  std::vector<std::vector<Point>> out_c;
  std::vector<Point> members;
  for (std::size_t i : coalition) members.push_back(profile[i]);
  const Point member_mean = mean(members);
  const double diam = box.diam;
  auto all_at = [&](const Point& c) { out_c.emplace_back(m, box.clip(c)); };

  if (kinds & kCommonPoint) {
    for (const Point& c : common_points(profile, out)) all_at(c);
    all_at(member_mean);
    if (median) all_at(*median);
  }
  if (kinds & kSegmentPoints) {
    std::vector<Point> targets{member_mean, centroid(out)};
    for (std::size_t j = 0; j < profile.size(); ++j) {
      if (std::find(coalition.begin(), coalition.end(), j) == coalition.end()) targets.push_back(profile[j]);
    }
    for (const Point& c : targets) {
      for (double t : {-1.0, -0.5, 0.25, 0.5, 0.75, 1.5, 2.0}) {
        std::vector<Point> lie;
        for (const Point& x : members) lie.push_back(box.clip(lerp(x, c, t)));
        out_c.push_back(std::move(lie));
      }
    }
  }
  if (kinds & kAxisSteps) {
    for (std::size_t k = 0; k < d; ++k) {
      for (double s : {1e-3, 1e-2, 0.1, 0.5, 1.0}) {
        for (double sgn : {1.0, -1.0}) {
          const Point v = Point::unit(d, k) * (sgn * s * diam);
          std::vector<Point> lie;
          for (const Point& x : members) lie.push_back(box.clip(x + v));
          out_c.push_back(std::move(lie));
          if (m > 1) {
            for (std::size_t a = 0; a < m; ++a) {
              std::vector<Point> solo = members;
              solo[a] = box.clip(members[a] + v);
              out_c.push_back(std::move(solo));
            }
          }
        }
      }
    }
  }
  if (kinds & kGaussianJitter) {
    for (double sigma : {0.02, 0.1, 0.5}) {
      for (int rep = 0; rep < 4; ++rep) {
        const Point shared = gaussian(d, rng) * (sigma * diam);
        std::vector<Point> together, apart;
        for (const Point& x : members) {
          together.push_back(box.clip(x + shared));
          apart.push_back(box.clip(x + gaussian(d, rng) * (sigma * diam)));
        }
        out_c.push_back(std::move(together));
        out_c.push_back(std::move(apart));
      }
    }
  }
  if (kinds & kGridNearSupport) {
    const auto dirs = poll_directions(d);
    for (const Point& c : near_support(out, diam / 8.0, dirs)) all_at(c);
  }
  return out_c;
}

std::vector<std::vector<std::size_t>> coalitions_up_to(std::size_t n, std::size_t max_size) {
  std::vector<std::vector<std::size_t>> out;
  std::vector<std::size_t> cur;
  for (std::size_t size = 1; size <= std::min(n, max_size); ++size) {
    std::function<void(std::size_t)> rec = [&](std::size_t start) {
      if (cur.size() == size) {
        out.push_back(cur);
        return;
      }
      for (std::size_t j = start; j < n; ++j) {
        cur.push_back(j);
        rec(j + 1);
        cur.pop_back();
      }
    };
    rec(0);
  }
  return out;
}

struct ProfileOutcome {
  std::optional<Witness> witness;
  double best_gain = -std::numeric_limits<double>::infinity();
  std::size_t evaluations = 0;
};

ProfileOutcome attack_profile(const Mechanism& mech, const Norm& norm, const Profile& profile,
                              const std::vector<std::vector<std::size_t>>& coalitions, const SearchConfig& config,
                              CounterRng rng) {
  ProfileOutcome po;
  const Box box = misreport_box(profile, config.bounding_scale);
  const Lottery out = mech(profile, norm);
  std::optional<Point> median;
  if ((config.candidate_kinds & kCommonPoint) && coalitions.size() > 1) {
    median = opt_social_cost(profile.points(), norm, 2000).point;
  }
  for (const auto& coalition : coalitions) {
    Evaluator ev(mech, norm, profile, coalition);
    auto cands = joint_candidates(profile, coalition, out, median, box, config.candidate_kinds, rng);
    double best = -std::numeric_limits<double>::infinity();
    std::vector<Point> arg;
    for (auto& c : cands) {
      const double g = ev.min_gain(c);
      if (g > best) {
        best = g;
        arg = std::move(c);
      }
    }
    if (arg.empty()) continue;
    refine_joint(ev, box, arg, best, config.local_steps);
    po.evaluations += ev.evaluations;
    po.best_gain = std::max(po.best_gain, best);
    if (best > kStrictMargin) {
      PropertyVerdict v = check_group_strategyproof_at(mech, profile, coalition, arg, norm);
      if (v.failed() && v.witness) {
        po.witness = std::move(v.witness);
        if (coalition.size() == 1) po.witness->kind = "sp";
        return po;
      }
    }
  }
  return po;
}

ViolationSearchResult run_violation_search(const Mechanism& mech, const Norm& norm, std::size_t n, std::size_t d,
                                           const SearchConfig& config, std::size_t max_coalition,
                                           const std::vector<Profile>& extra, const char* property) {
  if (config.restarts < 1) throw DomainError("search: restarts must be at least 1");
  if (n < mech.min_agents()) throw DomainError(mech.name() + " needs at least " + std::to_string(mech.min_agents()) + " agents");
  std::vector<Profile> fixed = extra;
  for (Profile& p : structured_profiles(n, d)) push_unique(fixed, std::move(p));
  const auto coalitions = coalitions_up_to(n, max_coalition);
  const std::size_t total = fixed.size() + config.restarts;
  const CounterRng root(config.rng_seed, 0xA77AC);

  ViolationSearchResult result;
  const std::size_t batch = std::max<std::size_t>(1, config.workers) * 4;
  for (std::size_t start = 0; start < total; start += batch) {
    const std::size_t count = std::min(batch, total - start);
    std::vector<ProfileOutcome> outcomes(count);
    parallel_for(count, config.workers, [&](std::size_t k) {
      const std::size_t idx = start + k;
      const Profile profile = idx < fixed.size() ? fixed[idx]
                                                 : random_profile(n, d, config.rng_seed, idx - fixed.size());
      outcomes[k] = attack_profile(mech, norm, profile, coalitions, config, root.split(idx));
    });
    for (auto& o : outcomes) {
      ++result.profiles_examined;
      result.evaluations += o.evaluations;
      result.best_gain = std::max(result.best_gain, o.best_gain);
      if (o.witness) {
        result.witness = std::move(o.witness);
        break;
      }
    }
    if (result.witness) break;
  }
  result.verdict.property = property;
  result.verdict.margin = -result.best_gain;
  result.verdict.status = result.witness ? VerdictStatus::failed
                                         : (result.best_gain > kGeomTol ? VerdictStatus::inconclusive
                                                                         : VerdictStatus::passed);
  result.verdict.witness = result.witness;
  if (!norm.strictly_convex()) result.verdict.flags.push_back("norm not strictly convex");
  if (d == 1) result.verdict.flags.push_back("d = 1: multi-dimensional characterizations do not apply");
  return result;
}

double ratio_value(const RatioResult& r) { return r.unbounded ? std::numeric_limits<double>::infinity() : r.ratio; }

}  // namespace

std::vector<Profile> structured_profiles(std::size_t n, std::size_t d) {
  if (n < 2 || d < 1) throw DomainError("structured_profiles: need n >= 2 and d >= 1");
  const Point origin = Point::zero(d);
  const Point e0 = Point::unit(d, 0);
  std::vector<Profile> base;
  for (std::size_t i = 0; i < n; ++i) {
    std::vector<Point> pts(n, e0);
    pts[i] = origin;
    push_unique(base, Profile(std::move(pts)));
  }
  for (std::size_t k = 2; k + 1 < n; ++k) {
    std::vector<Point> head(n, e0), tail(n, e0);
    for (std::size_t i = 0; i < k; ++i) {
      head[i] = origin;
      tail[n - 1 - i] = origin;
    }
    push_unique(base, Profile(std::move(head)));
    push_unique(base, Profile(std::move(tail)));
  }
  {
    std::vector<Point> line;
    for (std::size_t i = 0; i < n; ++i) line.push_back(e0 * (static_cast<double>(i) / static_cast<double>(n - 1)));
    push_unique(base, Profile(std::move(line)));
  }
  {
    std::vector<Point> simplex;
    for (std::size_t i = 0; i < n; ++i) {
      const std::size_t v = i % (d + 1);
      simplex.push_back(v == 0 ? origin : Point::unit(d, v - 1));
    }
    push_unique(base, Profile(std::move(simplex)));
  }
  if (d >= 2) {
    std::vector<Point> ring;
    for (std::size_t i = 0; i < n; ++i) {
      const double t = 2.0 * 3.14159265358979323846 * static_cast<double>(i) / static_cast<double>(n);
      ring.push_back(origin.with(0, std::cos(t)).with(1, std::sin(t)));
    }
    push_unique(base, Profile(std::move(ring)));
  }
  if (d == 3 && n == 5) {
    push_unique(base, Profile({{1, 0, 0}, {0, 1, 0}, {0, 0, 1}, {1, 1, 1}, {1, 1, 1}}));
  }
  push_unique(base, Profile(std::vector<Point>(n, e0)));

  // Shifted copies put agent 1 on either side of coordinate-0 thresholds.
  Point shift = origin.with(0, -0.5);
  if (d >= 2) shift = shift.with(1, 0.3);
  std::vector<Profile> out = base;
  for (const Profile& p : base) push_unique(out, p.shifted(shift));
  return out;
}

Profile random_profile(std::size_t n, std::size_t d, std::uint64_t seed, std::uint64_t index) {
  CounterRng rng(seed, 0x9E0F11E + index);
  std::vector<Point> pts;
  pts.reserve(n);
  auto uniform_point = [&](double r) {
    std::vector<double> c(d);
    for (double& v : c) v = rng.uniform(-r, r);
    return Point(std::move(c));
  };
  switch (index % 4) {
    case 0:
      for (std::size_t i = 0; i < n; ++i) pts.push_back(uniform_point(1.0));
      break;
    case 1: {
      std::vector<Point> centers;
      const std::size_t m = 1 + rng.below(3);
      for (std::size_t c = 0; c < m; ++c) centers.push_back(uniform_point(1.0));
      for (std::size_t i = 0; i < n; ++i) {
        Point p = centers[rng.below(m)];
        if (rng.uniform() < 0.5) p = p + uniform_point(0.05);
        pts.push_back(std::move(p));
      }
      break;
    }
    case 2: {
      const Point base = uniform_point(1.0);
      const Point dir = uniform_point(1.0);
      for (std::size_t i = 0; i < n; ++i) pts.push_back(base + dir * rng.uniform(-1.0, 1.0));
      break;
    }
    default:
      for (std::size_t i = 0; i < n; ++i) {
        std::vector<double> c(d);
        for (double& v : c) v = 0.5 * (static_cast<double>(rng.below(5)) - 2.0);
        pts.emplace_back(std::move(c));
      }
      break;
  }
  return Profile(std::move(pts));
}

ViolationSearchResult search_sp_violation(const Mechanism& mech, const Norm& norm, std::size_t n, std::size_t d,
                                          const SearchConfig& config) {
  return run_violation_search(mech, norm, n, d, config, 1, {}, "strategyproofness");
}

ViolationSearchResult search_gsp_violation(const Mechanism& mech, const Norm& norm, std::size_t n,
                                           std::size_t d, const SearchConfig& config,
                                           const std::vector<Profile>& extra_profiles) {
  if (config.coalition_max_size < 1) throw DomainError("search: coalition_max_size must be at least 1");
  return run_violation_search(mech, norm, n, d, config, config.coalition_max_size, extra_profiles,
                              "group_strategyproofness");
}

WorstRatioResult search_worst_ratio(const Mechanism& mech, const Norm& norm, Objective obj, std::size_t n,
                                    std::size_t d, const SearchConfig& config) {
  if (config.restarts < 1) throw DomainError("search: restarts must be at least 1");
  if (n < mech.min_agents()) throw DomainError(mech.name() + " needs at least " + std::to_string(mech.min_agents()) + " agents");
  const std::vector<Profile> fixed = structured_profiles(n, d);
  std::size_t restarts = config.restarts;
  const std::size_t per_restart = 1 + config.local_steps;
  if (config.max_evaluations > 0) {
    const std::size_t room = config.max_evaluations > fixed.size() ? config.max_evaluations - fixed.size() : 0;
    restarts = std::min(restarts, room / per_restart);
  }
  auto evaluate = [&](const Profile& p) { return approx_ratio(mech, p, norm, obj, config.opt_budget); };

  struct Slot {
    std::optional<Profile> profile;
    std::optional<RatioResult> ratio;
    std::size_t evaluations = 0;
  };
  const std::size_t total = fixed.size() + restarts;
  std::vector<Slot> slots(total);
  const auto dirs = poll_directions(d);
  parallel_for(total, config.workers, [&](std::size_t idx) {
    Slot& slot = slots[idx];
    if (idx < fixed.size()) {
      slot.profile = fixed[idx];
      slot.ratio = evaluate(fixed[idx]);
      slot.evaluations = 1;
      return;
    }
    Profile p = random_profile(n, d, config.rng_seed, idx - fixed.size());
    RatioResult best = evaluate(p);
    std::size_t evals = 1;
    const Box box = misreport_box(p, 0.0);
    double step = box.diam / 4.0;
    while (evals < per_restart && step >= 1e-7 * box.diam) {
      bool improved = false;
      for (std::size_t i = 0; i < n && !improved && evals < per_restart; ++i) {
        for (const Point& u : dirs) {
          if (evals >= per_restart) break;
          Profile trial = p.with(i, p[i] + u * step);
          RatioResult r = evaluate(trial);
          ++evals;
          if (ratio_value(r) > ratio_value(best) + 1e-12) {
            best = std::move(r);
            p = std::move(trial);
            improved = true;
            break;
          }
        }
      }
      if (!improved) step *= 0.5;
    }
    slot.profile = std::move(p);
    slot.ratio = std::move(best);
    slot.evaluations = evals;
  });

  std::size_t arg = 0;
  std::size_t evaluations = 0;
  for (std::size_t i = 0; i < total; ++i) {
    evaluations += slots[i].evaluations;
    if (ratio_value(*slots[i].ratio) > ratio_value(*slots[arg].ratio)) arg = i;
  }
  const std::string origin = arg < fixed.size() ? "structured:" + std::to_string(arg)
                                                : "random:" + std::to_string(arg - fixed.size());
  return WorstRatioResult{std::move(*slots[arg].profile), std::move(*slots[arg].ratio), evaluations, origin};
}

}  // namespace facloc
