#include "facloc/properties.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace facloc {

std::string to_string(VerdictStatus s) {
  switch (s) {
    case VerdictStatus::passed: return "passed";
    case VerdictStatus::failed: return "failed";
    case VerdictStatus::inconclusive: return "inconclusive";
  }
  return "?";
}

VerdictStatus classify_margin(double margin) noexcept {
  if (margin >= -kGeomTol) return VerdictStatus::passed;
  if (margin < -kStrictMargin) return VerdictStatus::failed;
  return VerdictStatus::inconclusive;
}

namespace {

PropertyVerdict make_verdict(std::string property, double margin, std::optional<Witness> witness) {
  PropertyVerdict v;
  v.property = std::move(property);
  v.margin = margin;
  v.status = classify_margin(margin);
  if (v.failed()) v.witness = std::move(witness);
  return v;
}

void flag_norm(PropertyVerdict& v, const Norm& norm) {
  if (!norm.strictly_convex()) v.flags.push_back("norm not strictly convex");
}

void flag_dim(PropertyVerdict& v, std::size_t d) {
  if (d == 1) v.flags.push_back("d = 1: multi-dimensional characterizations do not apply");
}

}  // namespace

PropertyVerdict merge_worst(std::string property, std::span<const PropertyVerdict> verdicts) {
  PropertyVerdict out;
  out.property = std::move(property);
  out.margin = std::numeric_limits<double>::infinity();
  for (const PropertyVerdict& v : verdicts) {
    if (v.margin < out.margin) {
      out.margin = v.margin;
      out.status = v.status;
      out.witness = v.witness;
      out.pair = v.pair;
    }
    for (const auto& f : v.flags) {
      if (std::find(out.flags.begin(), out.flags.end(), f) == out.flags.end()) out.flags.push_back(f);
    }
  }
  if (verdicts.empty()) out.margin = 0.0;
  out.status = classify_margin(out.margin);
  if (!out.failed()) out.witness.reset();
  return out;
}

double lottery_discrepancy(const Lottery& a, const Lottery& b) {
  if (a.size() == b.size()) {
    // Nearest unused partner, not index order: rounding can flip lexicographic ties.
    std::vector<bool> used(b.size(), false);
    double m = 0.0;
    for (const Atom& x : a.atoms()) {
      std::size_t best = 0;
      double nearest = std::numeric_limits<double>::infinity();
      for (std::size_t j = 0; j < b.size(); ++j) {
        const double dist = used[j] ? nearest : max_abs_diff(x.point, b.atoms()[j].point);
        if (!used[j] && dist < nearest) nearest = dist, best = j;
      }
      used[best] = true;
      m = std::max({m, nearest, std::abs(x.weight - b.atoms()[best].weight)});
    }
    return m;
  }
  auto directed = [](const Lottery& from, const Lottery& to) {
    double worst = 0.0;
    for (const Atom& x : from.atoms()) {
      double nearest = std::numeric_limits<double>::infinity();
      for (const Atom& y : to.atoms()) nearest = std::min(nearest, max_abs_diff(x.point, y.point));
      worst = std::max(worst, nearest);
    }
    return worst;
  };
  return std::max({directed(a, b), directed(b, a), max_abs_diff(centroid(a), centroid(b))});
}

PropertyVerdict check_strategyproof_at(const Mechanism& mech, const Profile& profile, std::size_t agent,
                                       const Point& misreport, const Norm& norm) {
  const std::size_t coalition[] = {agent};
  const Point misreports[] = {misreport};
  PropertyVerdict v = check_group_strategyproof_at(mech, profile, coalition, misreports, norm);
  v.property = "strategyproofness";
  if (v.witness) v.witness->kind = "sp";
  return v;
}

PropertyVerdict check_group_strategyproof_at(const Mechanism& mech, const Profile& profile,
                                             std::span<const std::size_t> coalition,
                                             std::span<const Point> misreports, const Norm& norm) {
  if (coalition.empty()) throw DomainError("coalition must be nonempty");
  if (coalition.size() != misreports.size()) throw DomainError("one misreport per coalition member");
  for (std::size_t i : coalition) {
    if (i >= profile.size()) throw DomainError("coalition member out of range");
  }
  const Lottery truth = mech(profile, norm);
  std::vector<Point> reports(profile.points().begin(), profile.points().end());
  for (std::size_t s = 0; s < coalition.size(); ++s) reports[coalition[s]] = misreports[s];
  const Lottery lie = mech(Profile(std::move(reports)), norm);

  Witness w{"gsp", profile, {coalition.begin(), coalition.end()}, {misreports.begin(), misreports.end()}, {}, {}, {}};
  double margin = -std::numeric_limits<double>::infinity();
  for (std::size_t i : coalition) {
    const double before = expected_distance(profile[i], truth, norm);
    const double after = expected_distance(profile[i], lie, norm);
    w.per_agent_delta.push_back({i, before, after});
    margin = std::max(margin, after - before);
  }
  PropertyVerdict v = make_verdict("group_strategyproofness", margin, std::move(w));
  flag_norm(v, norm);
  flag_dim(v, profile.dim());
  return v;
}

PropertyVerdict check_unanimity(const Mechanism& mech, const Norm& norm, std::span<const Point> samples,
                                std::size_t n) {
  double margin = 0.0;
  std::optional<Witness> worst;
  for (const Point& z : samples) {
    Profile all_z(std::vector<Point>(n, z));
    const double dev = expected_distance(z, mech(all_z, norm), norm);
    if (-dev < margin) {
      margin = -dev;
      worst = Witness{"unanimity", all_z, {}, {}, {}, {}, "output is not degenerate at the common report"};
    }
  }
  return make_verdict("unanimity", margin, std::move(worst));
}

PropertyVerdict check_translation_invariance(const Mechanism& mech, const Norm& norm,
                                             std::span<const Profile> profiles, std::span<const Point> shifts) {
  double margin = 0.0;
  std::optional<Witness> worst;
  for (const Profile& profile : profiles) {
    const Lottery base = mech(profile, norm);
    for (const Point& shift : shifts) {
      const Profile moved = profile.shifted(shift);
      const double gap = lottery_discrepancy(mech(moved, norm), base.shifted(shift));
      if (-gap < margin) {
        margin = -gap;
        worst = Witness{"translation", profile, {}, {}, {}, shift,
                        "f(x + a) = " + mech(moved, norm).to_string() + " but f(x) + a = " +
                            base.shifted(shift).to_string()};
      }
    }
  }
  return make_verdict("translation_invariance", margin, std::move(worst));
}

PropertyVerdict check_uncompromising(const Mechanism& mech, const Profile& profile, const Norm& norm) {
  const Lottery out = mech(profile, norm);
  if (!out.is_degenerate()) {
    PropertyVerdict v = make_verdict("uncompromising", 0.0, std::nullopt);
    v.flags.push_back("skipped: output not degenerate");
    return v;
  }
  const Point y = out.atoms().front().point;
  const std::size_t n = profile.size();
  if (n > 16) throw DomainError("check_uncompromising: subset enumeration limited to 16 agents");
  double margin = 0.0;
  std::optional<Witness> worst;
  for (std::uint32_t mask = 1; mask < (1u << n); ++mask) {
    std::vector<Point> pts(profile.points().begin(), profile.points().end());
    std::vector<std::size_t> moved;
    for (std::size_t i = 0; i < n; ++i) {
      if (mask & (1u << i)) {
        pts[i] = y;
        moved.push_back(i);
      }
    }
    const double dev = expected_distance(y, mech(Profile(pts), norm), norm);
    if (-dev < margin) {
      margin = -dev;
      worst = Witness{"uncompromising", profile, moved, std::vector<Point>(moved.size(), y), {}, {},
                      "output moved after agents relocated onto it"};
    }
  }
  return make_verdict("uncompromising", margin, std::move(worst));
}

PropertyVerdict check_cost_continuity(const Mechanism& mech, const Profile& profile, std::size_t agent,
                                      std::span<const Point> perturbations, const Norm& norm) {
  if (agent >= profile.size()) throw DomainError("agent out of range");
  const Point& xi = profile[agent];
  const double mu = expected_distance(xi, mech(profile, norm), norm);
  double margin = std::numeric_limits<double>::infinity();
  std::optional<Witness> worst;
  for (const Point& x : perturbations) {
    const double mu_x = expected_distance(x, mech(profile.with(agent, x), norm), norm);
    const double slack = norm.distance(xi, x) - std::abs(mu - mu_x);
    if (slack < margin) {
      margin = slack;
      worst = Witness{"cost_continuity", profile, {agent}, {x}, {{agent, mu, mu_x}}, {}, {}};
    }
  }
  if (perturbations.empty()) margin = 0.0;
  return make_verdict("cost_continuity", margin, std::move(worst));
}

PropertyVerdict check_support_segment(const Mechanism& mech, const Profile& profile, const Norm& norm) {
  const Lottery out = mech(profile, norm);
  PropertyVerdict v;
  if (out.is_degenerate()) {
    v = make_verdict("support_segment", 0.0, std::nullopt);
  } else {
    double best = std::numeric_limits<double>::infinity();
    std::pair<std::size_t, std::size_t> arg{0, 1};
    for (std::size_t i = 0; i < profile.size(); ++i) {
      for (std::size_t j = i + 1; j < profile.size(); ++j) {
        double excess = 0.0;
        for (const Atom& a : out.atoms()) excess = std::max(excess, segment_excess(profile[i], profile[j], a.point, norm));
        if (excess < best) best = excess, arg = {i, j};
      }
    }
    v = make_verdict("support_segment", -best,
                     Witness{"support_segment", profile, {}, {}, {}, {}, "support " + out.to_string()});
    if (v.passed()) v.pair = arg;
  }
  flag_norm(v, norm);
  return v;
}

PropertyVerdict check_2dictatorship(const Mechanism& mech, std::span<const Profile> profiles, const Norm& norm) {
  if (profiles.empty()) throw DomainError("check_2dictatorship: no profiles");
  const std::size_t n = profiles.front().size();
  std::vector<Lottery> outs;
  for (const Profile& p : profiles) {
    if (p.size() != n) throw DomainError("check_2dictatorship: profiles must share n");
    outs.push_back(mech(p, norm));
  }
  double best = std::numeric_limits<double>::infinity();
  std::pair<std::size_t, std::size_t> arg{0, 1};
  std::size_t worst_profile = 0;
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i + 1; j < n; ++j) {
      double excess = 0.0;
      std::size_t where = 0;
      for (std::size_t k = 0; k < profiles.size(); ++k) {
        for (const Atom& a : outs[k].atoms()) {
          const double e = segment_excess(profiles[k][i], profiles[k][j], a.point, norm);
          if (e > excess) excess = e, where = k;
        }
      }
      if (excess < best) best = excess, arg = {i, j}, worst_profile = where;
    }
  }
  PropertyVerdict v = make_verdict(
      "two_dictatorship", -best,
      Witness{"two_dictatorship", profiles[worst_profile], {}, {}, {}, {},
              "no fixed agent pair carries every output; closest pair leaves " + outs[worst_profile].to_string()});
  if (v.passed()) v.pair = arg;
  flag_norm(v, norm);
  return v;
}

PropertyVerdict check_delta_bound(const Mechanism& mech, const Point& x1, const Point& x2, const Point& x2_moved,
                                  const Norm& norm) {
  if (mech.min_agents() > 2) throw DomainError("check_delta_bound: needs a two-agent mechanism");
  const double span = norm.distance(x2, x1);
  const double shift = norm.distance(x2_moved, x2);
  if (!(shift < span)) throw DomainError("check_delta_bound: requires ||x2' - x2|| < ||x2 - x1||");
  const Profile before({x1, x2});
  const Profile after({x1, x2_moved});
  const double delta = expected_distance(x1, mech(before, norm), norm);
  const double bound = delta / (1.0 - shift / span);
  const double measured = expected_distance(x1, mech(after, norm), norm);
  return make_verdict("delta_bound", bound - measured,
                      Witness{"delta_bound", before, {1}, {x2_moved}, {{0, delta, measured}}, {}, {}});
}

}  // namespace facloc
