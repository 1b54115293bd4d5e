#include "facloc/mechanisms.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>

namespace facloc {

MechanismSpec MechanismSpec::make_dictator(std::size_t agent) {
  if (agent == 0) throw DomainError("dictator index is 1-based");
  MechanismSpec s{Kind::dictator};
  s.dictator = agent;
  return s;
}

MechanismSpec MechanismSpec::make_separate_2dictator(double a) {
  if (!std::isfinite(a)) throw DomainError("sep2d: threshold must be finite");
  MechanismSpec s{Kind::separate_2dictator};
  s.a = a;
  return s;
}

MechanismSpec MechanismSpec::parse(const std::string& text) {
  if (text == "rand_med") return make_rand_med();
  if (text == "rand_center") return make_rand_center();
  if (text == "coord_median") return make_coordinate_median();
  if (text.rfind("dictator:", 0) == 0) {
    const std::string idx = text.substr(9);
    if (idx.empty() || !std::all_of(idx.begin(), idx.end(), [](char c) { return c >= '0' && c <= '9'; })) {
      throw DomainError("mechanism '" + text + "': dictator index must be a positive integer");
    }
    return make_dictator(std::stoul(idx));
  }
  if (text.rfind("sep2d:a=", 0) == 0) {
    const std::string val = text.substr(8);
    std::size_t used = 0;
    double a = 0.0;
    try {
      a = std::stod(val, &used);
    } catch (const std::exception&) {
      used = 0;
    }
    if (val.empty() || used != val.size()) throw DomainError("mechanism '" + text + "': bad threshold");
    return make_separate_2dictator(a);
  }
  throw DomainError("unknown mechanism '" + text +
                    "' (expected dictator:<i>, rand_med, rand_center, sep2d:a=<x>, coord_median)");
}

std::string MechanismSpec::to_string() const {
  switch (kind) {
    case Kind::dictator: return "dictator:" + std::to_string(dictator);
    case Kind::rand_med: return "rand_med";
    case Kind::rand_center: return "rand_center";
    case Kind::separate_2dictator: {
      char buf[48];
      std::snprintf(buf, sizeof buf, "sep2d:a=%.17g", a);
      return buf;
    }
    case Kind::coordinate_median: return "coord_median";
  }
  return "?";
}

std::size_t MechanismSpec::min_agents() const noexcept {
  switch (kind) {
    case Kind::dictator: return std::max<std::size_t>(2, dictator);
    case Kind::separate_2dictator: return 3;
    default: return 2;
  }
}

Lottery apply_dictator(const Profile& profile, std::size_t agent) {
  if (agent == 0 || agent > profile.size()) {
    throw DomainError("dictator:" + std::to_string(agent) + " needs at least " + std::to_string(agent) +
                      " agents, profile has " + std::to_string(profile.size()));
  }
  return Lottery::degenerate(profile[agent - 1]);
}

Lottery apply_rand_med(const Profile& profile) {
  const Point& x1 = profile[0];
  const Point& x2 = profile[1];
  return Lottery({{0.25, x1}, {0.25, x2}, {0.5, lerp(x1, x2, 0.5)}});
}

Lottery apply_rand_center(const Profile& profile) {
  const double n = static_cast<double>(profile.size());
  std::vector<Atom> atoms;
  atoms.reserve(profile.size() + 1);
  atoms.push_back({0.5, mean(profile.points())});
  for (const Point& x : profile.points()) atoms.push_back({1.0 / (2.0 * n), x});
  return Lottery(std::move(atoms));
}

Lottery apply_separate_2dictator(const Profile& profile, const Norm& norm, double a) {
  if (profile.size() < 3) {
    throw DomainError("sep2d needs at least 3 agents, profile has " + std::to_string(profile.size()));
  }
  const Point& x1 = profile[0];
  // Coordinate 0 of the raw report, independent of any norm transform.
  const double r = x1[0];
  const Point& partner = r >= a ? profile[1] : profile[2];
  const double target = std::min(std::abs(r - a), norm.distance(x1, partner));
  const Point y = point_on_segment_at_distance(x1, partner, target, norm);
  return Lottery({{2.0 / 3.0, x1}, {1.0 / 3.0, y}});
}

Lottery apply_coordinate_median(std::span<const Point> points) {
  if (points.empty()) throw DomainError("coord_median: no agents");
  const std::size_t d = points.front().dim();
  std::vector<double> med(d);
  std::vector<double> column(points.size());
  for (std::size_t k = 0; k < d; ++k) {
    for (std::size_t i = 0; i < points.size(); ++i) {
      if (points[i].dim() != d) throw DimensionError("coord_median: dimension mismatch");
      column[i] = points[i][k];
    }
    const auto lower = column.begin() + static_cast<std::ptrdiff_t>((points.size() - 1) / 2);
    std::nth_element(column.begin(), lower, column.end());
    med[k] = *lower;
  }
  return Lottery::degenerate(Point(std::move(med)));
}

Lottery apply(const MechanismSpec& spec, const Profile& profile, const Norm& norm) {
  if (norm.dim() && *norm.dim() != profile.dim()) {
    throw DimensionError("mechanism: norm dimension does not match the profile");
  }
  switch (spec.kind) {
    case MechanismSpec::Kind::dictator: return apply_dictator(profile, spec.dictator);
    case MechanismSpec::Kind::rand_med: return apply_rand_med(profile);
    case MechanismSpec::Kind::rand_center: return apply_rand_center(profile);
    case MechanismSpec::Kind::separate_2dictator: return apply_separate_2dictator(profile, norm, spec.a);
    case MechanismSpec::Kind::coordinate_median: return apply_coordinate_median(profile);
  }
  throw DomainError("mechanism: unknown kind");
}

Mechanism::Mechanism(MechanismSpec spec)
    : name_(spec.to_string()),
      fn_([spec](const Profile& p, const Norm& n) { return apply(spec, p, n); }),
      min_agents_(spec.min_agents()),
      spec_(spec) {}

Mechanism::Mechanism(std::string name, Fn fn, std::size_t min_agents)
    : name_(std::move(name)), fn_(std::move(fn)), min_agents_(min_agents) {}

Lottery Mechanism::operator()(const Profile& profile, const Norm& norm) const {
  if (profile.size() < min_agents_) {
    throw DomainError(name_ + " needs at least " + std::to_string(min_agents_) + " agents");
  }
  return fn_(profile, norm);
}

}  // namespace facloc
