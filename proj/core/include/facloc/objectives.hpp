#pragma once

#include <cstddef>
#include <span>
#include <string>

#include "facloc/geometry.hpp"
#include "facloc/mechanisms.hpp"

namespace facloc {

enum class Objective { max_cost, social_cost };

std::string to_string(Objective obj);
/// Accepts `mc`, `sc`, `max_cost`, `social_cost`.
Objective parse_objective(const std::string& text);

/// Deterministic objectives at a single facility location.
double max_cost_at(const Point& y, std::span<const Point> agents, const Norm& norm);
double social_cost_at(const Point& y, std::span<const Point> agents, const Norm& norm);

/// Expected maximum cost: sum_j w_j max_i ||x_i - y_j||.
double cost_mc(const Lottery& lot, const Profile& profile, const Norm& norm);
/// Expected social cost: sum_j w_j sum_i ||x_i - y_j||.
double cost_sc(const Lottery& lot, const Profile& profile, const Norm& norm);
double cost(Objective obj, const Lottery& lot, const Profile& profile, const Norm& norm);

/// A minimizer together with a certified bound on its suboptimality:
/// value - certified_gap <= true optimum <= value.
struct OptResult {
  Point point;
  double value = 0.0;
  double certified_gap = 0.0;
  bool converged = true;  // certified_gap <= 1e-6 (1 + value)
  std::string method;

  double lower_bound() const noexcept { return value - certified_gap > 0.0 ? value - certified_gap : 0.0; }
};

/// Gap target every optimizer aims for.
double gap_target(double value) noexcept;

/// Geometric median. Weiszfeld for p = 2 (any weights/transform), coordinate
/// medians for p = 1, grid refinement plus pattern search otherwise.
OptResult opt_social_cost(std::span<const Point> agents, const Norm& norm, std::size_t budget = 20000);
/// Minimax center. Exact for at most two distinct points; otherwise grid
/// refinement followed by epsilon-subgradient descent and pattern search.
OptResult opt_max_cost(std::span<const Point> agents, const Norm& norm, std::size_t budget = 20000);
OptResult optimum(Objective obj, std::span<const Point> agents, const Norm& norm,
                  std::size_t budget = 20000);

/// Weiszfeld iteration with the data-point optimality test. Requires p = 2.
OptResult weiszfeld_median(std::span<const Point> agents, const Norm& norm, std::size_t budget = 20000);
/// Coarse-to-fine grid over the (mapped) bounding box followed by pattern
/// search; usable for either objective and any norm.
OptResult grid_minimize(Objective obj, std::span<const Point> agents, const Norm& norm,
                        std::size_t budget = 20000);

/// Duality lower bounds on the optimum, built from subgradients at y.
double social_cost_lower_bound(std::span<const Point> agents, const Norm& norm, const Point& y);
double max_cost_lower_bound(std::span<const Point> agents, const Norm& norm, const Point& y);

struct RatioResult {
  double cost = 0.0;
  OptResult opt;
  double ratio = 1.0;  // cost / opt.value
  double lo = 1.0;     // cost / (value + gap)
  double hi = 1.0;     // cost / max(value - gap, 0)
  bool unbounded = false;
};

RatioResult ratio_from(double mechanism_cost, OptResult opt);
RatioResult approx_ratio(const Mechanism& mech, const Profile& profile, const Norm& norm, Objective obj,
                         std::size_t budget = 20000);

}  // namespace facloc
