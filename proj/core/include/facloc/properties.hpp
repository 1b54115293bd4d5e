#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "facloc/geometry.hpp"
#include "facloc/mechanisms.hpp"

namespace facloc {

enum class VerdictStatus { passed, failed, inconclusive };

std::string to_string(VerdictStatus s);

/// passed when margin >= -kGeomTol, failed below -kStrictMargin, otherwise
/// inconclusive: float noise and genuine strict inequalities are kept apart.
VerdictStatus classify_margin(double margin) noexcept;

struct AgentDelta {
  std::size_t agent;  // 0-based
  double cost_before;
  double cost_after;

  friend bool operator==(const AgentDelta&, const AgentDelta&) = default;
};

/// A replayable record of a violation or extremal case. Agent indices are
/// 0-based here and printed 1-based in reports.
struct Witness {
  std::string kind;
  Profile profile;
  std::vector<std::size_t> coalition;
  std::vector<Point> misreports;
  std::vector<AgentDelta> per_agent_delta;
  std::optional<Point> shift;
  std::string note;

  friend bool operator==(const Witness&, const Witness&) = default;
};

struct PropertyVerdict {
  std::string property;
  VerdictStatus status = VerdictStatus::passed;
  double margin = 0.0;  // worst slack observed; negative means violated
  std::optional<Witness> witness;
  std::optional<std::pair<std::size_t, std::size_t>> pair;  // segment endpoints, 0-based
  std::vector<std::string> flags;

  bool passed() const noexcept { return status == VerdictStatus::passed; }
  bool failed() const noexcept { return status == VerdictStatus::failed; }
};

/// Keeps the verdict with the smallest margin; ties keep the earliest.
PropertyVerdict merge_worst(std::string property, std::span<const PropertyVerdict> verdicts);

PropertyVerdict check_strategyproof_at(const Mechanism& mech, const Profile& profile, std::size_t agent,
                                       const Point& misreport, const Norm& norm);

/// Violated iff every coalition member strictly gains.
PropertyVerdict check_group_strategyproof_at(const Mechanism& mech, const Profile& profile,
                                             std::span<const std::size_t> coalition,
                                             std::span<const Point> misreports, const Norm& norm);

PropertyVerdict check_unanimity(const Mechanism& mech, const Norm& norm, std::span<const Point> samples,
                                std::size_t n);

PropertyVerdict check_translation_invariance(const Mechanism& mech, const Norm& norm,
                                             std::span<const Profile> profiles, std::span<const Point> shifts);

/// Moves every nonempty agent subset onto a deterministic output and checks
/// that the output stays put. Skipped (passed, flagged) for randomized outputs.
PropertyVerdict check_uncompromising(const Mechanism& mech, const Profile& profile, const Norm& norm);

/// |mu(x_i) - mu(x')| <= ||x_i - x'|| where mu(x) is the expected distance from
/// x to the output when agent i reports x.
PropertyVerdict check_cost_continuity(const Mechanism& mech, const Profile& profile, std::size_t agent,
                                      std::span<const Point> perturbations, const Norm& norm);

PropertyVerdict check_support_segment(const Mechanism& mech, const Profile& profile, const Norm& norm);

/// One fixed agent pair whose segment carries every sampled output.
PropertyVerdict check_2dictatorship(const Mechanism& mech, std::span<const Profile> profiles, const Norm& norm);

/// Two-agent diagnostic: ||f(x1, x2') - x1|| <= delta / (1 - ||x2' - x2|| / ||x2 - x1||).
PropertyVerdict check_delta_bound(const Mechanism& mech, const Point& x1, const Point& x2, const Point& x2_moved,
                                  const Norm& norm);

/// Discrepancy between two lotteries: atoms paired greedily by nearest
/// partner when supports have equal size, otherwise Hausdorff distance of
/// supports combined with centroid shift.
double lottery_discrepancy(const Lottery& a, const Lottery& b);

}  // namespace facloc
