#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "facloc/geometry.hpp"
#include "facloc/mechanisms.hpp"
#include "facloc/objectives.hpp"
#include "facloc/properties.hpp"

namespace facloc {

enum CandidateKind : unsigned {
  kCommonPoint = 1u << 0,
  kSegmentPoints = 1u << 1,
  kGaussianJitter = 1u << 2,
  kGridNearSupport = 1u << 3,
  kAxisSteps = 1u << 4,
  kAllCandidates = 0x1Fu,
};

struct SearchConfig {
  std::uint64_t rng_seed = 0;
  std::size_t restarts = 100;
  std::size_t local_steps = 40;
  std::size_t coalition_max_size = 3;
  unsigned candidate_kinds = kAllCandidates;
  /// Misreports stay within this multiple of the profile diameter around its box.
  double bounding_scale = 2.0;
  /// Threads for independent restarts; results never depend on it.
  std::size_t workers = 1;
  /// Cap on ratio evaluations in search_worst_ratio (0 = restarts decide).
  std::size_t max_evaluations = 0;
  /// Iteration budget handed to the optimum solvers.
  std::size_t opt_budget = 20000;
};

/// Deterministic families visited before any random profile: the clustered
/// profile (y1, y2, ..., y2) with every choice of isolated agent, two-cluster
/// splits, collinear, simplex vertices, and their threshold-crossing shifts.
std::vector<Profile> structured_profiles(std::size_t n, std::size_t d);

/// Random profile for restart `index` (uniform, clustered, collinear, lattice).
Profile random_profile(std::size_t n, std::size_t d, std::uint64_t seed, std::uint64_t index);

struct ViolationSearchResult {
  std::optional<Witness> witness;  // validated through the property checkers
  PropertyVerdict verdict;
  double best_gain = -1.0;         // largest min-member gain seen
  std::size_t profiles_examined = 0;
  std::size_t evaluations = 0;
};

ViolationSearchResult search_sp_violation(const Mechanism& mech, const Norm& norm, std::size_t n, std::size_t d,
                                          const SearchConfig& config);

ViolationSearchResult search_gsp_violation(const Mechanism& mech, const Norm& norm, std::size_t n,
                                           std::size_t d, const SearchConfig& config,
                                           const std::vector<Profile>& extra_profiles = {});

struct WorstRatioResult {
  Profile profile;
  RatioResult ratio;
  std::size_t evaluations = 0;
  std::string origin;  // "structured:<k>" or "random:<restart>"
};

WorstRatioResult search_worst_ratio(const Mechanism& mech, const Norm& norm, Objective obj, std::size_t n,
                                    std::size_t d, const SearchConfig& config);

}  // namespace facloc
