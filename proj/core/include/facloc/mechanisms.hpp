#pragma once

#include <cstddef>
#include <functional>
#include <string>

#include "facloc/geometry.hpp"

namespace facloc {

/// Parsed mechanism identifier. String forms: `dictator:<i>` (1-based),
/// `rand_med`, `rand_center`, `sep2d:a=<real>`, `coord_median`.
struct MechanismSpec {
  enum class Kind { dictator, rand_med, rand_center, separate_2dictator, coordinate_median };

  Kind kind = Kind::rand_med;
  std::size_t dictator = 1;  // 1-based agent index
  double a = 0.0;            // threshold on the first coordinate for sep2d

  static MechanismSpec make_dictator(std::size_t agent);
  static MechanismSpec make_rand_med() { return {Kind::rand_med}; }
  static MechanismSpec make_rand_center() { return {Kind::rand_center}; }
  static MechanismSpec make_separate_2dictator(double a);
  static MechanismSpec make_coordinate_median() { return {Kind::coordinate_median}; }

  static MechanismSpec parse(const std::string& text);
  std::string to_string() const;
  std::size_t min_agents() const noexcept;

  friend bool operator==(const MechanismSpec&, const MechanismSpec&) = default;
};

Lottery apply_dictator(const Profile& profile, std::size_t agent);
Lottery apply_rand_med(const Profile& profile);
Lottery apply_rand_center(const Profile& profile);
Lottery apply_separate_2dictator(const Profile& profile, const Norm& norm, double a);
/// Lower median per coordinate. Accepts a single agent.
Lottery apply_coordinate_median(std::span<const Point> points);
inline Lottery apply_coordinate_median(const Profile& profile) {
  return apply_coordinate_median(profile.points());
}

/// Every mechanism takes the norm; only sep2d reads it.
Lottery apply(const MechanismSpec& spec, const Profile& profile, const Norm& norm);

/// Type-erased mechanism: what the property checkers and searches consume.
/// Built-in specs and ad-hoc test fixtures share this interface.
class Mechanism {
 public:
  using Fn = std::function<Lottery(const Profile&, const Norm&)>;

  Mechanism(MechanismSpec spec);  // NOLINT: implicit on purpose
  Mechanism(std::string name, Fn fn, std::size_t min_agents = 2);

  const std::string& name() const noexcept { return name_; }
  std::size_t min_agents() const noexcept { return min_agents_; }
  const std::optional<MechanismSpec>& spec() const noexcept { return spec_; }

  Lottery operator()(const Profile& profile, const Norm& norm) const;

 private:
  std::string name_;
  Fn fn_;
  std::size_t min_agents_;
  std::optional<MechanismSpec> spec_;
};

}  // namespace facloc
