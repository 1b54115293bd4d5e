#pragma once

#include <compare>
#include <cstddef>
#include <cstdint>
#include <initializer_list>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace facloc {

// Tolerances shared by every module.
inline constexpr double kWeightTol = 1e-12;   // lottery weight normalization
inline constexpr double kGeomTol = 1e-9;      // geometric identities / pass slack
inline constexpr double kStrictMargin = 1e-6; // strict improvement in violation searches

struct DimensionError : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

struct DomainError : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

/// A location in d-dimensional real space. Coordinates are always finite.
class Point {
 public:
  explicit Point(std::vector<double> coords);
  Point(std::initializer_list<double> coords);

  static Point zero(std::size_t d);
  static Point unit(std::size_t d, std::size_t axis);

  std::size_t dim() const noexcept { return coords_.size(); }
  double operator[](std::size_t k) const { return coords_[k]; }
  std::span<const double> coords() const noexcept { return coords_; }

  Point operator+(const Point& rhs) const;
  Point operator-(const Point& rhs) const;
  Point operator*(double c) const;
  friend Point operator*(double c, const Point& p) { return p * c; }

  /// Copy with coordinate k replaced.
  Point with(std::size_t k, double value) const;

  friend bool operator==(const Point&, const Point&) = default;
  friend std::strong_ordering operator<=>(const Point& a, const Point& b);

  std::string to_string() const;

 private:
  struct Unchecked {};
  Point(Unchecked, std::vector<double> coords) : coords_(std::move(coords)) {}

  std::vector<double> coords_;
};

/// Convex combination (1-t)*a + t*b.
Point lerp(const Point& a, const Point& b, double t);

/// Unweighted mean of a nonempty point set.
Point mean(std::span<const Point> points);

/// Max absolute coordinate difference.
double max_abs_diff(const Point& a, const Point& b);

/// A p-norm, optionally evaluated as ||W A v||_p for positive diagonal
/// weights W and an invertible matrix A (row-major).
class Norm {
 public:
  static Norm lp(double p);
  static Norm weighted(double p, std::vector<double> weights);
  static Norm transformed(double p, std::vector<double> row_major, std::size_t d,
                          std::vector<double> weights = {});

  double p() const noexcept { return p_; }
  /// Dual exponent q with 1/p + 1/q = 1.
  double q() const noexcept;
  bool strictly_convex() const noexcept;
  bool has_weights() const noexcept { return !weights_.empty(); }
  bool has_transform() const noexcept { return !matrix_.empty(); }
  bool is_plain() const noexcept { return !has_weights() && !has_transform(); }
  /// Fixed dimension if weights or a transform were declared.
  std::optional<std::size_t> dim() const noexcept;

  double operator()(std::span<const double> v) const;
  double operator()(const Point& v) const { return (*this)(v.coords()); }
  double distance(const Point& a, const Point& b) const;

  /// Maps v to W A v. The norm is the plain p-norm in the mapped space.
  std::vector<double> to_canonical(std::span<const double> v) const;
  /// Inverse of to_canonical.
  std::vector<double> from_canonical(std::span<const double> z) const;

  /// Grammar: lp:<p>[;w=<w1,...>][;A=<row-major entries>]
  std::string to_string() const;
  static Norm parse(const std::string& text);

  const std::vector<double>& weights() const noexcept { return weights_; }
  const std::vector<double>& matrix() const noexcept { return matrix_; }

 private:
  Norm() = default;
  void check_dim(std::size_t d) const;

  double p_ = 2.0;
  std::size_t dim_ = 0;
  std::vector<double> weights_;
  std::vector<double> matrix_;   // A, row-major
  std::vector<double> inverse_;  // (W A)^{-1}, row-major
};

/// Plain p-norm of a raw vector; p may be +infinity.
double pnorm(std::span<const double> v, double p);

struct Atom {
  double weight;
  Point point;

  friend bool operator==(const Atom&, const Atom&) = default;
};

/// Finite-support probability distribution over points. Always canonical:
/// atoms sorted lexicographically, near-duplicates merged, weights sum to 1.
class Lottery {
 public:
  explicit Lottery(std::vector<Atom> atoms);
  static Lottery degenerate(Point p);

  std::span<const Atom> atoms() const noexcept { return atoms_; }
  std::size_t size() const noexcept { return atoms_.size(); }
  std::size_t dim() const noexcept { return atoms_.front().point.dim(); }
  bool is_degenerate() const noexcept { return atoms_.size() == 1; }

  /// Applies p -> p + shift to every atom.
  Lottery shifted(const Point& shift) const;

  friend bool operator==(const Lottery&, const Lottery&) = default;

  std::string to_string() const;

 private:
  std::vector<Atom> atoms_;
};

/// Ordered reports of n >= 2 agents sharing a dimension.
class Profile {
 public:
  explicit Profile(std::vector<Point> points);

  std::size_t size() const noexcept { return points_.size(); }
  std::size_t dim() const noexcept { return points_.front().dim(); }
  const Point& operator[](std::size_t i) const { return points_[i]; }
  std::span<const Point> points() const noexcept { return points_; }

  /// Copy with agent i's report replaced.
  Profile with(std::size_t i, Point p) const;
  Profile shifted(const Point& shift) const;

  friend bool operator==(const Profile&, const Profile&) = default;

  std::string to_string() const;

 private:
  std::vector<Point> points_;
};

double expected_distance(const Point& x, const Lottery& lot, const Norm& norm);
Point centroid(const Lottery& lot);
double radius(const Lottery& lot, const Norm& norm);

/// Searches for distinct unit vectors u != v with ||u + v|| = 2 (within kGeomTol).
/// Axis-aligned and sign-pattern pairs are tried before `trials` random pairs.
std::optional<std::pair<Point, Point>> strict_convexity_witness(const Norm& norm, std::size_t d,
                                                                std::size_t trials,
                                                                std::uint64_t rng_seed);

/// The point a + t (b - a) at norm distance `dist` from a.
Point point_on_segment_at_distance(const Point& a, const Point& b, double dist, const Norm& norm);

/// Betweenness excess ||a-p|| + ||p-b|| - ||a-b||; p is on segment ab iff the
/// excess is at most kGeomTol. Measured in the Euclidean norm when `norm` is
/// not strictly convex, where norm-betweenness does not characterize segments.
double segment_excess(const Point& a, const Point& b, const Point& p, const Norm& norm);

}  // namespace facloc
