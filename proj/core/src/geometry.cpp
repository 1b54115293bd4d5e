#include "facloc/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <numeric>
#include <sstream>

#include <Eigen/Dense>

#include "facloc/random.hpp"

namespace facloc {

namespace {

std::string format_double(double v) {
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

void require_same_dim(std::size_t a, std::size_t b, const char* what) {
  if (a != b) {
    throw DimensionError(std::string(what) + ": dimension mismatch (" + std::to_string(a) +
                         " vs " + std::to_string(b) + ")");
  }
}

double parse_real(const std::string& token, const std::string& context) {
  if (token == "inf" || token == "Inf" || token == "INF") return std::numeric_limits<double>::infinity();
  std::size_t used = 0;
  double v = 0.0;
  try {
    v = std::stod(token, &used);
  } catch (const std::exception&) {
    throw DomainError(context + ": not a number: '" + token + "'");
  }
  if (used != token.size()) throw DomainError(context + ": trailing characters in '" + token + "'");
  return v;
}

std::vector<double> parse_list(const std::string& text, const std::string& context) {
  std::vector<double> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) out.push_back(parse_real(item, context));
  if (out.empty()) throw DomainError(context + ": empty list");
  return out;
}

}  // namespace

// ---------------------------------------------------------------- Point

Point::Point(std::vector<double> coords) : coords_(std::move(coords)) {
  if (coords_.empty()) throw DimensionError("Point: dimension must be at least 1");
  for (double c : coords_) {
    if (!std::isfinite(c)) throw DomainError("Point: non-finite coordinate");
  }
}

Point::Point(std::initializer_list<double> coords) : Point(std::vector<double>(coords)) {}

Point Point::zero(std::size_t d) { return Point(std::vector<double>(d, 0.0)); }

Point Point::unit(std::size_t d, std::size_t axis) {
  std::vector<double> c(d, 0.0);
  c.at(axis) = 1.0;
  return Point(std::move(c));
}

Point Point::operator+(const Point& rhs) const {
  require_same_dim(dim(), rhs.dim(), "Point::operator+");
  std::vector<double> out(coords_);
  for (std::size_t k = 0; k < out.size(); ++k) out[k] += rhs.coords_[k];
  return Point(std::move(out));
}

Point Point::operator-(const Point& rhs) const {
  require_same_dim(dim(), rhs.dim(), "Point::operator-");
  std::vector<double> out(coords_);
  for (std::size_t k = 0; k < out.size(); ++k) out[k] -= rhs.coords_[k];
  return Point(std::move(out));
}

Point Point::operator*(double c) const {
  std::vector<double> out(coords_);
  for (double& v : out) v *= c;
  return Point(std::move(out));
}

Point Point::with(std::size_t k, double value) const {
  std::vector<double> out(coords_);
  out.at(k) = value;
  return Point(std::move(out));
}

std::strong_ordering operator<=>(const Point& a, const Point& b) {
  const std::size_t m = std::min(a.dim(), b.dim());
  for (std::size_t k = 0; k < m; ++k) {
    if (a[k] < b[k]) return std::strong_ordering::less;
    if (a[k] > b[k]) return std::strong_ordering::greater;
  }
  return a.dim() <=> b.dim();
}

std::string Point::to_string() const {
  std::string s = "(";
  for (std::size_t k = 0; k < coords_.size(); ++k) {
    if (k) s += ", ";
    s += format_double(coords_[k]);
  }
  return s + ")";
}

Point lerp(const Point& a, const Point& b, double t) {
  require_same_dim(a.dim(), b.dim(), "lerp");
  std::vector<double> out(a.dim());
  for (std::size_t k = 0; k < out.size(); ++k) out[k] = a[k] + t * (b[k] - a[k]);
  return Point(std::move(out));
}

Point mean(std::span<const Point> points) {
  if (points.empty()) throw DomainError("mean: empty point set");
  // Offsets from the first point keep the mean of identical points exact.
  const Point& base = points.front();
  std::vector<double> acc(base.dim(), 0.0);
  for (const Point& p : points) {
    require_same_dim(acc.size(), p.dim(), "mean");
    for (std::size_t k = 0; k < acc.size(); ++k) acc[k] += p[k] - base[k];
  }
  for (std::size_t k = 0; k < acc.size(); ++k) acc[k] = base[k] + acc[k] / static_cast<double>(points.size());
  return Point(std::move(acc));
}

double max_abs_diff(const Point& a, const Point& b) {
  require_same_dim(a.dim(), b.dim(), "max_abs_diff");
  double m = 0.0;
  for (std::size_t k = 0; k < a.dim(); ++k) m = std::max(m, std::abs(a[k] - b[k]));
  return m;
}

// ---------------------------------------------------------------- Norm

double pnorm(std::span<const double> v, double p) {
  if (p == 1.0) {
    double s = 0.0;
    for (double x : v) s += std::abs(x);
    return s;
  }
  double m = 0.0;
  for (double x : v) m = std::max(m, std::abs(x));
  if (std::isinf(p) || m == 0.0) return m;
  if (p == 2.0) {
    double s = 0.0;
    for (double x : v) {
      const double r = x / m;
      s += r * r;
    }
    return m * std::sqrt(s);
  }
  double s = 0.0;
  for (double x : v) s += std::pow(std::abs(x) / m, p);
  return m * std::pow(s, 1.0 / p);
}

Norm Norm::lp(double p) {
  if (std::isnan(p) || p < 1.0) throw DomainError("Norm: exponent p must lie in [1, inf]");
  Norm n;
  n.p_ = p;
  return n;
}

Norm Norm::weighted(double p, std::vector<double> weights) {
  Norm n = lp(p);
  if (weights.empty()) throw DomainError("Norm: empty weight vector");
  for (double w : weights) {
    if (!(w > 0.0) || !std::isfinite(w)) throw DomainError("Norm: weights must be positive and finite");
  }
  n.dim_ = weights.size();
  n.weights_ = std::move(weights);
  n.inverse_.assign(n.dim_ * n.dim_, 0.0);
  for (std::size_t k = 0; k < n.dim_; ++k) n.inverse_[k * n.dim_ + k] = 1.0 / n.weights_[k];
  return n;
}

Norm Norm::transformed(double p, std::vector<double> row_major, std::size_t d,
                       std::vector<double> weights) {
  Norm n = lp(p);
  if (d == 0 || row_major.size() != d * d) throw DimensionError("Norm: transform must be d x d");
  for (double a : row_major) {
    if (!std::isfinite(a)) throw DomainError("Norm: non-finite transform entry");
  }
  if (!weights.empty()) {
    if (weights.size() != d) throw DimensionError("Norm: weights and transform disagree on d");
    for (double w : weights) {
      if (!(w > 0.0) || !std::isfinite(w)) throw DomainError("Norm: weights must be positive and finite");
    }
  }
  Eigen::MatrixXd m(d, d);
  for (std::size_t r = 0; r < d; ++r) {
    for (std::size_t c = 0; c < d; ++c) {
      m(r, c) = row_major[r * d + c] * (weights.empty() ? 1.0 : weights[r]);
    }
  }
  Eigen::FullPivLU<Eigen::MatrixXd> lu(m);
  if (!lu.isInvertible()) throw DomainError("Norm: transform matrix is singular");
  const Eigen::MatrixXd inv = lu.inverse();
  n.dim_ = d;
  n.weights_ = std::move(weights);
  n.matrix_ = std::move(row_major);
  n.inverse_.resize(d * d);
  for (std::size_t r = 0; r < d; ++r) {
    for (std::size_t c = 0; c < d; ++c) n.inverse_[r * d + c] = inv(r, c);
  }
  return n;
}

double Norm::q() const noexcept {
  if (p_ == 1.0) return std::numeric_limits<double>::infinity();
  if (std::isinf(p_)) return 1.0;
  return p_ / (p_ - 1.0);
}

bool Norm::strictly_convex() const noexcept { return p_ > 1.0 && std::isfinite(p_); }

std::optional<std::size_t> Norm::dim() const noexcept {
  if (dim_ == 0) return std::nullopt;
  return dim_;
}

void Norm::check_dim(std::size_t d) const {
  if (dim_ != 0 && d != dim_) {
    throw DimensionError("Norm: expected dimension " + std::to_string(dim_) + ", got " +
                         std::to_string(d));
  }
}

std::vector<double> Norm::to_canonical(std::span<const double> v) const {
  check_dim(v.size());
  std::vector<double> z(v.begin(), v.end());
  if (has_transform()) {
    for (std::size_t r = 0; r < dim_; ++r) {
      double s = 0.0;
      for (std::size_t c = 0; c < dim_; ++c) s += matrix_[r * dim_ + c] * v[c];
      z[r] = s;
    }
  }
  if (has_weights()) {
    for (std::size_t k = 0; k < dim_; ++k) z[k] *= weights_[k];
  }
  return z;
}

std::vector<double> Norm::from_canonical(std::span<const double> z) const {
  check_dim(z.size());
  if (is_plain()) return {z.begin(), z.end()};
  std::vector<double> v(dim_, 0.0);
  for (std::size_t r = 0; r < dim_; ++r) {
    double s = 0.0;
    for (std::size_t c = 0; c < dim_; ++c) s += inverse_[r * dim_ + c] * z[c];
    v[r] = s;
  }
  return v;
}

double Norm::operator()(std::span<const double> v) const {
  for (double x : v) {
    if (!std::isfinite(x)) throw DomainError("Norm: non-finite input");
  }
  if (is_plain()) return pnorm(v, p_);
  const std::vector<double> z = to_canonical(v);
  return pnorm(z, p_);
}

double Norm::distance(const Point& a, const Point& b) const {
  require_same_dim(a.dim(), b.dim(), "Norm::distance");
  check_dim(a.dim());
  if (is_plain()) {
    double buf[8];
    if (a.dim() <= 8) {
      for (std::size_t k = 0; k < a.dim(); ++k) buf[k] = a[k] - b[k];
      return pnorm(std::span<const double>(buf, a.dim()), p_);
    }
  }
  return (*this)((a - b).coords());
}

std::string Norm::to_string() const {
  std::string s = "lp:" + format_double(p_);
  auto join = [](const std::vector<double>& xs) {
    std::string out;
    for (std::size_t i = 0; i < xs.size(); ++i) {
      if (i) out += ",";
      out += format_double(xs[i]);
    }
    return out;
  };
  if (has_weights()) s += ";w=" + join(weights_);
  if (has_transform()) s += ";A=" + join(matrix_);
  return s;
}

Norm Norm::parse(const std::string& text) {
  std::vector<std::string> parts;
  {
    std::stringstream ss(text);
    std::string part;
    while (std::getline(ss, part, ';')) parts.push_back(part);
  }
  if (parts.empty() || parts[0].rfind("lp:", 0) != 0) {
    throw DomainError("norm '" + text + "': expected lp:<p>[;w=...][;A=...]");
  }
  const double p = parse_real(parts[0].substr(3), "norm exponent");
  std::vector<double> weights;
  std::vector<double> matrix;
  for (std::size_t i = 1; i < parts.size(); ++i) {
    const std::string& part = parts[i];
    if (part.rfind("w=", 0) == 0) {
      weights = parse_list(part.substr(2), "norm weights");
    } else if (part.rfind("A=", 0) == 0) {
      matrix = parse_list(part.substr(2), "norm transform");
    } else {
      throw DomainError("norm '" + text + "': unknown field '" + part + "'");
    }
  }
  if (matrix.empty()) {
    return weights.empty() ? lp(p) : weighted(p, std::move(weights));
  }
  const auto d = static_cast<std::size_t>(std::llround(std::sqrt(static_cast<double>(matrix.size()))));
  if (d * d != matrix.size()) throw DimensionError("norm transform: entry count is not a square");
  return transformed(p, std::move(matrix), d, std::move(weights));
}

// ---------------------------------------------------------------- Lottery

namespace {

bool mergeable(const Point& a, const Point& b) {
  double scale = 1.0;
  for (std::size_t k = 0; k < a.dim(); ++k) scale = std::max({scale, std::abs(a[k]), std::abs(b[k])});
  return max_abs_diff(a, b) <= kWeightTol * scale;
}

}  // namespace

Lottery::Lottery(std::vector<Atom> atoms) {
  if (atoms.empty()) throw DomainError("Lottery: no atoms");
  const std::size_t d = atoms.front().point.dim();
  double total = 0.0;
  for (const Atom& a : atoms) {
    require_same_dim(d, a.point.dim(), "Lottery");
    if (!std::isfinite(a.weight) || a.weight < 0.0) throw DomainError("Lottery: weight outside [0, 1]");
    total += a.weight;
  }
  if (std::abs(total - 1.0) > kGeomTol) {
    throw DomainError("Lottery: weights sum to " + format_double(total) + ", expected 1");
  }
  std::erase_if(atoms, [](const Atom& a) { return a.weight == 0.0; });

  // Merge near-duplicates into the heaviest representative until no pair is
  // mergeable, so canonicalization is idempotent.
  bool changed = true;
  while (changed) {
    changed = false;
    std::sort(atoms.begin(), atoms.end(), [](const Atom& a, const Atom& b) {
      if (a.weight != b.weight) return a.weight > b.weight;
      return a.point < b.point;
    });
    std::vector<Atom> merged;
    for (Atom& a : atoms) {
      auto it = std::find_if(merged.begin(), merged.end(),
                             [&](const Atom& m) { return mergeable(m.point, a.point); });
      if (it == merged.end()) {
        merged.push_back(std::move(a));
      } else {
        it->weight += a.weight;
        changed = true;
      }
    }
    atoms = std::move(merged);
  }
  std::sort(atoms.begin(), atoms.end(), [](const Atom& a, const Atom& b) { return a.point < b.point; });
  double sum = 0.0;
  for (const Atom& a : atoms) sum += a.weight;
  for (Atom& a : atoms) a.weight /= sum;
  atoms_ = std::move(atoms);
}

Lottery Lottery::degenerate(Point p) { return Lottery({Atom{1.0, std::move(p)}}); }

Lottery Lottery::shifted(const Point& shift) const {
  std::vector<Atom> out;
  out.reserve(atoms_.size());
  for (const Atom& a : atoms_) out.push_back({a.weight, a.point + shift});
  return Lottery(std::move(out));
}

std::string Lottery::to_string() const {
  std::string s = "{";
  for (std::size_t j = 0; j < atoms_.size(); ++j) {
    if (j) s += ", ";
    s += atoms_[j].point.to_string() + ": " + format_double(atoms_[j].weight);
  }
  return s + "}";
}

// ---------------------------------------------------------------- Profile

Profile::Profile(std::vector<Point> points) : points_(std::move(points)) {
  if (points_.size() < 2) throw DomainError("Profile: need at least 2 agents");
  for (const Point& p : points_) require_same_dim(points_.front().dim(), p.dim(), "Profile");
}

Profile Profile::with(std::size_t i, Point p) const {
  std::vector<Point> pts = points_;
  require_same_dim(dim(), p.dim(), "Profile::with");
  pts.at(i) = std::move(p);
  return Profile(std::move(pts));
}

Profile Profile::shifted(const Point& shift) const {
  std::vector<Point> pts;
  pts.reserve(points_.size());
  for (const Point& p : points_) pts.push_back(p + shift);
  return Profile(std::move(pts));
}

std::string Profile::to_string() const {
  std::string s = "(";
  for (std::size_t i = 0; i < points_.size(); ++i) {
    if (i) s += ", ";
    s += points_[i].to_string();
  }
  return s + ")";
}

// ---------------------------------------------------------------- lottery functionals

double expected_distance(const Point& x, const Lottery& lot, const Norm& norm) {
  require_same_dim(x.dim(), lot.dim(), "expected_distance");
  double s = 0.0;
  for (const Atom& a : lot.atoms()) s += a.weight * norm.distance(x, a.point);
  return s;
}

Point centroid(const Lottery& lot) {
  std::vector<double> acc(lot.dim(), 0.0);
  for (const Atom& a : lot.atoms()) {
    for (std::size_t k = 0; k < acc.size(); ++k) acc[k] += a.weight * a.point[k];
  }
  return Point(std::move(acc));
}

double radius(const Lottery& lot, const Norm& norm) {
  if (lot.is_degenerate()) return 0.0;
  return expected_distance(centroid(lot), lot, norm);
}

// ---------------------------------------------------------------- strict convexity

std::optional<std::pair<Point, Point>> strict_convexity_witness(const Norm& norm, std::size_t d,
                                                                std::size_t trials,
                                                                std::uint64_t rng_seed) {
  if (d == 0) throw DomainError("strict_convexity_witness: d must be positive");
  if (norm.dim() && *norm.dim() != d) throw DimensionError("strict_convexity_witness: norm dimension");

  auto to_unit = [&](std::vector<double> z) -> std::optional<Point> {
    Point v(norm.from_canonical(z));
    const double len = norm(v);
    if (!(len > 0.0)) return std::nullopt;
    return v * (1.0 / len);
  };
  auto violates = [&](const Point& u, const Point& v) {
    if (norm(u - v) < 1e-3) return false;  // near-identical pairs are not witnesses
    return norm(u + v) >= 2.0 - kGeomTol;
  };

  // Directed candidates in the canonical (mapped) space, where the norm is a
  // plain p-norm: axis vectors, then full sign patterns, then partial ones.
  std::vector<std::vector<double>> axes;
  std::vector<std::vector<double>> full;
  std::vector<std::vector<double>> partial;
  for (std::size_t k = 0; k < d; ++k) {
    std::vector<double> e(d, 0.0);
    e[k] = 1.0;
    axes.push_back(std::move(e));
  }
  if (d <= 4) {
    std::size_t total = 1;
    for (std::size_t k = 0; k < d; ++k) total *= 3;
    for (std::size_t code = 0; code < total; ++code) {
      std::vector<double> s(d);
      std::size_t c = code;
      std::size_t nonzero = 0;
      for (std::size_t k = 0; k < d; ++k) {
        s[k] = static_cast<double>(c % 3) - 1.0;
        c /= 3;
        nonzero += s[k] != 0.0;
      }
      if (nonzero == 0) continue;
      const auto first = std::find_if(s.begin(), s.end(), [](double x) { return x != 0.0; });
      if (*first < 0.0) continue;  // antipodal pairs add nothing
      if (nonzero == d) full.push_back(s);
      else if (nonzero > 1) partial.push_back(s);
    }
    std::sort(full.begin(), full.end(), std::greater<>());
  } else {
    full.emplace_back(d, 1.0);
  }

  auto scan = [&](const std::vector<std::vector<double>>& xs, const std::vector<std::vector<double>>& ys,
                  bool same) -> std::optional<std::pair<Point, Point>> {
    for (std::size_t i = 0; i < xs.size(); ++i) {
      for (std::size_t j = same ? i + 1 : 0; j < ys.size(); ++j) {
        auto u = to_unit(xs[i]);
        auto v = to_unit(ys[j]);
        if (u && v && violates(*u, *v)) return std::make_pair(*u, *v);
      }
    }
    return std::nullopt;
  };
  if (auto w = scan(axes, axes, true)) return w;
  if (auto w = scan(full, full, true)) return w;
  if (auto w = scan(axes, full, false)) return w;
  if (auto w = scan(partial, partial, true)) return w;
  if (auto w = scan(axes, partial, false)) return w;
  if (auto w = scan(full, partial, false)) return w;

  CounterRng rng(rng_seed, 0x5c);
  for (std::size_t t = 0; t < trials; ++t) {
    std::vector<double> a(d), b(d);
    for (auto& x : a) x = rng.normal();
    for (auto& x : b) x = rng.normal();
    auto u = to_unit(a);
    auto v = to_unit(b);
    if (u && v && violates(*u, *v)) return std::make_pair(*u, *v);
  }
  return std::nullopt;
}

// ---------------------------------------------------------------- segments

Point point_on_segment_at_distance(const Point& a, const Point& b, double dist, const Norm& norm) {
  require_same_dim(a.dim(), b.dim(), "point_on_segment_at_distance");
  if (!std::isfinite(dist) || dist < 0.0) throw DomainError("point_on_segment_at_distance: bad distance");
  if (dist == 0.0) return a;
  const double len = norm.distance(b, a);
  if (len == 0.0) throw DomainError("point_on_segment_at_distance: degenerate segment with positive distance");
  if (dist > len * (1.0 + kWeightTol)) {
    throw DomainError("point_on_segment_at_distance: distance exceeds segment length");
  }
  if (dist >= len) return b;
  return lerp(a, b, dist / len);
}

double segment_excess(const Point& a, const Point& b, const Point& p, const Norm& norm) {
  if (norm.strictly_convex()) {
    return norm.distance(a, p) + norm.distance(p, b) - norm.distance(a, b);
  }
  const double euclid = 2.0;
  return pnorm((a - p).coords(), euclid) + pnorm((p - b).coords(), euclid) -
         pnorm((a - b).coords(), euclid);
}

}  // namespace facloc
