#pragma once

/// \file
/// Truncated multivariate Taylor arithmetic in the variables (x, y) of a
/// tangent bundle chart. A jet of caps (x_cap, y_cap) stores every Taylor
/// coefficient whose total base order is at most x_cap and whose total fiber
/// order is at most y_cap. Arithmetic on jets propagates those coefficients
/// exactly (up to rounding), so mixed partials of composed expressions are
/// available without finite differences.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <functional>
#include <initializer_list>
#include <map>
#include <memory>
#include <mutex>
#include <numeric>
#include <optional>
#include <span>
#include <string>
#include <unordered_map>
#include <utility>
#include <vector>

#include "finslerlab/error.hpp"

namespace finslerlab {

/// Truncation orders: `x` total base order, `y` total fiber order.
struct Caps {
  int x = 1;
  int y = 3;

  friend bool operator==(const Caps&, const Caps&) = default;
};

inline constexpr Caps kDefaultCaps{1, 3};

/// Exponents are packed 4 bits per variable into 64 bits, 2n variables.
inline constexpr int kMaxJetDimension = 8;

/// Division guard on the value part of a divisor.
inline constexpr double kDivisionGuard = 1e-13;

inline Caps min_caps(Caps a, Caps b) {
  return {std::min(a.x, b.x), std::min(a.y, b.y)};
}

/// Orders of a mixed partial derivative ∂^{x_orders}_x ∂^{y_orders}_y.
struct MultiIndex {
  std::vector<int> x_orders;
  std::vector<int> y_orders;

  /// Multi-index of the derivative with respect to the listed base
  /// coordinates `xs` and fiber coordinates `ys`. Repeats are allowed and
  /// order is irrelevant.
  static MultiIndex of(int n, std::initializer_list<int> xs,
                       std::initializer_list<int> ys) {
    return of(n, std::span<const int>(xs.begin(), xs.size()),
              std::span<const int>(ys.begin(), ys.size()));
  }

  static MultiIndex of(int n, std::span<const int> xs, std::span<const int> ys) {
    MultiIndex a{std::vector<int>(static_cast<std::size_t>(n), 0),
                 std::vector<int>(static_cast<std::size_t>(n), 0)};
    for (int i : xs) {
      if (i < 0 || i >= n) throw DimensionMismatchError("base index out of range");
      ++a.x_orders[static_cast<std::size_t>(i)];
    }
    for (int i : ys) {
      if (i < 0 || i >= n) throw DimensionMismatchError("fiber index out of range");
      ++a.y_orders[static_cast<std::size_t>(i)];
    }
    return a;
  }

  [[nodiscard]] int x_total() const {
    return std::accumulate(x_orders.begin(), x_orders.end(), 0);
  }
  [[nodiscard]] int y_total() const {
    return std::accumulate(y_orders.begin(), y_orders.end(), 0);
  }

  /// α! = Π α_v!
  [[nodiscard]] double factorial() const {
    double f = 1.0;
    for (const auto* orders : {&x_orders, &y_orders}) {
      for (int k : *orders) {
        for (int j = 2; j <= k; ++j) f *= j;
      }
    }
    return f;
  }
};

/// Base point x and supporting element y.
struct PointState {
  std::vector<double> x;
  std::vector<double> y;

  [[nodiscard]] int dimension() const { return static_cast<int>(x.size()); }

  /// Throws unless x and y have the same length n >= 1 and y != 0.
  void validate() const {
    if (x.size() != y.size() || x.empty()) {
      throw DimensionMismatchError("point state: x and y must have equal, nonzero length");
    }
    if (std::all_of(y.begin(), y.end(), [](double v) { return v == 0.0; })) {
      throw InadmissiblePointError("point state: supporting element y is zero");
    }
  }
};

namespace detail {

using PackedExponent = std::uint64_t;

constexpr int exponent_of(PackedExponent key, int var) {
  return static_cast<int>((key >> (4 * var)) & 0xFu);
}

constexpr PackedExponent unit_exponent(int var) {
  return PackedExponent{1} << (4 * var);
}

/// Monomial table for one pair of caps: packed exponents, reverse index, and
/// the list of (a, b, a*b) index triples whose product stays within caps.
struct JetLayout {
  Caps caps;
  std::vector<PackedExponent> monomials;
  std::vector<int> x_degree;
  std::vector<int> y_degree;
  std::unordered_map<PackedExponent, std::uint32_t> index;
  std::vector<std::array<std::uint32_t, 3>> products;

  [[nodiscard]] std::size_t size() const { return monomials.size(); }

  [[nodiscard]] std::optional<std::uint32_t> find(PackedExponent key) const {
    auto it = index.find(key);
    if (it == index.end()) return std::nullopt;
    return it->second;
  }
};

inline void enumerate_compositions(int vars, int first_var, int max_total,
                                   std::vector<PackedExponent>& out) {
  // All exponent vectors over `vars` consecutive variables with total order
  // <= max_total, in order of increasing total.
  std::vector<int> e(static_cast<std::size_t>(vars), 0);
  for (int total = 0; total <= max_total; ++total) {
    std::function<void(int, int)> rec = [&](int pos, int remaining) {
      if (pos == vars - 1) {
        e[static_cast<std::size_t>(pos)] = remaining;
        PackedExponent key = 0;
        for (int v = 0; v < vars; ++v) {
          key |= static_cast<PackedExponent>(e[static_cast<std::size_t>(v)])
                 << (4 * (first_var + v));
        }
        out.push_back(key);
        return;
      }
      for (int k = remaining; k >= 0; --k) {
        e[static_cast<std::size_t>(pos)] = k;
        rec(pos + 1, remaining - k);
      }
    };
    rec(0, total);
  }
}

inline JetLayout build_layout(int n, Caps caps) {
  JetLayout layout;
  layout.caps = caps;
  std::vector<PackedExponent> xs;
  std::vector<PackedExponent> ys;
  enumerate_compositions(n, 0, caps.x, xs);
  enumerate_compositions(n, n, caps.y, ys);
  auto degree = [n](PackedExponent key, int first) {
    int d = 0;
    for (int v = 0; v < n; ++v) d += exponent_of(key, first + v);
    return d;
  };
  for (PackedExponent kx : xs) {
    for (PackedExponent ky : ys) {
      const PackedExponent key = kx | ky;
      layout.index.emplace(key, static_cast<std::uint32_t>(layout.monomials.size()));
      layout.monomials.push_back(key);
      layout.x_degree.push_back(degree(key, 0));
      layout.y_degree.push_back(degree(key, n));
    }
  }
  const auto size = static_cast<std::uint32_t>(layout.monomials.size());
  for (std::uint32_t a = 0; a < size; ++a) {
    for (std::uint32_t b = 0; b < size; ++b) {
      if (layout.x_degree[a] + layout.x_degree[b] > caps.x) continue;
      if (layout.y_degree[a] + layout.y_degree[b] > caps.y) continue;
      // Nibble-wise addition cannot carry: every summed order is <= 2 * cap.
      const auto c = layout.find(layout.monomials[a] + layout.monomials[b]);
      layout.products.push_back({a, b, *c});
    }
  }
  return layout;
}

}  // namespace detail

/// Shared monomial tables for every caps pair up to `max_caps` in dimension n.
/// Immutable once created; jets hold a shared pointer to their family.
class JetFamily {
 public:
  static std::shared_ptr<const JetFamily> create(int dimension, Caps max_caps) {
    if (dimension < 1 || dimension > kMaxJetDimension) {
      throw DimensionMismatchError("jet dimension must be in [1, " +
                                   std::to_string(kMaxJetDimension) + "]");
    }
    if (max_caps.x < 0 || max_caps.y < 0 || max_caps.x + max_caps.y > 14) {
      throw CapOverflowError("jet caps out of supported range");
    }
    return std::shared_ptr<const JetFamily>(new JetFamily(dimension, max_caps));
  }

  [[nodiscard]] int dimension() const { return n_; }
  [[nodiscard]] Caps max_caps() const { return max_; }

  [[nodiscard]] const detail::JetLayout& layout(Caps caps) const {
    if (caps.x < 0 || caps.y < 0 || caps.x > max_.x || caps.y > max_.y) {
      throw CapOverflowError("requested caps exceed the jet family");
    }
    return layouts_[static_cast<std::size_t>(caps.x * (max_.y + 1) + caps.y)];
  }

 private:
  JetFamily(int n, Caps caps) : n_(n), max_(caps) {
    layouts_.reserve(static_cast<std::size_t>((caps.x + 1) * (caps.y + 1)));
    for (int cx = 0; cx <= caps.x; ++cx) {
      for (int cy = 0; cy <= caps.y; ++cy) {
        layouts_.push_back(detail::build_layout(n, Caps{cx, cy}));
      }
    }
  }

  int n_;
  Caps max_;
  std::vector<detail::JetLayout> layouts_;
};

using JetFamilyPtr = std::shared_ptr<const JetFamily>;

/// Truncated Taylor expansion of a scalar about a point (x0, y0).
/// Coefficients are ∂^α f / α!. Binary operations between jets of different
/// caps in the same family produce a jet truncated to the common caps.
class Jet {
 public:
  Jet(JetFamilyPtr family, Caps caps, double value = 0.0)
      : family_(std::move(family)), caps_(caps) {
    coeffs_.assign(layout().size(), 0.0);
    coeffs_[0] = value;
  }

  /// Jet of the base coordinate x^i about `value`.
  static Jet base_coordinate(const JetFamilyPtr& family, Caps caps, int i, double value) {
    return coordinate(family, caps, i, value);
  }

  /// Jet of the fiber coordinate y^i about `value`.
  static Jet fiber_coordinate(const JetFamilyPtr& family, Caps caps, int i, double value) {
    return coordinate(family, caps, family->dimension() + i, value);
  }

  [[nodiscard]] const JetFamilyPtr& family() const { return family_; }
  [[nodiscard]] Caps caps() const { return caps_; }
  [[nodiscard]] int dimension() const { return family_->dimension(); }
  [[nodiscard]] double value() const { return coeffs_[0]; }
  [[nodiscard]] std::span<const double> coefficients() const { return coeffs_; }

  /// Taylor coefficient ∂^α f / α!.
  [[nodiscard]] double coefficient(const MultiIndex& alpha) const {
    return coeffs_[locate(alpha)];
  }

  /// Raw mixed partial ∂^α f.
  [[nodiscard]] double partial(const MultiIndex& alpha) const {
    return alpha.factorial() * coeffs_[locate(alpha)];
  }

  [[nodiscard]] double partial(std::initializer_list<int> xs,
                               std::initializer_list<int> ys) const {
    return partial(MultiIndex::of(dimension(), xs, ys));
  }

  /// ∂/∂x^i as a jet of caps (x_cap - 1, y_cap).
  [[nodiscard]] Jet d_dx(int i) const { return differentiate(i); }

  /// ∂/∂y^i as a jet of caps (x_cap, y_cap - 1).
  [[nodiscard]] Jet d_dy(int i) const { return differentiate(dimension() + i); }

  [[nodiscard]] Jet truncated(Caps caps) const {
    if (caps == caps_) return *this;
    if (caps.x > caps_.x || caps.y > caps_.y) {
      throw CapOverflowError("cannot truncate a jet to larger caps");
    }
    Jet out(family_, caps);
    const auto& src = layout();
    const auto& dst = out.layout();
    for (std::size_t k = 0; k < dst.size(); ++k) {
      out.coeffs_[k] = coeffs_[*src.find(dst.monomials[k])];
    }
    return out;
  }

  Jet operator-() const {
    Jet out = *this;
    for (double& c : out.coeffs_) c = -c;
    return out;
  }

  Jet& operator+=(double s) {
    coeffs_[0] += s;
    return *this;
  }
  Jet& operator-=(double s) {
    coeffs_[0] -= s;
    return *this;
  }
  Jet& operator*=(double s) {
    for (double& c : coeffs_) c *= s;
    return *this;
  }
  Jet& operator/=(double s) {
    if (std::abs(s) < kDivisionGuard) throw DomainError("jet: division by a vanishing scalar");
    for (double& c : coeffs_) c /= s;
    return *this;
  }

  Jet& operator+=(const Jet& o) { return accumulate(o, 1.0); }
  Jet& operator-=(const Jet& o) { return accumulate(o, -1.0); }

  Jet& operator*=(const Jet& o) {
    *this = multiply(*this, o);
    return *this;
  }

  friend Jet operator+(Jet a, const Jet& b) { return a += b; }
  friend Jet operator-(Jet a, const Jet& b) { return a -= b; }
  friend Jet operator*(const Jet& a, const Jet& b) { return multiply(a, b); }
  friend Jet operator+(Jet a, double s) { return a += s; }
  friend Jet operator+(double s, Jet a) { return a += s; }
  friend Jet operator-(Jet a, double s) { return a -= s; }
  friend Jet operator-(double s, const Jet& a) { return (-a) += s; }
  friend Jet operator*(Jet a, double s) { return a *= s; }
  friend Jet operator*(double s, Jet a) { return a *= s; }
  friend Jet operator/(Jet a, double s) { return a /= s; }

  /// Substitutes f into the Taylor series of a univariate function whose
  /// derivatives at value() are `derivs[k]`, k = 0..x_cap+y_cap.
  [[nodiscard]] Jet compose(std::span<const double> derivs) const {
    const int order = caps_.x + caps_.y;
    if (static_cast<int>(derivs.size()) < order + 1) {
      throw CapOverflowError("jet compose: not enough derivatives supplied");
    }
    Jet nilpotent = *this;
    nilpotent.coeffs_[0] = 0.0;
    Jet result(family_, caps_, derivs[0]);
    Jet power(family_, caps_, 1.0);
    double factorial = 1.0;
    for (int k = 1; k <= order; ++k) {
      power = multiply(power, nilpotent);
      factorial *= k;
      result.accumulate(power, derivs[static_cast<std::size_t>(k)] / factorial);
    }
    return result;
  }

 private:
  static Jet coordinate(const JetFamilyPtr& family, Caps caps, int var, double value) {
    Jet j(family, caps, value);
    const bool is_fiber = var >= family->dimension();
    if ((is_fiber && caps.y >= 1) || (!is_fiber && caps.x >= 1)) {
      j.coeffs_[*j.layout().find(detail::unit_exponent(var))] = 1.0;
    }
    return j;
  }

  [[nodiscard]] const detail::JetLayout& layout() const { return family_->layout(caps_); }

  [[nodiscard]] std::size_t locate(const MultiIndex& alpha) const {
    const int n = dimension();
    if (static_cast<int>(alpha.x_orders.size()) != n ||
        static_cast<int>(alpha.y_orders.size()) != n) {
      throw DimensionMismatchError("multi-index dimension does not match the jet");
    }
    if (alpha.x_total() > caps_.x || alpha.y_total() > caps_.y) {
      throw CapOverflowError("partial derivative beyond jet caps (" +
                             std::to_string(alpha.x_total()) + "," +
                             std::to_string(alpha.y_total()) + ") > (" +
                             std::to_string(caps_.x) + "," + std::to_string(caps_.y) + ")");
    }
    detail::PackedExponent key = 0;
    for (int v = 0; v < n; ++v) {
      key |= static_cast<detail::PackedExponent>(alpha.x_orders[static_cast<std::size_t>(v)])
             << (4 * v);
      key |= static_cast<detail::PackedExponent>(alpha.y_orders[static_cast<std::size_t>(v)])
             << (4 * (n + v));
    }
    return *layout().find(key);
  }

  [[nodiscard]] Jet differentiate(int var) const {
    const bool is_fiber = var >= dimension();
    Caps reduced = caps_;
    int& cap = is_fiber ? reduced.y : reduced.x;
    if (cap == 0) throw CapOverflowError("jet derivative beyond caps");
    --cap;
    Jet out(family_, reduced);
    const auto& src = layout();
    const auto& dst = out.layout();
    const auto step = detail::unit_exponent(var);
    for (std::size_t k = 0; k < dst.size(); ++k) {
      const auto key = dst.monomials[k];
      out.coeffs_[k] = (detail::exponent_of(key, var) + 1) * coeffs_[*src.find(key + step)];
    }
    return out;
  }

  void require_same_family(const Jet& o) const {
    if (family_ != o.family_) {
      throw DimensionMismatchError("jet arithmetic across different jet families");
    }
  }

  Jet& accumulate(const Jet& o, double scale) {
    require_same_family(o);
    if (o.caps_ == caps_) {
      for (std::size_t k = 0; k < coeffs_.size(); ++k) coeffs_[k] += scale * o.coeffs_[k];
      return *this;
    }
    const Caps common = min_caps(caps_, o.caps_);
    Jet lhs = truncated(common);
    const Jet rhs = o.truncated(common);
    for (std::size_t k = 0; k < lhs.coeffs_.size(); ++k) lhs.coeffs_[k] += scale * rhs.coeffs_[k];
    *this = std::move(lhs);
    return *this;
  }

  static Jet multiply(const Jet& a, const Jet& b) {
    a.require_same_family(b);
    const Caps common = min_caps(a.caps_, b.caps_);
    if (!(a.caps_ == common)) return multiply(a.truncated(common), b);
    if (!(b.caps_ == common)) return multiply(a, b.truncated(common));
    Jet out(a.family_, common);
    out.coeffs_[0] = 0.0;
    for (const auto& [i, j, k] : out.layout().products) {
      out.coeffs_[k] += a.coeffs_[i] * b.coeffs_[j];
    }
    return out;
  }

  JetFamilyPtr family_;
  Caps caps_;
  std::vector<double> coeffs_;
};

/// Magnitude of the value part; used for pivoting in generic linear algebra.
inline double magnitude(const Jet& j) { return std::abs(j.value()); }

inline Jet reciprocal(const Jet& a) {
  const double v = a.value();
  if (std::abs(v) < kDivisionGuard) {
    throw DomainError("jet: division by a value part below the singularity guard");
  }
  const int order = a.caps().x + a.caps().y;
  std::vector<double> d(static_cast<std::size_t>(order + 1));
  // d^k/dt^k t^{-1} = (-1)^k k! t^{-k-1}
  double f = 1.0 / v;
  for (int k = 0; k <= order; ++k) {
    d[static_cast<std::size_t>(k)] = f;
    f *= -(k + 1) / v;
  }
  return a.compose(d);
}

inline Jet operator/(const Jet& a, const Jet& b) { return a * reciprocal(b); }
inline Jet operator/(double s, const Jet& b) { return reciprocal(b) * s; }

inline Jet pow(const Jet& a, double p) {
  const double v = a.value();
  if (v <= 0.0) throw DomainError("jet: real power of a nonpositive value");
  const int order = a.caps().x + a.caps().y;
  std::vector<double> d(static_cast<std::size_t>(order + 1));
  double coeff = 1.0;
  for (int k = 0; k <= order; ++k) {
    d[static_cast<std::size_t>(k)] = coeff * std::pow(v, p - k);
    coeff *= (p - k);
  }
  return a.compose(d);
}

/// Integer power by repeated squaring; valid at any value.
inline Jet pow(const Jet& a, int p) {
  if (p < 0) return reciprocal(pow(a, -p));
  Jet result(a.family(), a.caps(), 1.0);
  Jet base = a;
  while (p > 0) {
    if (p & 1) result *= base;
    p >>= 1;
    if (p > 0) base *= base;
  }
  return result;
}

inline Jet sqrt(const Jet& a) {
  if (a.value() < 0.0) throw DomainError("jet: sqrt of a negative value");
  if (a.value() == 0.0) throw DomainError("jet: sqrt is not differentiable at zero");
  return pow(a, 0.5);
}

inline Jet exp(const Jet& a) {
  const int order = a.caps().x + a.caps().y;
  std::vector<double> d(static_cast<std::size_t>(order + 1), std::exp(a.value()));
  return a.compose(d);
}

inline Jet log(const Jet& a) {
  const double v = a.value();
  if (v <= 0.0) throw DomainError("jet: log of a nonpositive value");
  const int order = a.caps().x + a.caps().y;
  std::vector<double> d(static_cast<std::size_t>(order + 1));
  d[0] = std::log(v);
  double f = 1.0 / v;
  for (int k = 1; k <= order; ++k) {
    d[static_cast<std::size_t>(k)] = f;
    f *= -k / v;
  }
  return a.compose(d);
}

inline Jet sin(const Jet& a) {
  const int order = a.caps().x + a.caps().y;
  const double s = std::sin(a.value());
  const double c = std::cos(a.value());
  const std::array<double, 4> cycle{s, c, -s, -c};
  std::vector<double> d(static_cast<std::size_t>(order + 1));
  for (int k = 0; k <= order; ++k) d[static_cast<std::size_t>(k)] = cycle[static_cast<std::size_t>(k % 4)];
  return a.compose(d);
}

inline Jet cos(const Jet& a) {
  const int order = a.caps().x + a.caps().y;
  const double s = std::sin(a.value());
  const double c = std::cos(a.value());
  const std::array<double, 4> cycle{c, -s, -c, s};
  std::vector<double> d(static_cast<std::size_t>(order + 1));
  for (int k = 0; k <= order; ++k) d[static_cast<std::size_t>(k)] = cycle[static_cast<std::size_t>(k % 4)];
  return a.compose(d);
}

/// Coordinate jets of a chart point, all in one family.
struct JetVars {
  JetFamilyPtr family;
  Caps caps;
  std::vector<Jet> x;
  std::vector<Jet> y;

  [[nodiscard]] int dimension() const { return static_cast<int>(x.size()); }
  [[nodiscard]] Jet constant(double v) const { return Jet(family, caps, v); }
};

inline JetVars make_vars(const JetFamilyPtr& family, const PointState& p, Caps caps) {
  p.validate();
  if (family->dimension() != p.dimension()) {
    throw DimensionMismatchError("jet family dimension does not match the point");
  }
  JetVars v{family, caps, {}, {}};
  for (int i = 0; i < p.dimension(); ++i) {
    v.x.push_back(Jet::base_coordinate(family, caps, i, p.x[static_cast<std::size_t>(i)]));
    v.y.push_back(Jet::fiber_coordinate(family, caps, i, p.y[static_cast<std::size_t>(i)]));
  }
  return v;
}

/// Shared family for (dimension, caps); families are immutable, so one
/// instance per key is reused across evaluations and threads.
inline JetFamilyPtr cached_family(int dimension, Caps caps) {
  static std::mutex mutex;
  static std::map<std::array<int, 3>, JetFamilyPtr> cache;
  const std::array<int, 3> key{dimension, caps.x, caps.y};
  std::lock_guard<std::mutex> lock(mutex);
  auto it = cache.find(key);
  if (it == cache.end()) it = cache.emplace(key, JetFamily::create(dimension, caps)).first;
  return it->second;
}

inline JetVars make_vars(const PointState& p, Caps caps) {
  p.validate();
  return make_vars(cached_family(p.dimension(), caps), p, caps);
}

/// A scalar function of (x, y) written against jet arithmetic.
using JetScalarFunction = std::function<Jet(const JetVars&)>;

/// Taylor jet of f at p with the given caps.
inline Jet lift(const JetScalarFunction& f, const PointState& p, Caps caps = kDefaultCaps) {
  const JetVars vars = make_vars(p, caps);
  Jet out = f(vars);
  if (!(out.caps() == caps)) {
    throw CapOverflowError("lifted function returned a jet with reduced caps");
  }
  return out;
}

/// Raw partial ∂^α of a jet; alias of Jet::partial.
inline double partial(const Jet& j, const MultiIndex& alpha) { return j.partial(alpha); }

}  // namespace finslerlab
