#pragma once

/// \file
/// Metric functions L(x, y) written against jet arithmetic, and the metric
/// zoo: Euclidean, Riemannian, Randers, Kropina and custom families.

#include <functional>
#include <memory>
#include <string>
#include <utility>
#include <vector>

#include "finslerlab/dense.hpp"
#include "finslerlab/jet.hpp"
#include "finslerlab/polynomial.hpp"

namespace finslerlab {

/// A smooth function of the base coordinates only.
using BaseField = std::function<Jet(const std::vector<Jet>& x)>;

/// Symmetric n x n field a_ij(x), stored row-major.
struct MatrixField {
  int n = 0;
  std::vector<BaseField> entries;

  [[nodiscard]] const BaseField& operator()(int i, int j) const {
    return entries[static_cast<std::size_t>(i * n + j)];
  }
};

inline BaseField constant_field(double c) {
  return [c](const std::vector<Jet>& x) { return x.front() * 0.0 + c; };
}

inline BaseField polynomial_field(Polynomial p) {
  return [p = std::move(p)](const std::vector<Jet>& x) {
    return p.evaluate<Jet>(x, x.front() * 0.0 + 1.0);
  };
}

inline MatrixField constant_matrix(const Mat& a) {
  MatrixField f{a.rows(), {}};
  for (int i = 0; i < a.rows(); ++i)
    for (int j = 0; j < a.cols(); ++j) f.entries.push_back(constant_field(a(i, j)));
  return f;
}

inline MatrixField polynomial_matrix(const std::vector<std::vector<Polynomial>>& a) {
  const int n = static_cast<int>(a.size());
  MatrixField f{n, {}};
  for (int i = 0; i < n; ++i) {
    if (static_cast<int>(a[static_cast<std::size_t>(i)].size()) != n) {
      throw DimensionMismatchError("matrix field must be square");
    }
    for (int j = 0; j < n; ++j) f.entries.push_back(polynomial_field(a[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)]));
  }
  return f;
}

inline std::vector<BaseField> constant_covector(const Vec& d) {
  std::vector<BaseField> out;
  for (double v : d) out.push_back(constant_field(v));
  return out;
}

inline std::vector<BaseField> polynomial_covector(const std::vector<Polynomial>& d) {
  std::vector<BaseField> out;
  for (const auto& p : d) out.push_back(polynomial_field(p));
  return out;
}

enum class MetricFamily { euclidean, riemannian, randers, kropina, custom };

inline std::string to_string(MetricFamily f) {
  switch (f) {
    case MetricFamily::euclidean: return "euclidean";
    case MetricFamily::riemannian: return "riemannian";
    case MetricFamily::randers: return "randers";
    case MetricFamily::kropina: return "kropina";
    case MetricFamily::custom: return "custom";
  }
  return "custom";
}

/// A Finsler metric function. `evaluate` maps coordinate jets to the jet of
/// L; it may consume `extra_fiber_orders` fiber orders (for instance when it
/// differentiates another metric internally), so callers lift it with that
/// many extra fiber orders and truncate.
struct MetricSpec {
  MetricFamily family = MetricFamily::custom;
  int dimension = 0;
  int extra_fiber_orders = 0;
  std::string label;
  JetScalarFunction evaluate;
};

namespace detail {

inline Jet quadratic_form(const MatrixField& a, const JetVars& v) {
  const int n = v.dimension();
  if (a.n != n) throw DimensionMismatchError("metric coefficient field has wrong size");
  Jet q = v.constant(0.0);
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) {
      q += a(i, j)(v.x) * v.y[static_cast<std::size_t>(i)] * v.y[static_cast<std::size_t>(j)];
    }
  }
  return q;
}

inline Jet linear_form(const std::vector<BaseField>& d, const JetVars& v) {
  if (static_cast<int>(d.size()) != v.dimension()) {
    throw DimensionMismatchError("one-form field has wrong size");
  }
  Jet s = v.constant(0.0);
  for (std::size_t i = 0; i < d.size(); ++i) s += d[i](v.x) * v.y[i];
  return s;
}

}  // namespace detail

inline MetricSpec euclidean_metric(int n) {
  return {MetricFamily::euclidean, n, 0, "euclidean", [](const JetVars& v) {
            Jet q = v.constant(0.0);
            for (const auto& yi : v.y) q += yi * yi;
            return sqrt(q);
          }};
}

/// L = sqrt(a_ij(x) y^i y^j)
inline MetricSpec riemannian_metric(MatrixField a, std::string label = "riemannian") {
  const int n = a.n;
  return {MetricFamily::riemannian, n, 0, std::move(label),
          [a = std::move(a)](const JetVars& v) { return sqrt(detail::quadratic_form(a, v)); }};
}

/// L = sqrt(a_ij y^i y^j) + d_i(x) y^i
inline MetricSpec randers_metric(MatrixField a, std::vector<BaseField> d,
                                 std::string label = "randers") {
  const int n = a.n;
  return {MetricFamily::randers, n, 0, std::move(label),
          [a = std::move(a), d = std::move(d)](const JetVars& v) {
            return sqrt(detail::quadratic_form(a, v)) + detail::linear_form(d, v);
          }};
}

/// L = a_ij y^i y^j / (d_i(x) y^i); admissible where d_i y^i > 0.
inline MetricSpec kropina_metric(MatrixField a, std::vector<BaseField> d,
                                 std::string label = "kropina") {
  const int n = a.n;
  return {MetricFamily::kropina, n, 0, std::move(label),
          [a = std::move(a), d = std::move(d)](const JetVars& v) {
            return detail::quadratic_form(a, v) / detail::linear_form(d, v);
          }};
}

inline MetricSpec custom_metric(int n, JetScalarFunction L, std::string label) {
  return {MetricFamily::custom, n, 0, std::move(label), std::move(L)};
}

/// L = (|y|^4 + eps(x) * sum y_i^4)^(1/4) with eps(x) = eps0 + eps1 * x1.
/// A non-Riemannian, non-Randers Minkowski-type metric, strongly convex for
/// small eps.
inline MetricSpec quartic_metric(int n, double eps0 = 0.3, double eps1 = 0.1) {
  return custom_metric(
      n,
      [eps0, eps1](const JetVars& v) {
        Jet q = v.constant(0.0);
        Jet s = v.constant(0.0);
        for (const auto& yi : v.y) {
          const Jet sq = yi * yi;
          q += sq;
          s += sq * sq;
        }
        const Jet eps = eps0 + eps1 * v.x[0];
        return pow(q * q + eps * s, 0.25);
      },
      "quartic");
}

/// Jet of L at p with the given caps.
inline Jet metric_jet(const MetricSpec& m, const PointState& p, Caps caps) {
  p.validate();
  if (m.dimension != p.dimension()) {
    throw DimensionMismatchError("metric dimension " + std::to_string(m.dimension) +
                                 " does not match point dimension " +
                                 std::to_string(p.dimension()));
  }
  const Caps work{caps.x, caps.y + m.extra_fiber_orders};
  const JetVars vars = make_vars(p, work);
  return m.evaluate(vars).truncated(caps);
}

inline double metric_value(const MetricSpec& m, const PointState& p) {
  return metric_jet(m, p, Caps{0, 0}).value();
}

/// Sample coefficient fields used by the zoo and tests.
inline MatrixField sample_riemannian_field(int n) {
  std::vector<std::vector<Polynomial>> a(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) {
      std::string s;
      if (i == j) {
        s = std::to_string(1.0 + 0.5 * i) + " + 0.1*x" + std::to_string((i + 1) % n + 1) + "^2";
      } else if (std::abs(i - j) == 1) {
        s = "0.1*x" + std::to_string(std::min(i, j) + 1) + " + 0.05";
      } else {
        s = "0";
      }
      a[static_cast<std::size_t>(i)].push_back(Polynomial::parse(s, n));
    }
  }
  return polynomial_matrix(a);
}

inline std::vector<BaseField> sample_one_form(int n, double scale) {
  std::vector<Polynomial> d;
  for (int i = 0; i < n; ++i) {
    const std::string s = std::to_string(scale * (i == 0 ? 1.0 : 0.3 / (i + 1))) + " + " +
                          std::to_string(0.1 * scale) + "*x" + std::to_string((i + 1) % n + 1);
    d.push_back(Polynomial::parse(s, n));
  }
  return polynomial_covector(d);
}

/// Named sample metrics in dimension n: one per family plus the quartic.
inline std::vector<MetricSpec> metric_zoo(int n) {
  return {euclidean_metric(n),
          riemannian_metric(sample_riemannian_field(n)),
          randers_metric(sample_riemannian_field(n), sample_one_form(n, 0.3)),
          kropina_metric(sample_riemannian_field(n), sample_one_form(n, 1.0)),
          quartic_metric(n)};
}

}  // namespace finslerlab
