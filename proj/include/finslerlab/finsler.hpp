#pragma once

/// \file
/// Fundamental tensors, spray, nonlinear, Berwald and Cartan connections of a
/// Finsler metric at a point, computed from jets of L and L^2; h- and
/// v-covariant derivatives of covector fields and the (v)hv-torsion.

#include <cmath>
#include <functional>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "finslerlab/dense.hpp"
#include "finslerlab/jet.hpp"
#include "finslerlab/metric.hpp"
#include "finslerlab/report.hpp"

namespace finslerlab {

inline constexpr double kDegenerateDeterminant = 1e-12;

struct GeometryOptions {
  bool berwald = false;
  bool landsberg = false;
};

/// Pointwise tensors of a Finsler space. Index conventions:
/// C(i,j,k) = C_ijk, C_up(i,j,k) = C^i_jk, dg_dx(i,j,k) = ∂_k g_ij,
/// nonlinear(i,j) = G^i_j, cartan(i,j,k) = F^i_jk, berwald(i,j,k) = G^i_jk,
/// landsberg(r,i,j) = P^r_ij.
struct FundamentalTensors {
  int n = 0;
  PointState point;
  double L = 0.0;
  Vec l;
  Mat L_ij;
  Tensor3 L_ijk;
  Mat g;
  Mat h;
  Mat g_inv;
  Tensor3 C;
  Tensor3 C_up;
  Tensor3 dg_dx;
  Vec spray;
  Mat nonlinear;
  Tensor3 cartan;
  std::optional<Tensor3> berwald;
  std::optional<Tensor3> landsberg;

  /// y_i = g_ij y^j
  [[nodiscard]] Vec y_lower() const { return matvec(g, point.y); }
  [[nodiscard]] Vec raise(const Vec& covector) const { return matvec(g_inv, covector); }
  [[nodiscard]] Vec lower(const Vec& vector) const { return matvec(g, vector); }
};

namespace detail {

inline double half_q(const Jet& q, std::initializer_list<int> xs, std::initializer_list<int> ys) {
  return 0.5 * q.partial(xs, ys);
}

}  // namespace detail

/// Every tensor of FundamentalTensors at p. Caps (1,3) suffice for the metric,
/// Cartan tensor and Cartan connection; Berwald coefficients and the
/// (v)hv-torsion need a fourth fiber order, requested through `opt`.
inline FundamentalTensors geometry(const MetricSpec& m, const PointState& p,
                                   GeometryOptions opt = {}) {
  p.validate();
  const int n = p.dimension();
  if (m.dimension != n) throw DimensionMismatchError("metric and point dimensions differ");
  const int Y = (opt.berwald || opt.landsberg) ? 4 : 3;
  const Caps caps{1, Y};
  const JetVars vars = make_vars(p, Caps{1, Y + m.extra_fiber_orders});
  const Jet Lj = m.evaluate(vars).truncated(caps);
  if (!(Lj.value() > 0.0)) {
    throw InadmissiblePointError("metric function L = " + std::to_string(Lj.value()) +
                                 " is not positive");
  }
  const Jet Q = Lj * Lj;

  FundamentalTensors t;
  t.n = n;
  t.point = p;
  t.L = Lj.value();
  t.l.assign(static_cast<std::size_t>(n), 0.0);
  t.L_ij = zeros(n, n);
  t.L_ijk = Tensor3(n);
  t.g = zeros(n, n);
  t.C = Tensor3(n);
  t.dg_dx = Tensor3(n);
  for (int i = 0; i < n; ++i) {
    t.l[static_cast<std::size_t>(i)] = Lj.partial({}, {i});
    for (int j = 0; j < n; ++j) {
      t.L_ij(i, j) = Lj.partial({}, {i, j});
      t.g(i, j) = detail::half_q(Q, {}, {i, j});
      for (int k = 0; k < n; ++k) {
        t.L_ijk(i, j, k) = Lj.partial({}, {i, j, k});
        t.C(i, j, k) = 0.25 * Q.partial({}, {i, j, k});
        t.dg_dx(i, j, k) = detail::half_q(Q, {k}, {i, j});
      }
    }
  }
  t.h = t.L * t.L_ij;
  if (std::abs(determinant(t.g)) < kDegenerateDeterminant) {
    throw DegenerateMetricError("metric tensor is degenerate (|det g| < 1e-12)");
  }

  // Jet-valued metric on the fiber, its inverse, and the spray
  // G^i = 1/4 g^il (y^m ∂_m ∂̇_l L² - ∂_l L²).
  const Caps fiber{0, Y - 2};
  const Jet zero = Jet(vars.family, fiber, 0.0);
  Matrix<Jet> gJ(n, n, zero);
  std::vector<Jet> dQ_dy;
  for (int i = 0; i < n; ++i) dQ_dy.push_back(Q.d_dy(i));
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) gJ(i, j) = (0.5 * dQ_dy[static_cast<std::size_t>(i)].d_dy(j)).truncated(fiber);
  const Matrix<Jet> ginvJ = inverse(gJ);
  std::vector<Jet> W;
  for (int l = 0; l < n; ++l) {
    Jet w = -Q.d_dx(l);
    for (int k = 0; k < n; ++k) w += vars.y[static_cast<std::size_t>(k)] * dQ_dy[static_cast<std::size_t>(l)].d_dx(k);
    W.push_back(0.25 * w);
  }
  std::vector<Jet> G;
  for (int i = 0; i < n; ++i) {
    Jet s = zero;
    for (int l = 0; l < n; ++l) s += ginvJ(i, l) * W[static_cast<std::size_t>(l)];
    G.push_back(s);
  }

  t.g_inv = zeros(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) t.g_inv(i, j) = ginvJ(i, j).value();
  t.C_up = Tensor3(n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j)
      for (int k = 0; k < n; ++k)
        for (int s = 0; s < n; ++s) t.C_up(i, j, k) += t.g_inv(i, s) * t.C(s, j, k);

  t.spray.assign(static_cast<std::size_t>(n), 0.0);
  t.nonlinear = zeros(n, n);
  if (opt.berwald || opt.landsberg) t.berwald = Tensor3(n);
  for (int i = 0; i < n; ++i) {
    t.spray[static_cast<std::size_t>(i)] = G[static_cast<std::size_t>(i)].value();
    for (int j = 0; j < n; ++j) {
      const Jet Nij = G[static_cast<std::size_t>(i)].d_dy(j);
      t.nonlinear(i, j) = Nij.value();
      if (t.berwald) {
        for (int k = 0; k < n; ++k) (*t.berwald)(i, j, k) = Nij.partial({}, {k});
      }
    }
  }

  // Cartan connection: F^i_jk = 1/2 g^is (δ_j g_sk + δ_k g_js - δ_s g_jk),
  // δ_k g_ij = ∂_k g_ij - G^r_k ∂̇_r g_ij.
  Tensor3 delta_g(n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j)
      for (int k = 0; k < n; ++k) {
        double v = t.dg_dx(i, j, k);
        for (int r = 0; r < n; ++r) v -= t.nonlinear(r, k) * 2.0 * t.C(i, j, r);
        delta_g(i, j, k) = v;
      }
  t.cartan = Tensor3(n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j)
      for (int k = 0; k < n; ++k) {
        double v = 0.0;
        for (int s = 0; s < n; ++s) {
          v += t.g_inv(i, s) * (delta_g(s, k, j) + delta_g(j, s, k) - delta_g(j, k, s));
        }
        t.cartan(i, j, k) = 0.5 * v;
      }

  if (opt.landsberg) {
    // P_sij = C_sij|k y^k with the Cartan connection, using F^t_sk y^k = G^t_s.
    Tensor3 P(n);
    for (int s = 0; s < n; ++s)
      for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) {
          double v = 0.0;
          for (int k = 0; k < n; ++k) {
            v += p.y[static_cast<std::size_t>(k)] * 0.25 * Q.partial({k}, {s, i, j});
            v -= 2.0 * t.spray[static_cast<std::size_t>(k)] * 0.25 * Q.partial({}, {s, i, j, k});
            v -= t.nonlinear(k, s) * t.C(k, i, j) + t.nonlinear(k, i) * t.C(s, k, j) +
                 t.nonlinear(k, j) * t.C(s, i, k);
          }
          P(s, i, j) = v;
        }
    Tensor3 Pup(n);
    for (int r = 0; r < n; ++r)
      for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j)
          for (int s = 0; s < n; ++s) Pup(r, i, j) += t.g_inv(r, s) * P(s, i, j);
    t.landsberg = Pup;
  }
  return t;
}

/// Metric, angular metric, Cartan tensor and inverse metric (and, since they
/// come from the same jets, the connections).
inline FundamentalTensors fundamental_tensors(const MetricSpec& m, const PointState& p) {
  return geometry(m, p);
}

/// Spray, nonlinear connection, Berwald and Cartan connection coefficients.
inline FundamentalTensors spray_and_connections(const MetricSpec& m, const PointState& p) {
  return geometry(m, p, GeometryOptions{true, false});
}

/// A covector field X_i(x, y) written against jet arithmetic. The evaluator
/// may consume `extra_fiber_orders` fiber orders.
struct CovectorField {
  int extra_fiber_orders = 0;
  std::function<std::vector<Jet>(const JetVars&)> evaluate;
};

/// Value and first partials of a covector field: dx(i,j) = ∂_j X_i,
/// dy(i,j) = ∂̇_j X_i.
struct CovectorData {
  Vec value;
  Mat dx;
  Mat dy;
};

inline CovectorData covector_data(const CovectorField& X, const PointState& p) {
  const int n = p.dimension();
  const JetVars vars = make_vars(p, Caps{1, 1 + X.extra_fiber_orders});
  const auto comps = X.evaluate(vars);
  if (static_cast<int>(comps.size()) != n) {
    throw DimensionMismatchError("covector field has " + std::to_string(comps.size()) +
                                 " components, expected " + std::to_string(n));
  }
  CovectorData d{Vec(static_cast<std::size_t>(n)), zeros(n, n), zeros(n, n)};
  for (int i = 0; i < n; ++i) {
    const Jet& c = comps[static_cast<std::size_t>(i)];
    d.value[static_cast<std::size_t>(i)] = c.value();
    for (int j = 0; j < n; ++j) {
      d.dx(i, j) = c.partial({j}, {});
      d.dy(i, j) = c.partial({}, {j});
    }
  }
  return d;
}

/// X_{i|j} = ∂_j X_i - (∂̇_h X_i) G^h_j - F^r_ij X_r
inline Mat h_covariant(const CovectorData& X, const FundamentalTensors& t) {
  const int n = t.n;
  Mat out = zeros(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) {
      double v = X.dx(i, j);
      for (int h = 0; h < n; ++h) v -= X.dy(i, h) * t.nonlinear(h, j);
      for (int r = 0; r < n; ++r) v -= t.cartan(r, i, j) * X.value[static_cast<std::size_t>(r)];
      out(i, j) = v;
    }
  return out;
}

/// X_i|_j = ∂̇_j X_i - C^r_ij X_r
inline Mat v_covariant(const CovectorData& X, const FundamentalTensors& t) {
  const int n = t.n;
  Mat out = zeros(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) {
      double v = X.dy(i, j);
      for (int r = 0; r < n; ++r) v -= t.C_up(r, i, j) * X.value[static_cast<std::size_t>(r)];
      out(i, j) = v;
    }
  return out;
}

inline Mat h_covariant(const CovectorField& X, const MetricSpec& m, const PointState& p) {
  return h_covariant(covector_data(X, p), geometry(m, p));
}

inline Mat v_covariant(const CovectorField& X, const MetricSpec& m, const PointState& p) {
  return v_covariant(covector_data(X, p), geometry(m, p));
}

/// l_i = ∂̇_i L as a covector field.
inline CovectorField normalized_supporting_element(const MetricSpec& m) {
  return {m.extra_fiber_orders + 1, [m](const JetVars& v) {
            const Jet L = m.evaluate(v);
            std::vector<Jet> out;
            for (int i = 0; i < v.dimension(); ++i) out.push_back(L.d_dy(i));
            return out;
          }};
}

/// y_i = g_ij y^j = 1/2 ∂̇_i L² as a covector field.
inline CovectorField lowered_supporting_element(const MetricSpec& m) {
  return {m.extra_fiber_orders + 1, [m](const JetVars& v) {
            const Jet L = m.evaluate(v);
            const Jet Q = L * L;
            std::vector<Jet> out;
            for (int i = 0; i < v.dimension(); ++i) out.push_back(0.5 * Q.d_dy(i));
            return out;
          }};
}

/// A covector field depending on x only.
inline CovectorField base_covector_field(std::vector<BaseField> c) {
  return {0, [c = std::move(c)](const JetVars& v) {
            std::vector<Jet> out;
            for (const auto& f : c) out.push_back(f(v.x));
            return out;
          }};
}

struct LandsbergResult {
  Tensor3 P;
  double norm = 0.0;
  bool is_landsberg = false;
};

/// (v)hv-torsion P^r_ij = C^r_ij|k y^k at p.
inline LandsbergResult landsberg_tensor(const MetricSpec& m, const PointState& p,
                                        double tol = 1e-8) {
  const auto t = geometry(m, p, GeometryOptions{false, true});
  LandsbergResult r{*t.landsberg, norm_inf(*t.landsberg), false};
  r.is_landsberg = r.norm < tol;
  return r;
}

/// Euler, homogeneity, inverse and metricity invariants of the base space at p.
inline std::vector<IdentityReport> verify_base_space(const MetricSpec& m, const PointState& p,
                                                     const Tolerances& tol = {}) {
  const auto t = geometry(m, p);
  const int n = t.n;
  const double L2 = t.L * t.L;
  std::vector<IdentityReport> out;
  {
    std::vector<double> lhs{dot(t.l, p.y), bilinear(p.y, t.g, p.y)};
    std::vector<double> rhs{t.L, L2};
    for (double v : matvec(t.h, p.y)) {
      lhs.push_back(v);
      rhs.push_back(0.0);
    }
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j) {
        double cy = 0.0;
        for (int k = 0; k < n; ++k) cy += t.C(i, j, k) * p.y[static_cast<std::size_t>(k)];
        lhs.push_back(cy);
        rhs.push_back(0.0);
      }
    out.push_back(compare("base.euler", tags_of("base.euler"), lhs, rhs, tol.pure, tol.pure * (1 + L2), p));
  }
  {
    double worst = 0.0;
    for (double lambda : {0.5, 2.0, 7.0}) {
      PointState q = p;
      for (auto& v : q.y) v *= lambda;
      const auto tq = fundamental_tensors(m, q);
      worst = std::max({worst, max_abs_diff(tq.g, t.g), std::abs(tq.L - lambda * t.L) / lambda});
    }
    auto r = compare("base.homogeneity", tags_of("base.homogeneity"), std::vector<double>{worst},
                     std::vector<double>{0.0}, tol.pure, tol.pure * (1 + norm_inf(t.g)), p);
    out.push_back(r);
  }
  out.push_back(compare("base.inverse", tags_of("base.inverse"), matmul(t.g_inv, t.g), identity(n), tol.pure,
                        tol.pure, p));
  // g_ij|k = d_k g_ij - G^r_k dot_r g_ij - F^r_ik g_rj - F^r_jk g_ir
  // g_ij|_k = dot_k g_ij - C^r_ik g_rj - C^r_jk g_ir, with dot_k g_ij = 2 C_ijk
  Tensor3 hm(n, n, n, 0.0), vm(n, n, n, 0.0);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j)
      for (int k = 0; k < n; ++k) {
        double h = t.dg_dx(i, j, k), v = 2 * t.C(i, j, k);
        for (int r = 0; r < n; ++r) {
          h -= t.nonlinear(r, k) * 2 * t.C(i, j, r) + t.cartan(r, i, k) * t.g(r, j) + t.cartan(r, j, k) * t.g(i, r);
          v -= t.C_up(r, i, k) * t.g(r, j) + t.C_up(r, j, k) * t.g(i, r);
        }
        hm(i, j, k) = h;
        vm(i, j, k) = v;
      }
  const double hscale = 1 + norm_inf(t.g) * (norm_inf(t.cartan) + norm_inf(t.nonlinear) * norm_inf(t.C));
  const double vscale = 1 + norm_inf(t.g) * norm_inf(t.C_up);
  const Tensor3 zero(n, n, n, 0.0);
  out.push_back(compare("base.h-metricity", tags_of("base.h-metricity"), hm, zero, tol.connection,
                        tol.connection * hscale, p));
  out.push_back(compare("base.v-metricity", tags_of("base.v-metricity"), vm, zero, tol.connection,
                        tol.connection * vscale, p));
  return out;
}

/// L_ijk = (2/L) C_ijk - (1/L^2)(h_ij l_k + h_jk l_i + h_ki l_j), a pure
/// base-space identity.
inline IdentityReport verify_angular_identity(const FundamentalTensors& t, const Tolerances& tol = {}) {
  const int n = t.n;
  Tensor3 rhs(n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j)
      for (int k = 0; k < n; ++k) {
        const auto l = [&](int a) { return t.l[static_cast<std::size_t>(a)]; };
        rhs(i, j, k) = 2 / t.L * t.C(i, j, k) - 1 / (t.L * t.L) * (t.h(i, j) * l(k) + t.h(j, k) * l(i) + t.h(k, i) * l(j));
      }
  return compare("3.5", tags_of("3.5"), t.L_ijk, rhs, tol.pure, tol.zero, t.point);
}

}  // namespace finslerlab
