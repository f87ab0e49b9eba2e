#pragma once

/// \file
/// h-vector fields b_i(x, y): the explicit family b = ρ l + c(x), the
/// classical b = c(x), and a constrained point-jet mode in which the value of
/// b, its h-covariant derivative b_{i|j} = E_ij + F_ij and the derivative of
/// ρ are prescribed at an anchor point while ∂̇_j b_i = (ρ/L) h_ij is forced.

#include <cmath>
#include <optional>
#include <random>
#include <string>
#include <utility>
#include <vector>

#include "finslerlab/dense.hpp"
#include "finslerlab/finsler.hpp"
#include "finslerlab/jet.hpp"
#include "finslerlab/metric.hpp"

namespace finslerlab {

inline constexpr double kBetaGuard = 1e-10;
inline constexpr double kCoefficientGuard = 1e-10;

enum class HVectorMode { explicit_family, function_of_x, constrained_jet };

inline std::string to_string(HVectorMode m) {
  switch (m) {
    case HVectorMode::explicit_family: return "explicit";
    case HVectorMode::function_of_x: return "function_of_x";
    case HVectorMode::constrained_jet: return "constrained_jet";
  }
  return "explicit";
}

/// Slots of a constrained point jet at `anchor`. The realized field is
///   b_i = ρ(x) l_i(x, y) + c_i(x),
///   ρ(x) = ρ + ρ_k Δx^k + ½ ρ_kl Δx^k Δx^l,
///   c_i(x) = c0_i + J_ij Δx^j + ½ K_ijk Δx^j Δx^k,   Δx = x - x_anchor,
/// with c0 and J solved so that b(p) = b and b_{i|j}(p) = E_ij + F_ij.
/// ρ_k (non-gradient mode only), ρ_kl and K are free slots.
struct ConstrainedJetInput {
  PointState anchor;
  Vec b;
  double rho = 0.0;
  Mat E;
  Mat F;
  Vec rho_k;
  bool gradient = false;
  Mat rho_kl;
  std::vector<Mat> c_kl;
};

struct HVectorSpec {
  HVectorMode mode = HVectorMode::explicit_family;
  double rho = 0.0;
  std::vector<BaseField> c;
  ConstrainedJetInput jet;
  /// Constant covector subtracted from b (tangency projection of the
  /// explicit family); empty when unused.
  Vec shift;

  static HVectorSpec explicit_family(double rho, std::vector<BaseField> c) {
    HVectorSpec s;
    s.mode = HVectorMode::explicit_family;
    s.rho = rho;
    s.c = std::move(c);
    return s;
  }

  static HVectorSpec function_of_x(std::vector<BaseField> c) {
    HVectorSpec s;
    s.mode = HVectorMode::function_of_x;
    s.c = std::move(c);
    return s;
  }

  static HVectorSpec constrained(ConstrainedJetInput in) {
    HVectorSpec s;
    s.mode = HVectorMode::constrained_jet;
    s.rho = in.rho;
    s.jet = std::move(in);
    return s;
  }
};

/// The realized field b_i(x, y) and the scalar ρ(x).
struct HVectorField {
  CovectorField b;
  BaseField rho;
};

namespace detail {

inline void require_square(const Mat& a, int n, const char* what) {
  if (a.rows() != n || a.cols() != n) {
    throw DimensionMismatchError(std::string(what) + " must be " + std::to_string(n) + "x" +
                                 std::to_string(n));
  }
}

inline ConstrainedJetInput normalized(ConstrainedJetInput in) {
  const int n = in.anchor.dimension();
  if (static_cast<int>(in.b.size()) != n) throw DimensionMismatchError("b must have n components");
  if (in.E.rows() == 0) in.E = zeros(n, n);
  if (in.F.rows() == 0) in.F = zeros(n, n);
  if (in.rho_k.empty()) in.rho_k.assign(static_cast<std::size_t>(n), 0.0);
  if (in.rho_kl.rows() == 0) in.rho_kl = zeros(n, n);
  if (in.c_kl.empty()) in.c_kl.assign(static_cast<std::size_t>(n), zeros(n, n));
  require_square(in.E, n, "E");
  require_square(in.F, n, "F");
  require_square(in.rho_kl, n, "rho_kl");
  if (static_cast<int>(in.rho_k.size()) != n) throw DimensionMismatchError("rho_k must have n components");
  const double scale = 1.0 + norm_inf(in.E) + norm_inf(in.F);
  if (max_abs_diff(in.E, transpose(in.E)) > 1e-12 * scale) {
    throw HypothesisConflictError("E_ij must be symmetric");
  }
  if (max_abs_diff(in.F, -1.0 * transpose(in.F)) > 1e-12 * scale) {
    throw HypothesisConflictError("F_ij must be antisymmetric");
  }
  if (in.gradient && (norm_inf(in.F) != 0.0 || norm_inf(in.rho_k) != 0.0)) {
    throw HypothesisConflictError("gradient h-vector requires F_ij = 0 and constant rho");
  }
  return in;
}

}  // namespace detail

/// Builds the field b_i(x, y) of `h` over the base metric `m`.
inline HVectorField realize(const HVectorSpec& h, const MetricSpec& m) {
  const int n = m.dimension;
  const Vec shift = h.shift;
  if (h.mode != HVectorMode::constrained_jet) {
    if (static_cast<int>(h.c.size()) != n) throw DimensionMismatchError("c must have n components");
    const double rho = h.mode == HVectorMode::function_of_x ? 0.0 : h.rho;
    CovectorField b{m.extra_fiber_orders + 1, [m, c = h.c, rho, shift](const JetVars& v) {
                      std::vector<Jet> out;
                      const Jet L = m.evaluate(v);
                      for (std::size_t i = 0; i < c.size(); ++i) {
                        Jet bi = c[i](v.x);
                        if (rho != 0.0) bi += rho * L.d_dy(static_cast<int>(i));
                        if (!shift.empty()) bi -= shift[i];
                        out.push_back(bi);
                      }
                      return out;
                    }};
    return {b, constant_field(rho)};
  }

  const ConstrainedJetInput in = detail::normalized(h.jet);
  if (in.anchor.dimension() != n) throw DimensionMismatchError("anchor dimension differs from metric");
  const auto t = geometry(m, in.anchor);
  Vec c0 = in.b - in.rho * t.l;
  Mat J = in.E + in.F;
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) {
      J(i, j) -= t.l[static_cast<std::size_t>(i)] * in.rho_k[static_cast<std::size_t>(j)];
      for (int r = 0; r < n; ++r) J(i, j) += t.cartan(r, i, j) * c0[static_cast<std::size_t>(r)];
    }
  const Vec x0 = in.anchor.x;
  auto rho_field = [x0, in](const std::vector<Jet>& x) {
    const int dim = static_cast<int>(x.size());
    Jet r = x.front() * 0.0 + in.rho;
    for (int k = 0; k < dim; ++k) {
      const Jet dk = x[static_cast<std::size_t>(k)] - x0[static_cast<std::size_t>(k)];
      r += in.rho_k[static_cast<std::size_t>(k)] * dk;
      for (int l = 0; l < dim; ++l) {
        r += 0.5 * in.rho_kl(k, l) * dk * (x[static_cast<std::size_t>(l)] - x0[static_cast<std::size_t>(l)]);
      }
    }
    return r;
  };
  CovectorField b{m.extra_fiber_orders + 1,
                  [m, x0, c0, J, in, rho_field, shift](const JetVars& v) {
                    const int dim = v.dimension();
                    const Jet L = m.evaluate(v);
                    const Jet rho = rho_field(v.x);
                    std::vector<Jet> dx;
                    for (int k = 0; k < dim; ++k) dx.push_back(v.x[static_cast<std::size_t>(k)] - x0[static_cast<std::size_t>(k)]);
                    std::vector<Jet> out;
                    for (int i = 0; i < dim; ++i) {
                      Jet bi = rho * L.d_dy(i) + c0[static_cast<std::size_t>(i)];
                      for (int j = 0; j < dim; ++j) {
                        bi += J(i, j) * dx[static_cast<std::size_t>(j)];
                        for (int k = 0; k < dim; ++k) {
                          bi += 0.5 * in.c_kl[static_cast<std::size_t>(i)](j, k) * dx[static_cast<std::size_t>(j)] * dx[static_cast<std::size_t>(k)];
                        }
                      }
                      if (!shift.empty()) bi -= shift[static_cast<std::size_t>(i)];
                      out.push_back(bi);
                    }
                    return out;
                  }};
  return {b, rho_field};
}

/// b_{i|j} split into its symmetric and antisymmetric parts, β_j = b_{i|j} y^i
/// and ρ_k = ∂_k ρ.
struct CovariantData {
  Mat bij;
  Mat E;
  Mat F;
  Vec beta_j;
  Vec rho_k;
};

/// Scalars and vectors derived from b at a point.
struct DerivedScalars {
  double rho = 0.0;
  double beta = 0.0;
  double tau = 0.0;
  Vec m;
  Vec b_up;
  Vec m_up;
  Vec l_up;
  double b2 = 0.0;
  double m2 = 0.0;
  double beta0 = 0.0;
  double rho0 = 0.0;
  double F_beta0 = 0.0;
  /// 2 b²/β - ρ/L
  double denominator = 0.0;
  double A = 0.0;
};

struct HVectorState {
  HVectorMode mode = HVectorMode::explicit_family;
  FundamentalTensors base;
  CovectorData b;
  CovariantData cov;
  DerivedScalars s;
};

inline CovariantData covariant_data(const CovectorData& b, const FundamentalTensors& t, const Vec& rho_k) {
  CovariantData d;
  d.bij = h_covariant(b, t);
  d.E = 0.5 * (d.bij + transpose(d.bij));
  d.F = 0.5 * (d.bij - transpose(d.bij));
  d.beta_j = vecmat(t.point.y, d.bij);
  d.rho_k = rho_k;
  return d;
}

/// All derived quantities of h at p.
inline HVectorState evaluate(const HVectorSpec& h, const MetricSpec& m, const PointState& p) {
  const HVectorField field = realize(h, m);
  HVectorState st;
  st.mode = h.mode;
  st.base = geometry(m, p, GeometryOptions{true, false});
  st.b = covector_data(field.b, p);
  const int n = p.dimension();
  const JetVars vars = make_vars(p, Caps{1, 0});
  const Jet rho = field.rho(vars.x);
  Vec rho_k(static_cast<std::size_t>(n));
  for (int k = 0; k < n; ++k) rho_k[static_cast<std::size_t>(k)] = rho.partial({k}, {});
  st.cov = covariant_data(st.b, st.base, rho_k);

  const auto& t = st.base;
  auto& s = st.s;
  s.rho = rho.value();
  s.beta = dot(st.b.value, p.y);
  if (std::abs(s.beta) < kBetaGuard) {
    throw InadmissiblePointError("beta = b_i y^i vanishes at the evaluation point");
  }
  s.tau = t.L / s.beta;
  s.m = st.b.value - (1.0 / s.tau) * t.l;
  s.b_up = t.raise(st.b.value);
  s.m_up = t.raise(s.m);
  s.l_up = t.raise(t.l);
  s.b2 = dot(s.b_up, st.b.value);
  s.m2 = dot(s.m_up, s.m);
  s.beta0 = dot(st.cov.beta_j, p.y);
  s.rho0 = dot(rho_k, p.y);
  s.F_beta0 = bilinear(s.b_up, st.cov.F, p.y);
  s.denominator = 2.0 * s.b2 / s.beta - s.rho / t.L;
  if (std::abs(s.denominator) < kCoefficientGuard) {
    throw SingularCoefficientError("2 b^2/beta - rho/L vanishes");
  }
  s.A = (2.0 / s.beta * s.beta0 * s.m2 - 2.0 * s.F_beta0) / s.denominator;
  return st;
}

struct HVectorResiduals {
  /// ‖L C^h_ij b_h - ρ h_ij‖∞
  double r1 = 0.0;
  /// ‖L ∂̇_j b_i - ρ h_ij‖∞
  double r2 = 0.0;
};

inline HVectorResiduals hvector_residuals(const HVectorState& st) {
  const auto& t = st.base;
  const int n = t.n;
  HVectorResiduals r;
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) {
      double cb = 0.0;
      for (int h = 0; h < n; ++h) cb += t.C_up(h, i, j) * st.b.value[static_cast<std::size_t>(h)];
      r.r1 = std::max(r.r1, std::abs(t.L * cb - st.s.rho * t.h(i, j)));
      r.r2 = std::max(r.r2, std::abs(t.L * st.b.dy(i, j) - st.s.rho * t.h(i, j)));
    }
  return r;
}

inline HVectorResiduals hvector_residuals(const HVectorSpec& h, const MetricSpec& m, const PointState& p) {
  return hvector_residuals(evaluate(h, m, p));
}

/// Least-squares ρ for L C^h_ij b_h = ρ h_ij at the anchor; with it the
/// condition holds exactly in dimension two.
inline double fitted_rho(const MetricSpec& m, const PointState& p, const Vec& b) {
  const auto t = geometry(m, p);
  const int n = t.n;
  double num = 0.0, den = 0.0;
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) {
      double cb = 0.0;
      for (int h = 0; h < n; ++h) cb += t.C_up(h, i, j) * b[static_cast<std::size_t>(h)];
      num += t.L * cb * t.h(i, j);
      den += t.h(i, j) * t.h(i, j);
    }
  return num / den;
}

/// Draws every free slot of a constrained jet: ρ_k (unless gradient), ρ_kl
/// and K_ijk, uniformly in [-scale, scale] and symmetrized.
inline void randomize_free_slots(ConstrainedJetInput& in, std::mt19937_64& rng, double scale = 0.5) {
  const int n = in.anchor.dimension();
  std::uniform_real_distribution<double> u(-scale, scale);
  in.rho_k.assign(static_cast<std::size_t>(n), 0.0);
  if (!in.gradient) {
    for (auto& v : in.rho_k) v = u(rng);
  }
  in.rho_kl = zeros(n, n);
  in.c_kl.assign(static_cast<std::size_t>(n), zeros(n, n));
  for (int k = 0; k < n; ++k)
    for (int l = k; l < n; ++l) {
      in.rho_kl(k, l) = in.rho_kl(l, k) = u(rng);
      for (int i = 0; i < n; ++i) in.c_kl[static_cast<std::size_t>(i)](k, l) = in.c_kl[static_cast<std::size_t>(i)](l, k) = u(rng);
    }
}

/// b - (b_j N^j) N_i / (N^k N_k): removes the normal component of a covector.
inline Vec project_tangent(const Vec& b, const Vec& N_up, const Vec& N_low) {
  return b - (dot(b, N_up) / dot(N_up, N_low)) * N_low;
}

}  // namespace finslerlab
