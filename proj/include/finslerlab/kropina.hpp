#pragma once

/// \file
/// The Kropina change *L = L²/β with β = b_i(x, y) y^i: closed forms of the
/// changed fundamental tensors, the difference tensors D of the Cartan
/// connections, and their verification against jets of *L.

#include <algorithm>
#include <cmath>
#include <string>
#include <utility>
#include <vector>

#include "finslerlab/dense.hpp"
#include "finslerlab/finsler.hpp"
#include "finslerlab/hfield.hpp"
#include "finslerlab/metric.hpp"
#include "finslerlab/report.hpp"

namespace finslerlab {

namespace detail {

inline double at(const Vec& v, int i) { return v[static_cast<std::size_t>(i)]; }

inline void require_nonzero(double v, const char* what) {
  if (std::abs(v) < kCoefficientGuard) throw SingularCoefficientError(std::string(what) + " vanishes");
}

}  // namespace detail

/// A base metric, an h-vector over it, and the changed metric.
struct ChangedSpace {
  MetricSpec base;
  HVectorSpec h;
  HVectorField field;
  MetricSpec starred;
};

inline ChangedSpace kropina_change(MetricSpec base, HVectorSpec h) {
  ChangedSpace cs{std::move(base), std::move(h), {}, {}};
  cs.field = realize(cs.h, cs.base);
  const MetricSpec& m = cs.base;
  const CovectorField b = cs.field.b;
  cs.starred = MetricSpec{MetricFamily::custom, m.dimension, b.extra_fiber_orders, "*" + m.label,
                          [m, b](const JetVars& v) {
                            const Jet L = m.evaluate(v);
                            const auto bs = b.evaluate(v);
                            Jet beta = v.constant(0.0);
                            for (std::size_t i = 0; i < bs.size(); ++i) beta += bs[i] * v.y[i];
                            if (std::abs(beta.value()) < kBetaGuard) {
                              throw InadmissiblePointError("beta = b_i y^i vanishes at the evaluation point");
                            }
                            return L * L / beta;
                          }};
  return cs;
}

/// Fundamental quantities of the changed metric.
struct StarredForms {
  double L = 0.0;
  Vec l;
  Mat L_ij;
  Tensor3 L_ijk;
  Mat g;
  Tensor3 C;
  Mat g_inv;
};

/// Printed variant of the changed Cartan tensor: τ² where τ⁴ belongs in the
/// cubic m m m term.
struct CartanVariants {
  Tensor3 corrected;
  Tensor3 printed;
};

inline CartanVariants starred_cartan_variants(const HVectorState& st) {
  const auto& t = st.base;
  const auto& s = st.s;
  const int n = t.n;
  const double tau = s.tau, rho = s.rho, beta = s.beta;
  const double c0 = 2 * tau * tau - rho * tau * tau * tau;
  const double c1 = tau * tau / (2 * beta) * (4 - 3 * rho * tau);
  CartanVariants out{Tensor3(n), Tensor3(n)};
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j)
      for (int k = 0; k < n; ++k) {
        const double mi = detail::at(s.m, i), mj = detail::at(s.m, j), mk = detail::at(s.m, k);
        const double base = c0 * t.C(i, j, k) - c1 * (t.h(i, j) * mk + t.h(j, k) * mi + t.h(k, i) * mj);
        const double mmm = 6.0 / beta * mi * mj * mk;
        out.corrected(i, j, k) = base - std::pow(tau, 4) * mmm;
        out.printed(i, j, k) = base - tau * tau * mmm;
      }
  return out;
}

/// Closed forms of *L, *l, *L_ij, *L_ijk, *g, *C and *g^{-1} in terms of the
/// base tensors and b.
inline StarredForms starred_closed_forms(const HVectorState& st) {
  const auto& t = st.base;
  const auto& s = st.s;
  const int n = t.n;
  const double tau = s.tau, rho = s.rho, beta = s.beta, L = t.L;
  const Vec& b = st.b.value;
  const Vec& l = t.l;
  const Vec& m = s.m;
  using detail::at;

  detail::require_nonzero(2 - rho * tau, "2 - rho tau");
  detail::require_nonzero(2 * s.b2 * tau - rho, "2 b^2 tau - rho");

  StarredForms f;
  f.L = L * L / beta;
  f.l = 2 * tau * l - tau * tau * b;
  const double k1 = 2 * tau - rho * tau * tau;
  f.L_ij = zeros(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) f.L_ij(i, j) = k1 * t.L_ij(i, j) + 2 * tau * tau / beta * at(m, i) * at(m, j);

  f.L_ijk = Tensor3(n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j)
      for (int k = 0; k < n; ++k) {
        const double mi = at(m, i), mj = at(m, j), mk = at(m, k);
        f.L_ijk(i, j, k) =
            k1 * t.L_ijk(i, j, k) +
            2 * tau / beta * (rho * tau - 1) * (mi * t.L_ij(j, k) + mj * t.L_ij(i, k) + mk * t.L_ij(i, j)) -
            2 * tau * tau / (L * beta) * (mi * mj * at(l, k) + mj * mk * at(l, i) + mk * mi * at(l, j)) -
            6 * tau * tau / (beta * beta) * mi * mj * mk;
      }

  const double t2 = tau * tau, t3 = t2 * tau, t4 = t3 * tau;
  f.g = zeros(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) {
      f.g(i, j) = (2 * t2 - rho * t3) * t.g(i, j) + 3 * t4 * at(b, i) * at(b, j) -
                  4 * t3 * (at(l, i) * at(b, j) + at(b, i) * at(l, j)) +
                  (4 * t2 + rho * t3) * at(l, i) * at(l, j);
    }

  f.C = starred_cartan_variants(st).corrected;

  const Vec& bu = s.b_up;
  const Vec& lu = s.l_up;
  const double q = 2 * s.b2 * tau - rho;
  const double c_ll =
      (3 * rho * s.b2 * t3 - rho * rho * t2 - 4 * s.b2 * t2 - 2 * rho * tau + 8) / (tau * q);
  f.g_inv = zeros(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) {
      f.g_inv(i, j) = (t.g_inv(i, j) - 2 * tau / q * at(bu, i) * at(bu, j) +
                       (4 - rho * tau) / q * (at(lu, i) * at(bu, j) + at(bu, i) * at(lu, j)) -
                       c_ll * at(lu, i) * at(lu, j)) /
                      (2 * t2 - rho * t3);
    }
  return f;
}

/// The same quantities read off the jets of *L.
inline StarredForms starred_jet_forms(const FundamentalTensors& t) {
  return {t.L, t.l, t.L_ij, t.L_ijk, t.g, t.C, t.g_inv};
}

inline StarredForms starred_jet_forms(const ChangedSpace& cs, const PointState& p) {
  return starred_jet_forms(geometry(cs.starred, p));
}

/// Hypothesis flags of an h-vector state, each judged at one point.
struct RegimeFlags {
  HVectorResiduals residuals;
  bool h12 = false;
  bool hfull = false;
  bool rho0 = false;
  bool parallel = false;
  bool gradient = false;
};

inline RegimeFlags regime(const HVectorState& st, double tol = 1e-8) {
  RegimeFlags f;
  f.residuals = hvector_residuals(st);
  const double scale = 1.0 + std::abs(st.s.rho) * norm_inf(st.base.h) + st.base.L * norm_inf(st.b.dy);
  f.h12 = f.residuals.r2 <= tol * scale;
  f.hfull = f.h12 && f.residuals.r1 <= tol * scale;
  const double drho = norm_inf(st.cov.rho_k);
  f.rho0 = st.s.rho == 0.0 && drho == 0.0;
  const double bscale = 1.0 + norm_inf(st.b.value);
  f.parallel = norm_inf(st.cov.bij) <= 1e-10 * bscale && drho <= 1e-12;
  f.gradient = norm_inf(st.cov.F) <= 1e-10 * bscale && drho <= 1e-12;
  return f;
}

inline bool satisfied(Tag tag, const RegimeFlags& f) {
  switch (tag) {
    case Tag::NONE: return true;
    case Tag::H12: return f.h12;
    case Tag::HFULL: return f.hfull;
    case Tag::RHO0: return f.rho0 && f.hfull;
    case Tag::PARALLEL: return f.parallel;
    case Tag::GRADIENT: return f.gradient;
    default: return true;
  }
}

inline bool satisfied(const std::vector<Tag>& tags, const RegimeFlags& f) {
  for (Tag t : tags)
    if (!satisfied(t, f)) return false;
  return true;
}

/// Checks of the closed forms against jets of *L at p. The base identity for
/// L_ijk carries no hypothesis; the rest need ∂̇_j b_i = (ρ/L) h_ij.
inline std::vector<IdentityReport> verify_changed_tensors(const ChangedSpace& cs, const PointState& p,
                                                          const Tolerances& tol = {}) {
  const HVectorState st = evaluate(cs.h, cs.base, p);
  const RegimeFlags flags = regime(st, tol.connection);
  const StarredForms closed = starred_closed_forms(st);
  const StarredForms jets = starred_jet_forms(cs, p);
  const auto& t = st.base;
  const int n = t.n;

  std::vector<Tag> tags{Tag::H12};
  if (flags.rho0) tags.push_back(Tag::RHO0);
  const bool met = flags.h12;
  std::vector<IdentityReport> out;
  auto push = [&](IdentityReport r) {
    r.aux["r1"] = flags.residuals.r1;
    r.aux["r2"] = flags.residuals.r2;
    out.push_back(std::move(r));
  };
  push(compare("3.1", tags, closed.L_ij, jets.L_ij, tol.pure, tol.zero, p, met));
  push(compare("3.2", tags, closed.L_ijk, jets.L_ijk, tol.pure, tol.zero, p, met));
  push(compare("3.3", tags, closed.l, jets.l, tol.pure, tol.zero, p, met));
  push(compare("3.4", tags, closed.g, jets.g, tol.pure, tol.zero, p, met));

  push(verify_angular_identity(t, tol));

  auto r6 = compare("3.6", tags, closed.C, jets.C, tol.pure, tol.zero, p, met);
  const Tensor3 printed = starred_cartan_variants(st).printed;
  r6.aux["printed_form_residual"] = max_abs_diff(printed, jets.C);
  r6.note = "cubic term uses tau^4";
  push(std::move(r6));

  auto r7 = compare("3.7", tags, matmul(closed.g_inv, closed.g), identity(n), tol.pure, tol.zero, p, met);
  r7.aux["against_jet_inverse"] = max_abs_diff(closed.g_inv, jets.g_inv) / std::max(1.0, norm_inf(jets.g_inv));
  push(std::move(r7));
  return out;
}

/// Difference tensors of the Cartan connections and their intermediate
/// building blocks: D00(i) = D^i_00, D0j(i,j) = D^i_0j, D(i,j,k) = D^i_jk,
/// H(j,i,k) = H_jik, CS(i,j,r) the cyclic sum over T_ijr.
struct DifferenceTensors {
  Vec D00;
  Mat D0j;
  Tensor3 D;
  Mat G_ij;
  Vec G_j;
  Tensor3 H;
  Mat H_ik;
  Tensor3 CS;
};

/// D from the closed formulas in the base quantities, E, F, β_j and ρ_k.
inline DifferenceTensors difference_tensors(const HVectorState& st) {
  const auto& t = st.base;
  const auto& s = st.s;
  const auto& c = st.cov;
  const int n = t.n;
  const double tau = s.tau, rho = s.rho, beta = s.beta, L = t.L, den = s.denominator;
  const Vec& y = t.point.y;
  using detail::at;
  detail::require_nonzero(2 - rho * tau, "2 - rho tau");

  DifferenceTensors d;
  const Vec F0 = matvec(t.g_inv, matvec(c.F, y));
  const double E00 = bilinear(y, c.E, y);
  d.D00 = tau * (s.A - E00) * s.l_up - 2 * tau * tau / (2 - rho * tau) * s.A * s.m_up +
          2 * L * tau / (2 - rho * tau) * (s.beta0 / beta * s.m_up - F0);

  Tensor3 T(n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j)
      for (int r = 0; r < n; ++r)
        T(i, j, r) = at(s.m, i) * (rho * tau - 1) * t.L_ij(j, r) - tau / beta * at(s.m, i) * at(s.m, j) * at(st.b.value, r);
  d.CS = Tensor3(n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j)
      for (int r = 0; r < n; ++r) d.CS(i, j, r) = T(i, j, r) + T(j, r, i) + T(r, i, j);

  const Vec& bj = c.beta_j;
  const Vec& m = s.m;
  d.G_ij = zeros(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) {
      double v = tau * tau / beta * (at(m, i) * at(bj, j) - at(m, j) * at(bj, i)) - tau * tau * c.F(i, j) -
                 0.5 * tau * tau * s.rho0 * t.L_ij(i, j) +
                 tau / beta * s.beta0 * ((rho * tau - 1) * t.L_ij(i, j) - 3 * tau / beta * at(m, i) * at(m, j));
      for (int r = 0; r < n; ++r) {
        v -= 0.5 * (2 * tau - rho * tau * tau) * t.L_ijk(i, j, r) * at(d.D00, r);
        v -= tau / beta * at(d.D00, r) * d.CS(i, j, r);
      }
      d.G_ij(i, j) = v;
    }
  d.G_j = tau * tau * (matvec(c.F, y) - matvec(c.E, y));
  const Vec Gbj = vecmat(s.b_up, d.G_ij);
  const Mat Gup = matmul(t.g_inv, d.G_ij);
  const double k = L / (2 * tau - rho * tau * tau);
  d.D0j = zeros(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) {
      d.D0j(i, j) = at(s.l_up, i) * (at(Gbj, j) / (tau * den) + at(d.G_j, j) / tau) -
                    2 * at(s.m_up, i) / (2 - rho * tau) * at(Gbj, j) / den + k * Gup(i, j);
    }

  const Vec& rk = c.rho_k;
  Mat X = zeros(n, n);
  for (int a = 0; a < n; ++a)
    for (int b = 0; b < n; ++b) X(a, b) = (rho * tau - 1) * t.L_ij(a, b) - 3 * tau / beta * at(m, a) * at(m, b);
  d.H = Tensor3(n);
  for (int j = 0; j < n; ++j)
    for (int i = 0; i < n; ++i)
      for (int kk = 0; kk < n; ++kk) {
        double t1 = 0.0, t2 = 0.0;
        for (int r = 0; r < n; ++r) {
          t1 += t.L_ijk(i, j, r) * d.D0j(r, kk) + t.L_ijk(j, kk, r) * d.D0j(r, i) - t.L_ijk(kk, i, r) * d.D0j(r, j);
          t2 += -d.D0j(r, kk) * d.CS(i, j, r) - d.D0j(r, i) * d.CS(j, kk, r) + d.D0j(r, j) * d.CS(kk, i, r);
        }
        d.H(j, i, kk) = (rho * tau * tau - 2 * tau) / 2 * t1 + tau / beta * t2 -
                        tau * tau / 2 * (at(rk, kk) * t.L_ij(i, j) + at(rk, i) * t.L_ij(j, kk) - at(rk, j) * t.L_ij(kk, i)) +
                        tau / beta * (at(bj, kk) * X(i, j) + at(bj, i) * X(j, kk) - at(bj, j) * X(kk, i));
      }
  d.H_ik = zeros(n, n);
  for (int i = 0; i < n; ++i)
    for (int kk = 0; kk < n; ++kk)
      d.H_ik(i, kk) = tau * tau / beta * (at(m, i) * at(bj, kk) + at(m, kk) * at(bj, i)) - tau * tau * c.E(i, kk) -
                      0.5 * (d.G_ij(i, kk) + d.G_ij(kk, i));

  d.D = Tensor3(n);
  for (int i = 0; i < n; ++i)
    for (int kk = 0; kk < n; ++kk) {
      double hb = 0.0;
      for (int j = 0; j < n; ++j) hb += at(s.b_up, j) * d.H(j, i, kk);
      for (int j = 0; j < n; ++j) {
        double hup = 0.0;
        for (int q = 0; q < n; ++q) hup += t.g_inv(j, q) * d.H(q, i, kk);
        d.D(j, i, kk) = at(s.l_up, j) * (hb / den + d.H_ik(i, kk)) / tau -
                        2 * at(s.m_up, j) / (2 - rho * tau) * hb / den + k * hup;
      }
    }
  return d;
}

/// D derived independently from the h-covariant derivative of *g_ij along
/// the base Cartan connection: with Q_ijk = *g_{ij|k} - 2 *C_ijs D^s_0k,
/// D_{i,jk} = ½(Q_ijk + Q_ikj - Q_jki).
inline DifferenceTensors difference_tensors_by_metricity(const HVectorState& st) {
  const auto& t = st.base;
  const auto& s = st.s;
  const auto& c = st.cov;
  const int n = t.n;
  const double tau = s.tau, rho = s.rho, beta = s.beta;
  const Vec& b = st.b.value;
  const Vec& l = t.l;
  const Vec& y = t.point.y;
  using detail::at;
  const StarredForms f = starred_closed_forms(st);

  const double t2 = tau * tau, t3 = t2 * tau, t4 = t3 * tau;
  Tensor3 SG(n);
  for (int jj = 0; jj < n; ++jj) {
    const double tj = -(tau / beta) * at(c.beta_j, jj);
    const double rj = at(c.rho_k, jj);
    const double a = (4 * tau - 3 * rho * t2) * tj - t3 * rj;
    const double cll = (8 * tau + 3 * rho * t2) * tj + t3 * rj;
    for (int i = 0; i < n; ++i)
      for (int k = 0; k < n; ++k) {
        SG(i, k, jj) = a * t.g(i, k) + 12 * t3 * tj * at(b, i) * at(b, k) +
                       3 * t4 * (c.bij(i, jj) * at(b, k) + at(b, i) * c.bij(k, jj)) -
                       12 * t2 * tj * (at(l, i) * at(b, k) + at(b, i) * at(l, k)) -
                       4 * t3 * (at(l, i) * c.bij(k, jj) + c.bij(i, jj) * at(l, k)) + cll * at(l, i) * at(l, k);
      }
  }

  DifferenceTensors d;
  Vec low00(static_cast<std::size_t>(n), 0.0);
  for (int i = 0; i < n; ++i) {
    double v = 0.0;
    for (int k = 0; k < n; ++k)
      for (int j = 0; j < n; ++j) v += (SG(i, k, j) - 0.5 * SG(j, k, i)) * at(y, k) * at(y, j);
    low00[static_cast<std::size_t>(i)] = v;
  }
  d.D00 = matvec(f.g_inv, low00);

  Mat low0k = zeros(n, n);
  for (int i = 0; i < n; ++i)
    for (int k = 0; k < n; ++k) {
      double v = 0.0;
      for (int j = 0; j < n; ++j) v += 0.5 * (SG(i, j, k) + SG(i, k, j) - SG(j, k, i)) * at(y, j);
      for (int q = 0; q < n; ++q) v -= f.C(i, k, q) * at(d.D00, q);
      low0k(i, k) = v;
    }
  d.D0j = matmul(f.g_inv, low0k);

  Tensor3 Q(n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j)
      for (int k = 0; k < n; ++k) {
        double v = SG(i, j, k);
        for (int q = 0; q < n; ++q) v -= 2 * f.C(i, j, q) * d.D0j(q, k);
        Q(i, j, k) = v;
      }
  d.D = Tensor3(n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j)
      for (int k = 0; k < n; ++k) {
        double v = 0.0;
        for (int q = 0; q < n; ++q) v += f.g_inv(i, q) * 0.5 * (Q(q, j, k) + Q(q, k, j) - Q(j, k, q));
        d.D(i, j, k) = v;
      }
  return d;
}

/// Differences of the connections computed from jets of both metrics.
struct ConnectionJump {
  Vec D00;
  Mat D0j;
  Tensor3 D;
  Tensor3 berwald;
  FundamentalTensors starred;
};

inline ConnectionJump connection_jump(const ChangedSpace& cs, const PointState& p, const FundamentalTensors& base) {
  ConnectionJump j;
  j.starred = geometry(cs.starred, p, GeometryOptions{true, false});
  j.D00 = 2.0 * (j.starred.spray - base.spray);
  j.D0j = j.starred.nonlinear - base.nonlinear;
  j.D = j.starred.cartan - base.cartan;
  j.berwald = *j.starred.berwald - *base.berwald;
  return j;
}

/// Tags of the connection checks at a state: the parallel and ρ = 0 regimes
/// are reported as such, everything else under the full h-vector hypothesis.
inline std::vector<Tag> connection_tags(const RegimeFlags& f) {
  if (f.parallel) return {Tag::PARALLEL};
  if (f.rho0) return {Tag::RHO0};
  return {Tag::HFULL};
}

/// Checks the printed difference tensors against the jets of *L. The
/// metricity-route D is reported alongside as aux, with the transvection
/// D^i_0j y^j = D^i_00. The fiber derivative in the Berwald check is taken of
/// the metricity-route D^i_0k, which is valid off the anchor fiber direction.
inline std::vector<IdentityReport> verify_connection_difference(const ChangedSpace& cs, const PointState& p,
                                                                const Tolerances& tol = {}) {
  const HVectorState st = evaluate(cs.h, cs.base, p);
  const RegimeFlags flags = regime(st, tol.connection);
  const DifferenceTensors d = difference_tensors(st);
  const DifferenceTensors dm = difference_tensors_by_metricity(st);
  const ConnectionJump jump = connection_jump(cs, p, st.base);
  const auto tags = connection_tags(flags);
  const bool met = satisfied(tags, flags);
  const int n = st.base.n;

  std::vector<IdentityReport> out;
  auto decorate = [&](IdentityReport r) {
    r.aux["r1"] = flags.residuals.r1;
    r.aux["r2"] = flags.residuals.r2;
    return r;
  };
  auto r8 = decorate(compare("3.8", tags, d.D, jump.D, tol.connection, tol.zero, p, met));
  r8.aux["metricity_route_residual"] = max_abs_diff(dm.D, jump.D);
  out.push_back(std::move(r8));
  auto r9 = decorate(compare("3.9", tags, d.D0j, jump.D0j, tol.connection, tol.zero, p, met));
  r9.aux["metricity_route_residual"] = max_abs_diff(dm.D0j, jump.D0j);
  r9.aux["transvection_residual"] = max_abs_diff(matvec(d.D0j, p.y), d.D00);
  out.push_back(std::move(r9));
  auto r10 = decorate(compare("3.10", tags, d.D00, jump.D00, tol.connection, tol.zero, p, met));
  r10.aux["metricity_route_residual"] = max_abs_diff(dm.D00, jump.D00);
  out.push_back(std::move(r10));

  Tensor3 fd(n), fd_printed(n);
  for (int h = 0; h < n; ++h) {
    const double step = 1e-5 * std::max(1.0, norm_inf(p.y));
    PointState plus = p, minus = p;
    plus.y[static_cast<std::size_t>(h)] += step;
    minus.y[static_cast<std::size_t>(h)] -= step;
    const HVectorState sp = evaluate(cs.h, cs.base, plus);
    const HVectorState sn = evaluate(cs.h, cs.base, minus);
    const Mat dp = difference_tensors_by_metricity(sp).D0j;
    const Mat dn = difference_tensors_by_metricity(sn).D0j;
    const Mat pp = difference_tensors(sp).D0j;
    const Mat pn = difference_tensors(sn).D0j;
    for (int i = 0; i < n; ++i)
      for (int k = 0; k < n; ++k) {
        fd(i, k, h) = (dp(i, k) - dn(i, k)) / (2 * step);
        fd_printed(i, k, h) = (pp(i, k) - pn(i, k)) / (2 * step);
      }
  }
  auto r11 = decorate(compare("3.11", tags, fd, jump.berwald, tol.finite_difference, tol.finite_difference, p, met));
  r11.aux["printed_D0j_residual"] = max_abs_diff(fd_printed, jump.berwald);
  out.push_back(std::move(r11));
  return out;
}

/// Parallel h-vector: every difference tensor vanishes and the Cartan
/// connections agree.
inline IdentityReport verify_parallel_lemma(const ChangedSpace& cs, const PointState& p, const Tolerances& tol = {}) {
  const HVectorState st = evaluate(cs.h, cs.base, p);
  const RegimeFlags flags = regime(st, tol.connection);
  const DifferenceTensors d = difference_tensors(st);
  const double size = std::max({norm_inf(d.D00), norm_inf(d.D0j), norm_inf(d.D)});
  IdentityReport r;
  r.equation_id = "L3.5";
  r.tags = {Tag::PARALLEL};
  r.residual_inf = size;
  r.residual_rel = size;
  r.tol = tol.zero;
  r.abs_tol = tol.zero;
  r.hypotheses_met = flags.parallel;
  r.verdict = judge(size, size, tol.zero, tol.zero, flags.parallel);
  r.point = p;
  const ConnectionJump jump = connection_jump(cs, p, st.base);
  r.aux["cartan_jump"] = norm_inf(jump.D);
  r.aux["b_ij_norm"] = norm_inf(st.cov.bij);
  if (flags.parallel && norm_inf(jump.D) > tol.connection * (1.0 + norm_inf(st.base.cartan))) {
    r.verdict = Verdict::fail;
    r.note = "Cartan connections differ";
  }
  return r;
}

}  // namespace finslerlab
