#pragma once

/// \file
/// Identity reports, hypothesis tags and the registry of checkable identities.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "finslerlab/dense.hpp"
#include "finslerlab/jet.hpp"

namespace finslerlab {

enum class Tag { NONE, H12, HFULL, GRADIENT, TANGENT, COND428, PARALLEL, LANDSBERG, RHO0, FIRSTKIND };

inline std::string to_string(Tag t) {
  switch (t) {
    case Tag::NONE: return "NONE";
    case Tag::H12: return "H12";
    case Tag::HFULL: return "HFULL";
    case Tag::GRADIENT: return "GRADIENT";
    case Tag::TANGENT: return "TANGENT";
    case Tag::COND428: return "COND428";
    case Tag::PARALLEL: return "PARALLEL";
    case Tag::LANDSBERG: return "LANDSBERG";
    case Tag::RHO0: return "RHO0";
    case Tag::FIRSTKIND: return "FIRSTKIND";
  }
  return "NONE";
}

inline std::optional<Tag> tag_from_string(const std::string& s) {
  for (Tag t : {Tag::NONE, Tag::H12, Tag::HFULL, Tag::GRADIENT, Tag::TANGENT, Tag::COND428,
                Tag::PARALLEL, Tag::LANDSBERG, Tag::RHO0, Tag::FIRSTKIND}) {
    if (to_string(t) == s) return t;
  }
  return std::nullopt;
}

enum class Verdict { pass, fail, info };

inline std::string to_string(Verdict v) {
  switch (v) {
    case Verdict::pass: return "pass";
    case Verdict::fail: return "fail";
    case Verdict::info: return "info";
  }
  return "info";
}

/// Default tolerances by check class.
struct Tolerances {
  double pure = 1e-9;
  double connection = 1e-8;
  double finite_difference = 1e-4;
  double zero = 1e-10;
};

struct IdentityReport {
  std::string equation_id;
  std::vector<Tag> tags;
  double residual_inf = 0.0;
  double residual_rel = 0.0;
  double tol = 0.0;
  double abs_tol = 0.0;
  Verdict verdict = Verdict::info;
  bool hypotheses_met = true;
  PointState point;
  std::uint64_t seed = 0;
  std::map<std::string, double> aux;
  std::string note;

  [[nodiscard]] bool passed() const { return verdict != Verdict::fail; }
};

inline Verdict judge(double residual_inf, double residual_rel, double tol, double abs_tol,
                     bool hypotheses_met) {
  if (!hypotheses_met) return Verdict::info;
  return (residual_rel <= tol || residual_inf <= abs_tol) ? Verdict::pass : Verdict::fail;
}

/// Report comparing two flattened quantities. residual_rel is the sup-norm of
/// the difference over the larger sup-norm of the two sides (zero when both
/// vanish).
inline IdentityReport compare(std::string id, std::vector<Tag> tags, const std::vector<double>& lhs,
                              const std::vector<double>& rhs, double tol, double abs_tol,
                              const PointState& p, bool hypotheses_met = true) {
  IdentityReport r;
  r.equation_id = std::move(id);
  r.tags = std::move(tags);
  r.residual_inf = max_abs_diff(lhs, rhs);
  const double scale = std::max(norm_inf(lhs), norm_inf(rhs));
  r.residual_rel = scale > 0.0 ? r.residual_inf / scale : 0.0;
  r.tol = tol;
  r.abs_tol = abs_tol;
  r.hypotheses_met = hypotheses_met;
  r.verdict = judge(r.residual_inf, r.residual_rel, tol, abs_tol, hypotheses_met);
  r.point = p;
  return r;
}

inline std::vector<double> flat(double v) { return {v}; }
inline const std::vector<double>& flat(const Vec& v) { return v; }
inline const std::vector<double>& flat(const Mat& m) { return m.data(); }
inline const std::vector<double>& flat(const Tensor3& t) { return t.data(); }

template <class A, class B>
IdentityReport compare(std::string id, std::vector<Tag> tags, const A& lhs, const B& rhs, double tol,
                       double abs_tol, const PointState& p, bool hypotheses_met = true) {
  return compare(std::move(id), std::move(tags), std::vector<double>(flat(lhs)),
                 std::vector<double>(flat(rhs)), tol, abs_tol, p, hypotheses_met);
}

/// One row of the identity registry.
struct RegistryEntry {
  std::string id;
  std::vector<Tag> tags;
  std::string description;
};

/// Every checkable identity, in stable order.
inline const std::vector<RegistryEntry>& registry() {
  using enum Tag;
  static const std::vector<RegistryEntry> entries = {
      {"base.euler", {NONE}, "l_i y^i = L, g_ij y^i y^j = L^2, h_ij y^j = 0, C_ijk y^k = 0"},
      {"base.homogeneity", {NONE}, "L(x, t y) = t L(x, y) and g_ij(x, t y) = g_ij(x, y) for t > 0"},
      {"base.inverse", {NONE}, "g^ir g_rj = delta"},
      {"base.h-metricity", {NONE}, "g_ij|k = 0 for the Cartan connection"},
      {"base.v-metricity", {NONE}, "g_ij|_k = 0"},
      {"2.5", {NONE}, "B^i_a B^b_i = delta, B^i_a N_i = 0, N^i B^a_i = 0, N^i N_i = 1"},
      {"2.6", {NONE}, "completeness B^i_a B^a_j + N^i N_j = delta^i_j"},
      {"2.9", {NONE}, "H_0a = H_a and H_a0 = H_a + M_a H_0"},
      {"2.11", {NONE}, "relative h-derivative N^i_|b = -H_ab B^a_j g^ij (finite differences along u)"},
      {"3.1", {H12}, "*L_ij closed form against jets of *L"},
      {"3.2", {H12}, "*L_ijk closed form against jets of *L"},
      {"3.3", {H12}, "*l_i = 2 tau l_i - tau^2 b_i"},
      {"3.4", {H12}, "*g_ij closed form against jets of *L"},
      {"3.5", {NONE}, "L_ijk = (2/L) C_ijk - (1/L^2)(h_ij l_k + h_jk l_i + h_ki l_j)"},
      {"3.6", {H12}, "*C_ijk closed form against jets of *L"},
      {"3.7", {H12}, "*g^ij closed form is the inverse of closed-form *g_ij"},
      {"3.8", {HFULL}, "*F^i_jk - F^i_jk = D^i_jk"},
      {"3.9", {HFULL}, "*G^i_k - G^i_k = D^i_0k"},
      {"3.10", {HFULL}, "2 *G^i - 2 G^i = D^i_00"},
      {"3.11", {HFULL}, "*G^i_kh - G^i_kh = fiber derivative of D^i_0k (finite differences)"},
      {"4.3", {NONE}, "B^i_a *B^b_i = delta, B^i_a *N_i = 0, *N^i *B^a_i = 0, *N^i *N_i = 1 for the solved starred normal"},
      {"4.4", {NONE}, "y_j N^j = 0"},
      {"4.5", {NONE}, "*g_ij N^i N^j = (2 tau^2 - rho tau^3) + 3 tau^4 (b_i N^i)^2"},
      {"4.6", {NONE}, "*g_ij B^i_a N^j = (b_j N^j)(3 tau^4 b_i - 4 tau^3 l_i) B^i_a"},
      {"4.8", {TANGENT}, "closed-form *N^i = N^i / sqrt(2 tau^2 - rho tau^3) against the solved normal"},
      {"4.9", {TANGENT}, "*N_i = sqrt(2 tau^2 - rho tau^3) N_i"},
      {"4.10", {TANGENT}, "m_i N^i = 0"},
      {"4.11", {NONE}, "h_ij B^i_a N^j = 0"},
      {"4.12", {TANGENT}, "*C_ijk B B N = (2 tau^2 - rho tau^3) C_ijk B B N"},
      {"4.13", {TANGENT}, "*M_ab = sqrt(2 tau^2 - rho tau^3) M_ab"},
      {"4.14", {TANGENT}, "*H_0 = sqrt(2 tau^2 - rho tau^3)(H_0 + N_i D^i_00)"},
      {"4.15", {TANGENT}, "D^i_00 N_i = -(2 L tau / (2 - rho tau)) F^i_0 N_i"},
      {"4.16", {GRADIENT, TANGENT}, "F_ij = 0 and D^i_00 N_i = 0"},
      {"4.18", {TANGENT}, "b_i|0 N^i = (H_a + M_a H_0) B^a_j b^j - b_i|_j H_0 N^i N^j"},
      {"4.19", {GRADIENT, TANGENT, FIRSTKIND}, "E_i0 N^i = b_i|0 N^i = beta_i N^i = 0"},
      {"4.20", {GRADIENT, TANGENT, FIRSTKIND}, "G_j N^j = 0"},
      {"4.21", {GRADIENT, TANGENT, FIRSTKIND}, "G_ij b^i N^j = 0"},
      {"4.22", {GRADIENT, TANGENT, FIRSTKIND}, "G_ij N^i B^j_a = 0"},
      {"4.23", {GRADIENT, TANGENT, FIRSTKIND}, "D^i_0j N_i B^j_a = 0"},
      {"4.24", {GRADIENT, HFULL}, "L_ijk D^i_00 closed form"},
      {"4.25", {GRADIENT, TANGENT, FIRSTKIND, HFULL}, "D^i_0j N^j B^k_a h_ik = 0"},
      {"4.26", {GRADIENT, TANGENT, FIRSTKIND}, "D^i_0j b_i N^j = 0"},
      {"4.27", {GRADIENT, TANGENT, FIRSTKIND, HFULL}, "H_jik N^j B^i_a B^k_b reduced form"},
      {"4.29", {COND428}, "beta_r C^r_ij = 0"},
      {"4.30", {GRADIENT, TANGENT, FIRSTKIND, COND428, HFULL}, "L_ijr N^j B^i_a B^k_b D^r_0k = 2 lambda M_ab / (2 tau - rho tau^2)"},
      {"4.31", {GRADIENT, TANGENT, FIRSTKIND, COND428, HFULL}, "L_jkr N^j B^i_a B^k_b D^r_0i = 2 lambda M_ab / (2 tau - rho tau^2)"},
      {"4.32", {GRADIENT, TANGENT, FIRSTKIND, COND428, HFULL}, "L_kir N^j B^i_a B^k_b D^r_0j = 2 mu M_ab / (2 tau - rho tau^2)"},
      {"4.33", {GRADIENT, TANGENT, FIRSTKIND, COND428, HFULL}, "H_jik N^j B^i_a B^k_b = (mu - 2 lambda) M_ab"},
      {"4.34", {GRADIENT, TANGENT, FIRSTKIND, COND428, HFULL}, "D^j_ik N_j B^i_a B^k_b = (mu - 2 lambda) L M_ab / (2 tau - rho tau^2)"},
      {"4.35", {TANGENT}, "*H_ab - *M_a *H_b = sqrt(2 tau^2 - rho tau^3)(H_ab + D^i_jk N_i B B) - M_a H_b"},
      {"4.36", {LANDSBERG}, "P^r_ij = 0 implies b_r|0 C^r_ij = 0"},
      {"4.37", {PARALLEL}, "*F^i_jk = F^i_jk"},
      {"L2.1", {NONE}, "first kind iff H_a = 0 iff H_0 = 0"},
      {"L2.3", {NONE}, "kind monotonicity: third implies second implies first"},
      {"L3.5", {PARALLEL}, "parallel b gives D^i_00 = D^i_0j = D^i_jk = 0"},
      {"T4.1", {NONE}, "solved *N parallel to N iff b_j N^j = 0"},
      {"T4.2", {GRADIENT, TANGENT}, "*H_0 = sqrt(2 tau^2 - rho tau^3) H_0"},
      {"T4.3", {GRADIENT, TANGENT, COND428}, "second/third kind of F^(n-1) carries over to *F^(n-1)"},
      {"T4.5", {PARALLEL, TANGENT}, "F^(n-1) and *F^(n-1) have the same kind"},
  };
  return entries;
}

inline const RegistryEntry* find_entry(const std::string& id) {
  for (const auto& e : registry())
    if (e.id == id) return &e;
  return nullptr;
}

inline std::vector<Tag> tags_of(const std::string& id) {
  const auto* e = find_entry(id);
  if (!e) throw ConfigError("unknown equation id \"" + id + "\"");
  return e->tags;
}

}  // namespace finslerlab
