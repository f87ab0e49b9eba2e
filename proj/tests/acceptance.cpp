// One line per acceptance criterion; exit status 0 iff all pass.

#include <cstdio>
#include <functional>
#include <string>
#include <vector>

#include "finslerlab/scenario.hpp"

#ifndef FINSLERLAB_DEFAULT_SCENARIO_DIR
#define FINSLERLAB_DEFAULT_SCENARIO_DIR "scenarios"
#endif

using namespace finslerlab;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

RunReport run(const std::string& name) {
  return run_scenario(load_scenario(std::string(FINSLERLAB_DEFAULT_SCENARIO_DIR) + "/" + name + ".yaml"), 4);
}

std::vector<const IdentityReport*> pick(const RunReport& rr, const std::vector<std::string>& ids) {
  std::vector<const IdentityReport*> out;
  for (const auto& rec : rr.records)
    if (std::find(ids.begin(), ids.end(), rec.report.equation_id) != ids.end()) out.push_back(&rec.report);
  return out;
}

double worst(const std::vector<const IdentityReport*>& rs, double IdentityReport::*field) {
  double w = 0.0;
  for (const auto* r : rs) w = std::max(w, r->*field);
  return w;
}

std::string sci(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.2e", v);
  return buf;
}

Outcome base_suite() {
  const std::vector<MetricSpec> metrics = {euclidean_metric(3), riemannian_metric(sample_riemannian_field(3)),
                                           randers_metric(sample_riemannian_field(3), sample_one_form(3, 0.3)),
                                           kropina_metric(sample_riemannian_field(3), sample_one_form(3, 1.0))};
  Tolerances tol;
  tol.pure = tol.connection = 1e-8;
  int checks = 0, failures = 0;
  for (std::size_t k = 0; k < metrics.size(); ++k) {
    auto sampler = metric_sampler(metrics[k], 1000 + k);
    for (int s = 0; s < 100; ++s) {
      for (const auto& r : verify_base_space(metrics[k], sampler.next(), tol)) {
        ++checks;
        if (r.verdict != Verdict::pass) ++failures;
      }
    }
  }
  return {failures == 0, std::to_string(checks) + " invariant checks on 4 families x 100 points, " +
                             std::to_string(failures) + " failed (tol 1e-8)"};
}

Outcome angular_identity() {
  double w = 0.0;
  int count = 0;
  for (const auto& m : metric_zoo(3)) {
    auto sampler = metric_sampler(m, 2000);
    for (int s = 0; s < 50; ++s) {
      const auto r = verify_angular_identity(geometry(m, sampler.next()));
      w = std::max(w, r.residual_rel);
      ++count;
    }
  }
  return {w <= 1e-9, std::to_string(count) + " points on 5 base metrics, worst relative residual " + sci(w)};
}

Outcome rho0_regression() {
  const auto rr = run("rho0-regression");
  const auto rs = pick(rr, {"3.1", "3.2", "3.3", "3.4", "3.5", "3.6", "3.7"});
  const double w = worst(rs, &IdentityReport::residual_rel);
  const bool met = std::all_of(rs.begin(), rs.end(), [](const IdentityReport* r) {
    const bool rho0 = std::find(r->tags.begin(), r->tags.end(), Tag::RHO0) != r->tags.end();
    return r->hypotheses_met && (rho0 || r->equation_id == "3.5");
  });
  return {rs.size() == 350 && w <= 1e-9 && met,
          std::to_string(rs.size()) + " reports at 50 points, worst relative residual " + sci(w)};
}

Outcome h12_suite() {
  const auto rr = run("h12-randers");
  const auto rs = pick(rr, {"3.1", "3.2", "3.3", "3.4", "3.6", "3.7"});
  const double w = worst(rs, &IdentityReport::residual_rel);
  const bool met = std::all_of(rs.begin(), rs.end(), [](const IdentityReport* r) { return r->hypotheses_met; });
  return {!rs.empty() && w <= 1e-9 && met, std::to_string(rs.size()) + " reports, worst relative residual " + sci(w)};
}

Outcome parallel_lemma() {
  const auto rr = run("parallel-lemma35");
  const auto lemma = pick(rr, {"L3.5"});
  const auto cartan = pick(rr, {"3.8"});
  const double d = worst(lemma, &IdentityReport::residual_inf);
  const double f = worst(cartan, &IdentityReport::residual_inf);
  const bool met = std::all_of(lemma.begin(), lemma.end(), [](const IdentityReport* r) { return r->hypotheses_met; });
  return {!lemma.empty() && !cartan.empty() && d <= 1e-10 && f <= 1e-8 && met,
          "max |D| " + sci(d) + ", *F - F - D residual " + sci(f) + " over " + std::to_string(lemma.size()) +
              " points"};
}

Outcome slot_invariance() {
  const auto rr = run("hfull-invariance");
  const auto rs = pick(rr, {"3.8", "3.9", "3.10"});
  double spread = 0.0, moved = 1e300;
  bool met = !rs.empty();
  for (const auto* r : rs) {
    spread = std::max(spread, r->aux.at("draw_spread"));
    moved = std::min(moved, r->aux.at("starred_cartan_spread"));
    met = met && r->hypotheses_met;
  }
  return {met && spread <= 1e-8 && moved > 1e-6,
          "20 draws per point, worst residual spread " + sci(spread) + ", smallest spread of *F " + sci(moved)};
}

Outcome orthonormality() {
  double w = 0.0;
  std::size_t count = 0;
  for (const char* name : {"orthonormality-hyperplane", "orthonormality-sphere", "orthonormality-graph"}) {
    const auto rr = run(name);
    const auto rs = pick(rr, {"2.5", "2.6", "4.3", "4.4"});
    w = std::max(w, worst(rs, &IdentityReport::residual_inf));
    count += rs.size();
  }
  // Classical oracle: H_ab = -g_ab / R for the outward normal of a sphere in Euclidean space.
  const double R = 1.5;
  double oracle = 0.0;
  const auto e = euclidean_metric(3);
  for (const auto& s : sample_surface(sphere(3, R), e, 77, 20, 0.4, 1.2)) {
    const auto ig = induced_geometry(sphere(3, R), e, s.u, s.v);
    const double sign = dot(ig.N_up, ig.e.x) > 0 ? -1.0 : 1.0;
    oracle = std::max(oracle, max_abs_diff(ig.H_ab, (sign / R) * ig.g_ab));
  }
  return {count == 360 && w <= 1e-9 && oracle <= 1e-6,
          std::to_string(count) + " frame checks, worst residual " + sci(w) + "; sphere H_ab vs oracle " + sci(oracle)};
}

Outcome normal_preservation() {
  double tangent_gap = 0.0;
  const auto tangent = run("normal-preservation");
  const auto nontangent = run("normal-nontangent");
  const auto t = pick(tangent, {"T4.1"});
  for (const auto* r : t) tangent_gap = std::max(tangent_gap, 1.0 - r->aux.at("cosine"));
  double min_gap = 1.0;
  int skew = 0;
  for (const auto* r : pick(nontangent, {"T4.1"})) {
    if (std::abs(r->aux.at("tangency")) < 0.1) continue;
    ++skew;
    min_gap = std::min(min_gap, 1.0 - std::abs(r->aux.at("cosine")));
  }
  return {!t.empty() && tangent_gap <= 1e-10 && skew > 0 && min_gap >= 1e-4,
          "tangent: max 1 - cos " + sci(tangent_gap) + "; " + std::to_string(skew) +
              " non-tangent samples with |b.N| >= 0.1: min 1 - |cos| " + sci(min_gap)};
}

Outcome scaling() {
  const auto t41 = run("normal-preservation");
  const auto m = pick(t41, {"4.13"});
  const double dm = worst(m, &IdentityReport::residual_inf);
  const auto g = run("gradient-tangent");
  const auto n = pick(g, {"4.15", "4.16"});
  double dn = 0.0, d00 = 1e300;
  for (const auto* r : n) {
    dn = std::max(dn, r->residual_inf);
    if (r->equation_id == "4.15") d00 = std::min(d00, r->aux.at("D00_norm"));
  }
  const bool met = std::all_of(n.begin(), n.end(), [](const IdentityReport* r) { return r->hypotheses_met; });
  return {!m.empty() && !n.empty() && met && dm <= 1e-8 && dn <= 1e-9,
          "|*M - sqrt(k) M| " + sci(dm) + "; |D^i_00 N_i| " + sci(dn) + " with min |D^i_00| " + sci(d00)};
}

Outcome parallel_kind() {
  const auto e = euclidean_metric(3);
  const auto cs = kropina_change(e, HVectorSpec::function_of_x(constant_covector({1.0, 0.5, 0.0})));
  const auto hs = hyperplane(3, 2);
  const auto grid = sample_surface(hs, cs.starred, 45, 20);
  const auto base = classify(hs, e, grid).kind;
  const auto starred = classify(hs, cs.starred, grid).kind;
  const auto rr = run("parallel-kind");
  const auto rs = pick(rr, {"4.37"});
  const double w = worst(rs, &IdentityReport::residual_inf);
  const bool met = std::all_of(rs.begin(), rs.end(), [](const IdentityReport* r) { return r->hypotheses_met; });
  return {base == HyperplaneKind::third && starred == HyperplaneKind::third && !rs.empty() && met && w <= 1e-8,
          "kinds " + to_string(base) + "/" + to_string(starred) + ", *F - F residual " + sci(w)};
}

Outcome determinism() {
  const std::vector<std::string> names = {"rho0-regression", "hfull-invariance", "normal-preservation", "gradient-chain"};
  for (const auto& name : names) {
    const auto sc = load_scenario(std::string(FINSLERLAB_DEFAULT_SCENARIO_DIR) + "/" + name + ".yaml");
    if (machine_report(run_scenario(sc, 1)) != machine_report(run_scenario(sc, 4))) {
      return {false, name + ": machine reports differ between runs"};
    }
  }
  return {true, std::to_string(names.size()) + " scenarios, byte-identical machine reports across runs"};
}

}  // namespace

int main() {
  const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria = {
      {"base-space invariants", base_suite},
      {"angular metric identity", angular_identity},
      {"rho = 0 regression", rho0_regression},
      {"H12 closed forms", h12_suite},
      {"parallel lemma", parallel_lemma},
      {"free-slot invariance", slot_invariance},
      {"hypersurface orthonormality", orthonormality},
      {"normal preservation", normal_preservation},
      {"scaling and gradient reduction", scaling},
      {"parallel kind preservation", parallel_kind},
      {"CLI determinism", determinism},
  };
  int failed = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    Outcome o;
    try {
      o = criteria[i].second();
    } catch (const std::exception& e) {
      o = {false, std::string("error: ") + e.what()};
    }
    if (!o.pass) ++failed;
    std::printf("criterion %2zu %s  %-32s %s\n", i + 1, o.pass ? "PASS" : "FAIL", criteria[i].first.c_str(),
                o.detail.c_str());
  }
  std::printf("%zu criteria, %d failed\n", criteria.size(), failed);
  return failed == 0 ? 0 : 1;
}
