#include <gtest/gtest.h>

#include "finslerlab/hypersurface.hpp"

using namespace finslerlab;

namespace {

MetricSpec sample_randers(int n) { return randers_metric(sample_riemannian_field(n), sample_one_form(n, 0.3)); }

// Riemannian metric even in x3 with a_13 = a_23 = 0, so x3 = 0 is totally geodesic.
MetricSpec reflection_symmetric_metric() {
  const char* s[3][3] = {{"1 + 0.1*x1^2", "0.1*x2", "0"},
                         {"0.1*x2", "1.5 + 0.2*x3^2", "0"},
                         {"0", "0", "1 + 0.1*x1*x2 + 0.2*x3^2"}};
  std::vector<std::vector<Polynomial>> a(3);
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j) a[static_cast<std::size_t>(i)].push_back(Polynomial::parse(s[i][j], 3));
  return riemannian_metric(polynomial_matrix(a));
}

// b = grad(x1 + 0.5 x2 + 0.3 x1 x2 + 0.2 x3^2).
std::vector<BaseField> gradient_field() {
  return polynomial_covector({Polynomial::parse("1 + 0.3*x2", 3), Polynomial::parse("0.5 + 0.3*x1", 3),
                              Polynomial::parse("0.4*x3", 3)});
}

const IdentityReport& find(const std::vector<IdentityReport>& rs, const std::string& id) {
  for (const auto& r : rs)
    if (r.equation_id == id) return r;
  throw std::runtime_error("missing report " + id);
}

}  // namespace

TEST(Hypersurface, CoordinateHyperplaneInEuclidean) {
  const auto ig = induced_geometry(hyperplane(3, 2, 0.5), euclidean_metric(3), {0.1, 0.2}, {1.0, -0.3});
  EXPECT_LE(max_abs_diff(ig.N_up, Vec{0.0, 0.0, 1.0}), 1e-15);
  EXPECT_LE(max_abs_diff(ig.g_ab, identity(2)), 1e-15);
  EXPECT_LE(norm_inf(ig.H_ab), 1e-15);
  EXPECT_LE(norm_inf(ig.M_ab), 1e-15);
  EXPECT_LE(norm_inf(ig.H_a), 1e-15);
}

TEST(Hypersurface, OrthonormalityAcrossZooAndSurfaces) {
  const std::vector<HypersurfaceSpec> surfaces = {hyperplane(3, 2, 0.1), sphere(3, 2.0),
                                                  graph(3, Polynomial::parse("0.3*x1*x2 + 0.2*x1^2", 2))};
  auto zoo = metric_zoo(3);
  zoo.pop_back();
  for (const auto& hs : surfaces) {
    for (const auto& m : zoo) {
      const auto grid = sample_surface(hs, m, 21, 10, hs.kind == SurfaceKind::sphere ? 0.6 : -0.5,
                                       hs.kind == SurfaceKind::sphere ? 1.2 : 0.5);
      for (const auto& s : grid) {
        for (const auto& r : verify_induced(induced_geometry(hs, m, s.u, s.v))) {
          EXPECT_EQ(r.verdict, Verdict::pass) << hs.label << " " << m.label << " " << r.equation_id;
        }
      }
    }
  }
}

TEST(Hypersurface, SphereMatchesClassicalSecondFundamentalForm) {
  const double R = 2.0;
  const Vec u{0.9, 0.4}, v{0.7, -0.5};
  const auto ig = induced_geometry(sphere(3, R), euclidean_metric(3), u, v);
  // Outward unit normal is x / R.
  const double sign = dot(ig.N_up, ig.e.x) > 0 ? -1.0 : 1.0;
  EXPECT_LE(max_abs_diff(ig.H_ab, (sign / R) * ig.g_ab), 1e-6);
  const auto c = classify(sphere(3, R), euclidean_metric(3), {{u, v}});
  EXPECT_EQ(c.kind, HyperplaneKind::none);
}

TEST(Hypersurface, GraphMatchesClassicalSecondFundamentalForm) {
  const Vec u{0.3, -0.6}, v{1.0, 0.2};
  const auto ig = induced_geometry(graph(3, Polynomial::parse("x1*x2", 2)), euclidean_metric(3), u, v);
  const double w = std::sqrt(1 + u[0] * u[0] + u[1] * u[1]);
  const Vec N{-u[1] / w, -u[0] / w, 1 / w};
  const double sign = dot(N, ig.N_up);
  Mat classical = zeros(2, 2);
  classical(0, 1) = classical(1, 0) = 1 / w;
  EXPECT_NEAR(std::abs(sign), 1.0, 1e-12);
  EXPECT_LE(max_abs_diff(ig.H_ab, sign * classical), 1e-6);
}

TEST(Hypersurface, NormalDerivativeMatchesFiniteDifferences) {
  const auto m = sample_randers(3);
  const auto r1 = verify_normal_derivative(graph(3, Polynomial::parse("0.3*x1*x2 + 0.2*x1^2", 2)), m,
                                           {0.2, -0.3}, {1.0, 0.4});
  EXPECT_EQ(r1.verdict, Verdict::pass) << r1.residual_inf;
  const auto r2 = verify_normal_derivative(sphere(3, 2.0), m, {0.9, 0.4}, {1.0, 0.4});
  EXPECT_EQ(r2.verdict, Verdict::pass) << r2.residual_inf;
}

TEST(Hypersurface, RelativeDerivativesOnFlatHyperplane) {
  const auto e = euclidean_metric(3);
  const auto ig = induced_geometry(hyperplane(3, 2), e, {0.1, 0.2}, {1.0, 0.5});
  const auto l = relative_derivatives(normalized_supporting_element(e), ig);
  EXPECT_LE(norm_inf(l.h), 1e-14);
  const auto c = relative_derivatives(base_covector_field(constant_covector({1.0, 2.0, 3.0})), ig);
  EXPECT_LE(norm_inf(c.v), 1e-14);
  EXPECT_LE(norm_inf(c.h), 1e-14);
}

TEST(Hypersurface, ClassificationAndMonotonicity) {
  const auto e = euclidean_metric(3);
  const auto plane = hyperplane(3, 2);
  const auto grid = sample_surface(plane, e, 3, 8);
  const auto c = classify(plane, e, grid);
  EXPECT_EQ(c.kind, HyperplaneKind::third);
  for (const auto& r : verify_classification(c, induced_geometry(plane, e, grid[0].u, grid[0].v).point)) {
    EXPECT_EQ(r.verdict, Verdict::pass);
  }
  const auto m = reflection_symmetric_metric();
  EXPECT_EQ(classify(plane, m, sample_surface(plane, m, 4, 8)).kind, HyperplaneKind::third);
  const auto tilted = hyperplane(3, 1);
  EXPECT_EQ(classify(tilted, m, sample_surface(tilted, m, 4, 8)).kind, HyperplaneKind::none);
}

TEST(Hypersurface, NormalPreservationTangentAndNonTangent) {
  const auto m = sample_randers(3);
  const auto hs = graph(3, Polynomial::parse("0.3*x1*x2 + 0.2*x1^2", 2));
  const Vec u{0.2, -0.3}, v{1.0, 0.4};
  const auto ig = induced_geometry(hs, m, u, v);
  ConstrainedJetInput in;
  in.anchor = ig.point;
  in.rho = 0.2;
  in.b = project_tangent({1.0, 0.5, 0.7}, ig.N_up, ig.N_low);
  const auto tangent = starred_geometry(hs, kropina_change(m, HVectorSpec::constrained(in)), u, v);
  EXPECT_TRUE(tangent.tangent);
  EXPECT_GE(tangent.cosine, 1 - 1e-10);
  in.b = {1.0, 0.5, 0.7};
  const auto skew = starred_geometry(hs, kropina_change(m, HVectorSpec::constrained(in)), u, v);
  EXPECT_GE(std::abs(skew.tangency), 0.1);
  EXPECT_LE(std::abs(skew.cosine), 1 - 1e-4);
  EXPECT_EQ(find(theorem_checks(skew), "T4.1").verdict, Verdict::pass);
  EXPECT_THROW(closed_starred_normal(skew), TangencyViolationError);
}

TEST(Hypersurface, ScalingOfSecondFundamentalVTensor) {
  const auto m = sample_randers(3);
  const auto hs = sphere(3, 2.0);
  const Vec u{0.9, 0.4}, v{1.0, 0.4};
  const auto ig = induced_geometry(hs, m, u, v);
  ConstrainedJetInput in;
  in.anchor = ig.point;
  in.rho = 0.2;
  in.b = project_tangent({1.0, 0.5, 0.7}, ig.N_up, ig.N_low);
  if (dot(in.b, ig.point.y) < 0) in.b = -1.0 * in.b;
  const auto sf = starred_second_fundamental(hs, kropina_change(m, HVectorSpec::constrained(in)), u, v);
  const auto& r = find(sf.relations, "4.13");
  EXPECT_EQ(r.verdict, Verdict::pass);
  EXPECT_LE(r.residual_inf, 1e-8);
  EXPECT_GT(norm_inf(sf.M_ab), 1e-3);
}

TEST(Hypersurface, GradientChainOnTotallyGeodesicPlane) {
  const auto cs = kropina_change(reflection_symmetric_metric(), HVectorSpec::function_of_x(gradient_field()));
  const auto hs = hyperplane(3, 2);
  for (const auto& s : sample_surface(hs, cs.starred, 8, 5)) {
    const auto si = starred_geometry(hs, cs, s.u, s.v);
    EXPECT_TRUE(si.tangent);
    EXPECT_TRUE(si.flags.gradient);
    EXPECT_TRUE(si.first_kind);
    for (const auto& r : theorem_chain(si, {}, {Tag::GRADIENT, Tag::TANGENT, Tag::FIRSTKIND})) {
      EXPECT_TRUE(r.hypotheses_met) << r.equation_id;
      EXPECT_EQ(r.verdict, Verdict::pass) << r.equation_id << " " << r.residual_inf;
    }
    const auto checks = theorem_checks(si);
    EXPECT_EQ(find(checks, "T4.2").verdict, Verdict::pass);
    EXPECT_EQ(find(checks, "T4.3").verdict, Verdict::pass);
    const auto chain = theorem_chain(si);
    EXPECT_LE(find(chain, "4.16").residual_inf, 1e-9);
  }
}

TEST(Hypersurface, ParallelTangentFlatHyperplaneKeepsKind) {
  const auto e = euclidean_metric(3);
  const auto cs = kropina_change(e, HVectorSpec::function_of_x(constant_covector({1.0, 0.5, 0.0})));
  const auto hs = hyperplane(3, 2);
  const auto grid = sample_surface(hs, cs.starred, 5, 10);
  EXPECT_EQ(classify(hs, e, grid).kind, HyperplaneKind::third);
  EXPECT_EQ(classify(hs, cs.starred, grid).kind, HyperplaneKind::third);
  const auto checks = theorem_checks(starred_geometry(hs, cs, grid[0].u, grid[0].v));
  EXPECT_EQ(find(checks, "4.37").verdict, Verdict::pass);
  EXPECT_EQ(find(checks, "T4.5").verdict, Verdict::pass);
  EXPECT_TRUE(find(checks, "T4.5").hypotheses_met);
}

TEST(Hypersurface, PrintedRelationForChangedHTensor) {
  const auto m = sample_randers(3);
  const auto hs = graph(3, Polynomial::parse("0.3*x1*x2 + 0.2*x1^2", 2));
  const Vec u{0.2, -0.3}, v{1.0, 0.4};
  const auto ig = induced_geometry(hs, m, u, v);
  ConstrainedJetInput in;
  in.anchor = ig.point;
  in.rho = 0.2;
  in.b = project_tangent({1.0, 0.5, 0.7}, ig.N_up, ig.N_low);
  const auto chain = theorem_chain(hs, kropina_change(m, HVectorSpec::constrained(in)), u, v);
  const auto& r = find(chain, "4.35");
  EXPECT_LE(r.aux.at("corrected_form_residual"), 1e-10);
}

TEST(Hypersurface, LandsbergCondition) {
  const auto cs = kropina_change(reflection_symmetric_metric(), HVectorSpec::function_of_x(gradient_field()));
  EXPECT_EQ(landsberg_condition_check(cs, {{0.1, 0.2, 0.3}, {1.0, 0.5, 0.2}}).verdict, Verdict::pass);
  // Constant coefficients: a Berwald-type Randers metric with a constant b.
  Mat a = identity(3);
  a(0, 1) = a(1, 0) = 0.2;
  const auto randers = randers_metric(constant_matrix(a), constant_covector({0.2, 0.1, 0.0}));
  const auto cr = kropina_change(randers, HVectorSpec::function_of_x(constant_covector({1.0, 0.3, 0.2})));
  const auto r = landsberg_condition_check(cr, {{0.1, 0.2, 0.3}, {1.0, 0.5, 0.2}});
  EXPECT_LE(r.aux.at("P_norm"), 1e-10);
  EXPECT_LE(r.residual_inf, 1e-7);
}

TEST(Hypersurface, RankDeficiencyAndConflicts) {
  const auto degenerate = polynomial_map({Polynomial::parse("x1", 2), Polynomial::parse("x1", 2),
                                          Polynomial::parse("0", 2)});
  EXPECT_THROW(induced_geometry(degenerate, euclidean_metric(3), {0.1, 0.2}, {1.0, 0.0}), RankDeficiencyError);
  const auto cs = kropina_change(euclidean_metric(3), HVectorSpec::function_of_x(constant_covector({1.0, 0.5, 0.0})));
  EXPECT_THROW(theorem_chain(hyperplane(3, 2), cs, {0.1, 0.2}, {1.0, 0.5}, {}, {Tag::COND428}),
               HypothesisConflictError);
}
