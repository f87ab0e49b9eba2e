#include <gtest/gtest.h>

#include "finslerlab/hfield.hpp"
#include "finslerlab/sampling.hpp"
#include "oracles.hpp"

using namespace finslerlab;

namespace {

MetricSpec sample_randers(int n) { return randers_metric(sample_riemannian_field(n), sample_one_form(n, 0.3)); }

std::vector<BaseField> sample_c(int n) {
  std::vector<Polynomial> c;
  for (int i = 0; i < n; ++i) {
    c.push_back(Polynomial::parse(std::to_string(1.0 + 0.3 * i) + " + 0.2*x" + std::to_string(i + 1) +
                                      " - 0.1*x1*x" + std::to_string(n), n));
  }
  return polynomial_covector(c);
}

// Value of b at (x, y), for finite differences.
Vec b_values(const CovectorField& b, const Vec& x, const Vec& y) {
  const auto v = make_vars(PointState{x, y}, Caps{0, b.extra_fiber_orders});
  Vec out;
  for (const auto& j : b.evaluate(v)) out.push_back(j.value());
  return out;
}

}  // namespace

TEST(HField, ExplicitConstantOnEuclidean) {
  const Vec c{0.5, 1.5};
  const auto h = HVectorSpec::explicit_family(0.0, constant_covector(c));
  const PointState p{{0.2, 0.1}, {1.0, 2.0}};
  const auto st = evaluate(h, euclidean_metric(2), p);
  EXPECT_NEAR(st.b.value[0], 0.5, 1e-15);
  EXPECT_NEAR(st.s.beta, 0.5 + 3.0, 1e-15);
  const double r2 = 5.0;
  for (int i = 0; i < 2; ++i) EXPECT_NEAR(st.s.m[i], c[i] - p.y[i] * st.s.beta / r2, 1e-14);
}

TEST(HField, MIsOrthogonalToY) {
  const auto m = sample_randers(3);
  auto sampler = metric_sampler(m, 5);
  for (double rho : {0.0, 0.2, -0.3}) {
    const auto h = HVectorSpec::explicit_family(rho, sample_c(3));
    for (int s = 0; s < 10; ++s) {
      const auto p = sampler.next();
      const auto st = evaluate(h, m, p);
      EXPECT_LE(std::abs(dot(st.s.m, p.y)), 1e-12 * (1 + std::abs(st.s.beta)));
    }
  }
}

TEST(HField, ExplicitFamilyForcedFiberDerivative) {
  const auto m = sample_randers(3);
  const auto h = HVectorSpec::explicit_family(0.2, sample_c(3));
  auto sampler = metric_sampler(m, 9);
  for (int s = 0; s < 100; ++s) {
    const auto p = sampler.next();
    const auto st = evaluate(h, m, p);
    EXPECT_LE(max_abs_diff(st.b.dy, (0.2 / st.base.L) * st.base.h), 1e-9);
    EXPECT_LE(hvector_residuals(st).r2, 1e-10);
  }
}

TEST(HField, FunctionOfXOnRiemannianHasNoResiduals) {
  const auto m = riemannian_metric(sample_riemannian_field(3));
  const auto h = HVectorSpec::function_of_x(sample_c(3));
  const auto r = hvector_residuals(h, m, PointState{{0.1, 0.2, -0.3}, {1.0, 0.5, 0.2}});
  EXPECT_LE(r.r1, 1e-13);
  EXPECT_LE(r.r2, 1e-13);
}

TEST(HField, ExplicitOnRandersViolatesConditionTwo) {
  const auto m = sample_randers(3);
  const auto r = hvector_residuals(HVectorSpec::explicit_family(0.2, sample_c(3)), m,
                                   PointState{{0.1, 0.2, -0.3}, {1.0, 0.5, 0.2}});
  EXPECT_LE(r.r2, 1e-10);
  EXPECT_GT(r.r1, 1e-3);
}

TEST(HField, GradientHasNoAntisymmetricPart) {
  const std::vector<Polynomial> grad{Polynomial::parse("x2", 2), Polynomial::parse("x1", 2)};
  const auto h = HVectorSpec::explicit_family(0.0, polynomial_covector(grad));
  const auto st = evaluate(h, euclidean_metric(2), PointState{{0.3, 0.7}, {1.0, 0.4}});
  EXPECT_LE(norm_inf(st.cov.F), 1e-15);
  EXPECT_GT(norm_inf(st.cov.E), 0.1);
}

TEST(HField, ParallelOnEuclidean) {
  const auto h = HVectorSpec::explicit_family(0.0, constant_covector({1.0, 0.5, 0.2}));
  const auto st = evaluate(h, euclidean_metric(3), PointState{{0.3, 0.7, 0.0}, {1.0, 0.4, -0.2}});
  EXPECT_EQ(norm_inf(st.cov.E), 0.0);
  EXPECT_EQ(norm_inf(st.cov.F), 0.0);
  EXPECT_EQ(norm_inf(st.cov.beta_j), 0.0);
  EXPECT_EQ(st.s.A, 0.0);
}

TEST(HField, CovariantDerivativeMatchesFiniteDifferences) {
  const auto m = sample_randers(3);
  const auto h = HVectorSpec::explicit_family(0.2, sample_c(3));
  const PointState p{{0.1, -0.2, 0.3}, {0.8, 0.5, -0.4}};
  const auto st = evaluate(h, m, p);
  const auto field = realize(h, m);
  const double eps = 1e-5;
  Mat dx = zeros(3, 3), dy = zeros(3, 3);
  for (int j = 0; j < 3; ++j) {
    auto xp = p.x, xm = p.x, yp = p.y, ym = p.y;
    xp[j] += eps;
    xm[j] -= eps;
    yp[j] += eps;
    ym[j] -= eps;
    const Vec bxp = b_values(field.b, xp, p.y), bxm = b_values(field.b, xm, p.y);
    const Vec byp = b_values(field.b, p.x, yp), bym = b_values(field.b, p.x, ym);
    for (int i = 0; i < 3; ++i) {
      dx(i, j) = (bxp[i] - bxm[i]) / (2 * eps);
      dy(i, j) = (byp[i] - bym[i]) / (2 * eps);
    }
  }
  const CovectorData fd{b_values(field.b, p.x, p.y), dx, dy};
  const Mat bij = h_covariant(fd, st.base);
  EXPECT_LE(max_abs_diff(0.5 * (bij + transpose(bij)), st.cov.E), 1e-6);
  EXPECT_LE(max_abs_diff(0.5 * (bij - transpose(bij)), st.cov.F), 1e-6);
}

TEST(HField, ConstrainedJetReproducesSlots) {
  const auto m = sample_randers(3);
  ConstrainedJetInput in;
  in.anchor = PointState{{0.1, -0.2, 0.3}, {0.8, 0.5, -0.4}};
  in.b = {1.0, 0.4, -0.3};
  in.rho = 0.2;
  in.E = zeros(3, 3);
  in.F = zeros(3, 3);
  in.E(0, 0) = 0.3;
  in.E(0, 1) = in.E(1, 0) = -0.2;
  in.F(1, 2) = 0.4;
  in.F(2, 1) = -0.4;
  std::mt19937_64 rng(1);
  const auto before = evaluate(HVectorSpec::constrained(in), m, in.anchor);
  for (int draw = 0; draw < 5; ++draw) {
    randomize_free_slots(in, rng);
    const auto st = evaluate(HVectorSpec::constrained(in), m, in.anchor);
    EXPECT_LE(max_abs_diff(st.b.value, in.b), 1e-14);
    EXPECT_LE(max_abs_diff(st.cov.E, in.E), 1e-12);
    EXPECT_LE(max_abs_diff(st.cov.F, in.F), 1e-12);
    EXPECT_LE(max_abs_diff(st.cov.rho_k, in.rho_k), 1e-15);
    EXPECT_LE(max_abs_diff(st.b.dy, before.b.dy), 1e-14);
    EXPECT_LE(hvector_residuals(st).r2, 1e-12);
  }
}

TEST(HField, GradientModeRejectsConflicts) {
  ConstrainedJetInput in;
  in.anchor = PointState{{0.0, 0.0}, {1.0, 0.5}};
  in.b = {1.0, 0.2};
  in.gradient = true;
  in.F = zeros(2, 2);
  in.F(0, 1) = 0.1;
  in.F(1, 0) = -0.1;
  EXPECT_THROW((void)realize(HVectorSpec::constrained(in), euclidean_metric(2)), HypothesisConflictError);
  in.F = zeros(2, 2);
  in.rho_k = {0.1, 0.0};
  EXPECT_THROW((void)realize(HVectorSpec::constrained(in), euclidean_metric(2)), HypothesisConflictError);
  in.rho_k = {};
  in.E = zeros(2, 2);
  in.E(0, 1) = 1.0;
  EXPECT_THROW((void)realize(HVectorSpec::constrained(in), euclidean_metric(2)), HypothesisConflictError);
}

TEST(HField, FittedRhoSatisfiesConditionTwoInDimensionTwo) {
  const auto m = randers_metric(sample_riemannian_field(2), sample_one_form(2, 0.3));
  ConstrainedJetInput in;
  in.anchor = PointState{{0.1, 0.3}, {1.0, 0.6}};
  in.b = {0.7, -0.9};
  in.rho = fitted_rho(m, in.anchor, in.b);
  EXPECT_GT(std::abs(in.rho), 1e-3);
  const auto r = hvector_residuals(HVectorSpec::constrained(in), m, in.anchor);
  EXPECT_LE(r.r1, 1e-12);
  EXPECT_LE(r.r2, 1e-12);
}

TEST(HField, BetaGuard) {
  const auto h = HVectorSpec::explicit_family(0.0, constant_covector({1.0, -1.0}));
  EXPECT_THROW((void)evaluate(h, euclidean_metric(2), PointState{{0, 0}, {1.0, 1.0}}), InadmissiblePointError);
}
