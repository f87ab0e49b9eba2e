#include <gtest/gtest.h>

#include "finslerlab/finsler.hpp"
#include "finslerlab/sampling.hpp"
#include "oracles.hpp"

using namespace finslerlab;

namespace {

std::vector<std::vector<Polynomial>> diag_metric() {
  return {{Polynomial::parse("1", 2), Polynomial::parse("0", 2)},
          {Polynomial::parse("0", 2), Polynomial::parse("x1^2 + 1", 2)}};
}

std::vector<std::vector<Polynomial>> curved3() {
  return {{Polynomial::parse("1 + 0.1*x2^2", 3), Polynomial::parse("0.2*x1", 3), Polynomial::parse("0", 3)},
          {Polynomial::parse("0.2*x1", 3), Polynomial::parse("2 + 0.3*x3", 3), Polynomial::parse("0.1", 3)},
          {Polynomial::parse("0", 3), Polynomial::parse("0.1", 3), Polynomial::parse("1.5 + 0.3*x1*x2", 3)}};
}

MetricSpec randers_flat(double d1, double d2) {
  return randers_metric(constant_matrix(identity(2)), constant_covector({d1, d2}));
}

}  // namespace

TEST(Finsler, EuclideanTensors) {
  const PointState p{{0.3, -0.2}, {1.0, 2.0}};
  const auto t = fundamental_tensors(euclidean_metric(2), p);
  const double r2 = 5.0;
  for (int i = 0; i < 2; ++i)
    for (int j = 0; j < 2; ++j) {
      EXPECT_NEAR(t.g(i, j), i == j ? 1.0 : 0.0, 1e-14);
      EXPECT_NEAR(t.h(i, j), (i == j ? 1.0 : 0.0) - p.y[i] * p.y[j] / r2, 1e-14);
      for (int k = 0; k < 2; ++k) {
        EXPECT_NEAR(t.C(i, j, k), 0.0, 1e-14);
        EXPECT_NEAR(t.cartan(i, j, k), 0.0, 1e-14);
      }
    }
  EXPECT_NEAR(norm_inf(t.spray), 0.0, 1e-15);
}

TEST(Finsler, RiemannianSprayMatchesChristoffel) {
  const auto a = diag_metric();
  const auto m = riemannian_metric(polynomial_matrix(a));
  const PointState p{{1.0, 0.0}, {1.0, 1.0}};
  const auto t = spray_and_connections(m, p);
  EXPECT_NEAR(t.g(0, 0), 1.0, 1e-14);
  EXPECT_NEAR(t.g(1, 1), 2.0, 1e-14);
  EXPECT_NEAR(t.g(0, 1), 0.0, 1e-14);
  const auto c = oracle::christoffel(a, p.x);
  for (int i = 0; i < 2; ++i) {
    double G = 0.0;
    for (int j = 0; j < 2; ++j)
      for (int k = 0; k < 2; ++k) G += 0.5 * c.gamma(i, j, k) * p.y[j] * p.y[k];
    EXPECT_NEAR(t.spray[i], G, 1e-9);
  }
}

TEST(Finsler, RiemannianCartanIsChristoffelAndFiberIndependent) {
  const auto a = curved3();
  const auto m = riemannian_metric(polynomial_matrix(a));
  const PointState p{{0.3, -0.4, 0.5}, {1.0, 0.6, 0.4}};
  const PointState q{{0.3, -0.4, 0.5}, {-0.2, 1.1, 0.7}};
  const auto t = spray_and_connections(m, p);
  const auto s = spray_and_connections(m, q);
  const auto c = oracle::christoffel(a, p.x);
  EXPECT_LE(max_abs_diff(t.cartan, c.gamma), 1e-9);
  EXPECT_LE(max_abs_diff(s.cartan, c.gamma), 1e-9);
  EXPECT_LE(max_abs_diff(*t.berwald, c.gamma), 1e-9);
}

TEST(Finsler, RandersMetricMatchesFiniteDifferences) {
  const auto m = randers_flat(0.3, 0.0);
  const PointState p{{0.1, 0.2}, {1.0, 1.0}};
  const auto t = fundamental_tensors(m, p);
  const auto fd = oracle::values_of([&](const JetVars& v) {
    const Jet L = m.evaluate(v);
    return 0.5 * L * L;
  });
  for (int i = 0; i < 2; ++i)
    for (int j = 0; j < 2; ++j) {
      const double want = oracle::partial(fd, {2 + i, 2 + j}, p.x, p.y);
      EXPECT_NEAR(t.g(i, j), want, 1e-5);
    }
}

TEST(Finsler, DeflectionIdentityOnZoo) {
  for (int n : {2, 3}) {
    for (const auto& m : metric_zoo(n)) {
      auto sampler = metric_sampler(m, 7);
      for (int s = 0; s < 10; ++s) {
        const auto p = sampler.next();
        const auto t = spray_and_connections(m, p);
        for (int i = 0; i < n; ++i) {
          double Fyy = 0.0;
          for (int j = 0; j < n; ++j) {
            double Fy = 0.0;
            for (int k = 0; k < n; ++k) {
              Fyy += t.cartan(i, j, k) * p.y[j] * p.y[k];
              Fy += t.cartan(i, k, j) * p.y[k];
            }
            EXPECT_NEAR(Fy, t.nonlinear(i, j), 1e-9 * (1 + std::abs(t.nonlinear(i, j)))) << m.label;
          }
          EXPECT_NEAR(Fyy, 2 * t.spray[i], 1e-9 * (1 + std::abs(t.spray[i]))) << m.label;
        }
      }
    }
  }
}

TEST(Finsler, NonlinearConnectionIsFiberDerivativeOfSpray) {
  const auto zoo = metric_zoo(3);
  const auto& m = zoo[2];
  auto sampler = metric_sampler(m, 3);
  const auto p = sampler.next();
  const auto t = spray_and_connections(m, p);
  const double h = 1e-5;
  for (int j = 0; j < 3; ++j) {
    auto pp = p, pm = p;
    pp.y[j] += h;
    pm.y[j] -= h;
    const auto tp = geometry(m, pp);
    const auto tm = geometry(m, pm);
    for (int i = 0; i < 3; ++i) {
      EXPECT_NEAR((tp.spray[i] - tm.spray[i]) / (2 * h), t.nonlinear(i, j), 1e-7);
      for (int k = 0; k < 3; ++k)
        EXPECT_NEAR((tp.nonlinear(i, k) - tm.nonlinear(i, k)) / (2 * h), (*t.berwald)(i, k, j), 1e-6);
    }
  }
}

TEST(Finsler, HCovariantOfNormalizedSupportingElementVanishes) {
  for (const auto& m : metric_zoo(3)) {
    auto sampler = metric_sampler(m, 19);
    for (int s = 0; s < 5; ++s) {
      const auto p = sampler.next();
      EXPECT_LE(norm_inf(h_covariant(normalized_supporting_element(m), m, p)), 1e-9) << m.label;
    }
  }
}

TEST(Finsler, HCovariantOfConstantCovectorOnEuclidean) {
  const auto X = base_covector_field(constant_covector({0.4, -1.0, 2.0}));
  const PointState p{{0.1, 0.2, 0.3}, {1.0, -1.0, 0.5}};
  EXPECT_LE(norm_inf(h_covariant(X, euclidean_metric(3), p)), 1e-15);
  EXPECT_LE(norm_inf(v_covariant(X, euclidean_metric(3), p)), 1e-15);
}

TEST(Finsler, HCovariantMatchesClassicalOnRiemannian) {
  const auto a = curved3();
  const auto m = riemannian_metric(polynomial_matrix(a));
  const std::vector<Polynomial> d{Polynomial::parse("x1*x2 + 0.5", 3), Polynomial::parse("x3^2", 3),
                                  Polynomial::parse("1 - x1", 3)};
  const PointState p{{0.3, -0.4, 0.5}, {1.0, 0.6, 0.4}};
  const Mat got = h_covariant(base_covector_field(polynomial_covector(d)), m, p);
  const auto c = oracle::christoffel(a, p.x);
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j) {
      double want = d[i].derivative(j)(p.x);
      for (int r = 0; r < 3; ++r) want -= c.gamma(r, i, j) * d[r](p.x);
      EXPECT_NEAR(got(i, j), want, 1e-9);
    }
}

TEST(Finsler, VCovariantExamples) {
  for (const auto& m : metric_zoo(3)) {
    auto sampler = metric_sampler(m, 23);
    const auto p = sampler.next();
    const auto t = geometry(m, p);
    const Mat yv = v_covariant(covector_data(lowered_supporting_element(m), p), t);
    EXPECT_LE(max_abs_diff(yv, t.g), 1e-9) << m.label;
    const Mat lv = v_covariant(covector_data(normalized_supporting_element(m), p), t);
    EXPECT_LE(max_abs_diff(lv, (1.0 / t.L) * t.h), 1e-9) << m.label;
  }
}

TEST(Finsler, LandsbergTensorExamples) {
  const PointState p{{0.2, -0.1, 0.4}, {1.0, 0.5, -0.3}};
  EXPECT_LE(landsberg_tensor(euclidean_metric(3), p).norm, 1e-12);
  EXPECT_TRUE(landsberg_tensor(riemannian_metric(sample_riemannian_field(3)), p).is_landsberg);
  const auto berwald = randers_metric(constant_matrix(identity(3)), constant_covector({0.2, 0.1, -0.1}));
  EXPECT_LE(landsberg_tensor(berwald, p).norm, 1e-8);
  const auto general = randers_metric(sample_riemannian_field(3), sample_one_form(3, 0.3));
  const auto r = landsberg_tensor(general, p);
  EXPECT_FALSE(r.is_landsberg);
  EXPECT_GT(r.norm, 1e-4);
}

TEST(Finsler, DegenerateAndInadmissiblePoints) {
  const auto kro = kropina_metric(constant_matrix(identity(2)), constant_covector({1.0, 0.0}));
  EXPECT_THROW((void)geometry(kro, PointState{{0, 0}, {-1.0, 0.3}}), InadmissiblePointError);
  Mat sing = identity(2);
  sing(1, 1) = 0.0;
  const auto deg = riemannian_metric(constant_matrix(sing));
  EXPECT_THROW((void)geometry(deg, PointState{{0, 0}, {1.0, 0.3}}), DegenerateMetricError);
}

// ---- invariants at 100 random points per family ---------------------------

class BaseInvariants : public ::testing::TestWithParam<int> {};

TEST_P(BaseInvariants, EulerMetricityHomogeneityInverse) {
  const int n = 3;
  const auto m = metric_zoo(n)[static_cast<std::size_t>(GetParam())];
  auto sampler = metric_sampler(m, 100 + static_cast<std::uint64_t>(GetParam()));
  for (int s = 0; s < 100; ++s) {
    const auto p = sampler.next();
    const auto t = geometry(m, p);
    const double L2 = t.L * t.L;
    EXPECT_NEAR(dot(t.l, p.y), t.L, 1e-9 * t.L);
    EXPECT_NEAR(bilinear(p.y, t.g, p.y), L2, 1e-9 * L2);
    EXPECT_LE(norm_inf(matvec(t.h, p.y)), 1e-9 * t.L);
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j) {
        double cy = 0.0;
        for (int k = 0; k < n; ++k) cy += t.C(i, j, k) * p.y[k];
        EXPECT_LE(std::abs(cy), 1e-9 * (1 + norm_inf(t.C)));
      }
    EXPECT_LE(max_abs_diff(matmul(t.g_inv, t.g), identity(n)), 1e-10);
    // g_ij|k = ∂_k g_ij - G^r_k ∂̇_r g_ij - F^r_ik g_rj - F^r_jk g_ir
    // g_ij|_k = ∂̇_k g_ij - C^r_ik g_rj - C^r_jk g_ir, and ∂̇_k g_ij = 2 C_ijk.
    double hmet = 0.0, vmet = 0.0;
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j)
        for (int k = 0; k < n; ++k) {
          double h = t.dg_dx(i, j, k), v = 2 * t.C(i, j, k);
          for (int r = 0; r < n; ++r) {
            h -= t.nonlinear(r, k) * 2 * t.C(i, j, r) + t.cartan(r, i, k) * t.g(r, j) +
                 t.cartan(r, j, k) * t.g(i, r);
            v -= t.C_up(r, i, k) * t.g(r, j) + t.C_up(r, j, k) * t.g(i, r);
          }
          hmet = std::max(hmet, std::abs(h));
          vmet = std::max(vmet, std::abs(v));
        }
    const double hscale = 1 + norm_inf(t.g) * (norm_inf(t.cartan) + norm_inf(t.nonlinear) * norm_inf(t.C));
    const double vscale = 1 + norm_inf(t.g) * norm_inf(t.C_up);
    EXPECT_LE(hmet / hscale, 1e-8) << m.label;
    EXPECT_LE(vmet / vscale, 1e-8) << m.label;
    for (double lambda : {0.5, 2.0, 7.0}) {
      PointState q = p;
      for (auto& v : q.y) v *= lambda;
      const auto tq = fundamental_tensors(m, q);
      EXPECT_LE(max_abs_diff(tq.g, t.g), 1e-10 * (1 + norm_inf(t.g))) << m.label;
    }
  }
}

INSTANTIATE_TEST_SUITE_P(Zoo, BaseInvariants, ::testing::Values(0, 1, 2, 3, 4));

TEST(Finsler, BaseSpaceReportsPassOnZoo) {
  for (const auto& m : metric_zoo(3)) {
    auto sampler = metric_sampler(m, 5);
    for (int s = 0; s < 20; ++s) {
      for (const auto& r : verify_base_space(m, sampler.next())) {
        EXPECT_EQ(r.verdict, Verdict::pass) << m.label << " " << r.equation_id << " " << r.residual_inf;
      }
    }
  }
}
