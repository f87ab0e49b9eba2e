#include <gtest/gtest.h>

#include "finslerlab/metric.hpp"
#include "finslerlab/polynomial.hpp"

using namespace finslerlab;

TEST(Polynomial, ParsesAndEvaluates) {
  const auto p = Polynomial::parse("1 + 0.5*x1^2*x2 - (x1 - x2)^2", 2);
  const double x1 = 0.7, x2 = -1.3;
  EXPECT_NEAR(p({x1, x2}), 1 + 0.5 * x1 * x1 * x2 - (x1 - x2) * (x1 - x2), 1e-14);
  EXPECT_EQ(p.degree(), 3);
}

TEST(Polynomial, Derivative) {
  const auto p = Polynomial::parse("3*u1^3*u2 + 2e-1*u2^2 - u1", 2, 'u');
  const auto d = p.derivative(0);
  EXPECT_NEAR(d({2.0, 0.5}), 9 * 4 * 0.5 - 1, 1e-14);
  EXPECT_NEAR(p.derivative(1).derivative(1)({0.0, 0.0}), 0.4, 1e-15);
}

TEST(Polynomial, RoundTripThroughString) {
  const auto p = Polynomial::parse("-2.5*x1*x3 + x2^4 + 0.125", 3);
  const auto q = Polynomial::parse(p.to_string(), 3);
  EXPECT_NEAR(q({0.3, -0.2, 1.1}), p({0.3, -0.2, 1.1}), 1e-15);
}

TEST(Polynomial, ErrorsNameTheProblem) {
  EXPECT_THROW((void)Polynomial::parse("x3 + 1", 2), ConfigError);
  EXPECT_THROW((void)Polynomial::parse("x1 +* 2", 2), ConfigError);
  EXPECT_THROW((void)Polynomial::parse("(x1 + 2", 2), ConfigError);
  try {
    (void)Polynomial::parse("x1 + x7", 2);
    FAIL();
  } catch (const ConfigError& e) {
    EXPECT_NE(std::string(e.what()).find("x7"), std::string::npos);
  }
}

TEST(Polynomial, JetEvaluationMatchesDerivative) {
  const auto p = Polynomial::parse("x1^2*x2 + 3*x2", 2);
  const PointState pt{{0.4, 1.5}, {1.0, 1.0}};
  const Jet j = lift([&](const JetVars& v) { return polynomial_field(p)(v.x); }, pt, Caps{1, 0});
  EXPECT_NEAR(j.partial({0}, {}), p.derivative(0)(pt.x), 1e-15);
  EXPECT_NEAR(j.partial({1}, {}), p.derivative(1)(pt.x), 1e-15);
}
