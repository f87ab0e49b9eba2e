#pragma once

// Finite-difference and classical-geometry oracles shared by the unit tests.

#include <cmath>
#include <functional>
#include <vector>

#include "finslerlab/jet.hpp"

namespace oracle {

using Fn = std::function<double(const std::vector<double>& x, const std::vector<double>& y)>;

// Value of a jet-written function through a (0,0)-cap jet.
inline Fn values_of(const finslerlab::JetScalarFunction& f) {
  return [f](const std::vector<double>& x, const std::vector<double>& y) {
    return finslerlab::lift(f, finslerlab::PointState{x, y}, finslerlab::Caps{0, 0}).value();
  };
}

// Central difference along variable `var` (0..n-1 base, n..2n-1 fiber).
inline Fn central(const Fn& f, int var, double h) {
  return [f, var, h](const std::vector<double>& x, const std::vector<double>& y) {
    const int n = static_cast<int>(x.size());
    auto shifted = [&](double s) {
      auto xs = x;
      auto ys = y;
      if (var < n) xs[static_cast<std::size_t>(var)] += s;
      else ys[static_cast<std::size_t>(var - n)] += s;
      return f(xs, ys);
    };
    return (shifted(h) - shifted(-h)) / (2 * h);
  };
}

// Fourth-order five-point stencil; used when nesting for higher partials.
inline Fn central4(const Fn& f, int var, double h) {
  return [f, var, h](const std::vector<double>& x, const std::vector<double>& y) {
    const int n = static_cast<int>(x.size());
    auto shifted = [&](double s) {
      auto xs = x;
      auto ys = y;
      if (var < n) xs[static_cast<std::size_t>(var)] += s;
      else ys[static_cast<std::size_t>(var - n)] += s;
      return f(xs, ys);
    };
    return (-shifted(2 * h) + 8 * shifted(h) - 8 * shifted(-h) + shifted(-2 * h)) / (12 * h);
  };
}

// Mixed partial over the listed variables: a single order-2 stencil with
// step 1e-5 for first partials, nested five-point stencils for higher orders
// with the step widened per order to balance rounding against truncation.
inline double partial(const Fn& f, const std::vector<int>& vars, const std::vector<double>& x,
                      const std::vector<double>& y) {
  if (vars.empty()) return f(x, y);
  if (vars.size() == 1) return central(f, vars[0], 1e-5)(x, y);
  const double h = vars.size() == 2 ? 1e-3 : vars.size() == 3 ? 3e-3 : 1e-2;
  Fn g = f;
  for (int v : vars) g = central4(g, v, h);
  return g(x, y);
}

inline bool close(double got, double want, double rel, double abs_tol) {
  return std::abs(got - want) <= std::max(abs_tol, rel * std::max(std::abs(got), std::abs(want)));
}

}  // namespace oracle

// Classical Riemannian quantities from a polynomial metric a_ij(x), computed
// with polynomial derivatives and no jets.
#include "finslerlab/dense.hpp"
#include "finslerlab/polynomial.hpp"

namespace oracle {

struct Christoffel {
  finslerlab::Mat a;
  finslerlab::Mat a_inv;
  finslerlab::Tensor3 gamma;  // Γ^i_jk
};

inline Christoffel christoffel(const std::vector<std::vector<finslerlab::Polynomial>>& a,
                               const std::vector<double>& x) {
  using namespace finslerlab;
  const int n = static_cast<int>(a.size());
  Christoffel c{zeros(n, n), zeros(n, n), Tensor3(n)};
  Tensor3 da(n);  // ∂_k a_ij
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) {
      c.a(i, j) = a[i][j](x);
      for (int k = 0; k < n; ++k) da(i, j, k) = a[i][j].derivative(k)(x);
    }
  c.a_inv = inverse(c.a);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j)
      for (int k = 0; k < n; ++k) {
        double s = 0.0;
        for (int r = 0; r < n; ++r) s += c.a_inv(i, r) * (da(r, j, k) + da(r, k, j) - da(j, k, r));
        c.gamma(i, j, k) = 0.5 * s;
      }
  return c;
}

}  // namespace oracle
