// Builds a Randers space, applies the Kropina change with b = 0.2 l + c and
// prints the closed-form checks and the normal of a changed hypersurface.

#include <cstdio>

#include "finslerlab/hypersurface.hpp"

using namespace finslerlab;

int main() {
  const auto base = randers_metric(sample_riemannian_field(3), sample_one_form(3, 0.3));
  const auto cs = kropina_change(base, HVectorSpec::explicit_family(0.2, constant_covector({1.0, 0.4, 0.3})));

  const PointState p{{0.1, -0.2, 0.3}, {1.0, 0.5, 0.2}};
  for (const auto& r : verify_changed_tensors(cs, p)) {
    std::printf("%-4s %-4s rel %.2e\n", r.equation_id.c_str(), to_string(r.verdict).c_str(), r.residual_rel);
  }

  const auto t = fundamental_tensors(cs.starred, p);
  std::printf("*L = %.6f, det *g = %.6f\n", t.L, determinant(t.g));

  const auto hs = graph(3, Polynomial::parse("0.3*x1*x2", 2));
  const auto s = starred_geometry(hs, cs, {0.2, -0.3}, {1.0, 0.4});
  std::printf("b.N = %.4f, cos(*N, N) = %.6f\n", s.tangency, s.cosine);
  for (const auto& r : theorem_checks(s)) {
    std::printf("%-5s %-4s %s\n", r.equation_id.c_str(), to_string(r.verdict).c_str(), r.note.c_str());
  }
}
