#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace hesslab {

// Outcome of one reference scenario with pinned tolerances.
struct CheckResult {
  std::string name;
  bool pass = false;
  std::string detail;
  double seconds = 0.0;
};

// phi_2 on the (3, 2) Reinhardt domain: 1- and 2-subharmonic, and sigma_3 = -1/2 at every node.
CheckResult check_quadratic_dichotomy(double h = 0.25);
// hartogs_exh on the Hartogs triangle with m = 1.
CheckResult check_hartogs_exhaustion(double h = 0.02);
// Hyperconvexity verdicts on the Hartogs triangle: PASS for m = 1, persistent failure near the origin for m = 2.
CheckResult check_hartogs_hyperconvexity();
// Relative extremal function of disc(0, 1/4) in the unit disc against max(log|z| / log 4, -1).
CheckResult check_disc_extremal(double h = 0.01);
// bounded_mass exhaustion on the unit ball of C^2 with m = 2.
CheckResult check_bounded_mass(double h = 0.05);
// Cone nesting, Garding consistency and mixed-coefficient symmetry/multilinearity on random forms.
CheckResult check_cone_suite(int count = 1000, std::uint64_t seed = 7);
// Monotonicity, idempotence and m-monotonicity of obstacle envelopes.
CheckResult check_envelope_lattice(int grid = 24, int pairs = 20, std::uint64_t seed = 11);

std::string format_check(const CheckResult& r);

}  // namespace hesslab
