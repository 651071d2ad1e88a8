// One line per acceptance criterion; exit status 0 only when all pass.
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>

#include "hesslab/checks.hpp"
#include "hesslab/jensen.hpp"
#include "oracles.hpp"

using namespace hesslab;

namespace {

// Edwards duality on the disc, 16 spacings across, 20-member family, checked
// against an independently solved sup-side LP.
CheckResult check_edwards() {
  CheckResult r;
  r.name = "edwards duality";
  const auto t0 = std::chrono::steady_clock::now();
  try {
    auto d = make_domain(ball_shape(1, 1.0), 2.0 / 16);
    FamilySpec fs;
    fs.quadratic_count = 10;
    auto fam = build_test_family(d, 1, fs);
    if (fam.members.size() != 20) throw std::runtime_error("family size " + std::to_string(fam.members.size()));
    const auto nodes = masked_nodes(*d);
    const int k = static_cast<int>(fam.members.size()), m = static_cast<int>(nodes.size());
    Rng rng(7);
    double worst_gap = 0, worst_oracle = 0;
    bool ok = true;
    for (int t = 0; t < 10; ++t) {
      const auto z = nodes[rng.next() % nodes.size()];
      GridField g = make_field(d, 0.0);
      for (auto p : nodes) g.values[p] = rng.uniform(-1, 1);
      const auto e = edwards_gap(z, g, fam);
      double lo = INFINITY;
      for (auto p : nodes) lo = std::min(lo, g[p]);
      const double shift = 1 - lo;
      Eigen::MatrixXd a(m, k);
      Eigen::VectorXd b(m), c(k);
      for (int i = 0; i < m; ++i) {
        b[i] = g[nodes[i]] + shift;
        for (int j = 0; j < k; ++j) a(i, j) = fam.members[j].field[nodes[i]];
      }
      for (int j = 0; j < k; ++j) c[j] = fam.members[j].field[z];
      const auto ref = oracle::max_le(a, b, c);
      const double dev = std::max(std::abs(e.inf_side - (ref.value - shift)), std::abs(e.sup_side - (ref.value - shift)));
      worst_gap = std::max(worst_gap, std::abs(e.gap));
      worst_oracle = std::max(worst_oracle, dev);
      ok = ok && ref.optimal && std::abs(e.gap) <= 1e-8 && dev <= 1e-8;
    }
    r.pass = ok;
    char buf[160];
    std::snprintf(buf, sizeof buf, "10 pairs, %d members, worst gap %.2e, worst deviation from oracle %.2e (tol 1e-8)", k,
                  worst_gap, worst_oracle);
    r.detail = buf;
  } catch (const std::exception& e) {
    r.detail = std::string("error: ") + e.what();
  }
  r.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return r;
}

}  // namespace

int main() {
  const std::vector<std::pair<double, std::function<CheckResult()>>> criteria{
      {1, [] { return check_quadratic_dichotomy(); }},
      {30, [] { return check_hartogs_exhaustion(0.02); }},
      {300, [] { return check_hartogs_hyperconvexity(); }},
      {60, [] { return check_disc_extremal(0.01); }},
      {60, check_edwards},
      {300, [] { return check_bounded_mass(0.05); }},
      {30, [] { return check_cone_suite(1000, 7); }},
      {120, [] { return check_envelope_lattice(24, 20, 11); }},
  };
  int failed = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    auto r = criteria[i].second();
    const bool in_time = r.seconds <= criteria[i].first;
    if (!in_time) r.detail += ", over the time budget";
    r.pass = r.pass && in_time;
    failed += !r.pass;
    std::printf("criterion %zu: %s\n", i + 1, format_check(r).c_str());
    std::fflush(stdout);
  }
  std::printf("%s: %d of %zu criteria passed\n", failed ? "FAIL" : "PASS", static_cast<int>(criteria.size()) - failed,
              criteria.size());
  return failed ? 1 : 0;
}
