#include "hesslab/checks.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <numeric>

#include "hesslab/envelopes.hpp"
#include "hesslab/hessian_measure.hpp"

namespace hesslab {

namespace {

std::string fmt(const char* f, double a) {
  char buf[96];
  std::snprintf(buf, sizeof buf, f, a);
  return buf;
}

CheckResult timed(const std::string& name, const std::function<void(CheckResult&)>& body) {
  CheckResult r;
  r.name = name;
  const auto t0 = std::chrono::steady_clock::now();
  try {
    body(r);
  } catch (const std::exception& e) {
    r.pass = false;
    r.detail = std::string("error: ") + e.what();
  }
  r.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return r;
}

void append(std::string& s, const std::string& part) {
  if (!s.empty()) s += "; ";
  s += part;
}

// Smooth random obstacle: sum of three plane waves in the real coordinates.
struct Wave {
  std::vector<double> k;
  double amp, phase;
};

std::vector<Wave> random_waves(int dims, Rng& rng) {
  std::vector<Wave> w(3);
  for (auto& x : w) {
    x.k.resize(dims);
    for (auto& c : x.k) c = rng.uniform(-4, 4);
    x.amp = rng.uniform(-1, 1);
    x.phase = rng.uniform(0, 2 * M_PI);
  }
  return w;
}

GridField wave_field(DomainPtr d, const std::vector<Wave>& waves) {
  GridField f = make_field(d, 0.0);
  double x[kMaxReal];
  for (auto p : masked_nodes(*d)) {
    d->coords(p, x);
    double s = 0;
    for (const auto& w : waves) {
      double t = w.phase;
      for (int a = 0; a < d->dims(); ++a) t += w.k[a] * x[a];
      s += w.amp * std::cos(t);
    }
    f.values[p] = s;
  }
  return f;
}

// f plus a nonnegative bump and shift.
GridField raise(const GridField& f, Rng& rng) {
  const Domain& d = *f.domain;
  std::vector<double> c(d.dims());
  for (auto& v : c) v = rng.uniform(-0.5, 0.5);
  const double height = rng.uniform(0, 1), shift = rng.uniform(0, 0.2), width = rng.uniform(0.05, 0.3);
  GridField g = f;
  double x[kMaxReal];
  for (auto p : masked_nodes(d)) {
    d.coords(p, x);
    double r2 = 0;
    for (int a = 0; a < d.dims(); ++a) r2 += (x[a] - c[a]) * (x[a] - c[a]);
    g.values[p] += shift + height * std::exp(-r2 / width);
  }
  return g;
}

GridField obstacle_envelope(const GridField& f, int m, double tol, std::uint64_t seed) {
  auto p = make_problem(f.domain, m, EnvelopeMode::obstacle, seed);
  p.data = f;
  SolverConfig cfg;
  cfg.tol = tol;
  cfg.certify = false;
  auto r = solve_envelope(p, cfg);
  if (!r.converged) throw std::runtime_error("obstacle envelope did not converge");
  return r.u;
}

double max_excess(const GridField& a, const GridField& b) {
  double worst = -INFINITY;
  for (auto p : a.domain->interior_nodes()) worst = std::max(worst, a.values[p] - b.values[p]);
  return worst;
}

}  // namespace

std::string format_check(const CheckResult& r) {
  char buf[64];
  std::snprintf(buf, sizeof buf, " (%.1f s)", r.seconds);
  return std::string(r.pass ? "PASS " : "FAIL ") + r.name + ": " + r.detail + buf;
}

CheckResult check_quadratic_dichotomy(double h) {
  return timed("quadratic dichotomy", [&](CheckResult& r) {
    auto d = make_domain(reinhardt_shape(3, 2), h);
    auto f = eval_closed_form(ClosedForm::phi(2), d);
    auto r1 = msh_report(f, 1);
    auto r2 = msh_report(f, 2);
    MshOptions keep;
    keep.keep_points = true;
    auto r3 = msh_report(f, 3, keep);
    double dev = 0;
    for (const auto& pt : r3.points) dev = std::max(dev, std::abs(pt.sigma[2] + 0.5));
    const bool ok12 = r1.pass && r2.pass && r1.worst_margin >= -1e-9 && r2.worst_margin >= -1e-9;
    const bool ok3 = !r3.pass && r3.passed == 0 && !r3.points.empty() && dev <= 1e-9;
    r.pass = ok12 && ok3;
    r.detail = fmt("m=1 worst %.3g", r1.worst_margin) + fmt(", m=2 worst %.3g", r2.worst_margin) +
               fmt(", m=3 max |sigma_3 + 0.5| %.3g", dev) + ", m=3 " + (r3.pass ? "passes" : "fails") + " on " +
               std::to_string(r3.evaluated) + " nodes";
  });
}

CheckResult check_hartogs_exhaustion(double h) {
  return timed("hartogs exhaustion", [&](CheckResult& r) {
    auto d = make_domain(hartogs_shape(), h);
    auto f = eval_closed_form(ClosedForm::hartogs_exh(), d);
    MshOptions opts;
    opts.tol = 1e-6;
    auto rep = msh_report(f, 1, opts);
    auto ex = exhaustion_report(f);
    r.pass = rep.pass && rep.worst_margin >= -1e-6 && ex.band_sup >= -4 * h;
    r.detail = fmt("worst margin %.3g", rep.worst_margin) + fmt(", band sup %.4g", ex.band_sup) +
               fmt(" (floor %.3g)", -4 * h) + ", crease points " + std::to_string(rep.crease_points);
  });
}

CheckResult check_hartogs_hyperconvexity() {
  return timed("hartogs hyperconvexity", [&](CheckResult& r) {
    const BallSpec ball{{cplx(0, 0), cplx(0.55, 0)}, 0.2};
    HyperconvexConfig c1;
    c1.ladder = {0.08, 0.04};
    auto r1 = hyperconvexity_test(hartogs_shape(), 1, ball, c1);
    HyperconvexConfig c2;
    c2.ladder = {0.04, 0.02};
    const std::vector<double> origin{0, 0, 0, 0};
    c2.focus = std::make_pair(origin, 0.1);
    auto r2 = hyperconvexity_test(hartogs_shape(), 2, ball, c2);
    bool near_ok = r2.levels.size() == 2;
    std::string gaps;
    for (const auto& lv : r2.levels) {
      const double g = lv.gap_near(origin, 0.1);
      near_ok = near_ok && g > 0.1;
      append(gaps, fmt("h=%g", lv.h) + fmt(" gap near origin %.4f", g));
    }
    r.pass = r1.verdict == Verdict::pass && r2.verdict == Verdict::fail_persistent && near_ok;
    r.detail = "m=1 " + to_string(r1.verdict) + ", m=2 " + to_string(r2.verdict) + " (" + gaps + ")";
  });
}

CheckResult check_disc_extremal(double h) {
  return timed("disc relative extremal", [&](CheckResult& r) {
    auto d = make_domain(ball_shape(1, 1.0), h);
    auto p = make_problem(d, 1, EnvelopeMode::extremal);
    p.target.assign(d->size(), 0);
    double x[2];
    for (auto q : d->interior_nodes()) {
      d->coords(q, x);
      if (std::hypot(x[0], x[1]) <= 0.25) p.target[q] = 1;
    }
    SolverConfig cfg;
    cfg.tol = 1e-10;
    auto res = solve_envelope(p, cfg);
    double err = 0;
    for (auto q : d->interior_nodes()) {
      d->coords(q, x);
      const double exact = std::max(-1.0, std::log(std::hypot(x[0], x[1])) / std::log(4.0));
      err = std::max(err, std::abs(res.u[q] - exact));
    }
    r.pass = res.converged && err <= 0.02;
    r.detail = fmt("sup error %.4f (limit 0.02)", err) + ", " + std::to_string(res.iterations) + " sweeps";
  });
}

CheckResult check_bounded_mass(double h) {
  return timed("bounded-mass exhaustion", [&](CheckResult& r) {
    auto d = make_domain(ball_shape(2, 1.0), h);
    ExhaustionConfig cfg;
    auto res = build_exhaustion(d, 2, ExhaustionRecipe::bounded_mass, cfg);
    const auto& c = res.certificate;
    auto e0 = e0_membership(res.psi, 2, cfg.tol);
    const double sup = c.sup_abs.value_or(INFINITY), mass = c.total_mass.value_or(INFINITY);
    r.pass = c.pass && sup <= 1.0 && mass <= 1.0 + 0.05 && e0.pass;
    r.detail = fmt("sup |psi| %.4f", sup) + fmt(", mass %.4f (limit 1.05)", mass) + ", e0 membership " +
               (e0.pass ? "pass" : "fail") + ", " + std::to_string(c.terms) + " terms";
    for (const auto& it : e0.items)
      if (!it.pass) append(r.detail, "failed item " + it.name);
  });
}

CheckResult check_cone_suite(int count, std::uint64_t seed) {
  return timed("cone suite", [&](CheckResult& r) {
    Rng rng(seed);
    // Pools of cone members per (n, m); tuples are drawn from the pool.
    std::vector<std::vector<std::vector<HermitianForm>>> pool(kMaxDim + 1);
    for (int n = 1; n <= kMaxDim; ++n) {
      pool[n].resize(n + 1);
      for (int m = 2; m <= n; ++m)
        for (int i = 0; i < 64; ++i) pool[n][m].push_back(random_gamma_member(n, m, rng));
    }
    std::size_t nest_bad = 0, garding_bad = 0, garding_checked = 0, sym_bad = 0;
    double garding_worst = INFINITY, sym_worst = 0;
    for (int t = 0; t < count; ++t) {
      const int n = 1 + t % kMaxDim;
      // Shifted toward the identity so every cone gets members.
      HermitianForm h = random_hermitian(n, rng) + HermitianForm::identity(n) * rng.uniform(0, 1.5);
      std::vector<bool> member(n + 2, false);
      for (int m = 1; m <= n; ++m) member[m] = gamma_membership(h, m).member;
      for (int m = 1; m < n; ++m)
        if (member[m + 1] && !member[m]) ++nest_bad;
      for (int m = 1; m <= n; ++m) {
        if (!member[m]) continue;
        for (int s = 0; s < 32; ++s) {
          std::vector<HermitianForm> alphas;
          for (int a = 0; a < m - 1; ++a) alphas.push_back(pool[n][m][rng.next() % pool[n][m].size()]);
          const double v = definition_positivity_test(h, alphas, m);
          ++garding_checked;
          garding_worst = std::min(garding_worst, v);
          if (v < -1e-9) ++garding_bad;
          if (m == 1) break;  // no alpha slots to sample
        }
      }
      // Symmetry under a slot permutation and linearity in the first slot.
      std::vector<HermitianForm> slots;
      for (int a = 0; a < n; ++a) slots.push_back(random_hermitian(n, rng));
      const double base = mixed_form_coefficient(slots);
      auto perm = slots;
      std::reverse(perm.begin(), perm.end());
      if (n > 1) std::swap(perm[0], perm[n / 2]);
      sym_worst = std::max(sym_worst, std::abs(mixed_form_coefficient(perm) - base));
      const HermitianForm other = random_hermitian(n, rng);
      const double s1 = rng.uniform(-2, 2), s2 = rng.uniform(-2, 2);
      auto lin = slots;
      lin[0] = slots[0] * s1 + other * s2;
      auto oth = slots;
      oth[0] = other;
      const double err = std::abs(mixed_form_coefficient(lin) - (s1 * base + s2 * mixed_form_coefficient(oth)));
      sym_worst = std::max(sym_worst, err);
    }
    if (sym_worst > 1e-12) ++sym_bad;
    r.pass = nest_bad == 0 && garding_bad == 0 && sym_bad == 0 && garding_checked > 0;
    r.detail = std::to_string(count) + " forms, nesting violations " + std::to_string(nest_bad) + ", " +
               std::to_string(garding_checked) + " positivity tuples" + fmt(" (min %.3g)", garding_worst) +
               fmt(", symmetry/linearity error %.2g", sym_worst);
  });
}

CheckResult check_envelope_lattice(int grid, int pairs, std::uint64_t seed) {
  return timed("envelope lattice properties", [&](CheckResult& r) {
    const double solver_tol = 1e-11, tol = 1e-8;
    auto disc = make_domain(ball_shape(1, 1.0), 2.0 / grid);
    auto ball = make_domain(ball_shape(2, 1.0), 0.25);
    Rng rng(seed);
    double mono = -INFINITY, idem = 0, mmono = -INFINITY;
    for (int i = 0; i < pairs; ++i) {
      const GridField f = wave_field(disc, random_waves(2, rng));
      const GridField g = raise(f, rng);
      const GridField sf = obstacle_envelope(f, 1, solver_tol, seed + i);
      const GridField sg = obstacle_envelope(g, 1, solver_tol, seed + i);
      mono = std::max(mono, max_excess(sf, sg));
      const GridField ssf = obstacle_envelope(sf, 1, solver_tol, seed + i);
      for (auto p : disc->interior_nodes()) idem = std::max(idem, std::abs(ssf.values[p] - sf.values[p]));
      // The m = 2 class is smaller, so its envelope lies below.
      const GridField b = wave_field(ball, random_waves(4, rng));
      const GridField s1 = obstacle_envelope(b, 1, solver_tol, seed + i);
      const GridField s2 = obstacle_envelope(b, 2, solver_tol, seed + i);
      mmono = std::max(mmono, max_excess(s2, s1));
    }
    r.pass = mono <= tol && idem <= tol && mmono <= tol;
    r.detail = std::to_string(pairs) + " pairs" + fmt(", max(S_f - S_g) %.3g", mono) +
               fmt(", idempotence %.3g", idem) + fmt(", max(S^2 - S^1) %.3g", mmono) + fmt(" (tol %.0e)", tol);
  });
}

}  // namespace hesslab
