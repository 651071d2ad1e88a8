#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>
#include <stdexcept>

#include "hesslab/envelopes.hpp"
#include "hesslab/hessian_measure.hpp"

namespace hesslab {

namespace {

GridField squared_norm(const DomainPtr& d) {
  GridField f = make_field(d, std::numeric_limits<double>::quiet_NaN(), "|z|^2");
  double x[kMaxReal];
  auto set = [&](std::size_t p) {
    d->coords(p, x);
    double s = 0;
    for (int k = 0; k < d->dims(); ++k) s += x[k] * x[k];
    f.values[p] = s;
  };
  for (auto p : d->interior_nodes()) set(p);
  for (auto p : d->boundary_nodes()) set(p);
  return f;
}

double sup_abs(const GridField& f) {
  double s = 0;
  for (auto p : f.domain->interior_nodes()) s = std::max(s, std::abs(f.values[p]));
  return s;
}

// Boundary nodes sit outside the domain. Pinning them to data puts an O(h)
// kink into the last interior layer, so values there are extrapolated
// linearly from the interior along the axes.
void extend_to_boundary(GridField& f) {
  const Domain& d = *f.domain;
  const auto axes = axis_offsets(d);
  auto inside = [&](std::int64_t i) { return i >= 0 && static_cast<std::size_t>(i) < d.size() && d.interior(i); };
  for (auto b : d.boundary_nodes()) {
    double sum = 0, fallback = 0;
    int cnt = 0, fcnt = 0;
    for (auto a : axes)
      for (int s : {1, -1}) {
        const std::int64_t q1 = static_cast<std::int64_t>(b) + s * a, q2 = q1 + s * a;
        if (!inside(q1)) continue;
        fallback += f.values[q1], ++fcnt;
        if (inside(q2)) sum += 2 * f.values[q1] - f.values[q2], ++cnt;
      }
    if (cnt) f.values[b] = sum / cnt;
    else if (fcnt) f.values[b] = fallback / fcnt;
  }
}

// Smooth E^0 base: PB envelope of -2|z|^2 plus 2|z|^2. Strict margin 1 keeps
// the finite-difference certificate robust, unlike the relative extremal.
GridField regular_base(const DomainPtr& d, int m, const ExhaustionConfig& cfg, const GridField& q,
                       EnvelopeResult* out = nullptr) {
  auto prob = make_problem(d, m, EnvelopeMode::boundary, cfg.seed, cfg.samples);
  GridField f = make_field(d, 0.0, "boundary-data");
  for (auto b : d->boundary_nodes()) f.values[b] = -2 * q.values[b];
  prob.data = f;
  SolverConfig sc;
  sc.tol = cfg.tol;
  sc.max_iters = cfg.max_iters;
  sc.certify = false;
  auto res = solve_envelope(prob, sc);
  if (!res.converged) throw std::runtime_error("build_exhaustion: boundary envelope did not converge");
  GridField psi = res.u;
  extend_to_boundary(psi);
  for (auto p : d->interior_nodes()) psi.values[p] += 2 * q.values[p];
  for (auto p : d->boundary_nodes()) psi.values[p] += 2 * q.values[p];
  psi.provenance = "regular-base";
  if (out) *out = std::move(res);
  return psi;
}

void require_hyperconvex(const DomainPtr& d, int m, const ExhaustionConfig& cfg) {
  HyperconvexConfig hc;
  hc.ladder = {d->h()};
  hc.tol = std::max(cfg.tol, 1e-9);
  hc.max_iters = cfg.max_iters;
  hc.samples = cfg.samples;
  hc.seed = cfg.seed;
  BallSpec ball = cfg.seed_ball;
  if (ball.center.empty()) {
    // Interior node closest to the centroid of the interior.
    const int n = d->n();
    std::vector<double> c(d->dims(), 0.0);
    double x[kMaxReal];
    for (auto p : d->interior_nodes()) {
      d->coords(p, x);
      for (int k = 0; k < d->dims(); ++k) c[k] += x[k];
    }
    for (auto& v : c) v /= static_cast<double>(d->interior_nodes().size());
    double best = std::numeric_limits<double>::infinity();
    std::vector<double> pick(c);
    for (auto p : d->interior_nodes()) {
      d->coords(p, x);
      double s = 0;
      for (int k = 0; k < d->dims(); ++k) s += (x[k] - c[k]) * (x[k] - c[k]);
      if (s < best) best = s, pick.assign(x, x + d->dims());
    }
    for (int j = 0; j < n; ++j) ball.center.emplace_back(pick[2 * j], pick[2 * j + 1]);
  }
  const auto rep = hyperconvexity_test(d->shape(), m, ball, hc);
  if (rep.verdict == Verdict::fail || rep.verdict == Verdict::fail_persistent)
    throw std::runtime_error("build_exhaustion: hyperconvexity prerequisite failed: " + rep.reason);
}

int term_count(const ExhaustionConfig& cfg) {
  const int need = static_cast<int>(std::ceil(std::log2(1.0 / cfg.tol)));
  if (need > cfg.max_terms)
    throw std::runtime_error("build_exhaustion: tail bound needs " + std::to_string(need) + " terms, max_terms is " +
                             std::to_string(cfg.max_terms));
  return std::max(need, 1);
}

void finish(ExhaustionCertificate& c, const GridField& psi, int m, const ExhaustionConfig& cfg) {
  double top = -std::numeric_limits<double>::infinity();
  for (auto p : psi.domain->interior_nodes()) top = std::max(top, psi.values[p]);
  c.negativity = top < 0;
  c.exhaustion = exhaustion_report(psi);
  MshOptions mo;
  mo.tol = cfg.tol;
  c.msh = msh_report(psi, m, mo);
}

}  // namespace

std::string to_string(ExhaustionRecipe r) {
  switch (r) {
    case ExhaustionRecipe::strict_sum: return "strict_sum";
    case ExhaustionRecipe::bounded_mass: return "bounded_mass";
    case ExhaustionRecipe::uniform: return "uniform";
  }
  return "?";
}

ExhaustionRecipe parse_recipe(const std::string& s) {
  if (s == "strict_sum") return ExhaustionRecipe::strict_sum;
  if (s == "bounded_mass") return ExhaustionRecipe::bounded_mass;
  if (s == "uniform") return ExhaustionRecipe::uniform;
  throw std::invalid_argument("unknown exhaustion recipe: " + s);
}

ExhaustionResult build_exhaustion(DomainPtr d, int m, ExhaustionRecipe recipe, const ExhaustionConfig& cfg) {
  if (m < 1 || m > d->n()) throw std::invalid_argument("build_exhaustion: m out of range 1..n");
  if (!(cfg.tol > 0 && cfg.tol < 1)) throw std::invalid_argument("build_exhaustion: tol must lie in (0, 1)");
  const GridField q = squared_norm(d);
  ExhaustionResult out;
  auto& c = out.certificate;
  c.recipe = recipe;

  if (recipe == ExhaustionRecipe::uniform) {
    out.psi = regular_base(d, m, cfg, q);
    c.terms = 1;
    c.weights = {1.0};
    finish(c, out.psi, m, cfg);
    GridField shifted = out.psi;
    for (auto p : d->interior_nodes()) shifted.values[p] -= q.values[p];
    MshOptions mo;
    mo.tol = cfg.tol;
    const auto rest = msh_report(shifted, m, mo);
    c.strict_margin = rest.worst_margin;
    c.pass = c.negativity && c.exhaustion.pass && c.msh.pass && rest.pass;
    c.reason = c.pass ? "psi and psi - |z|^2 are m-subharmonic" : "certificate item failed";
    return out;
  }

  require_hyperconvex(d, m, cfg);
  const GridField base = regular_base(d, m, cfg, q);
  double r2 = 0;
  for (auto p : d->boundary_nodes()) r2 = std::max(r2, q.values[p]);
  const double big_m = r2 + 1.5;  // |z|^2 - M < -1 on the closure
  const int terms = term_count(cfg);

  out.psi = make_field(d, 0.0, to_string(recipe));
  for (std::size_t i = 0; i < d->size(); ++i)
    if (!d->interior(i) && !d->boundary(i)) out.psi.values[i] = std::numeric_limits<double>::quiet_NaN();
  const double base_mass =
      recipe == ExhaustionRecipe::bounded_mass ? hessian_density(base, m).total_mass : 0.0;
  double tail = 0;
  double mass_bound = 0;
  for (int j = 1; j <= terms; ++j) {
    GridField quad = q;
    for (std::size_t i = 0; i < d->size(); ++i)
      if (std::isfinite(quad.values[i])) quad.values[i] = (quad.values[i] - big_m) / j;
    GridField term;
    double a = std::ldexp(1.0, -j);
    if (recipe == ExhaustionRecipe::strict_sum) {
      term = combine({CombineOp::max}, base, quad);
      double neg = 0;
      for (auto p : d->interior_nodes()) neg = std::max(neg, -term.values[p]);
      a /= std::max(neg, 1.0);
    } else {
      term = combine({CombineOp::max}, base, quad);
      // term = base on {base > -1.5/j}, a neighbourhood of the boundary, and
      // E^0 functions agreeing near the boundary carry the same total mass.
      // The one-sided crease rule would drop the interface mass of the max.
      bool agrees = true;
      for (auto p : d->boundary_nodes()) agrees = agrees && term.values[p] == base.values[p];
      const double hj = std::max(0.0, agrees ? base_mass : hessian_density(term, m).total_mass);
      a /= std::max({sup_abs(term), std::pow(hj, 1.0 / m), 1.0});
      mass_bound += a * std::pow(hj, 1.0 / m);
    }
    for (auto p : d->interior_nodes()) out.psi.values[p] += a * term.values[p];
    for (auto p : d->boundary_nodes()) out.psi.values[p] += a * term.values[p];
    c.weights.push_back(a);
    tail = std::ldexp(1.0, -j);  // sum_{k>j} 2^-k bounds the remaining a_k sup|psi_k|
  }
  extend_to_boundary(out.psi);
  c.terms = terms;
  c.tail_bound = tail;
  finish(c, out.psi, m, cfg);

  if (recipe == ExhaustionRecipe::strict_sum) {
    const auto region = half_size_region(*d);
    auto passes = [&](double cc) {
      MshOptions mo;
      mo.tol = cfg.tol;
      mo.strict_c = cc;
      mo.region = &region;
      return msh_report(out.psi, m, mo).pass;
    };
    double lo = 0, hi = 1;
    if (!passes(lo)) {
      c.strict_margin = 0.0;
    } else {
      for (int it = 0; it < 40; ++it) {
        const double mid = 0.5 * (lo + hi);
        (passes(mid) ? lo : hi) = mid;
      }
      c.strict_margin = lo;
    }
    c.pass = c.negativity && c.exhaustion.pass && c.msh.pass && *c.strict_margin > 0;
    c.reason = c.pass ? "negative strictly m-subharmonic exhaustion" : "certificate item failed";
  } else {
    c.sup_abs = sup_abs(out.psi);
    c.total_mass = hessian_density(out.psi, m).total_mass;
    c.pass = c.negativity && c.exhaustion.pass && c.msh.pass && *c.sup_abs <= 1.0 &&
             *c.total_mass <= 1.0 + cfg.mass_tol;
    std::ostringstream os;
    os << (c.pass ? "bounded exhaustion" : "certificate item failed") << "; mixed-mass bound " << std::pow(mass_bound, m);
    c.reason = os.str();
  }
  return out;
}

}  // namespace hesslab
