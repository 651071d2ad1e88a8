#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>
#include <stdexcept>

#include "hesslab/envelopes.hpp"

namespace hesslab {

namespace {

std::vector<double> coords_of(const Domain& d, std::size_t i) {
  double x[kMaxReal];
  d.coords(i, x);
  return {x, x + d.dims()};
}

double dist(const std::vector<double>& a, const std::vector<double>& b) {
  double s = 0;
  for (std::size_t k = 0; k < a.size(); ++k) s += (a[k] - b[k]) * (a[k] - b[k]);
  return std::sqrt(s);
}

// Nodes with a boundary node one neighbourhood step away.
std::vector<std::uint8_t> boundary_adjacent(const Domain& d) {
  std::vector<std::uint8_t> adj(d.size(), 0);
  const auto near = neighbourhood_offsets(d);
  for (auto b : d.boundary_nodes())
    for (auto o : near)
      for (int s : {1, -1}) {
        const std::int64_t q = static_cast<std::int64_t>(b) + s * o;
        if (q >= 0 && static_cast<std::size_t>(q) < d.size() && d.interior(q)) adj[q] = 1;
      }
  return adj;
}

// Largest axis difference quotient among interior nodes one layer inside
// the boundary-adjacent band.
double shell_lipschitz(const GridField& u, const std::vector<std::uint8_t>& adj) {
  const Domain& d = *u.domain;
  const auto near = neighbourhood_offsets(d);
  const auto axes = axis_offsets(d);
  double lip = 0;
  for (auto p : d.interior_nodes()) {
    if (adj[p]) continue;
    bool shell = false;
    for (auto o : near) shell = shell || adj[p + o] || adj[p - o];
    if (!shell) continue;
    for (auto a : axes)
      for (int s : {1, -1}) {
        const std::size_t q = p + s * a;
        if (d.interior(q) && !adj[q]) lip = std::max(lip, std::abs(u.values[q] - u.values[p]) / d.h());
      }
  }
  return lip;
}

std::vector<std::uint8_t> ball_mask(const Domain& d, const BallSpec& ball) {
  std::vector<std::uint8_t> mask(d.size(), 0);
  double x[kMaxReal];
  for (auto p : d.interior_nodes()) {
    d.coords(p, x);
    double s = 0;
    for (int j = 0; j < d.n(); ++j) {
      const cplx c = j < static_cast<int>(ball.center.size()) ? ball.center[j] : cplx(0, 0);
      s += (x[2 * j] - c.real()) * (x[2 * j] - c.real()) + (x[2 * j + 1] - c.imag()) * (x[2 * j + 1] - c.imag());
    }
    mask[p] = s < ball.radius * ball.radius;
  }
  return mask;
}

bool near_any(const std::vector<double>& x, const std::vector<std::vector<double>>& pts, double r) {
  for (const auto& p : pts)
    if (dist(x, p) <= r) return true;
  return false;
}

constexpr std::size_t kMaxFailing = 4096;

}  // namespace

double HyperconvexLevel::gap_near(const std::vector<double>& x, double radius) const {
  double g = 0;
  for (std::size_t i = 0; i < failing_points.size(); ++i)
    if (dist(failing_points[i], x) <= radius) g = std::max(g, failing_gaps[i]);
  return g;
}

HyperconvexReport hyperconvexity_test(const Shape& shape, int m, const BallSpec& ball, const HyperconvexConfig& cfg) {
  if (cfg.ladder.empty()) throw std::invalid_argument("hyperconvexity_test: empty h ladder");
  for (std::size_t i = 1; i < cfg.ladder.size(); ++i)
    if (!(cfg.ladder[i] < cfg.ladder[i - 1]))
      throw std::invalid_argument("hyperconvexity_test: h ladder must be strictly decreasing");
  if (!(ball.radius > 0)) throw std::invalid_argument("hyperconvexity_test: ball radius must be positive");

  HyperconvexReport rep;
  rep.m = m;
  for (const double& h : cfg.ladder) {
    auto d = make_domain(shape, h);
    auto prob = make_problem(d, m, EnvelopeMode::extremal, cfg.seed, cfg.samples);
    prob.target = ball_mask(*d, ball);

    SolverConfig sc;
    sc.tol = cfg.tol;
    sc.max_iters = cfg.max_iters;
    sc.certify = false;
    auto in_focus = [&](const std::vector<double>& x) {
      return !cfg.focus || dist(x, cfg.focus->first) <= cfg.focus->second;
    };
    // Without a focus region the coarsest level runs to convergence; finer
    // levels stop once a gap above the floor appears next to a failing point
    // of the previous level. With a focus, any level stops at the first
    // certified failure inside it.
    const HyperconvexLevel* prev = rep.levels.empty() ? nullptr : &rep.levels.back();
    // Gaps up to about 2h come from the lattice alone at unit boundary slope.
    const double floor = std::max(cfg.gap_floor, 2 * h);
    // Lattice artifacts shrink like h while genuine gaps do not, so next to a
    // coarser failing point the gap must keep more than sqrt(h / h_prev) of it.
    auto floor_at = [&](const std::vector<double>& x) {
      if (!prev) return floor;
      return std::max(floor, std::sqrt(h / prev->h) * prev->gap_near(x, 2 * prev->h));
    };
    if (cfg.early_fail && (cfg.focus || (prev && prev->fail_certified)))
      sc.stop_check = [&](const GridField& u, int) {
        const auto w = walsh_boundary_check(u, nullptr, floor);
        for (const auto& g : w.gaps) {
          if (g.gap <= floor) continue;
          const auto x = coords_of(*d, g.node);
          if (g.gap <= floor_at(x)) continue;
          if (cfg.focus ? in_focus(x) : near_any(x, prev->failing_points, 2 * prev->h)) return true;
        }
        return false;
      };
    auto res = solve_envelope(prob, sc);

    HyperconvexLevel lv;
    lv.h = h;
    lv.iterations = res.iterations;
    lv.residual = res.final_residual;
    lv.converged = res.converged;
    auto walsh = walsh_boundary_check(res.u, nullptr, floor);
    lv.worst_gap = walsh.worst_gap;
    lv.worst_node = walsh.worst_node;
    if (walsh.worst_node >= 0) lv.worst_point = coords_of(*d, walsh.worst_node);
    // Iterates decrease toward the envelope and the boundary data is 0, so a
    // gap above the floor on any iterate bounds the envelope's gap from below.
    auto gaps = walsh.gaps;
    std::sort(gaps.begin(), gaps.end(), [](const BoundaryGap& a, const BoundaryGap& b) { return a.gap > b.gap; });
    for (std::size_t i = 0; i < gaps.size() && lv.failing_points.size() < kMaxFailing && gaps[i].gap > floor;
         ++i) {
      auto x = coords_of(*d, gaps[i].node);
      if (!in_focus(x) || gaps[i].gap <= floor_at(x)) continue;
      lv.failing_points.push_back(std::move(x));
      lv.failing_gaps.push_back(gaps[i].gap);
    }
    lv.fail_certified = !lv.failing_points.empty();

    double top = -std::numeric_limits<double>::infinity();
    for (auto p : d->interior_nodes()) top = std::max(top, res.u.values[p]);
    lv.negativity = top <= 1e-12;
    const auto adj = boundary_adjacent(*d);
    lv.lipschitz = shell_lipschitz(res.u, adj);
    const double c = cfg.gap_constant.value_or(4 * lv.lipschitz);
    lv.threshold = c * h;
    if (res.converged) lv.exhaustion = exhaustion_report(res.u);
    rep.levels.push_back(std::move(lv));
    if (&h == &cfg.ladder.back()) rep.extremal = std::move(res.u);
  }

  // Persistence: two successive levels above the floor with failing
  // boundary points within two coarse spacings of each other.
  for (std::size_t i = 1; i < rep.levels.size(); ++i) {
    const auto& a = rep.levels[i - 1];
    const auto& b = rep.levels[i];
    if (!a.fail_certified || !b.fail_certified) continue;
    for (const auto& pb : b.failing_points)
      if (near_any(pb, a.failing_points, 2 * a.h)) {
        rep.verdict = Verdict::fail_persistent;
        std::ostringstream os;
        os << "boundary gap above " << cfg.gap_floor << " at h = " << a.h << " and h = " << b.h;
        rep.reason = os.str();
        return rep;
      }
  }
  const auto& last = rep.levels.back();
  if (!last.converged) {
    rep.verdict = Verdict::inconclusive;
    rep.reason = last.fail_certified ? "gap above the floor but not persistent across refinements"
                                     : "solver did not converge at the finest level";
    return rep;
  }
  if (last.negativity && last.worst_gap <= last.threshold) {
    rep.verdict = Verdict::pass;
    rep.reason = "boundary gap within threshold and the extremal function is negative";
    return rep;
  }
  rep.verdict = Verdict::inconclusive;
  rep.reason = last.fail_certified ? "gap above the floor at a single level only" : "gap above C h but below the floor";
  return rep;
}

BarrierReport bm_regularity_test(DomainPtr d, int m, std::uint32_t z0, const BarrierConfig& cfg) {
  if (z0 >= d->size() || !d->boundary(z0)) throw std::invalid_argument("bm_regularity_test: z0 is not a boundary node");
  const double h = d->h();
  // Extensions of Lipschitz data have modulus t log(1/t) at the boundary.
  const double attain_tol = cfg.attain_tol > 0 ? cfg.attain_tol : 4 * h * std::max(1.0, std::log(1.0 / h));
  auto prob = make_problem(d, m, EnvelopeMode::boundary, cfg.seed, cfg.samples);
  GridField f = make_field(d, 0.0, "barrier-data");
  const auto x0 = coords_of(*d, z0);
  for (auto b : d->boundary_nodes()) f.values[b] = -dist(coords_of(*d, b), x0);
  prob.data = f;
  SolverConfig sc;
  sc.tol = cfg.tol;
  sc.max_iters = cfg.max_iters;
  sc.certify = false;
  auto res = solve_envelope(prob, sc);

  BarrierReport rep;
  rep.z0 = z0;
  rep.converged = res.converged;
  rep.iterations = res.iterations;
  const auto near = neighbourhood_offsets(*d);
  for (auto o : near)
    for (int s : {1, -1}) {
      const std::int64_t q = static_cast<std::int64_t>(z0) + s * o;
      if (q >= 0 && static_cast<std::size_t>(q) < d->size() && d->interior(q))
        rep.attainment_gap = std::max(rep.attainment_gap, std::abs(res.u.values[q] - f.values[z0]));
    }
  const auto adj = boundary_adjacent(*d);
  rep.far_sup = -std::numeric_limits<double>::infinity();
  for (auto p : d->interior_nodes())
    if (adj[p] && dist(coords_of(*d, p), x0) >= cfg.rho) rep.far_sup = std::max(rep.far_sup, res.u.values[p]);
  const double delta = cfg.rho / 2;
  if (!res.converged) {
    rep.verdict = Verdict::inconclusive;
    rep.reason = "solver did not converge";
  } else if (rep.attainment_gap <= attain_tol && rep.far_sup <= -delta) {
    rep.verdict = Verdict::pass;
    rep.reason = "barrier attains 0 at z0 and stays below -rho/2 away from it";
  } else {
    rep.verdict = Verdict::fail;
    std::ostringstream os;
    os << "attainment gap " << rep.attainment_gap << " (tol " << attain_tol << "), far sup " << rep.far_sup;
    rep.reason = os.str();
  }
  return rep;
}

CertificateBlock certificate_of(const HyperconvexReport& r) {
  CertificateBlock c;
  c.add("verdict", "\"" + to_string(r.verdict) + "\"");
  c.add("m", static_cast<long long>(r.m));
  c.add("reason", "\"" + r.reason + "\"");
  for (std::size_t i = 0; i < r.levels.size(); ++i) {
    const auto& l = r.levels[i];
    const std::string k = "level" + std::to_string(i) + ".";
    c.add(k + "h", l.h);
    c.add(k + "worst_gap", l.worst_gap);
    c.add(k + "threshold", l.threshold);
    c.add(k + "converged", l.converged);
    c.add(k + "fail_certified", l.fail_certified);
    c.add(k + "iterations", static_cast<long long>(l.iterations));
    c.add(k + "residual", l.residual);
  }
  return c;
}

}  // namespace hesslab
