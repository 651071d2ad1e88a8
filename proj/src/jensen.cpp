#include "hesslab/jensen.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <ostream>
#include <sstream>
#include <stdexcept>

#include "hesslab/simplex.hpp"

namespace hesslab {

namespace {

template <class F>
GridField field_from(const DomainPtr& d, const std::string& name, F&& fn) {
  GridField f = make_field(d, std::numeric_limits<double>::quiet_NaN(), name);
  double x[kMaxReal];
  for (auto p : masked_nodes(*d)) {
    d->coords(p, x);
    f.values[p] = fn(x);
  }
  return f;
}

cplx coord(const double* x, int j) { return {x[2 * j], x[2 * j + 1]}; }

bool is_constant(const GridField& f, const std::vector<std::uint32_t>& nodes) {
  for (auto p : nodes)
    if (f.values[p] != f.values[nodes.front()]) return false;
  return true;
}

// Jensen constraints over the masked nodes; the objective is filled by the caller.
LpProblem jensen_problem(std::uint32_t z, const TestFamily& fam, const std::vector<std::uint32_t>& nodes) {
  LpProblem lp;
  lp.cost.assign(nodes.size(), 0.0);
  lp.add_row(std::vector<double>(nodes.size(), 1.0), RowSense::eq, 1.0);
  for (const auto& mem : fam.members) {
    if (is_constant(mem.field, nodes)) continue;  // implied by the probability row
    std::vector<double> row(nodes.size());
    for (std::size_t i = 0; i < nodes.size(); ++i) row[i] = mem.field.values[nodes[i]];
    lp.add_row(std::move(row), RowSense::ge, mem.field.values[z]);
  }
  return lp;
}

DiscreteMeasure measure_of(const LpResult& r, const std::vector<std::uint32_t>& nodes) {
  DiscreteMeasure mu;
  for (std::size_t i = 0; i < nodes.size(); ++i)
    if (r.x[i] > 0) {
      mu.support.push_back(nodes[i]);
      mu.weights.push_back(r.x[i]);
    }
  return mu;
}

void require_node(const Domain& d, std::uint32_t z) {
  if (z >= d.size() || (!d.interior(z) && !d.boundary(z)))
    throw std::invalid_argument("jensen: node " + std::to_string(z) + " is off the masks");
}

}  // namespace

TestFamily build_test_family(DomainPtr d, int m, const FamilySpec& spec) {
  const int n = d->n();
  if (m < 1 || m > n) throw std::invalid_argument("build_test_family: m out of range 1..n");
  if (spec.quadratic_count < 1) throw std::invalid_argument("build_test_family: quadratic_count must be >= 1");
  TestFamily fam;
  fam.domain = d;
  fam.m = m;
  std::vector<FamilyExtra> cand;
  cand.push_back({"const+1", field_from(d, "const+1", [](const double*) { return 1.0; })});
  cand.push_back({"const-1", field_from(d, "const-1", [](const double*) { return -1.0; })});
  for (int j = 0; j < n; ++j)
    for (int part = 0; part < 2; ++part)
      for (double s : {1.0, -1.0}) {
        const std::string name = std::string(s > 0 ? "+" : "-") + (part ? "Im" : "Re") + " z" + std::to_string(j + 1);
        cand.push_back({name, field_from(d, name, [=](const double* x) { return s * x[2 * j + part]; })});
      }
  if (spec.pluriharmonic_quadratics)
    for (int j = 0; j < n; ++j)
      for (int k = j; k < n; ++k)
        for (int part = 0; part < 2; ++part)
          for (double s : {1.0, -1.0}) {
            const std::string name = std::string(s > 0 ? "+" : "-") + (part ? "Im" : "Re") + " z" +
                                     std::to_string(j + 1) + "z" + std::to_string(k + 1);
            cand.push_back({name, field_from(d, name, [=](const double* x) {
                               const cplx w = coord(x, j) * coord(x, k);
                               return s * (part ? w.imag() : w.real());
                             })});
          }
  Rng rng(spec.seed);
  double lo[kMaxReal], hi[kMaxReal];
  d->coords(0, lo);
  d->coords(d->size() - 1, hi);
  for (int q = 0; q < spec.quadratic_count; ++q) {
    const HermitianForm a = random_gamma_member(n, m, rng);
    std::vector<cplx> c(n);
    for (int j = 0; j < n; ++j)
      c[j] = {rng.uniform(lo[2 * j], hi[2 * j]), rng.uniform(lo[2 * j + 1], hi[2 * j + 1])};
    const std::string name = "quadratic" + std::to_string(q);
    cand.push_back({name, field_from(d, name, [&](const double* x) {
                      double s = 0;
                      for (int j = 0; j < n; ++j)
                        for (int k = 0; k < n; ++k)
                          s += (std::conj(coord(x, j) - c[j]) * a(j, k) * (coord(x, k) - c[k])).real();
                      return s;
                    })});
  }
  const std::size_t builtin = cand.size();
  cand.insert(cand.end(), spec.extra.begin(), spec.extra.end());

  const auto nodes = masked_nodes(*d);
  for (std::size_t i = 0; i < cand.size(); ++i) {
    auto& c = cand[i];
    if (c.field.domain->mask_checksum() != d->mask_checksum())
      throw std::invalid_argument("build_test_family: member '" + c.name + "' lives on another domain");
    for (auto p : nodes)
      if (!std::isfinite(c.field.values[p]))
        throw std::invalid_argument("build_test_family: member '" + c.name + "' is not finite on the masks");
    MshOptions mo;
    mo.tol = spec.certify_tol;
    const auto rep = msh_report(c.field, m, mo);
    if (!rep.pass) {
      if (i >= builtin)
        throw std::invalid_argument("build_test_family: member '" + c.name + "' fails m-subharmonic certification");
      throw std::logic_error("build_test_family: built-in member '" + c.name + "' failed certification");
    }
    fam.members.push_back({c.name, std::move(c.field), rep.evaluated ? rep.worst_margin : 0.0, c.exhaustion});
  }
  return fam;
}

void write_measure_csv(std::ostream& os, const DiscreteMeasure& mu) {
  os << "node,weight\n";
  os.precision(17);
  for (std::size_t i = 0; i < mu.support.size(); ++i) os << mu.support[i] << ',' << mu.weights[i] << '\n';
}

JensenResult jensen_lp_min(std::uint32_t z, const GridField& g, const TestFamily& fam) {
  const Domain& d = *fam.domain;
  require_node(d, z);
  const auto nodes = masked_nodes(d);
  auto lp = jensen_problem(z, fam, nodes);
  for (std::size_t i = 0; i < nodes.size(); ++i) {
    lp.cost[i] = g.values[nodes[i]];
    if (!std::isfinite(lp.cost[i])) throw std::invalid_argument("jensen_lp_min: g is not finite on the masks");
  }
  const auto r = solve_lp(lp);
  if (r.status != LpStatus::optimal) throw std::runtime_error("jensen_lp_min: LP not solved to optimality");
  return {r.value, measure_of(r, nodes), r.iterations};
}

EdwardsReport edwards_gap(std::uint32_t z, const GridField& g, const TestFamily& fam, const EdwardsConfig& cfg) {
  EdwardsReport rep;
  const auto inf = jensen_lp_min(z, g, fam);
  rep.inf_side = inf.value;
  rep.measure = inf.measure;

  const auto nodes = masked_nodes(*fam.domain);
  const std::size_t k = fam.members.size();
  LpProblem lp;
  lp.cost.resize(k);
  for (std::size_t j = 0; j < k; ++j) lp.cost[j] = -fam.members[j].field.values[z];
  for (auto p : nodes) {
    std::vector<double> row(k);
    for (std::size_t j = 0; j < k; ++j) row[j] = fam.members[j].field.values[p];
    lp.add_row(std::move(row), RowSense::le, g.values[p]);
  }
  const auto r = solve_lp(lp);
  if (r.status != LpStatus::optimal) throw std::runtime_error("edwards_gap: sup-side LP not solved to optimality");
  rep.sup_side = -r.value;
  rep.coefficients = r.x;
  rep.gap = std::abs(rep.sup_side - rep.inf_side);
  rep.within_tol = rep.gap <= cfg.duality_tol;
  return rep;
}

MassProfileReport boundary_mass_profile(const TestFamily& fam, const MassProfileConfig& cfg) {
  const Domain& d = *fam.domain;
  const auto region = cfg.region.empty() ? half_size_region(d) : cfg.region;
  if (region.size() != d.size()) throw std::invalid_argument("boundary_mass_profile: region size mismatch");
  const auto& targets = cfg.nodes.empty() ? d.boundary_nodes() : cfg.nodes;
  const auto nodes = masked_nodes(d);

  // Arithmetic bound from each exhaustion member u <= -delta on K:
  // mu(K) <= (U+ - u(z)) / (delta + U+), U+ = max(0, sup u).
  struct Bound {
    const GridField* u;
    double delta, upper;
  };
  std::vector<Bound> bounds;
  for (const auto& mem : fam.members) {
    if (!mem.exhaustion) continue;
    double delta = std::numeric_limits<double>::infinity(), upper = 0;
    for (auto p : nodes) {
      if (region[p]) delta = std::min(delta, -mem.field.values[p]);
      upper = std::max(upper, mem.field.values[p]);
    }
    if (delta > 0 && std::isfinite(delta)) bounds.push_back({&mem.field, delta, upper});
  }

  MassProfileReport rep;
  for (auto z : targets) {
    require_node(d, z);
    auto lp = jensen_problem(z, fam, nodes);
    for (std::size_t i = 0; i < nodes.size(); ++i) lp.cost[i] = region[nodes[i]] ? -1.0 : 0.0;
    const auto r = solve_lp(lp);
    if (r.status != LpStatus::optimal) throw std::runtime_error("boundary_mass_profile: LP not solved to optimality");
    MassProfileEntry e;
    e.node = z;
    e.interior_mass = -r.value;
    for (const auto& b : bounds) {
      const double v = (b.upper - b.u->values[z]) / (b.delta + b.upper);
      e.bound = e.bound ? std::min(*e.bound, v) : v;
    }
    if (e.bound && e.interior_mass > *e.bound + 1e-9) rep.bound_ok = false;
    rep.max_mass = std::max(rep.max_mass, e.interior_mass);
    rep.entries.push_back(e);
  }
  return rep;
}

ScanReport jensen_boundary_scan(const TestFamily& fam, const ScanConfig& cfg) {
  const Domain& d = *fam.domain;
  std::vector<GridField> probes = cfg.probes;
  if (probes.empty())
    probes.push_back(field_from(fam.domain, "-|z|^2", [&](const double* x) {
      double s = 0;
      for (int k = 0; k < d.dims(); ++k) s += x[k] * x[k];
      return -s;
    }));
  const auto targets = cfg.nodes.empty() ? masked_nodes(d) : cfg.nodes;
  ScanReport rep;
  for (auto z : targets) {
    ScanEntry e;
    e.node = z;
    for (const auto& g : probes) e.slack = std::min(e.slack, jensen_lp_min(z, g, fam).value - g.values[z]);
    e.trivial = e.slack >= -cfg.tol;
    if (e.trivial) rep.trivial_nodes.push_back(z);
    rep.entries.push_back(e);
  }
  return rep;
}

void write_scan_csv(std::ostream& os, const ScanReport& r) {
  os << "node,slack,trivial\n";
  os.precision(17);
  for (const auto& e : r.entries) os << e.node << ',' << e.slack << ',' << (e.trivial ? 1 : 0) << '\n';
}

ExtensionReport boundary_extension_check(const GridField& f, const TestFamily& fam, const ExtensionConfig& cfg) {
  const DomainPtr d = fam.domain;
  if (f.domain->mask_checksum() != d->mask_checksum())
    throw std::invalid_argument("boundary_extension_check: f lives on another domain");
  ExtensionReport rep;
  SolverConfig sc;
  sc.tol = cfg.tol;
  sc.max_iters = cfg.max_iters;
  sc.certify = false;

  // Harmonic-type extension of f, used as the LP objective.
  auto harm = make_problem(d, 1, EnvelopeMode::boundary, cfg.seed, 1);
  harm.data = f;
  const auto g = solve_envelope(harm, sc);
  if (!g.converged) {
    rep.reason = "harmonic extension did not converge";
    return rep;
  }
  std::int64_t worst = -1;
  for (auto z : d->boundary_nodes()) {
    auto r = jensen_lp_min(z, g.u, fam);
    const double crit = f.values[z] - r.value;  // >= 0 since delta_z is feasible
    if (worst < 0 || crit > rep.worst_criterion) {
      worst = z;
      rep.worst_criterion = crit;
      rep.witness_measure = std::move(r.measure);
    }
  }
  if (rep.worst_criterion > cfg.tol) rep.witness = worst;
  else rep.witness_measure = {};
  if (rep.witness >= 0) {
    rep.verdict = Verdict::fail;
    std::ostringstream os;
    os << "criterion fails at boundary node " << rep.witness << ": f(z) - inf = " << rep.worst_criterion;
    rep.reason = os.str();
    return rep;
  }

  auto prob = make_problem(d, fam.m, EnvelopeMode::boundary, cfg.seed, cfg.samples);
  prob.data = f;
  auto res = solve_envelope(prob, sc);
  if (!res.converged) {
    rep.reason = "envelope did not converge";
    return rep;
  }
  double lip = 0;
  const auto near = neighbourhood_offsets(*d);
  double x[kMaxReal], y[kMaxReal];
  for (auto b : d->boundary_nodes())
    for (auto o : near) {
      const std::int64_t q = static_cast<std::int64_t>(b) + o;
      if (q < 0 || static_cast<std::size_t>(q) >= d->size() || !d->boundary(q)) continue;
      d->coords(b, x);
      d->coords(q, y);
      double s = 0;
      for (int k = 0; k < d->dims(); ++k) s += (x[k] - y[k]) * (x[k] - y[k]);
      lip = std::max(lip, std::abs(f.values[b] - f.values[q]) / std::sqrt(s));
    }
  const double attain = cfg.attain_tol > 0 ? cfg.attain_tol : 4 * d->h() * std::max(1.0, lip);
  const auto w = walsh_boundary_check(res, &f, attain);
  rep.walsh_gap = w.worst_gap;
  if (w.worst_gap <= attain) {
    rep.verdict = Verdict::pass;
    rep.reason = "criterion holds at every boundary node and the envelope attains f";
    rep.extension = std::move(res.u);
  } else {
    rep.verdict = Verdict::fail;
    std::ostringstream os;
    os << "envelope misses boundary values by " << w.worst_gap << " (tol " << attain << ")";
    rep.reason = os.str();
    rep.witness = w.worst_node;
  }
  return rep;
}

}  // namespace hesslab
