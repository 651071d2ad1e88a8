#include "hesslab/envelopes.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <sstream>
#include <stdexcept>

namespace hesslab {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

void real_vector(const cplx* v, int n, std::array<int, kMaxReal>& out) {
  out.fill(0);
  for (int j = 0; j < n; ++j) {
    out[2 * j] = static_cast<int>(std::lround(v[j].real()));
    out[2 * j + 1] = static_cast<int>(std::lround(v[j].imag()));
  }
}

struct Operator {
  std::vector<std::pair<int, double>> terms;  // direction index, weight on S_d (sum 1)
};

// Operators of the scheme for the problem's cone samples.
std::vector<Operator> build_operators(int n, int m, const std::vector<HermitianForm>& samples,
                                      const std::vector<LatticeDirection>& dirs) {
  std::vector<Operator> ops;
  auto push = [&](const std::vector<double>& w) {
    Operator op;
    double total = 0;
    for (std::size_t d = 0; d < w.size(); ++d) {
      if (w[d] <= 0) continue;
      // form_d = v v^*/|v|^2 and tr(form_d H) ~ (S_d - 4u) / (4 h^2 |v|^2).
      int nz = 0;
      for (int a = 0; a < 2 * n; ++a) nz += dirs[d].xi[a] != 0;
      const double wd = w[d] / nz;  // |v|^2 equals the number of nonzero real entries
      op.terms.push_back({static_cast<int>(d), wd});
      total += wd;
    }
    for (auto& t : op.terms) t.second /= total;
    for (const auto& o : ops) {
      if (o.terms.size() != op.terms.size()) continue;
      bool same = true;
      for (std::size_t i = 0; i < o.terms.size() && same; ++i)
        same = o.terms[i].first == op.terms[i].first && std::abs(o.terms[i].second - op.terms[i].second) < 1e-12;
      if (same) return;
    }
    ops.push_back(std::move(op));
  };
  if (m == n) {
    for (std::size_t d = 0; d < dirs.size(); ++d) {
      std::vector<double> w(dirs.size(), 0.0);
      w[d] = 1.0;
      push(w);
    }
    return ops;
  }
  for (const auto& a : samples) {
    const double tr = a.trace();
    if (!(tr > 0)) throw std::invalid_argument("solve_envelope: dual sample with nonpositive trace");
    push(decompose_in_directions(a * (1.0 / tr), dirs));
  }
  return ops;
}

double obstacle_at(const EnvelopeProblem& p, std::size_t i) {
  switch (p.mode) {
    case EnvelopeMode::obstacle:
      return p.data->values[i];
    case EnvelopeMode::boundary:
      return kInf;
    case EnvelopeMode::extremal:
      return p.target[i] ? -1.0 : 0.0;
  }
  return kInf;
}

}  // namespace

std::vector<LatticeDirection> lattice_directions(int n) {
  std::vector<LatticeDirection> dirs;
  auto add = [&](int j, int k, cplx c) {
    cplx v[kMaxDim] = {};
    v[j] = 1.0;
    if (k >= 0) v[k] = c;
    LatticeDirection d;
    real_vector(v, n, d.xi);
    cplx iv[kMaxDim];
    for (int l = 0; l < n; ++l) iv[l] = cplx(0, 1) * v[l];
    real_vector(iv, n, d.jxi);
    d.form = HermitianForm(n);
    double norm = 0;
    for (int l = 0; l < n; ++l) norm += std::norm(v[l]);
    for (int a = 0; a < n; ++a)
      for (int b = 0; b < n; ++b) d.form(a, b) = v[a] * std::conj(v[b]) / norm;
    dirs.push_back(d);
  };
  for (int j = 0; j < n; ++j) add(j, -1, 0.0);
  for (int j = 0; j < n; ++j)
    for (int k = j + 1; k < n; ++k) {
      add(j, k, 1.0);
      add(j, k, -1.0);
      add(j, k, cplx(0, 1));
      add(j, k, cplx(0, -1));
    }
  return dirs;
}

std::vector<double> decompose_in_directions(const HermitianForm& a, const std::vector<LatticeDirection>& dirs,
                                            double* shrink) {
  const int n = a.n();
  // Each off-diagonal entry is carried by the four directions of its pair;
  // what is left on the diagonal goes to the coordinate directions.
  std::vector<double> excess(n);
  for (int j = 0; j < n; ++j) {
    double r = 0;
    for (int k = 0; k < n; ++k)
      if (k != j) r += std::abs(a(j, k).real()) + std::abs(a(j, k).imag());
    excess[j] = r - a(j, j).real();
  }
  double t = 0;
  for (int j = 0; j < n; ++j)
    if (excess[j] > 0) t = std::max(t, excess[j] / (excess[j] + 1.0 / n));
  if (shrink) *shrink = t;
  const HermitianForm b = a * (1 - t) + HermitianForm::identity(n) * (t / n);
  std::vector<double> w(dirs.size(), 0.0);
  std::size_t idx = static_cast<std::size_t>(n);
  std::vector<double> used(n, 0.0);
  for (int j = 0; j < n; ++j)
    for (int k = j + 1; k < n; ++k) {
      const double re = b(j, k).real(), im = b(j, k).imag();
      // form weights: e_j+e_k, e_j-e_k, e_j+i e_k, e_j-i e_k (each has off-diagonal magnitude 1/2)
      w[idx + 0] = re > 0 ? 2 * re : 0;
      w[idx + 1] = re < 0 ? -2 * re : 0;
      w[idx + 2] = im < 0 ? -2 * im : 0;
      w[idx + 3] = im > 0 ? 2 * im : 0;
      const double carried = 2 * (std::abs(re) + std::abs(im));
      used[j] += carried / 2;
      used[k] += carried / 2;
      idx += 4;
    }
  for (int j = 0; j < n; ++j) w[j] = std::max(0.0, b(j, j).real() - used[j]);
  return w;
}

void EnvelopeProblem::validate() const {
  if (!domain) throw std::invalid_argument("EnvelopeProblem: missing domain");
  const Domain& d = *domain;
  if (m < 1 || m > d.n()) throw std::invalid_argument("EnvelopeProblem: m out of range 1..n");
  if (dual_samples.empty()) throw std::invalid_argument("EnvelopeProblem: dual_samples is empty");
  for (const auto& a : dual_samples) {
    if (a.n() != d.n()) throw std::invalid_argument("EnvelopeProblem: dual sample dimension mismatch");
    if (std::abs(a.trace() - 1.0) > 1e-9) throw std::invalid_argument("EnvelopeProblem: dual sample not unit trace");
    if (eigenvalues_hermitian(a).eigenvalues.front() < -1e-9)
      throw std::invalid_argument("EnvelopeProblem: dual sample not positive semidefinite");
  }
  switch (mode) {
    case EnvelopeMode::obstacle:
    case EnvelopeMode::boundary: {
      if (!data || data->values.size() != d.size()) throw std::invalid_argument("EnvelopeProblem: missing data field");
      if (mode == EnvelopeMode::obstacle)
        for (auto p : d.interior_nodes())
          if (!std::isfinite(data->values[p])) throw std::invalid_argument("EnvelopeProblem: obstacle not finite");
      for (auto p : d.boundary_nodes())
        if (!std::isfinite(data->values[p])) throw std::invalid_argument("EnvelopeProblem: boundary data not finite");
      break;
    }
    case EnvelopeMode::extremal: {
      if (target.size() != d.size()) throw std::invalid_argument("EnvelopeProblem: target mask size mismatch");
      // Lattice steps of Euclidean length at most 2 (in units of h).
      std::vector<std::array<int, kMaxReal>> ball;
      std::array<int, kMaxReal> k{};
      const int dims = d.dims();
      auto enumerate = [&](auto&& self, int a, int norm) -> void {
        if (a == dims) {
          if (norm > 0) ball.push_back(k);
          return;
        }
        for (int v = -2; v <= 2; ++v) {
          if (norm + v * v > 4) continue;
          k[a] = v;
          self(self, a + 1, norm + v * v);
        }
        k[a] = 0;
      };
      enumerate(enumerate, 0, 0);
      bool any = false;
      for (std::size_t i = 0; i < d.size(); ++i) {
        if (!target[i]) continue;
        any = true;
        if (!d.interior(i)) throw std::invalid_argument("EnvelopeProblem: target set leaves the interior");
        const auto base = d.lattice(i);
        for (const auto& step : ball) {
          std::array<int, kMaxReal> q = base;
          bool inside = true;
          for (int a = 0; a < dims; ++a) {
            q[a] += step[a];
            inside = inside && q[a] >= d.lattice_origin(a) && q[a] < d.lattice_origin(a) + d.extent(a);
          }
          if (!inside || !d.interior(d.index_of_lattice(q)))
            throw std::invalid_argument("EnvelopeProblem: target set closer than 2h to the boundary");
        }
      }
      if (!any) throw std::invalid_argument("EnvelopeProblem: target set is empty");
      break;
    }
  }
}

EnvelopeProblem make_problem(DomainPtr d, int m, EnvelopeMode mode, std::uint64_t seed, int count) {
  EnvelopeProblem p;
  p.m = m;
  p.mode = mode;
  p.seed = seed;
  p.dual_samples = dual_cone_sample(d->n(), m, std::max(1, count), seed);
  p.domain = std::move(d);
  return p;
}

void SolverConfig::validate() const {
  if (!(tol > 0)) throw std::invalid_argument("SolverConfig: tol must be positive");
  if (max_iters < 1) throw std::invalid_argument("SolverConfig: max_iters must be at least 1");
  if (!(damping > 0 && damping <= 1)) throw std::invalid_argument("SolverConfig: damping must lie in (0, 1]");
  if (check_every < 1) throw std::invalid_argument("SolverConfig: check_every must be at least 1");
}

EnvelopeResult solve_envelope(const EnvelopeProblem& prob, const SolverConfig& cfg) {
  prob.validate();
  cfg.validate();
  const Domain& d = *prob.domain;
  const int n = d.n();
  const double h = d.h();

  // Boundary mode with m > 1 starts from the m = 1 solution, which lies above
  // every m-subharmonic candidate with the same boundary values.
  std::optional<GridField> start;
  if (prob.mode == EnvelopeMode::boundary && prob.m > 1) {
    EnvelopeProblem lap = prob;
    lap.m = 1;
    lap.dual_samples = {HermitianForm::identity(n) * (1.0 / n)};
    SolverConfig lc = cfg;
    lc.stop_check = nullptr;
    lc.certify = false;
    start = solve_envelope(lap, lc).u;
  }

  const auto dirs = lattice_directions(n);
  const auto ops = build_operators(n, prob.m, prob.dual_samples, dirs);
  std::vector<int> active;
  {
    std::vector<char> used(dirs.size(), 0);
    for (const auto& op : ops)
      for (const auto& t : op.terms) used[t.first] = 1;
    for (std::size_t k = 0; k < dirs.size(); ++k)
      if (used[k]) active.push_back(static_cast<int>(k));
  }
  // Operators in terms of positions within `active`.
  std::vector<int> slot(dirs.size(), -1);
  for (std::size_t s = 0; s < active.size(); ++s) slot[active[s]] = static_cast<int>(s);
  struct Term {
    int s;
    double w;
  };
  std::vector<std::vector<Term>> compiled;
  for (const auto& op : ops) {
    std::vector<Term> c;
    for (const auto& t : op.terms) c.push_back({slot[t.first], t.second / 4});
    compiled.push_back(std::move(c));
  }
  std::vector<std::int64_t> off1, off2;
  for (int k : active) {
    off1.push_back(d.offset(dirs[k].xi.data()));
    off2.push_back(d.offset(dirs[k].jxi.data()));
  }
  const std::size_t na = active.size();

  EnvelopeResult res;
  res.seed = prob.seed;
  res.operator_count = ops.size();
  res.u = make_field(prob.domain, 0.0, "envelope");
  double* u = res.u.values.data();
  const auto& inter = d.interior_nodes();

  double top = -kInf;
  for (auto b : d.boundary_nodes()) {
    const double v = prob.mode == EnvelopeMode::extremal ? 0.0 : prob.data->values[b];
    u[b] = v;
    top = std::max(top, v);
  }
  for (auto p : inter) {
    if (start)
      u[p] = start->values[p];
    else if (prob.mode == EnvelopeMode::boundary)
      u[p] = top;
    else
      u[p] = obstacle_at(prob, p);
  }

  std::vector<double> obst;
  if (prob.mode != EnvelopeMode::boundary) {
    obst.resize(inter.size());
    for (std::size_t i = 0; i < inter.size(); ++i) obst[i] = obstacle_at(prob, inter[i]);
  }

  // Kernel shapes: one averaging operator (m = 1), a minimum over single
  // directions (m = n), or general mixtures.
  enum { kSingle, kDirectionMin, kGeneral } kind = kGeneral;
  if (compiled.size() == 1)
    kind = kSingle;
  else if (std::all_of(compiled.begin(), compiled.end(), [](const auto& op) { return op.size() == 1; }))
    kind = kDirectionMin;

  auto target_value = [&](std::size_t p) {
    double s[2 * kMaxDim * kMaxDim];
    for (std::size_t a = 0; a < na; ++a) s[a] = u[p + off1[a]] + u[p - off1[a]] + u[p + off2[a]] + u[p - off2[a]];
    if (kind == kSingle) {
      double v = 0;
      for (const auto& t : compiled[0]) v += t.w * s[t.s];
      return v;
    }
    if (kind == kDirectionMin) return *std::min_element(s, s + na) / 4;
    double best = kInf;
    for (const auto& op : compiled) {
      double v = 0;
      for (const auto& t : op) v += t.w * s[t.s];
      best = std::min(best, v);
    }
    return best;
  };

  const double damp = cfg.damping;
  const bool has_obstacle = !obst.empty();
  auto relax = [&](std::size_t i) {
    const std::size_t p = inter[i];
    double v = target_value(p);
    if (has_obstacle) v = std::min(v, obst[i]);
    const double old = u[p];
    if (v >= old) return 0.0;
    const double nv = damp == 1.0 ? v : old - damp * (old - v);
    u[p] = nv;
    return old - nv;
  };

  int it = 0;
  double change = kInf;
  while (it < cfg.max_iters) {
    change = 0;
    const bool backward = cfg.order == SolverConfig::Order::alternating && (it % 2 == 1);
    if (backward)
      for (std::size_t i = inter.size(); i-- > 0;) change = std::max(change, relax(i));
    else
      for (std::size_t i = 0; i < inter.size(); ++i) change = std::max(change, relax(i));
    ++it;
    res.residual_history.push_back(change);
    if (change < cfg.tol) {
      res.converged = true;
      break;
    }
    if (cfg.stop_check && it % cfg.check_every == 0 && cfg.stop_check(res.u, it)) {
      res.stopped_early = true;
      break;
    }
  }
  res.iterations = it;
  res.final_residual = change;

  if (cfg.certify && res.converged) {
    const double contact_tol = std::max(1e3 * cfg.tol, 1e-9);
    std::vector<std::uint8_t> free(d.size(), 0);
    double margin = kInf;
    const double inv = 4.0 / (h * h);
    for (std::size_t i = 0; i < inter.size(); ++i) {
      const std::size_t p = inter[i];
      if (!obst.empty() && obst[i] - u[p] <= contact_tol) continue;
      free[p] = 1;
      double s[kMaxDim * kMaxDim * 2];
      for (std::size_t a = 0; a < na; ++a) s[a] = u[p + off1[a]] + u[p - off1[a]] + u[p + off2[a]] + u[p - off2[a]];
      for (const auto& op : compiled) {
        double v = 0;
        for (const auto& t : op) v += t.w * s[t.s];
        margin = std::min(margin, (v - u[p]) * inv);
      }
    }
    res.scheme_margin = margin == kInf ? 0.0 : margin;
    res.certificate_tol = 10 * cfg.tol / (h * h);
    MshOptions mo;
    mo.tol = res.certificate_tol;
    mo.region = &free;
    res.msh_certificate = msh_report(res.u, prob.m, mo);
    res.certificate_pass = res.scheme_margin >= -res.certificate_tol;
  }

  const GridField* bdata = prob.mode == EnvelopeMode::extremal ? nullptr : &*prob.data;
  res.boundary_report = walsh_boundary_check(res.u, bdata, kInf).gaps;
  return res;
}

WalshReport walsh_boundary_check(const GridField& u, const GridField* f, double tol) {
  const Domain& d = *u.domain;
  const auto near = neighbourhood_offsets(d);
  WalshReport rep;
  rep.worst_gap = 0;
  for (auto b : d.boundary_nodes()) {
    const double fb = f ? f->values[b] : u.values[b];
    double g = 0;
    bool any = false;
    for (auto o : near)
      for (int sgn : {1, -1}) {
        const std::int64_t q = static_cast<std::int64_t>(b) + sgn * o;
        if (q < 0 || static_cast<std::size_t>(q) >= d.size() || !d.interior(q)) continue;
        any = true;
        g = std::max(g, std::abs(u.values[q] - fb));
      }
    if (!any) continue;
    rep.gaps.push_back({b, g});
    if (g > rep.worst_gap || rep.worst_node < 0) {
      rep.worst_gap = g;
      rep.worst_node = b;
    }
  }
  rep.pass = rep.worst_gap <= tol;
  return rep;
}

WalshReport walsh_boundary_check(const EnvelopeResult& r, const GridField* f, double tol) {
  if (!r.converged) throw std::invalid_argument("walsh_boundary_check: solver did not converge");
  return walsh_boundary_check(r.u, f, tol);
}

std::string to_string(Verdict v) {
  switch (v) {
    case Verdict::pass:
      return "PASS";
    case Verdict::fail:
      return "FAIL";
    case Verdict::fail_persistent:
      return "FAIL-persistent";
    case Verdict::inconclusive:
      return "INCONCLUSIVE";
  }
  return "INCONCLUSIVE";
}

int exit_code(Verdict v) {
  switch (v) {
    case Verdict::pass:
      return 0;
    case Verdict::fail:
    case Verdict::fail_persistent:
      return 1;
    case Verdict::inconclusive:
      return 2;
  }
  return 2;
}

CertificateBlock& CertificateBlock::add(const std::string& key, const std::string& value) {
  entries.emplace_back(key, value);
  return *this;
}
CertificateBlock& CertificateBlock::add(const std::string& key, double value) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", value);
  return add(key, std::string(buf));
}
CertificateBlock& CertificateBlock::add(const std::string& key, long long value) {
  return add(key, std::to_string(value));
}
CertificateBlock& CertificateBlock::add(const std::string& key, bool value) {
  return add(key, std::string(value ? "true" : "false"));
}

std::string CertificateBlock::str() const {
  std::ostringstream os;
  os << "{\n";
  for (std::size_t i = 0; i < entries.size(); ++i)
    os << "  \"" << entries[i].first << "\": " << entries[i].second << (i + 1 < entries.size() ? ",\n" : "\n");
  os << "}\n";
  return os.str();
}

CertificateBlock certificate_of(const EnvelopeResult& r, const SolverConfig& cfg) {
  CertificateBlock c;
  c.add("verdict", std::string(r.converged ? (r.certificate_pass ? "\"PASS\"" : "\"FAIL\"") : "\"INCONCLUSIVE\""));
  c.add("converged", r.converged);
  c.add("stopped_early", r.stopped_early);
  c.add("iterations", static_cast<long long>(r.iterations));
  c.add("residual", r.final_residual);
  c.add("tol", cfg.tol);
  c.add("max_iters", static_cast<long long>(cfg.max_iters));
  c.add("damping", cfg.damping);
  c.add("seed", static_cast<long long>(r.seed));
  c.add("operators", static_cast<long long>(r.operator_count));
  c.add("scheme_margin", r.scheme_margin);
  c.add("certificate_tol", r.certificate_tol);
  c.add("msh_worst_margin", r.msh_certificate.worst_margin);
  c.add("msh_pass_fraction", r.msh_certificate.pass_fraction);
  return c;
}

}  // namespace hesslab
