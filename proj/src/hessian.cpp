#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "hesslab/fields.hpp"
#include "hesslab/parallel.hpp"

namespace hesslab {

namespace {

bool usable(double v) { return std::isfinite(v) && v > kSentinel; }

struct Stencil {
  int n;
  double inv_h2;
  std::int64_t s[kMaxReal];
  explicit Stencil(const Domain& d) : n(d.n()), inv_h2(1.0 / (d.h() * d.h())) {
    for (int a = 0; a < d.dims(); ++a) s[a] = d.stride(a);
  }
};

bool hessian_at(const double* u, std::size_t p, const Stencil& st, HermitianForm& out) {
  const double c = u[p];
  if (!usable(c)) return false;
  out = HermitianForm(st.n);
  for (int j = 0; j < st.n; ++j) {
    const std::int64_t ax = st.s[2 * j], ay = st.s[2 * j + 1];
    const double e = u[p + ax], w = u[p - ax], nn = u[p + ay], ss = u[p - ay];
    const double ne = u[p + ax + ay], nw = u[p - ax + ay], se = u[p + ax - ay], sw = u[p - ax - ay];
    if (!(usable(e) && usable(w) && usable(nn) && usable(ss) && usable(ne) && usable(nw) && usable(se) &&
          usable(sw)))
      return false;
    // Compact nine-point Laplacian in the z_j plane; exact on quadratics and
    // sixth-order on harmonic functions.
    const double lap = (4 * (e + w + nn + ss) + (ne + nw + se + sw) - 20 * c) * st.inv_h2 / 6;
    out(j, j) = lap / 4;
  }
  auto mixed = [&](std::int64_t a, std::int64_t b, double& r) {
    const double pp = u[p + a + b], pm = u[p + a - b], mp = u[p - a + b], mm = u[p - a - b];
    if (!(usable(pp) && usable(pm) && usable(mp) && usable(mm))) return false;
    r = (pp - pm - mp + mm) * st.inv_h2 / 4;
    return true;
  };
  for (int j = 0; j < st.n; ++j)
    for (int k = j + 1; k < st.n; ++k) {
      double xx, yy, xy, yx;
      if (!mixed(st.s[2 * j], st.s[2 * k], xx) || !mixed(st.s[2 * j + 1], st.s[2 * k + 1], yy) ||
          !mixed(st.s[2 * j], st.s[2 * k + 1], xy) || !mixed(st.s[2 * j + 1], st.s[2 * k], yx))
        return false;
      const cplx v((xx + yy) / 4, (xy - yx) / 4);
      out(j, k) = v;
      out(k, j) = std::conj(v);
    }
  return true;
}

// sigma_1..sigma_m as sums of principal minors of order <= m.
void sigma_upto(const HermitianForm& h, int m, double* sig) {
  const int n = h.n();
  for (int k = 0; k < m; ++k) sig[k] = 0;
  if (m == 1) {
    sig[0] = h.trace();
    return;
  }
  std::array<cplx, kMaxDim * kMaxDim> sub{};
  for (unsigned mask = 1; mask < (1u << n); ++mask) {
    const int k = __builtin_popcount(mask);
    if (k > m) continue;
    int idx[kMaxDim], q = 0;
    for (int j = 0; j < n; ++j)
      if (mask & (1u << j)) idx[q++] = j;
    if (k == 1) {
      sig[0] += h(idx[0], idx[0]).real();
      continue;
    }
    for (int r = 0; r < k; ++r)
      for (int c = 0; c < k; ++c) sub[r * kMaxDim + c] = h(idx[r], idx[c]);
    sig[k - 1] += determinant(sub, k).real();
  }
}

double second_diff(const double* u, std::size_t p, std::int64_t a, double inv_h2, bool& ok) {
  const double l = u[p - a], c = u[p], r = u[p + a];
  ok = usable(l) && usable(c) && usable(r);
  return (l - 2 * c + r) * inv_h2;
}

bool crease_between(const double* u, std::size_t p, const Domain& d, const std::vector<std::int64_t>& near,
                    double inv_h2, double tol) {
  for (const std::int64_t off : near) {
    if (!d.interior(p + off)) continue;
    bool ok0, ok1;
    const double s0 = second_diff(u, p, off, inv_h2, ok0);
    const double s1 = second_diff(u, p + off, off, inv_h2, ok1);
    if (!ok0 || !ok1) continue;
    const bool flip = s0 * s1 < 0 && std::max(std::abs(s0), std::abs(s1)) > tol;
    const bool jump = std::abs(s0 - s1) > 0.5 * (std::abs(s0) + std::abs(s1)) + tol;
    if (flip || jump) return true;
  }
  return false;
}

}  // namespace

bool crease_at(const GridField& f, std::size_t p, double tol) {
  const Domain& d = *f.domain;
  const double h = d.h();
  return crease_between(f.values.data(), p, d, neighbourhood_offsets(d), 1.0 / (h * h), tol);
}

std::optional<HermitianForm> complex_hessian_fd(const GridField& f, std::size_t p) {
  const Domain& d = *f.domain;
  if (p >= d.size() || !d.interior(p)) throw std::invalid_argument("complex_hessian_fd: node is not interior");
  Stencil st(d);
  HermitianForm h;
  if (!hessian_at(f.values.data(), p, st, h)) return std::nullopt;
  return h;
}

MshReport msh_report(const GridField& f, int m, const MshOptions& opts) {
  const Domain& d = *f.domain;
  const int n = d.n();
  if (m < 1 || m > n) throw std::invalid_argument("msh_report: m out of range 1..n");
  const double* u = f.values.data();
  const Stencil st(d);
  const double shift = opts.strict_c.value_or(0.0);

  std::vector<HermitianForm> tests;
  if (opts.random_alpha_count > 0) {
    Rng rng(opts.seed);
    for (int t = 0; t < opts.random_alpha_count; ++t) {
      std::vector<HermitianForm> alphas;
      for (int i = 0; i < m - 1; ++i) alphas.push_back(random_gamma_member(n, m, rng));
      tests.push_back(linearize_mixed(n, alphas));
    }
  }

  const auto near = neighbourhood_offsets(d);

  std::vector<std::uint32_t> nodes;
  const std::vector<std::uint32_t>* work = &d.interior_nodes();
  if (opts.region) {
    for (auto p : d.interior_nodes())
      if ((*opts.region)[p]) nodes.push_back(p);
    work = &nodes;
  }

  struct Partial {
    std::size_t evaluated = 0, passed = 0, skipped = 0, crease = 0;
    double worst = std::numeric_limits<double>::infinity();
    std::int64_t worst_node = -1;
    double worst_pos = std::numeric_limits<double>::infinity();
    std::vector<MshPoint> points;
  };
  std::vector<Partial> parts(chunk_count(work->size()));

  auto evaluate = [&](std::size_t p, HermitianForm& h, double* sig) -> bool {
    if (!hessian_at(u, p, st, h)) return false;
    if (shift != 0.0)
      for (int j = 0; j < n; ++j) h(j, j) -= shift;
    sigma_upto(h, m, sig);
    return true;
  };

  parallel_chunks(work->size(), [&](std::size_t c, std::size_t b, std::size_t e) {
    Partial& part = parts[c];
    HermitianForm h, alt;
    double sig[kMaxDim], alt_sig[kMaxDim];
    for (std::size_t i = b; i < e; ++i) {
      const std::size_t p = (*work)[i];
      if (!evaluate(p, h, sig)) {
        ++part.skipped;
        continue;
      }
      ++part.evaluated;
      double margin = *std::min_element(sig, sig + m);
      bool crease = false;
      if (margin < -opts.tol) {
        // Viscosity rule at max-creases: a second difference along some
        // stencil direction changes sign or jumps between p and a neighbour;
        // accept the best Hessian among stencils shifted to neighbours.
        crease = crease_between(u, p, d, near, st.inv_h2, opts.tol);
        if (crease) {
          ++part.crease;
          double best = margin;
          for (auto off : near) {
            const std::size_t q = p + off;
            if (!d.interior(q) || !evaluate(q, alt, alt_sig)) continue;
            const double mq = *std::min_element(alt_sig, alt_sig + m);
            if (mq > best) {
              best = mq;
              std::copy(alt_sig, alt_sig + m, sig);
              h = alt;
            }
          }
          margin = best;
        }
      }
      if (margin >= -opts.tol) ++part.passed;
      if (margin < part.worst) {
        part.worst = margin;
        part.worst_node = static_cast<std::int64_t>(p);
      }
      for (const auto& a : tests) {
        double v = 0;
        for (int j = 0; j < n; ++j)
          for (int k = 0; k < n; ++k) v += (a(k, j) * h(j, k)).real();
        part.worst_pos = std::min(part.worst_pos, v);
      }
      if (opts.keep_points) part.points.push_back({static_cast<std::uint32_t>(p), margin, {sig, sig + m}, crease});
    }
  });

  MshReport rep;
  rep.m = m;
  double worst = std::numeric_limits<double>::infinity(), worst_pos = worst;
  for (auto& part : parts) {
    rep.evaluated += part.evaluated;
    rep.passed += part.passed;
    rep.skipped += part.skipped;
    rep.crease_points += part.crease;
    if (part.worst < worst) {
      worst = part.worst;
      rep.worst_node = part.worst_node;
    }
    worst_pos = std::min(worst_pos, part.worst_pos);
    if (opts.keep_points) rep.points.insert(rep.points.end(), part.points.begin(), part.points.end());
  }
  rep.worst_margin = rep.evaluated ? worst : 0.0;
  if (!tests.empty() && rep.evaluated) rep.worst_positivity = worst_pos;
  rep.pass_fraction = rep.evaluated ? static_cast<double>(rep.passed) / rep.evaluated : 0.0;
  rep.pass = rep.evaluated > 0 && rep.passed == rep.evaluated;
  return rep;
}

}  // namespace hesslab
