#include "hesslab/hessian_measure.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "hesslab/parallel.hpp"

namespace hesslab {

namespace {

double sigma_density(const HermitianForm& h, int m) {
  return sigma_from_minors(h)[m - 1] / binomial(h.n(), m);
}

}  // namespace

MeasureDensity hessian_density(const GridField& field, int m, double crease_tol) {
  const Domain& d = *field.domain;
  const int n = d.n();
  if (m < 1 || m > n) throw std::invalid_argument("hessian_density: m out of range 1..n");
  MeasureDensity out;
  out.domain = field.domain;
  out.m = m;
  out.density.assign(d.size(), std::numeric_limits<double>::quiet_NaN());
  const auto& nodes = d.interior_nodes();
  const auto near = neighbourhood_offsets(d);

  // Centred densities first; crease points then take the minimum over the
  // one-sided Hessians, those centred at interior neighbours off the crease.
  std::vector<double> centred(d.size(), std::numeric_limits<double>::quiet_NaN());
  std::vector<std::uint8_t> crease(d.size(), 0);
  parallel_chunks(nodes.size(), [&](std::size_t, std::size_t b, std::size_t e) {
    for (std::size_t i = b; i < e; ++i) {
      const std::size_t p = nodes[i];
      if (const auto h = complex_hessian_fd(field, p)) centred[p] = sigma_density(*h, m);
      crease[p] = crease_at(field, p, crease_tol);
    }
  });
  for (auto p : nodes) {
    double v = centred[p];
    if (std::isnan(v)) {
      ++out.excluded;
      continue;
    }
    if (crease[p]) {
      ++out.crease_points;
      double side = std::numeric_limits<double>::infinity();
      for (auto o : near)
        for (std::int64_t q : {static_cast<std::int64_t>(p) + o, static_cast<std::int64_t>(p) - o})
          if (d.interior(q) && !crease[q] && !std::isnan(centred[q])) side = std::min(side, centred[q]);
      if (std::isfinite(side)) v = side;
    }
    out.density[p] = v;
    ++out.defined;
  }

  out.total_mass = total_mass(out);
  const double cell = std::pow(d.h(), 2 * n);
  std::vector<std::uint8_t> seen(d.size(), 0);
  for (auto b : d.boundary_nodes())
    for (auto o : near)
      for (std::int64_t q : {static_cast<std::int64_t>(b) + o, static_cast<std::int64_t>(b) - o}) {
        if (q < 0 || static_cast<std::size_t>(q) >= d.size() || !d.interior(q) || seen[q]) continue;
        seen[q] = 1;
        if (std::isfinite(out.density[q])) out.quadrature_error += std::abs(out.density[q]) * cell;
      }
  return out;
}

double total_mass(const MeasureDensity& md, const std::vector<std::uint8_t>* region) {
  const Domain& d = *md.domain;
  const auto& nodes = d.interior_nodes();
  std::vector<double> sums(chunk_count(nodes.size()), 0.0);
  parallel_chunks(nodes.size(), [&](std::size_t c, std::size_t b, std::size_t e) {
    double s = 0;
    for (std::size_t i = b; i < e; ++i) {
      const std::size_t p = nodes[i];
      if (region && !(*region)[p]) continue;
      if (std::isfinite(md.density[p])) s += md.density[p];
    }
    sums[c] = s;
  });
  double total = 0;
  for (double s : sums) total += s;
  return total * std::pow(d.h(), 2 * d.n());
}

MembershipReport e0_membership(const GridField& field, int m, double tol, double boundary_constant) {
  const Domain& d = *field.domain;
  MembershipReport rep;
  double top = -std::numeric_limits<double>::infinity(), low = std::numeric_limits<double>::infinity();
  bool finite = true;
  for (auto p : d.interior_nodes()) {
    const double v = field.values[p];
    finite = finite && std::isfinite(v) && v > kSentinel;
    top = std::max(top, v);
    low = std::min(low, v);
  }
  rep.items.push_back({"nonpositive", top <= tol, top});
  const auto ex = exhaustion_report(field);
  rep.items.push_back({"boundary_limit", ex.band_sup >= -boundary_constant * d.h(), ex.band_sup});
  rep.items.push_back({"bounded", finite, low});
  MshOptions mo;
  mo.tol = tol;
  const auto msh = msh_report(field, m, mo);
  rep.items.push_back({"m_subharmonic", msh.pass, msh.worst_margin});
  const auto md = hessian_density(field, m);
  rep.items.push_back({"finite_mass", std::isfinite(md.total_mass), md.total_mass});
  rep.pass = std::all_of(rep.items.begin(), rep.items.end(), [](const MembershipItem& i) { return i.pass; });
  return rep;
}

}  // namespace hesslab
