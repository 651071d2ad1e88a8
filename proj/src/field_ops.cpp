#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <mutex>
#include <sstream>
#include <stdexcept>

#include "hesslab/fields.hpp"

namespace hesslab {

namespace {

void require_same_domain(const GridField& u, const GridField& v) {
  if (u.domain != v.domain && u.domain->mask_checksum() != v.domain->mask_checksum())
    throw std::invalid_argument("combine: fields live on different domains");
}

}  // namespace

GridField combine(const CombineSpec& spec, const GridField& u, const GridField& v) {
  require_same_domain(u, v);
  const Domain& d = *u.domain;
  GridField out = u;
  out.provenance = "computed";
  const auto nodes = masked_nodes(d);
  switch (spec.op) {
    case CombineOp::max:
      for (auto p : nodes) out.values[p] = std::max(u.values[p], v.values[p]);
      break;
    case CombineOp::affine:
      if (spec.s < 0 || spec.t < 0) throw std::invalid_argument("combine: affine weights must be nonnegative");
      for (auto p : nodes) out.values[p] = spec.s * u.values[p] + spec.t * v.values[p];
      break;
    case CombineOp::glue: {
      if (!spec.omega || spec.omega->size() != d.size()) throw std::invalid_argument("combine: glue needs a mask");
      const auto& om = *spec.omega;
      const auto axes = axis_offsets(d);
      double worst = -std::numeric_limits<double>::infinity();
      std::int64_t worst_node = -1;
      for (std::size_t i = 0; i < d.size(); ++i) {
        if (!om[i]) continue;
        if (!d.interior(i)) throw std::invalid_argument("combine: glue region must lie in the interior");
        bool ring = false;
        for (auto a : axes) ring = ring || (d.interior(i + a) && !om[i + a]);
        if (ring && v.values[i] - u.values[i] > worst) {
          worst = v.values[i] - u.values[i];
          worst_node = static_cast<std::int64_t>(i);
        }
      }
      if (worst > spec.tol) {
        std::ostringstream os;
        os << "combine: glue condition v <= u violated on the ring of omega at node " << worst_node << " by "
           << worst;
        throw std::invalid_argument(os.str());
      }
      for (auto p : nodes)
        if (om[p]) out.values[p] = std::max(u.values[p], v.values[p]);
      break;
    }
  }
  return out;
}

double regularized_max(double u, double v, double eta) {
  // Average of max(u + s, v) over s uniform in [-eta, eta].
  const double d = u - v;
  if (d >= eta) return u;
  if (d <= -eta) return v;
  return v + (d + eta) * (d + eta) / (4 * eta);
}

GridField regularized_max(const GridField& u, const GridField& v, double eta) {
  if (!(eta > 0)) throw std::invalid_argument("regularized_max: eta must be positive");
  require_same_domain(u, v);
  GridField out = u;
  out.provenance = "computed";
  for (auto p : masked_nodes(*u.domain)) out.values[p] = regularized_max(u.values[p], v.values[p], eta);
  return out;
}

double mollifier_profile(double t) {
  if (t < 0 || t >= 1) return 0.0;
  return std::exp(1.0 / (t - 1.0)) / ((1.0 - t) * (1.0 - t));
}

double mollifier_constant(int n) {
  static std::array<double, 5> cache{};
  static std::mutex mu;
  if (n < 1 || n > 4) throw std::invalid_argument("mollifier: n must be in 1..4");
  std::lock_guard<std::mutex> lock(mu);
  if (cache[n] > 0) return cache[n];
  // Composite Simpson in the radius r on [0, 1] with 10^4 intervals.
  const int steps = 10000;
  double fact = 1;
  for (int i = 2; i < n; ++i) fact *= i;
  const double sphere = 2 * std::pow(M_PI, n) / fact;  // area of the unit sphere in R^{2n}
  auto g = [&](double r) { return mollifier_profile(r * r) * std::pow(r, 2 * n - 1) * sphere; };
  double s = g(0) + g(1);
  for (int i = 1; i < steps; ++i) s += (i % 2 ? 4 : 2) * g(static_cast<double>(i) / steps);
  cache[n] = 1.0 / (s / (3.0 * steps));
  return cache[n];
}

double MollifierSpec::normalization() const { return mollifier_constant(n); }

MollifyResult mollify(const GridField& f, const MollifierSpec& spec) {
  const Domain& d = *f.domain;
  if (spec.n != d.n()) throw std::invalid_argument("mollify: dimension mismatch");
  if (!(spec.epsilon >= 2 * d.h() * (1 - 1e-12))) throw std::invalid_argument("mollify: epsilon must be >= 2h");
  const int dims = d.dims();
  const int reach = static_cast<int>(std::floor(spec.epsilon / d.h()));
  const double cn = mollifier_constant(d.n());

  std::vector<std::int64_t> offs;
  std::vector<double> w;
  std::array<int, kMaxReal> k{};
  for (int a = 0; a < dims; ++a) k[a] = -reach;
  while (true) {
    double r2 = 0;
    for (int a = 0; a < dims; ++a) r2 += static_cast<double>(k[a]) * k[a];
    const double t = r2 * d.h() * d.h() / (spec.epsilon * spec.epsilon);
    const double rho = mollifier_profile(t);
    if (rho > 0) {
      offs.push_back(d.offset(k.data()));
      w.push_back(rho);
    }
    int a = dims - 1;
    while (a >= 0 && ++k[a] > reach) k[a--] = -reach;
    if (a < 0) break;
  }
  double raw = 0;
  for (double x : w) raw += x;
  MollifyResult res;
  res.quadrature_mass = raw * cn * std::pow(d.h() / spec.epsilon, dims);
  for (double& x : w) x /= raw;
  double check = 0;
  for (double x : w) check += x;
  res.kernel_sum = check;

  const auto dist = boundary_distance(d);
  res.shrunken.assign(d.size(), 0);
  res.field = make_field(f.domain, std::numeric_limits<double>::quiet_NaN(), "computed");
  std::size_t count = 0;
  for (auto p : d.interior_nodes()) {
    if (!(dist[p] > spec.epsilon)) continue;
    double s = 0;
    bool ok = true;
    for (std::size_t i = 0; i < offs.size() && ok; ++i) {
      const double v = f.values[p + offs[i]];
      ok = std::isfinite(v) && v > kSentinel;
      s += w[i] * v;
    }
    if (!ok) continue;
    res.shrunken[p] = 1;
    res.field.values[p] = s;
    ++count;
  }
  if (count == 0) throw std::invalid_argument("mollify: epsilon leaves an empty shrunken interior");
  return res;
}

ExhaustionReport exhaustion_report(const GridField& f, double band_factor, double boundary_tol_factor) {
  const Domain& d = *f.domain;
  const auto dist = boundary_distance(d);
  const double h = d.h();
  ExhaustionReport r;
  r.band_sup = -std::numeric_limits<double>::infinity();
  r.band_inf = std::numeric_limits<double>::infinity();
  r.max_value = -std::numeric_limits<double>::infinity();
  double fmin = std::numeric_limits<double>::infinity();
  for (auto p : d.interior_nodes()) {
    const double v = f.values[p];
    if (!std::isfinite(v)) continue;
    r.max_value = std::max(r.max_value, v);
    fmin = std::min(fmin, v);
    if (v > 1e-9) ++r.positive_points;
    if (dist[p] <= band_factor * h * (1 + 1e-9)) {
      ++r.band_points;
      r.band_sup = std::max(r.band_sup, v);
      r.band_inf = std::min(r.band_inf, v);
    }
  }
  r.negativity_ok = r.positive_points == 0;
  r.boundary_ok = r.band_points > 0 && r.band_sup >= -boundary_tol_factor * h;

  // Sublevel sets {f < c}: their distance to the boundary must not shrink as c
  // decreases, and the deepest one must clear the boundary band.
  const int ladder = 8;
  r.levels_ok = fmin < 0;
  for (int i = 1; i < ladder && fmin < 0; ++i) {
    ExhaustionReport::Level lv{fmin * i / ladder, std::numeric_limits<double>::infinity(), 0};
    for (auto p : d.interior_nodes())
      if (f.values[p] < lv.c) {
        lv.distance = std::min(lv.distance, static_cast<double>(dist[p]));
        ++lv.count;
      }
    if (!r.levels.empty() && lv.distance + 1e-12 < r.levels.back().distance) r.levels_ok = false;
    r.levels.push_back(lv);
  }
  if (!r.levels.empty() && !(r.levels.back().distance > band_factor * h)) r.levels_ok = false;
  r.pass = r.negativity_ok && r.boundary_ok && r.levels_ok;
  return r;
}

}  // namespace hesslab
