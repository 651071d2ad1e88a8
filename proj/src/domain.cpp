#include "hesslab/domain.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <limits>
#include <map>
#include <sstream>
#include <stdexcept>

namespace hesslab {

namespace {

constexpr double kEdge = 1e-12;

double sq(double x) { return x * x; }

double coord_sq(const double* x, int j) { return sq(x[2 * j]) + sq(x[2 * j + 1]); }

}  // namespace

bool Shape::contains(const double* x) const {
  switch (kind) {
    case Kind::ball: {
      double s = 0;
      for (int d = 0; d < 2 * n; ++d) s += sq(x[d] - params[1 + d]);
      return s < sq(params[0]) * (1 - kEdge);
    }
    case Kind::polydisc:
      for (int j = 0; j < n; ++j)
        if (!(coord_sq(x, j) < sq(params[j]) * (1 - kEdge))) return false;
      return true;
    case Kind::hartogs_triangle: {
      const double z = coord_sq(x, 0), w = coord_sq(x, 1);
      return z < w - kEdge && w < 1 - kEdge;
    }
    case Kind::reinhardt: {
      const double k = params[0];
      double phi = 0;
      for (int j = 0; j < n; ++j) {
        const double a = coord_sq(x, j);
        if (!(a < 1 - kEdge)) return false;
        phi += (j == n - 1) ? (1 - n / k) * a : a;
      }
      return phi < 1 - kEdge;
    }
    case Kind::box:
      for (int d = 0; d < 2 * n; ++d)
        if (!(x[d] > params[d] + kEdge && x[d] < params[2 * n + d] - kEdge)) return false;
      return true;
    case Kind::product:
      return parts[0]->contains(x) && parts[1]->contains(x + 2 * parts[0]->n);
    case Kind::intersection:
      return parts[0]->contains(x) && parts[1]->contains(x);
  }
  return false;
}

void Shape::bounds(double* lo, double* hi) const {
  switch (kind) {
    case Kind::ball:
      for (int d = 0; d < 2 * n; ++d) {
        lo[d] = params[1 + d] - params[0];
        hi[d] = params[1 + d] + params[0];
      }
      return;
    case Kind::polydisc:
      for (int j = 0; j < n; ++j)
        for (int c = 0; c < 2; ++c) {
          lo[2 * j + c] = -params[j];
          hi[2 * j + c] = params[j];
        }
      return;
    case Kind::hartogs_triangle:
    case Kind::reinhardt:
      for (int d = 0; d < 2 * n; ++d) {
        lo[d] = -1;
        hi[d] = 1;
      }
      return;
    case Kind::box:
      for (int d = 0; d < 2 * n; ++d) {
        lo[d] = params[d];
        hi[d] = params[2 * n + d];
      }
      return;
    case Kind::product:
      parts[0]->bounds(lo, hi);
      parts[1]->bounds(lo + 2 * parts[0]->n, hi + 2 * parts[0]->n);
      return;
    case Kind::intersection: {
      double l2[kMaxReal], h2[kMaxReal];
      parts[0]->bounds(lo, hi);
      parts[1]->bounds(l2, h2);
      for (int d = 0; d < 2 * n; ++d) {
        lo[d] = std::max(lo[d], l2[d]);
        hi[d] = std::min(hi[d], h2[d]);
      }
      return;
    }
  }
}

std::string Shape::id() const {
  std::ostringstream os;
  os.precision(17);
  switch (kind) {
    case Kind::ball:
      os << "ball(n=" << n << ",r=" << params[0];
      for (int d = 0; d < 2 * n; ++d)
        if (params[1 + d] != 0) {
          os << ",c=";
          for (int e = 0; e < 2 * n; ++e) os << (e ? ";" : "") << params[1 + e];
          break;
        }
      os << ")";
      break;
    case Kind::polydisc:
      os << "polydisc(";
      for (int j = 0; j < n; ++j) os << (j ? "," : "") << params[j];
      os << ")";
      break;
    case Kind::hartogs_triangle:
      os << "hartogs_triangle";
      break;
    case Kind::reinhardt:
      os << "reinhardt(n=" << n << ",k=" << params[0] << ")";
      break;
    case Kind::box:
      os << "box(n=" << n << ")";
      break;
    case Kind::product:
      os << "product(" << parts[0]->id() << "," << parts[1]->id() << ")";
      break;
    case Kind::intersection:
      os << "intersection(" << parts[0]->id() << "," << parts[1]->id() << ")";
      break;
  }
  return os.str();
}

Shape ball_shape(int n, double radius, const std::vector<std::complex<double>>& center) {
  if (n < 1 || n > 4) throw std::invalid_argument("ball: n must be in 1..4");
  if (!(radius > 0)) throw std::invalid_argument("ball: radius must be positive");
  Shape s;
  s.kind = Shape::Kind::ball;
  s.n = n;
  s.params.assign(1 + 2 * n, 0.0);
  s.params[0] = radius;
  if (!center.empty()) {
    if (static_cast<int>(center.size()) != n) throw std::invalid_argument("ball: center dimension mismatch");
    for (int j = 0; j < n; ++j) {
      s.params[1 + 2 * j] = center[j].real();
      s.params[2 + 2 * j] = center[j].imag();
    }
  }
  return s;
}

Shape polydisc_shape(const std::vector<double>& radii) {
  if (radii.empty() || radii.size() > 4) throw std::invalid_argument("polydisc: n must be in 1..4");
  for (double r : radii)
    if (!(r > 0)) throw std::invalid_argument("polydisc: radii must be positive");
  Shape s;
  s.kind = Shape::Kind::polydisc;
  s.n = static_cast<int>(radii.size());
  s.params = radii;
  return s;
}

Shape hartogs_shape() {
  Shape s;
  s.kind = Shape::Kind::hartogs_triangle;
  s.n = 2;
  return s;
}

Shape reinhardt_shape(int n, int k) {
  if (n < 1 || n > 4) throw std::invalid_argument("reinhardt: n must be in 1..4");
  if (k < 1 || k > n) throw std::invalid_argument("reinhardt: k must satisfy 1 <= k <= n");
  Shape s;
  s.kind = Shape::Kind::reinhardt;
  s.n = n;
  s.params = {static_cast<double>(k)};
  return s;
}

Shape box_shape(const std::vector<double>& lo, const std::vector<double>& hi) {
  if (lo.size() != hi.size() || lo.empty() || lo.size() % 2 || lo.size() > 8)
    throw std::invalid_argument("box: need 2n lower and 2n upper bounds");
  for (size_t d = 0; d < lo.size(); ++d)
    if (!(hi[d] > lo[d])) throw std::invalid_argument("box: empty side");
  Shape s;
  s.kind = Shape::Kind::box;
  s.n = static_cast<int>(lo.size() / 2);
  s.params = lo;
  s.params.insert(s.params.end(), hi.begin(), hi.end());
  return s;
}

Shape product_shape(const Shape& a, const Shape& b) {
  if (a.n + b.n > 4) throw std::invalid_argument("product: total dimension must be <= 4");
  Shape s;
  s.kind = Shape::Kind::product;
  s.n = a.n + b.n;
  s.parts = {std::make_shared<Shape>(a), std::make_shared<Shape>(b)};
  return s;
}

Shape intersection_shape(const Shape& a, const Shape& b) {
  if (a.n != b.n) throw std::invalid_argument("intersection: dimension mismatch");
  Shape s;
  s.kind = Shape::Kind::intersection;
  s.n = a.n;
  s.parts = {std::make_shared<Shape>(a), std::make_shared<Shape>(b)};
  return s;
}

Shape parse_shape(const std::string& spec) {
  const auto colon = spec.find(':');
  const std::string name = spec.substr(0, colon);
  std::map<std::string, std::string> kv;
  if (colon != std::string::npos) {
    std::stringstream ss(spec.substr(colon + 1));
    std::string item;
    while (std::getline(ss, item, ',')) {
      const auto eq = item.find('=');
      if (eq == std::string::npos) throw std::invalid_argument("domain spec: expected key=value in '" + item + "'");
      kv[item.substr(0, eq)] = item.substr(eq + 1);
    }
  }
  auto num = [&](const std::string& key, double def) { return kv.count(key) ? std::stod(kv[key]) : def; };
  const int n = static_cast<int>(num("n", 1));
  if (name == "ball") return ball_shape(n, num("r", 1.0));
  if (name == "disc") return ball_shape(1, num("r", 1.0));
  if (name == "polydisc") return polydisc_shape(std::vector<double>(n, num("r", 1.0)));
  if (name == "hartogs" || name == "hartogs_triangle") return hartogs_shape();
  if (name == "reinhardt") return reinhardt_shape(static_cast<int>(num("n", 3)), static_cast<int>(num("k", 2)));
  if (name == "box") {
    const double a = num("a", 1.0);
    return box_shape(std::vector<double>(2 * n, -a), std::vector<double>(2 * n, a));
  }
  throw std::invalid_argument("domain spec: unknown shape '" + name + "'");
}

Domain::Domain(const Shape& shape, double h) : shape_(shape), n_(shape.n), h_(h) {
  if (!(h > 0)) throw std::invalid_argument("make_domain: spacing h must be positive");
  const int dims = 2 * n_;
  double lo[kMaxReal], hi[kMaxReal];
  shape.bounds(lo, hi);
  std::uint64_t total = 1;
  for (int d = 0; d < dims; ++d) {
    lo_[d] = static_cast<int>(std::floor(lo[d] / h)) - 1;
    const int top = static_cast<int>(std::ceil(hi[d] / h)) + 1;
    ext_[d] = top - lo_[d] + 1;
    total *= static_cast<std::uint64_t>(ext_[d]);
  }
  if (total >= std::numeric_limits<std::uint32_t>::max())
    throw std::invalid_argument("make_domain: grid too large for 32-bit node indices");
  std::int64_t s = 1;
  for (int d = dims - 1; d >= 0; --d) {
    stride_[d] = s;
    s *= ext_[d];
  }
  flags_.assign(total, 0);

  std::array<int, kMaxReal> k{};
  double x[kMaxReal];
  for (std::size_t i = 0; i < total; ++i) {
    bool edge = false;
    for (int d = 0; d < dims; ++d) {
      x[d] = (lo_[d] + k[d]) * h;
      if (k[d] == 0 || k[d] == ext_[d] - 1) edge = true;
    }
    if (!edge && shape.contains(x)) {
      flags_[i] = kInterior;
      interior_.push_back(static_cast<std::uint32_t>(i));
    }
    for (int d = dims - 1; d >= 0; --d) {
      if (++k[d] < ext_[d]) break;
      k[d] = 0;
    }
  }
  if (interior_.empty()) throw std::invalid_argument("make_domain: empty interior for " + shape.id());

  // Connectivity by flood fill along coordinate axes.
  const auto axes = axis_offsets(*this);
  std::vector<std::uint32_t> stack{interior_.front()};
  flags_[interior_.front()] |= kMarkA;
  std::size_t reached = 1;
  while (!stack.empty()) {
    const std::uint32_t p = stack.back();
    stack.pop_back();
    for (auto off : axes) {
      const std::size_t q = p + off;
      if ((flags_[q] & kInterior) && !(flags_[q] & kMarkA)) {
        flags_[q] |= kMarkA;
        stack.push_back(static_cast<std::uint32_t>(q));
        ++reached;
      }
    }
  }
  for (auto p : interior_) flags_[p] &= static_cast<std::uint8_t>(~kMarkA);
  if (reached != interior_.size()) throw std::invalid_argument("make_domain: interior is disconnected for " + shape.id());

  const auto nb = neighbourhood_offsets(*this);
  for (auto p : interior_)
    for (auto off : nb) {
      const std::size_t q = p + off;
      if (!(flags_[q] & kInterior)) flags_[q] |= kBoundary;
    }
  for (std::size_t i = 0; i < total; ++i)
    if (flags_[i] & kBoundary) boundary_.push_back(static_cast<std::uint32_t>(i));
}

void Domain::coords(std::size_t i, double* x) const {
  for (int d = dims() - 1; d >= 0; --d) {
    const auto kd = static_cast<int>(i % ext_[d]);
    i /= ext_[d];
    x[d] = (lo_[d] + kd) * h_;
  }
}

std::array<int, kMaxReal> Domain::lattice(std::size_t i) const {
  std::array<int, kMaxReal> k{};
  for (int d = dims() - 1; d >= 0; --d) {
    k[d] = lo_[d] + static_cast<int>(i % ext_[d]);
    i /= ext_[d];
  }
  return k;
}

std::size_t Domain::index_of_lattice(const std::array<int, kMaxReal>& k) const {
  std::size_t i = 0;
  for (int d = 0; d < dims(); ++d) {
    const int kd = k[d] - lo_[d];
    if (kd < 0 || kd >= ext_[d]) throw std::out_of_range("Domain: lattice point outside the grid box");
    i += static_cast<std::size_t>(kd) * stride_[d];
  }
  return i;
}

std::int64_t Domain::offset(const int* step) const {
  std::int64_t o = 0;
  for (int d = 0; d < dims(); ++d) o += step[d] * stride_[d];
  return o;
}

std::size_t Domain::nearest_node(const double* x) const {
  std::array<int, kMaxReal> k{};
  for (int d = 0; d < dims(); ++d) {
    const int kd = static_cast<int>(std::lround(x[d] / h_));
    k[d] = std::clamp(kd, lo_[d], lo_[d] + ext_[d] - 1);
  }
  return index_of_lattice(k);
}

double Domain::distance(std::size_t a, std::size_t b) const {
  const auto ka = lattice(a), kb = lattice(b);
  double s = 0;
  for (int d = 0; d < dims(); ++d) s += sq(static_cast<double>(ka[d] - kb[d]));
  return std::sqrt(s) * h_;
}

std::uint64_t Domain::mask_checksum() const {
  std::uint64_t hsh = 1469598103934665603ull;
  for (auto f : flags_) {
    hsh ^= static_cast<std::uint64_t>(f & (kInterior | kBoundary));
    hsh *= 1099511628211ull;
  }
  return hsh;
}

DomainPtr make_domain(const Shape& shape, double h) { return std::make_shared<const Domain>(shape, h); }

std::vector<std::int64_t> axis_offsets(const Domain& d) {
  std::vector<std::int64_t> out;
  for (int a = 0; a < d.dims(); ++a) {
    out.push_back(d.stride(a));
    out.push_back(-d.stride(a));
  }
  return out;
}

std::vector<std::int64_t> neighbourhood_offsets(const Domain& d) {
  std::vector<std::int64_t> out = axis_offsets(d);
  for (int a = 0; a < d.dims(); ++a)
    for (int b = a + 1; b < d.dims(); ++b)
      for (int sa : {-1, 1})
        for (int sb : {-1, 1}) out.push_back(sa * d.stride(a) + sb * d.stride(b));
  return out;
}

std::vector<float> boundary_distance(const Domain& d) {
  const std::size_t total = d.size();
  std::vector<float> best(total, 0.0f);
  std::vector<std::uint32_t> src(total, 0);
  for (auto p : d.interior_nodes()) best[p] = std::numeric_limits<float>::infinity();
  std::deque<std::uint32_t> queue;
  for (auto b : d.boundary_nodes()) {
    src[b] = b;
    queue.push_back(b);
  }
  const auto axes = axis_offsets(d);
  const int dims = d.dims();
  while (!queue.empty()) {
    const std::uint32_t p = queue.front();
    queue.pop_front();
    const auto ks = d.lattice(src[p]);
    for (auto off : axes) {
      const std::size_t q = p + off;
      if (!d.interior(q)) continue;
      const auto kq = d.lattice(q);
      double s = 0;
      for (int a = 0; a < dims; ++a) s += sq(static_cast<double>(kq[a] - ks[a]));
      const float dist = static_cast<float>(std::sqrt(s) * d.h());
      if (dist < best[q] * (1 - 1e-6f)) {
        best[q] = dist;
        src[q] = src[p];
        queue.push_back(static_cast<std::uint32_t>(q));
      }
    }
  }
  return best;
}

std::vector<std::uint8_t> half_size_region(const Domain& d) {
  std::vector<std::uint8_t> region(d.size(), 0);
  const auto& shape = d.shape();
  double x[kMaxReal], y[kMaxReal], lo[kMaxReal], hi[kMaxReal];
  d.coords(0, lo);
  d.coords(d.size() - 1, hi);
  for (auto p : d.interior_nodes()) {
    d.coords(p, x);
    for (int k = 0; k < d.dims(); ++k) {
      const double c = 0.5 * (lo[k] + hi[k]);
      y[k] = c + 2 * (x[k] - c);
    }
    region[p] = shape.contains(y);
  }
  return region;
}

std::vector<std::uint32_t> masked_nodes(const Domain& d) {
  std::vector<std::uint32_t> out = d.interior_nodes();
  out.insert(out.end(), d.boundary_nodes().begin(), d.boundary_nodes().end());
  return out;
}

}  // namespace hesslab
