#pragma once

#include <array>
#include <complex>
#include <cstdint>
#include <memory>
#include <string>
#include <vector>

namespace hesslab {

constexpr int kMaxReal = 8;  // 2n real coordinates, n <= 4

// Analytic description of a bounded domain. Points are real 2n-vectors
// ordered (x_1, y_1, x_2, y_2, ...) with z_j = x_j + i y_j.
struct Shape {
  enum class Kind { ball, polydisc, hartogs_triangle, reinhardt, box, product, intersection };
  Kind kind = Kind::ball;
  int n = 1;
  // ball: radius, then 2n center coordinates; polydisc: n radii; reinhardt: k;
  // box: 2n lower bounds then 2n upper bounds.
  std::vector<double> params;
  std::vector<std::shared_ptr<const Shape>> parts;

  // Strict containment with a tiny relative margin so lattice points on the
  // analytic boundary are classified as exterior.
  bool contains(const double* x) const;
  void bounds(double* lo, double* hi) const;
  std::string id() const;
};

Shape ball_shape(int n, double radius, const std::vector<std::complex<double>>& center = {});
Shape polydisc_shape(const std::vector<double>& radii);
Shape hartogs_shape();
Shape reinhardt_shape(int n, int k);
Shape box_shape(const std::vector<double>& lo, const std::vector<double>& hi);
Shape product_shape(const Shape& a, const Shape& b);
Shape intersection_shape(const Shape& a, const Shape& b);

// Parses ids like "ball:n=2,r=1", "hartogs", "reinhardt:n=3,k=2", "disc", "polydisc:n=2,r=1".
Shape parse_shape(const std::string& spec);

enum NodeFlag : std::uint8_t { kInterior = 1, kBoundary = 2, kMarkA = 4, kMarkB = 8 };

// Uniform lattice h * Z^{2n} restricted to a padded bounding box of the shape.
// Boundary nodes are exterior nodes reachable from an interior node by a step
// with at most two nonzero entries in {-1, 0, 1}; every stencil used by the
// library stays within that neighbourhood.
class Domain {
 public:
  Domain(const Shape& shape, double h);

  int n() const { return n_; }
  int dims() const { return 2 * n_; }
  double h() const { return h_; }
  const Shape& shape() const { return shape_; }

  std::size_t size() const { return flags_.size(); }
  int extent(int d) const { return ext_[d]; }
  std::int64_t stride(int d) const { return stride_[d]; }
  int lattice_origin(int d) const { return lo_[d]; }

  bool interior(std::size_t i) const { return flags_[i] & kInterior; }
  bool boundary(std::size_t i) const { return flags_[i] & kBoundary; }
  bool masked(std::size_t i) const { return flags_[i] & (kInterior | kBoundary); }
  std::uint8_t flags(std::size_t i) const { return flags_[i]; }

  const std::vector<std::uint32_t>& interior_nodes() const { return interior_; }
  const std::vector<std::uint32_t>& boundary_nodes() const { return boundary_; }

  void coords(std::size_t i, double* x) const;
  std::array<int, kMaxReal> lattice(std::size_t i) const;
  std::size_t index_of_lattice(const std::array<int, kMaxReal>& k) const;
  std::int64_t offset(const int* step) const;
  // Nearest lattice node to x (clamped to the box).
  std::size_t nearest_node(const double* x) const;
  double distance(std::size_t a, std::size_t b) const;

  std::uint64_t mask_checksum() const;

 private:
  Shape shape_;
  int n_;
  double h_;
  std::array<int, kMaxReal> lo_{}, ext_{};
  std::array<std::int64_t, kMaxReal> stride_{};
  std::vector<std::uint8_t> flags_;
  std::vector<std::uint32_t> interior_, boundary_;
};

using DomainPtr = std::shared_ptr<const Domain>;

// Throws std::invalid_argument on empty or disconnected interior.
DomainPtr make_domain(const Shape& shape, double h);

// Steps with at most two nonzero entries in {-1, 0, 1}, as linear offsets.
std::vector<std::int64_t> neighbourhood_offsets(const Domain& d);
std::vector<std::int64_t> axis_offsets(const Domain& d);

// Approximate Euclidean distance from every node to the nearest boundary node,
// by breadth-first propagation of nearest sources. Exterior nodes get 0.
std::vector<float> boundary_distance(const Domain& d);

// Interior nodes x whose image c + 2(x - c) under doubling about the box
// centre c is still in the shape; the half-radius ball for a centred ball.
std::vector<std::uint8_t> half_size_region(const Domain& d);

// Interior nodes followed by boundary nodes.
std::vector<std::uint32_t> masked_nodes(const Domain& d);

}  // namespace hesslab
