#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "hesslab/cone_algebra.hpp"
#include "hesslab/domain.hpp"

namespace hesslab {

// Values at or below this level are treated as -infinity.
constexpr double kSentinel = -1e6;
constexpr double kSentinelValue = -1e9;

struct GridField {
  DomainPtr domain;
  std::vector<double> values;  // one entry per box node; NaN off the masks
  std::string provenance = "computed";

  double operator[](std::size_t i) const { return values[i]; }
  double& operator[](std::size_t i) { return values[i]; }
};

GridField make_field(DomainPtr d, double fill = 0.0, std::string provenance = "computed");

struct ClosedForm {
  enum class Kind {
    sq_norm,              // |z|^2
    hartogs_exh,          // max(log|w|, |z|^2 - |w|^2)
    phi_k,                // |z_1|^2 + ... + |z_{n-1}|^2 + (1 - n/k)|z_n|^2
    reinhardt_exh,        // max(|z_1|, ..., |z_n|, phi_k) - 1
    log_abs_coord,        // log|z_j|
    hermitian_quadratic,  // z^* A z + c
    constant,             // c
    re_linear,            // Re(a z_j), a complex
    re_square,            // Re(a z_j^2), a complex
    affine                // c + sum of coef * term
  };
  Kind kind = Kind::constant;
  int index = 0;  // k for phi_k / reinhardt_exh, j for coordinate forms
  double c = 0.0;
  cplx a{1.0, 0.0};
  HermitianForm form;
  std::vector<std::pair<double, ClosedForm>> terms;

  double eval(const double* x, int n) const;
  std::string id() const;

  static ClosedForm of(Kind k) {
    ClosedForm c;
    c.kind = k;
    return c;
  }
  static ClosedForm sq_norm() { return of(Kind::sq_norm); }
  static ClosedForm hartogs_exh() { return of(Kind::hartogs_exh); }
  static ClosedForm phi(int k);
  static ClosedForm reinhardt_exhaustion(int k);
  static ClosedForm log_abs(int j);
  static ClosedForm quadratic(const HermitianForm& a, double c = 0.0);
  static ClosedForm constant_value(double c);
  static ClosedForm re_linear(int j, cplx a);
  static ClosedForm re_square(int j, cplx a = 1.0);
  static ClosedForm affine(double c, std::vector<std::pair<double, ClosedForm>> terms);
};

GridField eval_closed_form(const ClosedForm& cf, DomainPtr d);
// Inverse of ClosedForm::id() for every kind except hermitian_quadratic,
// e.g. "phi_k(2)", "re_linear(0,1,0)", "affine(-1,1*sq_norm)".
ClosedForm parse_closed_form(const std::string& text);

// Complex Hessian d^2 u / dz_j dzbar_k from second differences.
// Diagonal entries use the compact nine-point Laplacian in the (x_j, y_j)
// plane; off-diagonal entries use four-point mixed differences.
// Returns nullopt when the stencil touches a sentinel or unmasked node.
std::optional<HermitianForm> complex_hessian_fd(const GridField& f, std::size_t p);

// Max-type crease at p: along some neighbourhood direction the second
// difference at p and at the next node flips sign or jumps.
bool crease_at(const GridField& f, std::size_t p, double tol = 1e-9);

struct MshOptions {
  std::optional<double> strict_c;
  int random_alpha_count = 0;
  std::uint64_t seed = 1;
  double tol = 1e-9;
  bool keep_points = false;  // store per-point reports for CSV output
  const std::vector<std::uint8_t>* region = nullptr;  // optional restriction (nonzero = include)
};

struct MshPoint {
  std::uint32_t node;
  double margin;
  std::vector<double> sigma;
  bool crease;
};

struct MshReport {
  int m = 0;
  std::size_t evaluated = 0, passed = 0, skipped = 0, crease_points = 0;
  double pass_fraction = 0.0;
  double worst_margin = 0.0;
  std::int64_t worst_node = -1;
  std::optional<double> worst_positivity;  // min over sampled alpha tuples of the mixed positivity test
  bool pass = false;
  std::vector<MshPoint> points;
};

MshReport msh_report(const GridField& f, int m, const MshOptions& opts = {});

enum class CombineOp { max, affine, glue };
struct CombineSpec {
  CombineOp op = CombineOp::max;
  double s = 1.0, t = 1.0;                         // affine weights
  const std::vector<std::uint8_t>* omega = nullptr;  // glue region mask
  double tol = 1e-9;
};
GridField combine(const CombineSpec& spec, const GridField& u, const GridField& v);

GridField regularized_max(const GridField& u, const GridField& v, double eta);
double regularized_max(double u, double v, double eta);

struct MollifierSpec {
  double epsilon = 0.0;
  int n = 1;
  double normalization() const;  // C_n with  int rho(|z|^2) dV = 1 over the unit ball of C^n
};
// Kernel profile on [0, 1): C / (1 - t)^2 * exp(1 / (t - 1)).
double mollifier_profile(double t);
double mollifier_constant(int n);

struct MollifyResult {
  GridField field;                    // NaN outside the shrunken interior
  std::vector<std::uint8_t> shrunken;  // nonzero on nodes with distance > epsilon
  double kernel_sum = 0.0;            // discrete kernel mass before normalization
  double quadrature_mass = 0.0;       // discretized integral of the normalized kernel
};
MollifyResult mollify(const GridField& f, const MollifierSpec& spec);

struct ExhaustionReport {
  double band_sup = 0.0, band_inf = 0.0;
  std::size_t band_points = 0;
  double max_value = 0.0;
  std::size_t positive_points = 0;
  struct Level {
    double c;
    double distance;  // min distance from {f < c} to the boundary
    std::size_t count;
  };
  std::vector<Level> levels;
  bool levels_ok = false;
  bool negativity_ok = false;
  bool boundary_ok = false;
  bool pass = false;
};
ExhaustionReport exhaustion_report(const GridField& f, double band_factor = 2.0, double boundary_tol_factor = 4.0);

// Field dump: header (shape id, n, h, checksum) then masked node values.
void write_field_dump(std::ostream& os, const GridField& f);
GridField read_field_dump(std::istream& is, DomainPtr d);
void write_msh_csv(std::ostream& os, const MshReport& r);

}  // namespace hesslab
