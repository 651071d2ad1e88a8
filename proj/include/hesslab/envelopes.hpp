#pragma once

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "hesslab/cone_algebra.hpp"
#include "hesslab/domain.hpp"
#include "hesslab/fields.hpp"

namespace hesslab {

enum class EnvelopeMode { obstacle, boundary, extremal };

struct EnvelopeProblem {
  DomainPtr domain;
  int m = 1;
  EnvelopeMode mode = EnvelopeMode::obstacle;
  // obstacle mode: obstacle on interior and boundary nodes;
  // boundary mode: values read on boundary nodes only.
  std::optional<GridField> data;
  std::vector<std::uint8_t> target;  // extremal mode: the set E (nonzero = member)
  std::vector<HermitianForm> dual_samples;
  std::uint64_t seed = 1;

  void validate() const;
};

// Problem with the default sample set for (n, m): the identity only for
// m = 1, otherwise identity plus `count` linearized cone samples.
EnvelopeProblem make_problem(DomainPtr d, int m, EnvelopeMode mode, std::uint64_t seed = 1, int count = 64);

struct SolverConfig {
  enum class Order { lexicographic, alternating };
  double tol = 1e-9;
  int max_iters = 200000;
  Order order = Order::alternating;
  double damping = 1.0;
  // Called every `check_every` sweeps with the current iterate; returning true
  // stops the solve with `stopped_early` set.
  std::function<bool(const GridField&, int)> stop_check;
  int check_every = 25;
  bool certify = true;  // run the msh certificate on the result

  void validate() const;
};

struct BoundaryGap {
  std::uint32_t node;
  double gap;
};

struct EnvelopeResult {
  GridField u;
  int iterations = 0;
  double final_residual = 0.0;
  bool converged = false;
  bool stopped_early = false;
  std::vector<double> residual_history;  // sup change per sweep
  // Minimum over scheme operators of the discrete L_A u on non-contact
  // interior nodes; nonnegative up to rounding at a fixed point.
  double scheme_margin = 0.0;
  MshReport msh_certificate;  // FD report on non-contact interior nodes
  double certificate_tol = 0.0;
  bool certificate_pass = false;
  std::vector<BoundaryGap> boundary_report;
  std::uint64_t seed = 0;
  std::size_t operator_count = 0;
};

EnvelopeResult solve_envelope(const EnvelopeProblem& p, const SolverConfig& cfg = {});

// Linear operators used by the scheme. Each is a convex combination of
// lattice rank-one directions; the update value is sum w_d S_d / 4 where S_d
// sums u over the four points p +- h xi_d, p +- h J xi_d.
struct LatticeDirection {
  std::array<int, kMaxReal> xi{}, jxi{};
  HermitianForm form;  // v v^* / |v|^2
};
std::vector<LatticeDirection> lattice_directions(int n);
// Nonnegative weights w with sum w_d form_d = A after the least shrink of A
// toward I/n that makes such a decomposition exist. `shrink` receives t.
std::vector<double> decompose_in_directions(const HermitianForm& a, const std::vector<LatticeDirection>& dirs,
                                            double* shrink = nullptr);

struct WalshReport {
  double worst_gap = 0.0;
  std::int64_t worst_node = -1;
  std::vector<BoundaryGap> gaps;
  bool pass = false;
};
// Gap at each boundary node b: max |u(q) - f(b)| over interior neighbours q.
// With no boundary field, f is read from r.u at the boundary nodes.
WalshReport walsh_boundary_check(const EnvelopeResult& r, const GridField* f, double tol);
WalshReport walsh_boundary_check(const GridField& u, const GridField* f, double tol);

enum class Verdict { pass, fail, fail_persistent, inconclusive };
std::string to_string(Verdict v);
int exit_code(Verdict v);

struct BallSpec {
  std::vector<cplx> center;
  double radius = 0.1;
};

struct HyperconvexConfig {
  std::vector<double> ladder{0.04, 0.02};  // strictly decreasing spacings
  // Failures need a gap above max(gap_floor, 2h); on finer levels also above
  // sqrt(h / h_prev) times the gap at nearby failing points of the coarser level.
  double gap_floor = 0.1;
  std::optional<double> gap_constant;  // C; default 4 times a Lipschitz estimate
  double tol = 1e-7;
  int max_iters = 20000;
  int samples = 64;
  std::uint64_t seed = 1;
  bool early_fail = true;  // stop a level once the monotone iterate already exceeds the floor
  // Optional boundary region (real coordinates and radius) to which failure
  // detection and persistence are restricted.
  std::optional<std::pair<std::vector<double>, double>> focus;
};

struct HyperconvexLevel {
  double h = 0.0;
  double worst_gap = 0.0;
  std::int64_t worst_node = -1;
  std::vector<double> worst_point;  // coordinates of worst_node
  double lipschitz = 0.0;
  double threshold = 0.0;  // C h
  bool converged = false;
  bool fail_certified = false;  // gap above floor on an iterate that bounds the envelope from above
  bool negativity = false;
  int iterations = 0;
  double residual = 0.0;
  std::optional<ExhaustionReport> exhaustion;
  // Boundary points with gap above the floor, worst first (capped at 4096).
  std::vector<std::vector<double>> failing_points;
  std::vector<double> failing_gaps;
  // Largest recorded failing gap within `radius` of x; 0 if none.
  double gap_near(const std::vector<double>& x, double radius) const;
};

struct HyperconvexReport {
  Verdict verdict = Verdict::inconclusive;
  int m = 0;
  std::vector<HyperconvexLevel> levels;
  std::string reason;
  std::optional<GridField> extremal;  // the finest level's relative extremal function
};

HyperconvexReport hyperconvexity_test(const Shape& shape, int m, const BallSpec& ball, const HyperconvexConfig& cfg);

struct BarrierConfig {
  double h = 0.1;
  double tol = 1e-8;
  double attain_tol = -1;  // default 4 h max(1, log(1/h))
  double rho = 0.25;       // separation radius
  int max_iters = 100000;
  int samples = 64;
  std::uint64_t seed = 1;
};

struct BarrierReport {
  Verdict verdict = Verdict::inconclusive;
  std::uint32_t z0 = 0;
  double attainment_gap = 0.0;
  double far_sup = 0.0;  // sup of u over boundary-adjacent interior nodes at distance >= rho
  bool converged = false;
  int iterations = 0;
  std::string reason;
};

// z0 must be a boundary node of d.
BarrierReport bm_regularity_test(DomainPtr d, int m, std::uint32_t z0, const BarrierConfig& cfg);

enum class ExhaustionRecipe { strict_sum, bounded_mass, uniform };
std::string to_string(ExhaustionRecipe r);
ExhaustionRecipe parse_recipe(const std::string& s);

struct ExhaustionConfig {
  double tol = 1e-8;       // tail bound for the truncated series
  double mass_tol = 0.05;  // bounded_mass allowance
  int max_terms = 60;
  int max_iters = 100000;
  int samples = 64;
  std::uint64_t seed = 1;
  BallSpec seed_ball{{}, 0.25};  // ball for the relative extremal seed function
};

struct ExhaustionCertificate {
  ExhaustionRecipe recipe = ExhaustionRecipe::strict_sum;
  int terms = 0;
  std::vector<double> weights;
  double tail_bound = 0.0;
  bool negativity = false;
  ExhaustionReport exhaustion;
  MshReport msh;
  std::optional<double> strict_margin;  // strict_sum: c on the half-size shell
  std::optional<double> sup_abs;        // bounded_mass: max |psi|
  std::optional<double> total_mass;     // bounded_mass
  bool pass = false;
  std::string reason;
};

struct ExhaustionResult {
  GridField psi;
  ExhaustionCertificate certificate;
};

ExhaustionResult build_exhaustion(DomainPtr d, int m, ExhaustionRecipe recipe, const ExhaustionConfig& cfg);

// Plain-text certificate block: one "key: value" per line between braces.
struct CertificateBlock {
  std::vector<std::pair<std::string, std::string>> entries;
  CertificateBlock& add(const std::string& key, const std::string& value);
  CertificateBlock& add(const std::string& key, double value);
  CertificateBlock& add(const std::string& key, long long value);
  CertificateBlock& add(const std::string& key, bool value);
  std::string str() const;
};
CertificateBlock certificate_of(const EnvelopeResult& r, const SolverConfig& cfg);
CertificateBlock certificate_of(const HyperconvexReport& r);

}  // namespace hesslab
