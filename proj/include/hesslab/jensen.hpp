#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "hesslab/envelopes.hpp"
#include "hesslab/fields.hpp"

namespace hesslab {

struct FamilyMember {
  std::string name;
  GridField field;
  double certified_margin = 0.0;  // msh_report worst margin at inclusion
  bool exhaustion = false;        // negative exhaustion usable for mass bounds
};

struct TestFamily {
  DomainPtr domain;
  int m = 1;
  std::vector<FamilyMember> members;
};

struct FamilyExtra {
  std::string name;
  GridField field;
  bool exhaustion = false;
};

struct FamilySpec {
  int quadratic_count = 8;
  std::uint64_t seed = 1;
  bool pluriharmonic_quadratics = true;  // +-Re, +-Im of z_j z_k
  std::vector<FamilyExtra> extra;
  double certify_tol = 1e-8;
};

// Members in order: constants +1 and -1, +-Re z_j and +-Im z_j, optional
// pluriharmonic quadratics, centred quadratics (z-c)^* A (z-c) with A in
// Gamma_m, then extras. Every member must pass msh_report(m).
TestFamily build_test_family(DomainPtr d, int m, const FamilySpec& spec);

struct DiscreteMeasure {
  std::vector<std::uint32_t> support;
  std::vector<double> weights;
};
void write_measure_csv(std::ostream& os, const DiscreteMeasure& mu);

struct JensenResult {
  double value = 0.0;
  DiscreteMeasure measure;
  int iterations = 0;
};

// min sum mu g over probability measures on the masked nodes with
// sum mu u >= u(z) for every member u.
JensenResult jensen_lp_min(std::uint32_t z, const GridField& g, const TestFamily& fam);

struct EdwardsReport {
  double inf_side = 0.0;  // Jensen LP value
  double sup_side = 0.0;  // max v(z) over nonnegative member combinations v <= g
  double gap = 0.0;
  bool within_tol = false;  // gap <= duality_tol
  std::vector<double> coefficients;  // one per member
  DiscreteMeasure measure;
};
struct EdwardsConfig {
  double duality_tol = 1e-8;
};
EdwardsReport edwards_gap(std::uint32_t z, const GridField& g, const TestFamily& fam, const EdwardsConfig& cfg = {});

struct MassProfileConfig {
  std::vector<std::uint8_t> region;  // compact set K; default: half-size region
  std::vector<std::uint32_t> nodes;  // nodes to profile; default: all boundary nodes
};
struct MassProfileEntry {
  std::uint32_t node = 0;
  double interior_mass = 0.0;
  std::optional<double> bound;  // from an exhaustion member, when present
};
struct MassProfileReport {
  std::vector<MassProfileEntry> entries;
  double max_mass = 0.0;
  bool bound_ok = true;
};
MassProfileReport boundary_mass_profile(const TestFamily& fam, const MassProfileConfig& cfg = {});

struct ScanConfig {
  std::vector<GridField> probes;  // default: -|z|^2
  std::vector<std::uint32_t> nodes;  // default: every masked node
  double tol = 1e-9;
};
struct ScanEntry {
  std::uint32_t node = 0;
  double slack = 0.0;  // min over probes of value - g(z); <= 0
  bool trivial = false;
};
struct ScanReport {
  std::vector<ScanEntry> entries;
  std::vector<std::uint32_t> trivial_nodes;
};
ScanReport jensen_boundary_scan(const TestFamily& fam, const ScanConfig& cfg = {});
void write_scan_csv(std::ostream& os, const ScanReport& r);

struct ExtensionConfig {
  double tol = 1e-8;         // criterion tolerance and envelope tolerance
  double attain_tol = -1.0;  // default 4 h max(1, boundary Lipschitz estimate)
  int max_iters = 200000;
  int samples = 64;
  std::uint64_t seed = 1;
};
struct ExtensionReport {
  Verdict verdict = Verdict::inconclusive;
  GridField extension;  // S^c_f on PASS
  std::int64_t witness = -1;
  DiscreteMeasure witness_measure;
  double worst_criterion = 0.0;  // max over boundary nodes of f(z) - LP value
  double walsh_gap = 0.0;
  std::string reason;
};
// f supplies values on boundary nodes.
ExtensionReport boundary_extension_check(const GridField& f, const TestFamily& fam, const ExtensionConfig& cfg = {});

}  // namespace hesslab
