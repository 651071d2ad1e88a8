#pragma once

#include <string>
#include <vector>

#include "hesslab/fields.hpp"

namespace hesslab {

// Discrete m-Hessian measure. Units are fixed by H_m(|z|^2) = 1 per unit of
// Lebesgue volume, so the mass element of a node is h^{2n}.
struct MeasureDensity {
  DomainPtr domain;
  int m = 1;
  std::vector<double> density;  // per box node; NaN where undefined
  std::size_t defined = 0, excluded = 0, crease_points = 0;
  double total_mass = 0.0;
  // Mass carried by interior nodes next to the boundary, a proxy for the
  // O(h) quadrature error of the Riemann sum.
  double quadrature_error = 0.0;
};

// density(p) = sigma_m(Hu(p)) / C(n, m). Crease points take the minimum over
// Hessians centred at interior neighbours off the crease; the centred value
// is kept when no such neighbour exists.
MeasureDensity hessian_density(const GridField& field, int m, double crease_tol = 1e-9);

// Riemann sum over the defined nodes, optionally restricted to a mask.
double total_mass(const MeasureDensity& d, const std::vector<std::uint8_t>* region = nullptr);

struct MembershipItem {
  std::string name;
  bool pass = false;
  double value = 0.0;
};
struct MembershipReport {
  std::vector<MembershipItem> items;
  bool pass = false;
};

// Checks phi <= tol, boundary-band sup >= -C h, boundedness, msh_report(m)
// at tolerance tol, and a finite total mass.
MembershipReport e0_membership(const GridField& field, int m, double tol, double boundary_constant = 4.0);

}  // namespace hesslab
