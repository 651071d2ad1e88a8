#pragma once

#include <array>
#include <complex>
#include <cstdint>
#include <random>
#include <string>
#include <vector>

namespace hesslab {

using cplx = std::complex<double>;

constexpr int kMaxDim = 4;

// Constant-coefficient (1,1)-form, stored as an n x n Hermitian matrix.
class HermitianForm {
 public:
  HermitianForm() = default;
  explicit HermitianForm(int n);  // zero form

  static HermitianForm identity(int n);
  static HermitianForm diagonal(const std::vector<double>& d);
  // Row-major entries; throws if not Hermitian within tolerance.
  static HermitianForm from_rows(const std::vector<std::vector<cplx>>& rows);

  int n() const { return n_; }
  cplx& operator()(int j, int k) { return a_[j * kMaxDim + k]; }
  const cplx& operator()(int j, int k) const { return a_[j * kMaxDim + k]; }

  double trace() const;
  double frobenius_norm() const;
  bool is_hermitian(double tol = 1e-12) const;
  void validate() const;  // throws std::invalid_argument

  HermitianForm operator+(const HermitianForm& o) const;
  HermitianForm operator-(const HermitianForm& o) const;
  HermitianForm operator*(double s) const;

 private:
  int n_ = 0;
  std::array<cplx, kMaxDim * kMaxDim> a_{};
};

struct Spectrum {
  std::vector<double> eigenvalues;  // ascending
};

struct EigenDecomposition {
  Spectrum spectrum;
  // Columns are eigenvectors: H = U diag(lambda) U^*.
  std::array<cplx, kMaxDim * kMaxDim> vectors{};
  int sweeps = 0;
};

struct ConeReport {
  int m = 0;
  std::vector<double> sigma_values;  // sigma_1 .. sigma_m
  bool member = false;
  bool closure = false;  // member only because margin lies in [-tol, 0)
  double margin = 0.0;
};

EigenDecomposition jacobi_eigen(const HermitianForm& h);
Spectrum eigenvalues_hermitian(const HermitianForm& h);

double elementary_symmetric(int k, const Spectrum& lambda);
// sigma_0..sigma_n of a list of reals.
std::vector<double> elementary_symmetric_all(const std::vector<double>& lambda);
// sigma_1..sigma_n computed as sums of principal minors (no eigensolve).
std::vector<double> sigma_from_minors(const HermitianForm& h);

ConeReport gamma_membership(const HermitianForm& h, int m, double tol = 1e-9);
ConeReport cone_report_from_sigmas(const std::vector<double>& sigma_1_to_n, int m, double tol);

cplx determinant(const std::array<cplx, kMaxDim * kMaxDim>& a, int n);
double determinant(const HermitianForm& h);

// Mixed discriminant of n forms, normalized so that D(I, ..., I) = 1.
double mixed_form_coefficient(const std::vector<HermitianForm>& forms);

// D(hu, alphas..., I, ..., I) with n - m identity slots; alphas must lie in Gamma_m.
double definition_positivity_test(const HermitianForm& hu, const std::vector<HermitianForm>& alphas, int m,
                                  double tol = 1e-9);

// Matrix A with tr(A H) = D(H, alphas..., I, ..., I) for every Hermitian H.
HermitianForm linearize_mixed(int n, const std::vector<HermitianForm>& alphas);

// Deterministic uniform draws in [0, 1) from a seeded 64-bit Mersenne twister.
class Rng {
 public:
  explicit Rng(std::uint64_t seed);
  double uniform();
  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }
  std::uint64_t next() { return eng_(); }

 private:
  std::mt19937_64 eng_;
};

HermitianForm random_hermitian(int n, Rng& rng);
// Rejection sampling: uniform entries in [-1, 1] until the form lies in Gamma_m.
HermitianForm random_gamma_member(int n, int m, Rng& rng, double tol = 1e-9);

// PSD unit-trace linearizations; the first entry is always I/n.
std::vector<HermitianForm> dual_cone_sample(int n, int m, int count, std::uint64_t seed);

std::string serialize_form(const HermitianForm& h);
HermitianForm parse_form(const std::string& text);

int binomial(int n, int k);

}  // namespace hesslab
