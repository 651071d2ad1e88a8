#include "hesslab/cone_algebra.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <sstream>
#include <stdexcept>

namespace hesslab {

HermitianForm::HermitianForm(int n) : n_(n) {
  if (n < 1 || n > kMaxDim) throw std::invalid_argument("HermitianForm: dimension must be in 1..4");
}

HermitianForm HermitianForm::identity(int n) {
  HermitianForm h(n);
  for (int j = 0; j < n; ++j) h(j, j) = 1.0;
  return h;
}

HermitianForm HermitianForm::diagonal(const std::vector<double>& d) {
  HermitianForm h(static_cast<int>(d.size()));
  for (int j = 0; j < h.n(); ++j) h(j, j) = d[j];
  return h;
}

HermitianForm HermitianForm::from_rows(const std::vector<std::vector<cplx>>& rows) {
  HermitianForm h(static_cast<int>(rows.size()));
  for (int j = 0; j < h.n(); ++j) {
    if (static_cast<int>(rows[j].size()) != h.n()) throw std::invalid_argument("HermitianForm: ragged rows");
    for (int k = 0; k < h.n(); ++k) h(j, k) = rows[j][k];
  }
  h.validate();
  return h;
}

double HermitianForm::trace() const {
  double t = 0;
  for (int j = 0; j < n_; ++j) t += a_[j * kMaxDim + j].real();
  return t;
}

double HermitianForm::frobenius_norm() const {
  double s = 0;
  for (int j = 0; j < n_; ++j)
    for (int k = 0; k < n_; ++k) s += std::norm((*this)(j, k));
  return std::sqrt(s);
}

bool HermitianForm::is_hermitian(double tol) const {
  const double scale = std::max(1.0, frobenius_norm());
  for (int j = 0; j < n_; ++j)
    for (int k = j; k < n_; ++k) {
      const cplx a = (*this)(j, k), b = (*this)(k, j);
      if (!std::isfinite(a.real()) || !std::isfinite(a.imag())) return false;
      if (std::abs(a - std::conj(b)) > tol * scale) return false;
    }
  return true;
}

void HermitianForm::validate() const {
  if (n_ < 1 || n_ > kMaxDim) throw std::invalid_argument("HermitianForm: dimension must be in 1..4");
  if (!is_hermitian()) throw std::invalid_argument("HermitianForm: entries are not Hermitian or not finite");
}

HermitianForm HermitianForm::operator+(const HermitianForm& o) const {
  if (o.n_ != n_) throw std::invalid_argument("HermitianForm: dimension mismatch");
  HermitianForm r = *this;
  for (size_t i = 0; i < a_.size(); ++i) r.a_[i] += o.a_[i];
  return r;
}

HermitianForm HermitianForm::operator-(const HermitianForm& o) const { return *this + o * -1.0; }

HermitianForm HermitianForm::operator*(double s) const {
  HermitianForm r = *this;
  for (auto& x : r.a_) x *= s;
  return r;
}

EigenDecomposition jacobi_eigen(const HermitianForm& h) {
  h.validate();
  const int n = h.n();
  std::array<cplx, kMaxDim * kMaxDim> a{}, v{};
  for (int j = 0; j < n; ++j) {
    for (int k = 0; k < n; ++k) a[j * kMaxDim + k] = h(j, k);
    a[j * kMaxDim + j] = a[j * kMaxDim + j].real();
    v[j * kMaxDim + j] = 1.0;
  }
  auto A = [&](int j, int k) -> cplx& { return a[j * kMaxDim + k]; };
  auto V = [&](int j, int k) -> cplx& { return v[j * kMaxDim + k]; };
  const double scale = std::max(h.frobenius_norm(), 1e-300);

  EigenDecomposition out;
  for (int sweep = 0; sweep < 64; ++sweep) {
    double off = 0;
    for (int p = 0; p < n; ++p)
      for (int q = p + 1; q < n; ++q) off += 2 * std::norm(A(p, q));
    if (std::sqrt(off) <= 1e-13 * scale) break;
    out.sweeps = sweep + 1;
    for (int p = 0; p < n; ++p) {
      for (int q = p + 1; q < n; ++q) {
        const double b = std::abs(A(p, q));
        if (b == 0.0) continue;
        const cplx e = A(p, q) / b;
        const double app = A(p, p).real(), aqq = A(q, q).real();
        const double tau = (aqq - app) / (2 * b);
        const double t = (tau >= 0 ? 1.0 : -1.0) / (std::abs(tau) + std::sqrt(1 + tau * tau));
        const double c = 1 / std::sqrt(1 + t * t), s = t * c;
        // G = diag(1, conj(e)) * [[c, s], [-s, c]] acting on coordinates (p, q).
        const cplx gpp = c, gpq = s, gqp = -s * std::conj(e), gqq = c * std::conj(e);
        for (int r = 0; r < n; ++r) {
          const cplx x = A(r, p), y = A(r, q);
          A(r, p) = x * gpp + y * gqp;
          A(r, q) = x * gpq + y * gqq;
          const cplx vx = V(r, p), vy = V(r, q);
          V(r, p) = vx * gpp + vy * gqp;
          V(r, q) = vx * gpq + vy * gqq;
        }
        for (int col = 0; col < n; ++col) {
          const cplx x = A(p, col), y = A(q, col);
          A(p, col) = std::conj(gpp) * x + std::conj(gqp) * y;
          A(q, col) = std::conj(gpq) * x + std::conj(gqq) * y;
        }
        A(p, q) = A(q, p) = 0.0;
        A(p, p) = A(p, p).real();
        A(q, q) = A(q, q).real();
      }
    }
  }

  std::vector<int> order(n);
  for (int j = 0; j < n; ++j) order[j] = j;
  std::sort(order.begin(), order.end(), [&](int x, int y) { return A(x, x).real() < A(y, y).real(); });
  out.spectrum.eigenvalues.resize(n);
  for (int j = 0; j < n; ++j) {
    out.spectrum.eigenvalues[j] = A(order[j], order[j]).real();
    for (int r = 0; r < n; ++r) out.vectors[r * kMaxDim + j] = V(r, order[j]);
  }
  return out;
}

Spectrum eigenvalues_hermitian(const HermitianForm& h) { return jacobi_eigen(h).spectrum; }

std::vector<double> elementary_symmetric_all(const std::vector<double>& lambda) {
  std::vector<double> e(lambda.size() + 1, 0.0);
  e[0] = 1.0;
  for (size_t i = 0; i < lambda.size(); ++i)
    for (size_t k = i + 1; k >= 1; --k) e[k] += lambda[i] * e[k - 1];
  return e;
}

double elementary_symmetric(int k, const Spectrum& lambda) {
  const int n = static_cast<int>(lambda.eigenvalues.size());
  if (k < 1 || k > n) throw std::invalid_argument("elementary_symmetric: k out of range 1..n");
  return elementary_symmetric_all(lambda.eigenvalues)[k];
}

cplx determinant(const std::array<cplx, kMaxDim * kMaxDim>& in, int n) {
  auto a = in;
  cplx det = 1.0;
  for (int c = 0; c < n; ++c) {
    int piv = c;
    for (int r = c + 1; r < n; ++r)
      if (std::abs(a[r * kMaxDim + c]) > std::abs(a[piv * kMaxDim + c])) piv = r;
    if (a[piv * kMaxDim + c] == 0.0) return 0.0;
    if (piv != c) {
      for (int k = 0; k < n; ++k) std::swap(a[piv * kMaxDim + k], a[c * kMaxDim + k]);
      det = -det;
    }
    const cplx d = a[c * kMaxDim + c];
    det *= d;
    for (int r = c + 1; r < n; ++r) {
      const cplx f = a[r * kMaxDim + c] / d;
      for (int k = c; k < n; ++k) a[r * kMaxDim + k] -= f * a[c * kMaxDim + k];
    }
  }
  return det;
}

double determinant(const HermitianForm& h) {
  std::array<cplx, kMaxDim * kMaxDim> a{};
  for (int j = 0; j < h.n(); ++j)
    for (int k = 0; k < h.n(); ++k) a[j * kMaxDim + k] = h(j, k);
  return determinant(a, h.n()).real();
}

std::vector<double> sigma_from_minors(const HermitianForm& h) {
  const int n = h.n();
  std::vector<double> sigma(n + 1, 0.0);
  sigma[0] = 1.0;
  std::array<cplx, kMaxDim * kMaxDim> sub{};
  for (unsigned mask = 1; mask < (1u << n); ++mask) {
    int idx[kMaxDim], k = 0;
    for (int j = 0; j < n; ++j)
      if (mask & (1u << j)) idx[k++] = j;
    for (int r = 0; r < k; ++r)
      for (int c = 0; c < k; ++c) sub[r * kMaxDim + c] = h(idx[r], idx[c]);
    sigma[k] += determinant(sub, k).real();
  }
  return {sigma.begin() + 1, sigma.end()};
}

ConeReport cone_report_from_sigmas(const std::vector<double>& sig, int m, double tol) {
  ConeReport rep;
  rep.m = m;
  rep.sigma_values.assign(sig.begin(), sig.begin() + m);
  rep.margin = *std::min_element(rep.sigma_values.begin(), rep.sigma_values.end());
  rep.member = rep.margin >= -tol;
  rep.closure = rep.member && rep.margin < 0;
  return rep;
}

ConeReport gamma_membership(const HermitianForm& h, int m, double tol) {
  if (m < 1 || m > h.n()) throw std::invalid_argument("gamma_membership: m out of range 1..n");
  const auto e = elementary_symmetric_all(eigenvalues_hermitian(h).eigenvalues);
  return cone_report_from_sigmas({e.begin() + 1, e.end()}, m, tol);
}

double mixed_form_coefficient(const std::vector<HermitianForm>& forms) {
  if (forms.empty()) throw std::invalid_argument("mixed_form_coefficient: no forms");
  const int n = forms[0].n();
  if (static_cast<int>(forms.size()) != n)
    throw std::invalid_argument("mixed_form_coefficient: need exactly n forms");
  for (const auto& f : forms)
    if (f.n() != n) throw std::invalid_argument("mixed_form_coefficient: dimension mismatch");

  // Polarization: n! D = sum over subsets S of (-1)^(n-|S|) det(sum_{i in S} A_i).
  double total = 0;
  for (unsigned mask = 1; mask < (1u << n); ++mask) {
    std::array<cplx, kMaxDim * kMaxDim> s{};
    int size = 0;
    for (int i = 0; i < n; ++i) {
      if (!(mask & (1u << i))) continue;
      ++size;
      for (int j = 0; j < n; ++j)
        for (int k = 0; k < n; ++k) s[j * kMaxDim + k] += forms[i](j, k);
    }
    const double d = determinant(s, n).real();
    total += ((n - size) % 2 == 0) ? d : -d;
  }
  double fact = 1;
  for (int i = 2; i <= n; ++i) fact *= i;
  return total / fact;
}

namespace {

void check_alphas(int n, const std::vector<HermitianForm>& alphas, int m, double tol) {
  if (m < 1 || m > n) throw std::invalid_argument("positivity test: m out of range 1..n");
  if (static_cast<int>(alphas.size()) != m - 1)
    throw std::invalid_argument("positivity test: expected m-1 alpha forms");
  for (const auto& a : alphas) {
    if (a.n() != n) throw std::invalid_argument("positivity test: dimension mismatch");
    if (!gamma_membership(a, m, tol).member)
      throw std::invalid_argument("positivity test: alpha form outside Gamma_m");
  }
}

}  // namespace

double definition_positivity_test(const HermitianForm& hu, const std::vector<HermitianForm>& alphas, int m,
                                  double tol) {
  const int n = hu.n();
  check_alphas(n, alphas, m, tol);
  std::vector<HermitianForm> slots{hu};
  slots.insert(slots.end(), alphas.begin(), alphas.end());
  while (static_cast<int>(slots.size()) < n) slots.push_back(HermitianForm::identity(n));
  return mixed_form_coefficient(slots);
}

HermitianForm linearize_mixed(int n, const std::vector<HermitianForm>& alphas) {
  // The polarization formula is complex-multilinear, so evaluate on matrix units:
  // A(k, j) = D(E_jk, alphas, I, ...).
  const int fill = n - 1 - static_cast<int>(alphas.size());
  if (fill < 0) throw std::invalid_argument("linearize_mixed: too many alpha forms");
  HermitianForm out(n);
  for (int j = 0; j < n; ++j) {
    for (int k = 0; k < n; ++k) {
      double total_re = 0, total_im = 0;
      // D is not symmetric-Hermitian on E_jk; use (E_jk + E_kj) and i(E_jk - E_kj), both Hermitian.
      HermitianForm sym(n), anti(n);
      sym(j, k) += 1.0;
      sym(k, j) += 1.0;
      if (j != k) {
        anti(j, k) += cplx(0, 1);
        anti(k, j) += cplx(0, -1);
      }
      std::vector<HermitianForm> slots{sym};
      slots.insert(slots.end(), alphas.begin(), alphas.end());
      for (int i = 0; i < fill; ++i) slots.push_back(HermitianForm::identity(n));
      total_re = mixed_form_coefficient(slots);
      if (j != k) {
        slots[0] = anti;
        total_im = mixed_form_coefficient(slots);
      }
      // tr(A sym) = 2 Re A(k, j); tr(A anti) = i A(k,j) - i A(j,k) = -2 Im A(k, j).
      if (j == k)
        out(k, j) = total_re / 2;
      else
        out(k, j) = cplx(total_re / 2, -total_im / 2);
    }
  }
  return out;
}

Rng::Rng(std::uint64_t seed) : eng_(seed) {}

double Rng::uniform() { return static_cast<double>(eng_() >> 11) * 0x1.0p-53; }

HermitianForm random_hermitian(int n, Rng& rng) {
  HermitianForm h(n);
  for (int j = 0; j < n; ++j) {
    h(j, j) = rng.uniform(-1, 1);
    for (int k = j + 1; k < n; ++k) {
      const double re = rng.uniform(-1, 1), im = rng.uniform(-1, 1);
      h(j, k) = cplx(re, im);
      h(k, j) = cplx(re, -im);
    }
  }
  return h;
}

HermitianForm random_gamma_member(int n, int m, Rng& rng, double tol) {
  constexpr int kAttempts = 2000;
  for (int attempt = 0; attempt < kAttempts; ++attempt) {
    HermitianForm h = random_hermitian(n, rng);
    if (gamma_membership(h, m, tol).margin > 0) return h;
  }
  // Acceptance is tiny for m close to n at n >= 3: shift the last draw along the
  // identity just past the cone boundary, plus a random interior offset.
  HermitianForm h = random_hermitian(n, rng);
  const auto lam = eigenvalues_hermitian(h).eigenvalues;
  auto inside = [&](double s) {
    std::vector<double> shifted(lam);
    for (double& x : shifted) x += s;
    const auto e = elementary_symmetric_all(shifted);
    for (int k = 1; k <= m; ++k)
      if (e[k] <= 0) return false;
    return true;
  };
  double lo = -lam.back(), hi = std::max(0.0, -lam.front()) + 1e-12;
  while (!inside(hi)) hi *= 2;
  for (int it = 0; it < 200 && hi - lo > 1e-15; ++it) {
    const double mid = 0.5 * (lo + hi);
    (inside(mid) ? hi : lo) = mid;
  }
  const double s = hi + rng.uniform(0.0, 1.0);
  for (int j = 0; j < n; ++j) h(j, j) += s;
  return h;
}

std::vector<HermitianForm> dual_cone_sample(int n, int m, int count, std::uint64_t seed) {
  if (m < 1 || m > n) throw std::invalid_argument("dual_cone_sample: m out of range 1..n");
  if (count < 1) throw std::invalid_argument("dual_cone_sample: count must be >= 1");
  std::vector<HermitianForm> out{HermitianForm::identity(n) * (1.0 / n)};
  if (m == 1) return out;
  Rng rng(seed);
  while (static_cast<int>(out.size()) < count + 1) {
    std::vector<HermitianForm> alphas;
    for (int i = 0; i < m - 1; ++i) alphas.push_back(random_gamma_member(n, m, rng));
    HermitianForm a = linearize_mixed(n, alphas);
    const double tr = a.trace();
    if (!(tr > 1e-12)) continue;
    a = a * (1.0 / tr);
    for (int j = 0; j < n; ++j) a(j, j) = a(j, j).real();
    const double lo = eigenvalues_hermitian(a).eigenvalues.front();
    if (lo < -1e-10) throw std::runtime_error("dual_cone_sample: linearization is not positive semidefinite");
    out.push_back(a);
  }
  return out;
}

std::string serialize_form(const HermitianForm& h) {
  std::ostringstream os;
  os << "hermitian " << h.n() << "\n";
  char buf[64];
  for (int j = 0; j < h.n(); ++j) {
    for (int k = 0; k < h.n(); ++k) {
      std::snprintf(buf, sizeof buf, "%.17g,%.17g", h(j, k).real(), h(j, k).imag());
      os << (k ? " " : "") << buf;
    }
    os << "\n";
  }
  return os.str();
}

HermitianForm parse_form(const std::string& text) {
  std::istringstream is(text);
  std::string tag;
  int n = 0;
  if (!(is >> tag >> n) || tag != "hermitian") throw std::invalid_argument("parse_form: missing header");
  std::vector<std::vector<cplx>> rows(n, std::vector<cplx>(n));
  for (int j = 0; j < n; ++j)
    for (int k = 0; k < n; ++k) {
      std::string tok;
      if (!(is >> tok)) throw std::invalid_argument("parse_form: truncated matrix");
      const auto comma = tok.find(',');
      if (comma == std::string::npos) throw std::invalid_argument("parse_form: entry is not a re,im pair");
      rows[j][k] = cplx(std::stod(tok.substr(0, comma)), std::stod(tok.substr(comma + 1)));
    }
  return HermitianForm::from_rows(rows);
}

int binomial(int n, int k) {
  if (k < 0 || k > n) return 0;
  int r = 1;
  for (int i = 1; i <= k; ++i) r = r * (n - k + i) / i;
  return r;
}

}  // namespace hesslab
