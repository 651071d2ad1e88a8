#include "hesslab/fields.hpp"

#include <cctype>
#include <cmath>
#include <cstdio>
#include <istream>
#include <limits>
#include <ostream>
#include <sstream>
#include <stdexcept>

namespace hesslab {

namespace {

double coord_sq(const double* x, int j) { return x[2 * j] * x[2 * j] + x[2 * j + 1] * x[2 * j + 1]; }

double safe_log(double r) {
  if (!(r > 0)) return kSentinelValue;
  const double v = std::log(r);
  return v < kSentinel ? kSentinelValue : v;
}

}  // namespace

GridField make_field(DomainPtr d, double fill, std::string provenance) {
  GridField f;
  f.values.assign(d->size(), std::numeric_limits<double>::quiet_NaN());
  for (auto p : d->interior_nodes()) f.values[p] = fill;
  for (auto p : d->boundary_nodes()) f.values[p] = fill;
  f.domain = std::move(d);
  f.provenance = std::move(provenance);
  return f;
}

ClosedForm ClosedForm::phi(int k) {
  ClosedForm c = of(Kind::phi_k);
  c.index = k;
  return c;
}

ClosedForm ClosedForm::reinhardt_exhaustion(int k) {
  ClosedForm c = of(Kind::reinhardt_exh);
  c.index = k;
  return c;
}

ClosedForm ClosedForm::log_abs(int j) {
  ClosedForm c = of(Kind::log_abs_coord);
  c.index = j;
  return c;
}

ClosedForm ClosedForm::quadratic(const HermitianForm& a, double c0) {
  a.validate();
  ClosedForm c = of(Kind::hermitian_quadratic);
  c.form = a;
  c.c = c0;
  return c;
}

ClosedForm ClosedForm::constant_value(double v) {
  ClosedForm c = of(Kind::constant);
  c.c = v;
  return c;
}

ClosedForm ClosedForm::re_linear(int j, cplx a) {
  ClosedForm c = of(Kind::re_linear);
  c.index = j;
  c.a = a;
  return c;
}

ClosedForm ClosedForm::re_square(int j, cplx a) {
  ClosedForm c = of(Kind::re_square);
  c.index = j;
  c.a = a;
  return c;
}

ClosedForm ClosedForm::affine(double c0, std::vector<std::pair<double, ClosedForm>> terms) {
  ClosedForm c = of(Kind::affine);
  c.c = c0;
  c.terms = std::move(terms);
  return c;
}

double ClosedForm::eval(const double* x, int n) const {
  switch (kind) {
    case Kind::sq_norm: {
      double s = 0;
      for (int j = 0; j < n; ++j) s += coord_sq(x, j);
      return s;
    }
    case Kind::hartogs_exh: {
      if (n != 2) throw std::invalid_argument("hartogs_exh requires n = 2");
      const double z = coord_sq(x, 0), w = coord_sq(x, 1);
      return std::max(safe_log(std::sqrt(w)), z - w);
    }
    case Kind::phi_k: {
      double s = 0;
      for (int j = 0; j < n; ++j) s += (j == n - 1 ? 1.0 - static_cast<double>(n) / index : 1.0) * coord_sq(x, j);
      return s;
    }
    case Kind::reinhardt_exh: {
      double s = 0, big = 0;
      for (int j = 0; j < n; ++j) {
        const double a = coord_sq(x, j);
        s += (j == n - 1 ? 1.0 - static_cast<double>(n) / index : 1.0) * a;
        big = std::max(big, std::sqrt(a));
      }
      return std::max(big, s) - 1.0;
    }
    case Kind::log_abs_coord:
      return safe_log(std::sqrt(coord_sq(x, index)));
    case Kind::hermitian_quadratic: {
      // sum_{j,k} A_jk z_j conj(z_k), so that d^2/dz_j dzbar_k equals A_jk.
      cplx s = 0;
      for (int j = 0; j < n; ++j)
        for (int k = 0; k < n; ++k)
          s += cplx(x[2 * j], x[2 * j + 1]) * form(j, k) * cplx(x[2 * k], -x[2 * k + 1]);
      return s.real() + c;
    }
    case Kind::constant:
      return c;
    case Kind::re_linear:
      return (a * cplx(x[2 * index], x[2 * index + 1])).real();
    case Kind::re_square: {
      const cplx z(x[2 * index], x[2 * index + 1]);
      return (a * z * z).real();
    }
    case Kind::affine: {
      double s = c;
      for (const auto& [coef, t] : terms) s += coef * t.eval(x, n);
      return s;
    }
  }
  return 0.0;
}

std::string ClosedForm::id() const {
  std::ostringstream os;
  os.precision(17);
  switch (kind) {
    case Kind::sq_norm:
      return "sq_norm";
    case Kind::hartogs_exh:
      return "hartogs_exh";
    case Kind::phi_k:
      os << "phi_k(" << index << ")";
      break;
    case Kind::reinhardt_exh:
      os << "reinhardt_exh(" << index << ")";
      break;
    case Kind::log_abs_coord:
      os << "log_abs_coord(" << index << ")";
      break;
    case Kind::hermitian_quadratic:
      os << "hermitian_quadratic(c=" << c << ")";
      break;
    case Kind::constant:
      os << "constant(" << c << ")";
      break;
    case Kind::re_linear:
      os << "re_linear(" << index << "," << a.real() << "," << a.imag() << ")";
      break;
    case Kind::re_square:
      os << "re_square(" << index << "," << a.real() << "," << a.imag() << ")";
      break;
    case Kind::affine:
      os << "affine(" << c;
      for (const auto& [coef, t] : terms) os << "," << coef << "*" << t.id();
      os << ")";
      break;
  }
  return os.str();
}

namespace {

// Splits "a,b(c,d),e" at top-level commas.
std::vector<std::string> split_args(const std::string& s) {
  std::vector<std::string> out;
  int depth = 0;
  std::string cur;
  for (char ch : s) {
    if (ch == '(') ++depth;
    if (ch == ')') --depth;
    if (ch == ',' && depth == 0) {
      out.push_back(cur);
      cur.clear();
    } else {
      cur += ch;
    }
  }
  if (!cur.empty() || !out.empty()) out.push_back(cur);
  return out;
}

double to_num(const std::string& s, const std::string& ctx) {
  try {
    std::size_t used = 0;
    const double v = std::stod(s, &used);
    if (used != s.size()) throw std::invalid_argument(s);
    return v;
  } catch (const std::exception&) {
    throw std::invalid_argument("closed form '" + ctx + "': bad number '" + s + "'");
  }
}

}  // namespace

ClosedForm parse_closed_form(const std::string& text) {
  std::string t;
  for (char ch : text)
    if (!std::isspace(static_cast<unsigned char>(ch))) t += ch;
  const auto open = t.find('(');
  const std::string name = t.substr(0, open);
  std::vector<std::string> args;
  if (open != std::string::npos) {
    if (t.back() != ')') throw std::invalid_argument("closed form '" + text + "': missing ')'");
    args = split_args(t.substr(open + 1, t.size() - open - 2));
  }
  auto need = [&](std::size_t k) {
    if (args.size() != k)
      throw std::invalid_argument("closed form '" + text + "': expected " + std::to_string(k) + " arguments");
  };
  auto idx = [&](std::size_t i) { return static_cast<int>(to_num(args[i], text)); };
  if (name == "sq_norm") return need(0), ClosedForm::sq_norm();
  if (name == "hartogs_exh") return need(0), ClosedForm::hartogs_exh();
  if (name == "phi_k" || name == "phi") return need(1), ClosedForm::phi(idx(0));
  if (name == "reinhardt_exh") return need(1), ClosedForm::reinhardt_exhaustion(idx(0));
  if (name == "log_abs_coord") return need(1), ClosedForm::log_abs(idx(0));
  if (name == "constant") return need(1), ClosedForm::constant_value(to_num(args[0], text));
  if (name == "re_linear" || name == "re_square") {
    need(3);
    const cplx a(to_num(args[1], text), to_num(args[2], text));
    return name == "re_linear" ? ClosedForm::re_linear(idx(0), a) : ClosedForm::re_square(idx(0), a);
  }
  if (name == "affine") {
    if (args.empty()) throw std::invalid_argument("closed form '" + text + "': affine needs a constant");
    std::vector<std::pair<double, ClosedForm>> terms;
    for (std::size_t i = 1; i < args.size(); ++i) {
      const auto star = args[i].find('*');
      if (star == std::string::npos) throw std::invalid_argument("closed form '" + text + "': term needs coef*form");
      terms.emplace_back(to_num(args[i].substr(0, star), text), parse_closed_form(args[i].substr(star + 1)));
    }
    return ClosedForm::affine(to_num(args[0], text), std::move(terms));
  }
  throw std::invalid_argument("unknown closed form '" + text + "'");
}

GridField eval_closed_form(const ClosedForm& cf, DomainPtr d) {
  GridField f = make_field(d, 0.0, cf.id());
  double x[kMaxReal];
  auto fill = [&](const std::vector<std::uint32_t>& nodes) {
    for (auto p : nodes) {
      d->coords(p, x);
      f.values[p] = cf.eval(x, d->n());
    }
  };
  fill(d->interior_nodes());
  fill(d->boundary_nodes());
  return f;
}

void write_field_dump(std::ostream& os, const GridField& f) {
  const Domain& d = *f.domain;
  char buf[64];
  os << "hesslab-field 1\n";
  os << "shape " << d.shape().id() << "\n";
  os << "n " << d.n() << "\n";
  std::snprintf(buf, sizeof buf, "%.17g", d.h());
  os << "h " << buf << "\n";
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(d.mask_checksum()));
  os << "checksum " << buf << "\n";
  os << "provenance " << f.provenance << "\n";
  std::size_t count = 0;
  for (std::size_t i = 0; i < d.size(); ++i) count += d.masked(i);
  os << "nodes " << count << "\n";
  for (std::size_t i = 0; i < d.size(); ++i) {
    if (!d.masked(i)) continue;
    std::snprintf(buf, sizeof buf, "%.17g", f.values[i]);
    os << i << " " << buf << "\n";
  }
}

GridField read_field_dump(std::istream& is, DomainPtr d) {
  std::string key, line;
  std::getline(is, line);
  if (line.rfind("hesslab-field", 0) != 0) throw std::invalid_argument("field dump: bad magic line");
  std::string checksum, provenance;
  std::size_t count = 0;
  while (std::getline(is, line)) {
    std::istringstream ls(line);
    ls >> key;
    if (key == "checksum") ls >> checksum;
    if (key == "provenance") std::getline(ls >> std::ws, provenance);
    if (key == "nodes") {
      ls >> count;
      break;
    }
  }
  char buf[32];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(d->mask_checksum()));
  if (checksum != buf) throw std::invalid_argument("field dump: mask checksum does not match the domain");
  GridField f = make_field(d, 0.0, provenance);
  for (std::size_t c = 0; c < count; ++c) {
    std::size_t i;
    std::string v;
    if (!(is >> i >> v)) throw std::invalid_argument("field dump: truncated body");
    if (i >= d->size() || !d->masked(i)) throw std::invalid_argument("field dump: node outside the masks");
    f.values[i] = std::stod(v);
  }
  return f;
}

void write_msh_csv(std::ostream& os, const MshReport& r) {
  os << "point,margin";
  for (int k = 1; k <= r.m; ++k) os << ",sigma_" << k;
  os << "\n";
  char buf[64];
  for (const auto& p : r.points) {
    os << p.node;
    std::snprintf(buf, sizeof buf, ",%.17g", p.margin);
    os << buf;
    for (double s : p.sigma) {
      std::snprintf(buf, sizeof buf, ",%.17g", s);
      os << buf;
    }
    os << "\n";
  }
}

}  // namespace hesslab
