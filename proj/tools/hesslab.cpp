#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "hesslab/checks.hpp"
#include "hesslab/envelopes.hpp"
#include "hesslab/hessian_measure.hpp"
#include "hesslab/jensen.hpp"
#include "hesslab/parallel.hpp"

#ifndef HESSLAB_VERSION
#define HESSLAB_VERSION "dev"
#endif

namespace fs = std::filesystem;
using namespace hesslab;

namespace {

const char* kSchemas = R"(Output files (all under --out):
  manifest.json                config echo, seed, wall time, version, exit code
  msh-check    msh_<h>.csv       point,margin,sigma_1..sigma_m
               msh_summary.csv   h,evaluated,passed,skipped,crease_points,worst_margin,pass
  envelope     envelope.csv      h,iterations,converged,final_residual,scheme_margin,certificate_pass
               residual_<h>.dat  iteration residual
  exhaust      exhaust.csv       h,recipe,terms,tail_bound,sup_abs,total_mass,strict_margin,pass
  hyperconvex  hyperconvex.csv   h,worst_gap,worst_boundary_node,verdict
               gap_vs_h.dat      h worst_gap
  bm-regular   bm_regular.csv    h,node,attainment_gap,far_sup,verdict
  hessian-mass hessian_mass.csv  h,total_mass,quadrature_error,defined,excluded,crease_points
               density_<h>.csv   node,density
  jensen       jensen.csv        h,node,value,g_at_node,support,iterations
               measure_<h>.csv   node,weight
               scan_<h>.csv      node,slack,trivial
  edwards      edwards.csv       h,pair,node,inf_side,sup_side,gap,within_tol
  paper-examples examples.csv    check,pass,seconds,detail
Field dumps (*.field) and certificate blocks (*.cert) accompany each level.
Exit codes: 0 pass or as expected, 1 a verdict failed, 2 inconclusive or error.)";

struct Options {
  std::string command;
  std::string domain;
  int m = 1;
  std::string h = "0.1";
  int grid = 0;
  std::uint64_t seed = 1;
  double tol = 1e-8;
  int samples = 64;
  std::string out = "hesslab_out";
  std::string field;
  std::string mode = "obstacle";
  std::string recipe = "strict_sum";
  std::string ball;
  std::string focus;
  std::string point;
  double gap_floor = 0.1;
  double gap_constant = -1;
  double strict_c = -1;
  int pairs = 10;
  int quadratics = 10;
  int max_iters = 200000;
};

std::string num(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::string tag(double h) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "h%g", h);
  return buf;
}

std::vector<double> parse_list(const std::string& s, const std::string& what) {
  std::vector<double> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, ',')) {
    try {
      std::size_t used = 0;
      out.push_back(std::stod(item, &used));
      if (used != item.size()) throw std::invalid_argument(item);
    } catch (const std::exception&) {
      throw std::invalid_argument(what + ": bad number '" + item + "'");
    }
  }
  return out;
}

// Files are written to a temporary name and renamed into place.
class Output {
 public:
  explicit Output(fs::path dir) : dir_(std::move(dir)) {
    std::error_code ec;
    fs::create_directories(dir_, ec);
    if (ec || !fs::is_directory(dir_)) throw std::runtime_error("cannot create output directory " + dir_.string());
  }
  void write(const std::string& name, const std::string& text) const {
    const fs::path final = dir_ / name, tmp = dir_ / (name + ".tmp");
    {
      std::ofstream os(tmp, std::ios::binary);
      os << text;
      if (!os) throw std::runtime_error("cannot write " + tmp.string());
    }
    fs::rename(tmp, final);
  }
  void dump(const std::string& name, const GridField& f) const {
    std::ostringstream os;
    write_field_dump(os, f);
    write(name, os.str());
  }

 private:
  fs::path dir_;
};

class Runner {
 public:
  Runner(const Options& o, const Output& out) : o_(o), out_(out) {}

  int run() {
    const std::string& c = o_.command;
    if (c == "paper-examples") return examples();
    shape_ = parse_shape(o_.domain);
    if (o_.m < 1 || o_.m > shape_.n) throw std::invalid_argument("--m must lie in 1..n");
    ladder_ = ladder();
    if (c == "msh-check") return msh_check();
    if (c == "envelope") return envelope();
    if (c == "exhaust") return exhaust();
    if (c == "hyperconvex") return hyperconvex();
    if (c == "bm-regular") return bm_regular();
    if (c == "hessian-mass") return hessian_mass();
    if (c == "jensen") return jensen();
    if (c == "edwards") return edwards();
    throw std::invalid_argument("unknown command " + c);
  }

 private:
  std::vector<double> ladder() const {
    std::vector<double> l;
    if (o_.grid > 0) {
      double lo[kMaxReal], hi[kMaxReal], span = 0;
      shape_.bounds(lo, hi);
      for (int a = 0; a < 2 * shape_.n; ++a) span = std::max(span, hi[a] - lo[a]);
      l.push_back(span / o_.grid);
    } else {
      l = parse_list(o_.h, "--h");
    }
    if (l.empty()) throw std::invalid_argument("--h: empty ladder");
    for (std::size_t i = 0; i < l.size(); ++i) {
      if (!(l[i] > 0)) throw std::invalid_argument("--h: spacings must be positive");
      if (i && !(l[i] < l[i - 1])) throw std::invalid_argument("--h: ladder must be strictly decreasing");
    }
    return l;
  }

  ClosedForm field_or(const std::string& fallback) const {
    return parse_closed_form(o_.field.empty() ? fallback : o_.field);
  }

  std::vector<double> point_or_empty(const std::string& s, const std::string& what) const {
    if (s.empty()) return {};
    auto p = parse_list(s, what);
    if (static_cast<int>(p.size()) != 2 * shape_.n) throw std::invalid_argument(what + ": expected 2n coordinates");
    return p;
  }

  // "x1,y1,...,xn,yn:r"; default is the deepest interior node with radius
  // min(0.25, half its boundary distance).
  BallSpec ball_for(const Domain& d) const {
    BallSpec b;
    if (!o_.ball.empty()) {
      const auto colon = o_.ball.find(':');
      if (colon == std::string::npos) throw std::invalid_argument("--ball: expected coords:radius");
      auto c = point_or_empty(o_.ball.substr(0, colon), "--ball");
      for (int j = 0; j < shape_.n; ++j) b.center.emplace_back(c[2 * j], c[2 * j + 1]);
      b.radius = parse_list(o_.ball.substr(colon + 1), "--ball radius").at(0);
      return b;
    }
    const auto dist = boundary_distance(d);
    std::uint32_t best = d.interior_nodes().front();
    for (auto p : d.interior_nodes())
      if (dist[p] > dist[best]) best = p;
    double x[kMaxReal];
    d.coords(best, x);
    for (int j = 0; j < shape_.n; ++j) b.center.emplace_back(x[2 * j], x[2 * j + 1]);
    b.radius = std::min(0.25, 0.5 * dist[best]);
    return b;
  }

  std::vector<std::uint8_t> ball_mask(const Domain& d, const BallSpec& b) const {
    std::vector<std::uint8_t> t(d.size(), 0);
    double x[kMaxReal];
    for (auto p : d.interior_nodes()) {
      d.coords(p, x);
      double s = 0;
      for (int j = 0; j < d.n(); ++j) s += std::norm(cplx(x[2 * j], x[2 * j + 1]) - b.center[j]);
      t[p] = s < b.radius * b.radius;
    }
    return t;
  }

  int msh_check() {
    const auto cf = field_or("sq_norm");
    std::string summary = "h,evaluated,passed,skipped,crease_points,worst_margin,pass\n";
    bool all = true;
    for (double h : ladder_) {
      auto d = make_domain(shape_, h);
      auto f = eval_closed_form(cf, d);
      MshOptions opts;
      opts.tol = o_.tol;
      opts.seed = o_.seed;
      opts.keep_points = true;
      if (o_.strict_c >= 0) opts.strict_c = o_.strict_c;
      auto r = msh_report(f, o_.m, opts);
      std::ostringstream csv;
      write_msh_csv(csv, r);
      out_.write("msh_" + tag(h) + ".csv", csv.str());
      out_.dump("field_" + tag(h) + ".field", f);
      summary += num(h) + "," + std::to_string(r.evaluated) + "," + std::to_string(r.passed) + "," +
                 std::to_string(r.skipped) + "," + std::to_string(r.crease_points) + "," + num(r.worst_margin) + "," +
                 (r.pass ? "1" : "0") + "\n";
      all = all && r.pass;
      std::cout << "h=" << h << " worst margin " << r.worst_margin << (r.pass ? " PASS" : " FAIL") << "\n";
    }
    out_.write("msh_summary.csv", summary);
    return all ? 0 : 1;
  }

  int envelope() {
    EnvelopeMode mode;
    if (o_.mode == "obstacle")
      mode = EnvelopeMode::obstacle;
    else if (o_.mode == "boundary")
      mode = EnvelopeMode::boundary;
    else if (o_.mode == "extremal")
      mode = EnvelopeMode::extremal;
    else
      throw std::invalid_argument("--mode must be obstacle, boundary or extremal");
    std::string summary = "h,iterations,converged,final_residual,scheme_margin,certificate_pass\n";
    int code = 0;
    for (double h : ladder_) {
      auto d = make_domain(shape_, h);
      auto p = make_problem(d, o_.m, mode, o_.seed, o_.samples);
      if (mode == EnvelopeMode::extremal)
        p.target = ball_mask(*d, ball_for(*d));
      else
        p.data = eval_closed_form(field_or("sq_norm"), d);
      SolverConfig cfg;
      cfg.tol = o_.tol;
      cfg.max_iters = o_.max_iters;
      auto r = solve_envelope(p, cfg);
      out_.dump("envelope_" + tag(h) + ".field", r.u);
      out_.write("envelope_" + tag(h) + ".cert", certificate_of(r, cfg).str());
      std::string series;
      for (std::size_t i = 0; i < r.residual_history.size(); ++i)
        series += std::to_string(i + 1) + " " + num(r.residual_history[i]) + "\n";
      out_.write("residual_" + tag(h) + ".dat", series);
      summary += num(h) + "," + std::to_string(r.iterations) + "," + (r.converged ? "1" : "0") + "," +
                 num(r.final_residual) + "," + num(r.scheme_margin) + "," + (r.certificate_pass ? "1" : "0") + "\n";
      std::cout << "h=" << h << " iterations " << r.iterations << " residual " << r.final_residual
                << (r.certificate_pass ? " certificate PASS" : " certificate FAIL") << "\n";
      if (!r.converged)
        code = std::max(code, 2);
      else if (!r.certificate_pass)
        code = std::max(code, 1);
    }
    out_.write("envelope.csv", summary);
    return code;
  }

  int exhaust() {
    const auto recipe = parse_recipe(o_.recipe);
    std::string summary = "h,recipe,terms,tail_bound,sup_abs,total_mass,strict_margin,pass\n";
    bool all = true;
    auto opt = [](const std::optional<double>& v) { return v ? num(*v) : std::string(); };
    for (double h : ladder_) {
      auto d = make_domain(shape_, h);
      ExhaustionConfig cfg;
      cfg.tol = o_.tol;
      cfg.samples = o_.samples;
      cfg.seed = o_.seed;
      auto r = build_exhaustion(d, o_.m, recipe, cfg);
      const auto& c = r.certificate;
      CertificateBlock cert;
      cert.add("recipe", to_string(c.recipe))
          .add("terms", static_cast<long long>(c.terms))
          .add("tail_bound", c.tail_bound)
          .add("negativity", c.negativity)
          .add("exhaustion_pass", c.exhaustion.pass)
          .add("msh_worst_margin", c.msh.worst_margin)
          .add("msh_pass", c.msh.pass);
      if (c.strict_margin) cert.add("strict_margin", *c.strict_margin);
      if (c.sup_abs) cert.add("sup_abs", *c.sup_abs);
      if (c.total_mass) cert.add("total_mass", *c.total_mass);
      cert.add("pass", c.pass).add("reason", c.reason);
      out_.write("exhaust_" + tag(h) + ".cert", cert.str());
      out_.dump("psi_" + tag(h) + ".field", r.psi);
      summary += num(h) + "," + to_string(c.recipe) + "," + std::to_string(c.terms) + "," + num(c.tail_bound) + "," +
                 opt(c.sup_abs) + "," + opt(c.total_mass) + "," + opt(c.strict_margin) + "," + (c.pass ? "1" : "0") +
                 "\n";
      std::cout << "h=" << h << " " << to_string(c.recipe) << (c.pass ? " PASS" : " FAIL") << ": " << c.reason << "\n";
      all = all && c.pass;
    }
    out_.write("exhaust.csv", summary);
    return all ? 0 : 1;
  }

  int hyperconvex() {
    HyperconvexConfig cfg;
    cfg.ladder = ladder_;
    cfg.tol = std::max(o_.tol, 1e-7);
    cfg.samples = o_.samples;
    cfg.seed = o_.seed;
    cfg.gap_floor = o_.gap_floor;
    if (o_.gap_constant > 0) cfg.gap_constant = o_.gap_constant;
    if (!o_.focus.empty()) {
      const auto colon = o_.focus.find(':');
      if (colon == std::string::npos) throw std::invalid_argument("--focus: expected coords:radius");
      cfg.focus = std::make_pair(point_or_empty(o_.focus.substr(0, colon), "--focus"),
                                 parse_list(o_.focus.substr(colon + 1), "--focus radius").at(0));
    }
    auto coarse = make_domain(shape_, ladder_.front());
    auto r = hyperconvexity_test(shape_, o_.m, ball_for(*coarse), cfg);
    std::string csv = "h,worst_gap,worst_boundary_node,verdict\n", series;
    for (const auto& lv : r.levels) {
      csv += num(lv.h) + "," + num(lv.worst_gap) + "," + std::to_string(lv.worst_node) + "," + to_string(r.verdict) + "\n";
      series += num(lv.h) + " " + num(lv.worst_gap) + "\n";
      std::string pts = "x,gap\n";
      for (std::size_t i = 0; i < lv.failing_points.size(); ++i) {
        std::string x;
        for (double v : lv.failing_points[i]) x += (x.empty() ? "" : " ") + num(v);
        pts += x + "," + num(lv.failing_gaps[i]) + "\n";
      }
      out_.write("failing_" + tag(lv.h) + ".csv", pts);
    }
    out_.write("hyperconvex.csv", csv);
    out_.write("gap_vs_h.dat", series);
    out_.write("hyperconvex.cert", certificate_of(r).str());
    if (r.extremal) out_.dump("extremal.field", *r.extremal);
    std::cout << to_string(r.verdict) << ": " << r.reason << "\n";
    return exit_code(r.verdict);
  }

  int bm_regular() {
    const auto pt = point_or_empty(o_.point, "--point");
    if (pt.empty()) throw std::invalid_argument("bm-regular needs --point");
    std::string csv = "h,node,attainment_gap,far_sup,verdict\n";
    int code = 0;
    for (double h : ladder_) {
      auto d = make_domain(shape_, h);
      std::uint32_t z0 = d->boundary_nodes().front();
      double best = INFINITY, x[kMaxReal];
      for (auto b : d->boundary_nodes()) {
        d->coords(b, x);
        double s = 0;
        for (int a = 0; a < d->dims(); ++a) s += (x[a] - pt[a]) * (x[a] - pt[a]);
        if (s < best) best = s, z0 = b;
      }
      BarrierConfig cfg;
      cfg.h = h;
      cfg.tol = o_.tol;
      cfg.samples = o_.samples;
      cfg.seed = o_.seed;
      cfg.max_iters = o_.max_iters;
      auto r = bm_regularity_test(d, o_.m, z0, cfg);
      csv += num(h) + "," + std::to_string(z0) + "," + num(r.attainment_gap) + "," + num(r.far_sup) + "," +
             to_string(r.verdict) + "\n";
      std::cout << "h=" << h << " " << to_string(r.verdict) << ": " << r.reason << "\n";
      code = std::max(code, exit_code(r.verdict));
    }
    out_.write("bm_regular.csv", csv);
    return code;
  }

  int hessian_mass() {
    const auto cf = field_or("sq_norm");
    std::string csv = "h,total_mass,quadrature_error,defined,excluded,crease_points\n";
    for (double h : ladder_) {
      auto d = make_domain(shape_, h);
      auto f = eval_closed_form(cf, d);
      auto md = hessian_density(f, o_.m);
      std::string dens = "node,density\n";
      for (std::size_t i = 0; i < md.density.size(); ++i)
        if (std::isfinite(md.density[i])) dens += std::to_string(i) + "," + num(md.density[i]) + "\n";
      out_.write("density_" + tag(h) + ".csv", dens);
      csv += num(h) + "," + num(md.total_mass) + "," + num(md.quadrature_error) + "," + std::to_string(md.defined) +
             "," + std::to_string(md.excluded) + "," + std::to_string(md.crease_points) + "\n";
      std::cout << "h=" << h << " total mass " << md.total_mass << " (boundary-adjacent " << md.quadrature_error
                << ")\n";
    }
    out_.write("hessian_mass.csv", csv);
    return 0;
  }

  std::uint32_t node_near(const Domain& d, const std::vector<double>& pt) const {
    const auto nodes = masked_nodes(d);
    if (pt.empty()) return d.interior_nodes()[d.interior_nodes().size() / 2];
    std::uint32_t best = nodes.front();
    double bd = INFINITY, x[kMaxReal];
    for (auto p : nodes) {
      d.coords(p, x);
      double s = 0;
      for (int a = 0; a < d.dims(); ++a) s += (x[a] - pt[a]) * (x[a] - pt[a]);
      if (s < bd) bd = s, best = p;
    }
    return best;
  }

  TestFamily family(DomainPtr d) const {
    FamilySpec fs;
    fs.quadratic_count = o_.quadratics;
    fs.seed = o_.seed;
    return build_test_family(d, o_.m, fs);
  }

  int jensen() {
    const auto cf = field_or("affine(0,-1*sq_norm)");
    const auto pt = point_or_empty(o_.point, "--point");
    std::string csv = "h,node,value,g_at_node,support,iterations\n";
    for (double h : ladder_) {
      auto d = make_domain(shape_, h);
      auto fam = family(d);
      auto g = eval_closed_form(cf, d);
      const auto z = node_near(*d, pt);
      auto r = jensen_lp_min(z, g, fam);
      std::ostringstream ms, sc;
      write_measure_csv(ms, r.measure);
      out_.write("measure_" + tag(h) + ".csv", ms.str());
      write_scan_csv(sc, jensen_boundary_scan(fam));
      out_.write("scan_" + tag(h) + ".csv", sc.str());
      csv += num(h) + "," + std::to_string(z) + "," + num(r.value) + "," + num(g.values[z]) + "," +
             std::to_string(r.measure.support.size()) + "," + std::to_string(r.iterations) + "\n";
      std::cout << "h=" << h << " node " << z << " value " << r.value << " g " << g.values[z] << "\n";
    }
    out_.write("jensen.csv", csv);
    return 0;
  }

  int edwards() {
    std::string csv = "h,pair,node,inf_side,sup_side,gap,within_tol\n";
    bool all = true;
    EdwardsConfig ec;
    ec.duality_tol = o_.tol;
    for (double h : ladder_) {
      auto d = make_domain(shape_, h);
      auto fam = family(d);
      const auto nodes = masked_nodes(*d);
      Rng rng(o_.seed);
      double worst = 0;
      for (int t = 0; t < o_.pairs; ++t) {
        const auto z = nodes[rng.next() % nodes.size()];
        GridField g = make_field(d, 0.0);
        for (auto p : nodes) g.values[p] = rng.uniform(-1, 1);
        auto r = edwards_gap(z, g, fam, ec);
        csv += num(h) + "," + std::to_string(t) + "," + std::to_string(z) + "," + num(r.inf_side) + "," +
               num(r.sup_side) + "," + num(r.gap) + "," + (r.within_tol ? "1" : "0") + "\n";
        std::ostringstream ms;
        write_measure_csv(ms, r.measure);
        out_.write("measure_" + tag(h) + "_pair" + std::to_string(t) + ".csv", ms.str());
        all = all && r.within_tol;
        worst = std::max(worst, std::abs(r.gap));
      }
      std::cout << "h=" << h << " members " << fam.members.size() << " worst gap " << worst << "\n";
    }
    out_.write("edwards.csv", csv);
    return all ? 0 : 1;
  }

  int examples() {
    std::vector<CheckResult> rs;
    auto run = [&](CheckResult r) {
      std::cout << format_check(r) << std::endl;
      rs.push_back(std::move(r));
    };
    run(check_quadratic_dichotomy());
    run(check_hartogs_exhaustion());
    run(check_hartogs_hyperconvexity());
    run(check_bounded_mass());
    std::string csv = "check,pass,seconds,detail\n";
    bool all = true;
    for (const auto& r : rs) {
      std::string detail = r.detail;
      std::replace(detail.begin(), detail.end(), ',', ';');
      char sec[32];
      std::snprintf(sec, sizeof sec, "%.1f", r.seconds);
      csv += r.name + "," + (r.pass ? "1" : "0") + "," + sec + "," + detail + "\n";
      all = all && r.pass;
    }
    out_.write("examples.csv", csv);
    return all ? 0 : 1;
  }

  const Options& o_;
  const Output& out_;
  Shape shape_;
  std::vector<double> ladder_;
};

std::string default_domain(const std::string& command) {
  if (command == "hyperconvex") return "hartogs";
  if (command == "edwards" || command == "jensen") return "disc";
  return "ball:n=2,r=1";
}

}  // namespace

int main(int argc, char** argv) {
  Options o;
  CLI::App app{"Discrete m-subharmonic toolkit"};
  app.footer(kSchemas);
  app.set_help_flag("--help", "print this help and the output schemas");
  app.set_config("--config", "", "flat key=value file; command-line flags override it");
  app.add_option("command", o.command, "subcommand")
      ->required()
      ->check(CLI::IsMember({"msh-check", "envelope", "exhaust", "hyperconvex", "bm-regular", "hessian-mass", "jensen",
                             "edwards", "paper-examples"}));
  app.add_option("--domain", o.domain, "shape id, e.g. ball:n=2,r=1, hartogs, disc, polydisc:n=2,r=1");
  app.add_option("--m", o.m, "cone index m");
  app.add_option("--h", o.h, "comma-separated, strictly decreasing lattice spacings");
  app.add_option("--grid", o.grid, "nodes across the widest box side; overrides --h");
  app.add_option("--seed", o.seed, "random seed");
  app.add_option("--tol", o.tol, "solver / certificate tolerance");
  app.add_option("--samples", o.samples, "dual cone samples for the envelope scheme");
  app.add_option("--out", o.out, "output directory");
  app.add_option("--field", o.field, "closed form, e.g. sq_norm, phi_k(2), affine(-1,1*sq_norm)");
  app.add_option("--mode", o.mode, "envelope mode: obstacle, boundary, extremal");
  app.add_option("--recipe", o.recipe, "exhaustion recipe: strict_sum, bounded_mass, uniform");
  app.add_option("--ball", o.ball, "ball as x1,y1,...:radius (extremal target / seed ball)");
  app.add_option("--focus", o.focus, "boundary focus region as x1,y1,...:radius");
  app.add_option("--point", o.point, "point as x1,y1,... (bm-regular, jensen)");
  app.add_option("--gap-floor", o.gap_floor, "hyperconvexity failure floor");
  app.add_option("--gap-constant", o.gap_constant, "hyperconvexity pass constant C (threshold C h)");
  app.add_option("--strict-c", o.strict_c, "strict margin c for msh-check");
  app.add_option("--pairs", o.pairs, "random (z, g) pairs for edwards");
  app.add_option("--quadratics", o.quadratics, "centred quadratics in the test family");
  app.add_option("--max-iters", o.max_iters, "sweep cap for envelope solves");
  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 2;
  }
  if (o.domain.empty()) o.domain = default_domain(o.command);

  const auto t0 = std::chrono::steady_clock::now();
  int code = 2;
  std::string error;
  std::unique_ptr<Output> out;
  try {
    out = std::make_unique<Output>(o.out);
    Runner runner(o, *out);
    code = runner.run();
  } catch (const std::exception& e) {
    error = e.what();
    std::cerr << "error: " << error << "\n";
    code = 2;
  }
  if (!out) return 2;

  nlohmann::ordered_json m;
  m["command"] = o.command;
  m["domain"] = o.domain;
  m["m"] = o.m;
  m["h"] = o.h;
  m["grid"] = o.grid;
  m["seed"] = o.seed;
  m["tol"] = o.tol;
  m["samples"] = o.samples;
  m["field"] = o.field;
  m["mode"] = o.mode;
  m["recipe"] = o.recipe;
  m["ball"] = o.ball;
  m["focus"] = o.focus;
  m["point"] = o.point;
  m["gap_floor"] = o.gap_floor;
  m["gap_constant"] = o.gap_constant;
  m["strict_c"] = o.strict_c;
  m["pairs"] = o.pairs;
  m["quadratics"] = o.quadratics;
  m["max_iters"] = o.max_iters;
  m["threads"] = thread_budget();
  m["version"] = HESSLAB_VERSION;
  m["wall_time_s"] = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  m["exit_code"] = code;
  if (!error.empty()) m["error"] = error;
  try {
    out->write("manifest.json", m.dump(2) + "\n");
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
  return code;
}
