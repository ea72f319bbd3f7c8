// Acceptance run: one [PASS]/[FAIL] line per criterion AC1..AC10.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <functional>
#include <map>
#include <random>
#include <string>
#include <vector>

#include "ngt/analysis.hpp"
#include "ngt/io.hpp"
#include "ngt/linalg.hpp"
#include "ngt/operators.hpp"
#include "ngt/solver.hpp"
#include "ngt/transform.hpp"
#include "ngt/verify.hpp"

using namespace ngt;
namespace fs = std::filesystem;

namespace {

constexpr const char* kExampleG = "2*t/(1+t^2)";
constexpr const char* kExampleF = "exp(t + t^3/3)/(1 + t^2)^3";

int failures = 0;

void report(int id, bool pass, const std::string& what) {
  std::printf("[%s] AC%d %s\n", pass ? "PASS" : "FAIL", id, what.c_str());
  std::fflush(stdout);
  if (!pass) ++failures;
}

std::string fmt(const char* f, double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, f, v);
  return buf;
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

std::vector<OperatorSpec> catalog(int n) {
  return {OperatorSpec::laplace(n), OperatorSpec::m_laplace(n, 3.0), OperatorSpec::k_hessian(n, 2),
          OperatorSpec::infinity_laplace(n), OperatorSpec::normalized_infinity_laplace(n)};
}

std::vector<Vec> random_points(int count, double lo, double hi, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(lo, hi);
  std::vector<Vec> pts;
  for (int i = 0; i < count; ++i) pts.push_back(Vec{u(rng), u(rng)});
  return pts;
}

void ac1() {
  const auto t0 = std::chrono::steady_clock::now();
  double h1 = 0, h2 = 0, h2n = 0;
  bool pass = true;
  for (const auto& op : catalog(3))
    for (std::uint64_t seed : {1u, 2u, 3u}) {
      const auto a = check_h1(op, 1000, seed);
      const auto b = check_h2(op, 1000, seed);
      const auto c = check_h2(op, 1000, seed, true);
      pass = pass && a.pass && b.pass && c.pass;
      h1 = std::max(h1, a.max_rel_error);
      h2 = std::max(h2, b.max_rel_error);
      h2n = std::max(h2n, c.max_rel_error);
    }
  const double dt = seconds_since(t0);
  report(1, pass && dt <= 10.0,
         "hypotheses (h1)/(h2): 5 ops x seeds {1,2,3} x 1000 samples, max h1=" + fmt("%.2e", h1) + " h2=" +
             fmt("%.2e", h2) + " (tol 1e-9) h2_numeric=" + fmt("%.2e", h2n) + " (tol 1e-6), " + fmt("%.2f", dt) +
             " s (limit 10 s)");
}

void ac2() {
  double worst = 0;
  bool pass = true;
  for (int n : {2, 3})
    for (const auto& op : catalog(n)) {
      const auto r = check_natural_term(op, 1000, 100 + static_cast<std::uint64_t>(n));
      pass = pass && r.pass;
      worst = std::max(worst, r.max_rel_error);
    }
  report(2, pass, "natural term N vs <grad_M_numeric p, p>: max normalized error " + fmt("%.2e", worst) + " (tol 1e-5)");
}

void ac3() {
  std::mt19937_64 rng(2024);
  std::uniform_real_distribution<double> u(-1, 1);
  std::vector<std::pair<int, int>> shapes;
  for (int n = 1; n <= 6; ++n)
    for (int k = 1; k <= n; ++k) shapes.emplace_back(n, k);
  double worst = 0;
  for (int i = 0; i < 500; ++i) {
    const auto [n, k] = shapes[static_cast<std::size_t>(i) % shapes.size()];
    Matrix X(n);
    Vec p(n);
    for (int a = 0; a < n; ++a) {
      p[a] = u(rng);
      for (int b = a; b < n; ++b) X(a, b) = X(b, a) = u(rng);
    }
    const Matrix pp = tensor(p, p);
    const double scale = 1.0 + std::max({std::fabs(ktrace(X, k)), std::fabs(ktrace(X + pp, k)),
                                         std::fabs(ktrace(X - pp, k)), std::fabs(quad_form(ktrace_gradient(X, k), p))});
    worst = std::max(worst, rank_one_update_check(X, p, k) / scale);
  }
  report(3, worst <= 1e-9, "k-trace rank-one identity: 500 instances, n <= 6, all k, max residual/scale " +
                               fmt("%.2e", worst) + " (tol 1e-9)");
}

void ac4() {
  const char* gs[] = {kExampleG, "t^3", "t", "0", "t/(1+t^2)"};
  double anchor = 0, second = 0, trip = 0, convex_violation = 0;
  bool monotone = true;
  for (const char* g : gs) {
    const auto tbl = TransformTable::build(GSpec::checked(g), -3.0, 3.0);
    anchor = std::max(anchor, std::fabs(tbl.phi(0.0)));
    const double h = 1e-3;
    double prev = -std::numeric_limits<double>::infinity();
    for (int i = 0; i <= 2000; ++i) {
      const double t = -2.9 + 5.8 * i / 2000.0;
      const double p = tbl.phi(t);
      monotone = monotone && p > prev;
      prev = p;
      // Richardson-extrapolated central difference of Phi'
      const double d1 = (tbl.phi_prime(t + h) - tbl.phi_prime(t - h)) / (2 * h);
      const double d2 = (tbl.phi_prime(t + h / 2) - tbl.phi_prime(t - h / 2)) / h;
      const double fd = (4 * d2 - d1) / 3;
      const double target = tbl.g(t) * tbl.phi_prime(t);
      second = std::max(second, std::fabs(fd - target) / (1.0 + std::fabs(target) + tbl.phi_prime(t)));
      // sign of the second difference of Phi: convex for t >= s0 = 0, concave for t <= 0
      const double dd = tbl.phi(t + h) - 2 * p + tbl.phi(t - h);
      const double sc = 1e-12 * (1.0 + std::fabs(p));
      if (t >= h && dd < -sc) convex_violation = std::max(convex_violation, -dd);
      if (t <= -h && dd > sc) convex_violation = std::max(convex_violation, dd);
      trip = std::max(trip, std::fabs(tbl.phi_inv(p) - t) / (1.0 + std::fabs(t)));
      const double s = std::min(tbl.phi_max(), tbl.phi_min() + (tbl.phi_max() - tbl.phi_min()) * i / 2000.0);
      trip = std::max(trip, std::fabs(tbl.phi(tbl.phi_inv(s)) - s) / (1.0 + std::fabs(s)));
    }
  }
  const auto example = TransformTable::build(GSpec::checked(kExampleG), -10.0, 10.0);
  const double closed = std::fabs(example.phi(1.0) - 4.0 / 3.0);
  const bool pass = anchor == 0.0 && monotone && convex_violation == 0.0 && second <= 1e-8 && trip <= 1e-9 &&
                    closed <= 1e-10;
  report(4, pass,
         "transform: anchor |Phi(0)|=" + fmt("%.1e", anchor) + ", monotone=" + (monotone ? "yes" : "no") +
             ", convexity split violations=" + fmt("%.1e", convex_violation) + ", |Phi''-g Phi'|/scale=" +
             fmt("%.2e", second) + " (tol 1e-8), round trip " + fmt("%.2e", trip) + " (tol 1e-9), |Phi(1)-4/3|=" +
             fmt("%.2e", closed) + " (tol 1e-10)");
}

void ac5() {
  const auto t0 = std::chrono::steady_clock::now();
  const char* sols[] = {"sin(x1) + x2^2", "x1^2 + x1*x2 + 2*x2^2"};
  const GSpec gs[] = {GSpec::checked("0"), GSpec::checked(kExampleG), GSpec::local("0.5")};
  const auto pts = random_points(100, 0.1, 1.0, 5);
  int reports = 0, passed = 0;
  double worst = 0;
  for (const auto& op : catalog(2))
    for (const auto& g : gs)
      for (const char* s : sols) {
        const auto u = ManufacturedSolution::parse(s, 2);
        const auto f = theorem1_forward(op, g, u, pts);
        const auto b = theorem1_backward(op, g, u, pts);
        reports += 2;
        passed += f.pass + b.pass;
        worst = std::max({worst, f.normalized_forward / f.tol, b.normalized_backward / b.tol});
      }
  const double dt = seconds_since(t0);
  report(5, passed == reports && dt <= 30.0,
         "transform invariance (forward and backward): " + std::to_string(passed) + "/" + std::to_string(reports) +
             " reports pass (5 ops x 3 g x 2 solutions x 2 directions), worst residual/tol " + fmt("%.2e", worst) +
             ", " + fmt("%.2f", dt) + " s (limit 30 s)");
}

void ac6() {
  const auto tbl = TransformTable::build(GSpec::checked(kExampleG), -10.0, 10.0);
  const auto v = ManufacturedSolution::parse("x1^(4/3) - x2^(4/3)", 2);
  const auto r = aronsson_transfer(tbl, v, random_points(100, 1.0, 2.0, 6));
  report(6, r.residual <= 1e-7 && r.gradient_error <= 1e-9,
         "Aronsson transfer: residual of Delta_inf u + g(u)|Du|^4 " + fmt("%.2e", r.residual) +
             " (tol 1e-7), |exp(G(u))Du - Dv| " + fmt("%.2e", r.gradient_error) + " (tol 1e-9), min |Du| " +
             fmt("%.3f", r.min_grad));
}

double sup_error(const SolveResult& r, const std::function<double(Point)>& exact) {
  double e = 0;
  for (std::size_t n = 0; n < r.u.size(); ++n) e = std::max(e, std::fabs(r.u[n] - exact(r.grid->position(n))));
  return e;
}

void ac7() {
  const auto t0 = std::chrono::steady_clock::now();
  const double hs[] = {1.0 / 16, 1.0 / 32, 1.0 / 64};
  auto problem = [](const Domain2D& d, const char* b, const char* f, const char* g, double h) {
    GridProblem p;
    p.domain = d;
    p.h = h;
    p.b = parse(b);
    p.f = parse(f);
    p.g = GSpec::checked(g);
    p.solver.max_iters = 5'000'000;
    return p;
  };
  auto aronsson = [](Point q) { return std::pow(q.x, 4.0 / 3) - std::pow(q.y, 4.0 / 3); };
  auto radial = [](Point q) { return std::pow(q.x * q.x + q.y * q.y, 2.0 / 3); };
  const char* radial_b = "(x1^2 + x2^2)^(2/3)";
  const char* pipeline_b =
      "(1.5*(x1^2+x2^2)^(2/3) + sqrt(2.25*(x1^2+x2^2)^(4/3) + 1))^(1/3) - "
      "(1.5*(x1^2+x2^2)^(2/3) + sqrt(2.25*(x1^2+x2^2)^(4/3) + 1))^(-1/3)";
  const CompiledExpr pipeline_exact(parse(pipeline_b), coordinate_slots(2, false));

  std::vector<double> ea, eb;
  bool converged = true;
  for (double h : hs) {
    const auto ra = solve_with_gradient_term(problem(Domain2D::rectangle(1, 1, 2, 2), "x1^(4/3) - x2^(4/3)", "0", "0", h));
    const auto rb = solve_with_gradient_term(problem(Domain2D::disc(2, 0, 0.5), radial_b, "-64/81", "0", h));
    converged = converged && ra.converged && rb.converged;
    ea.push_back(sup_error(ra, aronsson));
    eb.push_back(sup_error(rb, radial));
  }
  const auto rc = solve_with_gradient_term(problem(Domain2D::disc(2, 0, 0.5), pipeline_b, "-(64/81)/(1+t^2)^3", kExampleG, 1.0 / 64));
  converged = converged && rc.converged;
  const double ec = sup_error(rc, [&](Point q) { return pipeline_exact({q.x, q.y}); });
  const double dt = seconds_since(t0);
  auto decreasing = [](const std::vector<double>& e) { return e[0] > e[1] && e[1] > e[2]; };
  const bool pass = converged && decreasing(ea) && decreasing(eb) && ea[2] <= 5e-2 && eb[2] <= 5e-2 && ec <= 5e-2 &&
                    dt <= 300.0;
  report(7, pass,
         "solver exact tests (h = 1/16, 1/32, 1/64): (a) Aronsson " + fmt("%.2e", ea[0]) + " " + fmt("%.2e", ea[1]) + " " +
             fmt("%.2e", ea[2]) + "; (b) radial " + fmt("%.2e", eb[0]) + " " + fmt("%.2e", eb[1]) + " " +
             fmt("%.2e", eb[2]) + "; (c) pipeline at 1/64 " + fmt("%.2e", ec) + " (tol 5e-2, monotone decrease), " +
             "converged=" + (converged ? "yes" : "no") + ", " + fmt("%.1f", dt) + " s (limit 300 s)");
}

void ac8() {
  AnalysisConfig cfg;
  cfg.f = parse(kExampleF);
  cfg.g = GSpec::checked(kExampleG);
  cfg.domain = Domain2D::disc(0, 0, 1);
  cfg.b = parse("0");
  const AnalysisContext ctx(cfg);
  double worst = 0;
  for (int i = 0; i <= 10; ++i) {
    const double t = 0.5 * i;
    worst = std::max(worst, std::fabs(compute_eta(ctx, t) - std::exp(t)) / std::exp(t));
  }
  report(8, worst <= 1e-6, "eta for the worked example vs e^t on t in [0, 5] (11 points): max relative error " +
                               fmt("%.2e", worst) + " (tol 1e-6)");
}

double brute_zeta(const std::function<double(double, double)>& dH, const std::function<double(double)>& eta, double ell,
                  double a) {
  const double delta = 1e-8;
  const int N = 1000000;
  const double h = (a - delta - ell) / N;
  double s = 0.0;
  for (int i = 0; i < N; ++i) s += h / std::pow(dH(ell + (i + 0.5) * h, a), 0.25);
  return s + 4.0 / 3.0 * std::pow(delta, 0.75) / std::pow(eta(a), 0.25);
}

void ac9() {
  const double closed = std::fabs(compute_zeta(eta_model([](double) { return 1.0; }), 0.0, 1.0, 1e-12).value - 4.0 / 3);
  struct Case {
    std::function<double(double)> eta;
    std::function<double(double, double)> dH;
  };
  const Case cases[] = {
      {[](double) { return 1.0; }, [](double t, double a) { return a - t; }},
      {[](double t) { return std::exp(t); }, [](double t, double a) { return std::exp(a) - std::exp(t); }},
      {[](double t) { return 1 + t * t; }, [](double t, double a) { return (a - t) + (a * a * a - t * t * t) / 3; }},
  };
  std::mt19937_64 rng(91);
  std::uniform_real_distribution<double> ul(-1, 1), ua(0.2, 3);
  double worst = 0;
  for (int i = 0; i < 10; ++i) {
    const Case& c = cases[i % 3];
    const double ell = ul(rng), a = ell + ua(rng);
    const double z = compute_zeta(eta_model(c.eta), ell, a, 1e-12).value;
    worst = std::max(worst, std::fabs(z / brute_zeta(c.dH, c.eta, ell, a) - 1.0));
  }
  report(9, closed <= 1e-6 && worst <= 1e-4, "zeta quadrature: |zeta(1) - 4/3| = " + fmt("%.2e", closed) +
                                                 " (tol 1e-6), 10 brute-force instances max relative gap " +
                                                 fmt("%.2e", worst) + " (tol 1e-4)");
}

std::string capture(const std::string& cmd, int& code) {
  std::string out;
  FILE* p = popen((cmd + " 2>&1").c_str(), "r");
  if (!p) {
    code = -1;
    return out;
  }
  char buf[4096];
  std::size_t got;
  while ((got = std::fread(buf, 1, sizeof buf, p)) > 0) out.append(buf, got);
  const int status = pclose(p);
  code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  return out;
}

std::map<std::string, std::string> snapshot(const fs::path& dir) {
  std::map<std::string, std::string> files;
  if (!fs::exists(dir)) return files;
  for (const auto& e : fs::directory_iterator(dir))
    if (e.is_regular_file()) files[e.path().filename().string()] = io::read_file(e.path());
  return files;
}

void ac10() {
  const std::string bin = NGT_CLI_PATH;
  const fs::path root = fs::absolute("acceptance_out");
  fs::remove_all(root);
  const std::string g = std::string(" --set 'g.expr=") + kExampleG + "'";
  const std::vector<std::pair<std::string, std::string>> commands = {
      {"check", "check-operator --op k-hessian:2 -n 3 --samples 1000 --seed 11"},
      {"verify", "verify --set operator.name=infinity --seed 12" + g},
      {"solve", "solve --set domain.shape=disc --set 'domain.params=[2,0,0.5]' --set grid.h=0.0625"
                " --set 'b.expr=x1^2 - x2' --set 'f.expr=1 + 0.1*t' --seed 13" + g},
      {"nonexistence", "analyze --mode nonexistence --set domain.shape=disc --set 'domain.params=[0,0,1]'"
                       " --set 'f.expr=" + std::string(kExampleF) + "' --set analysis.interior_side=24 --seed 14" + g},
      {"existence", "analyze --mode existence-hypotheses --set 'f.expr=1 + t^2' --set analysis.interior_side=16" + g},
      {"uniqueness", "analyze --mode uniqueness --set 'f.expr=-t'" + g},
      {"transform", "transform --phi 0.5 --phi 2 --phi-inv 1" + g},
  };
  int identical = 0, files = 0;
  std::string bad;
  for (const auto& [name, args] : commands) {
    const fs::path dir = root / name;
    const std::string cmd = bin + " " + args + " --out " + dir.string();
    int c1 = 0, c2 = 0;
    const std::string o1 = capture(cmd, c1);
    const auto s1 = snapshot(dir);
    const std::string o2 = capture(cmd, c2);
    const auto s2 = snapshot(dir);
    files += static_cast<int>(s1.size());
    if (c1 == c2 && c1 != 2 && o1 == o2 && s1 == s2 && !s1.empty())
      ++identical;
    else
      bad += " " + name;
  }
  report(10, identical == static_cast<int>(commands.size()),
         "determinism: " + std::to_string(identical) + "/" + std::to_string(commands.size()) +
             " CLI commands byte-identical on re-run (" + std::to_string(files) + " output files plus stdout)" +
             (bad.empty() ? "" : "; differing:" + bad));
}

}  // namespace

int main() {
  const std::function<void()> criteria[] = {ac1, ac2, ac3, ac4, ac5, ac6, ac7, ac8, ac9, ac10};
  for (std::size_t i = 0; i < std::size(criteria); ++i) {
    try {
      criteria[i]();
    } catch (const std::exception& e) {
      report(static_cast<int>(i) + 1, false, std::string("threw: ") + e.what());
    }
  }
  std::printf("%d of 10 criteria failed\n", failures);
  return failures == 0 ? 0 : 1;
}
