#pragma once

// Command-line surface: config resolution (defaults <- file <- --set <- flags),
// the five subcommands and their report files. Exit codes: 0 pass, 1 semantic
// failure, 2 configuration error.

#include <CLI11.hpp>
#include <json.hpp>

#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <iostream>
#include <optional>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "ngt/analysis.hpp"
#include "ngt/domain.hpp"
#include "ngt/error.hpp"
#include "ngt/expr.hpp"
#include "ngt/io.hpp"
#include "ngt/operators.hpp"
#include "ngt/solver.hpp"
#include "ngt/transform.hpp"
#include "ngt/verify.hpp"

namespace ngt::cli {

using json = nlohmann::json;

enum ExitCode : int { kPass = 0, kFail = 1, kConfig = 2 };

/// Every accepted key with its default. Keys absent here are rejected.
inline json default_config() {
  return json::parse(R"cfg({
    "seed": 0,
    "operator": {"name": "infinity", "params": {"n": 2, "m": null, "k": null}},
    "g": {"expr": "0", "s0": 0.0, "sign_check": true},
    "f": {"expr": "0"},
    "b": {"expr": "0"},
    "domain": {"shape": "rectangle", "params": [0.0, 0.0, 1.0, 1.0]},
    "grid": {"h": 0.03125, "tol": 1e-6, "max_iters": 500000, "scheme": "fd-direct"},
    "transform": {"t_min": -10.0, "t_max": 10.0, "quad_tol": 1e-10},
    "analysis": {"t_max": 50.0, "quad_tol": 1e-10, "boundary_samples": 512, "interior_side": 64,
                 "s_samples": 512, "zeta_samples": 64, "uniqueness_range": [-10.0, 10.0]},
    "check": {"samples": 1000},
    "verify": {"solutions": ["sin(x1) + x2^2", "x1^2 + x1*x2 + 2*x2^2"], "phis": ["exp(t)", "t + t^3/3"],
               "points": 50, "box": [0.0, 1.0], "tol": null},
    "output": {"dir": "ngt_out", "formats": ["csv", "pgm", "txt"]}
  })cfg");
}

namespace detail {

inline const char* type_label(const json& j) {
  if (j.is_null()) return "null";
  if (j.is_boolean()) return "boolean";
  if (j.is_number()) return "number";
  if (j.is_string()) return "string";
  if (j.is_array()) return "array";
  return "object";
}

/// Overlays `src` on `dst`; every key must exist in `dst` with a compatible type.
/// A null default accepts null or a number.
inline void overlay(json& dst, const json& src, const std::string& path) {
  if (!src.is_object()) throw ConfigError("'" + (path.empty() ? std::string("<root>") : path) + "' must be an object");
  for (auto it = src.begin(); it != src.end(); ++it) {
    const std::string key = path.empty() ? it.key() : path + "." + it.key();
    if (!dst.contains(it.key())) throw ConfigError("unknown config key '" + key + "'");
    json& d = dst[it.key()];
    const json& s = it.value();
    if (d.is_object()) {
      overlay(d, s, key);
      continue;
    }
    const bool ok = d.is_null() ? (s.is_null() || s.is_number())
                    : d.is_number() ? s.is_number()
                                    : std::string(type_label(d)) == type_label(s);
    if (!ok) throw ConfigError("config key '" + key + "' expects " + type_label(d) + ", got " + type_label(s));
    d = s;
  }
}

/// "a.b.c=value". String-typed keys take the text verbatim; other values are
/// read as JSON when they parse, else as a string.
inline json set_patch(const std::string& assignment, const json& current) {
  const auto eq = assignment.find('=');
  if (eq == std::string::npos || eq == 0) throw ConfigError("--set expects key=value, got '" + assignment + "'");
  const std::string key = assignment.substr(0, eq), text = assignment.substr(eq + 1);
  json patch = json::object();
  json* cur = &patch;
  const json* target = &current;
  std::size_t start = 0;
  for (;;) {
    const auto dot = key.find('.', start);
    const std::string part = key.substr(start, dot == std::string::npos ? std::string::npos : dot - start);
    if (part.empty()) throw ConfigError("bad --set key '" + key + "'");
    target = target && target->is_object() && target->contains(part) ? &(*target)[part] : nullptr;
    if (dot == std::string::npos) {
      json value = json::parse(text, nullptr, false);
      if (value.is_discarded() || (target && target->is_string())) value = text;
      (*cur)[part] = value;
      break;
    }
    cur = &(*cur)[part];
    *cur = json::object();
    start = dot + 1;
  }
  return patch;
}

inline long integer(const json& j, const char* key) {
  const double v = j.get<double>();
  if (v != std::floor(v) || std::fabs(v) > 9e15) throw ConfigError(std::string(key) + " must be an integer");
  return static_cast<long>(v);
}

inline double number(const json& j, const char* key) {
  if (!j.is_number()) throw ConfigError(std::string(key) + " must be a number");
  return j.get<double>();
}

inline std::string fmt(const char* f, double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, f, v);
  return buf;
}

}  // namespace detail

/// Resolved configuration with typed accessors onto the library objects.
class RunConfig {
 public:
  explicit RunConfig(json doc) : doc_(std::move(doc)) {
    if (detail::integer(doc_["seed"], "seed") < 0) throw ConfigError("seed must be >= 0");
    for (const auto& f : doc_["output"]["formats"]) {
      if (!f.is_string() || (f != "csv" && f != "pgm" && f != "txt"))
        throw ConfigError("output.formats entries must be \"csv\", \"pgm\" or \"txt\"");
    }
  }

  static RunConfig resolve(const std::optional<std::filesystem::path>& file, const std::vector<std::string>& sets) {
    json doc = default_config();
    if (file) {
      json user = json::parse(io::read_file(*file), nullptr, false);
      if (user.is_discarded()) throw ConfigError("config file " + file->string() + " is not valid JSON");
      detail::overlay(doc, user, "");
    }
    for (const auto& s : sets) detail::overlay(doc, detail::set_patch(s, doc), "");
    return RunConfig(std::move(doc));
  }

  json& doc() noexcept { return doc_; }
  const json& doc() const noexcept { return doc_; }
  const json& at(const char* section) const { return doc_.at(section); }

  std::uint64_t seed() const { return static_cast<std::uint64_t>(detail::integer(doc_["seed"], "seed")); }
  std::filesystem::path out_dir() const { return doc_["output"]["dir"].get<std::string>(); }

  bool wants(const char* format) const {
    for (const auto& f : doc_["output"]["formats"])
      if (f == format) return true;
    return false;
  }

  int dim() const {
    const long n = detail::integer(doc_["operator"]["params"]["n"], "operator.params.n");
    if (n < 1 || n > kMaxDim) throw ConfigError("operator.params.n must be in [1, " + std::to_string(kMaxDim) + "]");
    return static_cast<int>(n);
  }

  /// Name plus optional params.m / params.k ("m-laplace" with m = 3 is "m-laplace:3").
  OperatorSpec op() const {
    std::string name = doc_["operator"]["name"].get<std::string>();
    const json& p = doc_["operator"]["params"];
    for (const char* key : {"m", "k"}) {
      if (p[key].is_null()) continue;
      const std::string base = key[0] == 'm' ? "m-laplace" : "k-hessian";
      if (name != base) throw ConfigError("operator.params." + std::string(key) + " only applies to operator " + base);
      name += ":" + detail::fmt("%.17g", p[key].get<double>());
    }
    return parse_operator(name, dim());
  }

  GSpec g() const {
    const json& s = doc_["g"];
    const std::string expr = s["expr"].get<std::string>();
    if (!s["sign_check"].get<bool>()) return GSpec::local(expr);
    return GSpec::checked(expr, s["s0"].get<double>());
  }

  Expr f() const { return parse_expr("f", {"x1", "x2", "x3", "x4", "x5", "x6", "x7", "x8", "t"}); }
  Expr b() const { return parse_expr("b", {"x1", "x2"}); }

  Domain2D domain() const {
    const json& d = doc_["domain"];
    const std::string shape = d["shape"].get<std::string>();
    std::vector<double> p;
    for (const auto& v : d["params"]) p.push_back(detail::number(v, "domain.params"));
    if (shape == "rectangle") {
      if (p.size() != 4) throw ConfigError("rectangle needs domain.params = [x0, y0, x1, y1]");
      return Domain2D::rectangle(p[0], p[1], p[2], p[3]);
    }
    if (shape == "disc") {
      if (p.size() != 3) throw ConfigError("disc needs domain.params = [cx, cy, r]");
      return Domain2D::disc(p[0], p[1], p[2]);
    }
    throw ConfigError("domain.shape must be \"rectangle\" or \"disc\"");
  }

  GridProblem grid_problem() const {
    GridProblem gp;
    gp.domain = domain();
    const json& gr = doc_["grid"];
    gp.h = gr["h"].get<double>();
    if (!(gp.h > 0.0)) throw ConfigError("grid.h must be positive");
    gp.solver.scheme = parse_scheme(gr["scheme"].get<std::string>());
    gp.solver.tol = gr["tol"].get<double>();
    if (!(gp.solver.tol > 0.0)) throw ConfigError("grid.tol must be positive");
    gp.solver.max_iters = detail::integer(gr["max_iters"], "grid.max_iters");
    if (gp.solver.max_iters < 0) throw ConfigError("grid.max_iters must be >= 0");
    gp.solver.laplace_tol = std::min(1e-6, gp.solver.tol);
    gp.b = b();
    gp.f = parse_expr("f", {"x1", "x2", "t"});
    gp.g = g();
    const json& tr = doc_["transform"];
    gp.t_min = tr["t_min"].get<double>();
    gp.t_max = tr["t_max"].get<double>();
    gp.quad_tol = tr["quad_tol"].get<double>();
    return gp;
  }

  AnalysisConfig analysis() const {
    const json& a = doc_["analysis"];
    AnalysisConfig c;
    c.f = parse_expr("f", {"x1", "x2", "t"});
    c.g = g();
    c.domain = domain();
    c.b = b();
    c.t_max = a["t_max"].get<double>();
    c.quad_tol = a["quad_tol"].get<double>();
    c.boundary_samples = static_cast<int>(detail::integer(a["boundary_samples"], "analysis.boundary_samples"));
    c.interior_side = static_cast<int>(detail::integer(a["interior_side"], "analysis.interior_side"));
    c.s_samples = static_cast<int>(detail::integer(a["s_samples"], "analysis.s_samples"));
    c.zeta_samples = static_cast<int>(detail::integer(a["zeta_samples"], "analysis.zeta_samples"));
    return c;
  }

  std::pair<double, double> uniqueness_range() const {
    const json& r = doc_["analysis"]["uniqueness_range"];
    if (r.size() != 2) throw ConfigError("analysis.uniqueness_range must be [t_lo, t_hi]");
    return {detail::number(r[0], "analysis.uniqueness_range"), detail::number(r[1], "analysis.uniqueness_range")};
  }

 private:
  Expr parse_expr(const char* section, std::initializer_list<const char*> allowed) const {
    const std::string src = doc_[section]["expr"].get<std::string>();
    Expr e = parse(src);
    for (const auto& v : free_variables(e)) {
      bool ok = false;
      for (const char* a : allowed) ok = ok || v == a;
      if (!ok) throw ConfigError(std::string(section) + ".expr uses unsupported variable '" + v + "'");
    }
    return e;
  }

  json doc_;
};

/// Options shared by every subcommand.
struct CommonOptions {
  std::string config;
  std::vector<std::string> sets;
  std::optional<std::uint64_t> seed;
  std::string out;
};

namespace detail {

inline void write_resolved(const RunConfig& cfg) {
  io::write_atomic(cfg.out_dir() / "resolved_config.json", cfg.doc().dump(2) + "\n");
}

inline std::string check_line(const char* name, const CheckReport& r) {
  char buf[160];
  std::snprintf(buf, sizeof buf, "%s max_rel_error=%.6e threshold=%.0e samples=%d pass=%d\n", name, r.max_rel_error,
                r.threshold, r.samples, r.pass ? 1 : 0);
  return buf;
}

inline std::vector<Vec> random_points(int n, int count, double lo, double hi, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> U(lo, hi);
  std::vector<Vec> pts;
  for (int i = 0; i < count; ++i) {
    Vec x(n);
    for (int k = 0; k < n; ++k) x[k] = U(rng);
    pts.push_back(x);
  }
  return pts;
}

}  // namespace detail

// ---------------------------------------------------------------------------
// Subcommands. Each receives a resolved config and returns an exit code;
// configuration problems surface as ConfigError.

struct CheckOperatorArgs {
  std::string op;
  std::optional<int> n;
  std::optional<int> samples;
};

inline int cmd_check_operator(RunConfig& cfg, const CheckOperatorArgs& a, std::ostream& out) {
  if (!a.op.empty()) {
    cfg.doc()["operator"]["name"] = a.op;
    cfg.doc()["operator"]["params"]["m"] = nullptr;
    cfg.doc()["operator"]["params"]["k"] = nullptr;
  }
  if (a.n) cfg.doc()["operator"]["params"]["n"] = *a.n;
  if (a.samples) cfg.doc()["check"]["samples"] = *a.samples;
  const OperatorSpec op = cfg.op();
  const long samples = detail::integer(cfg.doc()["check"]["samples"], "check.samples");
  if (samples < 1 || samples > 10'000'000) throw ConfigError("check.samples must be in [1, 1e7]");
  const std::uint64_t seed = cfg.seed();
  detail::write_resolved(cfg);

  const int s = static_cast<int>(samples);
  const CheckReport h1 = check_h1(op, s, seed);
  const CheckReport h2 = check_h2(op, s, seed);
  const CheckReport h2n = check_h2(op, s, seed, true);
  const CheckReport nt = check_natural_term(op, s, seed);

  double maxN = 0.0, maxM = 0.0;
  ngt::detail::JetSampler gen(op.dim(), seed);
  for (int i = 0; i < s; ++i) {
    const Jet j = gen.jet();
    maxN = std::max(maxN, std::fabs(eval_N(op, j)));
    maxM = std::max(maxM, std::fabs(eval_M(op, j)));
  }
  const bool pass = h1.pass && h2.pass && h2n.pass && nt.pass;

  std::string rep = "# check-operator op=" + op.name() + " n=" + std::to_string(op.dim()) +
                    " samples=" + std::to_string(s) + " seed=" + std::to_string(seed) + "\n";
  rep += "alpha=" + detail::fmt("%.17g", op.alpha()) + " beta=" + std::to_string(op.beta()) +
         " weight=" + detail::fmt("%.17g", op.weight()) + "\n";
  rep += detail::check_line("h1", h1);
  rep += detail::check_line("h2", h2);
  rep += detail::check_line("h2_numeric", h2n);
  rep += detail::check_line("natural_term", nt);
  if (maxN <= 1e-12 * (1.0 + maxM))
    rep += "note: N vanishes identically on all samples; this operator admits no nontrivial invariant gradient term\n";
  rep += std::string("result=") + (pass ? "pass" : "fail") + "\n";
  out << rep;
  if (cfg.wants("txt")) io::write_atomic(cfg.out_dir() / "check_operator.txt", rep);
  return pass ? kPass : kFail;
}

inline int cmd_verify(RunConfig& cfg, std::ostream& out) {
  const OperatorSpec op = cfg.op();
  const GSpec gs = cfg.g();
  const json& v = cfg.at("verify");
  const long count = detail::integer(v["points"], "verify.points");
  if (count < 1) throw ConfigError("verify.points must be >= 1");
  if (v["box"].size() != 2) throw ConfigError("verify.box must be [lo, hi]");
  const double lo = detail::number(v["box"][0], "verify.box"), hi = detail::number(v["box"][1], "verify.box");
  if (!(lo < hi)) throw ConfigError("verify.box needs lo < hi");
  const double tol = v["tol"].is_null() ? default_verify_tol(op) : v["tol"].get<double>();
  std::vector<ManufacturedSolution> sols;
  std::vector<std::string> sol_src, phis;
  for (const auto& s : v["solutions"]) {
    if (!s.is_string()) throw ConfigError("verify.solutions entries must be strings");
    sols.push_back(ManufacturedSolution::parse(s.get<std::string>(), op.dim()));
    sol_src.push_back(s.get<std::string>());
  }
  for (const auto& p : v["phis"]) {
    if (!p.is_string()) throw ConfigError("verify.phis entries must be strings");
    phis.push_back(p.get<std::string>());
    for (const auto& var : free_variables(parse(phis.back())))
      if (var != "t") throw ConfigError("verify.phis entries may only depend on t");
  }
  if (sols.empty()) throw ConfigError("verify.solutions is empty");
  detail::write_resolved(cfg);

  const auto pts = detail::random_points(op.dim(), static_cast<int>(count), lo, hi, cfg.seed());
  constexpr double kChainTol = 1e-10;
  bool pass = true;
  std::string rep = "# verify op=" + op.name() + " n=" + std::to_string(op.dim()) + " g=" + to_string(gs.g()) +
                    " points=" + std::to_string(count) + " seed=" + std::to_string(cfg.seed()) + "\n";
  for (std::size_t i = 0; i < sols.size(); ++i)
    for (const auto& phi : phis) {
      const double r = chain_rule_check(op, phi, sols[i], pts);
      const bool ok = r <= kChainTol;
      pass = pass && ok;
      char buf[96];
      std::snprintf(buf, sizeof buf, " residual=%.6e tol=%.0e pass=%d\n", r, kChainTol, ok ? 1 : 0);
      rep += "[CHAIN] phi=" + phi + " u=" + sol_src[i] + buf;
    }
  for (std::size_t i = 0; i < sols.size(); ++i) {
    const InvarianceReport fw = theorem1_forward(op, gs, sols[i], pts, tol);
    const InvarianceReport bw = theorem1_backward(op, gs, sols[i], pts, tol);
    pass = pass && fw.pass && bw.pass;
    rep += "[FORWARD] u=" + sol_src[i] + "\n" + fw.to_text();
    rep += "[BACKWARD] v=" + sol_src[i] + "\n" + bw.to_text();
    char buf[200];
    std::snprintf(buf, sizeof buf, "forward u=%s max=%.6e pass=%d; backward max=%.6e pass=%d\n", sol_src[i].c_str(),
                  fw.normalized_forward, fw.pass ? 1 : 0, bw.normalized_backward, bw.pass ? 1 : 0);
    out << buf;
  }
  rep += std::string("result=") + (pass ? "pass" : "fail") + "\n";
  out << "result=" << (pass ? "pass" : "fail") << "\n";
  if (cfg.wants("txt")) io::write_atomic(cfg.out_dir() / "verify_report.txt", rep);
  return pass ? kPass : kFail;
}

inline int cmd_solve(RunConfig& cfg, std::ostream& out) {
  const OperatorSpec op = cfg.op();
  if (op.kind() != OperatorKind::infinity_laplace || op.dim() != 2)
    throw ConfigError("solve supports operator \"infinity\" with n = 2 only");
  const GridProblem gp = cfg.grid_problem();
  detail::write_resolved(cfg);

  SolveResult res;
  try {
    res = solve_with_gradient_term(gp);
  } catch (const RangeError& e) {
    throw Error(std::string("solver left the transform table: ") + e.what());
  }
  char buf[200];
  std::snprintf(buf, sizeof buf, "residual=%.6e iterations=%ld converged=%s nodes=%zu\n", res.residual_inf, res.iters,
                res.converged ? "true" : "false", res.grid->size());
  std::string rep = "# solve scheme=" + std::string(scheme_name(gp.solver.scheme)) + " h=" + detail::fmt("%.17g", gp.h) +
                    " domain=" + gp.domain.describe() + "\n" + buf;
  out << buf;
  const auto dir = cfg.out_dir();
  if (cfg.wants("csv")) io::write_atomic(dir / "solution.csv", io::solution_csv(*res.grid, res.v, res.u));
  if (cfg.wants("pgm")) {
    io::write_atomic(dir / "v.pgm", io::heatmap_pgm(*res.grid, res.v));
    io::write_atomic(dir / "u.pgm", io::heatmap_pgm(*res.grid, res.u));
  }
  if (cfg.wants("txt")) io::write_atomic(dir / "solve_report.txt", rep);
  return res.converged ? kPass : kFail;
}

inline int cmd_analyze(RunConfig& cfg, const std::string& mode, std::ostream& out) {
  if (mode != "nonexistence" && mode != "existence-hypotheses" && mode != "uniqueness")
    throw ConfigError("--mode must be nonexistence, existence-hypotheses or uniqueness");
  const auto dir = cfg.out_dir();

  if (mode == "uniqueness") {
    const GSpec gs = cfg.g();
    const Expr f = cfg.f();
    for (const auto& v : free_variables(f))
      if (v != "t") throw ConfigError("uniqueness mode needs f = f(t) (found '" + v + "')");
    const auto [lo, hi] = cfg.uniqueness_range();
    if (!(lo < hi)) throw ConfigError("analysis.uniqueness_range needs t_lo < t_hi");
    detail::write_resolved(cfg);
    const UniquenessReport r = check_uniqueness_hypothesis(f, gs, lo, hi);
    const std::string text = r.to_text();
    out << text;
    if (cfg.wants("txt")) io::write_atomic(dir / "uniqueness.txt", text);
    return r.monotone ? kPass : kFail;
  }

  const AnalysisConfig ac = cfg.analysis();
  detail::write_resolved(cfg);
  const AnalysisContext ctx(ac);

  if (mode == "nonexistence") {
    const NonexistenceReport r = compute_S_and_verdict(ctx);
    const std::string text = r.to_text();
    out << "ell=" << detail::fmt("%.17g", r.ell) << " S=" << detail::fmt("%.17g", r.S)
        << " R=" << detail::fmt("%.17g", r.R) << " verdict=" << verdict_name(r.verdict) << "\n";
    if (cfg.wants("txt")) io::write_atomic(dir / "nonexistence.txt", text);
    if (cfg.wants("csv")) {
      io::write_atomic(dir / "eta.csv", r.eta_csv());
      io::write_atomic(dir / "zeta.csv", r.zeta_csv());
    }
    return kPass;
  }

  const double ell = compute_ell(ctx);
  const double f0 = f0_bound(ctx);
  const FgLimitReport fg = check_fg_limits(ctx);
  std::string text = "[ELL]\nell = " + detail::fmt("%.17g", ell) + "\n[F0]\nmax_abs_f_on_|t|<=10 = " +
                     detail::fmt("%.17g", f0) + "\nbounded = " + (std::isfinite(f0) ? "true" : "false") + "\n" +
                     fg.to_text();
  out << text;
  if (cfg.wants("txt")) io::write_atomic(dir / "existence.txt", text);
  if (cfg.wants("csv")) io::write_atomic(dir / "fg.csv", fg.to_csv());
  return std::isfinite(f0) && fg.verdict != FgVerdict::violated ? kPass : kFail;
}

struct TransformArgs {
  std::vector<double> phi;
  std::vector<double> phi_inv;
};

inline int cmd_transform(RunConfig& cfg, const TransformArgs& a, std::ostream& out) {
  const GSpec gs = cfg.g();
  const json& tr = cfg.at("transform");
  const double t_min = tr["t_min"].get<double>(), t_max = tr["t_max"].get<double>();
  const double quad_tol = tr["quad_tol"].get<double>();
  detail::write_resolved(cfg);
  const TransformTable tbl = TransformTable::build(gs, t_min, t_max, quad_tol);
  for (double t : a.phi)
    if (!(t >= tbl.t_min() && t <= tbl.t_max()))
      throw ConfigError("--phi " + detail::fmt("%.17g", t) + " is outside [t_min, t_max]");
  for (double s : a.phi_inv)
    if (!(s >= tbl.phi_min() && s <= tbl.phi_max()))
      throw ConfigError("--phi-inv " + detail::fmt("%.17g", s) + " is outside the table image [" +
                        detail::fmt("%.17g", tbl.phi_min()) + ", " + detail::fmt("%.17g", tbl.phi_max()) + "]");
  std::string queries = "kind,input,output\n";
  for (double t : a.phi) queries += "phi," + detail::fmt("%.17g", t) + "," + detail::fmt("%.17g", tbl.phi(t)) + "\n";
  for (double s : a.phi_inv)
    queries += "phi_inv," + detail::fmt("%.17g", s) + "," + detail::fmt("%.17g", tbl.phi_inv(s)) + "\n";
  out << "knots=" << tbl.knots().size() << " phi_min=" << detail::fmt("%.17g", tbl.phi_min())
      << " phi_max=" << detail::fmt("%.17g", tbl.phi_max()) << "\n";
  if (!a.phi.empty() || !a.phi_inv.empty()) out << queries;
  if (cfg.wants("csv")) {
    io::write_atomic(cfg.out_dir() / "transform.csv", tbl.to_csv());
    if (!a.phi.empty() || !a.phi_inv.empty()) io::write_atomic(cfg.out_dir() / "transform_queries.csv", queries);
  }
  return kPass;
}

// ---------------------------------------------------------------------------

namespace detail {

inline void add_common(CLI::App* app, CommonOptions& c) {
  app->add_option("--config", c.config, "JSON run configuration")->check(CLI::ExistingFile);
  app->add_option("--set", c.sets, "override a config key, e.g. --set grid.h=0.015625");
  app->add_option("--seed", c.seed, "random seed (overrides config seed)");
  app->add_option("--out", c.out, "output directory (overrides output.dir)");
}

inline RunConfig resolve(const CommonOptions& c) {
  std::optional<std::filesystem::path> file;
  if (!c.config.empty()) file = c.config;
  RunConfig cfg = RunConfig::resolve(file, c.sets);
  if (c.seed) cfg.doc()["seed"] = *c.seed;
  if (!c.out.empty()) cfg.doc()["output"]["dir"] = c.out;
  return cfg;
}

}  // namespace detail

/// Parses argv and runs one subcommand.
inline int run(int argc, const char* const* argv, std::ostream& out = std::cout, std::ostream& err = std::cerr) {
  CLI::App app{"ngt: natural gradient terms, the Phi_g change of variables and the infinity-Laplacian"};
  app.require_subcommand(1);
  app.set_help_all_flag("--help-all");

  CommonOptions common;
  CheckOperatorArgs chk;
  TransformArgs trf;
  std::string mode = "nonexistence";

  auto* c_check = app.add_subcommand("check-operator", "check (h1), (h2) and the natural term N of an operator");
  detail::add_common(c_check, common);
  c_check->add_option("--op", chk.op, "laplace | m-laplace:<m> | k-hessian:<k> | infinity | normalized-infinity");
  c_check->add_option("-n,--dim", chk.n, "space dimension");
  c_check->add_option("--samples", chk.samples, "random jets per check");

  auto* c_verify = app.add_subcommand("verify", "chain rule and invariance checks on manufactured solutions");
  detail::add_common(c_verify, common);

  auto* c_solve = app.add_subcommand("solve", "Dirichlet problem for Delta_inf u + g(u)|Du|^4 + f(x,u) = 0");
  detail::add_common(c_solve, common);

  auto* c_analyze = app.add_subcommand("analyze", "existence, nonexistence and uniqueness hypotheses");
  detail::add_common(c_analyze, common);
  c_analyze->add_option("--mode", mode, "nonexistence | existence-hypotheses | uniqueness");

  auto* c_transform = app.add_subcommand("transform", "tabulate Phi_g and answer phi / phi_inv queries");
  detail::add_common(c_transform, common);
  c_transform->add_option("--phi", trf.phi, "evaluate Phi_g(t)");
  c_transform->add_option("--phi-inv", trf.phi_inv, "evaluate Phi_g^{-1}(s)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::Success& e) {
    return app.exit(e, out, err);
  } catch (const CLI::ParseError& e) {
    app.exit(e, out, err);
    return kConfig;
  }

  std::optional<RunConfig> cfg;
  try {
    cfg.emplace(detail::resolve(common));
    if (c_check->parsed()) return cmd_check_operator(*cfg, chk, out);
    if (c_verify->parsed()) return cmd_verify(*cfg, out);
    if (c_solve->parsed()) return cmd_solve(*cfg, out);
    if (c_analyze->parsed()) return cmd_analyze(*cfg, mode, out);
    if (c_transform->parsed()) return cmd_transform(*cfg, trf, out);
  } catch (const ConfigError& e) {
    err << "config error: " << e.what() << "\n";
    return kConfig;
  } catch (const ParseError& e) {
    err << "config error: " << e.what() << "\n";
    return kConfig;
  } catch (const RangeError& e) {
    err << "range error: " << e.what() << "\n";
    return kConfig;
  } catch (const DimensionError& e) {
    err << "config error: " << e.what() << "\n";
    return kConfig;
  } catch (const Error& e) {
    err << "error: " << e.what() << "\n";
    return kFail;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kFail;
  }
  return kConfig;
}

}  // namespace ngt::cli
