#pragma once

// Hypothesis quantities of the Dirichlet problem for the infinity-Laplacian
// with gradient term: ell, the eta profile and its primitive H, zeta and its
// supremum S against the in-ball radius, the (fg) growth ratios, and the
// monotonicity test behind uniqueness. Suprema and infima over unbounded sets
// are truncated and reported as such.

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <functional>
#include <limits>
#include <memory>
#include <numbers>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "ngt/domain.hpp"
#include "ngt/error.hpp"
#include "ngt/expr.hpp"
#include "ngt/quadrature.hpp"
#include "ngt/transform.hpp"

namespace ngt {

struct AnalysisConfig {
  Expr f;
  GSpec g = GSpec::checked("0");
  Domain2D domain = Domain2D::disc(0, 0, 1);
  Expr b;
  double t_max = 50.0;
  double quad_tol = 1e-10;
  int boundary_samples = 512;
  int interior_side = 64;
  int s_samples = 512;
  int zeta_samples = 64;
};

namespace detail {

inline std::string fmt17(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

/// Cell-centred interior_side^2 lattice over the bounding box, kept inside the domain.
inline std::vector<Point> interior_points(const Domain2D& d, int side) {
  const auto box = d.bounding_box();
  std::vector<Point> pts;
  for (int j = 0; j < side; ++j)
    for (int i = 0; i < side; ++i) {
      const Point q{box[0] + (box[2] - box[0]) * (i + 0.5) / side, box[1] + (box[3] - box[1]) * (j + 0.5) / side};
      if (d.signed_distance(q) < 0.0) pts.push_back(q);
    }
  if (pts.empty()) pts.push_back(d.inball_center());
  return pts;
}

/// count offsets log-spaced on [1e-6 span, span] added to lo, preceded by lo itself.
inline std::vector<double> log_offsets(double lo, double hi, int count) {
  std::vector<double> s{lo};
  const double span = hi - lo;
  if (!(span > 0.0)) return s;
  for (int k = 0; k < count; ++k) {
    const double e = -6.0 * (1.0 - static_cast<double>(k) / std::max(1, count - 1));
    s.push_back(k + 1 == count ? hi : lo + span * std::pow(10.0, e));
  }
  return s;
}

}  // namespace detail

/// Shared evaluation context: compiled f and b, a transform table covering
/// [-t_max, t_max] and the boundary range of b, and the interior samples.
class AnalysisContext {
 public:
  explicit AnalysisContext(const AnalysisConfig& cfg)
      : cfg_(cfg), f_(cfg.f, coordinate_slots(2, true)), b_(cfg.b, coordinate_slots(2, false)) {
    if (!(cfg.t_max > 1.0)) throw ConfigError("analysis.t_max must exceed 1");
    if (cfg.boundary_samples < 8) throw ConfigError("analysis needs at least 8 boundary samples");
    if (cfg.interior_side < 1 || cfg.s_samples < 2 || cfg.zeta_samples < 2)
      throw ConfigError("analysis sample counts too small");
    double lo = 0.0, hi = 0.0;
    for (int i = 0; i < cfg.boundary_samples; ++i) {
      const double v = b_at(cfg.domain.boundary_point(static_cast<double>(i) / cfg.boundary_samples));
      lo = std::min(lo, v);
      hi = std::max(hi, v);
    }
    table_ = std::make_shared<const TransformTable>(
        TransformTable::build(cfg.g, std::min(-cfg.t_max, lo - 1.0), std::max(cfg.t_max, hi + 1.0), cfg.quad_tol));
    points_ = detail::interior_points(cfg.domain, cfg.interior_side);
  }

  const AnalysisConfig& config() const noexcept { return cfg_; }
  const TransformTable& table() const noexcept { return *table_; }
  const std::vector<Point>& points() const noexcept { return points_; }

  double b_at(Point q) const { return b_({q.x, q.y}); }
  double f_at(Point q, double t) const { return f_({q.x, q.y, t}); }

  /// Upper end of the s-range: Phi(t_max).
  double s_max() const { return table_->phi(cfg_.t_max); }

  /// inf over interior samples of exp(3 G(w)) f(x, w), w = Phi^{-1}(s).
  /// Negative f is a hypothesis violation.
  double h_inf(double s) const {
    const double w = table_->phi_inv(s);
    const double E = std::exp(3.0 * table_->G(w));
    double m = std::numeric_limits<double>::infinity();
    for (const Point& q : points_) {
      const double fv = f_at(q, w);
      if (std::isnan(fv)) throw EvalError("f is NaN at t = " + std::to_string(w));
      if (fv < 0.0)
        throw HypothesisError("f is negative at (" + std::to_string(q.x) + ", " + std::to_string(q.y) +
                              "), t = " + std::to_string(w) + "; nonexistence analysis needs f >= 0");
      m = std::min(m, E * fv);
    }
    return m;
  }

 private:
  AnalysisConfig cfg_;
  CompiledExpr f_;
  CompiledExpr b_;
  std::shared_ptr<const TransformTable> table_;
  std::vector<Point> points_;
};

/// ell = inf over the boundary of Phi_g(b): dense sampling, then golden-section
/// refinement on the arc around the minimizing sample.
inline double compute_ell(const AnalysisContext& ctx) {
  const auto& cfg = ctx.config();
  const Domain2D& d = cfg.domain;
  const TransformTable& tbl = ctx.table();
  auto F = [&](double th) { return tbl.phi(ctx.b_at(d.boundary_point(th))); };
  const int n = cfg.boundary_samples;
  int best = 0;
  double fbest = std::numeric_limits<double>::infinity();
  for (int i = 0; i < n; ++i) {
    const double v = F(static_cast<double>(i) / n);
    if (v < fbest) {
      fbest = v;
      best = i;
    }
  }
  double a = static_cast<double>(best - 1) / n, c = static_cast<double>(best + 1) / n;
  const double r = (std::sqrt(5.0) - 1.0) / 2.0;
  double x1 = c - r * (c - a), x2 = a + r * (c - a);
  double f1 = F(x1), f2 = F(x2);
  for (int it = 0; it < 80; ++it) {
    if (f1 < f2) {
      c = x2;
      x2 = x1;
      f2 = f1;
      x1 = c - r * (c - a);
      f1 = F(x1);
    } else {
      a = x1;
      x1 = x2;
      f1 = f2;
      x2 = a + r * (c - a);
      f2 = F(x2);
    }
  }
  return std::min({fbest, f1, f2});
}

inline double compute_ell(const AnalysisConfig& cfg) { return compute_ell(AnalysisContext(cfg)); }

/// eta(t) = inf over interior samples x and s in [t, Phi(t_max)] (s_samples
/// log-spaced offsets plus s = t) of exp(3 G(Phi^{-1}(s))) f(x, Phi^{-1}(s)).
inline double compute_eta(const AnalysisContext& ctx, double t) {
  const double smax = ctx.s_max();
  if (!(t <= smax)) throw RangeError("compute_eta: t = " + std::to_string(t) + " beyond the truncation Phi(t_max)");
  double m = std::numeric_limits<double>::infinity();
  for (double s : detail::log_offsets(t, smax, ctx.config().s_samples)) m = std::min(m, ctx.h_inf(s));
  return m;
}

inline double compute_eta(const AnalysisConfig& cfg, double t) { return compute_eta(AnalysisContext(cfg), t); }

// ---------------------------------------------------------------------------
// zeta

/// eta with its definite integral; the integral over short intervals must be
/// accurate in the relative sense.
struct EtaModel {
  std::function<double(double)> eta;
  std::function<double(double, double)> integral;
};

/// Model for an eta given in closed form; integrals by composite Gauss-Legendre
/// with panel doubling.
inline EtaModel eta_model(std::function<double(double)> eta) {
  EtaModel m;
  m.eta = eta;
  m.integral = [eta](double t, double a) {
    double prev = quad::gauss(eta, t, a);
    for (int panels = 2; panels <= 512; panels *= 2) {
      const double next = quad::gauss_composite(eta, t, a, panels);
      if (std::fabs(next - prev) <= 1e-15 * std::fabs(next)) return next;
      prev = next;
    }
    return prev;
  };
  return m;
}

/// Piecewise-linear eta through samples, with H(t) = int_ell^t eta accumulated
/// by adaptive Simpson on each sample interval (relative tolerance).
class SampledEta {
 public:
  SampledEta(std::vector<double> t, std::vector<double> eta, double tol) : t_(std::move(t)), eta_(std::move(eta)) {
    if (t_.size() < 2 || t_.size() != eta_.size()) throw RangeError("SampledEta needs at least two samples");
    H_.assign(t_.size(), 0.0);
    for (std::size_t k = 0; k + 1 < t_.size(); ++k) {
      if (!(t_[k + 1] > t_[k])) throw RangeError("SampledEta: nodes must increase");
      const double scale = 0.5 * (t_[k + 1] - t_[k]) * (std::fabs(eta_[k]) + std::fabs(eta_[k + 1]));
      H_[k + 1] = H_[k] + quad::adaptive_simpson([&](double s) { return at(k, s); }, t_[k], t_[k + 1],
                                                 tol * std::max(scale, std::numeric_limits<double>::min()))
                              .value;
    }
  }

  double operator()(double s) const {
    const std::size_t k = interval(s);
    const double u = (s - t_[k]) / (t_[k + 1] - t_[k]);
    return eta_[k] + u * (eta_[k + 1] - eta_[k]);
  }

  double H(double s) const {
    const std::size_t k = interval(s);
    return H_[k] + piece(k, t_[k], s);
  }

  /// int_t^a eta, exact for the piecewise-linear model.
  double integral(double t, double a) const {
    const std::size_t i = interval(t), j = interval(a);
    if (i == j) return piece(i, t, a);
    return piece(i, t, t_[i + 1]) + (H_[j] - H_[i + 1]) + piece(j, t_[j], a);
  }

  EtaModel model() const {
    return {[this](double s) { return (*this)(s); }, [this](double t, double a) { return integral(t, a); }};
  }

  const std::vector<double>& nodes() const noexcept { return t_; }
  const std::vector<double>& values() const noexcept { return eta_; }
  const std::vector<double>& H_nodes() const noexcept { return H_; }
  double front() const noexcept { return t_.front(); }
  double back() const noexcept { return t_.back(); }

 private:
  std::size_t interval(double s) const {
    if (!(s >= t_.front() && s <= t_.back())) throw RangeError("eta profile queried outside its sampled range");
    std::size_t k = static_cast<std::size_t>(std::upper_bound(t_.begin(), t_.end(), s) - t_.begin());
    return k == 0 ? 0 : std::min(k - 1, t_.size() - 2);
  }

  double piece(std::size_t k, double a, double b) const {
    return 0.5 * (b - a) * ((*this).at(k, a) + at(k, b));
  }

  double at(std::size_t k, double s) const {
    const double u = (s - t_[k]) / (t_[k + 1] - t_[k]);
    return eta_[k] + u * (eta_[k + 1] - eta_[k]);
  }

  std::vector<double> t_;
  std::vector<double> eta_;
  std::vector<double> H_;
};

struct ZetaResult {
  double value = 0.0;
  bool diverged = false;
};

/// zeta(a) = int_ell^a (H(a) - H(t))^(-1/4) dt after t = a - tau^4, which turns
/// the integrand into 4 tau^3 (int_{a - tau^4}^a eta)^(-1/4), bounded at tau = 0.
/// Composite Gauss-Legendre on tau with panel doubling to tol.
inline ZetaResult compute_zeta(const EtaModel& m, double ell, double a, double tol) {
  ZetaResult r;
  if (!(a > ell)) return r;
  const double T = std::pow(a - ell, 0.25);
  const double eta_a = m.eta(a);
  auto q = [&](double tau) {
    const double d = tau * tau * tau * tau;
    if (d == 0.0) return 0.0;
    double I;
    if (d <= 1e-13 * std::max(1.0, std::fabs(a)))
      I = eta_a * d;
    else
      I = m.integral(a - d, a);
    if (!(I > 0.0)) {
      r.diverged = true;
      return 0.0;
    }
    return 4.0 * tau * tau * tau / std::sqrt(std::sqrt(I));
  };
  double prev = quad::gauss(q, 0.0, T);
  for (int panels = 2; panels <= 4096; panels *= 2) {
    const double next = quad::gauss_composite(q, 0.0, T, panels);
    const bool done = std::fabs(next - prev) <= tol * std::max(1.0, std::fabs(next));
    prev = next;
    if (done) break;
  }
  r.value = r.diverged ? std::numeric_limits<double>::infinity() : prev;
  return r;
}

// ---------------------------------------------------------------------------
// Nonexistence report

enum class Verdict { nonexistence_triggered, inconclusive };

inline const char* verdict_name(Verdict v) {
  return v == Verdict::nonexistence_triggered ? "nonexistence_triggered" : "inconclusive";
}

struct NonexistenceReport {
  double ell = 0.0;
  double t_max = 0.0;
  /// Largest s of the eta profile (Phi(t_max), or earlier if eta overflows).
  double s_frontier = 0.0;
  std::vector<std::pair<double, double>> eta_samples;
  std::vector<std::pair<double, double>> H_table;
  bool eta0_pass = false;
  std::vector<std::pair<double, double>> zeta_samples;
  double S = 0.0;
  double a_star = 0.0;
  bool sup_attained_interior = false;
  bool zeta_diverged = false;
  double R = 0.0;
  Verdict verdict = Verdict::inconclusive;
  std::string reason;

  std::string to_text() const {
    using detail::fmt17;
    std::string out;
    out += "[ELL]\nell = " + fmt17(ell) + "\n\n";
    out += "[ETA]\ntruncation t_max = " + fmt17(t_max) + "\ns_frontier = " + fmt17(s_frontier) + "\n";
    out += "samples = " + std::to_string(eta_samples.size()) + "\neta0_spot_check = " + (eta0_pass ? "pass" : "fail") + "\n";
    const std::size_t stride = std::max<std::size_t>(1, eta_samples.size() / 32);
    for (std::size_t i = 0; i < eta_samples.size(); i += stride)
      out += fmt17(eta_samples[i].first) + " " + fmt17(eta_samples[i].second) + "\n";
    out += "\n[H]\n";
    for (std::size_t i = 0; i < H_table.size(); i += stride)
      out += fmt17(H_table[i].first) + " " + fmt17(H_table[i].second) + "\n";
    out += "\n[ZETA]\n";
    for (const auto& [a, z] : zeta_samples) out += fmt17(a) + " " + fmt17(z) + "\n";
    out += "\n[S]\nS = " + fmt17(S) + "\na_star = " + fmt17(a_star) +
           "\nsup_attained_interior = " + (sup_attained_interior ? "true" : "false") +
           "\nzeta_diverged = " + (zeta_diverged ? "true" : "false") + "\n";
    out += "\n[R]\nR = " + fmt17(R) + "\nS_over_sqrt2 = " + fmt17(S / std::numbers::sqrt2) + "\n";
    out += "\n[VERDICT]\n" + std::string(verdict_name(verdict)) + "\nreason = " + reason + "\n";
    return out;
  }

  std::string eta_csv() const {
    std::string out = "t,eta,H\n";
    for (std::size_t i = 0; i < eta_samples.size(); ++i)
      out += detail::fmt17(eta_samples[i].first) + "," + detail::fmt17(eta_samples[i].second) + "," +
             detail::fmt17(H_table[i].second) + "\n";
    return out;
  }

  std::string zeta_csv() const {
    std::string out = "a,zeta\n";
    for (const auto& [a, z] : zeta_samples) out += detail::fmt17(a) + "," + detail::fmt17(z) + "\n";
    return out;
  }
};

namespace detail {

// Profile nodes: log-spaced offsets over [ell, s_max] plus a uniform layer on
// the first 32 units where zeta is decided.
inline std::vector<double> eta_nodes(double ell, double smax, int log_count) {
  std::vector<double> s = log_offsets(ell, smax, log_count);
  const double fine_end = std::min(smax, ell + 32.0);
  constexpr int kFine = 2048;
  for (int k = 1; k <= kFine; ++k) s.push_back(ell + (fine_end - ell) * k / kFine);
  std::sort(s.begin(), s.end());
  s.erase(std::unique(s.begin(), s.end(), [](double x, double y) { return std::fabs(x - y) <= 1e-12 * (1 + std::fabs(x)); }),
          s.end());
  return s;
}

}  // namespace detail

/// Samples the eta profile (suffix minima of the x-infimum over the s-nodes),
/// checks (eta0), builds H, scans zeta on log-spaced a and compares S with the
/// in-ball radius. The verdict triggers only when the zeta maximum is interior
/// to the scan; a maximum on the frontier leaves S unbounded by the data.
inline NonexistenceReport compute_S_and_verdict(const AnalysisContext& ctx) {
  const auto& cfg = ctx.config();
  NonexistenceReport rep;
  rep.t_max = cfg.t_max;
  rep.R = cfg.domain.inball_radius();
  rep.ell = compute_ell(ctx);
  const double smax = ctx.s_max();
  if (!(smax > rep.ell)) throw RangeError("analysis: Phi(t_max) does not exceed ell; raise t_max");

  std::vector<double> s = detail::eta_nodes(rep.ell, smax, cfg.s_samples);
  std::vector<double> m(s.size());
  for (std::size_t k = 0; k < s.size(); ++k) m[k] = ctx.h_inf(s[k]);
  for (std::size_t k = s.size() - 1; k-- > 0;) m[k] = std::min(m[k], m[k + 1]);
  // keep the part of the profile where eta and its integral stay finite
  std::size_t keep = 1;
  double Hrough = 0.0;
  while (keep < s.size() && std::isfinite(m[keep])) {
    Hrough += 0.5 * (s[keep] - s[keep - 1]) * (m[keep] + m[keep - 1]);
    if (!(Hrough < 1e280)) break;
    ++keep;
  }
  if (keep < 2) throw RangeError("analysis: eta profile is not finite next to ell");
  s.resize(keep);
  m.resize(keep);
  rep.s_frontier = s.back();

  rep.eta0_pass = true;
  for (std::size_t k = 1; k < s.size(); ++k)
    if (!(m[k] > 0.0)) rep.eta0_pass = false;

  SampledEta prof(s, m, cfg.quad_tol);
  for (std::size_t k = 0; k < s.size(); ++k) {
    rep.eta_samples.emplace_back(s[k], m[k]);
    rep.H_table.emplace_back(s[k], prof.H_nodes()[k]);
  }
  if (!rep.eta0_pass) {
    rep.reason = "(eta0) fails: eta vanishes at a sampled t > ell";
    return rep;
  }

  const EtaModel model = prof.model();
  const double span = rep.s_frontier - rep.ell;
  auto zeta_at = [&](double a) {
    const ZetaResult z = compute_zeta(model, rep.ell, a, cfg.quad_tol);
    rep.zeta_diverged = rep.zeta_diverged || z.diverged;
    return z.value;
  };
  const int nz = cfg.zeta_samples;
  std::size_t best = 0;
  for (int k = 0; k < nz; ++k) {
    const double a = rep.ell + span * std::pow(10.0, -4.0 * (1.0 - static_cast<double>(k) / (nz - 1)));
    rep.zeta_samples.emplace_back(a, zeta_at(a));
    if (rep.zeta_samples.back().second > rep.zeta_samples[best].second) best = rep.zeta_samples.size() - 1;
  }
  rep.S = rep.zeta_samples[best].second;
  rep.a_star = rep.zeta_samples[best].first;
  rep.sup_attained_interior = best + 1 < rep.zeta_samples.size() && best > 0;
  if (rep.sup_attained_interior) {
    // golden-section refinement between the neighbouring samples
    double lo = rep.zeta_samples[best - 1].first, hi = rep.zeta_samples[best + 1].first;
    const double r = (std::sqrt(5.0) - 1.0) / 2.0;
    double x1 = hi - r * (hi - lo), x2 = lo + r * (hi - lo);
    double f1 = zeta_at(x1), f2 = zeta_at(x2);
    for (int it = 0; it < 40; ++it) {
      if (f1 > f2) {
        hi = x2;
        x2 = x1;
        f2 = f1;
        x1 = hi - r * (hi - lo);
        f1 = zeta_at(x1);
      } else {
        lo = x1;
        x1 = x2;
        f1 = f2;
        x2 = lo + r * (hi - lo);
        f2 = zeta_at(x2);
      }
    }
    if (std::max(f1, f2) > rep.S) {
      rep.S = std::max(f1, f2);
      rep.a_star = f1 > f2 ? x1 : x2;
    }
  }

  if (rep.zeta_diverged) {
    rep.reason = "zeta diverged: eta vanishes on a subinterval";
  } else if (!rep.sup_attained_interior) {
    rep.reason = "zeta maximum sits on the scan boundary; S is only a lower bound and (eta1) is not established";
  } else if (rep.R > rep.S / std::numbers::sqrt2) {
    rep.verdict = Verdict::nonexistence_triggered;
    rep.reason = "R > S/sqrt(2) with (eta0) and an interior zeta maximum";
  } else {
    rep.reason = "R <= S/sqrt(2)";
  }
  return rep;
}

inline NonexistenceReport compute_S_and_verdict(const AnalysisConfig& cfg) {
  return compute_S_and_verdict(AnalysisContext(cfg));
}

// ---------------------------------------------------------------------------
// (fg) growth ratios

enum class Trend { increasing, decreasing, oscillating };
enum class FgVerdict { plausibly_satisfied, violated, inconclusive };

inline const char* trend_name(Trend t) {
  switch (t) {
    case Trend::increasing: return "increasing";
    case Trend::decreasing: return "decreasing";
    default: return "oscillating";
  }
}

inline const char* fg_verdict_name(FgVerdict v) {
  switch (v) {
    case FgVerdict::plausibly_satisfied: return "plausibly_satisfied";
    case FgVerdict::violated: return "violated";
    default: return "inconclusive";
  }
}

struct FgLimitReport {
  /// (t, r(t)) for t -> +inf: sup_x exp(3G(t)) f(x,t) / Phi(t)^3.
  std::vector<std::pair<double, double>> upper;
  /// (t, r(t)) for t -> -inf: inf_x exp(3G(t)) f(x,t) / Phi(t)^3.
  std::vector<std::pair<double, double>> lower;
  double nu_hat = 0.0;
  double xi_hat = 0.0;
  Trend trend_upper = Trend::oscillating;
  Trend trend_lower = Trend::oscillating;
  FgVerdict verdict = FgVerdict::inconclusive;
  double t_frontier = 0.0;

  std::string to_text() const {
    using detail::fmt17;
    std::string out = "[FG]\nheuristic = true\nt_frontier = " + fmt17(t_frontier) + "\nnu_hat = " + fmt17(nu_hat) +
                      "\nxi_hat = " + fmt17(xi_hat) + "\ntrend_upper = " + trend_name(trend_upper) +
                      "\ntrend_lower = " + trend_name(trend_lower) + "\nverdict = " + fg_verdict_name(verdict) + "\n";
    return out;
  }

  std::string to_csv() const {
    std::string out = "t,ratio\n";
    for (auto it = lower.rbegin(); it != lower.rend(); ++it)
      out += detail::fmt17(it->first) + "," + detail::fmt17(it->second) + "\n";
    for (const auto& [t, r] : upper) out += detail::fmt17(t) + "," + detail::fmt17(r) + "\n";
    return out;
  }
};

namespace detail {

inline Trend trend_of(const std::vector<double>& r) {
  bool up = true, down = true;
  for (std::size_t i = 1; i < r.size(); ++i) {
    if (r[i] < r[i - 1]) up = false;
    if (r[i] > r[i - 1]) down = false;
  }
  if (up && down) return Trend::decreasing;  // flat
  if (up) return Trend::increasing;
  if (down) return Trend::decreasing;
  return Trend::oscillating;
}

}  // namespace detail

/// Ratios on 64 log-spaced |t| in [1, t_max] on each side. `violated` needs
/// the ratio above 1e-6 on the whole last decade of either side;
/// `plausibly_satisfied` needs it at most 1e-6 on both last decades.
inline FgLimitReport check_fg_limits(const AnalysisContext& ctx) {
  const auto& cfg = ctx.config();
  const TransformTable& tbl = ctx.table();
  constexpr int kProbe = 64;
  constexpr double kEps = 1e-6;
  FgLimitReport rep;
  rep.t_frontier = cfg.t_max;
  std::vector<double> last_up, last_lo;
  for (int k = 0; k < kProbe; ++k) {
    const double t = std::pow(cfg.t_max, static_cast<double>(k) / (kProbe - 1));
    for (int side = 0; side < 2; ++side) {
      const double tt = side == 0 ? t : -t;
      const double E = std::exp(3.0 * tbl.G(tt));
      const double P = tbl.phi(tt);
      double ext = side == 0 ? -std::numeric_limits<double>::infinity() : std::numeric_limits<double>::infinity();
      for (const Point& q : ctx.points()) {
        const double v = E * ctx.f_at(q, tt);
        if (std::isnan(v)) throw EvalError("f is NaN at t = " + std::to_string(tt));
        ext = side == 0 ? std::max(ext, v) : std::min(ext, v);
      }
      double r = ext / (P * P * P);
      if (std::isnan(r)) r = 0.0;  // 0/0 and inf/inf are excluded by |t| >= 1 in exact arithmetic
      (side == 0 ? rep.upper : rep.lower).emplace_back(tt, r);
      if (t >= cfg.t_max / 10.0) (side == 0 ? last_up : last_lo).push_back(r);
    }
  }
  rep.nu_hat = rep.upper.back().second;
  rep.xi_hat = rep.lower.back().second;
  rep.trend_upper = detail::trend_of(last_up);
  rep.trend_lower = detail::trend_of(last_lo);
  auto all_above = [&](const std::vector<double>& r) {
    return std::all_of(r.begin(), r.end(), [&](double x) { return x > kEps; });
  };
  auto all_below = [&](const std::vector<double>& r) {
    return std::all_of(r.begin(), r.end(), [&](double x) { return x <= kEps; });
  };
  if (all_above(last_up) || all_above(last_lo))
    rep.verdict = FgVerdict::violated;
  else if (all_below(last_up) && all_below(last_lo))
    rep.verdict = FgVerdict::plausibly_satisfied;
  return rep;
}

inline FgLimitReport check_fg_limits(const AnalysisConfig& cfg) { return check_fg_limits(AnalysisContext(cfg)); }

/// sup |f| over interior samples x [-t_f0, t_f0]: a finite spot check of (f0).
inline double f0_bound(const AnalysisContext& ctx, double t_f0 = 10.0) {
  double m = 0.0;
  constexpr int kT = 201;
  for (int k = 0; k < kT; ++k) {
    const double t = -t_f0 + 2.0 * t_f0 * k / (kT - 1);
    for (const Point& q : ctx.points()) m = std::max(m, std::fabs(ctx.f_at(q, t)));
  }
  return m;
}

// ---------------------------------------------------------------------------
// Uniqueness

struct UniquenessReport {
  bool monotone = true;
  std::optional<double> witness;
  /// max over samples of d/dt [fbar(t) exp(3G(t))]
  double max_derivative = -std::numeric_limits<double>::infinity();
  double t_lo = 0.0;
  double t_hi = 0.0;
  int samples = 0;

  std::string to_text() const {
    using detail::fmt17;
    return "[UNIQUENESS]\nrange = [" + fmt17(t_lo) + ", " + fmt17(t_hi) + "]\nsamples = " + std::to_string(samples) +
           "\nmax_derivative = " + fmt17(max_derivative) + "\nmonotone_nonincreasing = " + (monotone ? "true" : "false") +
           "\nwitness = " + (witness ? fmt17(*witness) : std::string("none")) + "\n";
  }
};

/// d/dt [fbar e^{3G}] = e^{3G} (fbar' + 3 g fbar), formed symbolically and
/// sampled on 1e4 points of [t_lo, t_hi].
inline UniquenessReport check_uniqueness_hypothesis(const Expr& fbar, const GSpec& gs, double t_lo, double t_hi) {
  for (const auto& v : free_variables(fbar))
    if (v != "t") throw ConfigError("uniqueness check needs f independent of x (found '" + v + "')");
  if (!(t_lo < t_hi)) throw RangeError("uniqueness probe range is empty");
  const Expr inner = sym::add(differentiate(fbar, "t"), sym::mul(sym::mul(sym::c(3.0), gs.g()), fbar));
  const CompiledExpr d(inner, {"t"});
  const TransformTable tbl = TransformTable::build(gs, std::min(t_lo, 0.0) - 1.0, std::max(t_hi, 0.0) + 1.0);
  UniquenessReport rep;
  rep.t_lo = t_lo;
  rep.t_hi = t_hi;
  constexpr int kSamples = 10000;
  for (int i = 0; i < kSamples; ++i) {
    const double t = t_lo + (t_hi - t_lo) * i / (kSamples - 1);
    const double val = std::exp(3.0 * tbl.G(t)) * d({t});
    rep.max_derivative = std::max(rep.max_derivative, val);
    if (val > 1e-10 && rep.monotone) {
      rep.monotone = false;
      rep.witness = t;
    }
  }
  rep.samples = kSamples;
  return rep;
}

}  // namespace ngt
