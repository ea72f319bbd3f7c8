#pragma once

// The change of variables Phi_g(t) = int_0^t exp(G), G(t) = int_0^t g,
// realized as a knot table with Gauss-Legendre corrections between knots,
// plus the transformed reaction term and field push/pull helpers.

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "ngt/error.hpp"
#include "ngt/expr.hpp"
#include "ngt/operators.hpp"
#include "ngt/quadrature.hpp"

namespace ngt {

/// g together with the threshold s0 of its sign condition.
class GSpec {
 public:
  /// Sign-checked spec: g >= -1e-12 on [s0, s0 + t_check], g <= 1e-12 on
  /// [-s0 - t_check, -s0], sampled on 1e4 points each.
  static GSpec checked(Expr g, double s0 = 0.0, double t_check = 50.0) {
    GSpec gs(std::move(g), s0, t_check, true);
    gs.validate();
    return gs;
  }

  static GSpec checked(std::string_view g, double s0 = 0.0, double t_check = 50.0) {
    return checked(parse(g), s0, t_check);
  }

  /// Spec for a g that is only used on a bounded range (Phi_g need not be
  /// onto R). Only the variable set is checked.
  static GSpec local(Expr g) {
    GSpec gs(std::move(g), 0.0, 0.0, false);
    gs.validate();
    return gs;
  }

  static GSpec local(std::string_view g) { return local(parse(g)); }

  const Expr& g() const noexcept { return g_; }
  double s0() const noexcept { return s0_; }
  double t_check() const noexcept { return t_check_; }
  bool sign_checked() const noexcept { return sign_checked_; }
  bool is_zero() const noexcept { return g_.is_constant(0.0); }

 private:
  GSpec(Expr g, double s0, double t_check, bool sign_checked)
      : g_(std::move(g)), s0_(s0), t_check_(t_check), sign_checked_(sign_checked) {}

  void validate() const {
    for (const auto& v : free_variables(g_))
      if (v != "t") throw ConfigError("g may only depend on t (found '" + v + "')");
    if (!sign_checked_) return;
    if (!(s0_ >= 0.0) || !std::isfinite(s0_)) throw ConfigError("g.s0 must be a finite value >= 0");
    if (!(t_check_ > 0.0)) throw ConfigError("sign check window must be positive");
    CompiledExpr g(g_, {"t"});
    constexpr int kSamples = 10000;
    for (int side = 0; side < 2; ++side) {
      for (int i = 0; i < kSamples; ++i) {
        const double off = s0_ + t_check_ * i / (kSamples - 1);
        const double t = side == 0 ? off : -off;
        double v = 0.0;
        try {
          v = g({t});
        } catch (const EvalError& e) {
          throw ConfigError(std::string("g not evaluable at t = ") + std::to_string(t) + ": " + e.what());
        }
        if (!std::isfinite(v)) throw ConfigError("g is not finite at t = " + std::to_string(t));
        if (side == 0 ? v < -1e-12 : v > 1e-12)
          throw ConfigError("sign condition violated: g(" + std::to_string(t) + ") = " + std::to_string(v) +
                            (side == 0 ? " < 0 beyond s0" : " > 0 below -s0"));
      }
    }
  }

  Expr g_;
  double s0_;
  double t_check_;
  bool sign_checked_;
};

/// Phi_g on a working interval [t_min, t_max] containing 0.
class TransformTable {
 public:
  static TransformTable build(const GSpec& gs, double t_min, double t_max, double quad_tol = 1e-10) {
    if (!(t_min < 0.0 && 0.0 < t_max)) throw RangeError("transform table needs t_min < 0 < t_max");
    if (!(quad_tol > 0.0)) throw RangeError("quad_tol must be positive");
    TransformTable tbl(gs, t_min, t_max, quad_tol);
    tbl.build_knots();
    return tbl;
  }

  const GSpec& g_spec() const noexcept { return gs_; }
  double t_min() const noexcept { return t_min_; }
  double t_max() const noexcept { return t_max_; }
  double quad_tol() const noexcept { return tol_; }
  double phi_min() const noexcept { return phi_.front(); }
  double phi_max() const noexcept { return phi_.back(); }
  bool is_identity() const noexcept { return identity_; }

  std::span<const double> knots() const noexcept { return t_; }
  std::span<const double> G_knots() const noexcept { return G_; }
  std::span<const double> phi_knots() const noexcept { return phi_; }

  double g(double t) const { return identity_ ? 0.0 : g_({t}); }

  double G(double t) const {
    check_t(t);
    if (identity_) return 0.0;
    const std::size_t i = interval_of(t);
    return G_local(i, t);
  }

  double phi(double t) const {
    check_t(t);
    if (identity_) return t;
    const std::size_t i = interval_of(t);
    return phi_local(i, t);
  }

  double phi_prime(double t) const { return std::exp(G(t)); }
  double phi_second(double t) const { return g(t) * phi_prime(t); }

  /// Inverse by bracketed Newton with bisection fallback.
  double phi_inv(double s) const {
    if (!(s >= phi_.front() && s <= phi_.back()))
      throw RangeError("phi_inv argument " + std::to_string(s) + " outside table range [" +
                       std::to_string(phi_.front()) + ", " + std::to_string(phi_.back()) + "]");
    if (identity_) return s;
    std::size_t i = static_cast<std::size_t>(std::upper_bound(phi_.begin(), phi_.end(), s) - phi_.begin());
    i = i == 0 ? 0 : std::min(i - 1, t_.size() - 2);
    double lo = t_[i];
    double hi = t_[i + 1];
    if (s == phi_[i]) return lo;
    if (s == phi_[i + 1]) return hi;
    double t = lo + (hi - lo) * (s - phi_[i]) / (phi_[i + 1] - phi_[i]);
    for (int it = 0; it < 100; ++it) {
      const double r = phi_local(i, t) - s;
      if (r == 0.0) return t;
      if (r > 0.0)
        hi = t;
      else
        lo = t;
      double next = t - r / std::exp(G_local(i, t));
      if (!(next > lo && next < hi)) next = 0.5 * (lo + hi);
      const double step = std::fabs(next - t);
      t = next;
      if (step <= 1e-15 * (1.0 + std::fabs(t)) || hi - lo <= 1e-15 * (1.0 + std::fabs(t))) break;
    }
    return t;
  }

  /// Columns t, G, Phi, Phi_prime at every knot, 17 significant digits.
  std::string to_csv() const {
    std::string out = "t,G,Phi,Phi_prime\n";
    char buf[128];
    for (std::size_t i = 0; i < t_.size(); ++i) {
      std::snprintf(buf, sizeof buf, "%.17g,%.17g,%.17g,%.17g\n", t_[i], G_[i], phi_[i], std::exp(G_[i]));
      out += buf;
    }
    return out;
  }

 private:
  TransformTable(const GSpec& gs, double t_min, double t_max, double tol)
      : gs_(gs), t_min_(t_min), t_max_(t_max), tol_(tol), identity_(gs.is_zero()) {
    if (!identity_) g_ = CompiledExpr(gs.g(), {"t"});
  }

  static constexpr double kMaxWidth = 0.25;
  static constexpr int kMaxDepth = 40;

  GSpec gs_;
  CompiledExpr g_;
  double t_min_;
  double t_max_;
  double tol_;
  bool identity_;
  std::vector<double> t_;
  std::vector<double> G_;
  std::vector<double> phi_;

  void check_t(double t) const {
    if (!(t >= t_min_ && t <= t_max_))
      throw RangeError("t = " + std::to_string(t) + " outside table range [" + std::to_string(t_min_) + ", " +
                       std::to_string(t_max_) + "]");
  }

  std::size_t interval_of(double t) const {
    std::size_t i = static_cast<std::size_t>(std::upper_bound(t_.begin(), t_.end(), t) - t_.begin());
    return i == 0 ? 0 : std::min(i - 1, t_.size() - 2);
  }

  double g_checked(double t) const {
    double v = 0.0;
    try {
      v = g_({t});
    } catch (const EvalError& e) {
      throw QuadratureError(std::string("g not evaluable at t = ") + std::to_string(t) + ": " + e.what());
    }
    if (!std::isfinite(v)) throw QuadratureError("g is not finite at t = " + std::to_string(t));
    return v;
  }

  // G(s) from an anchor (a, Ga)
  double G_from(double a, double Ga, double s) const {
    return Ga + quad::gauss([this](double u) { return g_checked(u); }, a, s);
  }

  double exp_G_integral(double a, double Ga, double b) const {
    return quad::gauss([&](double s) { return std::exp(G_from(a, Ga, s)); }, a, b);
  }

  double G_local(std::size_t i, double t) const { return G_from(t_[i], G_[i], t); }
  double phi_local(std::size_t i, double t) const { return phi_[i] + exp_G_integral(t_[i], G_[i], t); }

  struct Piece {
    double a, b, Ga, dG, dPhi;
  };

  // Splits [a, b] until one Gauss panel agrees with two half panels for both
  // G and Phi. `a` is always the anchor with known G.
  void refine(double a, double b, double Ga, int depth, std::vector<Piece>& out) const {
    const double m = 0.5 * (a + b);
    const double dG = quad::gauss([this](double u) { return g_checked(u); }, a, b);
    const double Gm = G_from(a, Ga, m);
    const double dG2 = (Gm - Ga) + quad::gauss([this](double u) { return g_checked(u); }, m, b);
    const double dPhi = exp_G_integral(a, Ga, b);
    const double dPhi2 = exp_G_integral(a, Ga, m) + exp_G_integral(m, Gm, b);
    if (!std::isfinite(dPhi) || !std::isfinite(dPhi2))
      throw QuadratureError("exp(G) overflows near t = " + std::to_string(b) + "; shrink the table range");
    const bool ok = std::fabs(dG - dG2) <= tol_ * std::max(1.0, std::fabs(dG2)) &&
                    std::fabs(dPhi - dPhi2) <= tol_ * std::fabs(dPhi2);
    if (ok || depth >= kMaxDepth) {
      if (!ok) throw QuadratureError("transform table refinement failed near t = " + std::to_string(a));
      out.push_back({a, b, Ga, dG, dPhi});
      return;
    }
    refine(a, m, Ga, depth + 1, out);
    refine(m, b, Gm, depth + 1, out);
  }

  void build_knots() {
    if (identity_) {
      t_ = {t_min_, 0.0, t_max_};
      G_ = {0.0, 0.0, 0.0};
      phi_ = {t_min_, 0.0, t_max_};
      return;
    }
    // positive side, anchored at the left end of each piece
    std::vector<double> tp{0.0}, Gp{0.0}, Pp{0.0};
    for (double a = 0.0; a < t_max_;) {
      const double b = std::min(a + kMaxWidth, t_max_);
      std::vector<Piece> pieces;
      refine(a, b, Gp.back(), 0, pieces);
      for (const auto& pc : pieces) {
        tp.push_back(pc.b);
        Gp.push_back(pc.Ga + pc.dG);
        Pp.push_back(Pp.back() + pc.dPhi);
      }
      a = b;
    }
    // negative side: the left knot of each piece becomes its anchor
    std::vector<double> tn, Gn, Pn;
    double Ga = 0.0, Pa = 0.0;
    for (double a = 0.0; a > t_min_;) {
      const double b = std::max(a - kMaxWidth, t_min_);
      const double Gb = Ga - quad::gauss([this](double u) { return g_checked(u); }, b, a);
      std::vector<Piece> pieces;
      refine(b, a, Gb, 0, pieces);
      // pieces are ordered left to right with anchors chained from Gb
      double total = 0.0;
      for (const auto& pc : pieces) total += pc.dPhi;
      double P = Pa - total;
      std::vector<double> lt, lG, lP;
      for (const auto& pc : pieces) {
        lt.push_back(pc.a);
        lG.push_back(pc.Ga);
        lP.push_back(P);
        P += pc.dPhi;
      }
      for (std::size_t k = lt.size(); k-- > 0;) {
        tn.push_back(lt[k]);
        Gn.push_back(lG[k]);
        Pn.push_back(lP[k]);
      }
      Ga = Gb;
      Pa -= total;
      a = b;
    }
    t_.assign(tn.rbegin(), tn.rend());
    G_.assign(Gn.rbegin(), Gn.rend());
    phi_.assign(Pn.rbegin(), Pn.rend());
    t_.insert(t_.end(), tp.begin(), tp.end());
    G_.insert(G_.end(), Gp.begin(), Gp.end());
    phi_.insert(phi_.end(), Pp.begin(), Pp.end());
    for (std::size_t i = 1; i < phi_.size(); ++i)
      if (!(phi_[i] > phi_[i - 1])) throw QuadratureError("Phi table is not strictly increasing");
  }
};

/// Uniform-grid cubic Hermite model of s -> Phi^{-1}(s) and s -> exp(-G(Phi^{-1}(s))),
/// for inner loops that evaluate the inverse many times.
class InverseTable {
 public:
  InverseTable() = default;

  InverseTable(const TransformTable& tbl, double s_lo, double s_hi, int intervals = 4096)
      : s_lo_(s_lo), s_hi_(s_hi), n_(intervals) {
    if (!(s_lo < s_hi)) throw RangeError("InverseTable: empty range");
    if (s_lo < tbl.phi_min() || s_hi > tbl.phi_max())
      throw RangeError("InverseTable: range [" + std::to_string(s_lo) + ", " + std::to_string(s_hi) +
                       "] exceeds the transform table");
    ds_ = (s_hi - s_lo) / n_;
    const std::size_t m = static_cast<std::size_t>(n_) + 1;
    w_.resize(m);
    dw_.resize(m);
    e_.resize(m);
    de_.resize(m);
    for (std::size_t k = 0; k < m; ++k) {
      const double s = k + 1 == m ? s_hi : s_lo + ds_ * static_cast<double>(k);
      const double w = tbl.phi_inv(s);
      const double eneg = std::exp(-tbl.G(w));
      w_[k] = w;
      dw_[k] = eneg;
      e_[k] = eneg;
      de_[k] = -tbl.g(w) * eneg * eneg;
    }
  }

  struct Value {
    double w;        // Phi^{-1}(s)
    double exp_neg;  // exp(-G(w))
  };

  Value operator()(double s) const {
    if (!(s >= s_lo_ && s <= s_hi_))
      throw RangeError("InverseTable argument " + std::to_string(s) + " outside [" + std::to_string(s_lo_) + ", " +
                       std::to_string(s_hi_) + "]");
    const double x = (s - s_lo_) / ds_;
    std::size_t k = static_cast<std::size_t>(std::min(static_cast<double>(n_ - 1), std::floor(x)));
    const double u = x - static_cast<double>(k);
    return {hermite(w_, dw_, k, u), hermite(e_, de_, k, u)};
  }

  double s_lo() const noexcept { return s_lo_; }
  double s_hi() const noexcept { return s_hi_; }

 private:
  double s_lo_ = 0, s_hi_ = 0, ds_ = 1;
  int n_ = 0;
  std::vector<double> w_, dw_, e_, de_;

  double hermite(const std::vector<double>& y, const std::vector<double>& dy, std::size_t k, double u) const {
    const double u2 = u * u, u3 = u2 * u;
    const double h00 = 2 * u3 - 3 * u2 + 1, h10 = u3 - 2 * u2 + u, h01 = -2 * u3 + 3 * u2, h11 = u3 - u2;
    return h00 * y[k] + h10 * ds_ * dy[k] + h01 * y[k + 1] + h11 * ds_ * dy[k + 1];
  }
};

inline std::vector<std::string> coordinate_slots(int n, bool with_t) {
  std::vector<std::string> s;
  for (int i = 1; i <= n; ++i) s.push_back("x" + std::to_string(i));
  if (with_t) s.push_back("t");
  return s;
}

/// h(x, s) = exp(w G(Phi^{-1}(s))) f(x, Phi^{-1}(s)) with w = alpha + beta + 1,
/// and h0 = -h.
class ReactionTerm {
 public:
  ReactionTerm(std::shared_ptr<const TransformTable> tbl, const Expr& f, const OperatorSpec& op)
      : tbl_(std::move(tbl)), f_(f, coordinate_slots(op.dim(), true)), weight_(op.weight()), n_(op.dim()) {
    if (weight_ == std::floor(weight_) && weight_ >= 0.0 && weight_ <= 16.0) int_weight_ = static_cast<int>(weight_);
  }

  /// Routes inverse lookups through a Hermite model on [s_lo, s_hi].
  void enable_fast_inverse(double s_lo, double s_hi, int intervals = 4096) {
    fast_ = std::make_shared<InverseTable>(*tbl_, s_lo, s_hi, intervals);
  }

  double h(std::span<const double> x, double s) const {
    require_same_dim(static_cast<int>(x.size()), n_, "reaction term point");
    double w = 0.0;
    double factor = 1.0;
    if (fast_ && s >= fast_->s_lo() && s <= fast_->s_hi()) {
      const auto v = (*fast_)(s);
      w = v.w;
      factor = int_weight_ ? 1.0 / ipow(v.exp_neg, *int_weight_) : std::pow(v.exp_neg, -weight_);
    } else {
      w = tbl_->phi_inv(s);
      factor = std::exp(weight_ * tbl_->G(w));
    }
    double args[kMaxDim + 1];
    for (int i = 0; i < n_; ++i) args[i] = x[static_cast<std::size_t>(i)];
    args[n_] = w;
    return factor * f_(std::span<const double>(args, static_cast<std::size_t>(n_ + 1)));
  }

  double h0(std::span<const double> x, double s) const { return -h(x, s); }

  const TransformTable& table() const noexcept { return *tbl_; }
  double weight() const noexcept { return weight_; }

 private:
  std::shared_ptr<const TransformTable> tbl_;
  CompiledExpr f_;
  double weight_;
  int n_;
  std::shared_ptr<const InverseTable> fast_;
  std::optional<int> int_weight_;

  static double ipow(double x, int k) {
    double r = 1.0;
    for (int i = 0; i < k; ++i) r *= x;
    return r;
  }
};

inline ReactionTerm build_h(std::shared_ptr<const TransformTable> tbl, const Expr& f, const OperatorSpec& op) {
  return ReactionTerm(std::move(tbl), f, op);
}

/// Pointwise Phi_g. A range error names the offending sample.
inline std::vector<double> push_solution(const TransformTable& tbl, std::span<const double> u) {
  std::vector<double> v(u.size());
  for (std::size_t i = 0; i < u.size(); ++i) {
    try {
      v[i] = tbl.phi(u[i]);
    } catch (const RangeError& e) {
      throw RangeError(std::string(e.what()) + " at sample " + std::to_string(i), static_cast<std::ptrdiff_t>(i));
    }
  }
  return v;
}

/// Pointwise Phi_g^{-1}.
inline std::vector<double> pull_solution(const TransformTable& tbl, std::span<const double> v) {
  std::vector<double> u(v.size());
  for (std::size_t i = 0; i < v.size(); ++i) {
    try {
      u[i] = tbl.phi_inv(v[i]);
    } catch (const RangeError& e) {
      throw RangeError(std::string(e.what()) + " at sample " + std::to_string(i), static_cast<std::ptrdiff_t>(i));
    }
  }
  return u;
}

}  // namespace ngt
