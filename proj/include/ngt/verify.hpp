#pragma once

// Residual-level checks of the change of variables on manufactured C^2
// solutions: the chain-rule identity, invariance of the equation in both
// directions, the Aronsson transfer, and a grid-scale touching test.

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "ngt/error.hpp"
#include "ngt/expr.hpp"
#include "ngt/linalg.hpp"
#include "ngt/operators.hpp"
#include "ngt/solver.hpp"
#include "ngt/transform.hpp"

namespace ngt {

/// u(x1..xn) with its symbolic gradient and Hessian.
class ManufacturedSolution {
 public:
  ManufacturedSolution(Expr u, int n) : u_(std::move(u)), n_(n) {
    check_dim(n);
    const auto slots = coordinate_slots(n, false);
    cu_ = CompiledExpr(u_, slots);
    for (int i = 0; i < n; ++i) {
      Du_.push_back(differentiate(u_, slots[static_cast<std::size_t>(i)]));
      cDu_.emplace_back(Du_.back(), slots);
    }
    D2u_.resize(static_cast<std::size_t>(n * n));
    for (int i = 0; i < n; ++i)
      for (int j = i; j < n; ++j) {
        const Expr e = differentiate(Du_[static_cast<std::size_t>(i)], slots[static_cast<std::size_t>(j)]);
        D2u_[static_cast<std::size_t>(i * n + j)] = e;
        D2u_[static_cast<std::size_t>(j * n + i)] = e;
      }
    for (const auto& e : D2u_) cD2u_.emplace_back(e, slots);
  }

  static ManufacturedSolution parse(std::string_view src, int n) { return ManufacturedSolution(ngt::parse(src), n); }

  int dim() const noexcept { return n_; }
  const Expr& u() const noexcept { return u_; }
  const std::vector<Expr>& Du() const noexcept { return Du_; }
  const Expr& D2u(int i, int j) const { return D2u_[static_cast<std::size_t>(i * n_ + j)]; }

  double value(const Vec& x) const { return cu_(check(x)); }

  Jet jet(const Vec& x) const {
    const auto xs = check(x);
    Jet J{x, Vec(n_), Matrix(n_)};
    for (int i = 0; i < n_; ++i) J.p[i] = cDu_[static_cast<std::size_t>(i)](xs);
    for (int i = 0; i < n_; ++i)
      for (int j = 0; j < n_; ++j) J.X(i, j) = cD2u_[static_cast<std::size_t>(i * n_ + j)](xs);
    return J;
  }

 private:
  std::span<const double> check(const Vec& x) const {
    require_same_dim(x.dim(), n_, "manufactured solution point");
    return x.values();
  }

  Expr u_;
  int n_;
  CompiledExpr cu_;
  std::vector<Expr> Du_;
  std::vector<CompiledExpr> cDu_;
  std::vector<Expr> D2u_;
  std::vector<CompiledExpr> cD2u_;
};

namespace detail {

// Jet of phi(u) given phi', phi'' at u(x).
inline Jet compose_jet(const Jet& J, double d1, double d2) {
  Jet out{J.x, d1 * J.p, d1 * J.X + d2 * tensor(J.p, J.p)};
  return out;
}

inline double max_abs(std::initializer_list<double> xs) {
  double m = 0.0;
  for (double x : xs) m = std::max(m, std::fabs(x));
  return m;
}

inline std::string format_point(const Vec& x) {
  std::string s;
  char buf[40];
  for (int i = 0; i < x.dim(); ++i) {
    std::snprintf(buf, sizeof buf, "%s%.17g", i ? "," : "", x[i]);
    s += buf;
  }
  return s;
}

}  // namespace detail

/// Max over points of |LHS - RHS| / (1 + |RHS terms|) in
/// M(x, D phi(u), D2 phi(u)) = phi'^(a+b+1) M(x, Du, D2u) + phi'^(a+b) phi'' N(x, Du, D2u).
inline double chain_rule_check(const OperatorSpec& op, const Expr& phi, const ManufacturedSolution& u,
                               std::span<const Vec> points) {
  require_same_dim(op.dim(), u.dim(), "chain_rule_check operator/solution");
  const Expr d1e = differentiate(phi, "t");
  const CompiledExpr d1(d1e, {"t"}), d2(differentiate(d1e, "t"), {"t"});
  const double w = op.weight();
  double worst = 0.0;
  for (const Vec& x : points) {
    const Jet J = u.jet(x);
    const double t = u.value(x);
    const double p1 = d1({t}), p2 = d2({t});
    if (!(p1 > 0.0))
      throw HypothesisError("chain_rule_check: phi'(" + std::to_string(t) + ") = " + std::to_string(p1) + " is not positive");
    const double lhs = eval_M(op, detail::compose_jet(J, p1, p2));
    const double a = std::pow(p1, w) * eval_M(op, J);
    const double b = std::pow(p1, w - 1.0) * p2 * eval_N(op, J);
    worst = std::max(worst, std::fabs(lhs - a - b) / (1.0 + detail::max_abs({lhs, a, b})));
  }
  return worst;
}

inline double chain_rule_check(const OperatorSpec& op, std::string_view phi, const ManufacturedSolution& u,
                               std::span<const Vec> points) {
  return chain_rule_check(op, parse(phi), u, points);
}

/// Default invariance tolerance; powers of |p| in the m-Laplacian cost a digit.
inline double default_verify_tol(const OperatorSpec& op) {
  return op.kind() == OperatorKind::m_laplace ? 1e-7 : 1e-8;
}

struct InvarianceSample {
  Vec x;
  double residual_forward = 0.0;
  double residual_backward = 0.0;
  double scale = 1.0;
  bool pass = false;
};

struct InvarianceReport {
  std::string operator_name;
  std::string g;
  std::string direction;
  double tol = 1e-8;
  std::vector<InvarianceSample> samples;
  /// Maxima of the raw residuals.
  double residual_forward = 0.0;
  double residual_backward = 0.0;
  /// Maxima of residual / (1 + jet magnitude).
  double normalized_forward = 0.0;
  double normalized_backward = 0.0;
  bool pass = false;

  std::string to_text() const {
    std::string out;
    char buf[256];
    std::snprintf(buf, sizeof buf, "# invariance operator=%s g=%s direction=%s tol=%.3g\n", operator_name.c_str(),
                  g.c_str(), direction.c_str(), tol);
    out += buf;
    for (const auto& s : samples) {
      std::snprintf(buf, sizeof buf, " forward=%.6e backward=%.6e scale=%.6e pass=%d\n", s.residual_forward,
                    s.residual_backward, s.scale, s.pass ? 1 : 0);
      out += "x=" + detail::format_point(s.x) + buf;
    }
    std::snprintf(buf, sizeof buf,
                  "summary max_forward=%.6e max_backward=%.6e normalized_forward=%.6e normalized_backward=%.6e "
                  "samples=%zu pass=%d\n",
                  residual_forward, residual_backward, normalized_forward, normalized_backward, samples.size(),
                  pass ? 1 : 0);
    out += buf;
    return out;
  }
};

namespace detail {

inline void add_sample(InvarianceReport& r, const Vec& x, double fwd, double bwd, double scale) {
  InvarianceSample s{x, fwd, bwd, scale, false};
  s.pass = fwd <= r.tol * scale && bwd <= r.tol * scale;
  r.residual_forward = std::max(r.residual_forward, fwd);
  r.residual_backward = std::max(r.residual_backward, bwd);
  r.normalized_forward = std::max(r.normalized_forward, fwd / scale);
  r.normalized_backward = std::max(r.normalized_backward, bwd / scale);
  r.samples.push_back(std::move(s));
}

inline void finish(InvarianceReport& r) {
  r.pass = !r.samples.empty() &&
           std::all_of(r.samples.begin(), r.samples.end(), [](const InvarianceSample& s) { return s.pass; });
}

inline std::pair<double, double> value_range(const ManufacturedSolution& u, std::span<const Vec> points) {
  double lo = std::numeric_limits<double>::infinity(), hi = -lo;
  for (const Vec& x : points) {
    const double t = u.value(x);
    lo = std::min(lo, t);
    hi = std::max(hi, t);
  }
  return {lo, hi};
}

}  // namespace detail

/// Table whose t-range covers [lo, hi] with a unit margin.
inline TransformTable table_for_range(const GSpec& gs, double lo, double hi, double quad_tol = 1e-10) {
  return TransformTable::build(gs, std::min(lo, 0.0) - 1.0, std::max(hi, 0.0) + 1.0, quad_tol);
}

/// Table whose Phi-range covers [lo, hi], doubling the t-range until it does.
inline TransformTable table_for_image(const GSpec& gs, double lo, double hi, double quad_tol = 1e-10) {
  for (double T = 2.0; T <= 64.0; T *= 2.0) {
    std::optional<TransformTable> tbl;
    try {
      tbl = TransformTable::build(gs, -T, T, quad_tol);
    } catch (const QuadratureError&) {
      break;  // Phi saturates in double precision
    }
    if (tbl->phi_min() < lo && tbl->phi_max() > hi) return *tbl;
  }
  throw RangeError("no transform table with Phi-range covering [" + std::to_string(lo) + ", " + std::to_string(hi) + "]");
}

/// u solves M + g(u) N + f = 0 with the x-only forcing f = -(M + g(u) N);
/// checks that v = Phi_g(u) solves M(x, Dv, D2v) + h(x, v) = 0.
inline InvarianceReport theorem1_forward(const OperatorSpec& op, const TransformTable& tbl, const ManufacturedSolution& u,
                                         std::span<const Vec> points, double tol) {
  require_same_dim(op.dim(), u.dim(), "theorem1_forward operator/solution");
  InvarianceReport r;
  r.operator_name = op.name();
  r.g = to_string(tbl.g_spec().g());
  r.direction = "forward";
  r.tol = tol;
  const double w = op.weight();
  for (std::size_t i = 0; i < points.size(); ++i) {
    const Vec& x = points[i];
    const Jet J = u.jet(x);
    const double t = u.value(x);
    const double gu = tbl.g(t);
    const double M = eval_M(op, J), N = eval_N(op, J);
    const double f = -(M + gu * N);
    const double back = std::fabs(M + gu * N + f);

    double v = 0.0;
    try {
      v = tbl.phi(t);
    } catch (const RangeError& e) {
      throw RangeError(std::string("theorem1_forward: ") + e.what(), static_cast<std::ptrdiff_t>(i));
    }
    const double d1 = tbl.phi_prime(t), d2 = tbl.phi_second(t);
    const double Mv = eval_M(op, detail::compose_jet(J, d1, d2));
    const double h = std::exp(w * tbl.G(tbl.phi_inv(v))) * f;
    detail::add_sample(r, x, std::fabs(Mv + h), back, 1.0 + detail::max_abs({Mv, h, M, gu * N, f}));
  }
  detail::finish(r);
  return r;
}

inline InvarianceReport theorem1_forward(const OperatorSpec& op, const GSpec& gs, const ManufacturedSolution& u,
                                         std::span<const Vec> points, double tol) {
  const auto [lo, hi] = detail::value_range(u, points);
  return theorem1_forward(op, table_for_range(gs, lo, hi), u, points, tol);
}

inline InvarianceReport theorem1_forward(const OperatorSpec& op, const GSpec& gs, const ManufacturedSolution& u,
                                         std::span<const Vec> points) {
  return theorem1_forward(op, gs, u, points, default_verify_tol(op));
}

/// v solves M + h = 0 with h = -M(x, Dv, D2v); checks that u = Phi_g^{-1}(v)
/// solves M + g(u) N + f = 0 with f(x, u) = exp(-(a+b+1) G(u)) h(x).
inline InvarianceReport theorem1_backward(const OperatorSpec& op, const TransformTable& tbl,
                                          const ManufacturedSolution& v, std::span<const Vec> points, double tol) {
  require_same_dim(op.dim(), v.dim(), "theorem1_backward operator/solution");
  InvarianceReport r;
  r.operator_name = op.name();
  r.g = to_string(tbl.g_spec().g());
  r.direction = "backward";
  r.tol = tol;
  const double w = op.weight();
  for (std::size_t i = 0; i < points.size(); ++i) {
    const Vec& x = points[i];
    const Jet Jv = v.jet(x);
    const double s = v.value(x);
    const double Mv = eval_M(op, Jv);
    const double h = -Mv;
    const double fwd = std::fabs(Mv + h);

    double u = 0.0;
    try {
      u = tbl.phi_inv(s);
    } catch (const RangeError& e) {
      throw RangeError(std::string("theorem1_backward: ") + e.what(), static_cast<std::ptrdiff_t>(i));
    }
    // derivatives of the inverse: 1/Phi' and -Phi''/Phi'^3 at u
    const double p1 = tbl.phi_prime(u), p2 = tbl.phi_second(u);
    const Jet Ju = detail::compose_jet(Jv, 1.0 / p1, -p2 / (p1 * p1 * p1));
    const double gu = tbl.g(u);
    const double Mu = eval_M(op, Ju), N = eval_N(op, Ju);
    const double f = std::exp(-w * tbl.G(u)) * h;
    detail::add_sample(r, x, fwd, std::fabs(Mu + gu * N + f), 1.0 + detail::max_abs({Mv, h, Mu, gu * N, f}));
  }
  detail::finish(r);
  return r;
}

inline InvarianceReport theorem1_backward(const OperatorSpec& op, const GSpec& gs, const ManufacturedSolution& v,
                                          std::span<const Vec> points, double tol) {
  const auto [lo, hi] = detail::value_range(v, points);
  return theorem1_backward(op, table_for_image(gs, lo, hi), v, points, tol);
}

inline InvarianceReport theorem1_backward(const OperatorSpec& op, const GSpec& gs, const ManufacturedSolution& v,
                                          std::span<const Vec> points) {
  return theorem1_backward(op, gs, v, points, default_verify_tol(op));
}

struct AronssonReport {
  /// max |Delta_inf u + g(u)|Du|^4| / (1 + max term)
  double residual = 0.0;
  /// max |exp(G(u)) Du_fd - Dv| / (1 + |Dv|), Du_fd by extrapolated differences of Phi^{-1}(v)
  double gradient_error = 0.0;
  /// smallest |Du| seen
  double min_grad = std::numeric_limits<double>::infinity();
  int samples = 0;
};

/// For an infinity-harmonic v, u = Phi_g^{-1}(v) should solve
/// Delta_inf u + g(u)|Du|^4 = 0 with Dv = exp(G(u)) Du.
inline AronssonReport aronsson_transfer(const TransformTable& tbl, const ManufacturedSolution& v,
                                        std::span<const Vec> points, double fd_step = 1e-3) {
  const OperatorSpec op = OperatorSpec::infinity_laplace(v.dim());
  AronssonReport r;
  for (const Vec& x : points) {
    const Jet Jv = v.jet(x);
    const double u = tbl.phi_inv(v.value(x));
    const double p1 = tbl.phi_prime(u), p2 = tbl.phi_second(u);
    const Jet Ju = detail::compose_jet(Jv, 1.0 / p1, -p2 / (p1 * p1 * p1));
    const double L = eval_M(op, Ju);
    const double q = norm_sq(Ju.p);
    const double G = tbl.g(u) * q * q;
    r.residual = std::max(r.residual, std::fabs(L + G) / (1.0 + detail::max_abs({L, G})));
    r.min_grad = std::min(r.min_grad, std::sqrt(q));

    auto uf = [&](int i, double dx) {
      Vec y = x;
      y[i] += dx;
      return tbl.phi_inv(v.value(y));
    };
    const double eG = std::exp(tbl.G(u));
    for (int i = 0; i < v.dim(); ++i) {
      const double d1 = (uf(i, fd_step) - uf(i, -fd_step)) / (2 * fd_step);
      const double d2 = (uf(i, 0.5 * fd_step) - uf(i, -0.5 * fd_step)) / fd_step;
      const double du = (4 * d2 - d1) / 3;
      r.gradient_error = std::max(r.gradient_error, std::fabs(eG * du - Jv.p[i]) / (1.0 + std::fabs(Jv.p[i])));
    }
    ++r.samples;
  }
  return r;
}

// ---------------------------------------------------------------------------
// Grid-scale touching test (heuristic)

enum class TouchSide { above, below };

struct TouchReport {
  std::size_t node = 0;
  TouchSide side = TouchSide::above;
  /// Constant added to the fitted quadratic so it touches the field from the
  /// requested side on the 3x3 stencil.
  double shift = 0.0;
  /// Stencil direction where the touch occurs (-1: the node itself).
  int touch_dir = -1;
  /// M(x0, D phi, D2 phi) + h(x0, v(x0)); <= tol for above, >= -tol for below.
  double value_v = 0.0;
  bool holds_v = false;
  /// Same inequality for u = Phi^{-1}(v) with the transferred test function.
  double value_u = 0.0;
  bool holds_u = false;
  /// |value_v - Phi'^(a+b+1) value_u| / (1 + |value_v|)
  double transfer_defect = 0.0;
};

/// Fits the quadratic matching the discrete jet at `node`, shifts it to touch
/// the field from `side`, and evaluates the sub/supersolution inequality for
/// M + h = 0, then for M + g N + f = 0 after the transfer Phi^{-1}.
/// `h` is the reaction term of the transformed equation (not h0).
inline TouchReport viscosity_touch_check(const OperatorSpec& op, const TransformTable& tbl, const GridField& field,
                                         std::span<const double> v, const SourceFn& h, std::size_t node,
                                         TouchSide side, double tol_visc, double tol_transfer = 1e-6) {
  require_same_dim(op.dim(), 2, "viscosity_touch_check operator");
  const Grid& grid = field.grid();
  if (node >= grid.size()) throw RangeError("viscosity_touch_check: node out of range");
  if (!grid.full_stencil(node))
    throw HypothesisError("viscosity_touch_check: stencil underdetermined at boundary-adjacent node " +
                          std::to_string(node));
  const DiscreteJet dj = field.jet(v, node);
  const double gh = grid.h();
  const double v0 = v[node];
  auto phi = [&](double dx, double dy) {
    return v0 + dj.p1 * dx + dj.p2 * dy + 0.5 * (dj.v11 * dx * dx + 2 * dj.v12 * dx * dy + dj.v22 * dy * dy);
  };

  TouchReport r;
  r.node = node;
  r.side = side;
  const double sgn = side == TouchSide::above ? 1.0 : -1.0;
  for (std::size_t d = 0; d < 8; ++d) {
    const double dx = kNeighborOffsets[d][0] * gh, dy = kNeighborOffsets[d][1] * gh;
    const double gap = sgn * (field.neighbor(v, node, d) - phi(dx, dy));
    if (gap > sgn * r.shift) {
      r.shift = sgn * gap;
      r.touch_dir = static_cast<int>(d);
    }
  }

  const Point c = grid.position(node);
  Jet J{Vec{c.x, c.y}, Vec{dj.p1, dj.p2}, Matrix{{dj.v11, dj.v12}, {dj.v12, dj.v22}}};
  const double hv = h(c, v0);
  r.value_v = eval_M(op, J) + hv;
  r.holds_v = side == TouchSide::above ? r.value_v <= tol_visc : r.value_v >= -tol_visc;

  const double u0 = tbl.phi_inv(v0);
  const double p1 = tbl.phi_prime(u0), p2 = tbl.phi_second(u0);
  const Jet Ju = detail::compose_jet(J, 1.0 / p1, -p2 / (p1 * p1 * p1));
  const double w = op.weight();
  const double f = std::exp(-w * tbl.G(u0)) * hv;
  r.value_u = eval_M(op, Ju) + tbl.g(u0) * eval_N(op, Ju) + f;
  const double tol_u = tol_visc * std::exp(-w * tbl.G(u0)) + tol_transfer;
  r.holds_u = side == TouchSide::above ? r.value_u <= tol_u : r.value_u >= -tol_u;
  r.transfer_defect = std::fabs(r.value_v - std::pow(p1, w) * r.value_u) / (1.0 + std::fabs(r.value_v));
  return r;
}

}  // namespace ngt
