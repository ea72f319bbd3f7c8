#pragma once

// Dirichlet solver for  Delta_inf u + g(u)|Du|^4 + f(x, u) = 0  in 2D:
// transform to  Delta_inf v = h0(x, v),  relax a finite-difference scheme in
// pseudo-time, and pull back u = Phi_g^{-1}(v).

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <memory>
#include <numbers>
#include <span>
#include <vector>

#include "ngt/domain.hpp"
#include "ngt/error.hpp"
#include "ngt/expr.hpp"
#include "ngt/operators.hpp"
#include "ngt/transform.hpp"

namespace ngt {

enum class Scheme { fd_direct, monotone };

inline Scheme parse_scheme(std::string_view s) {
  if (s == "fd-direct") return Scheme::fd_direct;
  if (s == "monotone") return Scheme::monotone;
  throw ConfigError("unknown scheme '" + std::string(s) + "' (expected fd-direct or monotone)");
}

inline const char* scheme_name(Scheme s) { return s == Scheme::fd_direct ? "fd-direct" : "monotone"; }

using BoundaryFn = std::function<double(Point)>;

/// Centered difference jet of a grid field at one node.
struct DiscreteJet {
  double p1 = 0, p2 = 0;
  double v11 = 0, v12 = 0, v22 = 0;

  double inf_laplacian() const { return v11 * p1 * p1 + 2.0 * v12 * p1 * p2 + v22 * p2 * p2; }
  double grad_sq() const { return p1 * p1 + p2 * p2; }
};

/// Grid plus boundary data, with the values needed by ghost links cached.
/// Missing neighbors are replaced by linear extrapolation through the
/// boundary crossing: ghost = v_c + (b - v_c) / frac.
class GridField {
 public:
  GridField(std::shared_ptr<const Grid> grid, BoundaryFn boundary) : grid_(std::move(grid)), b_(std::move(boundary)) {
    link_b_.resize(grid_->size());
    for (std::size_t n = 0; n < grid_->size(); ++n)
      for (std::size_t d = 0; d < 8; ++d) {
        const Link& L = grid_->links(n)[d];
        link_b_[n][d] = L.node >= 0 ? 0.0 : b_(L.boundary);
      }
  }

  const Grid& grid() const noexcept { return *grid_; }
  std::shared_ptr<const Grid> grid_ptr() const noexcept { return grid_; }
  double boundary(Point q) const { return b_(q); }
  double link_boundary(std::size_t n, std::size_t d) const { return link_b_[n][d]; }

  double neighbor(std::span<const double> v, std::size_t n, std::size_t d) const {
    const Link& L = grid_->links(n)[d];
    if (L.node >= 0) return v[static_cast<std::size_t>(L.node)];
    const double c = v[n];
    return c + (link_b_[n][d] - c) / L.frac;
  }

  DiscreteJet jet(std::span<const double> v, std::size_t n) const {
    const double h = grid_->h();
    const double c = v[n];
    double nb[8];
    for (std::size_t d = 0; d < 8; ++d) nb[d] = neighbor(v, n, d);
    DiscreteJet J;
    J.p1 = (nb[0] - nb[1]) / (2 * h);
    J.p2 = (nb[2] - nb[3]) / (2 * h);
    J.v11 = (nb[0] - 2 * c + nb[1]) / (h * h);
    J.v22 = (nb[2] - 2 * c + nb[3]) / (h * h);
    J.v12 = (nb[4] - nb[5] - nb[6] + nb[7]) / (4 * h * h);
    return J;
  }

  /// Value of the field extended by boundary data at a lattice node.
  double lattice_value(std::span<const double> v, int i, int j) const {
    const int k = grid_->node_at(i, j);
    if (k >= 0) return v[static_cast<std::size_t>(k)];
    return b_(grid_->domain().project(grid_->position(i, j)));
  }

  /// Bilinear interpolation of the extended field.
  double sample(std::span<const double> v, Point q) const {
    const Point o = grid_->position(0, 0);
    const double h = grid_->h();
    const double fx = (q.x - o.x) / h, fy = (q.y - o.y) / h;
    const int i = static_cast<int>(std::floor(fx)), j = static_cast<int>(std::floor(fy));
    const double a = fx - i, b = fy - j;
    return (1 - a) * (1 - b) * lattice_value(v, i, j) + a * (1 - b) * lattice_value(v, i + 1, j) +
           (1 - a) * b * lattice_value(v, i, j + 1) + a * b * lattice_value(v, i + 1, j + 1);
  }

  /// Normalized increment (max + min - 2 v_c) / r^2 over 16 equally spaced
  /// directions at radius r = 2h. Nondecreasing in every neighbor value.
  double monotone_increment(std::span<const double> v, std::size_t n) const {
    const double r = 2.0 * grid_->h();
    const Point c = grid_->position(n);
    const double vc = v[n];
    double smax = -std::numeric_limits<double>::infinity();
    double smin = std::numeric_limits<double>::infinity();
    for (int k = 0; k < 16; ++k) {
      const double a = std::numbers::pi * k / 8.0;
      const double dx = std::cos(a), dy = std::sin(a);
      const double exit = grid_->domain().ray_exit(c, dx, dy);
      double slope;
      if (exit < r) {
        slope = (b_({c.x + exit * dx, c.y + exit * dy}) - vc) / exit;
      } else {
        slope = (sample(v, {c.x + r * dx, c.y + r * dy}) - vc) / r;
      }
      smax = std::max(smax, slope);
      smin = std::min(smin, slope);
    }
    return (smax + smin) / r;
  }

 private:
  std::shared_ptr<const Grid> grid_;
  BoundaryFn b_;
  std::vector<std::array<double, 8>> link_b_;
};

/// Discrete infinity-Laplacian <D2_h v D_h v, D_h v> at node n.
inline double discrete_inf_laplacian(const GridField& field, std::span<const double> v, std::size_t n, Scheme scheme) {
  const DiscreteJet J = field.jet(v, n);
  if (scheme == Scheme::fd_direct) return J.inf_laplacian();
  return J.grad_sq() * field.monotone_increment(v, n);
}

struct SolverOptions {
  Scheme scheme = Scheme::fd_direct;
  double tol = 1e-6;
  long max_iters = 500000;
  double tau_factor = 0.2;
  double laplace_tol = 1e-6;
};

struct SolveResult {
  std::shared_ptr<const Grid> grid;
  std::vector<double> v;
  std::vector<double> u;
  double residual_inf = 0.0;
  long iters = 0;
  bool converged = false;
};

/// Source term of the transformed equation, h0(x, v).
using SourceFn = std::function<double(Point, double)>;

namespace detail {

// 5-point Laplace solve by SOR with the same ghost rule, used as the start.
inline std::vector<double> laplace_start(const GridField& field, double tol) {
  const Grid& grid = field.grid();
  std::vector<double> v(grid.size(), 0.0);
  double mean = 0.0;
  int count = 0;
  for (std::size_t n = 0; n < grid.size(); ++n)
    for (std::size_t d = 0; d < 4; ++d)
      if (grid.links(n)[d].node < 0) {
        mean += field.link_boundary(n, d);
        ++count;
      }
  std::fill(v.begin(), v.end(), count ? mean / count : 0.0);
  const double omega = 1.85;
  for (int sweep = 0; sweep < 200000; ++sweep) {
    double change = 0.0;
    for (std::size_t n = 0; n < grid.size(); ++n) {
      double num = 0.0, den = 0.0;
      for (std::size_t d = 0; d < 4; ++d) {
        const Link& L = grid.links(n)[d];
        if (L.node >= 0) {
          num += v[static_cast<std::size_t>(L.node)];
          den += 1.0;
        } else {
          num += field.link_boundary(n, d) / L.frac;
          den += 1.0 / L.frac;
        }
      }
      const double next = v[n] + omega * (num / den - v[n]);
      change = std::max(change, std::fabs(next - v[n]));
      v[n] = next;
    }
    if (change <= tol) break;
  }
  return v;
}

}  // namespace detail

/// Relaxes v <- v + tau (Delta_inf_h v - h0(x, v)) from a Laplace start.
/// When `table` is given the result also carries u = Phi^{-1}(v).
inline SolveResult solve_transformed(const GridField& field, const SourceFn& h0, const SolverOptions& opt,
                                     const TransformTable* table = nullptr) {
  const Grid& grid = field.grid();
  const std::size_t N = grid.size();
  const double h = grid.h();
  std::vector<Point> pos(N);
  for (std::size_t n = 0; n < N; ++n) pos[n] = grid.position(n);

  SolveResult res;
  res.grid = field.grid_ptr();
  std::vector<double> v = detail::laplace_start(field, opt.laplace_tol);
  std::vector<double> r(N);
  long it = 0;
  double resid = std::numeric_limits<double>::infinity();
  for (;; ++it) {
    double max_p2 = 0.0;
    resid = 0.0;
    for (std::size_t n = 0; n < N; ++n) {
      const DiscreteJet J = field.jet(v, n);
      const double L = opt.scheme == Scheme::fd_direct ? J.inf_laplacian() : J.grad_sq() * field.monotone_increment(v, n);
      r[n] = L - h0(pos[n], v[n]);
      max_p2 = std::max(max_p2, J.grad_sq());
      resid = std::max(resid, std::fabs(r[n]));
    }
    if (!std::isfinite(resid)) break;
    if (resid <= opt.tol || it >= opt.max_iters) break;
    const double tau = opt.tau_factor * h * h / (max_p2 + 1e-8);
    for (std::size_t n = 0; n < N; ++n) v[n] += tau * r[n];
  }
  res.iters = it;
  res.residual_inf = resid;
  res.converged = std::isfinite(resid) && resid <= opt.tol;
  res.v = std::move(v);
  if (table) res.u = pull_solution(*table, res.v);
  return res;
}

struct GridProblem {
  Domain2D domain = Domain2D::rectangle(0, 0, 1, 1);
  double h = 1.0 / 32;
  Expr b;
  Expr f;
  GSpec g = GSpec::checked("0");
  SolverOptions solver;
  double t_min = -10.0;
  double t_max = 10.0;
  double quad_tol = 1e-10;
};

/// Full pipeline: b~ = Phi(b), h0 = -h from the transformed reaction term,
/// relax, pull back.
inline SolveResult solve_with_gradient_term(const GridProblem& p) {
  auto table = std::make_shared<const TransformTable>(TransformTable::build(p.g, p.t_min, p.t_max, p.quad_tol));
  CompiledExpr b(p.b, coordinate_slots(2, false));
  auto grid = std::make_shared<const Grid>(p.domain, p.h);
  GridField field(grid, [&](Point q) { return table->phi(b({q.x, q.y})); });

  ReactionTerm react = build_h(table, p.f, OperatorSpec::infinity_laplace(2));
  if (!table->is_identity()) {
    double lo = std::numeric_limits<double>::infinity(), hi = -lo;
    for (std::size_t n = 0; n < grid->size(); ++n)
      for (std::size_t d = 0; d < 8; ++d)
        if (grid->links(n)[d].node < 0) {
          lo = std::min(lo, field.link_boundary(n, d));
          hi = std::max(hi, field.link_boundary(n, d));
        }
    if (lo <= hi) {
      const double pad = (hi - lo) + 1.0;
      react.enable_fast_inverse(std::max(lo - pad, table->phi_min()), std::min(hi + pad, table->phi_max()), 8192);
    }
  }
  SourceFn h0 = [&react](Point q, double s) {
    const double x[2] = {q.x, q.y};
    return react.h0(x, s);
  };
  return solve_transformed(field, h0, p.solver, table.get());
}

}  // namespace ngt
