#include <gtest/gtest.h>

#include <cmath>
#include <memory>
#include <random>

#include "ngt/solver.hpp"

using namespace ngt;

namespace {

std::shared_ptr<const Grid> make_grid(const Domain2D& d, double h) { return std::make_shared<const Grid>(d, h); }

std::vector<double> sample(const Grid& g, const std::function<double(Point)>& f) {
  std::vector<double> v(g.size());
  for (std::size_t n = 0; n < g.size(); ++n) v[n] = f(g.position(n));
  return v;
}

// Symbolic infinity-Laplacian of u(x1, x2).
struct SymbolicInf {
  CompiledExpr u1, u2, u11, u12, u22;
  explicit SymbolicInf(std::string_view src) {
    const Expr u = parse(src);
    const auto slots = coordinate_slots(2, false);
    const Expr d1 = differentiate(u, "x1"), d2 = differentiate(u, "x2");
    u1 = CompiledExpr(d1, slots);
    u2 = CompiledExpr(d2, slots);
    u11 = CompiledExpr(differentiate(d1, "x1"), slots);
    u12 = CompiledExpr(differentiate(d1, "x2"), slots);
    u22 = CompiledExpr(differentiate(d2, "x2"), slots);
  }
  double operator()(Point q) const {
    const double p1 = u1({q.x, q.y}), p2 = u2({q.x, q.y});
    return u11({q.x, q.y}) * p1 * p1 + 2 * u12({q.x, q.y}) * p1 * p2 + u22({q.x, q.y}) * p2 * p2;
  }
};

double aronsson(Point q) { return std::pow(q.x, 4.0 / 3) - std::pow(q.y, 4.0 / 3); }

}  // namespace

TEST(DiscreteInfLaplacian, AffineIsZero) {
  auto grid = make_grid(Domain2D::rectangle(0, 0, 1, 1), 1.0 / 16);
  auto affine = [](Point q) { return 0.3 + 2 * q.x - 1.5 * q.y; };
  GridField field(grid, affine);
  const auto v = sample(*grid, affine);
  for (std::size_t n = 0; n < grid->size(); ++n) {
    EXPECT_NEAR(discrete_inf_laplacian(field, v, n, Scheme::fd_direct), 0.0, 1e-9);
    EXPECT_NEAR(discrete_inf_laplacian(field, v, n, Scheme::monotone), 0.0, 1e-9);
  }
}

TEST(DiscreteInfLaplacian, QuadraticAtXEqualsOne) {
  auto grid = make_grid(Domain2D::rectangle(0, 0, 2, 2), 1.0 / 8);
  auto sq = [](Point q) { return q.x * q.x; };
  GridField field(grid, sq);
  const auto v = sample(*grid, sq);
  const int n = grid->node_at(8, 8);
  ASSERT_GE(n, 0);
  EXPECT_NEAR(grid->position(static_cast<std::size_t>(n)).x, 1.0, 1e-15);
  EXPECT_NEAR(discrete_inf_laplacian(field, v, static_cast<std::size_t>(n), Scheme::fd_direct), 8.0, 1e-9);
}

TEST(DiscreteInfLaplacian, RadialFourThirds) {
  const auto dom = Domain2D::disc(2, 0, 0.5);
  auto radial = [](Point q) { return std::pow(std::hypot(q.x, q.y), 4.0 / 3); };
  double prev = 1e300;
  for (double h : {1.0 / 16, 1.0 / 32, 1.0 / 64}) {
    auto grid = make_grid(dom, h);
    GridField field(grid, radial);
    const auto v = sample(*grid, radial);
    double worst = 0;
    for (std::size_t n = 0; n < grid->size(); ++n) {
      if (!grid->full_stencil(n)) continue;
      worst = std::max(worst, std::fabs(discrete_inf_laplacian(field, v, n, Scheme::fd_direct) - 64.0 / 81));
    }
    EXPECT_LT(worst, prev);
    prev = worst;
  }
  EXPECT_LT(prev, 1e-2);
}

TEST(DiscreteInfLaplacian, SecondOrderConsistency) {
  const auto dom = Domain2D::rectangle(1, 1, 2, 2);
  for (const char* src : {"x1^2*x2", "sin(x1)+x2^2", "exp(x1-x2)", "x1^(4/3)-x2^(4/3)", "ln(x1+2*x2)"}) {
    SymbolicInf exact(src);
    CompiledExpr u(parse(src), coordinate_slots(2, false));
    auto uf = [&](Point q) { return u({q.x, q.y}); };
    double C[2];
    int k = 0;
    for (double h : {1.0 / 16, 1.0 / 32}) {
      auto grid = make_grid(dom, h);
      GridField field(grid, uf);
      const auto v = sample(*grid, uf);
      double worst = 0;
      for (std::size_t n = 0; n < grid->size(); ++n) {
        if (!grid->full_stencil(n)) continue;
        worst = std::max(worst, std::fabs(discrete_inf_laplacian(field, v, n, Scheme::fd_direct) - exact(grid->position(n))));
      }
      C[k++] = worst / (h * h);
    }
    // constant in C*h^2 stays bounded under refinement
    EXPECT_LT(C[1], 1.5 * C[0] + 1e-6) << src << " C=" << C[0] << "," << C[1];
  }
}

TEST(DiscreteInfLaplacian, MonotoneIncrementIsMonotone) {
  const auto dom = Domain2D::disc(2, 0, 0.5);
  auto grid = make_grid(dom, 1.0 / 16);
  auto radial = [](Point q) { return std::pow(std::hypot(q.x, q.y), 4.0 / 3); };
  GridField field(grid, radial);
  std::mt19937_64 rng(21);
  std::uniform_real_distribution<double> noise(-0.05, 0.05);
  auto v = sample(*grid, radial);
  for (auto& x : v) x += noise(rng);
  std::uniform_int_distribution<std::size_t> pick(0, grid->size() - 1);
  const double r = 2 * grid->h();
  for (int trial = 0; trial < 100; ++trial) {
    const std::size_t n = pick(rng);
    const double base = field.monotone_increment(v, n);
    const Point c = grid->position(n);
    for (std::size_t m = 0; m < grid->size(); ++m) {
      if (m == n) continue;
      const Point q = grid->position(m);
      if (std::hypot(q.x - c.x, q.y - c.y) > r + 2 * grid->h()) continue;
      auto w = v;
      w[m] += 0.1;
      ASSERT_GE(field.monotone_increment(w, n), base - 1e-12) << n << " " << m;
    }
  }
}

TEST(Solver, AffineFixedPoint) {
  auto affine = [](Point q) { return 1.0 + 0.5 * q.x - 2.0 * q.y; };
  for (const auto& dom : {Domain2D::rectangle(0, 0, 1, 1), Domain2D::disc(2, 0, 0.5)}) {
    GridField field(make_grid(dom, 1.0 / 16), affine);
    SolverOptions opt;
    opt.tol = 1e-10;
    opt.laplace_tol = 1e-14;
    const auto res = solve_transformed(field, [](Point, double) { return 0.0; }, opt);
    EXPECT_TRUE(res.converged);
    for (std::size_t n = 0; n < res.v.size(); ++n) EXPECT_NEAR(res.v[n], affine(res.grid->position(n)), 1e-10);
  }
}

TEST(Solver, AronssonCoarse) {
  GridField field(make_grid(Domain2D::rectangle(1, 1, 2, 2), 1.0 / 16), aronsson);
  const auto res = solve_transformed(field, [](Point, double) { return 0.0; }, SolverOptions{});
  ASSERT_TRUE(res.converged);
  double err = 0;
  for (std::size_t n = 0; n < res.v.size(); ++n) err = std::max(err, std::fabs(res.v[n] - aronsson(res.grid->position(n))));
  EXPECT_LE(err, 5e-2);
}

TEST(Solver, RadialCoarseBothSchemes) {
  auto radial = [](Point q) { return std::pow(std::hypot(q.x, q.y), 4.0 / 3); };
  for (Scheme s : {Scheme::fd_direct, Scheme::monotone}) {
    GridField field(make_grid(Domain2D::disc(2, 0, 0.5), 1.0 / 16), radial);
    SolverOptions opt;
    opt.scheme = s;
    const auto res = solve_transformed(field, [](Point, double) { return 64.0 / 81; }, opt);
    EXPECT_TRUE(res.converged) << scheme_name(s);
    double err = 0;
    for (std::size_t n = 0; n < res.v.size(); ++n) err = std::max(err, std::fabs(res.v[n] - radial(res.grid->position(n))));
    EXPECT_LE(err, 5e-2) << scheme_name(s);
  }
}

TEST(Solver, ZeroGReducesBitwise) {
  GridProblem p;
  p.domain = Domain2D::rectangle(0, 0, 1, 1);
  p.h = 1.0 / 16;
  p.b = parse("x1*x2");
  p.f = parse("1 + 0.1*t");
  p.g = GSpec::checked("0");
  const auto a = solve_with_gradient_term(p);

  CompiledExpr b(p.b, coordinate_slots(2, false));
  CompiledExpr f(p.f, coordinate_slots(2, true));
  GridField field(std::make_shared<const Grid>(p.domain, p.h), [&](Point q) { return b({q.x, q.y}); });
  const auto c = solve_transformed(field, [&](Point q, double s) { return -f({q.x, q.y, s}); }, p.solver);
  ASSERT_EQ(a.v.size(), c.v.size());
  EXPECT_EQ(a.iters, c.iters);
  for (std::size_t n = 0; n < a.v.size(); ++n) {
    EXPECT_EQ(a.v[n], c.v[n]);
    EXPECT_EQ(a.u[n], a.v[n]);
  }
}

TEST(Solver, PipelineCoarseAndBoundaryConsistency) {
  GridProblem p;
  p.domain = Domain2D::disc(2, 0, 0.5);
  p.h = 1.0 / 16;
  p.g = GSpec::checked("2*t/(1+t^2)");
  p.f = parse("-(64/81)/(1+t^2)^3");
  // Phi^{-1}(s) for Phi(t) = t + t^3/3, s > 0
  const char* inv = "(1.5*s + sqrt(2.25*s^2+1))^(1/3) - (1.5*s + sqrt(2.25*s^2+1))^(-1/3)";
  p.b = substitute(parse(inv), "s", parse("(x1^2+x2^2)^(2/3)"));
  const auto res = solve_with_gradient_term(p);
  ASSERT_TRUE(res.converged);
  CompiledExpr exact(p.b, coordinate_slots(2, false));
  const double h = res.grid->h();
  double err = 0, bnd = 0;
  for (std::size_t n = 0; n < res.u.size(); ++n) {
    const Point q = res.grid->position(n);
    err = std::max(err, std::fabs(res.u[n] - exact({q.x, q.y})));
    if (!res.grid->full_stencil(n)) {
      const Point pb = p.domain.project(q);
      bnd = std::max(bnd, std::fabs(res.u[n] - exact({pb.x, pb.y})) / h);
    }
  }
  EXPECT_LE(err, 5e-2);
  // boundary gap is O(h): bounded by the Lipschitz constant of b times the distance
  EXPECT_LE(bnd, 5.0);
}

TEST(Solver, NonConvergenceReported) {
  GridField field(make_grid(Domain2D::rectangle(0, 0, 1, 1), 1.0 / 8), [](Point q) { return q.x * q.y; });
  SolverOptions opt;
  opt.max_iters = 3;
  const auto res = solve_transformed(field, [](Point, double) { return 1.0; }, opt);
  EXPECT_FALSE(res.converged);
  EXPECT_EQ(res.iters, 3);
  EXPECT_GT(res.residual_inf, opt.tol);
}

TEST(Solver, ParseScheme) {
  EXPECT_EQ(parse_scheme("fd-direct"), Scheme::fd_direct);
  EXPECT_EQ(parse_scheme("monotone"), Scheme::monotone);
  EXPECT_THROW(parse_scheme("upwind"), ConfigError);
}
