#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <random>

#include "ngt/domain.hpp"

using namespace ngt;

TEST(Domain, InballRadius) {
  EXPECT_DOUBLE_EQ(Domain2D::disc(0, 0, 1).inball_radius(), 1.0);
  EXPECT_DOUBLE_EQ(Domain2D::rectangle(0, 0, 2, 1).inball_radius(), 0.5);
  const auto c = Domain2D::rectangle(0, 0, 2, 1).inball_center();
  EXPECT_DOUBLE_EQ(c.x, 1.0);
  EXPECT_DOUBLE_EQ(c.y, 0.5);
}

TEST(Domain, InvalidShapes) {
  EXPECT_THROW(Domain2D::disc(0, 0, 0), ConfigError);
  EXPECT_THROW(Domain2D::rectangle(1, 0, 0, 1), ConfigError);
}

TEST(Domain, SignedDistance) {
  const auto r = Domain2D::rectangle(0, 0, 2, 1);
  EXPECT_DOUBLE_EQ(r.signed_distance({1, 0.5}), -0.5);
  EXPECT_DOUBLE_EQ(r.signed_distance({3, 0.5}), 1.0);
  EXPECT_DOUBLE_EQ(r.signed_distance({3, 2}), std::sqrt(2.0));
  const auto d = Domain2D::disc(2, 0, 0.5);
  EXPECT_DOUBLE_EQ(d.signed_distance({2, 0}), -0.5);
  EXPECT_DOUBLE_EQ(d.signed_distance({3, 0}), 0.5);
}

TEST(Domain, RayExitLandsOnBoundary) {
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> u(0, 1), ang(0, 2 * std::numbers::pi);
  for (const auto& dom : {Domain2D::rectangle(1, 1, 2, 2), Domain2D::disc(2, 0, 0.5)}) {
    const auto box = dom.bounding_box();
    for (int i = 0; i < 500; ++i) {
      const Point q{box[0] + (box[2] - box[0]) * u(rng), box[1] + (box[3] - box[1]) * u(rng)};
      if (!dom.contains(q)) continue;
      const double a = ang(rng);
      const double t = dom.ray_exit(q, std::cos(a), std::sin(a));
      EXPECT_NEAR(dom.signed_distance({q.x + t * std::cos(a), q.y + t * std::sin(a)}), 0.0, 1e-12);
    }
  }
}

TEST(Domain, ProjectAndBoundaryPoints) {
  const auto d = Domain2D::disc(2, 0, 0.5);
  const Point p = d.project({2.1, 0.0});
  EXPECT_DOUBLE_EQ(p.x, 2.5);
  const auto r = Domain2D::rectangle(0, 0, 2, 1);
  const Point q = r.project({1.0, 0.9});
  EXPECT_DOUBLE_EQ(q.y, 1.0);
  for (double th = 0; th < 1; th += 0.01) {
    EXPECT_NEAR(d.signed_distance(d.boundary_point(th)), 0.0, 1e-14);
    EXPECT_NEAR(r.signed_distance(r.boundary_point(th)), 0.0, 1e-14);
  }
  EXPECT_DOUBLE_EQ(r.perimeter(), 6.0);
}

TEST(Grid, InteriorNodesAndLinks) {
  const auto dom = Domain2D::disc(2, 0, 0.5);
  const double h = 1.0 / 16;
  Grid g(dom, h);
  ASSERT_GT(g.size(), 0u);
  for (std::size_t n = 0; n < g.size(); ++n) {
    const Point c = g.position(n);
    EXPECT_LT(dom.signed_distance(c), -0.5 * h);
    for (std::size_t d = 0; d < 8; ++d) {
      const Link& L = g.links(n)[d];
      if (L.node >= 0) {
        const auto a = g.ij(n), b = g.ij(static_cast<std::size_t>(L.node));
        EXPECT_EQ(b[0] - a[0], kNeighborOffsets[d][0]);
        EXPECT_EQ(b[1] - a[1], kNeighborOffsets[d][1]);
      } else {
        EXPECT_GT(L.frac, 0.0);
        EXPECT_NEAR(dom.signed_distance(L.boundary), 0.0, 1e-12);
      }
    }
  }
  EXPECT_THROW(Grid(dom, 2.0), ConfigError);
}
