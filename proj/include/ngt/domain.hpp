#pragma once

// Planar domains (axis-aligned rectangle, disc) and the uniform grid laid
// over them, with precomputed neighbor links for the solver stencils.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdio>
#include <limits>
#include <numbers>
#include <string>
#include <vector>

#include "ngt/error.hpp"

namespace ngt {

struct Point {
  double x = 0.0;
  double y = 0.0;
};

class Domain2D {
 public:
  enum class Shape { rectangle, disc };

  static Domain2D rectangle(double x0, double y0, double x1, double y1) {
    if (!(x1 > x0 && y1 > y0)) throw ConfigError("rectangle needs x1 > x0 and y1 > y0");
    return Domain2D(Shape::rectangle, {x0, y0, x1, y1});
  }

  static Domain2D disc(double cx, double cy, double r) {
    if (!(r > 0.0)) throw ConfigError("disc radius must be positive");
    return Domain2D(Shape::disc, {cx, cy, r, 0.0});
  }

  Shape shape() const noexcept { return shape_; }
  const std::array<double, 4>& params() const noexcept { return p_; }

  /// Negative inside, zero on the boundary.
  double signed_distance(Point q) const {
    if (shape_ == Shape::disc) return std::hypot(q.x - p_[0], q.y - p_[1]) - p_[2];
    const double dx = std::max(p_[0] - q.x, q.x - p_[2]);
    const double dy = std::max(p_[1] - q.y, q.y - p_[3]);
    if (dx <= 0.0 && dy <= 0.0) return std::max(dx, dy);
    return std::hypot(std::max(dx, 0.0), std::max(dy, 0.0));
  }

  bool contains(Point q) const { return signed_distance(q) <= 0.0; }

  /// Radius of the largest inscribed ball.
  double inball_radius() const {
    if (shape_ == Shape::disc) return p_[2];
    return 0.5 * std::min(p_[2] - p_[0], p_[3] - p_[1]);
  }

  Point inball_center() const {
    if (shape_ == Shape::disc) return {p_[0], p_[1]};
    return {0.5 * (p_[0] + p_[2]), 0.5 * (p_[1] + p_[3])};
  }

  /// Bounding box {x0, y0, x1, y1}.
  std::array<double, 4> bounding_box() const {
    if (shape_ == Shape::disc) return {p_[0] - p_[2], p_[1] - p_[2], p_[0] + p_[2], p_[1] + p_[2]};
    return p_;
  }

  /// Distance from an inside point q along the unit direction (dx, dy) to the boundary.
  double ray_exit(Point q, double dx, double dy) const {
    if (shape_ == Shape::disc) {
      const double ox = q.x - p_[0], oy = q.y - p_[1];
      const double b = ox * dx + oy * dy;
      const double c = ox * ox + oy * oy - p_[2] * p_[2];
      const double disc = std::max(0.0, b * b - c);
      return -b + std::sqrt(disc);
    }
    double t = std::numeric_limits<double>::infinity();
    if (dx > 0) t = std::min(t, (p_[2] - q.x) / dx);
    if (dx < 0) t = std::min(t, (p_[0] - q.x) / dx);
    if (dy > 0) t = std::min(t, (p_[3] - q.y) / dy);
    if (dy < 0) t = std::min(t, (p_[1] - q.y) / dy);
    return std::max(t, 0.0);
  }

  /// Nearest boundary point.
  Point project(Point q) const {
    if (shape_ == Shape::disc) {
      const double ox = q.x - p_[0], oy = q.y - p_[1];
      const double r = std::hypot(ox, oy);
      if (r == 0.0) return {p_[0] + p_[2], p_[1]};
      return {p_[0] + p_[2] * ox / r, p_[1] + p_[2] * oy / r};
    }
    if (!contains(q)) return {std::clamp(q.x, p_[0], p_[2]), std::clamp(q.y, p_[1], p_[3])};
    const double d[4] = {q.x - p_[0], p_[2] - q.x, q.y - p_[1], p_[3] - q.y};
    const int k = static_cast<int>(std::min_element(d, d + 4) - d);
    switch (k) {
      case 0: return {p_[0], q.y};
      case 1: return {p_[2], q.y};
      case 2: return {q.x, p_[1]};
      default: return {q.x, p_[3]};
    }
  }

  double perimeter() const {
    if (shape_ == Shape::disc) return 2.0 * std::numbers::pi * p_[2];
    return 2.0 * ((p_[2] - p_[0]) + (p_[3] - p_[1]));
  }

  /// Boundary point at arclength fraction theta in [0, 1), counter-clockwise.
  Point boundary_point(double theta) const {
    theta -= std::floor(theta);
    if (shape_ == Shape::disc) {
      const double a = 2.0 * std::numbers::pi * theta;
      return {p_[0] + p_[2] * std::cos(a), p_[1] + p_[2] * std::sin(a)};
    }
    const double w = p_[2] - p_[0], h = p_[3] - p_[1];
    double s = theta * perimeter();
    if (s < w) return {p_[0] + s, p_[1]};
    s -= w;
    if (s < h) return {p_[2], p_[1] + s};
    s -= h;
    if (s < w) return {p_[2] - s, p_[3]};
    s -= w;
    return {p_[0], p_[3] - s};
  }

  std::string describe() const {
    char buf[160];
    if (shape_ == Shape::disc)
      std::snprintf(buf, sizeof buf, "disc(center=(%.17g, %.17g), r=%.17g)", p_[0], p_[1], p_[2]);
    else
      std::snprintf(buf, sizeof buf, "rectangle([%.17g, %.17g] x [%.17g, %.17g])", p_[0], p_[2], p_[1], p_[3]);
    return buf;
  }

 private:
  Domain2D(Shape s, std::array<double, 4> p) : shape_(s), p_(p) {}

  Shape shape_;
  std::array<double, 4> p_;
};

/// Neighbor offsets in the fixed order E, W, N, S, NE, NW, SE, SW.
inline constexpr std::array<std::array<int, 2>, 8> kNeighborOffsets{
    {{1, 0}, {-1, 0}, {0, 1}, {0, -1}, {1, 1}, {-1, 1}, {1, -1}, {-1, -1}}};

/// A stencil link is either an interior node or a boundary crossing: the
/// boundary point sits at fraction `frac` of the way from the node to the
/// (missing) neighbor.
struct Link {
  int node = -1;
  double frac = 1.0;
  Point boundary;
};

class Grid {
 public:
  Grid(const Domain2D& domain, double h) : domain_(domain), h_(h) {
    if (!(h > 0.0)) throw ConfigError("grid spacing must be positive");
    const auto box = domain.bounding_box();
    x0_ = box[0];
    y0_ = box[1];
    nx_ = static_cast<int>(std::ceil((box[2] - box[0]) / h - 1e-9)) + 1;
    ny_ = static_cast<int>(std::ceil((box[3] - box[1]) / h - 1e-9)) + 1;
    if (static_cast<long long>(nx_) * ny_ > 50'000'000LL) throw ConfigError("grid too large");
    index_.assign(static_cast<std::size_t>(nx_) * static_cast<std::size_t>(ny_), -1);
    for (int j = 0; j < ny_; ++j)
      for (int i = 0; i < nx_; ++i) {
        const Point q = position(i, j);
        if (domain.signed_distance(q) < -0.5 * h) {
          index_[flat(i, j)] = static_cast<int>(nodes_.size());
          nodes_.push_back({i, j});
        }
      }
    if (nodes_.empty()) throw ConfigError("grid has no interior nodes; reduce h");
    links_.resize(nodes_.size());
    for (std::size_t n = 0; n < nodes_.size(); ++n) {
      const auto [i, j] = nodes_[n];
      const Point c = position(i, j);
      for (std::size_t d = 0; d < 8; ++d) {
        const int ii = i + kNeighborOffsets[d][0], jj = j + kNeighborOffsets[d][1];
        Link& L = links_[n][d];
        L.node = node_at(ii, jj);
        if (L.node >= 0) continue;
        const double len = std::hypot(kNeighborOffsets[d][0], kNeighborOffsets[d][1]);
        const double dx = kNeighborOffsets[d][0] / len, dy = kNeighborOffsets[d][1] / len;
        const double t = domain.ray_exit(c, dx, dy);
        L.frac = t / (len * h);
        L.boundary = {c.x + t * dx, c.y + t * dy};
      }
    }
  }

  const Domain2D& domain() const noexcept { return domain_; }
  double h() const noexcept { return h_; }
  int nx() const noexcept { return nx_; }
  int ny() const noexcept { return ny_; }
  std::size_t size() const noexcept { return nodes_.size(); }

  Point position(int i, int j) const { return {x0_ + i * h_, y0_ + j * h_}; }
  Point position(std::size_t n) const { return position(nodes_[n][0], nodes_[n][1]); }
  std::array<int, 2> ij(std::size_t n) const { return nodes_[n]; }

  /// Interior index of lattice node (i, j), or -1.
  int node_at(int i, int j) const {
    if (i < 0 || j < 0 || i >= nx_ || j >= ny_) return -1;
    return index_[flat(i, j)];
  }

  const std::array<Link, 8>& links(std::size_t n) const { return links_[n]; }

  /// True when every stencil neighbor is an interior node.
  bool full_stencil(std::size_t n) const {
    for (const auto& L : links_[n])
      if (L.node < 0) return false;
    return true;
  }

 private:
  std::size_t flat(int i, int j) const { return static_cast<std::size_t>(j) * nx_ + static_cast<std::size_t>(i); }

  Domain2D domain_;
  double h_;
  double x0_ = 0, y0_ = 0;
  int nx_ = 0, ny_ = 0;
  std::vector<int> index_;
  std::vector<std::array<int, 2>> nodes_;
  std::vector<std::array<Link, 8>> links_;
};

}  // namespace ngt
