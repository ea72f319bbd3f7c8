#pragma once

// Output files: atomic writes, solution CSV, P5 heatmaps.

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <limits>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "ngt/domain.hpp"
#include "ngt/error.hpp"

namespace ngt::io {

/// Writes `data` to `path` through a sibling temporary file and a rename.
inline void write_atomic(const std::filesystem::path& path, std::string_view data) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::filesystem::path tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw Error("cannot open " + tmp.string() + " for writing");
    out.write(data.data(), static_cast<std::streamsize>(data.size()));
    out.flush();
    if (!out) throw Error("write failed for " + tmp.string());
  }
  std::error_code ec;
  std::filesystem::rename(tmp, path, ec);
  if (ec) {
    std::filesystem::remove(tmp);
    throw Error("cannot rename " + tmp.string() + " to " + path.string() + ": " + ec.message());
  }
}

inline std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("cannot read " + path.string());
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

/// Columns x, y, v, u at every interior node.
inline std::string solution_csv(const Grid& grid, std::span<const double> v, std::span<const double> u) {
  std::string out = "x,y,v,u\n";
  char buf[160];
  for (std::size_t n = 0; n < grid.size(); ++n) {
    const Point q = grid.position(n);
    const double un = n < u.size() ? u[n] : std::numeric_limits<double>::quiet_NaN();
    std::snprintf(buf, sizeof buf, "%.17g,%.17g,%.17g,%.17g\n", q.x, q.y, v[n], un);
    out += buf;
  }
  return out;
}

/// Binary P5 heatmap over the lattice, top row = largest y. Interior values
/// map linearly onto 1..255; nodes outside the interior are 0.
inline std::string heatmap_pgm(const Grid& grid, std::span<const double> values) {
  double lo = std::numeric_limits<double>::infinity(), hi = -lo;
  for (double x : values)
    if (std::isfinite(x)) {
      lo = std::min(lo, x);
      hi = std::max(hi, x);
    }
  if (!(lo <= hi)) lo = hi = 0.0;
  char head[160];
  std::snprintf(head, sizeof head, "P5\n# min=%.17g max=%.17g\n%d %d\n255\n", lo, hi, grid.nx(), grid.ny());
  std::string out = head;
  const double span = hi - lo;
  for (int j = grid.ny() - 1; j >= 0; --j)
    for (int i = 0; i < grid.nx(); ++i) {
      const int k = grid.node_at(i, j);
      unsigned char px = 0;
      if (k >= 0) {
        const double x = values[static_cast<std::size_t>(k)];
        if (std::isfinite(x)) {
          const double r = span > 0.0 ? (x - lo) / span : 0.5;
          px = static_cast<unsigned char>(1 + std::lround(254.0 * std::clamp(r, 0.0, 1.0)));
        }
      }
      out.push_back(static_cast<char>(px));
    }
  return out;
}

}  // namespace ngt::io
