#pragma once

// Operator catalog: symbol M(x, p, X), its entrywise gradient in X, the
// natural gradient term N = <d_X M p, p>, and randomized checks of the two
// homogeneity hypotheses.

#include <cmath>
#include <cstdint>
#include <cstdio>
#include <cstdlib>
#include <random>
#include <string>
#include <string_view>

#include "ngt/error.hpp"
#include "ngt/linalg.hpp"

namespace ngt {

enum class OperatorKind { laplace, m_laplace, k_hessian, infinity_laplace, normalized_infinity_laplace };

class OperatorSpec {
 public:
  static OperatorSpec laplace(int n) { return {OperatorKind::laplace, n, 0.0}; }

  static OperatorSpec m_laplace(int n, double m) {
    if (!(m >= 1.0) || !std::isfinite(m)) throw RangeError("m-laplace requires m >= 1");
    return {OperatorKind::m_laplace, n, m};
  }

  static OperatorSpec k_hessian(int n, int k) {
    check_dim(n);
    if (k < 1 || k > n)
      throw RangeError("k-hessian requires 1 <= k <= n (k = " + std::to_string(k) + ", n = " + std::to_string(n) + ")");
    return {OperatorKind::k_hessian, n, static_cast<double>(k)};
  }

  static OperatorSpec infinity_laplace(int n) { return {OperatorKind::infinity_laplace, n, 0.0}; }
  static OperatorSpec normalized_infinity_laplace(int n) { return {OperatorKind::normalized_infinity_laplace, n, 0.0}; }

  OperatorKind kind() const noexcept { return kind_; }
  int dim() const noexcept { return n_; }
  double m() const noexcept { return param_; }
  int k() const noexcept { return static_cast<int>(param_); }

  /// Homogeneity exponent in p.
  double alpha() const noexcept {
    switch (kind_) {
      case OperatorKind::m_laplace: return param_ - 2.0;
      case OperatorKind::infinity_laplace: return 2.0;
      default: return 0.0;
    }
  }

  /// Exponent of the rank-one expansion; always a nonnegative integer.
  int beta() const noexcept { return kind_ == OperatorKind::k_hessian ? k() - 1 : 0; }

  /// alpha + beta + 1, the power of Phi' carried by the transformed reaction term.
  double weight() const noexcept { return alpha() + beta() + 1.0; }

  std::string name() const {
    switch (kind_) {
      case OperatorKind::laplace: return "laplace";
      case OperatorKind::m_laplace: return "m-laplace:" + format_param(param_);
      case OperatorKind::k_hessian: return "k-hessian:" + std::to_string(k());
      case OperatorKind::infinity_laplace: return "infinity";
      case OperatorKind::normalized_infinity_laplace: return "normalized-infinity";
    }
    return "?";
  }

 private:
  OperatorSpec(OperatorKind kind, int n, double param) : kind_(kind), n_(n), param_(param) { check_dim(n); }

  static std::string format_param(double v) {
    if (v == std::floor(v) && std::fabs(v) < 1e15) return std::to_string(static_cast<long long>(v));
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
  }

  OperatorKind kind_;
  int n_;
  double param_;
};

/// Accepts "laplace", "m-laplace:<m>", "k-hessian:<k>", "infinity", "normalized-infinity".
inline OperatorSpec parse_operator(std::string_view name, int n) {
  auto suffix = [&](std::string_view prefix) -> std::string_view { return name.substr(prefix.size()); };
  auto number = [&](std::string_view text) -> double {
    std::string s(text);
    char* end = nullptr;
    const double v = std::strtod(s.c_str(), &end);
    if (s.empty() || end != s.c_str() + s.size() || !std::isfinite(v))
      throw ConfigError("bad operator parameter in '" + std::string(name) + "'");
    return v;
  };
  if (name == "laplace") return OperatorSpec::laplace(n);
  if (name == "infinity") return OperatorSpec::infinity_laplace(n);
  if (name == "normalized-infinity") return OperatorSpec::normalized_infinity_laplace(n);
  if (name.starts_with("m-laplace:")) return OperatorSpec::m_laplace(n, number(suffix("m-laplace:")));
  if (name.starts_with("k-hessian:")) {
    const double k = number(suffix("k-hessian:"));
    if (k != std::floor(k)) throw ConfigError("k-hessian order must be an integer");
    return OperatorSpec::k_hessian(n, static_cast<int>(k));
  }
  throw ConfigError("unknown operator '" + std::string(name) + "'");
}

struct Jet {
  Vec x;
  Vec p;
  Matrix X;
};

namespace detail {

inline void check_jet(const OperatorSpec& op, const Jet& j) {
  require_same_dim(op.dim(), j.p.dim(), "operator/jet gradient");
  require_same_dim(op.dim(), j.X.dim(), "operator/jet hessian");
  if (j.x.dim() != 0) require_same_dim(op.dim(), j.x.dim(), "operator/jet point");
}

inline bool is_zero(const Vec& p) {
  for (int i = 0; i < p.dim(); ++i)
    if (p[i] != 0.0) return false;
  return true;
}

}  // namespace detail

inline double eval_M(const OperatorSpec& op, const Jet& j) {
  detail::check_jet(op, j);
  switch (op.kind()) {
    case OperatorKind::laplace: return j.X.trace();
    case OperatorKind::k_hessian: return ktrace(j.X, op.k());
    case OperatorKind::infinity_laplace: return quad_form(j.X, j.p);
    case OperatorKind::normalized_infinity_laplace: {
      const double q = norm_sq(j.p);
      return q == 0.0 ? 0.0 : quad_form(j.X, j.p) / q;
    }
    case OperatorKind::m_laplace: {
      const double m = op.m();
      if (m == 2.0) return j.X.trace();
      const double q = norm_sq(j.p);
      if (q == 0.0) return 0.0;
      const double r = std::sqrt(q);
      return std::pow(r, m - 4.0) * (q * j.X.trace() + (m - 2.0) * quad_form(j.X, j.p));
    }
  }
  return 0.0;
}

/// Closed-form d_X M. Zero at p = 0 for every operator.
inline Matrix grad_M(const OperatorSpec& op, const Jet& j) {
  detail::check_jet(op, j);
  const int n = op.dim();
  if (detail::is_zero(j.p)) return Matrix(n);
  switch (op.kind()) {
    case OperatorKind::laplace: return Matrix::identity(n);
    case OperatorKind::k_hessian: return ktrace_gradient(j.X, op.k());
    case OperatorKind::infinity_laplace: return tensor(j.p, j.p);
    case OperatorKind::normalized_infinity_laplace: return (1.0 / norm_sq(j.p)) * tensor(j.p, j.p);
    case OperatorKind::m_laplace: {
      const double m = op.m();
      const double q = norm_sq(j.p);
      const double r = std::sqrt(q);
      return std::pow(r, m - 4.0) * (q * Matrix::identity(n) + (m - 2.0) * tensor(j.p, j.p));
    }
  }
  return Matrix(n);
}

inline double default_fd_step(const Matrix& X) { return 1e-5 * std::max(1.0, X.max_abs()); }

/// Central differences of eval_M, one entry of a general square matrix at a time.
inline Matrix grad_M_numeric(const OperatorSpec& op, const Jet& j, double step) {
  detail::check_jet(op, j);
  const int n = op.dim();
  Matrix G(n);
  if (detail::is_zero(j.p)) return G;
  Jet w = j;
  for (int a = 0; a < n; ++a)
    for (int b = 0; b < n; ++b) {
      const double orig = w.X(a, b);
      w.X(a, b) = orig + step;
      const double up = eval_M(op, w);
      w.X(a, b) = orig - step;
      const double down = eval_M(op, w);
      w.X(a, b) = orig;
      G(a, b) = (up - down) / (2.0 * step);
    }
  return G;
}

inline Matrix grad_M_numeric(const OperatorSpec& op, const Jet& j) { return grad_M_numeric(op, j, default_fd_step(j.X)); }

/// Natural gradient term in closed form.
inline double eval_N(const OperatorSpec& op, const Jet& j) {
  detail::check_jet(op, j);
  if (detail::is_zero(j.p)) return 0.0;
  const double q = norm_sq(j.p);
  switch (op.kind()) {
    case OperatorKind::laplace: return q;
    case OperatorKind::normalized_infinity_laplace: return q;
    case OperatorKind::infinity_laplace: return q * q;
    case OperatorKind::k_hessian: return quad_form(ktrace_gradient(j.X, op.k()), j.p);
    case OperatorKind::m_laplace: {
      const double m = op.m();
      if (m == 1.0) return 0.0;
      return (m - 1.0) * std::pow(std::sqrt(q), m);
    }
  }
  return 0.0;
}

inline double eval_N_numeric(const OperatorSpec& op, const Jet& j) { return quad_form(grad_M_numeric(op, j), j.p); }

// ---------------------------------------------------------------------------
// Randomized hypothesis checks

struct CheckReport {
  double max_rel_error = 0.0;
  double threshold = 0.0;
  int samples = 0;
  int worst_sample = -1;
  bool pass = false;
};

namespace detail {

class JetSampler {
 public:
  JetSampler(int n, std::uint64_t seed) : n_(n), rng_(seed) {}

  Jet jet() {
    Jet j{Vec(n_), Vec(n_), Matrix(n_)};
    for (int i = 0; i < n_; ++i) j.x[i] = uniform(-2, 2);
    do {
      for (int i = 0; i < n_; ++i) j.p[i] = uniform(-2, 2);
    } while (norm(j.p) < 0.1);
    for (int a = 0; a < n_; ++a)
      for (int b = a; b < n_; ++b) j.X(a, b) = j.X(b, a) = uniform(-2, 2);
    return j;
  }

  /// Uniform on [-3, -0.1] U [0.1, 3].
  double scale() {
    const double mag = uniform(0.1, 3.0);
    return uniform(0, 1) < 0.5 ? -mag : mag;
  }

  double uniform(double a, double b) { return std::uniform_real_distribution<double>(a, b)(rng_); }

 private:
  int n_;
  std::mt19937_64 rng_;
};

inline void record(CheckReport& r, double err, int i) {
  if (!(err <= r.max_rel_error)) {
    r.max_rel_error = err;
    r.worst_sample = i;
  }
}

}  // namespace detail

/// M(x, lambda p, X) = |lambda|^alpha M(x, p, X).
inline CheckReport check_h1(const OperatorSpec& op, int samples, std::uint64_t seed) {
  if (samples < 1) throw RangeError("check_h1: samples must be >= 1");
  detail::JetSampler gen(op.dim(), seed);
  CheckReport r;
  r.samples = samples;
  r.threshold = 1e-9;
  for (int i = 0; i < samples; ++i) {
    Jet j = gen.jet();
    const double lambda = gen.scale();
    const double base = eval_M(op, j);
    Jet scaled = j;
    scaled.p *= lambda;
    const double err = std::fabs(eval_M(op, scaled) - std::pow(std::fabs(lambda), op.alpha()) * base) / (1.0 + std::fabs(base));
    detail::record(r, err, i);
  }
  r.pass = r.max_rel_error <= r.threshold;
  return r;
}

/// M(x, p, gamma X + sigma p(x)p) = gamma^(beta+1) M + sigma gamma^beta N.
inline CheckReport check_h2(const OperatorSpec& op, int samples, std::uint64_t seed, bool numeric_N = false) {
  if (samples < 1) throw RangeError("check_h2: samples must be >= 1");
  detail::JetSampler gen(op.dim(), seed);
  CheckReport r;
  r.samples = samples;
  r.threshold = numeric_N ? 1e-6 : 1e-9;
  for (int i = 0; i < samples; ++i) {
    Jet j = gen.jet();
    const double gamma = gen.scale();
    const double sigma = gen.uniform(-3, 3);
    const double M = eval_M(op, j);
    const double N = numeric_N ? eval_N_numeric(op, j) : eval_N(op, j);
    Jet shifted = j;
    shifted.X = gamma * j.X + sigma * tensor(j.p, j.p);
    const double t1 = std::pow(gamma, op.beta() + 1) * M;
    const double t2 = sigma * std::pow(gamma, op.beta()) * N;
    const double err = std::fabs(eval_M(op, shifted) - t1 - t2) / (1.0 + std::fabs(t1) + std::fabs(t2));
    detail::record(r, err, i);
  }
  r.pass = r.max_rel_error <= r.threshold;
  return r;
}

/// |eval_N - <grad_M_numeric p, p>| / (1 + |eval_N|) over random jets.
inline CheckReport check_natural_term(const OperatorSpec& op, int samples, std::uint64_t seed) {
  if (samples < 1) throw RangeError("check_natural_term: samples must be >= 1");
  detail::JetSampler gen(op.dim(), seed);
  CheckReport r;
  r.samples = samples;
  r.threshold = 1e-5;
  for (int i = 0; i < samples; ++i) {
    Jet j = gen.jet();
    const double N = eval_N(op, j);
    detail::record(r, std::fabs(N - eval_N_numeric(op, j)) / (1.0 + std::fabs(N)), i);
  }
  r.pass = r.max_rel_error <= r.threshold;
  return r;
}

}  // namespace ngt
