#pragma once

// One-dimensional quadrature: fixed Gauss-Legendre rules and an adaptive
// Simpson integrator with Richardson correction.

#include <array>
#include <cmath>
#include <string>

#include "ngt/error.hpp"

namespace ngt::quad {

struct Rule8 {
  static constexpr std::array<double, 8> x{-0.96028985649753623168, -0.79666647741362673959, -0.52553240991632898582,
                                           -0.18343464249564980494, 0.18343464249564980494,  0.52553240991632898582,
                                           0.79666647741362673959,  0.96028985649753623168};
  static constexpr std::array<double, 8> w{0.10122853629037625915, 0.22238103445337447054, 0.31370664587788728734,
                                           0.36268378337836198297, 0.36268378337836198297, 0.31370664587788728734,
                                           0.22238103445337447054, 0.10122853629037625915};
};

struct Rule5 {
  static constexpr std::array<double, 5> x{-0.9061798459386639928, -0.53846931010568309104, 0.0,
                                           0.53846931010568309104, 0.9061798459386639928};
  static constexpr std::array<double, 5> w{0.23692688505618908751, 0.47862867049936646804, 0.56888888888888888889,
                                           0.47862867049936646804, 0.23692688505618908751};
};

/// Gauss-Legendre on [a, b]; b < a gives the signed integral.
template <class Rule = Rule8, class F>
double gauss(F&& f, double a, double b) {
  const double mid = 0.5 * (a + b);
  const double half = 0.5 * (b - a);
  double s = 0.0;
  for (std::size_t i = 0; i < Rule::x.size(); ++i) s += Rule::w[i] * f(mid + half * Rule::x[i]);
  return half * s;
}

/// Composite Gauss-Legendre with `panels` equal panels.
template <class Rule = Rule8, class F>
double gauss_composite(F&& f, double a, double b, int panels) {
  const double h = (b - a) / panels;
  double s = 0.0;
  for (int i = 0; i < panels; ++i) s += gauss<Rule>(f, a + i * h, (i + 1 == panels) ? b : a + (i + 1) * h);
  return s;
}

namespace detail {

template <class F>
double simpson_step(F& f, double a, double fa, double m, double fm, double b, double fb, double whole, double tol,
                    int depth, int& evals) {
  const double lm = 0.5 * (a + m);
  const double rm = 0.5 * (m + b);
  const double flm = f(lm);
  const double frm = f(rm);
  evals += 2;
  if (!std::isfinite(flm) || !std::isfinite(frm))
    throw QuadratureError("non-finite integrand near t = " + std::to_string(std::isfinite(flm) ? rm : lm));
  const double left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
  const double right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
  const double delta = left + right - whole;
  if (depth <= 0 || std::fabs(delta) <= 15.0 * tol) return left + right + delta / 15.0;
  return simpson_step(f, a, fa, lm, flm, m, fm, left, 0.5 * tol, depth - 1, evals) +
         simpson_step(f, m, fm, rm, frm, b, fb, right, 0.5 * tol, depth - 1, evals);
}

}  // namespace detail

struct SimpsonResult {
  double value = 0.0;
  int evaluations = 0;
};

/// Adaptive Simpson with the usual |S2 - S1| <= 15 tol acceptance.
template <class F>
SimpsonResult adaptive_simpson(F&& f, double a, double b, double tol, int max_depth = 50) {
  SimpsonResult r;
  if (a == b) return r;
  const double m = 0.5 * (a + b);
  const double fa = f(a), fm = f(m), fb = f(b);
  if (!std::isfinite(fa) || !std::isfinite(fm) || !std::isfinite(fb))
    throw QuadratureError("non-finite integrand on [" + std::to_string(a) + ", " + std::to_string(b) + "]");
  r.evaluations = 3;
  const double whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
  r.value = detail::simpson_step(f, a, fa, m, fm, b, fb, whole, tol, max_depth, r.evaluations);
  return r;
}

}  // namespace ngt::quad
