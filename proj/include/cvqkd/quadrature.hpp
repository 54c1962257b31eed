// Copyright 2026 The cvqkd Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <cmath>
#include <queue>
#include <stdexcept>
#include <vector>

namespace cvqkd {

struct QuadratureConfig {
  double abs_tol = 1e-10;
  double rel_tol = 1e-8;
  double range_sigmas = 10.0;  // half-width of Gaussian integration windows
  int max_subdivisions = 65536;
};

struct QuadratureError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

namespace detail {

// 15-point Kronrod rule with embedded 7-point Gauss rule (QUADPACK dqk15
// abscissae/weights). Even-index abscissae are Kronrod-only points.
inline constexpr double kKronrodX[8] = {
    0.9914553711208126, 0.9491079123427585, 0.8648644233597691,
    0.7415311855993944, 0.5860872354676911, 0.4058451513773972,
    0.2077849550078985, 0.0};
inline constexpr double kKronrodW[8] = {
    0.02293532201052922, 0.06309209262997855, 0.1047900103222502,
    0.1406532597155259,  0.1690047266392679,  0.1903505780647854,
    0.2044329400752989,  0.2094821410847278};
inline constexpr double kGaussW[4] = {0.1294849661688697, 0.2797053914892767,
                                      0.3818300505051189, 0.4179591836734694};

template <class F>
void gauss_kronrod_15(const F& f, double a, double b, double& value,
                      double& error) {
  const double center = 0.5 * (a + b);
  const double half = 0.5 * (b - a);
  const double fc = f(center);
  double kronrod = kKronrodW[7] * fc;
  double gauss = kGaussW[3] * fc;
  for (int j = 0; j < 7; ++j) {
    const double dx = half * kKronrodX[j];
    const double fsum = f(center - dx) + f(center + dx);
    kronrod += kKronrodW[j] * fsum;
    if (j % 2 == 1) {
      gauss += kGaussW[j / 2] * fsum;
    }
  }
  value = kronrod * half;
  error = std::abs((kronrod - gauss) * half);
}

}  // namespace detail

/// Adaptive Gauss-Kronrod integration of f over [a,b]. Splits the segment
/// with the largest error estimate until the global estimate satisfies
/// max(abs_tol, rel_tol * |integral|), and throws QuadratureError if the
/// subdivision budget runs out first.
template <class F>
double integrate(const F& f, double a, double b,
                 const QuadratureConfig& cfg = {}) {
  struct Segment {
    double a, b, value, error;
    bool operator<(const Segment& o) const { return error < o.error; }
  };

  double value = 0.0;
  double error = 0.0;
  detail::gauss_kronrod_15(f, a, b, value, error);

  std::priority_queue<Segment> segments;
  segments.push({a, b, value, error});
  double total_value = value;
  double total_error = error;
  int n_segments = 1;

  while (total_error > std::max(cfg.abs_tol,
                                cfg.rel_tol * std::abs(total_value))) {
    if (n_segments >= cfg.max_subdivisions) {
      throw QuadratureError(
          "integrate: tolerance not reached within the subdivision budget");
    }
    const Segment worst = segments.top();
    segments.pop();
    total_value -= worst.value;
    total_error -= worst.error;

    const double mid = 0.5 * (worst.a + worst.b);
    double v_lo, e_lo, v_hi, e_hi;
    detail::gauss_kronrod_15(f, worst.a, mid, v_lo, e_lo);
    detail::gauss_kronrod_15(f, mid, worst.b, v_hi, e_hi);
    segments.push({worst.a, mid, v_lo, e_lo});
    segments.push({mid, worst.b, v_hi, e_hi});
    total_value += v_lo + v_hi;
    total_error += e_lo + e_hi;
    ++n_segments;
  }
  return total_value;
}

}  // namespace cvqkd
