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

#include <algorithm>
#include <array>
#include <cmath>
#include <optional>
#include <stdexcept>

#include "cvqkd/observation.hpp"

namespace cvqkd {

struct UnphysicalObservation : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Everything the worst-case search learns from the observed moments: the
/// per-bit mixedness caps U[x], the coherent overlap kappa of the received
/// mean amplitudes, and the overlap of the sender's input states.
struct MomentBounds {
  std::array<double, 2> U{0.0, 0.0};
  double kappa = 1.0;
  double input_overlap = 1.0;
};

/// One candidate setting of the unobservable adversary parameters:
/// eps[x] bounds the mixedness of the received conditional state, eps_tilde[x]
/// its dominant-eigenvalue deficit, and gamma the overlap modulus of the
/// eavesdropper's two dominant conditional eigenstates. Feasible points
/// satisfy 0 <= eps_tilde[x] <= eps[x] <= U[x] and eps_tilde[x] < 1/2.
struct InteriorPoint {
  std::array<double, 2> eps{0.0, 0.0};
  std::array<double, 2> eps_tilde{0.0, 0.0};
  double gamma = 1.0;
};

struct OverlapInterval {
  double lo = 0.0;
  double hi = 1.0;
};

/// Upper bound on the mixedness of a state with the given conditional
/// quadrature variances:
///
///   U = [(var_q + 1/2)(var_p + 1/2) - 1] / 2, floored at 0.
///
/// Observations with var_q * var_p below the uncertainty product 1/4 are
/// incompatible with quantum mechanics and rejected.
inline double mixedness_bound(double var_q, double var_p) {
  if (var_q * var_p < 0.25 - 1e-9) {
    throw UnphysicalObservation(
        "mixedness_bound: variance product below the uncertainty limit");
  }
  return std::max(0.0, 0.5 * ((var_q + 0.5) * (var_p + 0.5) - 1.0));
}

/// Coherent-state overlap modulus of the two conditional mean amplitudes
/// beta[x] = mean_q[x] + i mean_p[x]: exp(-|beta0 - beta1|^2 / 2).
inline double kappa_from_stats(const ObservedStatistics& stats) {
  const double dq = stats.mean_q[0] - stats.mean_q[1];
  const double dp = stats.mean_p[0] - stats.mean_p[1];
  return std::exp(-0.5 * (dq * dq + dp * dp));
}

/// Overlap modulus of the two input signal states, exp(-2 alpha^2).
inline double input_overlap(double alpha) {
  if (!(alpha >= 0.0)) {
    throw std::domain_error("input_overlap: alpha must be >= 0");
  }
  return std::exp(-2.0 * alpha * alpha);
}

inline MomentBounds moment_bounds(const ObservedStatistics& stats,
                                  double alpha) {
  MomentBounds mb;
  mb.U = {mixedness_bound(stats.var_q[0], stats.var_p[0]),
          mixedness_bound(stats.var_q[1], stats.var_p[1])};
  mb.kappa = kappa_from_stats(stats);
  mb.input_overlap = input_overlap(alpha);
  return mb;
}

namespace detail {

// Radicands may dip below zero by this much from rounding at box corners
// before the interior point counts as violating its own constraints.
inline constexpr double kRadicandTol = 1e-12;

inline bool guarded_sqrt(double radicand, double& out) {
  if (radicand < -kRadicandTol) {
    return false;
  }
  out = std::sqrt(std::max(radicand, 0.0));
  return true;
}

}  // namespace detail

/// Interval certain to contain the overlap modulus of the receiver's two
/// dominant conditional eigenstates, given the interior point and the mean
/// overlap kappa. Both ends are clamped into [0,1]; clamping can only widen
/// the adversary's feasible set. Returns nullopt when the point violates its
/// own constraints (negative radicand beyond tolerance).
inline std::optional<OverlapInterval> bob_overlap_interval(
    const InteriorPoint& pt, double kappa) {
  double head[2];   // sqrt[(1-eps)/(1-eps_tilde)]
  double cross[2];  // sqrt[(eps-eps_tilde)/(1-2 eps_tilde)]
  double floor[2];  // sqrt[(1-eps-eps_tilde)/(1-2 eps_tilde)]
  for (int x = 0; x < 2; ++x) {
    const double e = pt.eps[x];
    const double t = pt.eps_tilde[x];
    const double one_minus_t = 1.0 - t;
    const double one_minus_2t = 1.0 - 2.0 * t;
    if (one_minus_2t <= detail::kRadicandTol) {
      return std::nullopt;  // eps_tilde must stay below 1/2
    }
    if (!detail::guarded_sqrt((1.0 - e) / one_minus_t, head[x]) ||
        !detail::guarded_sqrt((e - t) / one_minus_2t, cross[x]) ||
        !detail::guarded_sqrt((1.0 - e - t) / one_minus_2t, floor[x])) {
      return std::nullopt;
    }
  }
  double kappa_complement;
  if (!detail::guarded_sqrt(1.0 - kappa * kappa, kappa_complement)) {
    return std::nullopt;
  }
  const double correction =
      kappa_complement * (head[0] * cross[1] + head[1] * cross[0]) +
      cross[0] * cross[1];
  OverlapInterval c;
  c.hi = std::clamp(kappa * head[0] * head[1] + correction, 0.0, 1.0);
  c.lo = std::clamp(kappa * floor[0] * floor[1] - correction, 0.0, 1.0);
  return c;
}

/// Interval constraining the overlap gamma of the eavesdropper's dominant
/// conditional eigenstates, from the preserved input overlap and the
/// receiver-side interval c. The upper end degenerates to 1 when c.lo
/// vanishes; the point is infeasible (nullopt) when even the smallest
/// admissible gamma would exceed 1, or when the clamped ends cross.
inline std::optional<OverlapInterval> eve_overlap_interval(
    const InteriorPoint& pt, double in_ov, const OverlapInterval& c) {
  constexpr double kTiny = 1e-12;
  const double t0 = pt.eps_tilde[0];
  const double t1 = pt.eps_tilde[1];
  const double mix = std::sqrt((1.0 - t1) * t0) + std::sqrt((1.0 - t0) * t1);
  const double spread = std::sqrt(mix * mix + t0 * t1);
  const double scale = std::sqrt((1.0 - t0) * (1.0 - t1));

  OverlapInterval d;
  const double lo_numer = in_ov - spread;
  if (lo_numer <= 0.0) {
    d.lo = 0.0;
  } else if (c.hi <= kTiny) {
    return std::nullopt;  // any nonzero lower bound exceeds a null overlap
  } else {
    const double raw = lo_numer / (scale * c.hi);
    if (raw > 1.0 + kTiny) {
      return std::nullopt;  // no admissible gamma at this interior point
    }
    d.lo = std::min(raw, 1.0);
  }

  if (c.lo <= kTiny) {
    d.hi = 1.0;  // the bound degenerates; stay maximally pessimistic
  } else {
    d.hi = std::clamp((in_ov + spread) / (scale * c.lo), 0.0, 1.0);
  }

  if (d.lo > d.hi) {
    return std::nullopt;
  }
  return d;
}

}  // namespace cvqkd
