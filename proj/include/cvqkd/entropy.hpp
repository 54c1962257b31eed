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
#include <cmath>
#include <stdexcept>

namespace cvqkd {

// Inputs may miss [0,1] by floating-point noise up to this amount; anything
// worse is a caller bug.
inline constexpr double kDomainTol = 1e-12;

/// Binary entropy -z log2(z) - (1-z) log2(1-z) in bits, with 0 log 0 := 0.
inline double binary_entropy(double z) {
  if (z < -kDomainTol || z > 1.0 + kDomainTol) {
    throw std::domain_error("binary_entropy: argument outside [0,1]");
  }
  if (z <= 0.0 || z >= 1.0) {
    return 0.0;
  }
  return -(z * std::log2(z) + (1.0 - z) * std::log2(1.0 - z));
}

/// Entropy in bits of a binary mixture of two pure states with prior p on the
/// first and overlap modulus gamma between them:
///
///   g(p, gamma) = h[ 1/2 - 1/2 sqrt(1 - 4 p (1-p) (1 - gamma^2)) ]
///
/// g(p, 1) == 0 exactly. For fixed p, g is nonincreasing and concave in gamma,
/// and g(p, gamma) == g(1-p, gamma).
inline double g_function(double p, double gamma) {
  if (p < -kDomainTol || p > 1.0 + kDomainTol) {
    throw std::domain_error("g_function: probability outside [0,1]");
  }
  if (gamma < -kDomainTol || gamma > 1.0 + kDomainTol) {
    throw std::domain_error("g_function: overlap outside [0,1]");
  }
  p = std::clamp(p, 0.0, 1.0);
  gamma = std::clamp(gamma, 0.0, 1.0);
  // Cancellation can push the radicand slightly negative; the analytic value
  // lies in [0,1].
  double radicand = 1.0 - 4.0 * p * (1.0 - p) * (1.0 - gamma * gamma);
  radicand = std::clamp(radicand, 0.0, 1.0);
  return binary_entropy(0.5 - 0.5 * std::sqrt(radicand));
}

}  // namespace cvqkd
