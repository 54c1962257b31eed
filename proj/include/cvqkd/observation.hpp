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
#include <cstdint>
#include <numbers>
#include <random>
#include <stdexcept>
#include <string>
#include <vector>

#include "cvqkd/entropy.hpp"
#include "cvqkd/quadrature.hpp"

namespace cvqkd {

struct InsufficientData : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Physical scenario for a binary-modulated coherent-state channel. The
/// receiver sees conditional q-means +-mean_scale*sqrt(eta)*alpha and a
/// conditional variance (1+delta)/2 in both quadratures (shot-noise units,
/// vacuum variance 1/2).
struct ChannelParams {
  double alpha = 0.5;       // signal amplitude, >= 0
  double eta = 1.0;         // channel transmission, in (0,1]
  double delta = 0.0;       // excess noise relative to vacuum variance, >= 0
  double mean_scale = 1.0;  // convention factor multiplying the q-means

  void validate() const {
    if (!(alpha >= 0.0)) {
      throw std::invalid_argument("ChannelParams: alpha must be >= 0");
    }
    if (!(eta > 0.0 && eta <= 1.0)) {
      throw std::invalid_argument("ChannelParams: eta must be in (0,1]");
    }
    if (!(delta >= 0.0)) {
      throw std::invalid_argument("ChannelParams: delta must be >= 0");
    }
    if (!(mean_scale > 0.0)) {
      throw std::invalid_argument("ChannelParams: mean_scale must be > 0");
    }
  }
};

/// Gaussian model of P(y|x): normal with mean mu[x] and shared variance var.
/// The symmetric protocol has mu[0] == -mu[1].
struct GaussianConditional {
  std::array<double, 2> mu{0.0, 0.0};
  double var = 0.5;

  double density(double y, int x) const {
    const double d = y - mu[x];
    return std::exp(-d * d / (2.0 * var)) /
           std::sqrt(2.0 * std::numbers::pi * var);
  }
  double marginal(double y) const {
    return 0.5 * (density(y, 0) + density(y, 1));
  }
};

/// Per-bit conditional first and second moments of both quadratures. This is
/// the only channel knowledge the key-rate bound consumes. Bit priors are
/// fixed at 1/2 by the uniform modulation.
struct ObservedStatistics {
  std::array<double, 2> mean_q{};
  std::array<double, 2> mean_p{};
  std::array<double, 2> var_q{};
  std::array<double, 2> var_p{};
  // Sample counts indexed [x][basis] with basis 0 = q, 1 = p; zero for
  // analytically derived statistics.
  std::array<std::array<std::int64_t, 2>, 2> n{};
  bool analytic = false;
};

enum class Basis : std::uint8_t { q = 0, p = 1 };

struct RecordEntry {
  std::uint8_t x;
  Basis basis;
  double y;
};

struct HomodyneRecord {
  std::vector<RecordEntry> entries;
};

inline GaussianConditional conditional_from_params(const ChannelParams& p) {
  p.validate();
  const double m = p.mean_scale * std::sqrt(p.eta) * p.alpha;
  return GaussianConditional{{-m, m}, 0.5 * (1.0 + p.delta)};
}

/// Analytic shortcut producing the statistics the simulator converges to,
/// bypassing sampling.
inline ObservedStatistics stats_from_params(const ChannelParams& p) {
  const GaussianConditional dist = conditional_from_params(p);
  ObservedStatistics s;
  s.mean_q = dist.mu;
  s.mean_p = {0.0, 0.0};
  s.var_q = {dist.var, dist.var};
  s.var_p = {dist.var, dist.var};
  s.analytic = true;
  return s;
}

/// Draws n homodyne outcomes with uniform bit and basis choices. q-basis
/// outcomes follow Normal(mu[x], var), p-basis outcomes Normal(0, var).
/// Deterministic for a fixed seed within one build.
inline HomodyneRecord sample_record(const GaussianConditional& dist,
                                    std::int64_t n, std::uint64_t seed) {
  if (n < 1) {
    throw std::invalid_argument("sample_record: need n >= 1");
  }
  std::mt19937_64 rng(seed);
  std::bernoulli_distribution coin(0.5);
  std::normal_distribution<double> unit(0.0, 1.0);
  const double sd = std::sqrt(dist.var);

  HomodyneRecord record;
  record.entries.reserve(static_cast<std::size_t>(n));
  for (std::int64_t i = 0; i < n; ++i) {
    const std::uint8_t x = coin(rng) ? 1 : 0;
    const Basis basis = coin(rng) ? Basis::p : Basis::q;
    const double mean = basis == Basis::q ? dist.mu[x] : 0.0;
    record.entries.push_back({x, basis, mean + sd * unit(rng)});
  }
  return record;
}

/// Splits a record into the q-basis part (kept for the key) and the p-basis
/// part (published for channel testing).
inline std::pair<HomodyneRecord, HomodyneRecord> sift(
    const HomodyneRecord& record) {
  std::pair<HomodyneRecord, HomodyneRecord> parts;
  for (const RecordEntry& e : record.entries) {
    (e.basis == Basis::q ? parts.first : parts.second).entries.push_back(e);
  }
  return parts;
}

namespace detail {

struct CellAccumulator {
  std::int64_t n = 0;
  double sum = 0.0;

  void add(double y) {
    ++n;
    sum += y;
  }
};

}  // namespace detail

/// Conditional sample means and unbiased (n-1) sample variances per bit:
/// q moments from the key part, p moments from the test part. Every (x, basis)
/// cell must contain at least two entries.
inline ObservedStatistics estimate_statistics(const HomodyneRecord& key_part,
                                              const HomodyneRecord& test_part) {
  ObservedStatistics s;
  for (int basis = 0; basis < 2; ++basis) {
    const HomodyneRecord& part = basis == 0 ? key_part : test_part;
    const Basis want = basis == 0 ? Basis::q : Basis::p;
    detail::CellAccumulator cells[2];
    for (const RecordEntry& e : part.entries) {
      if (e.basis == want) {
        cells[e.x].add(e.y);
      }
    }
    for (int x = 0; x < 2; ++x) {
      if (cells[x].n < 2) {
        throw InsufficientData("estimate_statistics: cell (x=" +
                               std::to_string(x) + ", basis=" +
                               (basis == 0 ? std::string("q") : "p") +
                               ") has fewer than 2 entries");
      }
      const double mean = cells[x].sum / static_cast<double>(cells[x].n);
      double ss = 0.0;
      for (const RecordEntry& e : part.entries) {
        if (e.basis == want && e.x == x) {
          const double d = e.y - mean;
          ss += d * d;
        }
      }
      const double var = ss / static_cast<double>(cells[x].n - 1);
      if (basis == 0) {
        s.mean_q[x] = mean;
        s.var_q[x] = var;
      } else {
        s.mean_p[x] = mean;
        s.var_p[x] = var;
      }
      s.n[x][basis] = cells[x].n;
    }
  }
  return s;
}

/// P(x=0 | y) under uniform priors, evaluated in logistic form so the tails
/// stay finite.
inline double posterior_p0(const GaussianConditional& dist, double y) {
  const double d0 = y - dist.mu[0];
  const double d1 = y - dist.mu[1];
  const double t = (d1 * d1 - d0 * d0) / (2.0 * dist.var);
  if (t >= 0.0) {
    return 1.0 / (1.0 + std::exp(-t));
  }
  const double e = std::exp(t);
  return e / (1.0 + e);
}

/// Mutual information I(X:Y) in bits between the uniform input bit and the
/// continuous q-outcome: 1 - Int P(y) h(P(0|y)) dy, by adaptive quadrature
/// over [min(mu) - k sigma, max(mu) + k sigma].
inline double mutual_info_xy(const GaussianConditional& dist,
                             const QuadratureConfig& quad = {}) {
  const double sd = std::sqrt(dist.var);
  const double lo =
      std::min(dist.mu[0], dist.mu[1]) - quad.range_sigmas * sd;
  const double hi =
      std::max(dist.mu[0], dist.mu[1]) + quad.range_sigmas * sd;
  const double conditional = integrate(
      [&](double y) {
        return dist.marginal(y) * binary_entropy(posterior_p0(dist, y));
      },
      lo, hi, quad);
  return std::clamp(1.0 - conditional, 0.0, 1.0);
}

struct Announcement {
  int y_tilde;  // key bit: 0 for y < 0, 1 otherwise
  double u;     // announced modulus |y|
};

inline Announcement discretize_announce(double y) {
  return Announcement{y < 0.0 ? 0 : 1, std::abs(y)};
}

struct BinnedCmiEstimate {
  double value = 0.0;  // plug-in conditional mutual information, bits
  // Joint counts per modulus bin, indexed [bin][x][y_tilde].
  std::vector<std::array<std::array<std::int64_t, 2>, 2>> counts;
  std::int64_t total = 0;
};

/// Conditional mutual information of a [bin][x][y_tilde] count table.
inline double binned_cmi_from_counts(
    const std::vector<std::array<std::array<std::int64_t, 2>, 2>>& counts,
    std::int64_t total) {
  double cmi = 0.0;
  for (const auto& cell : counts) {
    const double n_bin = static_cast<double>(cell[0][0] + cell[0][1] +
                                             cell[1][0] + cell[1][1]);
    if (n_bin == 0.0) {
      continue;
    }
    for (int x = 0; x < 2; ++x) {
      for (int t = 0; t < 2; ++t) {
        const double n_xt = static_cast<double>(cell[x][t]);
        if (n_xt == 0.0) {
          continue;
        }
        const double n_x = static_cast<double>(cell[x][0] + cell[x][1]);
        const double n_t = static_cast<double>(cell[0][t] + cell[1][t]);
        cmi += n_xt * std::log2(n_xt * n_bin / (n_x * n_t));
      }
    }
  }
  return cmi / static_cast<double>(total);
}

/// Plug-in estimate of I(X : Ytilde | U) from the q-basis entries of a
/// record, with the announcement u = |y| coarse-grained into equal-count
/// bins. Used to check that announcing the modulus costs no key for
/// symmetric channels; the counts are exposed so callers can bootstrap an
/// error bar.
inline BinnedCmiEstimate binned_conditional_mutual_info(
    const HomodyneRecord& key_part, int n_bins) {
  if (n_bins < 1) {
    throw std::invalid_argument(
        "binned_conditional_mutual_info: need n_bins >= 1");
  }
  std::vector<double> moduli;
  moduli.reserve(key_part.entries.size());
  for (const RecordEntry& e : key_part.entries) {
    if (e.basis == Basis::q) {
      moduli.push_back(std::abs(e.y));
    }
  }
  if (moduli.size() < static_cast<std::size_t>(4 * n_bins)) {
    throw InsufficientData(
        "binned_conditional_mutual_info: too few q-basis entries");
  }
  std::sort(moduli.begin(), moduli.end());

  // Equal-count bin edges from the empirical modulus quantiles.
  std::vector<double> edges(static_cast<std::size_t>(n_bins) - 1);
  for (int b = 1; b < n_bins; ++b) {
    edges[static_cast<std::size_t>(b) - 1] =
        moduli[moduli.size() * static_cast<std::size_t>(b) /
               static_cast<std::size_t>(n_bins)];
  }

  BinnedCmiEstimate est;
  est.counts.assign(static_cast<std::size_t>(n_bins), {});
  for (const RecordEntry& e : key_part.entries) {
    if (e.basis != Basis::q) {
      continue;
    }
    const Announcement a = discretize_announce(e.y);
    const auto it = std::upper_bound(edges.begin(), edges.end(), a.u);
    const auto bin = static_cast<std::size_t>(it - edges.begin());
    ++est.counts[bin][e.x][a.y_tilde];
    ++est.total;
  }
  est.value = binned_cmi_from_counts(est.counts, est.total);
  return est;
}

}  // namespace cvqkd
