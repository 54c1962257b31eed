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
#include <limits>
#include <map>
#include <optional>
#include <stdexcept>
#include <vector>

#include "cvqkd/bounds.hpp"
#include "cvqkd/entropy.hpp"
#include "cvqkd/observation.hpp"
#include "cvqkd/quadrature.hpp"

namespace cvqkd {

struct DivergentBound : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Controls for the worst-case grid search over the interior parameters and
/// the signal-amplitude optimization.
struct SearchConfig {
  int n_eps = 40;    // grid points per eps axis (and per eps_tilde axis)
  int n_gamma = 20;  // grid points across each [d_lo, d_hi] interval
  std::vector<double> alpha_grid = default_alpha_grid();
  bool symmetric = true;  // tie eps_0 = eps_1, eps_tilde_0 = eps_tilde_1
  double f_ec = 1.0;      // error-correction efficiency, >= 1

  static std::vector<double> default_alpha_grid() {
    std::vector<double> grid;
    for (int i = 0; i <= 20; ++i) {
      grid.push_back(0.05 * i);
    }
    return grid;
  }

  void validate() const {
    if (n_eps < 2 || n_gamma < 2) {
      throw std::invalid_argument("SearchConfig: grid counts must be >= 2");
    }
    if (!(f_ec >= 1.0)) {
      throw std::invalid_argument("SearchConfig: f_ec must be >= 1");
    }
  }
};

/// Full audit of one key-rate evaluation. The identities
/// S_YE_bound == S_E_given_X + s_max and
/// G == I_xy - S_YE_bound - (f_ec - 1)(1 - I_xy) hold by construction.
struct BoundBreakdown {
  double I_xy = 0.0;
  double S_E_given_X = 0.0;
  double s_max = 0.0;
  double S_YE_bound = 0.0;
  double G = 0.0;
  InteriorPoint argmax;
  double alpha_used = 0.0;
};

// Above this the 1/(1-gamma) factors are treated as divergent.
inline constexpr double kGammaGuard = 1.0 - 1e-9;

/// Conditional excess-noise measure sqrt(var_q * var_p) - 1/2, floored at 0.
inline double v_x(double var_q, double var_p) {
  return std::max(0.0, std::sqrt(var_q * var_p) - 0.5);
}

/// Entropy cap for the eavesdropper conditioned on the sent bit:
///   (1/2) sum_x [(1 + V_x) log2(1 + V_x) - V_x log2 V_x],
/// the Gaussian-extremal value for the observed second moments.
inline double entropy_E_given_X_bound(const std::array<double, 2>& V) {
  double total = 0.0;
  for (double v : V) {
    if (v < 1e-15) {
      continue;  // V log V -> 0
    }
    total += (1.0 + v) * std::log2(1.0 + v) - v * std::log2(v);
  }
  return 0.5 * total;
}

/// Cap on the bit-eavesdropper mutual information:
///   h[ (1 - sqrt((1-eps_tilde_0)(1-eps_tilde_1)) gamma) / 2 ].
inline double mutual_info_AE_bound(const InteriorPoint& pt) {
  const double head =
      std::sqrt((1.0 - pt.eps_tilde[0]) * (1.0 - pt.eps_tilde[1]));
  return binary_entropy(0.5 * (1.0 - head * pt.gamma));
}

/// Int P(y) g(P(0|y), gamma) dy by adaptive quadrature.
inline double integral_g(const GaussianConditional& dist, double gamma,
                         const QuadratureConfig& quad = {}) {
  if (gamma < -kDomainTol || gamma > 1.0 + kDomainTol) {
    throw std::domain_error("integral_g: overlap outside [0,1]");
  }
  const double sd = std::sqrt(dist.var);
  const double lo = std::min(dist.mu[0], dist.mu[1]) - quad.range_sigmas * sd;
  const double hi = std::max(dist.mu[0], dist.mu[1]) + quad.range_sigmas * sd;
  return integrate(
      [&](double y) {
        return dist.marginal(y) * g_function(posterior_p0(dist, y), gamma);
      },
      lo, hi, quad);
}

namespace detail {

// Int P(y) g^2(P(0|y), gamma) / P(x|y) dy, the integral inside k_x.
inline double k_integral(const GaussianConditional& dist, double gamma, int x,
                         const QuadratureConfig& quad) {
  const double sd = std::sqrt(dist.var);
  const double lo = std::min(dist.mu[0], dist.mu[1]) - quad.range_sigmas * sd;
  const double hi = std::max(dist.mu[0], dist.mu[1]) + quad.range_sigmas * sd;
  return integrate(
      [&](double y) {
        const double p0 = posterior_p0(dist, y);
        const double g = g_function(p0, gamma);
        const double px = x == 0 ? p0 : 1.0 - p0;
        return dist.marginal(y) * g * g / px;
      },
      lo, hi, quad);
}

inline double k_from_integral(double gamma, double integral) {
  return std::sqrt((1.0 + gamma) / (2.0 * (1.0 - gamma)) *
                   std::max(integral, 0.0));
}

}  // namespace detail

/// Correction coefficient
///   k_x = sqrt[ (1+gamma)/(2(1-gamma)) * Int P(y) g^2(P(0|y),gamma)/P(x|y) ].
/// Diverges as gamma -> 1.
inline double k_x(const GaussianConditional& dist, double gamma, int x,
                  const QuadratureConfig& quad = {}) {
  if (gamma >= kGammaGuard) {
    throw DivergentBound("k_x: diverges as gamma -> 1");
  }
  if (gamma < 0.0 || x < 0 || x > 1) {
    throw std::domain_error("k_x: bad arguments");
  }
  return detail::k_from_integral(gamma, detail::k_integral(dist, gamma, x, quad));
}

/// Correction coefficient g(1/2, gamma)/(1 - gamma); diverges as gamma -> 1.
inline double k_tilde(double gamma) {
  if (gamma >= kGammaGuard) {
    throw DivergentBound("k_tilde: diverges as gamma -> 1");
  }
  if (gamma < 0.0) {
    throw std::domain_error("k_tilde: overlap must be >= 0");
  }
  return g_function(0.5, gamma) / (1.0 - gamma);
}

/// The interior-parameter part of the eavesdropper-information cap:
///
///   s = h[(1 - sqrt((1-t0)(1-t1)) gamma)/2] - Int P(y) g(P(0|y), gamma) dy
///       + sqrt(t0) k_0 + sqrt(t1) k_1 + sqrt(t0 t1) k_tilde.
///
/// At gamma past the divergence guard the correction terms are zero when both
/// eps_tilde vanish; otherwise the bound is unbounded and +infinity is
/// returned so callers never mistake a diverged cap for a finite one.
inline double s_function(const GaussianConditional& dist,
                         const InteriorPoint& pt,
                         const QuadratureConfig& quad = {}) {
  const double t0 = pt.eps_tilde[0];
  const double t1 = pt.eps_tilde[1];
  if (pt.gamma >= kGammaGuard && (t0 > 0.0 || t1 > 0.0)) {
    return std::numeric_limits<double>::infinity();
  }
  double s = mutual_info_AE_bound(pt) - integral_g(dist, pt.gamma, quad);
  if (t0 > 0.0) {
    s += std::sqrt(t0) * k_x(dist, pt.gamma, 0, quad);
  }
  if (t1 > 0.0) {
    s += std::sqrt(t1) * k_x(dist, pt.gamma, 1, quad);
  }
  if (t0 > 0.0 && t1 > 0.0) {
    s += std::sqrt(t0 * t1) * k_tilde(pt.gamma);
  }
  return s;
}

namespace detail {

// Dense tables of the gamma-dependent integrals for one conditional
// distribution. A full grid search evaluates the s-function at tens of
// thousands of gamma values per amplitude; re-integrating at each one is two
// orders of magnitude too slow on one core, so the integrals are tabulated
// once on a fixed node set and read back through local cubic interpolation.
// The winning point is always re-evaluated with exact quadrature afterwards.
// Nodes are denser above 0.9 where the integrands steepen; queries beyond the
// last node fall back to exact quadrature (memoized).
class GammaTables {
 public:
  GammaTables(const GaussianConditional& dist, const QuadratureConfig& quad)
      : dist_(dist), quad_(quad) {
    nodes_.reserve(361 + 119);
    for (int i = 0; i <= 360; ++i) {
      nodes_.push_back(i * (0.9 / 360.0));
    }
    for (int i = 1; i <= 119; ++i) {
      nodes_.push_back(0.9 + i * 0.0008);
    }
    symmetric_ = std::abs(dist.mu[0] + dist.mu[1]) < 1e-12;
    const std::size_t n = nodes_.size();
    ig_.resize(n);
    j0_.resize(n);
    j1_.resize(n);
    for (std::size_t i = 0; i < n; ++i) {
      ig_[i] = integral_g(dist, nodes_[i], quad);
      j0_[i] = k_integral(dist, nodes_[i], 0, quad);
      j1_[i] = symmetric_ ? j0_[i] : k_integral(dist, nodes_[i], 1, quad);
    }
  }

  double integral_g_at(double gamma) const {
    if (gamma > nodes_.back()) {
      return exact(gamma).ig;
    }
    return interpolate(ig_, gamma);
  }

  double k_at(double gamma, int x) const {
    double j;
    if (gamma > nodes_.back()) {
      const Exact& e = exact(gamma);
      j = x == 0 ? e.j0 : e.j1;
    } else {
      j = interpolate(x == 0 ? j0_ : j1_, gamma);
    }
    return k_from_integral(gamma, j);
  }

 private:
  struct Exact {
    double ig, j0, j1;
  };

  const Exact& exact(double gamma) const {
    auto it = exact_cache_.find(gamma);
    if (it == exact_cache_.end()) {
      Exact e;
      e.ig = integral_g(dist_, gamma, quad_);
      e.j0 = k_integral(dist_, gamma, 0, quad_);
      e.j1 = symmetric_ ? e.j0 : k_integral(dist_, gamma, 1, quad_);
      it = exact_cache_.emplace(gamma, e).first;
    }
    return it->second;
  }

  double interpolate(const std::vector<double>& values, double gamma) const {
    // Locate the node interval, then 4-point Lagrange on the neighbours.
    std::size_t i;
    if (gamma <= 0.9) {
      i = static_cast<std::size_t>(gamma / (0.9 / 360.0));
    } else {
      i = 360 + static_cast<std::size_t>((gamma - 0.9) / 0.0008);
    }
    const std::size_t last = nodes_.size() - 1;
    std::size_t lo = i == 0 ? 0 : i - 1;
    lo = std::min(lo, last - 3);
    double result = 0.0;
    for (std::size_t a = lo; a < lo + 4; ++a) {
      double term = values[a];
      for (std::size_t b = lo; b < lo + 4; ++b) {
        if (b != a) {
          term *= (gamma - nodes_[b]) / (nodes_[a] - nodes_[b]);
        }
      }
      result += term;
    }
    return result;
  }

  GaussianConditional dist_;
  QuadratureConfig quad_;
  bool symmetric_ = true;
  std::vector<double> nodes_;
  std::vector<double> ig_, j0_, j1_;
  mutable std::map<double, Exact> exact_cache_;
};

// s-function evaluated through the tables; same divergence rule as
// s_function.
inline double s_from_tables(const GammaTables& tables, const InteriorPoint& pt) {
  const double t0 = pt.eps_tilde[0];
  const double t1 = pt.eps_tilde[1];
  if (pt.gamma >= kGammaGuard) {
    if (t0 > 0.0 || t1 > 0.0) {
      return std::numeric_limits<double>::infinity();
    }
    return mutual_info_AE_bound(pt);  // Int P g(.,1) == 0
  }
  double s = mutual_info_AE_bound(pt) - tables.integral_g_at(pt.gamma);
  if (t0 > 0.0) {
    s += std::sqrt(t0) * tables.k_at(pt.gamma, 0);
  }
  if (t1 > 0.0) {
    s += std::sqrt(t1) * tables.k_at(pt.gamma, 1);
  }
  if (t0 > 0.0 && t1 > 0.0) {
    s += std::sqrt(t0 * t1) * k_tilde(pt.gamma);
  }
  return s;
}

// n evenly spaced points on [lo, hi], collapsed to the single point lo when
// the interval is degenerate.
inline std::vector<double> linspace(double lo, double hi, int n) {
  if (!(hi > lo)) {
    return {lo};
  }
  std::vector<double> v(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) {
    v[static_cast<std::size_t>(i)] =
        lo + (hi - lo) * static_cast<double>(i) / static_cast<double>(n - 1);
  }
  v.front() = lo;
  v.back() = hi;
  return v;
}

// eps_tilde must stay strictly below 1/2 or the interval denominators blow up.
inline constexpr double kEpsTildeCap = 0.5 - 1e-6;

}  // namespace detail

struct MaximizeResult {
  double s_max = 0.0;
  InteriorPoint argmax;
};

/// Worst-case scan of the s-function over all interior points compatible with
/// the observed moments: eps_x on a grid over [0, U_x], eps_tilde_x over
/// [0, eps_x], and for each pair gamma over the induced [d_lo, d_hi] interval
/// with both endpoints always included. Interior points that contradict their
/// own constraints are skipped; evaluations past the divergence guard count
/// as +infinity and are reported only when no finite evaluation exists
/// anywhere (no certifiable key).
inline MaximizeResult maximize_s(const GaussianConditional& dist,
                                 const MomentBounds& mb,
                                 const SearchConfig& cfg = {},
                                 const QuadratureConfig& quad = {}) {
  cfg.validate();

  double best = -std::numeric_limits<double>::infinity();
  InteriorPoint best_pt;
  bool any_finite = false;
  InteriorPoint first_divergent;
  bool any_divergent = false;

  // The degenerate box (all mixedness excluded) needs a single exact
  // evaluation; tables only pay off on real grids.
  const bool single_cell = mb.U[0] < 1e-15 && mb.U[1] < 1e-15;
  std::optional<detail::GammaTables> tables;
  if (!single_cell) {
    tables.emplace(dist, quad);
  }

  auto scan_gammas = [&](InteriorPoint pt, const OverlapInterval& d) {
    const int n_points = d.hi > d.lo ? cfg.n_gamma : 1;
    for (int k = 0; k < n_points; ++k) {
      pt.gamma = n_points == 1
                     ? d.lo
                     : d.lo + (d.hi - d.lo) * static_cast<double>(k) /
                           static_cast<double>(cfg.n_gamma - 1);
      if (k == n_points - 1) {
        pt.gamma = d.hi;
      }
      const double s =
          tables ? detail::s_from_tables(*tables, pt) : s_function(dist, pt, quad);
      if (std::isinf(s)) {
        if (!any_divergent) {
          any_divergent = true;
          first_divergent = pt;
        }
        continue;
      }
      if (s > best) {
        best = s;
        best_pt = pt;
        any_finite = true;
      }
    }
  };

  auto scan_cell = [&](const std::array<double, 2>& eps,
                       const std::array<double, 2>& eps_tilde) {
    InteriorPoint pt;
    pt.eps = eps;
    pt.eps_tilde = eps_tilde;
    const auto c = bob_overlap_interval(pt, mb.kappa);
    if (!c) {
      return;
    }
    const auto d = eve_overlap_interval(pt, mb.input_overlap, *c);
    if (!d) {
      return;
    }
    scan_gammas(pt, *d);
  };

  if (cfg.symmetric) {
    const double eps_hi = std::min({mb.U[0], mb.U[1], 1.0});
    for (double eps : detail::linspace(0.0, eps_hi, cfg.n_eps)) {
      const double tilde_hi = std::min(eps, detail::kEpsTildeCap);
      for (double tilde : detail::linspace(0.0, tilde_hi, cfg.n_eps)) {
        scan_cell({eps, eps}, {tilde, tilde});
      }
    }
  } else {
    const auto eps0_grid = detail::linspace(0.0, std::min(mb.U[0], 1.0), cfg.n_eps);
    const auto eps1_grid = detail::linspace(0.0, std::min(mb.U[1], 1.0), cfg.n_eps);
    for (double e0 : eps0_grid) {
      const auto t0_grid =
          detail::linspace(0.0, std::min(e0, detail::kEpsTildeCap), cfg.n_eps);
      for (double e1 : eps1_grid) {
        const auto t1_grid =
            detail::linspace(0.0, std::min(e1, detail::kEpsTildeCap), cfg.n_eps);
        for (double t0 : t0_grid) {
          for (double t1 : t1_grid) {
            scan_cell({e0, e1}, {t0, t1});
          }
        }
      }
    }
  }

  if (!any_finite) {
    MaximizeResult out;
    out.s_max = std::numeric_limits<double>::infinity();
    out.argmax = any_divergent ? first_divergent : InteriorPoint{};
    return out;
  }

  // The scan ranks points through the tables; the reported maximum is the
  // exact quadrature value at the winning point.
  MaximizeResult out;
  out.argmax = best_pt;
  out.s_max = tables ? s_function(dist, best_pt, quad) : best;
  return out;
}

/// One full key-rate evaluation at fixed signal amplitude: assembles the
/// observable caps, runs the worst-case scan, and reports every term.
/// A diverged scan yields G = -infinity.
inline BoundBreakdown key_rate(const ObservedStatistics& stats,
                               const GaussianConditional& dist, double alpha,
                               const SearchConfig& cfg = {},
                               const QuadratureConfig& quad = {}) {
  cfg.validate();
  const MomentBounds mb = moment_bounds(stats, alpha);

  BoundBreakdown b;
  b.alpha_used = alpha;
  b.I_xy = mutual_info_xy(dist, quad);
  b.S_E_given_X =
      entropy_E_given_X_bound({v_x(stats.var_q[0], stats.var_p[0]),
                               v_x(stats.var_q[1], stats.var_p[1])});
  const MaximizeResult m = maximize_s(dist, mb, cfg, quad);
  b.s_max = m.s_max;
  b.argmax = m.argmax;
  b.S_YE_bound = b.S_E_given_X + b.s_max;
  b.G = b.I_xy - b.S_YE_bound - (cfg.f_ec - 1.0) * (1.0 - b.I_xy);
  return b;
}

/// Evaluates key_rate across cfg.alpha_grid (regenerating the conditional
/// model and statistics per amplitude) and returns the best breakdown, with
/// ties broken toward the smaller amplitude.
inline BoundBreakdown optimize_alpha(const ChannelParams& params_template,
                                     const SearchConfig& cfg = {},
                                     const QuadratureConfig& quad = {}) {
  cfg.validate();
  if (cfg.alpha_grid.empty()) {
    throw std::invalid_argument("optimize_alpha: empty amplitude grid");
  }
  std::vector<double> grid = cfg.alpha_grid;
  std::sort(grid.begin(), grid.end());

  std::optional<BoundBreakdown> best;
  for (double alpha : grid) {
    ChannelParams p = params_template;
    p.alpha = alpha;
    const BoundBreakdown b =
        key_rate(stats_from_params(p), conditional_from_params(p), alpha, cfg, quad);
    if (!best || b.G > best->G) {
      best = b;
    }
  }
  return *best;
}

}  // namespace cvqkd
