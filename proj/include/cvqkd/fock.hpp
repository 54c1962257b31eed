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

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <complex>
#include <random>
#include <stdexcept>

namespace cvqkd::fock {

struct TruncationError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

inline constexpr int kDefaultDim = 12;

/// Density matrix on a truncated Fock space: Hermitian, trace one, positive
/// semidefinite. States feeding moment-based checks must keep the population
/// of the top level below 1e-6 so truncation cannot distort the comparison.
struct TruncatedState {
  Eigen::MatrixXcd rho;

  int dim() const { return static_cast<int>(rho.rows()); }
  double top_level_population() const {
    return rho(rho.rows() - 1, rho.cols() - 1).real();
  }
};

struct Moments {
  double mean_q = 0.0;
  double mean_p = 0.0;
  double var_q = 0.0;
  double var_p = 0.0;
};

inline Eigen::MatrixXcd annihilation_op(int dim) {
  Eigen::MatrixXcd a = Eigen::MatrixXcd::Zero(dim, dim);
  for (int k = 1; k < dim; ++k) {
    a(k - 1, k) = std::sqrt(static_cast<double>(k));
  }
  return a;
}

/// Quadrature moments via the ladder operators q = (a + a^dag)/sqrt(2),
/// p = i(a^dag - a)/sqrt(2). The state is embedded two levels higher before
/// squaring so the second moments are exact for the truncated state viewed as
/// a full-space state.
inline Moments moments(const TruncatedState& state) {
  const int n = state.dim();
  const int np = n + 2;
  Eigen::MatrixXcd rho = Eigen::MatrixXcd::Zero(np, np);
  rho.topLeftCorner(n, n) = state.rho;

  const Eigen::MatrixXcd a = annihilation_op(np);
  const Eigen::MatrixXcd ad = a.adjoint();
  const std::complex<double> im(0.0, 1.0);
  const Eigen::MatrixXcd q = (a + ad) / std::sqrt(2.0);
  const Eigen::MatrixXcd p = im * (ad - a) / std::sqrt(2.0);

  Moments m;
  m.mean_q = (rho * q).trace().real();
  m.mean_p = (rho * p).trace().real();
  m.var_q = (rho * q * q).trace().real() - m.mean_q * m.mean_q;
  m.var_p = (rho * p * p).trace().real() - m.mean_p * m.mean_p;
  return m;
}

/// Coherent state of amplitude beta expanded in the Fock basis,
/// c_k = exp(-|beta|^2/2) beta^k / sqrt(k!), renormalized after truncation.
/// Rejects amplitudes whose truncated tail carries 1e-8 or more.
inline Eigen::VectorXcd coherent_vector(std::complex<double> beta, int dim) {
  Eigen::VectorXcd v(dim);
  std::complex<double> c = std::exp(-0.5 * std::norm(beta));
  double captured = 0.0;
  for (int k = 0; k < dim; ++k) {
    if (k > 0) {
      c *= beta / std::sqrt(static_cast<double>(k));
    }
    v(k) = c;
    captured += std::norm(c);
  }
  if (1.0 - captured >= 1e-8) {
    throw TruncationError("coherent_vector: tail mass above 1e-8");
  }
  return v / std::sqrt(captured);
}

/// Random density matrix with a tunable spectrum: purity_bias 1 gives a
/// rank-one projector, purity_bias 0 the maximally mixed state, and values in
/// between concentrate weight on one eigenvector. For nonzero bias the state
/// is generated on a sub-block two levels below the truncation, so the top
/// populations vanish exactly and truncated moments are exact; the
/// eigenvectors come from a QR-orthonormalized Gaussian matrix with rows
/// damped toward high Fock levels. Deterministic per seed.
inline TruncatedState random_state(int dim, double purity_bias,
                                   std::uint64_t seed) {
  if (dim < 2) {
    throw std::invalid_argument("random_state: need dim >= 2");
  }
  if (purity_bias < 0.0 || purity_bias > 1.0) {
    throw std::invalid_argument("random_state: purity_bias outside [0,1]");
  }
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  std::uniform_real_distribution<double> uniform(0.0, 1.0);

  const int m = purity_bias > 0.0 ? std::max(2, dim - 2) : dim;

  // Spectrum: flat weights raised to a bias-dependent power, plus a pure
  // component; exact at both endpoints.
  Eigen::VectorXd lambda(m);
  if (purity_bias >= 1.0 - 1e-12) {
    lambda.setZero();
    lambda(0) = 1.0;
  } else {
    const double power = purity_bias / (1.0 - purity_bias);
    Eigen::VectorXd w(m);
    for (int k = 0; k < m; ++k) {
      w(k) = std::pow(uniform(rng), power);
    }
    w /= w.sum();
    lambda = (1.0 - purity_bias) * w;
    lambda(0) += purity_bias;
    std::sort(lambda.data(), lambda.data() + m, std::greater<>());
  }

  Eigen::MatrixXcd ginibre(m, m);
  for (int j = 0; j < m; ++j) {
    const double damping = std::exp(-0.7 * j);
    for (int k = 0; k < m; ++k) {
      ginibre(j, k) =
          damping * std::complex<double>(normal(rng), normal(rng));
    }
  }
  Eigen::HouseholderQR<Eigen::MatrixXcd> qr(ginibre);
  Eigen::MatrixXcd basis = qr.householderQ();
  const Eigen::MatrixXcd r = qr.matrixQR().triangularView<Eigen::Upper>();
  for (int k = 0; k < m; ++k) {
    const std::complex<double> rkk = r(k, k);
    if (std::abs(rkk) > 0.0) {
      basis.col(k) *= rkk / std::abs(rkk);
    }
  }

  Eigen::MatrixXcd core = basis * lambda.asDiagonal() * basis.adjoint();
  TruncatedState state;
  state.rho = Eigen::MatrixXcd::Zero(dim, dim);
  state.rho.topLeftCorner(m, m) = core;
  state.rho = 0.5 * (state.rho + state.rho.adjoint().eval());
  state.rho /= state.rho.trace().real();
  return state;
}

struct CoherentFidelity {
  double epsilon = 0.0;            // 1 - <beta|rho|beta>
  std::complex<double> beta_bar;   // amplitude matching the first moments
};

/// Mixedness of the state relative to the coherent state carrying the same
/// first moments. The amplitude is (mean_q + i mean_p)/sqrt(2), the unique
/// displacement that zeroes the means, so a pure coherent state comes out
/// with epsilon = 0 and the second-moment cap applies to the result.
inline CoherentFidelity fidelity_with_coherent(const TruncatedState& state) {
  const Moments m = moments(state);
  CoherentFidelity out;
  out.beta_bar =
      std::complex<double>(m.mean_q, m.mean_p) / std::sqrt(2.0);
  const Eigen::VectorXcd v = coherent_vector(out.beta_bar, state.dim());
  out.epsilon = 1.0 - (v.adjoint() * state.rho * v).value().real();
  return out;
}

struct MaxEigenpair {
  double lambda_max = 0.0;
  Eigen::VectorXcd vector;
  // Top two eigenvalues within 1e-10 of each other; overlap-based checks
  // skip such states because no eigenvector is distinguished.
  bool degenerate = false;
};

inline MaxEigenpair max_eigenpair(const TruncatedState& state) {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> solver(
      0.5 * (state.rho + state.rho.adjoint().eval()));
  if (solver.info() != Eigen::Success) {
    throw std::runtime_error("max_eigenpair: eigensolver failed");
  }
  const int n = state.dim();
  MaxEigenpair out;
  out.lambda_max = solver.eigenvalues()(n - 1);
  out.vector = solver.eigenvectors().col(n - 1);
  out.degenerate =
      n > 1 && out.lambda_max - solver.eigenvalues()(n - 2) < 1e-10;
  return out;
}

namespace detail {

// exp(M) for a nilpotent M (strictly triangular): the series terminates.
inline Eigen::MatrixXcd nilpotent_exp(const Eigen::MatrixXcd& m) {
  const int n = static_cast<int>(m.rows());
  Eigen::MatrixXcd result = Eigen::MatrixXcd::Identity(n, n);
  Eigen::MatrixXcd term = Eigen::MatrixXcd::Identity(n, n);
  for (int k = 1; k < n; ++k) {
    term = (term * m / static_cast<double>(k)).eval();
    if (term.norm() == 0.0) {
      break;
    }
    result += term;
  }
  return result;
}

}  // namespace detail

/// Displaces the state by amplitude beta, returning a state on a padded
/// space (the displacement pushes population upward). Uses the normal-ordered
/// form D = e^{-|beta|^2/2} exp(beta a^dag) exp(-conj(beta) a), exact up to
/// truncation at the enlarged dimension.
inline TruncatedState displace(const TruncatedState& state,
                               std::complex<double> beta, int pad = 16) {
  const int n = state.dim();
  const int np = n + pad;
  Eigen::MatrixXcd rho = Eigen::MatrixXcd::Zero(np, np);
  rho.topLeftCorner(n, n) = state.rho;

  const Eigen::MatrixXcd a = annihilation_op(np);
  const Eigen::MatrixXcd d = std::exp(-0.5 * std::norm(beta)) *
                             detail::nilpotent_exp(beta * a.adjoint()) *
                             detail::nilpotent_exp(-std::conj(beta) * a);
  TruncatedState out;
  out.rho = d * rho * d.adjoint();
  out.rho = 0.5 * (out.rho + out.rho.adjoint().eval());
  out.rho /= out.rho.trace().real();
  return out;
}

}  // namespace cvqkd::fock
