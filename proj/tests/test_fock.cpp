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

#include <catch2/catch_amalgamated.hpp>
#include <cmath>
#include <complex>
#include <random>

#include "cvqkd/bounds.hpp"
#include "cvqkd/fock.hpp"

using namespace cvqkd;
namespace fk = cvqkd::fock;

namespace {

// Independent largest-eigenpair solver: plain power iteration.
std::pair<double, Eigen::VectorXcd> power_iteration(const Eigen::MatrixXcd& m,
                                                    int iters = 20000) {
  Eigen::VectorXcd v = Eigen::VectorXcd::Ones(m.rows()).normalized();
  double lambda = 0.0;
  for (int i = 0; i < iters; ++i) {
    v = (m * v).eval();
    const double norm = v.norm();
    if (norm == 0.0) {
      return {0.0, v};
    }
    v /= norm;
    lambda = norm;
  }
  return {lambda, v};
}

bool states_valid(const fk::TruncatedState& s) {
  const Eigen::MatrixXcd diff = s.rho - s.rho.adjoint();
  if (diff.norm() > 1e-12) {
    return false;
  }
  if (std::abs(s.rho.trace().real() - 1.0) > 1e-12) {
    return false;
  }
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(s.rho);
  return es.eigenvalues().minCoeff() > -1e-10;
}

}  // namespace

TEST_CASE("random states are valid density matrices") {
  for (std::uint64_t seed = 0; seed < 50; ++seed) {
    const auto s = fk::random_state(12, 0.3 + 0.01 * static_cast<double>(seed),
                                    seed);
    REQUIRE(states_valid(s));
    REQUIRE(s.top_level_population() < 1e-6);
  }
}

TEST_CASE("purity bias endpoints") {
  const auto pure = fk::random_state(12, 1.0, 5);
  const auto top = fk::max_eigenpair(pure);
  REQUIRE(top.lambda_max == Catch::Approx(1.0).margin(1e-12));

  const auto mixed = fk::random_state(12, 0.0, 5);
  const Eigen::MatrixXcd expected =
      Eigen::MatrixXcd::Identity(12, 12) / 12.0;
  REQUIRE((mixed.rho - expected).norm() < 1e-12);
  REQUIRE(fk::max_eigenpair(mixed).degenerate);
}

TEST_CASE("random states are deterministic per seed") {
  const auto a = fk::random_state(12, 0.8, 99);
  const auto b = fk::random_state(12, 0.8, 99);
  REQUIRE((a.rho - b.rho).norm() == 0.0);
  const auto c = fk::random_state(12, 0.8, 100);
  REQUIRE((a.rho - c.rho).norm() > 0.0);
}

TEST_CASE("coherent vector expansion") {
  const auto vac = fk::coherent_vector(0.0, 12);
  REQUIRE(std::abs(vac(0)) == Catch::Approx(1.0).margin(1e-15));
  REQUIRE(vac.tail(11).norm() == 0.0);

  for (double alpha : {0.3, 0.7, 1.0}) {
    const auto plus = fk::coherent_vector(alpha, 12);
    const auto minus = fk::coherent_vector(-alpha, 12);
    REQUIRE(plus.norm() == Catch::Approx(1.0).margin(1e-14));
    const double overlap = std::abs((minus.adjoint() * plus).value());
    REQUIRE(overlap ==
            Catch::Approx(std::exp(-2.0 * alpha * alpha)).margin(1e-8));
  }

  REQUIRE_THROWS_AS(fk::coherent_vector(2.5, 12), fk::TruncationError);
}

TEST_CASE("moments of reference states") {
  fk::TruncatedState vacuum;
  vacuum.rho = Eigen::MatrixXcd::Zero(12, 12);
  vacuum.rho(0, 0) = 1.0;
  const auto mv = fk::moments(vacuum);
  REQUIRE(mv.mean_q == Catch::Approx(0.0).margin(1e-14));
  REQUIRE(mv.var_q == Catch::Approx(0.5).margin(1e-14));
  REQUIRE(mv.var_p == Catch::Approx(0.5).margin(1e-14));

  const std::complex<double> beta{0.4, -0.25};
  const auto cv = fk::coherent_vector(beta, 12);
  fk::TruncatedState coherent;
  coherent.rho = cv * cv.adjoint();
  const auto mc = fk::moments(coherent);
  REQUIRE(mc.mean_q ==
          Catch::Approx(std::sqrt(2.0) * beta.real()).margin(1e-8));
  REQUIRE(mc.mean_p ==
          Catch::Approx(std::sqrt(2.0) * beta.imag()).margin(1e-8));
  REQUIRE(mc.var_q == Catch::Approx(0.5).margin(1e-8));
  REQUIRE(mc.var_p == Catch::Approx(0.5).margin(1e-8));

  fk::TruncatedState one_photon;
  one_photon.rho = Eigen::MatrixXcd::Zero(12, 12);
  one_photon.rho(1, 1) = 1.0;
  const auto m1 = fk::moments(one_photon);
  REQUIRE(m1.var_q == Catch::Approx(1.5).margin(1e-14));
  REQUIRE(m1.var_p == Catch::Approx(1.5).margin(1e-14));
}

TEST_CASE("coherent fidelity identifies coherent states") {
  const std::complex<double> beta{0.45, -0.2};
  const auto cv = fk::coherent_vector(beta, 12);
  fk::TruncatedState state;
  state.rho = cv * cv.adjoint();
  const auto fid = fk::fidelity_with_coherent(state);
  REQUIRE(std::abs(fid.epsilon) < 1e-8);
  REQUIRE(std::abs(fid.beta_bar - beta) < 1e-8);

  fk::TruncatedState vacuum;
  vacuum.rho = Eigen::MatrixXcd::Zero(12, 12);
  vacuum.rho(0, 0) = 1.0;
  const auto fv = fk::fidelity_with_coherent(vacuum);
  REQUIRE(std::abs(fv.epsilon) < 1e-12);
  REQUIRE(std::abs(fv.beta_bar) < 1e-12);

  // Maximally mixed on two levels: zero means, <0|rho|0> = 1/2.
  fk::TruncatedState qubit;
  qubit.rho = Eigen::MatrixXcd::Zero(12, 12);
  qubit.rho(0, 0) = 0.5;
  qubit.rho(1, 1) = 0.5;
  const auto fq = fk::fidelity_with_coherent(qubit);
  REQUIRE(fq.epsilon == Catch::Approx(0.5).margin(1e-12));
}

TEST_CASE("largest eigenpair") {
  const auto cv = fk::coherent_vector({0.3, 0.1}, 12);
  fk::TruncatedState pure;
  pure.rho = cv * cv.adjoint();
  const auto top = fk::max_eigenpair(pure);
  REQUIRE(top.lambda_max == Catch::Approx(1.0).margin(1e-12));
  REQUIRE(std::abs((top.vector.adjoint() * cv).value()) ==
          Catch::Approx(1.0).margin(1e-10));

  fk::TruncatedState two_level;
  two_level.rho = Eigen::MatrixXcd::Zero(12, 12);
  two_level.rho(0, 0) = 0.7;
  two_level.rho(1, 1) = 0.3;
  const auto t2 = fk::max_eigenpair(two_level);
  REQUIRE(t2.lambda_max == Catch::Approx(0.7).margin(1e-14));
  REQUIRE(std::abs(t2.vector(0)) == Catch::Approx(1.0).margin(1e-12));
  REQUIRE_FALSE(t2.degenerate);
}

TEST_CASE("largest eigenpair agrees with power iteration") {
  for (std::uint64_t seed = 200; seed < 230; ++seed) {
    const auto s = fk::random_state(12, 0.7, seed);
    const auto top = fk::max_eigenpair(s);
    if (top.degenerate) {
      continue;
    }
    const auto [lambda, vec] = power_iteration(s.rho);
    REQUIRE(top.lambda_max == Catch::Approx(lambda).margin(1e-10));
    REQUIRE(std::abs((vec.adjoint() * top.vector).value()) ==
            Catch::Approx(1.0).margin(1e-8));
  }
}

TEST_CASE("displacement shifts means and preserves variances") {
  const std::complex<double> beta{0.3, 0.2};
  for (std::uint64_t seed = 50; seed < 60; ++seed) {
    const auto s = fk::random_state(12, 0.8, seed);
    const auto before = fk::moments(s);
    const auto shifted = fk::displace(s, beta);
    const auto after = fk::moments(shifted);
    REQUIRE(after.mean_q ==
            Catch::Approx(before.mean_q + std::sqrt(2.0) * beta.real())
                .margin(1e-6));
    REQUIRE(after.mean_p ==
            Catch::Approx(before.mean_p + std::sqrt(2.0) * beta.imag())
                .margin(1e-6));
    REQUIRE(after.var_q == Catch::Approx(before.var_q).margin(1e-6));
    REQUIRE(after.var_p == Catch::Approx(before.var_p).margin(1e-6));
  }
}

TEST_CASE("mixedness stays below the second-moment cap on random states") {
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> bias(0.3, 1.0);
  for (int i = 0; i < 200; ++i) {
    const auto s = fk::random_state(12, bias(rng), rng());
    const auto m = fk::moments(s);
    const double cap = mixedness_bound(m.var_q, m.var_p);
    const auto fid = fk::fidelity_with_coherent(s);
    REQUIRE(fid.epsilon <= cap + 1e-9);
  }
}

TEST_CASE("dominant-eigenvector overlap lies in the moment interval") {
  std::mt19937_64 rng(8);
  std::uniform_real_distribution<double> bias(0.55, 0.999);
  int checked = 0;
  while (checked < 200) {
    fk::TruncatedState states[2] = {fk::random_state(12, bias(rng), rng()),
                                    fk::random_state(12, bias(rng), rng())};
    InteriorPoint pt;
    Eigen::VectorXcd vectors[2];
    std::complex<double> betas[2];
    bool usable = true;
    for (int x = 0; x < 2; ++x) {
      const auto top = fk::max_eigenpair(states[x]);
      if (top.degenerate || 1.0 - top.lambda_max >= 0.5) {
        usable = false;
        break;
      }
      const auto fid = fk::fidelity_with_coherent(states[x]);
      pt.eps[x] = fid.epsilon;
      pt.eps_tilde[x] = 1.0 - top.lambda_max;
      vectors[x] = top.vector;
      betas[x] = fid.beta_bar;
    }
    if (!usable) {
      continue;
    }
    const double kappa = std::exp(-0.5 * std::norm(betas[0] - betas[1]));
    const auto c = bob_overlap_interval(pt, kappa);
    if (!c) {
      continue;
    }
    const double overlap =
        std::abs((vectors[0].adjoint() * vectors[1]).value());
    REQUIRE(overlap >= c->lo - 1e-9);
    REQUIRE(overlap <= c->hi + 1e-9);
    ++checked;
  }
}
