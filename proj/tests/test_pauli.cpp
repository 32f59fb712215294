// Copyright 2026 The pchsh Authors
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

#include <catch_amalgamated.hpp>
#include <numbers>
#include <random>

#include "pchsh/pauli.hpp"

using namespace pchsh;
using Catch::Matchers::ContainsSubstring;
using Catch::Matchers::WithinAbs;

namespace {

// cos^2 t |000><000| + sin^2 t |11f><11f| with |f> = cos f |0> + sin f |1>.
CMatrix product_branch_marginal(double t, double f) {
  Eigen::VectorXcd a = Eigen::VectorXcd::Zero(8), b = Eigen::VectorXcd::Zero(8);
  a(0) = 1.0;
  b(6) = std::cos(f);
  b(7) = std::sin(f);
  return std::pow(std::cos(t), 2) * a * a.adjoint() +
         std::pow(std::sin(t), 2) * b * b.adjoint();
}

}  // namespace

TEST_CASE("pauli matrices") {
  CHECK(pauli(0) == Eigen::Matrix2cd::Identity());
  CHECK((pauli(1) * pauli(2) - Complex(0, 1) * pauli(3)).norm() < 1e-15);
  for (int i = 1; i <= 3; ++i) CHECK((pauli(i) * pauli(i) - pauli(0)).norm() < 1e-15);
  CHECK_THROWS_AS(pauli(4), InvalidInput);
}

TEST_CASE("BlochVector validates the norm") {
  CHECK_NOTHROW(BlochVector(0.6, 0.8, 0.0));
  CHECK_NOTHROW(BlochVector(0.0, 0.0, 1.0 + 5e-10));
  CHECK_THROWS_AS(BlochVector(1.0, 1.0, 0.0), InvalidInput);
  CHECK_THROWS_AS(BlochVector(0.0, 0.0, 0.0), InvalidInput);
  CHECK_THROWS_AS(BlochVector::normalized(Vec3::Zero()), InvalidInput);
  CHECK_THROWS_AS(BlochVector(std::nan(""), 0.0, 1.0), InvalidInput);
  const auto v = BlochVector::from_angles(0.7, -1.2);
  CHECK_THAT(v.theta(), WithinAbs(0.7, 1e-14));
  CHECK_THAT(v.phi(), WithinAbs(-1.2, 1e-14));
}

TEST_CASE("observables have eigenvalues +1 and -1") {
  std::mt19937_64 rng(1);
  for (int i = 0; i < 20; ++i) {
    const BlochVector v = random_bloch(rng);
    const auto g = observable_from_bloch(v);
    CHECK((g * g - Eigen::Matrix2cd::Identity()).norm() < 1e-14);
    CHECK(std::abs(g.trace()) < 1e-14);
    const auto pp = outcome_projector(v, 1), pm = outcome_projector(v, -1);
    CHECK((pp + pm - Eigen::Matrix2cd::Identity()).norm() < 1e-15);
    CHECK((pp * pp - pp).norm() < 1e-14);
    CHECK((pp - pm - g).norm() < 1e-14);
  }
}

TEST_CASE("DensityMatrix validation names the failure") {
  CMatrix m = CMatrix::Identity(8, 8) / 8.0;
  CHECK_NOTHROW(DensityMatrix(m));

  CMatrix bad_trace = m * 1.01;
  CHECK_THROWS_WITH(DensityMatrix(bad_trace), ContainsSubstring("trace"));

  CMatrix non_herm = m;
  non_herm(2, 5) = Complex(0.0, 0.01);
  CHECK_THROWS_WITH(DensityMatrix(non_herm), ContainsSubstring("[2][5]"));
  CHECK_THROWS_AS(DensityMatrix(non_herm), ValidationError);

  CMatrix neg = CMatrix::Zero(8, 8);
  neg(0, 0) = 1.5;
  neg(1, 1) = -0.5;
  CHECK_THROWS_WITH(DensityMatrix(neg), ContainsSubstring("positive semidefinite"));

  CHECK_THROWS_AS(DensityMatrix(CMatrix::Identity(6, 6) / 6.0), ValidationError);
  CHECK_THROWS_AS(DensityMatrix(CMatrix(CMatrix::Identity(32, 32) / 32.0)), ValidationError);
  CHECK_THROWS_AS(DensityMatrix(CMatrix(2, 3)), ValidationError);

  CMatrix nan = m;
  nan(1, 1) = std::nan("");
  CHECK_THROWS_AS(DensityMatrix(nan), ValidationError);

  CMatrix tiny = m;
  tiny(0, 0) += 5e-13;
  CHECK_NOTHROW(DensityMatrix(tiny));
}

TEST_CASE("white-noise correlation tensor") {
  for (double p : {0.0, 0.3, 1.0}) {
    const auto t = correlation_tensor(white_noise_state(p));
    // rho = p |Phi+><Phi+| x |0><0| + (1 - p) I / 8.
    std::array<double, 64> expect{};
    auto at = [&](int i, int j, int k) -> double& {
      return expect[static_cast<std::size_t>(16 * i + 4 * j + k)];
    };
    at(0, 0, 0) = 1.0;
    for (int k : {0, 3}) {
      if (k == 3) at(0, 0, 3) = p;
      at(1, 1, k) = p;
      at(2, 2, k) = -p;
      at(3, 3, k) = p;
    }
    for (int i = 0; i < 4; ++i)
      for (int j = 0; j < 4; ++j)
        for (int k = 0; k < 4; ++k) CHECK_THAT(t(i, j, k), WithinAbs(at(i, j, k), 1e-14));
  }
}

TEST_CASE("correlation tensor reconstructs the state") {
  std::mt19937_64 rng(4);
  const DensityMatrix rho = random_density_matrix(rng);
  const auto t = correlation_tensor(rho);
  CMatrix back = CMatrix::Zero(8, 8);
  for (int i = 0; i < 4; ++i)
    for (int j = 0; j < 4; ++j)
      for (int k = 0; k < 4; ++k)
        back += t(i, j, k) * kron(kron(pauli(i), pauli(j)), pauli(k)) / 8.0;
  CHECK((back - rho.matrix()).norm() < 1e-13);
  CHECK_THROWS_AS(correlation_tensor(maximally_mixed(4)), InvalidInput);
}

TEST_CASE("partial trace of product states") {
  std::mt19937_64 rng(8);
  std::vector<Eigen::Matrix2cd> f;
  for (int i = 0; i < 4; ++i) {
    const auto v = random_bloch(rng);
    f.push_back(0.5 * (Eigen::Matrix2cd::Identity() + 0.7 * observable_from_bloch(v)));
  }
  const DensityMatrix full = product_state(f);
  for (int q = 0; q < 4; ++q) {
    std::vector<Eigen::Matrix2cd> rest;
    for (int i = 0; i < 4; ++i)
      if (i != q) rest.push_back(f[static_cast<std::size_t>(i)]);
    CHECK((partial_trace(full, q).matrix() - product_state(rest).matrix()).norm() < 1e-14);
  }
  CHECK_THROWS_AS(partial_trace(full, 4), InvalidInput);
  CHECK_THROWS_AS(partial_trace(full, -1), InvalidInput);
}

TEST_CASE("GHZ-class marginals match closed forms on a 12-point grid") {
  for (int i = 0; i < 4; ++i) {
    for (int j = 0; j < 3; ++j) {
      const double t = 0.2 + 0.45 * i;
      const double f = -0.4 + 1.1 * j;
      const DensityMatrix full = ghz_class_state(t, f);
      CHECK_THAT(full.purity(), WithinAbs(1.0, 1e-12));
      CMatrix abc = CMatrix::Zero(8, 8);
      abc(0, 0) = std::pow(std::cos(t), 2);
      abc(7, 7) = std::pow(std::sin(t), 2);
      abc(0, 7) = abc(7, 0) = std::cos(t) * std::sin(t) * std::cos(f);
      CHECK((partial_trace(full, 3).matrix() - abc).norm() < 1e-14);
      const CMatrix other = product_branch_marginal(t, f);
      for (int q = 0; q < 3; ++q) CHECK((partial_trace(full, q).matrix() - other).norm() < 1e-14);
    }
  }
}

TEST_CASE("random states are valid and reproducible") {
  std::mt19937_64 a(21), b(21);
  for (int i = 0; i < 50; ++i) {
    const DensityMatrix r1 = random_density_matrix(a);
    const DensityMatrix r2 = random_density_matrix(b);
    CHECK(r1.matrix() == r2.matrix());
    CHECK(r1.eigenvalues()(0) > -1e-12);
    CHECK(r1.purity() <= 1.0 + 1e-12);
  }
  const auto mixed = maximally_mixed(3);
  CHECK_THAT(mixed.purity(), WithinAbs(0.125, 1e-15));
  CHECK_THROWS_AS(white_noise_state(1.5), InvalidInput);
  CHECK_THROWS_AS(white_noise_state(-0.1), InvalidInput);
}

TEST_CASE("expectation of Pauli strings") {
  const DensityMatrix rho = white_noise_state(1.0);
  const CMatrix zz = kron(kron(pauli(3), pauli(3)), pauli(0));
  CHECK_THAT(rho.expectation(zz).real(), WithinAbs(1.0, 1e-15));
  const CMatrix xi = kron(kron(pauli(1), pauli(0)), pauli(0));
  CHECK_THAT(std::abs(rho.expectation(xi)), WithinAbs(0.0, 1e-15));
}
