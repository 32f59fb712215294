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

#include "pchsh/npa.hpp"
#include "pchsh/randomness.hpp"

using namespace pchsh;
using Catch::Matchers::WithinAbs;

namespace {

MeasurementFrame random_frame(std::mt19937_64& rng) {
  return {random_bloch(rng), random_bloch(rng), random_bloch(rng), random_bloch(rng),
          random_bloch(rng)};
}

void check_no_signalling(const JointDistribution& d) {
  for (int x = 0; x < 2; ++x)
    for (int y = 0; y < 2; ++y) {
      double s = 0.0;
      for (int a : {1, -1})
        for (int b : {1, -1})
          for (int c : {1, -1}) {
            CHECK(d(a, b, c, x, y) >= 0.0);
            s += d(a, b, c, x, y);
          }
      CHECK_THAT(s, WithinAbs(1.0, 1e-10));
    }
  // Alice-Charlie marginals ignore y; Bob-Charlie marginals ignore x.
  for (int a : {1, -1})
    for (int c : {1, -1})
      for (int x = 0; x < 2; ++x) {
        const double m0 = d(a, 1, c, x, 0) + d(a, -1, c, x, 0);
        const double m1 = d(a, 1, c, x, 1) + d(a, -1, c, x, 1);
        CHECK_THAT(m0, WithinAbs(m1, 1e-10));
      }
  for (int b : {1, -1})
    for (int c : {1, -1})
      for (int y = 0; y < 2; ++y) {
        const double m0 = d(1, b, c, 0, y) + d(-1, b, c, 0, y);
        const double m1 = d(1, b, c, 1, y) + d(-1, b, c, 1, y);
        CHECK_THAT(m0, WithinAbs(m1, 1e-10));
      }
}

}  // namespace

TEST_CASE("analytic_lower_curve") {
  CHECK_THAT(analytic_lower_curve(1.0), WithinAbs((2.0 + std::numbers::sqrt2) / 8.0, 1e-15));
  CHECK_THAT(analytic_lower_curve(1.0), WithinAbs(0.4267767, 1e-7));
  CHECK(analytic_lower_curve(0.0) == 0.125);
  CHECK_THAT(analytic_lower_curve(0.7071), WithinAbs(0.3384, 1e-4));
  CHECK_THROWS_AS(analytic_lower_curve(1.01), InvalidInput);
  CHECK_THROWS_AS(analytic_lower_curve(-0.01), InvalidInput);
}

TEST_CASE("min_entropy") {
  CHECK_THAT(min_entropy(0.4267767), WithinAbs(1.2284, 5e-4));
  CHECK(min_entropy(1.0) == 0.0);
  CHECK_THAT(min_entropy(0.125), WithinAbs(3.0, 1e-15));
  CHECK(min_entropy(1.0 + 1e-13) == 0.0);
  CHECK_THROWS_AS(min_entropy(0.0), InvalidInput);
  CHECK_THROWS_AS(min_entropy(-0.5), InvalidInput);
  CHECK_THROWS_AS(min_entropy(1.0 + 1e-9), InvalidInput);
  double prev = INFINITY;
  for (int i = 1; i <= 100; ++i) {
    const double h = min_entropy(i / 100.0);
    CHECK(h < prev);
    prev = h;
  }
}

TEST_CASE("example distribution matches the probability classes") {
  for (int ip = 0; ip <= 10; ++ip) {
    for (int ic = 0; ic <= 4; ++ic) {
      const double p = ip / 10.0, c3 = ic / 4.0;
      const BlochVector c(std::sqrt(1.0 - c3 * c3), 0.0, c3);
      const auto d = born_distribution(white_noise_state(p), example_frame(c));
      const auto classes = example_probability_classes(p, c3);
      for (double v : d.data()) {
        double best = INFINITY;
        for (double k : classes) best = std::min(best, std::abs(v - k));
        CHECK(best <= 1e-12);
      }
      CHECK(classes[0] <= classes[3] + 1e-15);
      CHECK(classes[1] <= classes[3] + 1e-15);
      CHECK(classes[2] <= classes[3] + 1e-15);
      CHECK_THAT(max_probability(d), WithinAbs(classes[3], 1e-12));
      if (ic == 4) CHECK_THAT(max_probability(d), WithinAbs(analytic_lower_curve(p), 1e-12));
    }
  }
}

TEST_CASE("example distribution at full visibility") {
  const auto d = born_distribution(white_noise_state(1.0), example_frame());
  CHECK_THAT(max_probability(d), WithinAbs(0.426777, 1e-6));
  CHECK_THAT(min_entropy(max_probability(d)), WithinAbs(1.2284, 5e-4));
  CHECK_THAT(d.correlator_ab(0, 0), WithinAbs(1.0 / std::numbers::sqrt2, 1e-12));
}

TEST_CASE("Born distributions are normalized and no-signalling") {
  std::mt19937_64 rng(37);
  for (int i = 0; i < 200; ++i) {
    const DensityMatrix rho = random_density_matrix(rng);
    const auto f = random_frame(rng);
    const auto d = born_distribution(rho, f);
    check_no_signalling(d);
    CHECK_THAT(npa::bell_from_distribution(d), WithinAbs(bell_value(rho, f), 1e-10));
    const double expected_abc = rho.expectation(kron(kron(observable_from_bloch(f.a_prime),
                                                          observable_from_bloch(f.b)),
                                                     observable_from_bloch(f.c)))
                                    .real();
    CHECK_THAT(d.correlator_abc(1, 0), WithinAbs(expected_abc, 1e-12));
  }
}

TEST_CASE("JointDistribution rejects invalid tables") {
  std::array<double, 32> uniform;
  uniform.fill(0.125);
  CHECK_NOTHROW(JointDistribution(uniform));

  auto negative = uniform;
  negative[0] = -0.01;
  negative[1] = 0.135;
  CHECK_THROWS_AS(JointDistribution(negative), NumericalConsistency);

  auto unnormalized = uniform;
  unnormalized[3] = 0.2;
  CHECK_THROWS_AS(JointDistribution(unnormalized), NumericalConsistency);

  // Move weight between b outcomes only for y = 1: normalized and
  // Alice-Charlie marginals intact.
  auto bob_shift = uniform;
  bob_shift[JointDistribution::index(1, 1, 1, 0, 1)] = 0.25;
  bob_shift[JointDistribution::index(1, -1, 1, 0, 1)] = 0.0;
  CHECK_NOTHROW(JointDistribution(bob_shift));

  // Move weight between a outcomes only for y = 1: Alice signals to Bob's
  // input choice.
  auto signalling = uniform;
  signalling[JointDistribution::index(1, 1, 1, 0, 1)] = 0.25;
  signalling[JointDistribution::index(-1, 1, 1, 0, 1)] = 0.0;
  CHECK_THROWS_AS(JointDistribution(signalling), NumericalConsistency);

  auto tiny = uniform;
  tiny[0] = 0.125 + 5e-13;
  tiny[1] = 0.125 - 5e-13;
  CHECK_NOTHROW(JointDistribution(tiny));
}

TEST_CASE("JointDistribution index layout") {
  std::vector<bool> seen(32, false);
  for (int x = 0; x < 2; ++x)
    for (int y = 0; y < 2; ++y)
      for (int a : {1, -1})
        for (int b : {1, -1})
          for (int c : {1, -1}) {
            const auto i = JointDistribution::index(a, b, c, x, y);
            REQUIRE(i < 32);
            CHECK_FALSE(seen[i]);
            seen[i] = true;
          }
  CHECK(JointDistribution::index(1, 1, 1, 0, 0) == 0);
  CHECK(JointDistribution::index(-1, -1, -1, 1, 1) == 31);
}

TEST_CASE("born_distribution needs three qubits") {
  CHECK_THROWS_AS(born_distribution(maximally_mixed(4), example_frame()), InvalidInput);
}
