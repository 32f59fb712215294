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

#pragma once

#include <array>
#include <cmath>
#include <numbers>
#include <sstream>

#include "pchsh/bell.hpp"
#include "pchsh/errors.hpp"
#include "pchsh/pauli.hpp"

namespace pchsh {

/// P(a b c | x y, z = 0) for a, b, c in {+1, -1} and x, y in {0, 1}.
class JointDistribution {
 public:
  static constexpr double kEntryTolerance = 1e-12;
  static constexpr double kSumTolerance = 1e-10;

  /// Entries are indexed with index(a, b, c, x, y). Validates range,
  /// normalization per (x, y) and that Alice-Charlie marginals do not depend
  /// on y; throws NumericalConsistency otherwise. Entries are then clamped to
  /// [0, 1].
  explicit JointDistribution(const std::array<double, 32>& probs) : p_(probs) {
    for (std::size_t i = 0; i < p_.size(); ++i) {
      if (!(p_[i] >= -kEntryTolerance && p_[i] <= 1.0 + kEntryTolerance)) {
        std::ostringstream os;
        os << "JointDistribution: entry " << i << " = " << p_[i]
           << " outside [0, 1]";
        throw NumericalConsistency(os.str());
      }
      p_[i] = std::clamp(p_[i], 0.0, 1.0);
    }
    for (int x = 0; x < 2; ++x) {
      for (int y = 0; y < 2; ++y) {
        double s = 0.0;
        for (int a : {1, -1})
          for (int b : {1, -1})
            for (int c : {1, -1}) s += (*this)(a, b, c, x, y);
        if (std::abs(s - 1.0) > kSumTolerance) {
          std::ostringstream os;
          os << "JointDistribution: settings (" << x << "," << y
             << ") sum to " << s;
          throw NumericalConsistency(os.str());
        }
      }
    }
    for (int x = 0; x < 2; ++x)
      for (int a : {1, -1})
        for (int c : {1, -1}) {
          const double m0 = (*this)(a, 1, c, x, 0) + (*this)(a, -1, c, x, 0);
          const double m1 = (*this)(a, 1, c, x, 1) + (*this)(a, -1, c, x, 1);
          if (std::abs(m0 - m1) > kSumTolerance)
            throw NumericalConsistency(
                "JointDistribution: Alice-Charlie marginal depends on y");
        }
  }

  static std::size_t index(int a, int b, int c, int x, int y) {
    auto bit = [](int s) { return s > 0 ? 0 : 1; };
    return static_cast<std::size_t>(((x * 2 + y) * 2 + bit(a)) * 4 +
                                    bit(b) * 2 + bit(c));
  }

  double operator()(int a, int b, int c, int x, int y) const {
    return p_[index(a, b, c, x, y)];
  }
  const std::array<double, 32>& data() const { return p_; }

  /// Correlator <A_x B_y C> = sum abc P(abc|xy).
  double correlator_abc(int x, int y) const {
    double s = 0.0;
    for (int a : {1, -1})
      for (int b : {1, -1})
        for (int c : {1, -1}) s += a * b * c * (*this)(a, b, c, x, y);
    return s;
  }
  /// <A_x B_y> = sum ab P(abc|xy).
  double correlator_ab(int x, int y) const {
    double s = 0.0;
    for (int a : {1, -1})
      for (int b : {1, -1})
        for (int c : {1, -1}) s += a * b * (*this)(a, b, c, x, y);
    return s;
  }

 private:
  std::array<double, 32> p_;
};

/// The ten outcome projectors (I +- G) / 2 of a frame; index 0 is outcome +1.
struct Projectors {
  std::array<std::array<Eigen::Matrix2cd, 2>, 2> alice;  // [x][outcome]
  std::array<std::array<Eigen::Matrix2cd, 2>, 2> bob;    // [y][outcome]
  std::array<Eigen::Matrix2cd, 2> charlie;               // [outcome]

  static int slot(int outcome) { return outcome > 0 ? 0 : 1; }
};

inline Projectors projectors(const MeasurementFrame& f) {
  Projectors p;
  for (int o : {1, -1}) {
    const auto k = static_cast<std::size_t>(Projectors::slot(o));
    p.alice[0][k] = outcome_projector(f.a, o);
    p.alice[1][k] = outcome_projector(f.a_prime, o);
    p.bob[0][k] = outcome_projector(f.b, o);
    p.bob[1][k] = outcome_projector(f.b_prime, o);
    p.charlie[k] = outcome_projector(f.c, o);
  }
  return p;
}

/// Born-rule probabilities Tr(rho M_a|x x M_b|y x M_c|0).
inline JointDistribution born_distribution(const DensityMatrix& rho,
                                           const MeasurementFrame& f) {
  if (rho.num_qubits() != 3)
    throw InvalidInput("born_distribution: expects a 3-qubit state");
  const Projectors pr = projectors(f);
  std::array<double, 32> probs{};
  for (int x = 0; x < 2; ++x)
    for (int y = 0; y < 2; ++y)
      for (int a : {1, -1})
        for (int b : {1, -1})
          for (int c : {1, -1}) {
            const CMatrix op =
                kron(kron(pr.alice[static_cast<std::size_t>(x)]
                                  [static_cast<std::size_t>(Projectors::slot(a))],
                          pr.bob[static_cast<std::size_t>(y)]
                                [static_cast<std::size_t>(Projectors::slot(b))]),
                     pr.charlie[static_cast<std::size_t>(Projectors::slot(c))]);
            probs[JointDistribution::index(a, b, c, x, y)] =
                rho.expectation(op).real();
          }
  return JointDistribution(probs);
}

inline double max_probability(const JointDistribution& d) {
  double m = 0.0;
  for (double v : d.data()) m = std::max(m, v);
  return m;
}

/// -log2(p_guess) in bits. Values up to 1e-12 above 1 are clamped to 1.
inline double min_entropy(double p_guess) {
  if (!(p_guess > 0.0) || p_guess > 1.0 + 1e-12)
    throw InvalidInput("min_entropy: p_guess must lie in (0, 1]");
  return -std::log2(std::min(p_guess, 1.0));
}

/// Measurements that maximally violate the inequality on
/// (|000> + |110>)/sqrt(2): A0 = X, A1 = Z, B0,1 = (X +- Z)/sqrt(2), C0 = c.
inline MeasurementFrame example_frame(const BlochVector& c = BlochVector(0, 0, 1)) {
  const double h = 1.0 / std::sqrt(2.0);
  return {BlochVector(1, 0, 0), BlochVector(0, 0, 1), BlochVector(h, 0, h),
          BlochVector(h, 0, -h), c};
}

/// Largest joint probability of the white-noise family under example_frame
/// with c = (0, 0, 1): (1 + sqrt(2)) p / 8 + 1 / 8.
inline double analytic_lower_curve(double p) {
  if (!(p >= 0.0 && p <= 1.0))
    throw InvalidInput("analytic_lower_curve: p must lie in [0, 1]");
  return (1.0 + std::numbers::sqrt2) / 8.0 * p + 1.0 / 8.0;
}

/// The four probability levels of the white-noise family under
/// example_frame(c), as functions of p and c3.
inline std::array<double, 4> example_probability_classes(double p, double c3) {
  const double r2 = std::numbers::sqrt2;
  return {((2 - r2) * c3 - r2) / 16 * p + 0.125,
          (-(2 + r2) * c3 + r2) / 16 * p + 0.125,
          ((-2 + r2) * c3 - r2) / 16 * p + 0.125,
          ((2 + r2) * c3 + r2) / 16 * p + 0.125};
}

}  // namespace pchsh
