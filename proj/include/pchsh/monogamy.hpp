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

// Parity-CHSH values on the four three-qubit marginals of the GHZ-class
// family cos(t)|0000> + sin(t)|111>(cos(f)|0> + sin(f)|1>), with one shared
// pair of settings per party.

#pragma once

#include <array>
#include <cmath>
#include <numbers>
#include <random>
#include <vector>

#include "pchsh/bell.hpp"
#include "pchsh/nelder_mead.hpp"
#include "pchsh/parallel.hpp"
#include "pchsh/pauli.hpp"

namespace pchsh::monogamy {

inline constexpr double kSumBound = 4.0;
inline constexpr double kSlack = 1e-9;

/// Two settings per party, shared by every triple the party belongs to.
struct Settings {
  BlochVector a, a_prime, b, b_prime, c, c_prime, d, d_prime;
};

/// Triples in the order abc, abd, acd, bcd.
enum Triple { kABC = 0, kABD = 1, kACD = 2, kBCD = 3 };
inline constexpr std::array<const char*, 4> kTripleNames{"abc", "abd", "acd",
                                                         "bcd"};

struct ReducedStates {
  std::array<DensityMatrix, 4> rho;
};

/// Three-qubit marginals: abc = Tr_d, abd = Tr_c, acd = Tr_b, bcd = Tr_a.
inline ReducedStates reduced_states(double theta, double phi) {
  const DensityMatrix full = ghz_class_state(theta, phi);
  return {{partial_trace(full, 3), partial_trace(full, 2),
           partial_trace(full, 1), partial_trace(full, 0)}};
}

/// Role assignment inside a triple: the first party measures its pair as
/// Alice, the second its pair as Bob, the third a single direction (c for
/// abc, d' for the triples containing d).
inline MeasurementFrame triple_frame(const Settings& s, Triple t) {
  switch (t) {
    case kABC: return {s.a, s.a_prime, s.b, s.b_prime, s.c};
    case kABD: return {s.a, s.a_prime, s.b, s.b_prime, s.d_prime};
    case kACD: return {s.a, s.a_prime, s.c, s.c_prime, s.d_prime};
    case kBCD: return {s.b, s.b_prime, s.c, s.c_prime, s.d_prime};
  }
  throw InvalidInput("triple_frame: unknown triple");
}

struct Report {
  std::array<double, 4> values{};
  double sum_sq = 0.0;
  double theta = 0.0;
  double phi = 0.0;
};

inline Report make_report(const std::array<double, 4>& values, double theta,
                          double phi) {
  Report r;
  r.values = values;
  r.theta = theta;
  r.phi = phi;
  for (double v : values) r.sum_sq += v * v;
  return r;
}

/// Correlation tensors of the four marginals, for repeated evaluation.
class TripleTensors {
 public:
  TripleTensors(double theta, double phi) : theta_(theta), phi_(phi) {
    const auto states = reduced_states(theta, phi);
    for (std::size_t i = 0; i < 4; ++i) t_[i] = correlation_tensor(states.rho[i]);
  }
  Report evaluate(const Settings& s) const {
    std::array<double, 4> v{};
    for (int i = 0; i < 4; ++i)
      v[static_cast<std::size_t>(i)] =
          bell_value(t_[static_cast<std::size_t>(i)], triple_frame(s, static_cast<Triple>(i)));
    return make_report(v, theta_, phi_);
  }
  const CorrelationTensor& tensor(Triple t) const {
    return t_[static_cast<std::size_t>(t)];
  }

 private:
  double theta_, phi_;
  std::array<CorrelationTensor, 4> t_;
};

/// Bell value of each marginal under the shared settings, computed as
/// Tr(rho_xyz * Bell operator).
inline Report triple_bell_values(double theta, double phi, const Settings& s) {
  const auto states = reduced_states(theta, phi);
  std::array<double, 4> v{};
  for (int i = 0; i < 4; ++i)
    v[static_cast<std::size_t>(i)] =
        bell_value(states.rho[static_cast<std::size_t>(i)],
                   triple_frame(s, static_cast<Triple>(i)));
  return make_report(v, theta, phi);
}

/// True iff some squared value is at most 1: the four marginals never all
/// violate the classical bound together.
inline bool exclusivity_check(const Report& r) {
  for (double v : r.values)
    if (v * v <= 1.0 + kSlack) return true;
  return false;
}

inline bool within_bound(const Report& r) { return r.sum_sq <= kSumBound + kSlack; }

inline Settings settings_from_angles(const Eigen::VectorXd& v) {
  auto u = [&](int k) { return BlochVector(spherical_unit(v(2 * k), v(2 * k + 1))); };
  return {u(0), u(1), u(2), u(3), u(4), u(5), u(6), u(7)};
}

template <typename Rng>
Settings random_settings(Rng& rng) {
  return {random_bloch(rng), random_bloch(rng), random_bloch(rng),
          random_bloch(rng), random_bloch(rng), random_bloch(rng),
          random_bloch(rng), random_bloch(rng)};
}

struct ProbeOptions {
  int restarts = 64;
  int max_iterations = 8000;
};

struct ProbeResult {
  Report report;
  Settings settings;
};

/// Nelder-Mead over the 16 setting angles maximizing the sum of squares,
/// best of `restarts` seeded random starts.
inline ProbeResult probe_maximum(double theta, double phi,
                                 const ProbeOptions& opt, std::uint64_t seed) {
  if (opt.restarts < 1) throw InvalidInput("probe_maximum: restarts must be >= 1");
  const TripleTensors tensors(theta, phi);
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> angle(0.0, 2.0 * std::numbers::pi);
  NelderMeadOptions nm;
  nm.max_iterations = opt.max_iterations;
  nm.diameter_tolerance = 1e-10;
  auto objective = [&](const Eigen::VectorXd& v) {
    return -tensors.evaluate(settings_from_angles(v)).sum_sq;
  };
  ProbeResult best;
  best.report.sum_sq = -1.0;
  for (int r = 0; r < opt.restarts; ++r) {
    Eigen::VectorXd x0(16);
    for (int i = 0; i < 16; ++i) x0(i) = angle(rng);
    nm.initial_step = 0.5;
    auto res = nelder_mead_minimize(objective, x0, nm);
    nm.initial_step = 0.05;
    res = nelder_mead_minimize(objective, res.argmin, nm);
    if (-res.value > best.report.sum_sq) {
      best.settings = settings_from_angles(res.argmin);
      best.report = tensors.evaluate(best.settings);
    }
  }
  best.report = triple_bell_values(theta, phi, best.settings);
  return best;
}

inline ProbeResult probe_maximum(double theta, double phi, int restarts,
                                 std::uint64_t seed) {
  ProbeOptions opt;
  opt.restarts = restarts;
  return probe_maximum(theta, phi, opt, seed);
}

struct SampleSummary {
  long samples = 0;
  long violations = 0;
  long exclusivity_failures = 0;
  Report max_report;
};

/// Random (theta, phi, settings) samples; counts reports above 4 + 1e-9 and
/// reports failing exclusivity_check. Samples are drawn sequentially from one
/// seeded generator and evaluated in parallel, so the summary does not depend
/// on the thread count.
inline SampleSummary sample_relation(long samples, std::uint64_t seed,
                                     unsigned threads = thread_count()) {
  if (samples < 0) throw InvalidInput("sample_relation: samples must be >= 0");
  struct Draw {
    double theta, phi;
    Settings settings;
  };
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> angle(0.0, 2.0 * std::numbers::pi);
  std::vector<Draw> draws;
  draws.reserve(static_cast<std::size_t>(samples));
  for (long i = 0; i < samples; ++i) {
    const double theta = angle(rng);
    const double phi = angle(rng);
    draws.push_back({theta, phi, random_settings(rng)});
  }
  std::vector<Report> reports(draws.size());
  parallel_for(
      draws.size(),
      [&](std::size_t i) {
        reports[i] = TripleTensors(draws[i].theta, draws[i].phi).evaluate(draws[i].settings);
      },
      threads);
  SampleSummary out;
  out.max_report.sum_sq = -1.0;
  for (const Report& r : reports) {
    ++out.samples;
    if (!within_bound(r)) ++out.violations;
    if (!exclusivity_check(r)) ++out.exclusivity_failures;
    if (r.sum_sq > out.max_report.sum_sq) out.max_report = r;
  }
  return out;
}

}  // namespace pchsh::monogamy
