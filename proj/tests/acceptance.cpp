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

// Acceptance checks. Prints one PASS/FAIL line per criterion and exits
// nonzero if any criterion fails. All tolerances are fixed here.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <numbers>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "pchsh/bell.hpp"
#include "pchsh/monogamy.hpp"
#include "pchsh/npa.hpp"
#include "pchsh/randomness.hpp"

using namespace pchsh;

namespace {

constexpr double kSqrt2 = std::numbers::sqrt2;

struct Outcome {
  bool pass = true;
  std::ostringstream detail;

  void require(bool ok, const std::string& what) {
    if (!ok) {
      if (pass) detail << "first failure: " << what << "; ";
      pass = false;
    }
  }
};

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

MeasurementFrame random_frame(std::mt19937_64& rng) {
  return {random_bloch(rng), random_bloch(rng), random_bloch(rng), random_bloch(rng),
          random_bloch(rng)};
}

// Normalization per setting pair and both one-sided no-signalling
// conditions.
bool normalized_and_no_signalling(const JointDistribution& d) {
  for (int x = 0; x < 2; ++x)
    for (int y = 0; y < 2; ++y) {
      double s = 0.0;
      for (int a : {1, -1})
        for (int b : {1, -1})
          for (int c : {1, -1}) {
            if (d(a, b, c, x, y) < 0.0) return false;
            s += d(a, b, c, x, y);
          }
      if (std::abs(s - 1.0) > 1e-10) return false;
    }
  for (int s1 : {1, -1})
    for (int c : {1, -1})
      for (int k = 0; k < 2; ++k) {
        const double ac0 = d(s1, 1, c, k, 0) + d(s1, -1, c, k, 0);
        const double ac1 = d(s1, 1, c, k, 1) + d(s1, -1, c, k, 1);
        const double bc0 = d(1, s1, c, 0, k) + d(-1, s1, c, 0, k);
        const double bc1 = d(1, s1, c, 1, k) + d(-1, s1, c, 1, k);
        if (std::abs(ac0 - ac1) > 1e-10 || std::abs(bc0 - bc1) > 1e-10) return false;
      }
  return true;
}

void criterion1(Outcome& o) {
  const auto t0 = Clock::now();
  double worst = 0.0;
  for (int i = 0; i <= 10; ++i) {
    const double p = i / 10.0;
    const double err = std::abs(theorem1_bound(white_noise_state(p)).bound - kSqrt2 * p);
    worst = std::max(worst, err);
    o.require(err <= 1e-9, "bound at p = " + std::to_string(p));
  }
  const double t = seconds_since(t0);
  o.require(t < 5.0, "runtime");
  o.detail << "max |bound - sqrt(2) p| = " << worst << " over 11 points, " << t << " s";
}

void criterion2(Outcome& o) {
  const auto t0 = Clock::now();
  for (double p : {0.5, 1.0}) {
    const double v = see_saw_maximize(white_noise_state(p), SeeSawOptions{}, 2024).value;
    o.require(v >= kSqrt2 * p - 1e-6, "see-saw at p = " + std::to_string(p));
    o.detail << "see-saw(p=" << p << ") = " << v << "; ";
  }
  std::mt19937_64 rng(2025);
  double worst_gap = -INFINITY, max_bound = 0.0;
  for (int i = 0; i < 200; ++i) {
    const DensityMatrix rho = random_density_matrix(rng);
    const double bound = theorem1_bound(rho).bound;
    const double v = see_saw_maximize(rho, SeeSawOptions{}, static_cast<std::uint64_t>(i)).value;
    worst_gap = std::max(worst_gap, v - bound);
    max_bound = std::max(max_bound, bound);
    o.require(v <= bound + 1e-6, "random state " + std::to_string(i) + " see-saw above bound");
    o.require(bound <= kSqrt2 + 1e-9, "random state " + std::to_string(i) + " bound above sqrt(2)");
  }
  const double t = seconds_since(t0);
  o.require(t < 120.0, "runtime");
  o.detail << "200 random states: max(see-saw - bound) = " << worst_gap
           << ", max bound = " << max_bound << ", " << t << " s";
}

void criterion3(Outcome& o) {
  const auto t0 = Clock::now();
  const LhvResult r = lhv_bound();
  const double t = seconds_since(t0);
  o.require(r.max == 1.0, "maximum is not exactly 1");
  o.require(t < 1e-3, "runtime");
  o.detail << "max = " << r.max << ", " << r.maximizers.size() << " maximizers, "
           << t * 1e6 << " us";
}

std::vector<JointDistribution> g_distributions;

void criterion4(Outcome& o) {
  double worst = 0.0;
  for (int i = 0; i <= 10; ++i) {
    const double p = i / 10.0;
    const auto d = born_distribution(white_noise_state(p), example_frame());
    g_distributions.push_back(d);
    const auto classes = example_probability_classes(p, 1.0);
    for (double v : d.data()) {
      double best = INFINITY;
      for (double k : classes) best = std::min(best, std::abs(v - k));
      worst = std::max(worst, best);
    }
    const double err = std::abs(max_probability(d) - ((1.0 + kSqrt2) * p / 8.0 + 0.125));
    o.require(err <= 1e-12, "max at p = " + std::to_string(p));
    o.require(std::abs(max_probability(d) - classes[3]) <= 1e-12, "max is not P4");
  }
  o.require(worst <= 1e-12, "entries differ from P1-P4");
  const double pmax = max_probability(born_distribution(white_noise_state(1.0), example_frame()));
  const double h = min_entropy(pmax);
  o.require(std::abs(pmax - 0.426777) <= 1e-6, "max at p = 1");
  o.require(std::abs(h - 1.2284) <= 5e-4, "min-entropy at p = 1");
  o.detail << "max entry-to-class distance " << worst << "; p=1: max " << pmax
           << ", H_min " << h << " bits";
}

void criterion5(Outcome& o) {
  const auto t0 = Clock::now();
  double lo = 0.0, hi = 1.0;
  auto violates = [](double p) { return theorem1_bound(white_noise_state(p)).bound > 1.0; };
  o.require(!violates(lo) && violates(hi), "bracket");
  int steps = 0;
  while (hi - lo > 1e-6) {
    const double mid = 0.5 * (lo + hi);
    (violates(mid) ? hi : lo) = mid;
    ++steps;
  }
  const double err = std::abs(hi - 1.0 / kSqrt2);
  o.require(err <= 1e-6, "threshold");
  o.detail.precision(9);
  o.detail << "threshold " << hi << " (|.-1/sqrt2| = " << err << ") after " << steps
           << " steps, " << seconds_since(t0) << " s";
}

void criterion6(Outcome& o) {
  const auto t0 = Clock::now();
  std::vector<double> values;
  double slowest = 0.0;
  int inconclusive = 0;
  for (int i = 0; i <= 10; ++i) {
    const double p = i / 10.0;
    const auto r = npa::npa_upper_bound(std::min(kSqrt2 * p, kSqrt2));
    values.push_back(r.value);
    slowest = std::max(slowest, r.max_solve_seconds);
    inconclusive += r.inconclusive_steps;
    const double lower = analytic_lower_curve(p);
    o.require(r.value >= lower - 1e-3 && r.value <= 1.0,
              "sandwich at p = " + std::to_string(p));
    // Sanity: the bracket is ordered, Bell values at or below the classical
    // bound leave the guessing probability at 1, and the bound does not
    // grow with the violation.
    o.require(r.lower <= r.value, "bracket order at p = " + std::to_string(p));
    if (kSqrt2 * p <= 1.0) o.require(r.value == 1.0, "trivial region at p = " + std::to_string(p));
    if (i > 0) o.require(r.value <= values[values.size() - 2] + 1e-3, "monotonicity");
    std::printf("    p = %.1f  npa upper %.6f  lower curve %.6f  solves %d  inconclusive %d\n",
                p, r.value, lower, r.solves, r.inconclusive_steps);
  }
  // Sanity: started from the quantum example point the solver accepts it,
  // and a clearly unattainable value is certified infeasible.
  const npa::MomentStructure s;
  const npa::MomentProblem prob(s, npa::Outcome{1, 1, 1, 0, 0}, kSqrt2);
  const auto witness = born_distribution(white_noise_state(1.0), example_frame());
  const RMatrix start = s.assemble(npa::strategy_moments(s, white_noise_state(1.0), example_frame()));
  const auto ok = npa::solve_feasibility(prob, witness(1, 1, 1, 0, 0), {}, &start);
  o.require(ok.status == npa::Feasibility::kFeasible, "quantum witness not feasible");
  const auto bad = npa::solve_feasibility(prob, 0.5);
  o.require(bad.status == npa::Feasibility::kInfeasible && bad.certified,
            "no certificate at objective 0.5");

  const double total = seconds_since(t0);
  o.require(slowest < 60.0, "single solve above 60 s");
  o.require(total < 1800.0, "grid above 30 min");
  const double endpoint = values.back();
  const bool endpoint_ok = std::abs(endpoint - 0.4268) <= 5e-3;
  o.detail << "sandwich holds on 11 points; p=1 endpoint " << endpoint;
  if (endpoint_ok)
    o.detail << " within 0.4268 +- 5e-3";
  else
    o.detail << " outside 0.4268 +- 5e-3 (fallback: endpoint reported, not asserted)";
  o.detail << "; slowest solve " << slowest << " s, total " << total << " s, "
           << inconclusive << " inconclusive steps";
}

void criterion7(Outcome& o) {
  const auto t0 = Clock::now();
  const auto summary = monogamy::sample_relation(100000, 7);
  o.require(summary.violations == 0, "violations in sampling");
  o.require(summary.exclusivity_failures == 0, "exclusivity failures in sampling");
  double best = 0.0;
  const double pi = std::numbers::pi;
  for (double theta : {pi / 8, pi / 4, 3 * pi / 8})
    for (double phi : {0.0, pi / 4, pi / 2}) {
      const auto r = monogamy::probe_maximum(theta, phi, 16, 11);
      best = std::max(best, r.report.sum_sq);
      o.require(monogamy::within_bound(r.report), "probe above the bound");
      o.require(monogamy::exclusivity_check(r.report), "probe breaks exclusivity");
    }
  o.require(best >= 3.99, "probe never reaches 3.99");
  const double t = seconds_since(t0);
  o.require(t < 300.0, "runtime");
  o.detail.precision(12);
  o.detail << summary.samples << " samples, " << summary.violations << " violations, max sum "
           << summary.max_report.sum_sq << "; probe sweep max " << best << "; " << t << " s";
}

void criterion8(Outcome& o) {
  const auto t0 = Clock::now();
  std::mt19937_64 rng(808);
  std::normal_distribution<double> g;
  for (int i = 0; i < 1000; ++i) {
    Mat3 m;
    for (int r = 0; r < 3; ++r)
      for (int c = 0; c < 3; ++c) m(r, c) = g(rng);
    const Vec3 x = random_bloch(rng).vec(), y = random_bloch(rng).vec();
    o.require(std::abs(x.dot(m * y)) <= top_singular(m).value + 1e-12, "singular value bound");
  }
  double worst = 0.0;
  for (int i = 0; i < 1000; ++i) {
    const DensityMatrix rho = random_density_matrix(rng);
    const auto f = random_frame(rng);
    const auto d = bell_value_decomposed(rho, f);
    worst = std::max(worst, std::abs(d.total() - bell_value(rho, f)));
    g_distributions.push_back(born_distribution(rho, f));
  }
  o.require(worst <= 1e-12, "decomposition identity");
  for (int i = 0; i < 4; ++i)
    for (int j = 0; j < 3; ++j) {
      const double t = 0.15 + 0.4 * i, f = 0.3 + 0.9 * j;
      const auto r = monogamy::reduced_states(t, f);
      const double c = std::cos(t), s = std::sin(t);
      CMatrix abc = CMatrix::Zero(8, 8);
      abc(0, 0) = c * c;
      abc(7, 7) = s * s;
      abc(0, 7) = abc(7, 0) = c * s * std::cos(f);
      CMatrix rest = CMatrix::Zero(8, 8);
      rest(0, 0) = c * c;
      rest(6, 6) = s * s * std::cos(f) * std::cos(f);
      rest(7, 7) = s * s * std::sin(f) * std::sin(f);
      rest(6, 7) = rest(7, 6) = s * s * std::cos(f) * std::sin(f);
      o.require((r.rho[0].matrix() - abc).norm() <= 1e-12, "abc marginal");
      for (int k = 1; k < 4; ++k)
        o.require((r.rho[static_cast<std::size_t>(k)].matrix() - rest).norm() <= 1e-12,
                  "marginal " + std::string(monogamy::kTripleNames[static_cast<std::size_t>(k)]));
    }
  std::size_t good = 0;
  for (const auto& d : g_distributions) good += normalized_and_no_signalling(d);
  o.require(good == g_distributions.size(), "distribution normalization/no-signalling");
  const double t = seconds_since(t0);
  o.require(t < 60.0, "runtime");
  o.detail << "1000 matrices, 1000 frames (max identity error " << worst
           << "), 12 grid points, " << good << "/" << g_distributions.size()
           << " distributions valid; " << t << " s";
}

}  // namespace

int main() {
  const std::vector<std::pair<const char*, std::function<void(Outcome&)>>> criteria{
      {"theorem-1 closed form on the white-noise family", criterion1},
      {"tightness against direct maximization", criterion2},
      {"classical bound by enumeration", criterion3},
      {"example distribution and min-entropy", criterion4},
      {"violation threshold 1/sqrt(2)", criterion5},
      {"NPA sandwich", criterion6},
      {"monogamy relation", criterion7},
      {"property suites", criterion8},
  };
  int failures = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    Outcome o;
    const auto t0 = Clock::now();
    try {
      criteria[i].second(o);
    } catch (const std::exception& e) {
      o.pass = false;
      o.detail << "exception: " << e.what();
    }
    if (!o.pass) ++failures;
    std::printf("[%s] %zu. %s: %s (%.2f s)\n", o.pass ? "PASS" : "FAIL", i + 1,
                criteria[i].first, o.detail.str().c_str(), seconds_since(t0));
    std::fflush(stdout);
  }
  std::printf("%d/%zu criteria passed\n", static_cast<int>(criteria.size()) - failures,
              criteria.size());
  return failures == 0 ? 0 : 1;
}
