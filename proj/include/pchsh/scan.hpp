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

// Visibility scans over the white-noise family.

#pragma once

#include <cmath>
#include <cstdio>
#include <numbers>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "pchsh/bell.hpp"
#include "pchsh/errors.hpp"
#include "pchsh/npa.hpp"
#include "pchsh/parallel.hpp"
#include "pchsh/randomness.hpp"

namespace pchsh {

struct ScanRow {
  double p = 0.0;
  double bell_bound = 0.0;
  double lower_max_prob = 0.0;
  std::optional<double> npa_upper_max_prob;
  /// Min-entropy of the example distribution, -log2(lower_max_prob).
  double min_entropy_bits = 0.0;
};

struct ScanOptions {
  BoundOptions bound;
  npa::UpperBoundOptions npa;
  /// Allowed excess of lower_max_prob over the NPA value in a row.
  double consistency_tol = 1e-3;
};

/// steps evenly spaced visibilities from p_min to p_max inclusive.
inline std::vector<double> scan_grid(double p_min, double p_max, int steps) {
  if (steps < 2) throw InvalidInput("scan: steps must be >= 2");
  if (!(p_min >= 0.0 && p_max <= 1.0 && p_min < p_max))
    throw InvalidInput("scan: need 0 <= p_min < p_max <= 1");
  std::vector<double> grid(static_cast<std::size_t>(steps));
  for (int i = 0; i < steps; ++i)
    grid[static_cast<std::size_t>(i)] =
        i == steps - 1 ? p_max : p_min + (p_max - p_min) * i / (steps - 1);
  return grid;
}

inline ScanRow scan_row(double p, bool include_npa, const ScanOptions& opt = {}) {
  ScanRow row;
  row.p = p;
  const DensityMatrix rho = white_noise_state(p);
  row.bell_bound = theorem1_bound(rho, opt.bound).bound;
  row.lower_max_prob = max_probability(born_distribution(rho, example_frame()));
  row.min_entropy_bits = min_entropy(row.lower_max_prob);
  if (include_npa) {
    const double bell = std::min(row.bell_bound, std::numbers::sqrt2);
    row.npa_upper_max_prob = npa::npa_upper_bound(bell, opt.npa).value;
    if (row.lower_max_prob > *row.npa_upper_max_prob + opt.consistency_tol) {
      std::ostringstream os;
      os << "scan: at p = " << p << " the example probability "
         << row.lower_max_prob << " exceeds the NPA bound "
         << *row.npa_upper_max_prob;
      throw NumericalConsistency(os.str());
    }
  }
  return row;
}

/// Rows in ascending p. Rows are computed in parallel.
inline std::vector<ScanRow> noise_scan(double p_min, double p_max, int steps,
                                       bool include_npa,
                                       const ScanOptions& opt = {},
                                       unsigned threads = thread_count()) {
  const std::vector<double> grid = scan_grid(p_min, p_max, steps);
  std::vector<ScanRow> rows(grid.size());
  parallel_for(
      grid.size(), [&](std::size_t i) { rows[i] = scan_row(grid[i], include_npa, opt); },
      threads);
  return rows;
}

inline std::string format_g12(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.12g", v == 0.0 ? 0.0 : v);
  return buf;
}

inline constexpr const char* kScanCsvHeader =
    "p,bell_bound,lower_max_prob,npa_upper_max_prob,min_entropy_bits";

/// CSV body with header; each line of `preamble` is emitted first as a
/// '#' comment.
inline std::string scan_csv(const std::vector<ScanRow>& rows,
                            const std::string& preamble = {}) {
  std::ostringstream os;
  if (!preamble.empty()) {
    std::istringstream in(preamble);
    for (std::string line; std::getline(in, line);) os << "# " << line << '\n';
  }
  os << kScanCsvHeader << '\n';
  for (const ScanRow& r : rows) {
    os << format_g12(r.p) << ',' << format_g12(r.bell_bound) << ','
       << format_g12(r.lower_max_prob) << ',';
    if (r.npa_upper_max_prob) os << format_g12(*r.npa_upper_max_prob);
    os << ',' << format_g12(r.min_entropy_bits) << '\n';
  }
  return os.str();
}

}  // namespace pchsh
