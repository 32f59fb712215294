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

#include <Eigen/Dense>
#include <algorithm>
#include <functional>
#include <numeric>
#include <vector>

namespace pchsh {

struct NelderMeadOptions {
  double reflection = 1.0;
  double expansion = 2.0;
  double contraction = 0.5;
  double shrink = 0.5;
  /// Converged once the largest vertex distance from the best vertex is
  /// below this.
  double diameter_tolerance = 1e-10;
  int max_iterations = 200;
  /// Edge length of the initial axis-aligned simplex.
  double initial_step = 0.1;
};

struct NelderMeadResult {
  Eigen::VectorXd argmin;
  double value = 0.0;
  int iterations = 0;
  bool converged = false;
};

/// Derivative-free minimization of `f` starting from `x0`.
template <typename F>
NelderMeadResult nelder_mead_minimize(F&& f, const Eigen::VectorXd& x0,
                                      const NelderMeadOptions& opt = {}) {
  const Eigen::Index n = x0.size();
  std::vector<Eigen::VectorXd> pts(static_cast<std::size_t>(n + 1), x0);
  std::vector<double> vals(static_cast<std::size_t>(n + 1));
  for (Eigen::Index i = 0; i < n; ++i)
    pts[static_cast<std::size_t>(i + 1)](i) += opt.initial_step;
  for (std::size_t i = 0; i < pts.size(); ++i) vals[i] = f(pts[i]);

  std::vector<std::size_t> order(pts.size());
  auto sort_simplex = [&] {
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::stable_sort(order.begin(), order.end(),
                     [&](auto a, auto b) { return vals[a] < vals[b]; });
    std::vector<Eigen::VectorXd> p2;
    std::vector<double> v2;
    p2.reserve(pts.size());
    v2.reserve(pts.size());
    for (auto k : order) {
      p2.push_back(pts[k]);
      v2.push_back(vals[k]);
    }
    pts = std::move(p2);
    vals = std::move(v2);
  };
  auto diameter = [&] {
    double d = 0.0;
    for (std::size_t i = 1; i < pts.size(); ++i)
      d = std::max(d, (pts[i] - pts[0]).norm());
    return d;
  };

  NelderMeadResult res;
  int it = 0;
  for (; it < opt.max_iterations; ++it) {
    sort_simplex();
    if (diameter() < opt.diameter_tolerance) {
      res.converged = true;
      break;
    }
    const std::size_t worst = pts.size() - 1;
    Eigen::VectorXd centroid = Eigen::VectorXd::Zero(n);
    for (std::size_t i = 0; i < worst; ++i) centroid += pts[i];
    centroid /= static_cast<double>(n);

    const Eigen::VectorXd xr =
        centroid + opt.reflection * (centroid - pts[worst]);
    const double fr = f(xr);
    if (fr < vals[0]) {
      const Eigen::VectorXd xe =
          centroid + opt.expansion * (xr - centroid);
      const double fe = f(xe);
      if (fe < fr) {
        pts[worst] = xe;
        vals[worst] = fe;
      } else {
        pts[worst] = xr;
        vals[worst] = fr;
      }
      continue;
    }
    if (fr < vals[worst - 1]) {
      pts[worst] = xr;
      vals[worst] = fr;
      continue;
    }
    // Contraction: outside if the reflected point improved on the worst.
    const bool outside = fr < vals[worst];
    const Eigen::VectorXd xc =
        outside ? Eigen::VectorXd(centroid + opt.contraction * (xr - centroid))
                : Eigen::VectorXd(centroid +
                                  opt.contraction * (pts[worst] - centroid));
    const double fc = f(xc);
    if (fc < (outside ? fr : vals[worst])) {
      pts[worst] = xc;
      vals[worst] = fc;
      continue;
    }
    for (std::size_t i = 1; i < pts.size(); ++i) {
      pts[i] = pts[0] + opt.shrink * (pts[i] - pts[0]);
      vals[i] = f(pts[i]);
    }
  }
  sort_simplex();
  if (!res.converged && diameter() < opt.diameter_tolerance)
    res.converged = true;
  res.argmin = pts[0];
  res.value = vals[0];
  res.iterations = it;
  return res;
}

}  // namespace pchsh
