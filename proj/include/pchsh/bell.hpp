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

// The parity-CHSH functional <A1 B- C0> + <A0 B+>, B+- = (B0 +- B1) / 2,
// its singular-value bound and the measurements that saturate it.

#pragma once

#include <array>
#include <cmath>
#include <numbers>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include "pchsh/errors.hpp"
#include "pchsh/linalg.hpp"
#include "pchsh/nelder_mead.hpp"
#include "pchsh/pauli.hpp"

namespace pchsh {

/// Alice measures a (x = 0) or a' (x = 1), Bob b or b', Charlie c.
struct MeasurementFrame {
  BlochVector a, a_prime, b, b_prime, c;
};

/// (m, m', theta_b) with b + b' = 2 cos(theta_b) m and
/// b - b' = 2 sin(theta_b) m'.
struct FrameBasis {
  Vec3 m;
  Vec3 m_prime;
  double theta_b = 0.0;
  /// b = +-b': one of m, m' was filled in by convention.
  bool degenerate = false;
};

namespace detail {
/// Some unit vector orthogonal to `v` (|v| = 1).
inline Vec3 any_orthogonal(const Vec3& v) {
  Eigen::Index k = 0;
  v.cwiseAbs().minCoeff(&k);
  Vec3 e = Vec3::Zero();
  e(k) = 1.0;
  Vec3 u = e - v.dot(e) * v;
  return u.normalized();
}
}  // namespace detail

inline constexpr double kDegenerateNorm = 1e-9;

/// Derived Bob frame. When b = +-b' the missing vector is any unit vector
/// orthogonal to the other, and theta_b is 0 (b = b') or pi/2 (b = -b').
inline FrameBasis frame_basis(const MeasurementFrame& f) {
  const Vec3 sum = f.b.vec() + f.b_prime.vec();
  const Vec3 diff = f.b.vec() - f.b_prime.vec();
  const double ns = sum.norm(), nd = diff.norm();
  FrameBasis out;
  out.theta_b = std::atan2(nd, ns);
  if (ns > kDegenerateNorm && nd > kDegenerateNorm) {
    out.m = sum / ns;
    out.m_prime = diff / nd;
  } else if (ns > kDegenerateNorm) {
    out.m = sum / ns;
    out.m_prime = detail::any_orthogonal(out.m);
    out.theta_b = 0.0;
    out.degenerate = true;
  } else {
    out.m_prime = diff / nd;
    out.m = detail::any_orthogonal(out.m_prime);
    out.theta_b = std::numbers::pi / 2;
    out.degenerate = true;
  }
  return out;
}

/// A1 x B- x C0 + A0 x B+ x I on three qubits.
inline CMatrix bell_operator(const MeasurementFrame& f) {
  const CMatrix a0 = observable_from_bloch(f.a);
  const CMatrix a1 = observable_from_bloch(f.a_prime);
  const CMatrix b0 = observable_from_bloch(f.b);
  const CMatrix b1 = observable_from_bloch(f.b_prime);
  const CMatrix c0 = observable_from_bloch(f.c);
  const CMatrix id = CMatrix::Identity(2, 2);
  const CMatrix bminus = (b0 - b1) / 2.0;
  const CMatrix bplus = (b0 + b1) / 2.0;
  return kron(kron(a1, bminus), c0) + kron(kron(a0, bplus), id);
}

/// Tr(rho * Bell operator). Throws NumericalConsistency if the trace has an
/// imaginary part above 1e-9.
inline double bell_value(const DensityMatrix& rho, const MeasurementFrame& f) {
  if (rho.num_qubits() != 3)
    throw InvalidInput("bell_value: expects a 3-qubit state");
  const Complex v = rho.expectation(bell_operator(f));
  if (std::abs(v.imag()) > 1e-9)
    throw NumericalConsistency("bell_value: complex expectation value");
  return v.real();
}

/// Same value from the correlation tensor:
/// a'^T (sum_k c_k T_k) (b - b')/2 + a^T T_0 (b + b')/2.
inline double bell_value(const CorrelationTensor& t, const MeasurementFrame& f) {
  const Vec3 bm = (f.b.vec() - f.b_prime.vec()) / 2.0;
  const Vec3 bp = (f.b.vec() + f.b_prime.vec()) / 2.0;
  return t.trilinear(f.a_prime.vec(), bm, f.c.vec()) + t.bilinear(f.a.vec(), bp);
}

struct DecomposedBellValue {
  /// <A1 M1 C0> sin(theta_b)
  double term_abc = 0.0;
  /// <A0 M0> cos(theta_b)
  double term_ab = 0.0;
  FrameBasis basis;
  double total() const { return term_abc + term_ab; }
};

enum class DegeneracyPolicy { kThrow, kConvention };

/// Splits the Bell value along the (m, m') frame of Bob's settings.
inline DecomposedBellValue bell_value_decomposed(
    const DensityMatrix& rho, const MeasurementFrame& f,
    DegeneracyPolicy policy = DegeneracyPolicy::kThrow) {
  DecomposedBellValue out;
  out.basis = frame_basis(f);
  if (out.basis.degenerate && policy == DegeneracyPolicy::kThrow)
    throw DegenerateFrame("bell_value_decomposed: b and b' are (anti)parallel");
  const CMatrix a0 = observable_from_bloch(f.a);
  const CMatrix a1 = observable_from_bloch(f.a_prime);
  const CMatrix m0 = observable_from_bloch(BlochVector(out.basis.m));
  const CMatrix m1 = observable_from_bloch(BlochVector(out.basis.m_prime));
  const CMatrix c0 = observable_from_bloch(f.c);
  const CMatrix id = CMatrix::Identity(2, 2);
  out.term_abc = rho.expectation(kron(kron(a1, m1), c0)).real() *
                 std::sin(out.basis.theta_b);
  out.term_ab =
      rho.expectation(kron(kron(a0, m0), id)).real() * std::cos(out.basis.theta_b);
  return out;
}

/// Largest singular value of sum_k c_k T_k.
inline double lambda1_at(const CorrelationTensor& t, const Vec3& c) {
  return top_singular(t.contract_third(c)).value;
}

struct Theorem1Result {
  double bound = 0.0;
  BlochVector c_star;
  /// max_c sigma_max(sum_k c_k T_k)
  double lambda1 = 0.0;
  /// sigma_max(T_0)
  double lambda2 = 0.0;
  MeasurementFrame frame;
  /// false if the singular vectors could not be made orthogonal, in which
  /// case `frame` is the best orthogonalized frame and its value is below
  /// `bound`.
  bool saturated = false;
};

struct BoundOptions {
  int grid_n = 64;
  int refine_iters = 200;
  /// Grid maxima handed to Nelder-Mead.
  int refine_starts = 3;
};

struct SaturationResult {
  MeasurementFrame frame;
  double achieved = 0.0;
  bool saturable = false;
  /// |<m, m'>| of the unconstrained singular-vector choice.
  double overlap = 0.0;
  std::string warning;
};

namespace detail {
/// Unit vector in span(basis) orthogonal to `v`, if the span allows one.
inline std::optional<Vec3> orthogonal_in_span(const Eigen::MatrixXd& basis,
                                              const Vec3& v) {
  if (basis.cols() < 2) return std::nullopt;
  const Eigen::VectorXd w = basis.transpose() * v;
  // Gram-Schmidt the coordinate axes against w; keep the longest remainder.
  Eigen::VectorXd best;
  double best_norm = -1.0;
  const double wn = w.norm();
  for (Eigen::Index i = 0; i < basis.cols(); ++i) {
    Eigen::VectorXd e = Eigen::VectorXd::Unit(basis.cols(), i);
    if (wn > 1e-300) e -= (w.dot(e) / (wn * wn)) * w;
    if (e.norm() > best_norm) {
      best_norm = e.norm();
      best = e;
    }
  }
  Vec3 u = basis * best;
  return canonical_sign(u.normalized());
}
}  // namespace detail

/// Measurement settings that attain sqrt(lambda1^2 + lambda2^2) at `c_star`
/// when the singular vectors of T_0 and sum_k c_k T_k admit orthogonal
/// m, m'. Otherwise m' is orthogonalized against m and the achieved (lower)
/// value is reported with saturable = false.
inline SaturationResult saturating_frame(const CorrelationTensor& t,
                                         const BlochVector& c_star,
                                         double degeneracy_tol = 1e-9) {
  const Mat3 s = t.contract_third(c_star.vec());
  const Mat3 t0 = t.t0();
  const SingularTriplet top_s = top_singular(s);
  const SingularTriplet top_0 = top_singular(t0);
  const double l1 = top_s.value, l2 = top_0.value;

  Vec3 m = top_0.right, mp = top_s.right;
  const Eigen::MatrixXd span0 =
      top_right_singular_subspace(t0, degeneracy_tol * std::max(1.0, l2));
  const Eigen::MatrixXd span1 =
      top_right_singular_subspace(s, degeneracy_tol * std::max(1.0, l1));
  if (auto u = detail::orthogonal_in_span(span0, mp)) {
    m = *u;
  } else if (auto u2 = detail::orthogonal_in_span(span1, m)) {
    mp = *u2;
  }

  SaturationResult out;
  out.overlap = std::abs(m.dot(mp));
  if (out.overlap > 1e-8) {
    const Vec3 rest = mp - m.dot(mp) * m;
    mp = rest.norm() > 1e-12 ? Vec3(rest.normalized()) : detail::any_orthogonal(m);
    out.warning = "singular vectors of T_0 and sum_k c_k T_k are not orthogonal";
  }
  if (l1 <= 1e-14 && l2 <= 1e-14) {
    out.warning = "correlation matrices vanish; nothing to saturate";
  }
  const Vec3 sm = s * mp;
  const Vec3 tm = t0 * m;
  const double e1 = sm.norm(), e2 = tm.norm();
  const Vec3 a = e2 > 1e-14 ? Vec3(tm / e2) : m;
  const Vec3 ap = e1 > 1e-14 ? Vec3(sm / e1) : mp;
  const double theta = std::atan2(e1, e2);
  const Vec3 b = std::cos(theta) * m + std::sin(theta) * mp;
  const Vec3 bp = std::cos(theta) * m - std::sin(theta) * mp;
  out.frame = MeasurementFrame{BlochVector::normalized(a),
                               BlochVector::normalized(ap),
                               BlochVector::normalized(b),
                               BlochVector::normalized(bp), c_star};
  out.achieved = bell_value(t, out.frame);
  out.saturable = out.warning.empty();
  return out;
}

inline SaturationResult saturating_frame(const DensityMatrix& rho,
                                         const BlochVector& c_star) {
  auto out = saturating_frame(correlation_tensor(rho), c_star);
  out.achieved = bell_value(rho, out.frame);
  return out;
}

/// max over unit c of sqrt(sigma_max(sum c_k T_k)^2 + sigma_max(T_0)^2).
///
/// The c-sphere is scanned on a grid_n x grid_n (theta, phi) grid, the best
/// grid points are refined with Nelder-Mead, and the winner is polished by
/// alternating updates c <- normalize(sum_ij t_ijk x_i y_j), which never
/// decrease sigma_max.
inline Theorem1Result theorem1_bound(const CorrelationTensor& t,
                                     const BoundOptions& opt = {}) {
  if (opt.grid_n < 8) throw InvalidInput("theorem1_bound: grid_n must be >= 8");
  const int n = opt.grid_n;
  const double pi = std::numbers::pi;
  struct GridPoint {
    double value, theta, phi;
  };
  std::vector<GridPoint> grid;
  grid.reserve(static_cast<std::size_t>(n) * n);
  for (int i = 0; i < n; ++i) {
    const double th = pi * (i + 0.5) / n;
    for (int j = 0; j < n; ++j) {
      const double ph = 2.0 * pi * j / n;
      grid.push_back({lambda1_at(t, spherical_unit(th, ph)), th, ph});
    }
  }
  // Stable: ties keep the lowest grid index first.
  std::stable_sort(grid.begin(), grid.end(),
                   [](const auto& x, const auto& y) { return x.value > y.value; });

  NelderMeadOptions nm;
  nm.max_iterations = opt.refine_iters;
  nm.diameter_tolerance = 1e-10;
  nm.initial_step = pi / n;
  auto objective = [&](const Eigen::VectorXd& v) {
    return -lambda1_at(t, spherical_unit(v(0), v(1)));
  };

  Vec3 best_c = spherical_unit(grid.front().theta, grid.front().phi);
  double best = grid.front().value;
  const int starts = std::min<int>(opt.refine_starts, static_cast<int>(grid.size()));
  for (int s = 0; s < starts; ++s) {
    const auto& g = grid[static_cast<std::size_t>(s)];
    const auto r = nelder_mead_minimize(objective, Eigen::Vector2d(g.theta, g.phi), nm);
    if (-r.value > best) {
      best = -r.value;
      best_c = spherical_unit(r.argmin(0), r.argmin(1));
    }
  }

  for (int it = 0; it < 200; ++it) {
    const SingularTriplet st = top_singular(t.contract_third(best_c));
    Vec3 next;
    for (int k = 0; k < 3; ++k) next(k) = st.left.dot(t.slice(k + 1) * st.right);
    if (next.norm() < 1e-300) break;
    next.normalize();
    const double v = lambda1_at(t, next);
    if (v <= best + 1e-16) {
      if (v > best) {
        best = v;
        best_c = next;
      }
      break;
    }
    best = v;
    best_c = next;
  }

  Theorem1Result out;
  out.c_star = BlochVector::normalized(canonical_sign(best_c));
  out.lambda1 = lambda1_at(t, out.c_star.vec());
  out.lambda2 = top_singular(t.t0()).value;
  out.bound = std::hypot(out.lambda1, out.lambda2);
  const auto sat = saturating_frame(t, out.c_star);
  out.frame = sat.frame;
  out.saturated = sat.saturable;
  return out;
}

inline Theorem1Result theorem1_bound(const DensityMatrix& rho,
                                     const BoundOptions& opt = {}) {
  return theorem1_bound(correlation_tensor(rho), opt);
}

/// Deterministic local strategy (a0, a1, b0, b1, c0) in {+1, -1}^5.
struct LhvStrategy {
  std::array<int, 5> outcomes{};
  double value = 0.0;
};

struct LhvResult {
  double max = 0.0;
  double min = 0.0;
  std::vector<LhvStrategy> maximizers;
};

/// Exhaustive enumeration of the 32 deterministic strategies.
inline LhvResult lhv_bound() {
  LhvResult out;
  out.max = -INFINITY;
  out.min = INFINITY;
  std::vector<LhvStrategy> all;
  for (int mask = 0; mask < 32; ++mask) {
    LhvStrategy s;
    for (int i = 0; i < 5; ++i) s.outcomes[static_cast<std::size_t>(i)] = (mask >> i) & 1 ? -1 : 1;
    const auto [a0, a1, b0, b1, c0] = s.outcomes;
    s.value = a1 * (b0 - b1) / 2.0 * c0 + a0 * (b0 + b1) / 2.0;
    out.max = std::max(out.max, s.value);
    out.min = std::min(out.min, s.value);
    all.push_back(s);
  }
  for (const auto& s : all)
    if (s.value == out.max) out.maximizers.push_back(s);
  return out;
}

struct SeeSawOptions {
  int restarts = 32;
  int max_iterations = 6000;
};

struct SeeSawResult {
  double value = 0.0;
  MeasurementFrame frame;
};

/// Frame from 10 spherical angles (theta, phi) for a, a', b, b', c.
inline MeasurementFrame frame_from_angles(const Eigen::VectorXd& v) {
  auto u = [&](int k) { return BlochVector(spherical_unit(v(2 * k), v(2 * k + 1))); };
  return {u(0), u(1), u(2), u(3), u(4)};
}

/// Direct maximization of the Bell value over all five Bloch vectors:
/// Nelder-Mead on the ten spherical angles from `restarts` random starts.
inline SeeSawResult see_saw_maximize(const DensityMatrix& rho,
                                     const SeeSawOptions& opt,
                                     std::uint64_t seed) {
  if (opt.restarts < 1) throw InvalidInput("see_saw_maximize: restarts must be >= 1");
  const CorrelationTensor t = correlation_tensor(rho);
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> angle(0.0, 2.0 * std::numbers::pi);
  NelderMeadOptions nm;
  nm.max_iterations = opt.max_iterations;
  nm.diameter_tolerance = 1e-10;
  nm.initial_step = 0.5;
  auto objective = [&](const Eigen::VectorXd& v) {
    return -bell_value(t, frame_from_angles(v));
  };
  SeeSawResult best;
  best.value = -INFINITY;
  for (int r = 0; r < opt.restarts; ++r) {
    Eigen::VectorXd x0(10);
    for (int i = 0; i < 10; ++i) x0(i) = angle(rng);
    auto res = nelder_mead_minimize(objective, x0, nm);
    // One restart from the converged point escapes most premature collapses.
    nm.initial_step = 0.05;
    res = nelder_mead_minimize(objective, res.argmin, nm);
    nm.initial_step = 0.5;
    if (-res.value > best.value) {
      best.value = -res.value;
      best.frame = frame_from_angles(res.argmin);
    }
  }
  best.value = bell_value(rho, best.frame);
  return best;
}

inline SeeSawResult see_saw_maximize(const DensityMatrix& rho, int restarts,
                                     std::uint64_t seed) {
  SeeSawOptions opt;
  opt.restarts = restarts;
  return see_saw_maximize(rho, opt, seed);
}

}  // namespace pchsh
