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
#include <cmath>
#include <complex>
#include <numeric>
#include <type_traits>
#include <vector>

#include "pchsh/errors.hpp"

namespace pchsh {

using Complex = std::complex<double>;
using CMatrix = Eigen::MatrixXcd;
using RMatrix = Eigen::MatrixXd;
using Vec3 = Eigen::Vector3d;
using Mat3 = Eigen::Matrix3d;

namespace detail {
template <typename T>
struct is_complex : std::false_type {};
template <typename T>
struct is_complex<std::complex<T>> : std::true_type {};

inline double conj_of(double x) { return x; }
inline Complex conj_of(const Complex& z) { return std::conj(z); }
}  // namespace detail

/// Eigenvalues (ascending) and matching orthonormal eigenvectors (columns).
template <typename Scalar>
struct EigenDecomposition {
  Eigen::VectorXd values;
  Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic> vectors;
  int sweeps = 0;
  bool converged = false;
};

struct JacobiOptions {
  /// Stop when the off-diagonal Frobenius norm drops below
  /// off_tolerance * max(1, ||A||_F).
  double off_tolerance = 1e-13;
  int max_sweeps = 100;
};

/// Cyclic Jacobi eigendecomposition of a real symmetric or complex Hermitian
/// matrix. Only the Hermitian part of `a` is used.
///
/// If `start` is given (a unitary whose columns approximately diagonalize `a`,
/// e.g. eigenvectors from a nearby matrix), the sweep starts from
/// start^H a start, which usually needs one or two sweeps.
template <typename Derived>
EigenDecomposition<typename Derived::Scalar> jacobi_eigen(
    const Eigen::MatrixBase<Derived>& a, const JacobiOptions& options = {},
    const Eigen::Matrix<typename Derived::Scalar, Eigen::Dynamic,
                        Eigen::Dynamic>* start = nullptr) {
  using Scalar = typename Derived::Scalar;
  using Mat = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;
  const Eigen::Index n = a.rows();
  if (a.cols() != n) throw InvalidInput("jacobi_eigen: matrix is not square");

  Mat work = (a + a.adjoint()) / 2.0;
  Mat vecs;
  if (start != nullptr) {
    vecs = *start;
    work = vecs.adjoint() * work * vecs;
    work = (work + work.adjoint()).eval() / 2.0;
  } else {
    vecs = Mat::Identity(n, n);
  }

  const double scale = std::max(1.0, work.norm());
  const double threshold = options.off_tolerance * scale;

  auto off_norm = [&]() {
    double s = 0.0;
    for (Eigen::Index j = 0; j < n; ++j)
      for (Eigen::Index i = 0; i < n; ++i)
        if (i != j) s += std::norm(work(i, j));
    return std::sqrt(s);
  };

  EigenDecomposition<Scalar> out;
  int sweep = 0;
  for (; sweep < options.max_sweeps; ++sweep) {
    if (off_norm() <= threshold) {
      out.converged = true;
      break;
    }
    for (Eigen::Index p = 0; p < n - 1; ++p) {
      for (Eigen::Index q = p + 1; q < n; ++q) {
        const Scalar g = work(p, q);
        const double r = std::abs(g);
        if (r < 1e-300) continue;
        const double app = std::real(work(p, p));
        const double aqq = std::real(work(q, q));
        const double theta = (aqq - app) / (2.0 * r);
        const double t = (theta >= 0 ? 1.0 : -1.0) /
                         (std::abs(theta) + std::sqrt(theta * theta + 1.0));
        const double c = 1.0 / std::sqrt(t * t + 1.0);
        const double s = t * c;
        // Unitary in the (p, q) plane: phase removal on q, then a real
        // rotation. u = [[c, s], [-s*conj(e), c*conj(e)]] with e = g / |g|.
        const Scalar e = g / r;
        const Scalar ce = detail::conj_of(e);
        const Scalar upp = c, upq = s;
        const Scalar uqp = -s * ce, uqq = c * ce;
        for (Eigen::Index k = 0; k < n; ++k) {
          const Scalar wp = work(k, p), wq = work(k, q);
          work(k, p) = wp * upp + wq * uqp;
          work(k, q) = wp * upq + wq * uqq;
        }
        for (Eigen::Index k = 0; k < n; ++k) {
          const Scalar wp = work(p, k), wq = work(q, k);
          work(p, k) = detail::conj_of(upp) * wp + detail::conj_of(uqp) * wq;
          work(q, k) = detail::conj_of(upq) * wp + detail::conj_of(uqq) * wq;
        }
        work(p, q) = Scalar(0);
        work(q, p) = Scalar(0);
        work(p, p) = Scalar(std::real(work(p, p)));
        work(q, q) = Scalar(std::real(work(q, q)));
        for (Eigen::Index k = 0; k < n; ++k) {
          const Scalar vp = vecs(k, p), vq = vecs(k, q);
          vecs(k, p) = vp * upp + vq * uqp;
          vecs(k, q) = vp * upq + vq * uqq;
        }
      }
    }
  }
  if (!out.converged && off_norm() <= threshold) out.converged = true;
  out.sweeps = sweep;

  std::vector<Eigen::Index> order(static_cast<std::size_t>(n));
  std::iota(order.begin(), order.end(), Eigen::Index{0});
  std::stable_sort(order.begin(), order.end(), [&](auto i, auto j) {
    return std::real(work(i, i)) < std::real(work(j, j));
  });
  out.values.resize(n);
  out.vectors.resize(n, n);
  for (Eigen::Index k = 0; k < n; ++k) {
    const auto src = order[static_cast<std::size_t>(k)];
    out.values(k) = std::real(work(src, src));
    out.vectors.col(k) = vecs.col(src);
  }
  return out;
}

/// Largest singular value of a small real matrix with its singular vectors:
/// left^T * m * right == value, both unit norm.
struct SingularTriplet {
  double value = 0.0;
  Vec3 left = Vec3::UnitX();
  Vec3 right = Vec3::UnitX();
};

/// Flip `v` so that its largest-magnitude component is positive.
inline Vec3 canonical_sign(const Vec3& v) {
  Eigen::Index k = 0;
  v.cwiseAbs().maxCoeff(&k);
  return v(k) < 0 ? Vec3(-v) : v;
}

/// Top singular triplet of a 3x3 real matrix via Jacobi on m^T m.
/// The right vector is sign-normalized with canonical_sign; the left vector
/// follows as m * right / value. For a zero matrix the vectors default to e_x.
inline SingularTriplet top_singular(const Mat3& m) {
  const Mat3 gram = m.transpose() * m;
  const auto eig = jacobi_eigen(gram);
  SingularTriplet out;
  const double top = std::max(eig.values(2), 0.0);
  out.value = std::sqrt(top);
  out.right = canonical_sign(eig.vectors.col(2).real());
  if (out.value > 1e-14) {
    out.left = (m * out.right) / out.value;
    out.left.normalize();
  } else {
    out.value = 0.0;
    out.left = Vec3::UnitX();
  }
  return out;
}

/// Orthonormal basis (columns) of the right-singular subspace of `m` whose
/// singular values are within `tol` of the largest.
inline Eigen::MatrixXd top_right_singular_subspace(const Mat3& m, double tol) {
  const auto eig = jacobi_eigen(Mat3(m.transpose() * m));
  const double top = std::sqrt(std::max(eig.values(2), 0.0));
  std::vector<Eigen::Index> cols;
  for (Eigen::Index k = 2; k >= 0; --k)
    if (top - std::sqrt(std::max(eig.values(k), 0.0)) <= tol) cols.push_back(k);
  Eigen::MatrixXd basis(3, static_cast<Eigen::Index>(cols.size()));
  for (std::size_t i = 0; i < cols.size(); ++i)
    basis.col(static_cast<Eigen::Index>(i)) = eig.vectors.col(cols[i]).real();
  return basis;
}

/// Unit vector in spherical coordinates (polar theta from +z, azimuth phi).
inline Vec3 spherical_unit(double theta, double phi) {
  return {std::sin(theta) * std::cos(phi), std::sin(theta) * std::sin(phi),
          std::cos(theta)};
}

}  // namespace pchsh
