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
#include <random>
#include <sstream>
#include <string>
#include <utility>

#include "pchsh/errors.hpp"
#include "pchsh/linalg.hpp"

namespace pchsh {

/// Tolerances used when validating a density matrix.
struct StateTolerances {
  double hermiticity = 1e-12;
  double trace = 1e-12;
  /// Smallest eigenvalue must be >= -psd.
  double psd = 1e-10;
};

/// Single-qubit Pauli matrix sigma_i, i in {0 (identity), 1, 2, 3}.
inline Eigen::Matrix2cd pauli(int i) {
  using namespace std::complex_literals;
  Eigen::Matrix2cd m;
  switch (i) {
    case 0: m << 1, 0, 0, 1; break;
    case 1: m << 0, 1, 1, 0; break;
    case 2: m << 0, -1i, 1i, 0; break;
    case 3: m << 1, 0, 0, -1; break;
    default: throw InvalidInput("pauli: index must be in 0..3");
  }
  return m;
}

/// Kronecker product, left factor is the more significant qubit.
inline CMatrix kron(const CMatrix& a, const CMatrix& b) {
  CMatrix out(a.rows() * b.rows(), a.cols() * b.cols());
  for (Eigen::Index i = 0; i < a.rows(); ++i)
    for (Eigen::Index j = 0; j < a.cols(); ++j)
      out.block(i * b.rows(), j * b.cols(), b.rows(), b.cols()) = a(i, j) * b;
  return out;
}

/// A real unit 3-vector defining the dichotomic observable g . sigma.
class BlochVector {
 public:
  static constexpr double kNormTolerance = 1e-9;

  BlochVector() : v_(Vec3::UnitZ()) {}

  /// Throws InvalidInput if | |v| - 1 | > kNormTolerance.
  explicit BlochVector(const Vec3& v) : v_(v) {
    if (!std::isfinite(v.norm()) || std::abs(v.norm() - 1.0) > kNormTolerance) {
      std::ostringstream os;
      os << "BlochVector: norm " << v.norm() << " deviates from 1";
      throw InvalidInput(os.str());
    }
    v_.normalize();
  }
  BlochVector(double x, double y, double z) : BlochVector(Vec3(x, y, z)) {}

  /// Normalizes `v`; throws InvalidInput for a (near-)zero vector.
  static BlochVector normalized(const Vec3& v) {
    if (v.norm() < 1e-300) throw InvalidInput("BlochVector: zero vector");
    return BlochVector(Vec3(v / v.norm()));
  }
  static BlochVector from_angles(double theta, double phi) {
    return BlochVector(spherical_unit(theta, phi));
  }

  const Vec3& vec() const { return v_; }
  double operator[](int i) const { return v_(i); }
  /// Polar angle in [0, pi].
  double theta() const { return std::acos(std::clamp(v_(2), -1.0, 1.0)); }
  /// Azimuth in (-pi, pi].
  double phi() const { return std::atan2(v_(1), v_(0)); }

 private:
  Vec3 v_;
};

/// g1 sigma1 + g2 sigma2 + g3 sigma3; eigenvalues are exactly +1 and -1.
inline Eigen::Matrix2cd observable_from_bloch(const BlochVector& v) {
  return v[0] * pauli(1) + v[1] * pauli(2) + v[2] * pauli(3);
}

/// Projector onto the `outcome` (+1 or -1) eigenspace of observable_from_bloch(v).
inline Eigen::Matrix2cd outcome_projector(const BlochVector& v, int outcome) {
  return (Eigen::Matrix2cd::Identity() +
          static_cast<double>(outcome) * observable_from_bloch(v)) /
         2.0;
}

/// Hermitian, unit-trace, positive semidefinite matrix on 3 or 4 qubits.
/// Qubit 0 is the leftmost tensor factor.
class DensityMatrix {
 public:
  /// Validates every invariant; throws ValidationError naming the violated
  /// property (and the offending index for hermiticity).
  explicit DensityMatrix(CMatrix entries, const StateTolerances& tol = {})
      : entries_(std::move(entries)) {
    const Eigen::Index dim = entries_.rows();
    if (entries_.cols() != dim)
      throw ValidationError("density matrix: not square");
    num_qubits_ = 0;
    while ((Eigen::Index{1} << num_qubits_) < dim) ++num_qubits_;
    if ((Eigen::Index{1} << num_qubits_) != dim || num_qubits_ < 1 ||
        num_qubits_ > 4) {
      std::ostringstream os;
      os << "density matrix: dimension " << dim
         << " is not 2^n for n in 1..4";
      throw ValidationError(os.str());
    }
    for (Eigen::Index i = 0; i < dim; ++i) {
      for (Eigen::Index j = 0; j < dim; ++j) {
        const Complex z = entries_(i, j);
        if (!std::isfinite(z.real()) || !std::isfinite(z.imag())) {
          std::ostringstream os;
          os << "density matrix: non-finite entry at [" << i << "][" << j
             << "]";
          throw ValidationError(os.str());
        }
        const double dev = std::abs(z - std::conj(entries_(j, i)));
        if (dev > tol.hermiticity) {
          std::ostringstream os;
          os << "density matrix: not Hermitian at index [" << i << "][" << j
             << "] (deviation " << dev << ")";
          throw ValidationError(os.str());
        }
      }
    }
    const Complex tr = entries_.trace();
    if (std::abs(tr - Complex(1.0, 0.0)) > tol.trace) {
      std::ostringstream os;
      os.precision(17);
      os << "density matrix: trace " << tr.real() << " differs from 1";
      throw ValidationError(os.str());
    }
    const auto eig = jacobi_eigen(entries_);
    if (eig.values(0) < -tol.psd) {
      std::ostringstream os;
      os << "density matrix: not positive semidefinite (smallest eigenvalue "
         << eig.values(0) << ")";
      throw ValidationError(os.str());
    }
  }

  int num_qubits() const { return num_qubits_; }
  Eigen::Index dim() const { return entries_.rows(); }
  const CMatrix& matrix() const { return entries_; }
  Complex operator()(Eigen::Index i, Eigen::Index j) const {
    return entries_(i, j);
  }

  double purity() const { return (entries_ * entries_).trace().real(); }

  /// Ascending eigenvalues.
  Eigen::VectorXd eigenvalues() const { return jacobi_eigen(entries_).values; }

  /// Tr(rho * op) for an operator of matching dimension.
  Complex expectation(const CMatrix& op) const {
    return (entries_ * op).trace();
  }

 private:
  CMatrix entries_;
  int num_qubits_ = 0;
};

/// t_ijk = Tr(rho sigma_i x sigma_j x sigma_k), i, j, k in 0..3.
class CorrelationTensor {
 public:
  CorrelationTensor() { t_.fill(0.0); }

  double operator()(int i, int j, int k) const { return t_[index(i, j, k)]; }
  double& operator()(int i, int j, int k) { return t_[index(i, j, k)]; }

  /// (T_0)_ij = t_ij0, i, j in 1..3.
  Mat3 t0() const { return slice(0); }
  /// (T_k)_ij = t_ijk, i, j in 1..3, k in 0..3.
  Mat3 slice(int k) const {
    Mat3 m;
    for (int i = 0; i < 3; ++i)
      for (int j = 0; j < 3; ++j) m(i, j) = (*this)(i + 1, j + 1, k);
    return m;
  }
  /// sum_k c_k T_k.
  Mat3 contract_third(const Vec3& c) const {
    return c(0) * slice(1) + c(1) * slice(2) + c(2) * slice(3);
  }

  /// sum_{i,j,k >= 1} t_ijk x_i y_j z_k.
  double trilinear(const Vec3& x, const Vec3& y, const Vec3& z) const {
    return x.dot(contract_third(z) * y);
  }
  /// sum_{i,j >= 1} t_ij0 x_i y_j.
  double bilinear(const Vec3& x, const Vec3& y) const {
    return x.dot(t0() * y);
  }

  const std::array<double, 64>& data() const { return t_; }

 private:
  static std::size_t index(int i, int j, int k) {
    return static_cast<std::size_t>(16 * i + 4 * j + k);
  }
  std::array<double, 64> t_;
};

/// Correlation tensor of a 3-qubit state. Throws NumericalConsistency if any
/// trace has an imaginary part above `imag_tolerance`.
inline CorrelationTensor correlation_tensor(const DensityMatrix& rho,
                                            double imag_tolerance = 1e-9) {
  if (rho.num_qubits() != 3)
    throw InvalidInput("correlation_tensor: expects a 3-qubit state");
  std::array<Eigen::Matrix2cd, 4> s{pauli(0), pauli(1), pauli(2), pauli(3)};
  CorrelationTensor t;
  const CMatrix& m = rho.matrix();
  for (int i = 0; i < 4; ++i) {
    for (int j = 0; j < 4; ++j) {
      for (int k = 0; k < 4; ++k) {
        // Tr(rho P) = sum_{r,c} rho(r,c) P(c,r); P is a tensor product of
        // single-qubit Paulis, so P(c,r) factorizes over the bits.
        Complex acc = 0.0;
        for (int r = 0; r < 8; ++r) {
          for (int c = 0; c < 8; ++c) {
            const Complex p = s[i](c >> 2 & 1, r >> 2 & 1) *
                              s[j](c >> 1 & 1, r >> 1 & 1) *
                              s[k](c & 1, r & 1);
            if (p != Complex(0.0)) acc += m(r, c) * p;
          }
        }
        if (std::abs(acc.imag()) > imag_tolerance) {
          std::ostringstream os;
          os << "correlation_tensor: residual imaginary part " << acc.imag()
             << " at (" << i << "," << j << "," << k << ")";
          throw NumericalConsistency(os.str());
        }
        t(i, j, k) = acc.real();
      }
    }
  }
  return t;
}

/// Reduced state after tracing out `traced_qubit` (0 = leftmost factor).
inline DensityMatrix partial_trace(const DensityMatrix& rho, int traced_qubit) {
  const int n = rho.num_qubits();
  if (traced_qubit < 0 || traced_qubit >= n) {
    std::ostringstream os;
    os << "partial_trace: qubit index " << traced_qubit << " out of range for "
       << n << " qubits";
    throw InvalidInput(os.str());
  }
  if (n < 2) throw InvalidInput("partial_trace: need at least 2 qubits");
  const int bit = n - 1 - traced_qubit;
  const Eigen::Index low_mask = (Eigen::Index{1} << bit) - 1;
  const Eigen::Index rdim = rho.dim() / 2;
  auto expand = [&](Eigen::Index r, Eigen::Index b) {
    return ((r & ~low_mask) << 1) | (b << bit) | (r & low_mask);
  };
  CMatrix out = CMatrix::Zero(rdim, rdim);
  for (Eigen::Index i = 0; i < rdim; ++i)
    for (Eigen::Index j = 0; j < rdim; ++j)
      for (Eigen::Index b = 0; b < 2; ++b)
        out(i, j) += rho(expand(i, b), expand(j, b));
  return DensityMatrix(std::move(out));
}

/// |v><v| for a normalized state vector.
inline CMatrix projector(const Eigen::VectorXcd& v) { return v * v.adjoint(); }

/// p |psi><psi| + (1 - p) I / 8 with |psi> = (|000> + |110>) / sqrt(2).
inline DensityMatrix white_noise_state(double p) {
  if (!(p >= 0.0 && p <= 1.0))
    throw InvalidInput("white_noise_state: p must lie in [0, 1]");
  Eigen::VectorXcd psi = Eigen::VectorXcd::Zero(8);
  psi(0) = psi(6) = 1.0 / std::sqrt(2.0);
  CMatrix m = p * projector(psi) + (1.0 - p) / 8.0 * CMatrix::Identity(8, 8);
  return DensityMatrix(std::move(m));
}

/// Pure 4-qubit state cos(t)|0000> + sin(t)|111>(cos(f)|0> + sin(f)|1>).
inline Eigen::VectorXcd ghz_class_vector(double theta, double phi) {
  Eigen::VectorXcd psi = Eigen::VectorXcd::Zero(16);
  psi(0) = std::cos(theta);
  psi(14) = std::sin(theta) * std::cos(phi);
  psi(15) = std::sin(theta) * std::sin(phi);
  return psi;
}

inline DensityMatrix ghz_class_state(double theta, double phi) {
  CMatrix m = projector(ghz_class_vector(theta, phi));
  // Rounding can leave the trace a few ulps away from 1.
  m /= m.trace().real();
  return DensityMatrix(std::move(m));
}

inline DensityMatrix maximally_mixed(int num_qubits) {
  const Eigen::Index d = Eigen::Index{1} << num_qubits;
  return DensityMatrix(CMatrix(CMatrix::Identity(d, d) / static_cast<double>(d)));
}

/// Haar-random pure state on num_qubits qubits.
template <typename Rng>
Eigen::VectorXcd random_pure_vector(Rng& rng, int num_qubits) {
  std::normal_distribution<double> normal(0.0, 1.0);
  const Eigen::Index d = Eigen::Index{1} << num_qubits;
  Eigen::VectorXcd v(d);
  for (Eigen::Index i = 0; i < d; ++i) {
    const double re = normal(rng);
    const double im = normal(rng);
    v(i) = Complex(re, im);
  }
  return v / v.norm();
}

/// Mixed state obtained by tracing a Haar-random pure state on
/// 2 * num_qubits qubits down to the first num_qubits.
template <typename Rng>
DensityMatrix random_density_matrix(Rng& rng, int num_qubits = 3) {
  const Eigen::Index d = Eigen::Index{1} << num_qubits;
  const Eigen::VectorXcd v = random_pure_vector(rng, 2 * num_qubits);
  // Row index = system, column index = ancilla.
  CMatrix amp(d, d);
  for (Eigen::Index s = 0; s < d; ++s)
    for (Eigen::Index a = 0; a < d; ++a) amp(s, a) = v(s * d + a);
  CMatrix rho = amp * amp.adjoint();
  rho = (rho + rho.adjoint()).eval() / 2.0;
  rho /= rho.trace().real();
  return DensityMatrix(std::move(rho));
}

/// Uniformly distributed unit vector.
template <typename Rng>
BlochVector random_bloch(Rng& rng) {
  std::normal_distribution<double> normal(0.0, 1.0);
  Vec3 v;
  do {
    const double x = normal(rng);
    const double y = normal(rng);
    const double z = normal(rng);
    v = Vec3(x, y, z);
  } while (v.norm() < 1e-8);
  return BlochVector::normalized(v);
}

/// Tensor product rho_1 x rho_2 x ... for single-qubit states.
inline DensityMatrix product_state(const std::vector<Eigen::Matrix2cd>& factors) {
  CMatrix m = CMatrix::Ones(1, 1);
  for (const auto& f : factors) m = kron(m, f);
  return DensityMatrix(std::move(m));
}

}  // namespace pchsh
