#pragma once

#include <complex>
#include <stdexcept>
#include <string>

#include <Eigen/Dense>

namespace crdiff {

// Largest CR dimension n supported. Vectors and matrices below are dynamically
// sized up to these bounds but stored inline, so the integrator never touches
// the heap.
inline constexpr int kMaxN = 4;
inline constexpr int kMaxDim = 2 * kMaxN + 1;

using Complex = std::complex<double>;

template <typename Scalar>
using DimVector = Eigen::Matrix<Scalar, Eigen::Dynamic, 1, 0, kMaxDim, 1>;

template <typename Scalar>
using NVector = Eigen::Matrix<Scalar, Eigen::Dynamic, 1, 0, kMaxN, 1>;

template <typename Scalar>
using NMatrix = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic, 0, kMaxN, kMaxN>;

template <typename Scalar>
using DimMatrix = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic, 0, kMaxDim, kMaxDim>;

/// Real chart coordinates (x^1, ..., x^{2n+1}). For the Heisenberg group the
/// ordering is (u^1, v^1, ..., u^n, v^n, t) with z = u + i v.
using ChartPoint = DimVector<double>;

/// Complexified tangent vector, coefficients on the coordinate basis.
using CTangent = DimVector<Complex>;

/// Complex covector on the coordinate basis.
using CCovector = DimVector<Complex>;

using CVectorN = NVector<Complex>;
using CMatrixN = NMatrix<Complex>;

/// Columns are the frame fields Z_1, ..., Z_n at a point.
using FrameValues = Eigen::Matrix<Complex, Eigen::Dynamic, Eigen::Dynamic, 0, kMaxDim, kMaxN>;

/// J(k, j) = d(component k) / dx^j.
using CJacobian = DimMatrix<Complex>;

/// Covector-vector pairing (no conjugation).
template <typename A, typename B>
Complex pairing(const Eigen::MatrixBase<A>& covector, const Eigen::MatrixBase<B>& vector) {
  return covector.cwiseProduct(vector).sum();
}

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Raised when an evaluation would leave the validity box of a chart.
class ChartError : public Error {
 public:
  using Error::Error;
};

}  // namespace crdiff
