#pragma once

#include <functional>

#include "crdiff/cr_models.hpp"

namespace crdiff {

/// A point of the unitary frame bundle U(T_{1,0}) in local coordinates.
/// e(beta, alpha) = e_alpha^beta, i.e. r(e_alpha) = sum_beta e(beta, alpha) Z_beta,
/// so frame coefficients of r(xi) are e * xi.
struct FrameState {
  ChartPoint x;
  CMatrixN e;

  static FrameState identity_at(const ChartPoint& x, int n) {
    return {x, CMatrixN::Identity(n, n)};
  }
};

struct BundleVelocity {
  ChartPoint dx;
  CMatrixN de;
};

/// ||e^* e - I||_inf (max abs entry).
template <typename Derived>
double unitarity_defect(const Eigen::MatrixBase<Derived>& e) {
  using Plain = typename Derived::PlainObject;
  return (e.adjoint() * e - Plain::Identity(e.rows(), e.cols())).cwiseAbs().maxCoeff();
}

/// Unitary polar factor of a nonsingular matrix: Newton-Schulz near U(n),
/// otherwise the scaled Newton iteration X <- (X + X^{-*}) / 2. Returns the
/// input untouched when it is already unitary to a few ulps.
template <typename Derived>
typename Derived::PlainObject reunitarize(const Eigen::MatrixBase<Derived>& e) {
  using Plain = typename Derived::PlainObject;
  using Real = typename Eigen::NumTraits<typename Derived::Scalar>::Real;
  constexpr Real kEps = Eigen::NumTraits<Real>::epsilon();
  Plain x = e;
  const Plain id = Plain::Identity(x.rows(), x.cols());
  Plain gram = x.adjoint() * x - id;
  if (gram.cwiseAbs2().maxCoeff() <= 16 * kEps * kEps) return x;
  if (gram.norm() < Real(0.1)) {
    // close to U(n): inverse-free Newton-Schulz, X <- X (3I - X^* X) / 2
    for (int iter = 0; iter < 20; ++iter) {
      const Plain next = x * (id - Real(0.5) * gram);
      const Real change = (next - x).cwiseAbs().maxCoeff();
      x = next;
      if (change <= 4 * kEps) break;
      gram = x.adjoint() * x - id;
    }
    return x;
  }
  for (int iter = 0; iter < 100; ++iter) {
    Eigen::FullPivLU<Plain> lu(x);
    if (!lu.isInvertible()) throw Error("reunitarize: singular matrix");
    const Plain inv_adj = lu.inverse().adjoint();
    Plain next;
    if (iter < 6) {
      // Frobenius-norm scaling accelerates the first iterations.
      const Real g = std::sqrt(inv_adj.norm() / x.norm());
      next = Real(0.5) * (g * x + inv_adj / g);
    } else {
      next = Real(0.5) * (x + inv_adj);
    }
    const Real change = (next - x).cwiseAbs().maxCoeff();
    x = std::move(next);
    if (change <= 16 * kEps) break;
  }
  return x;
}

/// Real bundle velocity of sum_alpha (L_alpha xi^alpha + L_alphabar conj(xi^alpha)):
///   dx = 2 Re[sum e_alpha^beta xi^alpha Z_beta(x)],
///   de_eps^gamma = -sum (xi^alpha Gamma_{beta delta}^gamma e_eps^delta e_alpha^beta
///                        + conj(xi^alpha) Gamma_{betabar delta}^gamma e_eps^delta conj(e_alpha^beta)).
/// Throws ChartError when x lies outside the model's chart.
BundleVelocity horizontal_velocity(const CrModel& m, const FrameState& s, const CVectorN& xi);

/// Same as horizontal_velocity but with caller-supplied frame values and
/// Christoffel symbols at s.x (lets the integrator reuse evaluations).
BundleVelocity horizontal_velocity(const FrameValues& z, const ChristoffelValue* gamma,
                                   const FrameState& s, const CVectorN& xi);

/// Smooth curve on the chart, parametrized on [t0, t1].
struct ChartCurve {
  std::function<ChartPoint(double)> position;
  /// Optional; central differences of `position` are used when empty.
  std::function<ChartPoint(double)> velocity;
  double t0 = 0.0;
  double t1 = 1.0;
};

/// Coefficients c_A of v = sum_A c_A Z_A on the frame {T, Z_alpha, Z_alphabar}.
DimVector<Complex> frame_coefficients(const CrModel& m, const ChartPoint& x, const CTangent& v);

/// Lambda_p(t1) for the transport equation
///   dLambda/dt = -Lambda K(t),  K(delta, gamma) = sum_A g(pdot, Z_Abar) Gamma_{A delta}^gamma,
/// integrated by classical RK4 with `steps` fixed steps from Lambda(t0) = I.
CMatrixN transport_matrix(const CrModel& m, const ChartCurve& curve, int steps);

/// Frame coefficients at curve(t1) of the parallel section starting from the
/// frame coefficients v0 at curve(t0). Throws if the computed Lambda_p is not
/// unitary to `unitarity_tol` (refine `steps`).
CVectorN parallel_transport(const CrModel& m, const ChartCurve& curve, const CVectorN& v0,
                            int steps, double unitarity_tol = 1e-8);

}  // namespace crdiff
