#include "crdiff/frame_bundle.hpp"

namespace crdiff {

BundleVelocity horizontal_velocity(const FrameValues& z, const ChristoffelValue* gamma,
                                   const FrameState& s, const CVectorN& xi) {
  const int n = static_cast<int>(s.e.rows());
  const CVectorN w = s.e * xi;
  BundleVelocity v;
  const auto d = z.rows();
  v.dx.resize(d);
  for (Eigen::Index k = 0; k < d; ++k) {
    double acc = 0.0;
    for (int b = 0; b < n; ++b) acc += z(k, b).real() * w[b].real() - z(k, b).imag() * w[b].imag();
    v.dx[k] = 2.0 * acc;
  }
  if (gamma == nullptr) {
    v.de.setZero(n, n);
    return v;
  }
  // g(delta, gamma) accumulates sum_beta w_beta Gamma_{beta delta}^gamma + conj(w_beta) Gamma_{betabar delta}^gamma
  CMatrixN g = CMatrixN::Zero(n, n);
  for (int beta = 0; beta < n; ++beta) {
    g += w[beta] * gamma->gamma[1 + beta] + std::conj(w[beta]) * gamma->gamma[1 + n + beta];
  }
  v.de = -(g.transpose() * s.e);
  return v;
}

BundleVelocity horizontal_velocity(const CrModel& m, const FrameState& s, const CVectorN& xi) {
  if (!m.in_chart(s.x)) throw ChartError("horizontal_velocity: point outside chart");
  if (m.flat()) return horizontal_velocity(m.frame(s.x), nullptr, s, xi);
  const ChristoffelValue gamma = m.christoffel(s.x);
  return horizontal_velocity(m.frame(s.x), &gamma, s, xi);
}

DimVector<Complex> frame_coefficients(const CrModel& m, const ChartPoint& x, const CTangent& v) {
  const int n = m.n();
  const int d = m.dim();
  DimMatrix<Complex> basis(d, d);
  const FrameValues z = m.frame(x);
  basis.col(0) = m.characteristic(x);
  basis.middleCols(1, n) = z;
  basis.middleCols(1 + n, n) = z.conjugate();
  return basis.partialPivLu().solve(v);
}

namespace {

ChartPoint curve_velocity(const ChartCurve& c, double t) {
  if (c.velocity) return c.velocity(t);
  const double h = 1e-6 * std::max(1.0, std::abs(c.t1 - c.t0));
  return (c.position(t + h) - c.position(t - h)) / (2.0 * h);
}

CMatrixN connection_matrix(const CrModel& m, const ChartCurve& c, double t) {
  const int n = m.n();
  const ChartPoint p = c.position(t);
  if (!m.in_chart(p)) throw ChartError("parallel_transport: curve leaves chart");
  if (m.flat()) return CMatrixN::Zero(n, n);
  const DimVector<Complex> coeff = frame_coefficients(m, p, curve_velocity(c, t).cast<Complex>());
  const ChristoffelValue gamma = m.christoffel(p);
  CMatrixN k = CMatrixN::Zero(n, n);
  for (int a = 0; a < 2 * n + 1; ++a) k += coeff[a] * gamma.gamma[a];
  return k;
}

}  // namespace

CMatrixN transport_matrix(const CrModel& m, const ChartCurve& curve, int steps) {
  if (steps <= 0) throw std::invalid_argument("transport_matrix: steps must be positive");
  const int n = m.n();
  const double h = (curve.t1 - curve.t0) / steps;
  CMatrixN lam = CMatrixN::Identity(n, n);
  for (int i = 0; i < steps; ++i) {
    const double t = curve.t0 + i * h;
    const CMatrixN k_a = connection_matrix(m, curve, t);
    const CMatrixN k_b = connection_matrix(m, curve, t + 0.5 * h);
    const CMatrixN k_c = connection_matrix(m, curve, t + h);
    const CMatrixN r1 = -lam * k_a;
    const CMatrixN r2 = -(lam + 0.5 * h * r1) * k_b;
    const CMatrixN r3 = -(lam + 0.5 * h * r2) * k_b;
    const CMatrixN r4 = -(lam + h * r3) * k_c;
    lam += (h / 6.0) * (r1 + 2.0 * r2 + 2.0 * r3 + r4);
  }
  return lam;
}

CVectorN parallel_transport(const CrModel& m, const ChartCurve& curve, const CVectorN& v0,
                            int steps, double unitarity_tol) {
  const CMatrixN lam = transport_matrix(m, curve, steps);
  if (unitarity_defect(lam) > unitarity_tol)
    throw Error("parallel_transport: transport matrix drifted from U(n); increase steps");
  return lam.transpose() * v0;
}

}  // namespace crdiff
