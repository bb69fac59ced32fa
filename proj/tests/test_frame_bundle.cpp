#include <gtest/gtest.h>

#include <cmath>
#include <numbers>

#include <Eigen/SVD>

#include "crdiff/frame_bundle.hpp"
#include "test_util.hpp"

using namespace crdiff;
using crdiff::testing::random_points;
using crdiff::testing::random_unitary;

namespace {

CVectorN e1(int n) {
  CVectorN v = CVectorN::Zero(n);
  v[0] = 1.0;
  return v;
}

ChartCurve helix(double radius, double climb) {
  ChartCurve c;
  c.position = [=](double s) {
    return ChartPoint{{radius * std::cos(2 * std::numbers::pi * s), radius * std::sin(2 * std::numbers::pi * s), climb * s}};
  };
  c.velocity = [=](double s) {
    const double w = 2 * std::numbers::pi;
    return ChartPoint{{-radius * w * std::sin(w * s), radius * w * std::cos(w * s), climb}};
  };
  return c;
}

}  // namespace

TEST(HorizontalVelocity, OriginUnitDirection) {
  const auto m = heisenberg_model(1);
  const BundleVelocity v = horizontal_velocity(*m, FrameState::identity_at(ChartPoint::Zero(3), 1), e1(1));
  EXPECT_EQ(v.dx, (ChartPoint{{1.0, 0.0, 0.0}}));
  EXPECT_TRUE(v.de.isZero(0.0));
}

TEST(HorizontalVelocity, AtZEqualsI) {
  const auto m = heisenberg_model(1);
  const BundleVelocity v = horizontal_velocity(*m, FrameState::identity_at(ChartPoint{{0.0, 1.0, 0.0}}, 1), e1(1));
  EXPECT_EQ(v.dx, (ChartPoint{{1.0, 0.0, 2.0}}));
  EXPECT_TRUE(v.de.isZero(0.0));
}

TEST(HorizontalVelocity, ZeroDirectionGivesZero) {
  const auto m = gauge_rotated_model(heisenberg_model(2), phase_gauge(2, 0.5));
  const FrameState s{ChartPoint{{0.1, 0.2, -0.3, 0.4, 0.5}}, random_unitary(2, 1)};
  const BundleVelocity v = horizontal_velocity(*m, s, CVectorN::Zero(2));
  EXPECT_TRUE(v.dx.isZero(0.0));
  EXPECT_TRUE(v.de.isZero(0.0));
}

TEST(HorizontalVelocity, NoCharacteristicComponentAtZeroZ) {
  const auto m = heisenberg_model(2);
  const FrameState s{ChartPoint{{0.0, 0.0, 0.0, 0.0, 0.7}}, random_unitary(2, 4)};
  const CVectorN xi = (CVectorN(2) << Complex(0.3, -1.2), Complex(2.0, 0.5)).finished();
  EXPECT_EQ(horizontal_velocity(*m, s, xi).dx[4], 0.0);
}

TEST(HorizontalVelocity, ComplexSumIsReal) {
  const auto m = gauge_rotated_model(heisenberg_model(2), phase_gauge(2, 0.9));
  const FrameState s{ChartPoint{{0.4, -0.1, 0.2, 0.8, -0.6}}, random_unitary(2, 8)};
  const CVectorN xi = (CVectorN(2) << Complex(0.7, 0.1), Complex(-0.2, 0.9)).finished();
  const CVectorN w = s.e * xi;
  const CTangent zw = m->frame(s.x) * w;
  const CTangent sum = zw + zw.conjugate();
  EXPECT_LE(sum.imag().cwiseAbs().maxCoeff(), 1e-14);
  EXPECT_LT((sum.real() - horizontal_velocity(*m, s, xi).dx).cwiseAbs().maxCoeff(), 1e-14);
}

TEST(HorizontalVelocity, RejectsPointsOutsideChart) {
  const auto h = heisenberg_model(1);
  ModelFunctions f;
  f.frame = [h](const ChartPoint& x) { return h->frame(x); };
  f.characteristic = [h](const ChartPoint& x) { return h->characteristic(x); };
  f.theta = [h](const ChartPoint& x) { return h->theta(x); };
  f.bound = ChartBound{ChartPoint::Constant(3, -1.0), ChartPoint::Constant(3, 1.0)};
  const auto m = functional_model(f);
  EXPECT_THROW(horizontal_velocity(*m, FrameState::identity_at(ChartPoint::Constant(3, 2.0), 1), e1(1)), ChartError);
}

TEST(Reunitarize, UnitaryInputUnchanged) {
  for (int n = 1; n <= kMaxN; ++n) {
    const CMatrixN u = random_unitary(n, 10 + n);
    EXPECT_LE((reunitarize(u) - u).cwiseAbs().maxCoeff(), 1e-14);
  }
}

TEST(Reunitarize, RemovesPositiveScalar) {
  const CMatrixN e = 1.1 * CMatrixN::Identity(3, 3);
  EXPECT_LE((reunitarize(e) - CMatrixN::Identity(3, 3)).cwiseAbs().maxCoeff(), 1e-15);
}

TEST(Reunitarize, MatchesSvdPolarFactor) {
  CMatrixN nn(3, 3);
  nn << Complex(0, 1), 2, Complex(1, -1), 0, Complex(-1, 0.5), 3, Complex(0.2, 0), 0, Complex(1, 1);
  const CMatrixN e = CMatrixN::Identity(3, 3) + 1e-3 * nn;
  const CMatrixN q = reunitarize(e);
  Eigen::JacobiSVD<Eigen::MatrixXcd> svd(Eigen::MatrixXcd(e), Eigen::ComputeFullU | Eigen::ComputeFullV);
  const Eigen::MatrixXcd polar = svd.matrixU() * svd.matrixV().adjoint();
  EXPECT_LE(unitarity_defect(q), 1e-14);
  EXPECT_LE((q - CMatrixN(polar)).cwiseAbs().maxCoeff(), 1e-13);
  EXPECT_LE((q - e).norm(), 2e-3 * nn.norm());
  EXPECT_LE((q - e).cwiseAbs().maxCoeff(), 2e-3 * 3);
}

TEST(Reunitarize, Idempotent) {
  CMatrixN e(2, 2);
  e << Complex(1.2, 0.1), 0.3, Complex(-0.2, 0.4), 0.9;
  const CMatrixN q = reunitarize(e);
  EXPECT_LE((reunitarize(q) - q).cwiseAbs().maxCoeff(), 1e-15);
}

TEST(Reunitarize, SingularThrows) {
  EXPECT_THROW(reunitarize(CMatrixN::Zero(2, 2)), Error);
}

TEST(ParallelTransport, HeisenbergIsIdentity) {
  const auto m = heisenberg_model(2);
  ChartCurve c;
  c.position = [](double s) { return ChartPoint{{std::sin(s), s * s, std::cos(3 * s), -s, 2 * s}}; };
  const CVectorN v0 = (CVectorN(2) << Complex(0.6, 0.0), Complex(0.0, 0.8)).finished();
  EXPECT_LE((parallel_transport(*m, c, v0, 50) - v0).cwiseAbs().maxCoeff(), 1e-15);
}

TEST(ParallelTransport, ConstantCurveIsIdentity) {
  const auto m = gauge_rotated_model(heisenberg_model(1), phase_gauge(1, 2.0));
  ChartCurve c;
  c.position = [](double) { return ChartPoint{{0.3, 0.1, 0.5}}; };
  c.velocity = [](double) { return ChartPoint::Zero(3); };
  const CVectorN v0 = e1(1);
  EXPECT_LE((parallel_transport(*m, c, v0, 20) - v0).cwiseAbs().maxCoeff(), 1e-15);
}

TEST(ParallelTransport, GaugeLoopUnitaryAndSelfConvergent) {
  const auto m = gauge_rotated_model(heisenberg_model(1), phase_gauge(1, 1.5));
  const ChartCurve loop = helix(0.8, 0.0);
  const CMatrixN coarse = transport_matrix(*m, loop, 200);
  const CMatrixN fine = transport_matrix(*m, loop, 2000);
  EXPECT_LE(unitarity_defect(coarse), 1e-8);
  EXPECT_LE((coarse - fine).cwiseAbs().maxCoeff(), 1e-8);
}

TEST(ParallelTransport, GaugePhaseMatchesClosedForm) {
  // a parallel field c Z_1 has coefficient c exp(-i kappa t) on Z'_1
  const double kappa = 1.5, climb = 0.7;
  const auto m = gauge_rotated_model(heisenberg_model(1), phase_gauge(1, kappa));
  const CVectorN v0 = (CVectorN(1) << Complex(0.6, 0.8)).finished();
  const CVectorN v1 = parallel_transport(*m, helix(0.8, climb), v0, 400);
  EXPECT_LE(std::abs(v1[0] - v0[0] * std::polar(1.0, -kappa * climb)), 1e-9);
}

TEST(ParallelTransport, IsometryOnRandomCurves) {
  const auto m = gauge_rotated_model(heisenberg_model(2), phase_gauge(2, 1.1));
  const auto pts = random_points(5, 3, 1.0, 31);
  for (const auto& p : pts) {
    ChartCurve c;
    c.position = [p](double s) {
      ChartPoint x = p;
      for (int k = 0; k < 5; ++k) x[k] += std::sin((k + 1) * s) * 0.5;
      return x;
    };
    const CVectorN v0 = (CVectorN(2) << Complex(0.1, 0.2), Complex(-0.7, 0.3)).finished();
    EXPECT_NEAR(parallel_transport(*m, c, v0, 300).norm(), v0.norm(), 1e-8);
  }
}

TEST(FrameCoefficients, ReconstructsVector) {
  const auto m = gauge_rotated_model(heisenberg_model(2), phase_gauge(2, 0.4));
  const ChartPoint x{{0.2, -0.5, 1.0, 0.3, 0.1}};
  const CTangent v = (CTangent(5) << 1.0, -2.0, 0.5, 0.25, 3.0).finished();
  const DimVector<Complex> c = frame_coefficients(*m, x, v);
  CTangent back = CTangent::Zero(5);
  for (int a = 0; a < 5; ++a) back += c[a] * m->frame_field(x, FrameIndex{a});
  EXPECT_LE((back - v).cwiseAbs().maxCoeff(), 1e-13);
}
