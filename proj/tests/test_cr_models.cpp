#include <gtest/gtest.h>

#include <cmath>

#include "crdiff/cr_models.hpp"
#include "test_util.hpp"

using namespace crdiff;
using crdiff::testing::random_points;
using crdiff::testing::random_unitary;

namespace {

const Complex I(0.0, 1.0);

// 2x2 gauge mixing the frame fields: R(a u1) * diag(exp(i k t), exp(-i k v1)).
GaugeField mixing_gauge(double a, double k) {
  GaugeField g;
  auto value = [a, k](const ChartPoint& x) {
    const double c = std::cos(a * x[0]), s = std::sin(a * x[0]);
    CMatrixN r(2, 2);
    r << c, -s, s, c;
    CMatrixN d = CMatrixN::Zero(2, 2);
    d(0, 0) = std::polar(1.0, k * x[4]);
    d(1, 1) = std::polar(1.0, -k * x[1]);
    return CMatrixN(r * d);
  };
  g.value = value;
  g.derivative = [value](const ChartPoint& x) {
    GaugeDerivative d;
    const double h = 1e-6;
    for (Eigen::Index j = 0; j < x.size(); ++j) {
      ChartPoint xp = x, xm = x;
      xp[j] += h;
      xm[j] -= h;
      d[j] = (value(xp) - value(xm)) / (2.0 * h);
    }
    return d;
  };
  return g;
}

// Coefficients c with frame * c = v (least squares; v lies in the span).
CVectorN expand(const FrameValues& frame, const CTangent& v) {
  return Eigen::MatrixXcd(frame).colPivHouseholderQr().solve(Eigen::VectorXcd(v));
}

// Gamma'_{A beta}^gamma from nabla_{Z'_A} Z'_beta over a flat base, by finite
// differences of the base-frame coefficients of Z'_beta.
Complex covariant_oracle(const CrModel& base, const CrModel& rotated, const ChartPoint& x, FrameIndex a, int beta,
                         int gamma) {
  const double h = 1e-5;
  const CTangent dir = rotated.frame_field(x, a);
  auto coeffs = [&](const ChartPoint& y) { return expand(base.frame(y), rotated.frame(y).col(beta)); };
  CVectorN deriv = CVectorN::Zero(base.n());
  for (int k = 0; k < base.dim(); ++k) {
    ChartPoint xp = x, xm = x;
    xp[k] += h;
    xm[k] -= h;
    deriv += dir[k] * (coeffs(xp) - coeffs(xm)) / (2.0 * h);
  }
  const CTangent nabla = base.frame(x) * deriv;
  return expand(rotated.frame(x), nabla)[gamma];
}

}  // namespace

TEST(Heisenberg, FrameAtOrigin) {
  const auto m = heisenberg_model(1);
  const FrameValues z = m->frame(ChartPoint::Zero(3));
  EXPECT_EQ(z(0, 0), Complex(0.5, 0.0));
  EXPECT_EQ(z(1, 0), Complex(0.0, -0.5));
  EXPECT_EQ(z(2, 0), Complex(0.0, 0.0));
}

TEST(Heisenberg, FrameAwayFromOrigin) {
  // Z_1 = d/dz + i conj(z) d/dt at z = 1 + 2i: t-coefficient i (1 - 2i) = 2 + i
  const auto m = heisenberg_model(1);
  const FrameValues z = m->frame(ChartPoint{{1.0, 2.0, 0.3}});
  EXPECT_EQ(z(2, 0), Complex(2.0, 1.0));
}

TEST(Heisenberg, ChristoffelVanishes) {
  for (int n = 1; n <= kMaxN; ++n) {
    const auto m = heisenberg_model(n);
    for (const auto& x : random_points(m->dim(), 5, 3.0, n)) EXPECT_TRUE(m->christoffel(x).is_zero());
  }
}

TEST(Heisenberg, ThetaOfTIsOne) {
  const auto m = heisenberg_model(1);
  const ChartPoint o = ChartPoint::Zero(3);
  EXPECT_EQ(pairing(m->theta(o), m->characteristic(o)), Complex(1.0, 0.0));
}

TEST(Heisenberg, RejectsBadDimension) {
  EXPECT_THROW(heisenberg_model(0), std::invalid_argument);
  EXPECT_THROW(heisenberg_model(-2), std::invalid_argument);
  EXPECT_THROW(heisenberg_model(kMaxN + 1), std::invalid_argument);
}

TEST(Heisenberg, VolumeDensityIsConstant) {
  const auto m = heisenberg_model(2);
  EXPECT_DOUBLE_EQ(m->volume_density(ChartPoint::Zero(5)), 4.0);
  EXPECT_DOUBLE_EQ(m->volume_density(ChartPoint::Constant(5, 1.7)), 4.0);
}

TEST(Heisenberg, AnalyticFrameJacobianMatchesDifferences) {
  const auto m = heisenberg_model(2);
  const ChartPoint x{{0.3, -0.2, 1.1, 0.4, 0.7}};
  for (int a = 0; a < 2; ++a) {
    const CJacobian j = *m->frame_jacobian(x, a);
    for (int k = 0; k < 5; ++k) {
      ChartPoint xp = x, xm = x;
      xp[k] += 1e-6;
      xm[k] -= 1e-6;
      const CTangent fd = (m->frame(xp).col(a) - m->frame(xm).col(a)) / 2e-6;
      EXPECT_LT((j.col(k) - fd).cwiseAbs().maxCoeff(), 1e-9);
    }
  }
}

TEST(Models, ConjugationSymmetry) {
  const std::vector<ModelPtr> models = {heisenberg_model(2), gauge_rotated_model(heisenberg_model(2), phase_gauge(2, 0.7))};
  for (const auto& m : models)
    for (const auto& x : random_points(m->dim(), 5, 2.0, 9))
      for (int a = 0; a < m->n(); ++a)
        EXPECT_EQ(m->frame_field(x, FrameIndex::antiholomorphic(a, m->n())),
                  CTangent(m->frame_field(x, FrameIndex::holomorphic(a)).conjugate()));
}

TEST(Gauge, IdentityReproducesBase) {
  const auto base = heisenberg_model(2);
  const auto m = gauge_rotated_model(base, constant_gauge(CMatrixN::Identity(2, 2)));
  for (const auto& x : random_points(5, 5, 2.0, 4)) {
    EXPECT_LT((m->frame(x) - base->frame(x)).cwiseAbs().maxCoeff(), 1e-15);
    EXPECT_LT((m->theta(x) - base->theta(x)).cwiseAbs().maxCoeff(), 1e-15);
    EXPECT_LT((m->characteristic(x) - base->characteristic(x)).cwiseAbs().maxCoeff(), 1e-15);
    EXPECT_TRUE(m->christoffel(x).is_zero());
  }
}

TEST(Gauge, ConstantUnitaryKeepsChristoffelZero) {
  const auto m = gauge_rotated_model(heisenberg_model(1), constant_gauge(random_unitary(1, 3)));
  for (const auto& x : random_points(3, 5, 2.0, 5)) {
    const ChristoffelValue g = m->christoffel(x);
    for (int a = 0; a < 3; ++a) EXPECT_LT(g.gamma[a].cwiseAbs().maxCoeff(), 1e-15);
  }
}

TEST(Gauge, PhaseGaugeChristoffelClosedForm) {
  // Lambda = exp(i kappa t): Gamma'_{A1}^1 = i kappa Z'_A(t)
  const double kappa = 0.8;
  const auto m = gauge_rotated_model(heisenberg_model(1), phase_gauge(1, kappa));
  const ChartPoint x{{0.4, -0.3, 0.9}};
  const ChristoffelValue g = m->christoffel(x);
  for (int a = 0; a < 3; ++a) {
    const Complex expected = I * kappa * m->frame_field(x, FrameIndex{a})[2];
    EXPECT_LT(std::abs(g.gamma[a](0, 0) - expected), 1e-14) << "A=" << a;
  }
  EXPECT_GT(std::abs(g.gamma[1](0, 0)), 0.1);
}

TEST(Gauge, ChristoffelMatchesFiniteDifferenceCovariantDerivative) {
  const auto base1 = heisenberg_model(1);
  const auto phase = gauge_rotated_model(base1, phase_gauge(1, 1.3));
  const auto base2 = heisenberg_model(2);
  const auto mixing = gauge_rotated_model(base2, mixing_gauge(0.9, 0.6));
  struct Case {
    ModelPtr base, rotated;
  };
  for (const Case& c : {Case{base1, phase}, Case{base2, mixing}}) {
    const int n = c.base->n();
    for (const auto& x : random_points(c.base->dim(), 3, 1.0, 21)) {
      const ChristoffelValue g = c.rotated->christoffel(x);
      for (int a = 0; a < 2 * n + 1; ++a)
        for (int beta = 0; beta < n; ++beta)
          for (int gam = 0; gam < n; ++gam)
            EXPECT_NEAR(std::abs(g.gamma[a](beta, gam) - covariant_oracle(*c.base, *c.rotated, x, FrameIndex{a}, beta, gam)),
                        0.0, 1e-7)
                << c.rotated->name() << " A=" << a << " beta=" << beta << " gamma=" << gam;
    }
  }
}

TEST(Gauge, RejectsNonUnitary) {
  GaugeField g = constant_gauge(CMatrixN::Identity(1, 1) * 1.01);
  const auto m = gauge_rotated_model(heisenberg_model(1), g);
  EXPECT_THROW(m->frame(ChartPoint::Zero(3)), Error);
}

TEST(Validate, HeisenbergResidualsAndLeviMultipleOfIdentity) {
  for (int n = 1; n <= 2; ++n) {
    const auto m = heisenberg_model(n);
    const auto pts = random_points(m->dim(), 10, 2.0, 100 + n);
    const ValidationReport r = validate_model(*m, pts);
    EXPECT_EQ(r.n_points, 10u);
    EXPECT_LE(r.theta_frame_residual, 1e-10);
    EXPECT_LE(r.theta_t_residual, 1e-10);
    EXPECT_LE(r.antisymmetry_residual, 1e-12);
    EXPECT_LE(r.dtheta_t_residual, 1e-10);
    EXPECT_TRUE(r.ok());
    EXPECT_GT(r.levi_min_eigenvalue, 0.0);
    EXPECT_NEAR(r.levi_max_eigenvalue / r.levi_min_eigenvalue, 1.0, 1e-8);
    const CMatrixN g = levi_gram(*m, pts[0]);
    const Complex c = g(0, 0);
    EXPECT_LT((g - c * CMatrixN::Identity(n, n)).cwiseAbs().maxCoeff(), 1e-8);
  }
}

TEST(Validate, ThetaTResidualAtOriginIsZero) {
  const auto r = validate_model(*heisenberg_model(1), {ChartPoint::Zero(3)});
  EXPECT_EQ(r.theta_t_residual, 0.0);
}

TEST(Validate, BrokenAntisymmetryIsReported) {
  const auto h = heisenberg_model(1);
  ModelFunctions f;
  f.n = 1;
  f.frame = [h](const ChartPoint& x) { return h->frame(x); };
  f.characteristic = [h](const ChartPoint& x) { return h->characteristic(x); };
  f.theta = [h](const ChartPoint& x) { return h->theta(x); };
  f.christoffel = [](const ChartPoint&) {
    ChristoffelValue g = ChristoffelValue::zero(1);
    g.gamma[1](0, 0) = 1.0;
    return g;
  };
  const auto r = validate_model(*functional_model(f), {ChartPoint::Zero(3), ChartPoint::Ones(3)});
  EXPECT_DOUBLE_EQ(r.antisymmetry_residual, 1.0);
  EXPECT_FALSE(r.antisymmetry_ok());
  EXPECT_FALSE(r.ok());
}

TEST(Validate, AllBuiltInModelsPass) {
  std::vector<ModelPtr> models;
  for (int n = 1; n <= kMaxN; ++n) models.push_back(heisenberg_model(n));
  for (int n = 1; n <= 2; ++n) {
    models.push_back(gauge_rotated_model(heisenberg_model(n), phase_gauge(n, 1.0)));
    models.push_back(gauge_rotated_model(heisenberg_model(n), constant_gauge(random_unitary(n, 77))));
  }
  for (const auto& m : models) {
    const auto r = validate_model(*m, random_points(m->dim(), 10, 2.0, 5));
    EXPECT_TRUE(r.ok()) << m->name() << " n=" << m->n();
    EXPECT_GT(r.levi_min_eigenvalue, 0.0);
    EXPECT_TRUE(std::isfinite(r.levi_condition));
  }
}
