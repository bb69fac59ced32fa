#include "crdiff/cr_models.hpp"

#include <cmath>

namespace crdiff {

std::string frame_label(FrameIndex a, int n) {
  if (a.is_characteristic()) return "T";
  const std::string base = std::to_string(a.alpha(n) + 1);
  return a.is_barred(n) ? base + "bar" : base;
}

ChristoffelValue ChristoffelValue::zero(int n) {
  ChristoffelValue g;
  g.n = n;
  for (int a = 0; a < 2 * n + 1; ++a) g.gamma[a] = CMatrixN::Zero(n, n);
  return g;
}

bool ChristoffelValue::is_zero() const {
  for (int a = 0; a < 2 * n + 1; ++a)
    if (!gamma[a].isZero(0.0)) return false;
  return true;
}

bool ChartBound::contains(const ChartPoint& x) const {
  return (x.array() >= lower.array()).all() && (x.array() <= upper.array()).all();
}

std::vector<std::string> CrModel::coordinate_names() const {
  std::vector<std::string> names;
  for (int a = 1; a <= n_; ++a) {
    names.push_back("u" + std::to_string(a));
    names.push_back("v" + std::to_string(a));
  }
  names.emplace_back("t");
  return names;
}

CTangent CrModel::frame_field(const ChartPoint& x, FrameIndex a) const {
  if (a.is_characteristic()) return characteristic(x);
  const FrameValues z = frame(x);
  const int alpha = a.alpha(n_);
  if (a.is_barred(n_)) return z.col(alpha).conjugate();
  return z.col(alpha);
}

namespace {

class HeisenbergModel final : public CrModel {
 public:
  explicit HeisenbergModel(int n) : CrModel(n, "heisenberg") {}

  FrameValues frame(const ChartPoint& x) const override {
    const int n = this->n();
    FrameValues z = FrameValues::Zero(dim(), n);
    for (int a = 0; a < n; ++a) {
      const double u = x[2 * a];
      const double v = x[2 * a + 1];
      z(2 * a, a) = Complex(0.5, 0.0);
      z(2 * a + 1, a) = Complex(0.0, -0.5);
      // i * conj(z) = v + i u
      z(2 * n, a) = Complex(v, u);
    }
    return z;
  }

  CTangent characteristic(const ChartPoint&) const override {
    CTangent t = CTangent::Zero(dim());
    t[dim() - 1] = 2.0;
    return t;
  }

  CCovector theta(const ChartPoint& x) const override {
    // (dt - i sum(conj(z) dz - z d conj(z))) / 2 = dt/2 + sum(u dv - v du)
    CCovector th = CCovector::Zero(dim());
    for (int a = 0; a < n(); ++a) {
      th[2 * a] = -x[2 * a + 1];
      th[2 * a + 1] = x[2 * a];
    }
    th[dim() - 1] = 0.5;
    return th;
  }

  ChristoffelValue christoffel(const ChartPoint&) const override { return ChristoffelValue::zero(n()); }

  double volume_density(const ChartPoint&) const override {
    // theta ^ (d theta)^n with d theta = 2 sum du ^ dv
    double factorial = 1.0;
    for (int k = 2; k <= n(); ++k) factorial *= k;
    return std::ldexp(factorial, n() - 1);
  }

  std::optional<CJacobian> frame_jacobian(const ChartPoint&, int alpha) const override {
    CJacobian j = CJacobian::Zero(dim(), dim());
    j(dim() - 1, 2 * alpha) = Complex(0.0, 1.0);
    j(dim() - 1, 2 * alpha + 1) = Complex(1.0, 0.0);
    return j;
  }

  bool flat() const override { return true; }
};

class GaugeRotatedModel final : public CrModel {
 public:
  GaugeRotatedModel(ModelPtr base, GaugeField gauge, std::string name)
      : CrModel(base->n(), std::move(name)), base_(std::move(base)), gauge_(std::move(gauge)) {
    set_chart_bound(base_->chart_bound());
  }

  FrameValues frame(const ChartPoint& x) const override {
    return base_->frame(x) * lambda(x).transpose();
  }

  CTangent characteristic(const ChartPoint& x) const override { return base_->characteristic(x); }
  CCovector theta(const ChartPoint& x) const override { return base_->theta(x); }
  double volume_density(const ChartPoint& x) const override { return base_->volume_density(x); }

  ChristoffelValue christoffel(const ChartPoint& x) const override {
    const int n = this->n();
    const CMatrixN m = lambda(x);
    const GaugeDerivative dm = gauge_.derivative(x);
    const bool flat_base = base_->flat();
    const ChristoffelValue base = flat_base ? ChristoffelValue{} : base_->christoffel(x);
    const FrameValues zp = base_->frame(x) * m.transpose();
    const CMatrixN m_adj = m.adjoint();

    auto along = [&](const CTangent& v) {
      CMatrixN d = CMatrixN::Zero(n, n);
      for (int k = 0; k < dim(); ++k) d += v[k] * dm[k];
      return d;
    };

    ChristoffelValue out;
    out.n = n;
    // A = T
    {
      const CTangent t = base_->characteristic(x);
      out.gamma[0] = flat_base ? CMatrixN(along(t) * m_adj) : CMatrixN((along(t) + m * base.gamma[0]) * m_adj);
    }
    if (flat_base) {
      for (int a = 0; a < n; ++a) {
        const CTangent za = zp.col(a);
        out.gamma[1 + a] = along(za) * m_adj;
        out.gamma[1 + n + a] = along(za.conjugate()) * m_adj;
      }
      return out;
    }
    for (int a = 0; a < n; ++a) {
      CMatrixN mixed = CMatrixN::Zero(n, n);
      CMatrixN mixed_bar = CMatrixN::Zero(n, n);
      for (int mu = 0; mu < n; ++mu) {
        mixed += m(a, mu) * base.gamma[1 + mu];
        mixed_bar += std::conj(m(a, mu)) * base.gamma[1 + n + mu];
      }
      const CTangent za = zp.col(a);
      out.gamma[1 + a] = (along(za) + m * mixed) * m_adj;
      out.gamma[1 + n + a] = (along(za.conjugate()) + m * mixed_bar) * m_adj;
    }
    return out;
  }

  std::optional<CJacobian> frame_jacobian(const ChartPoint& x, int alpha) const override {
    const int n = this->n();
    const CMatrixN m = lambda(x);
    const GaugeDerivative dm = gauge_.derivative(x);
    const FrameValues z = base_->frame(x);
    CJacobian j = CJacobian::Zero(dim(), dim());
    for (int beta = 0; beta < n; ++beta) {
      const auto jb = base_->frame_jacobian(x, beta);
      if (!jb) return std::nullopt;
      j += m(alpha, beta) * *jb;
      for (int k = 0; k < dim(); ++k) j.col(k) += dm[k](alpha, beta) * z.col(beta);
    }
    return j;
  }

 private:
  CMatrixN lambda(const ChartPoint& x) const {
    CMatrixN m = gauge_.value(x);
    const double defect =
        (m * m.adjoint() - CMatrixN::Identity(n(), n())).cwiseAbs().maxCoeff();
    if (defect > 1e-12) throw Error("gauge_rotated_model: Lambda(x) is not unitary");
    return m;
  }

  ModelPtr base_;
  GaugeField gauge_;
};

class FunctionalModel final : public CrModel {
 public:
  explicit FunctionalModel(ModelFunctions fns) : CrModel(fns.n, fns.name), f_(std::move(fns)) {
    set_chart_bound(f_.bound);
  }

  FrameValues frame(const ChartPoint& x) const override { return f_.frame(x); }
  CTangent characteristic(const ChartPoint& x) const override { return f_.characteristic(x); }
  CCovector theta(const ChartPoint& x) const override { return f_.theta(x); }
  ChristoffelValue christoffel(const ChartPoint& x) const override {
    return f_.christoffel ? f_.christoffel(x) : ChristoffelValue::zero(n());
  }
  double volume_density(const ChartPoint& x) const override {
    return f_.volume_density ? f_.volume_density(x) : 1.0;
  }
  std::optional<CJacobian> frame_jacobian(const ChartPoint& x, int alpha) const override {
    return f_.frame_jacobian ? f_.frame_jacobian(x, alpha) : std::nullopt;
  }
  bool flat() const override { return !f_.christoffel; }

 private:
  ModelFunctions f_;
};

}  // namespace

ModelPtr heisenberg_model(int n) {
  if (n <= 0) throw std::invalid_argument("heisenberg_model: n must be positive");
  if (n > kMaxN) throw std::invalid_argument("heisenberg_model: n exceeds kMaxN");
  return std::make_shared<HeisenbergModel>(n);
}

ModelPtr gauge_rotated_model(ModelPtr base, GaugeField gauge, std::string name) {
  if (!base) throw std::invalid_argument("gauge_rotated_model: null base");
  if (name.empty()) name = base->name() + "+gauge";
  return std::make_shared<GaugeRotatedModel>(std::move(base), std::move(gauge), std::move(name));
}

GaugeField phase_gauge(int n, double kappa) {
  GaugeField g;
  g.value = [n, kappa](const ChartPoint& x) {
    const Complex phase = std::polar(1.0, kappa * x[2 * n]);
    CMatrixN m = CMatrixN::Zero(n, n);
    m.diagonal().setConstant(phase);
    return m;
  };
  g.derivative = [n, kappa](const ChartPoint& x) {
    GaugeDerivative d;
    for (int k = 0; k < 2 * n + 1; ++k) d[k] = CMatrixN::Zero(n, n);
    const Complex phase = std::polar(1.0, kappa * x[2 * n]);
    d[2 * n].diagonal().setConstant(Complex(0.0, kappa) * phase);
    return d;
  };
  return g;
}

GaugeField constant_gauge(const CMatrixN& lambda) {
  GaugeField g;
  g.value = [lambda](const ChartPoint&) { return lambda; };
  g.derivative = [lambda](const ChartPoint& x) {
    GaugeDerivative d;
    for (Eigen::Index k = 0; k < x.size(); ++k) d[k] = CMatrixN::Zero(lambda.rows(), lambda.cols());
    return d;
  };
  return g;
}

ModelPtr functional_model(ModelFunctions fns) {
  if (fns.n <= 0 || fns.n > kMaxN) throw std::invalid_argument("functional_model: bad n");
  if (!fns.frame || !fns.characteristic || !fns.theta)
    throw std::invalid_argument("functional_model: frame, characteristic and theta are required");
  return std::make_shared<FunctionalModel>(std::move(fns));
}

DimMatrix<double> dtheta_matrix(const CrModel& m, const ChartPoint& x, double h) {
  const int d = m.dim();
  // partial(j, k) = d theta_k / d x^j
  DimMatrix<double> partial(d, d);
  for (int j = 0; j < d; ++j) {
    ChartPoint xp = x, xm = x;
    xp[j] += h;
    xm[j] -= h;
    partial.row(j) = ((m.theta(xp) - m.theta(xm)).real() / (2.0 * h)).transpose();
  }
  return 0.5 * (partial - partial.transpose());
}

CMatrixN levi_gram(const CrModel& m, const ChartPoint& x, double h) {
  const DimMatrix<Complex> dth = dtheta_matrix(m, x, h).cast<Complex>();
  const FrameValues z = m.frame(x);
  return Complex(0.0, -1.0) * (z.transpose() * dth * z.conjugate());
}

ValidationReport validate_model(const CrModel& m, const std::vector<ChartPoint>& points,
                                ValidationTolerances tol) {
  ValidationReport r;
  r.tolerances = tol;
  r.n_points = points.size();
  r.levi_min_eigenvalue = points.empty() ? 0.0 : std::numeric_limits<double>::infinity();
  const int n = m.n();
  for (const ChartPoint& x : points) {
    const FrameValues z = m.frame(x);
    const CCovector th = m.theta(x);
    const CTangent t = m.characteristic(x);
    for (int a = 0; a < n; ++a)
      r.theta_frame_residual = std::max(r.theta_frame_residual, std::abs(pairing(th, z.col(a))));
    r.theta_t_residual = std::max(r.theta_t_residual, std::abs(pairing(th, t) - 1.0));

    const ChristoffelValue g = m.christoffel(x);
    for (int a = 0; a < 2 * n + 1; ++a) {
      const FrameIndex ai{a};
      for (int beta = 0; beta < n; ++beta)
        for (int gam = 0; gam < n; ++gam) {
          const Complex res = g[ai](beta, gam) + g.barred(ai, gam, beta);
          r.antisymmetry_residual = std::max(r.antisymmetry_residual, std::abs(res));
        }
    }

    const DimMatrix<double> dth = dtheta_matrix(m, x, tol.fd_step);
    const DimVector<Complex> t_contract = t.transpose() * dth.cast<Complex>();
    r.dtheta_t_residual = std::max(r.dtheta_t_residual, t_contract.cwiseAbs().maxCoeff());

    const CMatrixN levi = levi_gram(m, x, tol.fd_step);
    r.levi_hermitian_residual =
        std::max(r.levi_hermitian_residual, (levi - levi.adjoint()).cwiseAbs().maxCoeff());
    Eigen::SelfAdjointEigenSolver<CMatrixN> es(0.5 * (levi + levi.adjoint()), Eigen::EigenvaluesOnly);
    const auto& ev = es.eigenvalues();
    r.levi_min_eigenvalue = std::min(r.levi_min_eigenvalue, ev.minCoeff());
    r.levi_max_eigenvalue = std::max(r.levi_max_eigenvalue, ev.maxCoeff());
    const double cond = ev.minCoeff() > 0.0 ? ev.maxCoeff() / ev.minCoeff()
                                            : std::numeric_limits<double>::infinity();
    r.levi_condition = std::max(r.levi_condition, cond);
  }
  return r;
}

}  // namespace crdiff
