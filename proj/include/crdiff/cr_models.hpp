#pragma once

#include <array>
#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "crdiff/types.hpp"

namespace crdiff {

/// Index into the complex frame {T, Z_1..Z_n, Z_1bar..Z_nbar}.
/// 0 is T, 1..n are Z_alpha, n+1..2n are the conjugates.
struct FrameIndex {
  int value = 0;

  static FrameIndex characteristic() { return {0}; }
  static FrameIndex holomorphic(int alpha) { return {alpha + 1}; }       // alpha is 0-based
  static FrameIndex antiholomorphic(int alpha, int n) { return {n + alpha + 1}; }

  bool is_characteristic() const { return value == 0; }
  bool is_barred(int n) const { return value > n; }
  int alpha(int n) const { return is_barred(n) ? value - n - 1 : value - 1; }
  FrameIndex conjugate(int n) const {
    if (value == 0) return *this;
    return is_barred(n) ? FrameIndex{value - n} : FrameIndex{value + n};
  }
  friend bool operator==(FrameIndex, FrameIndex) = default;
};

/// Human-readable label: "T", "1", "2bar", ...
std::string frame_label(FrameIndex a, int n);

/// Christoffel symbols Gamma_{A beta}^{gamma} of the connection in the frame.
/// gamma[A](beta, gamma) for A over {T, Z_alpha, Z_alphabar}. Entries with
/// barred lower/upper pairs follow from reality of the connection:
/// Gamma_{A betabar}^{gammabar} = conj(Gamma_{Abar beta}^{gamma}).
struct ChristoffelValue {
  int n = 0;
  std::array<CMatrixN, kMaxDim> gamma{};

  static ChristoffelValue zero(int n);
  const CMatrixN& operator[](FrameIndex a) const { return gamma[a.value]; }
  CMatrixN& operator[](FrameIndex a) { return gamma[a.value]; }
  /// Gamma_{A betabar}^{gammabar}.
  Complex barred(FrameIndex a, int beta, int gamma_) const {
    return std::conj(gamma[a.conjugate(n).value](beta, gamma_));
  }
  bool is_zero() const;
};

/// Axis-aligned box outside of which a chart is not valid.
struct ChartBound {
  ChartPoint lower;
  ChartPoint upper;
  bool contains(const ChartPoint& x) const;
};

/// A chart-local strictly pseudoconvex CR manifold with a chosen orthonormal
/// frame, contact form and Tanaka-Webster Christoffel symbols.
///
/// Implementations must be pure functions of their inputs; a model is shared
/// read-only between worker threads.
class CrModel {
 public:
  explicit CrModel(int n, std::string name) : n_(n), name_(std::move(name)) {}
  virtual ~CrModel() = default;

  int n() const { return n_; }
  int dim() const { return 2 * n_ + 1; }
  const std::string& name() const { return name_; }

  /// Column alpha is Z_alpha at x.
  virtual FrameValues frame(const ChartPoint& x) const = 0;
  /// Characteristic field T at x (real vector stored as complex).
  virtual CTangent characteristic(const ChartPoint& x) const = 0;
  /// Chart components of theta at x.
  virtual CCovector theta(const ChartPoint& x) const = 0;
  virtual ChristoffelValue christoffel(const ChartPoint& x) const = 0;
  /// Density of theta ^ (d theta)^n with respect to Lebesgue measure.
  virtual double volume_density(const ChartPoint& x) const = 0;
  /// Coordinate derivatives of Z_alpha's coefficients, if known analytically.
  virtual std::optional<CJacobian> frame_jacobian(const ChartPoint& /*x*/, int /*alpha*/) const {
    return std::nullopt;
  }
  /// True when every Christoffel symbol vanishes identically.
  virtual bool flat() const { return false; }
  const std::optional<ChartBound>& chart_bound() const { return bound_; }
  /// Coordinate names for output headers.
  virtual std::vector<std::string> coordinate_names() const;

  /// Z_A at x for any frame index, including T and conjugates.
  CTangent frame_field(const ChartPoint& x, FrameIndex a) const;
  bool in_chart(const ChartPoint& x) const { return !bound_ || bound_->contains(x); }

 protected:
  void set_chart_bound(std::optional<ChartBound> b) { bound_ = std::move(b); }

 private:
  int n_;
  std::string name_;
  std::optional<ChartBound> bound_;
};

using ModelPtr = std::shared_ptr<const CrModel>;

/// Heisenberg group H_n: Z_alpha = d/dz^alpha + i conj(z^alpha) d/dt, flat
/// connection, theta = (dt - i sum(conj(z) dz - z d conj(z))) / 2, T = 2 d/dt.
ModelPtr heisenberg_model(int n);

/// d Lambda / dx^k for k = 0..dim-1.
using GaugeDerivative = std::array<CMatrixN, kMaxDim>;

/// Unitary-valued frame rotation x -> Lambda(x) and its coordinate derivatives.
struct GaugeField {
  std::function<CMatrixN(const ChartPoint&)> value;
  std::function<GaugeDerivative(const ChartPoint&)> derivative;
};

/// Same CR structure and connection as `base`, expressed in the rotated frame
/// Z'_alpha = sum_beta Lambda_alpha^beta Z_beta. Throws if Lambda is not
/// unitary (to 1e-12) at a point where the model is evaluated.
ModelPtr gauge_rotated_model(ModelPtr base, GaugeField gauge, std::string name = {});

/// Lambda(x) = diag(exp(i kappa t)) where t is the last chart coordinate.
GaugeField phase_gauge(int n, double kappa);
/// Constant unitary gauge.
GaugeField constant_gauge(const CMatrixN& lambda);

/// Model assembled from callables. Used for custom and test models.
struct ModelFunctions {
  int n = 1;
  std::string name = "custom";
  std::function<FrameValues(const ChartPoint&)> frame;
  std::function<CTangent(const ChartPoint&)> characteristic;
  std::function<CCovector(const ChartPoint&)> theta;
  std::function<ChristoffelValue(const ChartPoint&)> christoffel;
  std::function<double(const ChartPoint&)> volume_density;
  std::function<std::optional<CJacobian>(const ChartPoint&, int)> frame_jacobian;
  std::optional<ChartBound> bound;
};

ModelPtr functional_model(ModelFunctions fns);

struct ValidationTolerances {
  double theta_frame = 1e-10;
  double theta_t = 1e-10;
  double antisymmetry = 1e-12;
  double dtheta_t = 1e-10;
  double fd_step = 1e-5;
};

struct ValidationReport {
  std::size_t n_points = 0;
  double theta_frame_residual = 0.0;   // max |theta(Z_alpha)|
  double theta_t_residual = 0.0;       // max |theta(T) - 1|
  double antisymmetry_residual = 0.0;  // max |Gamma_{A beta}^gamma + Gamma_{A gammabar}^{betabar}|
  double dtheta_t_residual = 0.0;      // max |d theta(T, .)|
  double levi_hermitian_residual = 0.0;
  double levi_min_eigenvalue = 0.0;    // minimum over points
  double levi_max_eigenvalue = 0.0;    // maximum over points
  double levi_condition = 0.0;         // worst condition number over points
  ValidationTolerances tolerances;

  bool theta_frame_ok() const { return theta_frame_residual <= tolerances.theta_frame; }
  bool theta_t_ok() const { return theta_t_residual <= tolerances.theta_t; }
  bool antisymmetry_ok() const { return antisymmetry_residual <= tolerances.antisymmetry; }
  bool dtheta_t_ok() const { return dtheta_t_residual <= tolerances.dtheta_t; }
  bool levi_ok() const { return levi_min_eigenvalue > 0.0 && levi_hermitian_residual <= 1e-10; }
  bool ok() const {
    return theta_frame_ok() && theta_t_ok() && antisymmetry_ok() && dtheta_t_ok() && levi_ok();
  }
};

/// Levi Gram matrix G(alpha, beta) = -i d theta(Z_alpha, Z_betabar), with
/// d theta(X, Y) = (X theta(Y) - Y theta(X) - theta([X, Y])) / 2 evaluated by
/// central differences of theta's chart components.
CMatrixN levi_gram(const CrModel& m, const ChartPoint& x, double h = 1e-5);

/// Antisymmetric matrix (d theta)_{jk} under the same convention.
DimMatrix<double> dtheta_matrix(const CrModel& m, const ChartPoint& x, double h = 1e-5);

ValidationReport validate_model(const CrModel& m, const std::vector<ChartPoint>& points,
                                ValidationTolerances tol = {});

}  // namespace crdiff
