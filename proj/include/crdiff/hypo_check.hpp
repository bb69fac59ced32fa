#pragma once

#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "crdiff/observables.hpp"

namespace crdiff {

using MultiIndex = std::vector<FrameIndex>;

std::string multi_index_label(const MultiIndex& idx, int n);

/// Complex vector field on the chart. `fd_depth` counts the finite-difference
/// derivatives nested inside `eval`; it selects the step for further
/// differentiation.
struct VectorField {
  std::function<CTangent(const ChartPoint&)> eval;
  std::function<CJacobian(const ChartPoint&)> jacobian;  // optional
  int fd_depth = 0;
};

struct ScalarField {
  std::function<Complex(const ChartPoint&)> eval;
  std::function<DimVector<Complex>(const ChartPoint&)> gradient;  // optional
  int fd_depth = 0;
};

inline constexpr double kFdStep = 1e-5;
/// Step used when the differentiated quantity is itself a finite difference.
inline constexpr double kNestedFdStep = 1e-3;

/// Z_A as a field; carries the model's analytic Jacobian when it has one.
VectorField frame_vector_field(const ModelPtr& m, FrameIndex a, bool allow_analytic = true);

/// Jacobian J(k, j) = d f^k / dx^j, analytic when available, otherwise by
/// central differences. Throws ChartError when a stencil point leaves the chart.
CJacobian field_jacobian(const CrModel& m, const VectorField& f, const ChartPoint& x);
DimVector<Complex> field_gradient(const CrModel& m, const ScalarField& f, const ChartPoint& x);

/// [a, b] = J_b a - J_a b as a field.
VectorField bracket_field(const ModelPtr& m, const VectorField& a, const VectorField& b);

/// [Z_{A1}, [Z_{A2}, ..., [Z_{A_{k-1}}, Z_{A_k}]...]]; a single index yields Z_{A1}.
VectorField nested_bracket_field(const ModelPtr& m, const MultiIndex& idx, bool allow_analytic = true);

/// [Z_A, Z_B] at x. With `force_fd` the frame Jacobians are replaced by
/// central differences (h = 1e-5).
CTangent lie_bracket(const ModelPtr& m, FrameIndex a, FrameIndex b, const ChartPoint& x, bool force_fd = false);

struct BracketTable {
  ChartPoint x;
  std::vector<std::string> labels;  // one per column of `vectors`
  Eigen::MatrixXd vectors;          // real (2n+1) x m
  Eigen::VectorXd singular_values;  // descending
  int rank = 0;
};

inline constexpr double kRankTolerance = 1e-8;

/// Real and imaginary parts of Z_alpha and of all brackets of order <= max_order
/// over {Z_1..Z_n, Z_1bar..Z_nbar}; rank counts sigma > 1e-8 sigma_max.
BracketTable span_rank(const ModelPtr& m, const ChartPoint& x, int max_bracket_order);

/// Phi_{A1}(Xi) = Xi_{A1};
/// Phi_{A1..Am}(Xi) = Z_{A1} Phi_{A2..Am}(Xi) - [Z_{A2},[...,[Z_{A(m-1)},Z_{Am}]...]] Xi_{A1}.
ScalarField phi_field(const ModelPtr& m, const OneForm& form, const MultiIndex& idx);
Complex phi_functional(const ModelPtr& m, const OneForm& form, const MultiIndex& idx, const ChartPoint& x);

inline constexpr double kPhiThreshold = 1e-8;

struct SmoothnessResult {
  bool satisfied = false;
  std::optional<MultiIndex> witness;
  Complex value;
};

/// Searches multi-indices by increasing order, lexicographic within an order
/// (1..n before 1bar..nbar), for |Phi| > 1e-8 at x.
SmoothnessResult smoothness_condition(const ModelPtr& m, const OneForm& form, const ChartPoint& x, int max_order);

}  // namespace crdiff
