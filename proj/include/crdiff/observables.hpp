#pragma once

#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "crdiff/sde_engine.hpp"

namespace crdiff {

/// A complex 1-form on the chart, given by its coordinate components.
struct OneForm {
  std::string name;
  std::function<CCovector(const ChartPoint&)> components;
  /// Optional analytic Jacobian: J(k, j) = d(component k) / dx^j.
  std::function<CJacobian(const ChartPoint&)> jacobian;

  /// Xi_A = Xi(Z_A) for A = 1..n followed by 1bar..nbar.
  DimVector<Complex> frame_components(const CrModel& m, const ChartPoint& x) const;
  Complex frame_component(const CrModel& m, const ChartPoint& x, FrameIndex a) const;

  OneForm scaled(double a) const;
  friend OneForm operator+(const OneForm& a, const OneForm& b);
};

/// Contact form theta of the model.
OneForm theta_form(ModelPtr m);
/// dx^k.
OneForm coordinate_form(int dim, int k);
/// (dz^alpha + d conj(z^alpha)) / 2 = du^alpha on the Heisenberg chart.
OneForm half_dz_plus_dzbar(int n, int alpha);
/// u^alpha dv^alpha - v^alpha du^alpha.
OneForm area_form(int n, int alpha);
OneForm zero_form(int dim);

/// Stratonovich line integral accumulated step by step: per step the
/// integrand g_A = Xi(pi_* L_A) is averaged over the pre- and post-step states
/// and paired with dB^A; the real part of the sum is accumulated.
class LineIntegrator final : public StepObserver {
 public:
  LineIntegrator(ModelPtr m, OneForm form);
  void on_step(const FrameState& before, const FrameState& after, const CVectorN& dB) override;
  double value() const override { return total_; }

 private:
  /// g_alpha followed by g_alphabar.
  DimVector<Complex> integrand(const FrameState& s) const;

  ModelPtr model_;
  OneForm form_;
  double total_ = 0.0;
};

ObserverFactory line_integral_observer(ModelPtr m, OneForm form);

/// Line integral along a stored path; requires full-resolution increments.
double line_integral(const ModelPtr& m, const Path& path, const OneForm& form);

/// Path traversed backwards: states in reverse order, increments negated.
Path reversed(const Path& path);

struct MeanEstimate {
  double mean = 0.0;
  double stderr_ = 0.0;
  std::size_t n_used = 0;
  double capped_fraction = 0.0;
};

/// Sample mean and standard error. Throws if `values` is empty.
MeanEstimate mean_with_stderr(const std::vector<double>& values);

/// E_x[f(X(t))] over completed paths; throws if every path was capped.
MeanEstimate semigroup_average(const Ensemble& ens, const std::function<double(const ChartPoint&)>& f);

/// Unbiased sample variance with its standard error sqrt((m4 - s^4) / N).
MeanEstimate variance_with_stderr(const std::vector<double>& values);

struct DensityWindow {
  ChartPoint lower;
  ChartPoint upper;
  std::vector<int> points;  // grid points per axis
};

struct DensityEstimate {
  std::vector<std::vector<double>> axes;
  /// Row-major over axes (last axis fastest).
  std::vector<double> values;
  ChartPoint bandwidth;
  std::size_t n_samples = 0;
  double cell_volume = 1.0;

  /// Riemann sum of values * volume_density over the grid.
  double integral(const CrModel& m) const;
  ChartPoint grid_point(std::size_t flat_index) const;
};

/// Per-axis Scott bandwidth sigma_k * N^(-1/(d+4)).
ChartPoint scott_bandwidth(const std::vector<ChartPoint>& samples);

/// Gaussian product-kernel density of the samples with respect to psi, i.e.
/// Lebesgue KDE divided by the model's volume density.
DensityEstimate estimate_density(const CrModel& m, const std::vector<ChartPoint>& samples,
                                 const DensityWindow& window,
                                 std::optional<ChartPoint> bandwidth = std::nullopt);

double density_at(const CrModel& m, const std::vector<ChartPoint>& samples, const ChartPoint& bandwidth,
                  const ChartPoint& y);

struct CharFnValue {
  double lambda = 0.0;
  Complex value;
  double stderr_re = 0.0;
  double stderr_im = 0.0;
};

/// Empirical E[exp(i lambda Y)] with componentwise standard errors.
std::vector<CharFnValue> char_function(const std::vector<double>& samples, const std::vector<double>& lambdas);

/// Two-sample Kolmogorov-Smirnov statistic sup |F_a - F_b|.
double ks_distance(std::vector<double> a, std::vector<double> b);

/// Largest fraction of samples in a single bin of the given width.
double max_bin_mass(const std::vector<double>& samples, double width);

}  // namespace crdiff
