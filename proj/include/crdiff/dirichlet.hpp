#pragma once

#include <functional>
#include <string>
#include <vector>

#include "crdiff/sde_engine.hpp"

namespace crdiff {

/// Relatively compact region {phi < 0} given by a defining function.
struct Domain {
  std::string name;
  std::function<double(const ChartPoint&)> phi;
  std::function<ChartPoint(const ChartPoint&)> grad_phi;  // optional
  ChartPoint box_lower;
  ChartPoint box_upper;

  /// Analytic gradient when present, central differences (h = 1e-6) otherwise.
  ChartPoint gradient(const ChartPoint& x) const;
};

/// |z|^4 + t^2 - R^4 < 0 on the Heisenberg chart.
Domain koranyi_ball(int n, double radius);
/// |x|^2 - R^2 < 0 in chart coordinates.
Domain euclidean_ball(int dim, double radius);

struct DomainCheck {
  double max_interior_phi = 0.0;    // should be < 0
  double min_boundary_gradient = 0.0;  // should be > 1e-8
  bool ok() const { return max_interior_phi < 0.0 && min_boundary_gradient > 1e-8; }
};

DomainCheck check_domain(const Domain& d, const std::vector<ChartPoint>& interior,
                         const std::vector<ChartPoint>& boundary);

struct ExitConfig {
  /// dt = sim.t_horizon / sim.n_steps; t_horizon is the give-up time.
  SimConfig sim{.t_horizon = 10.0, .n_steps = 10000};
  double delta_band = 1e-4;
  int max_refine_levels = 10;
  double horizon_threshold = 0.01;
  int workers = 0;
};

enum class ExitStatus { exited, horizon_exceeded };
const char* to_string(ExitStatus s);

struct ExitRecord {
  double tau = 0.0;
  ChartPoint exit_point;
  ExitStatus status = ExitStatus::exited;
};

/// First exit from the closure of the domain. A step that lands at phi >= 0
/// is re-run as two half steps whose increments are a conditional Gaussian
/// split of the original (Brownian bridge midpoint), recursively up to
/// max_refine_levels, until |phi| <= delta_band. If the finest level still
/// overshoots, the crossing is located on the final sub-step segment.
ExitRecord exit_sample(const CrModel& m, const ChartPoint& x0, const Domain& d, const ExitConfig& cfg,
                       std::uint64_t path_index = 0);

std::vector<ExitRecord> exit_ensemble(const CrModel& m, const ChartPoint& x0, const Domain& d,
                                      const ExitConfig& cfg, std::size_t n_paths);

struct DirichletResult {
  double estimate = 0.0;
  double stderr_ = 0.0;
  double horizon_fraction = 0.0;
  double collar_residual_max = 0.0;  // max |phi(exit point)|
  std::size_t n_exited = 0;
  bool flagged = false;
};

using BoundaryData = std::function<double(const ChartPoint&)>;

/// Monte Carlo u_f(x0) = E[f(X(tau'))] over exited paths.
DirichletResult solve_dirichlet(const CrModel& m, const Domain& d, const BoundaryData& f, const ChartPoint& x0,
                                std::size_t n_paths, const ExitConfig& cfg);

/// Same estimator applied to precomputed exit records.
DirichletResult dirichlet_from_records(const std::vector<ExitRecord>& records, const Domain& d,
                                       const BoundaryData& f, double horizon_threshold);

/// Fraction of paths started at boundary point xb that have left the closed
/// domain by each probe time. Throws if |phi(xb)| > delta_band.
std::vector<double> regularity_probe(const CrModel& m, const Domain& d, const ChartPoint& xb,
                                     const std::vector<double>& t_probe, std::size_t n_paths,
                                     const ExitConfig& cfg);

struct ExitTimeEstimate {
  double mean = 0.0;
  double stderr_ = 0.0;
  double horizon_fraction = 0.0;
  bool flagged = false;  // horizon-exceeded paths counted at the horizon (lower bound)
};

ExitTimeEstimate mean_exit_time(const CrModel& m, const Domain& d, const ChartPoint& x0, std::size_t n_paths,
                                const ExitConfig& cfg);

}  // namespace crdiff
