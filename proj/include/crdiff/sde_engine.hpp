#pragma once

#include <cstdint>
#include <exception>
#include <functional>
#include <memory>
#include <mutex>
#include <vector>

#include <omp.h>

#include "crdiff/frame_bundle.hpp"
#include "crdiff/rng.hpp"

namespace crdiff {

struct SimConfig {
  double t_horizon = 1.0;
  int n_steps = 1000;
  std::uint64_t seed = 0;
  int reunitarize_every = 1;  // 0 disables
  int record_stride = 1;
  double coordinate_cap = 1e6;
  bool store_increments = false;

  double dt() const { return t_horizon / n_steps; }
  /// Throws std::invalid_argument naming the offending field.
  void validate() const;
};

enum class PathStatus { completed, capped };

const char* to_string(PathStatus s);

/// Complex Brownian increment: dB^alpha = (dxi + i deta) / sqrt(2) with
/// dxi, deta ~ N(0, dt), so E[dB dBbar] = dt and E[dB dB] = 0.
CVectorN sample_increment(PathStream& stream, double dt, int n);

/// One Stratonovich-Heun step of the bundle SDE driven by dB.
/// `left_chart` is set (and the input state returned) when the predictor or
/// the result lies outside the model's chart.
struct StepOutcome {
  FrameState state;
  bool left_chart = false;
};

StepOutcome step(const CrModel& m, const FrameState& s, const CVectorN& dB, double dt,
                 bool reunitarize_frame = true);

struct Path {
  std::vector<double> times;
  std::vector<FrameState> states;
  std::vector<CVectorN> increments;  // filled when SimConfig::store_increments
  PathStatus status = PathStatus::completed;
  double dt = 0.0;
  int record_stride = 1;

  bool has_full_increments() const {
    return record_stride == 1 && !increments.empty() && increments.size() + 1 == states.size();
  }
};

Path simulate_path(const CrModel& m, const FrameState& s0, const SimConfig& cfg,
                   std::uint64_t path_index = 0);

/// Path driven by caller-supplied increments (one per step; cfg.n_steps is
/// ignored in favour of increments.size()).
Path simulate_path_with_increments(const CrModel& m, const FrameState& s0, const SimConfig& cfg,
                                   const std::vector<CVectorN>& increments);

/// Receives every accepted step of one path; produces one scalar per path.
class StepObserver {
 public:
  virtual ~StepObserver() = default;
  virtual void on_step(const FrameState& before, const FrameState& after, const CVectorN& dB) = 0;
  virtual double value() const = 0;
};

using ObserverFactory = std::function<std::unique_ptr<StepObserver>()>;

struct EnsembleOptions {
  int workers = 0;  // 0 = OpenMP default
  std::vector<ObserverFactory> observers;
};

struct Ensemble {
  SimConfig config;
  std::size_t n_paths = 0;
  std::vector<FrameState> terminal;
  std::vector<PathStatus> status;
  /// observables[k][i] is observer k's value on path i.
  std::vector<std::vector<double>> observables;

  std::size_t completed_count() const;
  /// Terminal base points of completed paths, in path order.
  std::vector<ChartPoint> completed_points() const;
};

Ensemble simulate_ensemble(const CrModel& m, const FrameState& s0, const SimConfig& cfg,
                           std::size_t n_paths, const EnsembleOptions& opts = {});

int resolve_workers(int workers);

/// Runs fn(i) for i in [0, n) on `workers` OpenMP threads. Work items must
/// write only to slot i of their outputs; the first exception is rethrown.
template <typename Fn>
void parallel_for_paths(std::size_t n, int workers, Fn&& fn) {
  std::exception_ptr error;
  std::mutex error_mutex;
  const auto count = static_cast<long long>(n);
#pragma omp parallel for schedule(static) num_threads(resolve_workers(workers))
  for (long long i = 0; i < count; ++i) {
    try {
      fn(static_cast<std::size_t>(i));
    } catch (...) {
      std::lock_guard<std::mutex> lock(error_mutex);
      if (!error) error = std::current_exception();
    }
  }
  if (error) std::rethrow_exception(error);
}

}  // namespace crdiff
