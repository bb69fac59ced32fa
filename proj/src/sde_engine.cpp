#include "crdiff/sde_engine.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

namespace crdiff {

void SimConfig::validate() const {
  if (!(t_horizon > 0.0) || !std::isfinite(t_horizon))
    throw std::invalid_argument("t_horizon must be a positive finite number");
  if (n_steps < 0) throw std::invalid_argument("n_steps must be nonnegative");
  if (reunitarize_every < 0) throw std::invalid_argument("reunitarize_every must be >= 0");
  if (record_stride <= 0) throw std::invalid_argument("record_stride must be positive");
  if (!(coordinate_cap > 0.0)) throw std::invalid_argument("coordinate_cap must be positive");
}

const char* to_string(PathStatus s) {
  switch (s) {
    case PathStatus::completed:
      return "completed";
    case PathStatus::capped:
      return "capped";
  }
  return "unknown";
}

int resolve_workers(int workers) { return workers > 0 ? workers : omp_get_max_threads(); }

CVectorN sample_increment(PathStream& stream, double dt, int n) {
  const double scale = std::sqrt(0.5 * dt);
  CVectorN db(n);
  for (int a = 0; a < n; ++a) {
    const auto g = stream.normal_pair();
    db[a] = Complex(scale * g[0], scale * g[1]);
  }
  return db;
}

StepOutcome step(const CrModel& m, const FrameState& s, const CVectorN& dB, double /*dt*/,
                 bool reunitarize_frame) {
  if (!m.in_chart(s.x)) return {s, true};
  if (m.flat()) {
    // de = 0 identically: only the base point moves
    const BundleVelocity v1 = horizontal_velocity(m.frame(s.x), nullptr, s, dB);
    const FrameState predictor{s.x + v1.dx, s.e};
    if (!m.in_chart(predictor.x)) return {s, true};
    const BundleVelocity v2 = horizontal_velocity(m.frame(predictor.x), nullptr, predictor, dB);
    FrameState out{s.x + 0.5 * (v1.dx + v2.dx), s.e};
    if (!m.in_chart(out.x)) return {s, true};
    if (reunitarize_frame) out.e = reunitarize(out.e);
    return {std::move(out), false};
  }
  const BundleVelocity v1 = horizontal_velocity(m, s, dB);
  const FrameState predictor{s.x + v1.dx, s.e + v1.de};
  if (!m.in_chart(predictor.x)) return {s, true};
  const BundleVelocity v2 = horizontal_velocity(m, predictor, dB);
  FrameState out{s.x + 0.5 * (v1.dx + v2.dx), s.e + 0.5 * (v1.de + v2.de)};
  if (!m.in_chart(out.x)) return {s, true};
  if (reunitarize_frame) out.e = reunitarize(out.e);
  return {std::move(out), false};
}

namespace {

bool reunitarize_due(const SimConfig& cfg, int k) {
  return cfg.reunitarize_every > 0 && (k + 1) % cfg.reunitarize_every == 0;
}

template <typename NextIncrement, typename OnStep>
PathStatus run_steps(const CrModel& m, FrameState& s, const SimConfig& cfg, int n_steps,
                     NextIncrement&& next_increment, OnStep&& on_step) {
  const double dt = cfg.dt();
  for (int k = 0; k < n_steps; ++k) {
    const CVectorN db = next_increment(k);
    StepOutcome out = step(m, s, db, dt, reunitarize_due(cfg, k));
    if (out.left_chart) return PathStatus::capped;
    on_step(k, s, out.state, db);
    s = std::move(out.state);
    if (s.x.cwiseAbs().maxCoeff() > cfg.coordinate_cap || !s.x.allFinite()) return PathStatus::capped;
  }
  return PathStatus::completed;
}

template <typename NextIncrement>
Path record_path(const CrModel& m, const FrameState& s0, const SimConfig& cfg, int n_steps,
                 NextIncrement&& next_increment) {
  cfg.validate();
  Path path;
  path.dt = cfg.n_steps > 0 ? cfg.dt() : 0.0;
  path.record_stride = cfg.record_stride;
  path.times.push_back(0.0);
  path.states.push_back(s0);
  FrameState s = s0;
  path.status = run_steps(m, s, cfg, n_steps, next_increment,
                          [&](int k, const FrameState&, const FrameState& after, const CVectorN& db) {
                            if (cfg.store_increments) path.increments.push_back(db);
                            if ((k + 1) % cfg.record_stride == 0) {
                              path.times.push_back((k + 1) * path.dt);
                              path.states.push_back(after);
                            }
                          });
  return path;
}

}  // namespace

Path simulate_path(const CrModel& m, const FrameState& s0, const SimConfig& cfg,
                   std::uint64_t path_index) {
  PathStream stream(cfg.seed, path_index);
  const double dt = cfg.t_horizon / std::max(cfg.n_steps, 1);
  return record_path(m, s0, cfg, cfg.n_steps,
                     [&](int) { return sample_increment(stream, dt, m.n()); });
}

Path simulate_path_with_increments(const CrModel& m, const FrameState& s0, const SimConfig& cfg,
                                   const std::vector<CVectorN>& increments) {
  SimConfig c = cfg;
  c.n_steps = static_cast<int>(increments.size());
  if (c.n_steps == 0) c.n_steps = 1;  // keeps dt well defined; no step is taken
  return record_path(m, s0, c, static_cast<int>(increments.size()),
                     [&](int k) { return increments[k]; });
}

std::size_t Ensemble::completed_count() const {
  std::size_t c = 0;
  for (PathStatus s : status) c += (s == PathStatus::completed);
  return c;
}

std::vector<ChartPoint> Ensemble::completed_points() const {
  std::vector<ChartPoint> pts;
  pts.reserve(terminal.size());
  for (std::size_t i = 0; i < terminal.size(); ++i)
    if (status[i] == PathStatus::completed) pts.push_back(terminal[i].x);
  return pts;
}

Ensemble simulate_ensemble(const CrModel& m, const FrameState& s0, const SimConfig& cfg,
                           std::size_t n_paths, const EnsembleOptions& opts) {
  cfg.validate();
  if (n_paths == 0) throw std::invalid_argument("n_paths must be positive");
  Ensemble ens;
  ens.config = cfg;
  ens.n_paths = n_paths;
  ens.terminal.assign(n_paths, s0);
  ens.status.assign(n_paths, PathStatus::completed);
  ens.observables.assign(opts.observers.size(), std::vector<double>(n_paths, 0.0));
  const double dt = cfg.dt();
  const int n = m.n();

  parallel_for_paths(n_paths, opts.workers, [&](std::size_t i) {
    PathStream stream(cfg.seed, i);
    std::vector<std::unique_ptr<StepObserver>> obs;
    obs.reserve(opts.observers.size());
    for (const auto& make : opts.observers) obs.push_back(make());
    FrameState s = s0;
    ens.status[i] = run_steps(
        m, s, cfg, cfg.n_steps, [&](int) { return sample_increment(stream, dt, n); },
        [&](int, const FrameState& before, const FrameState& after, const CVectorN& db) {
          for (auto& o : obs) o->on_step(before, after, db);
        });
    ens.terminal[i] = std::move(s);
    for (std::size_t k = 0; k < obs.size(); ++k) ens.observables[k][i] = obs[k]->value();
  });
  return ens;
}

}  // namespace crdiff
