#include "crdiff/dirichlet.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "crdiff/observables.hpp"

namespace crdiff {

ChartPoint Domain::gradient(const ChartPoint& x) const {
  if (grad_phi) return grad_phi(x);
  constexpr double h = 1e-6;
  ChartPoint g(x.size());
  for (Eigen::Index k = 0; k < x.size(); ++k) {
    ChartPoint xp = x, xm = x;
    xp[k] += h;
    xm[k] -= h;
    g[k] = (phi(xp) - phi(xm)) / (2.0 * h);
  }
  return g;
}

Domain koranyi_ball(int n, double radius) {
  if (n <= 0 || !(radius > 0.0)) throw std::invalid_argument("koranyi_ball: need n >= 1 and R > 0");
  const int dim = 2 * n + 1;
  const double r4 = std::pow(radius, 4);
  Domain d;
  d.name = "koranyi_ball";
  d.phi = [n, r4](const ChartPoint& x) {
    const double z2 = x.head(2 * n).squaredNorm();
    return z2 * z2 + x[2 * n] * x[2 * n] - r4;
  };
  d.grad_phi = [n](const ChartPoint& x) {
    const double z2 = x.head(2 * n).squaredNorm();
    ChartPoint g(2 * n + 1);
    g.head(2 * n) = 4.0 * z2 * x.head(2 * n);
    g[2 * n] = 2.0 * x[2 * n];
    return g;
  };
  d.box_lower = ChartPoint::Constant(dim, -radius);
  d.box_upper = ChartPoint::Constant(dim, radius);
  d.box_lower[2 * n] = -radius * radius;
  d.box_upper[2 * n] = radius * radius;
  return d;
}

Domain euclidean_ball(int dim, double radius) {
  if (dim <= 0 || !(radius > 0.0)) throw std::invalid_argument("euclidean_ball: need dim >= 1 and R > 0");
  Domain d;
  d.name = "euclidean_ball";
  d.phi = [radius](const ChartPoint& x) { return x.squaredNorm() - radius * radius; };
  d.grad_phi = [](const ChartPoint& x) -> ChartPoint { return 2.0 * x; };
  d.box_lower = ChartPoint::Constant(dim, -radius);
  d.box_upper = ChartPoint::Constant(dim, radius);
  return d;
}

DomainCheck check_domain(const Domain& d, const std::vector<ChartPoint>& interior,
                         const std::vector<ChartPoint>& boundary) {
  DomainCheck c;
  c.max_interior_phi = -std::numeric_limits<double>::infinity();
  for (const auto& x : interior) c.max_interior_phi = std::max(c.max_interior_phi, d.phi(x));
  c.min_boundary_gradient = std::numeric_limits<double>::infinity();
  for (const auto& x : boundary) c.min_boundary_gradient = std::min(c.min_boundary_gradient, d.gradient(x).norm());
  return c;
}

const char* to_string(ExitStatus s) {
  return s == ExitStatus::exited ? "exited" : "horizon_exceeded";
}

namespace {

struct Located {
  bool exited = false;
  FrameState state;
  double time = 0.0;
};

class ExitLocator {
 public:
  ExitLocator(const CrModel& m, const Domain& d, const ExitConfig& cfg, PathStream& stream)
      : m_(m), d_(d), cfg_(cfg), stream_(stream) {}

  /// `out` = step(in, db) over [t_in, t_in + h] with phi(out) >= 0.
  Located locate(const FrameState& in, double t_in, const CVectorN& db, double h, int level,
                 const FrameState& out) {
    const double phi_out = d_.phi(out.x);
    if (std::abs(phi_out) <= cfg_.delta_band) return {true, out, t_in + h};
    if (level >= cfg_.max_refine_levels) return on_segment(in, out, t_in, h);

    // Brownian bridge midpoint: per real component the conditional variance is
    // a quarter of the full-step variance h/2.
    const CVectorN db1 = 0.5 * db + sample_increment(stream_, 0.25 * h, m_.n());
    const CVectorN db2 = db - db1;
    const StepOutcome mid = step(m_, in, db1, 0.5 * h, true);
    if (mid.left_chart) return on_segment(in, out, t_in, h);
    if (d_.phi(mid.state.x) >= 0.0) return locate(in, t_in, db1, 0.5 * h, level + 1, mid.state);
    const StepOutcome second = step(m_, mid.state, db2, 0.5 * h, true);
    if (second.left_chart) return on_segment(in, out, t_in, h);
    if (d_.phi(second.state.x) < 0.0) return {false, second.state, t_in + h};
    return locate(mid.state, t_in + 0.5 * h, db2, 0.5 * h, level + 1, second.state);
  }

 private:
  /// Root of phi on the straight chord between the last inside and first
  /// outside sub-step states.
  Located on_segment(const FrameState& in, const FrameState& out, double t_in, double h) const {
    double lo = 0.0, hi = 1.0;
    ChartPoint x = out.x;
    for (int it = 0; it < 200; ++it) {
      const double mid = 0.5 * (lo + hi);
      x = in.x + mid * (out.x - in.x);
      const double p = d_.phi(x);
      if (std::abs(p) <= cfg_.delta_band) {
        lo = hi = mid;
        break;
      }
      (p < 0.0 ? lo : hi) = mid;
    }
    return {true, FrameState{x, out.e}, t_in + 0.5 * (lo + hi) * h};
  }

  const CrModel& m_;
  const Domain& d_;
  const ExitConfig& cfg_;
  PathStream& stream_;
};

ExitRecord run_exit(const CrModel& m, const ChartPoint& x0, const Domain& d, const ExitConfig& cfg,
                    std::uint64_t path_index, double horizon) {
  ExitRecord rec;
  if (d.phi(x0) > 0.0) {
    rec.tau = 0.0;
    rec.exit_point = x0;
    return rec;
  }
  const double dt = cfg.sim.dt();
  const long long n_steps = static_cast<long long>(std::ceil(horizon / dt - 1e-9));
  PathStream stream(cfg.sim.seed, path_index);
  ExitLocator locator(m, d, cfg, stream);
  FrameState s = FrameState::identity_at(x0, m.n());
  for (long long k = 0; k < n_steps; ++k) {
    const double t = k * dt;
    const CVectorN db = sample_increment(stream, dt, m.n());
    const bool reun = cfg.sim.reunitarize_every > 0 && (k + 1) % cfg.sim.reunitarize_every == 0;
    StepOutcome out = step(m, s, db, dt, reun);
    if (out.left_chart) break;
    if (d.phi(out.state.x) >= 0.0) {
      const Located loc = locator.locate(s, t, db, dt, 0, out.state);
      if (loc.exited) {
        rec.tau = loc.time;
        rec.exit_point = loc.state.x;
        return rec;
      }
      s = loc.state;
    } else {
      s = std::move(out.state);
    }
  }
  rec.status = ExitStatus::horizon_exceeded;
  rec.tau = horizon;
  rec.exit_point = s.x;
  return rec;
}

void validate_exit_config(const ExitConfig& cfg) {
  cfg.sim.validate();
  if (cfg.sim.n_steps <= 0) throw std::invalid_argument("n_steps must be positive");
  if (!(cfg.delta_band > 0.0)) throw std::invalid_argument("delta_band must be positive");
  if (cfg.max_refine_levels < 0) throw std::invalid_argument("max_refine_levels must be >= 0");
}

}  // namespace

ExitRecord exit_sample(const CrModel& m, const ChartPoint& x0, const Domain& d, const ExitConfig& cfg,
                       std::uint64_t path_index) {
  validate_exit_config(cfg);
  return run_exit(m, x0, d, cfg, path_index, cfg.sim.t_horizon);
}

std::vector<ExitRecord> exit_ensemble(const CrModel& m, const ChartPoint& x0, const Domain& d,
                                      const ExitConfig& cfg, std::size_t n_paths) {
  validate_exit_config(cfg);
  std::vector<ExitRecord> records(n_paths);
  parallel_for_paths(n_paths, cfg.workers,
                     [&](std::size_t i) { records[i] = run_exit(m, x0, d, cfg, i, cfg.sim.t_horizon); });
  return records;
}

DirichletResult dirichlet_from_records(const std::vector<ExitRecord>& records, const Domain& d,
                                       const BoundaryData& f, double horizon_threshold) {
  DirichletResult r;
  std::vector<double> values;
  values.reserve(records.size());
  for (const auto& rec : records) {
    if (rec.status != ExitStatus::exited) continue;
    values.push_back(f(rec.exit_point));
    r.collar_residual_max = std::max(r.collar_residual_max, std::abs(d.phi(rec.exit_point)));
  }
  if (values.empty()) throw Error("solve_dirichlet: no path exited before the horizon");
  const MeanEstimate est = mean_with_stderr(values);
  r.estimate = est.mean;
  r.stderr_ = est.stderr_;
  r.n_exited = values.size();
  r.horizon_fraction = 1.0 - static_cast<double>(values.size()) / records.size();
  r.flagged = r.horizon_fraction > horizon_threshold;
  return r;
}

DirichletResult solve_dirichlet(const CrModel& m, const Domain& d, const BoundaryData& f, const ChartPoint& x0,
                                std::size_t n_paths, const ExitConfig& cfg) {
  if (n_paths == 0) throw std::invalid_argument("n_paths must be positive");
  return dirichlet_from_records(exit_ensemble(m, x0, d, cfg, n_paths), d, f, cfg.horizon_threshold);
}

std::vector<double> regularity_probe(const CrModel& m, const Domain& d, const ChartPoint& xb,
                                     const std::vector<double>& t_probe, std::size_t n_paths,
                                     const ExitConfig& cfg) {
  validate_exit_config(cfg);
  if (t_probe.empty() || n_paths == 0) throw std::invalid_argument("regularity_probe: empty probe");
  if (std::abs(d.phi(xb)) > cfg.delta_band) throw Error("regularity_probe: start point is not on the boundary");
  const double horizon = *std::max_element(t_probe.begin(), t_probe.end());
  std::vector<double> tau(n_paths);
  parallel_for_paths(n_paths, cfg.workers, [&](std::size_t i) {
    const ExitRecord rec = run_exit(m, xb, d, cfg, i, horizon);
    tau[i] = rec.status == ExitStatus::exited ? rec.tau : std::numeric_limits<double>::infinity();
  });
  std::vector<double> fractions;
  for (double t : t_probe) {
    const auto hits = std::count_if(tau.begin(), tau.end(), [t](double s) { return s <= t; });
    fractions.push_back(static_cast<double>(hits) / n_paths);
  }
  return fractions;
}

ExitTimeEstimate mean_exit_time(const CrModel& m, const Domain& d, const ChartPoint& x0, std::size_t n_paths,
                                const ExitConfig& cfg) {
  if (n_paths == 0) throw std::invalid_argument("n_paths must be positive");
  const auto records = exit_ensemble(m, x0, d, cfg, n_paths);
  std::vector<double> tau;
  tau.reserve(records.size());
  std::size_t exceeded = 0;
  for (const auto& r : records) {
    tau.push_back(r.tau);
    exceeded += r.status == ExitStatus::horizon_exceeded;
  }
  const MeanEstimate est = mean_with_stderr(tau);
  ExitTimeEstimate out;
  out.mean = est.mean;
  out.stderr_ = est.stderr_;
  out.horizon_fraction = static_cast<double>(exceeded) / n_paths;
  out.flagged = out.horizon_fraction > cfg.horizon_threshold;
  return out;
}

}  // namespace crdiff
