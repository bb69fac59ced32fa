#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include "crdiff/cli.hpp"
#include "crdiff/dirichlet.hpp"
#include "crdiff/hypo_check.hpp"
#include "crdiff/observables.hpp"

namespace crdiff::cli {

namespace {

std::string num(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

struct Table {
  std::vector<std::string> columns;
  std::vector<std::vector<std::string>> rows;

  void write(std::ostream& os, const std::string& format) const {
    if (format == "csv") {
      auto line = [&os](const std::vector<std::string>& cells) {
        for (std::size_t i = 0; i < cells.size(); ++i) os << (i ? "," : "") << cells[i];
        os << '\n';
      };
      line(columns);
      for (const auto& r : rows) line(r);
      return;
    }
    std::vector<std::size_t> width(columns.size());
    for (std::size_t i = 0; i < columns.size(); ++i) width[i] = columns[i].size();
    for (const auto& r : rows)
      for (std::size_t i = 0; i < r.size(); ++i) width[i] = std::max(width[i], r[i].size());
    auto line = [&](const std::vector<std::string>& cells) {
      for (std::size_t i = 0; i < cells.size(); ++i) {
        os << (i ? "  " : "") << cells[i];
        if (i + 1 < cells.size()) os << std::string(width[i] - cells[i].size(), ' ');
      }
      os << '\n';
    };
    line(columns);
    for (const auto& r : rows) line(r);
  }
};

/// Everything a command produces besides the summary line.
struct Output {
  std::vector<std::string> comments;  // extra "# key: value" lines
  Table table;
};

std::string resolve_path(const RunConfig& cfg, const std::string& suffix = {}) {
  std::string path = cfg.text("run.output");
  const std::string ext = cfg.text("run.format") == "csv" ? ".csv" : ".txt";
  if (path == "-") return suffix.empty() ? path : "";
  if (path.empty()) {
    const char* dir = std::getenv(kOutputDirEnv);
    path = (std::filesystem::path(dir && *dir ? dir : ".") / (cfg.command() + ext)).string();
  }
  if (!suffix.empty()) {
    std::filesystem::path p(path);
    path = (p.parent_path() / (p.stem().string() + suffix + p.extension().string())).string();
  }
  return path;
}

std::string write_output(const RunConfig& cfg, const Output& o, std::ostream& out, const std::string& suffix = {}) {
  std::ostringstream os;
  os << "# crdiff " << kVersion << '\n';
  os << "# command: " << cfg.command() << '\n';
  os << "# config_hash: " << cfg.hash() << '\n';
  os << "# seed: " << cfg.text("sim.seed") << '\n';
  for (const auto& c : o.comments) os << "# " << c << '\n';
  o.table.write(os, cfg.text("run.format"));

  const std::string path = resolve_path(cfg, suffix);
  if (path == "-") {
    out << os.str();
    return "stdout";
  }
  if (path.empty()) return "(skipped)";
  const std::filesystem::path p(path);
  if (p.has_parent_path()) std::filesystem::create_directories(p.parent_path());
  std::ofstream f(path, std::ios::binary);
  if (!f) throw Error("cannot write output file '" + path + "'");
  f << os.str();
  if (!f) throw Error("failed writing output file '" + path + "'");
  return path;
}

ModelPtr make_model(const RunConfig& cfg) {
  const int n = static_cast<int>(cfg.integer("model.n"));
  if (n > kMaxN) throw ConfigError("model.n", "at most " + std::to_string(kMaxN) + " is supported");
  const std::string& name = cfg.text("model.name");
  const double kappa = cfg.real("model.kappa");
  ModelPtr base = heisenberg_model(n);
  if (name == "gauge_phase") return gauge_rotated_model(base, phase_gauge(n, kappa), "gauge_phase");
  if (name == "gauge_constant") {
    CMatrixN lambda = CMatrixN::Zero(n, n);
    for (int a = 0; a < n; ++a) lambda(a, a) = std::polar(1.0, kappa * (a + 1));
    return gauge_rotated_model(base, constant_gauge(lambda), "gauge_constant");
  }
  return base;
}

ChartPoint point_from(const RunConfig& cfg, const std::string& key, int dim) {
  const auto v = cfg.reals(key);
  if (v.empty()) return ChartPoint::Zero(dim);
  if (static_cast<int>(v.size()) != dim)
    throw ConfigError(key, "expected " + std::to_string(dim) + " coordinates, got " + std::to_string(v.size()));
  return Eigen::Map<const Eigen::VectorXd>(v.data(), dim);
}

SimConfig sim_config(const RunConfig& cfg) {
  SimConfig s;
  s.t_horizon = cfg.real("sim.t");
  s.n_steps = static_cast<int>(cfg.integer("sim.steps"));
  s.seed = cfg.unsigned_integer("sim.seed");
  s.reunitarize_every = static_cast<int>(cfg.integer("sim.reunitarize_every"));
  s.record_stride = static_cast<int>(cfg.integer("sim.record_stride"));
  s.coordinate_cap = cfg.real("sim.cap");
  return s;
}

int workers(const RunConfig& cfg) { return static_cast<int>(cfg.integer("run.workers")); }
std::size_t n_paths(const RunConfig& cfg) { return static_cast<std::size_t>(cfg.integer("sim.paths")); }

OneForm make_form(const RunConfig& cfg, const ModelPtr& m) {
  const std::string& name = cfg.text("form.name");
  const int alpha = static_cast<int>(cfg.integer("form.alpha"));
  if (alpha > m->n()) throw ConfigError("form.alpha", "must be <= n");
  if (name == "theta") return theta_form(m);
  if (name == "area") return area_form(m->n(), alpha - 1);
  if (name == "zero") return zero_form(m->dim());
  return half_dz_plus_dzbar(m->n(), alpha - 1);
}

std::vector<ChartPoint> random_points(int dim, std::size_t count, double radius, std::uint64_t seed) {
  std::vector<ChartPoint> pts;
  for (std::size_t i = 0; i < count; ++i) {
    PathStream stream(seed, i);
    ChartPoint x(dim);
    for (int k = 0; k < dim; k += 2) {
      const auto b = stream.next_block();
      const std::uint64_t w[2] = {(std::uint64_t{b[1]} << 32) | b[0], (std::uint64_t{b[3]} << 32) | b[2]};
      for (int j = 0; j < 2 && k + j < dim; ++j)
        x[k + j] = radius * (2.0 * static_cast<double>(w[j] >> 11) * 0x1.0p-53 - 1.0);
    }
    pts.push_back(x);
  }
  return pts;
}

std::string summary_seed(const RunConfig& cfg) { return "seed=" + cfg.text("sim.seed"); }

int cmd_simulate(const RunConfig& cfg, std::ostream& out) {
  const ModelPtr m = make_model(cfg);
  const SimConfig sim = sim_config(cfg);
  const ChartPoint x0 = point_from(cfg, "sim.start", m->dim());
  const FrameState s0 = FrameState::identity_at(x0, m->n());
  const std::size_t paths = n_paths(cfg);
  const int n = m->n();

  Output o;
  o.table.columns = {"path_id", "time"};
  for (const auto& c : m->coordinate_names()) o.table.columns.push_back(c);
  for (int r = 0; r < n; ++r)
    for (int c = 0; c < n; ++c) {
      const std::string e = "e" + std::to_string(r + 1) + std::to_string(c + 1);
      o.table.columns.push_back(e + "_re");
      o.table.columns.push_back(e + "_im");
    }
  o.table.columns.push_back("status");

  auto row = [&](std::size_t id, double t, const FrameState& s, PathStatus st) {
    std::vector<std::string> r{std::to_string(id), num(t)};
    for (Eigen::Index k = 0; k < s.x.size(); ++k) r.push_back(num(s.x[k]));
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j) {
        r.push_back(num(s.e(i, j).real()));
        r.push_back(num(s.e(i, j).imag()));
      }
    r.push_back(to_string(st));
    o.table.rows.push_back(std::move(r));
  };

  std::size_t capped = 0;
  if (cfg.boolean("sim.terminal_only")) {
    EnsembleOptions opts;
    opts.workers = workers(cfg);
    const Ensemble ens = simulate_ensemble(*m, s0, sim, paths, opts);
    for (std::size_t i = 0; i < paths; ++i) {
      row(i, sim.t_horizon, ens.terminal[i], ens.status[i]);
      capped += ens.status[i] == PathStatus::capped;
    }
  } else {
    constexpr std::size_t kChunk = 256;
    std::vector<Path> chunk;
    for (std::size_t begin = 0; begin < paths; begin += kChunk) {
      const std::size_t len = std::min(kChunk, paths - begin);
      chunk.assign(len, Path{});
      parallel_for_paths(len, workers(cfg), [&](std::size_t i) { chunk[i] = simulate_path(*m, s0, sim, begin + i); });
      for (std::size_t i = 0; i < len; ++i) {
        const Path& p = chunk[i];
        for (std::size_t k = 0; k < p.states.size(); ++k) row(begin + i, p.times[k], p.states[k], p.status);
        capped += p.status == PathStatus::capped;
      }
    }
  }
  const std::string where = write_output(cfg, o, out);
  out << "simulate: model=" << m->name() << " n=" << n << " paths=" << paths << " capped=" << capped << " "
      << summary_seed(cfg) << " -> " << where << '\n';
  return 0;
}

Ensemble run_ensemble(const RunConfig& cfg, const ModelPtr& m, std::vector<ObserverFactory> observers = {}) {
  const ChartPoint x0 = point_from(cfg, "sim.start", m->dim());
  EnsembleOptions opts;
  opts.workers = workers(cfg);
  opts.observers = std::move(observers);
  return simulate_ensemble(*m, FrameState::identity_at(x0, m->n()), sim_config(cfg), n_paths(cfg), opts);
}

int cmd_density(const RunConfig& cfg, std::ostream& out) {
  const ModelPtr m = make_model(cfg);
  const Ensemble ens = run_ensemble(cfg, m);
  const auto samples = ens.completed_points();
  if (samples.size() < 100) throw Error("density: need at least 100 completed paths");
  const int d = m->dim();

  DensityWindow w;
  w.lower = point_from(cfg, "density.lower", d);
  w.upper = point_from(cfg, "density.upper", d);
  if (cfg.reals("density.lower").empty()) {
    w.lower = samples.front();
    for (const auto& s : samples) w.lower = w.lower.cwiseMin(s);
  }
  if (cfg.reals("density.upper").empty()) {
    w.upper = samples.front();
    for (const auto& s : samples) w.upper = w.upper.cwiseMax(s);
  }
  if ((w.upper.array() <= w.lower.array()).any()) throw ConfigError("density.upper", "must exceed density.lower");
  w.points.assign(d, static_cast<int>(cfg.integer("density.grid")));
  std::optional<ChartPoint> bw;
  if (!cfg.reals("density.bandwidth").empty()) {
    bw = point_from(cfg, "density.bandwidth", d);
    if ((bw->array() <= 0.0).any()) throw ConfigError("density.bandwidth", "must be positive");
  }
  const DensityEstimate est = estimate_density(*m, samples, w, bw);

  Output o;
  std::string bws;
  for (Eigen::Index k = 0; k < d; ++k) bws += (k ? "," : "") + num(est.bandwidth[k]);
  o.comments.push_back("bandwidth: " + bws);
  o.comments.push_back("n_samples: " + std::to_string(est.n_samples));
  o.comments.push_back("volume_density: " + num(m->volume_density(ChartPoint::Zero(d))));
  for (const auto& c : m->coordinate_names()) o.table.columns.push_back(c);
  o.table.columns.push_back("density");
  for (std::size_t i = 0; i < est.values.size(); ++i) {
    const ChartPoint p = est.grid_point(i);
    std::vector<std::string> r;
    for (Eigen::Index k = 0; k < d; ++k) r.push_back(num(p[k]));
    r.push_back(num(est.values[i]));
    o.table.rows.push_back(std::move(r));
  }
  const std::string where = write_output(cfg, o, out);
  out << "density: samples=" << est.n_samples << " grid=" << est.values.size()
      << " integral=" << num(est.integral(*m)) << " " << summary_seed(cfg) << " -> " << where << '\n';
  return 0;
}

int cmd_line_integral(const RunConfig& cfg, std::ostream& out) {
  const ModelPtr m = make_model(cfg);
  const OneForm form = make_form(cfg, m);
  const Ensemble ens = run_ensemble(cfg, m, {line_integral_observer(m, form)});
  Output o;
  o.comments.push_back("form: " + form.name);
  o.table.columns = {"path_id", "value", "status"};
  std::vector<double> values;
  for (std::size_t i = 0; i < ens.n_paths; ++i) {
    o.table.rows.push_back({std::to_string(i), num(ens.observables[0][i]), to_string(ens.status[i])});
    if (ens.status[i] == PathStatus::completed) values.push_back(ens.observables[0][i]);
  }
  if (values.empty()) throw Error("line-integral: every path was capped");
  const MeanEstimate mean = mean_with_stderr(values);
  const std::string where = write_output(cfg, o, out);
  out << "line-integral: form=" << form.name << " paths=" << ens.n_paths << " mean=" << num(mean.mean)
      << " stderr=" << num(mean.stderr_);
  if (values.size() > 1) out << " variance=" << num(variance_with_stderr(values).mean);
  out << " " << summary_seed(cfg) << " -> " << where << '\n';
  return 0;
}

int cmd_charfn(const RunConfig& cfg, std::ostream& out) {
  const ModelPtr m = make_model(cfg);
  int k = static_cast<int>(cfg.integer("charfn.coordinate"));
  if (k > m->dim()) throw ConfigError("charfn.coordinate", "exceeds the chart dimension");
  if (k == 0) k = m->dim();
  const auto lambdas = cfg.reals("charfn.lambdas");
  if (lambdas.empty()) throw ConfigError("charfn.lambdas", "no frequencies given");
  const Ensemble ens = run_ensemble(cfg, m);
  std::vector<double> samples;
  for (const auto& x : ens.completed_points()) samples.push_back(x[k - 1]);
  if (samples.size() < 100) throw Error("charfn: need at least 100 completed paths");
  const auto cf = char_function(samples, lambdas);
  Output o;
  o.comments.push_back("coordinate: " + m->coordinate_names()[k - 1]);
  o.table.columns = {"lambda", "re", "im", "stderr_re", "stderr_im"};
  for (const auto& v : cf)
    o.table.rows.push_back({num(v.lambda), num(v.value.real()), num(v.value.imag()), num(v.stderr_re),
                            num(v.stderr_im)});
  const std::string where = write_output(cfg, o, out);
  out << "charfn: samples=" << samples.size() << " lambdas=" << lambdas.size() << " " << summary_seed(cfg)
      << " -> " << where << '\n';
  return 0;
}

int cmd_check_model(const RunConfig& cfg, std::ostream& out) {
  const ModelPtr m = make_model(cfg);
  const auto pts = random_points(m->dim(), static_cast<std::size_t>(cfg.integer("check.points")),
                                 cfg.real("check.radius"), cfg.unsigned_integer("sim.seed"));
  const ValidationReport r = validate_model(*m, pts);
  Output o;
  o.table.columns = {"check", "value", "tolerance", "status"};
  auto add = [&o](const std::string& name, double v, const std::string& tol, bool ok) {
    o.table.rows.push_back({name, num(v), tol, ok ? "pass" : "FAIL"});
  };
  add("theta(Z)", r.theta_frame_residual, num(r.tolerances.theta_frame), r.theta_frame_ok());
  add("theta(T)-1", r.theta_t_residual, num(r.tolerances.theta_t), r.theta_t_ok());
  add("gamma_antisymmetry", r.antisymmetry_residual, num(r.tolerances.antisymmetry), r.antisymmetry_ok());
  add("dtheta(T,.)", r.dtheta_t_residual, num(r.tolerances.dtheta_t), r.dtheta_t_ok());
  add("levi_hermitian", r.levi_hermitian_residual, "1e-10", r.levi_hermitian_residual <= 1e-10);
  add("levi_min_eigenvalue", r.levi_min_eigenvalue, ">0", r.levi_min_eigenvalue > 0.0);
  add("levi_max_eigenvalue", r.levi_max_eigenvalue, "-", true);
  add("levi_condition", r.levi_condition, "-", true);
  const std::string where = write_output(cfg, o, out);
  out << "check-model: model=" << m->name() << " n=" << m->n() << " points=" << r.n_points << " "
      << (r.ok() ? "all checks passed" : "CHECKS FAILED") << " " << summary_seed(cfg) << " -> " << where << '\n';
  return 0;
}

int cmd_check_hormander(const RunConfig& cfg, std::ostream& out) {
  const ModelPtr m = make_model(cfg);
  const int d = m->dim();
  const int order = static_cast<int>(cfg.integer("check.max_order"));
  const auto pts = random_points(d, static_cast<std::size_t>(cfg.integer("check.points")), cfg.real("check.radius"),
                                 cfg.unsigned_integer("sim.seed"));
  Output o;
  o.comments.push_back("max_order: " + std::to_string(order));
  o.table.columns = {"point_id"};
  for (const auto& c : m->coordinate_names()) o.table.columns.push_back(c);
  o.table.columns.push_back("rank");
  for (int k = 0; k < d; ++k) o.table.columns.push_back("sigma" + std::to_string(k + 1));
  int min_rank = d, max_rank = 0;
  for (std::size_t i = 0; i < pts.size(); ++i) {
    const BracketTable t = span_rank(m, pts[i], order);
    std::vector<std::string> r{std::to_string(i)};
    for (int k = 0; k < d; ++k) r.push_back(num(pts[i][k]));
    r.push_back(std::to_string(t.rank));
    for (int k = 0; k < d; ++k) r.push_back(num(k < t.singular_values.size() ? t.singular_values[k] : 0.0));
    o.table.rows.push_back(std::move(r));
    min_rank = std::min(min_rank, t.rank);
    max_rank = std::max(max_rank, t.rank);
  }
  const std::string where = write_output(cfg, o, out);
  out << "check-hormander: model=" << m->name() << " order=" << order << " points=" << pts.size()
      << " rank_min=" << min_rank << " rank_max=" << max_rank << " dim=" << d << " " << summary_seed(cfg) << " -> "
      << where << '\n';
  return 0;
}

int cmd_check_smoothness(const RunConfig& cfg, std::ostream& out) {
  const ModelPtr m = make_model(cfg);
  const OneForm form = make_form(cfg, m);
  const ChartPoint x = point_from(cfg, "check.point", m->dim());
  const int order = static_cast<int>(cfg.integer("check.max_order"));
  const SmoothnessResult r = smoothness_condition(m, form, x, order);
  Output o;
  o.comments.push_back("form: " + form.name);
  o.table.columns = {"satisfied", "witness", "order", "phi_re", "phi_im", "phi_abs"};
  const std::string witness = r.witness ? multi_index_label(*r.witness, m->n()) : "none";
  const std::string w_order = r.witness ? std::to_string(r.witness->size()) : "0";
  o.table.rows.push_back({r.satisfied ? "true" : "false", witness, w_order, num(r.value.real()),
                          num(r.value.imag()), num(std::abs(r.value))});
  const std::string where = write_output(cfg, o, out);
  out << "check-smoothness: form=" << form.name << " max_order=" << order << " "
      << (r.satisfied ? "satisfied, witness " + witness : std::string("not satisfied")) << " "
      << summary_seed(cfg) << " -> " << where << '\n';
  return 0;
}

int cmd_dirichlet(const RunConfig& cfg, std::ostream& out) {
  const ModelPtr m = make_model(cfg);
  const int d = m->dim();
  const Domain dom = koranyi_ball(m->n(), cfg.real("dirichlet.radius"));
  const ChartPoint x0 = point_from(cfg, "sim.start", d);

  ExitConfig ec;
  const double horizon = cfg.real("dirichlet.horizon");
  const double dt = cfg.real("dirichlet.dt");
  const double steps = std::ceil(horizon / dt - 1e-9);
  if (steps > 2e9) throw ConfigError("dirichlet.dt", "too many steps for the horizon");
  ec.sim.n_steps = static_cast<int>(steps);
  ec.sim.t_horizon = ec.sim.n_steps * dt;
  ec.sim.seed = cfg.unsigned_integer("sim.seed");
  ec.sim.reunitarize_every = static_cast<int>(cfg.integer("sim.reunitarize_every"));
  ec.delta_band = cfg.real("dirichlet.delta_band");
  ec.max_refine_levels = static_cast<int>(cfg.integer("dirichlet.max_refine"));
  ec.horizon_threshold = cfg.real("dirichlet.threshold");
  ec.workers = workers(cfg);
  const std::size_t paths = n_paths(cfg);
  const std::string& mode = cfg.text("dirichlet.mode");

  Output o;
  o.comments.push_back("domain: " + dom.name + " R=" + cfg.text("dirichlet.radius"));
  if (mode == "probe") {
    const auto times = cfg.reals("dirichlet.probe_times");
    if (times.empty()) throw ConfigError("dirichlet.probe_times", "no probe times given");
    for (double t : times)
      if (!(t > 0.0)) throw ConfigError("dirichlet.probe_times", "times must be positive");
    if (*std::min_element(times.begin(), times.end()) < dt)
      throw ConfigError("dirichlet.dt", "must not exceed the smallest probe time");
    if (std::abs(dom.phi(x0)) > ec.delta_band) throw ConfigError("sim.start", "probe start is not on the boundary");
    ExitConfig pc = ec;
    pc.sim.t_horizon = dt;  // only dt matters for the probe
    pc.sim.n_steps = 1;
    const auto frac = regularity_probe(*m, dom, x0, times, paths, pc);
    o.table.columns = {"t_probe", "exit_fraction"};
    for (std::size_t i = 0; i < times.size(); ++i) o.table.rows.push_back({num(times[i]), num(frac[i])});
    const std::string where = write_output(cfg, o, out);
    out << "dirichlet: mode=probe paths=" << paths << " fraction_at_first=" << num(frac.front()) << " "
        << summary_seed(cfg) << " -> " << where << '\n';
    return 0;
  }
  if (mode == "exit_time") {
    const ExitTimeEstimate e = mean_exit_time(*m, dom, x0, paths, ec);
    o.table.columns = {"mean_exit_time", "stderr", "horizon_fraction", "flagged"};
    o.table.rows.push_back({num(e.mean), num(e.stderr_), num(e.horizon_fraction), e.flagged ? "true" : "false"});
    const std::string where = write_output(cfg, o, out);
    out << "dirichlet: mode=exit_time paths=" << paths << " mean=" << num(e.mean) << " stderr=" << num(e.stderr_)
        << (e.flagged ? " FLAGGED" : "") << " " << summary_seed(cfg) << " -> " << where << '\n';
    return 0;
  }

  BoundaryData f;
  std::string fname;
  if (cfg.text("dirichlet.boundary") == "constant") {
    const double c = cfg.real("dirichlet.constant");
    f = [c](const ChartPoint&) { return c; };
    fname = "constant " + num(c);
  } else {
    const int k = static_cast<int>(cfg.integer("dirichlet.coordinate"));
    if (k > d) throw ConfigError("dirichlet.coordinate", "exceeds the chart dimension");
    f = [k](const ChartPoint& x) { return x[k - 1]; };
    fname = "coordinate " + m->coordinate_names()[k - 1];
  }
  const auto records = exit_ensemble(*m, x0, dom, ec, paths);
  const DirichletResult r = dirichlet_from_records(records, dom, f, ec.horizon_threshold);
  o.comments.push_back("boundary: " + fname);
  o.table.columns = {"estimate", "stderr", "horizon_fraction", "collar_residual_max", "n_exited", "n_paths",
                     "flagged"};
  o.table.rows.push_back({num(r.estimate), num(r.stderr_), num(r.horizon_fraction), num(r.collar_residual_max),
                          std::to_string(r.n_exited), std::to_string(paths), r.flagged ? "true" : "false"});
  const std::string where = write_output(cfg, o, out);
  std::string rec_where;
  if (cfg.boolean("dirichlet.records")) {
    Output ro;
    ro.table.columns = {"path_id", "tau"};
    for (const auto& c : m->coordinate_names()) ro.table.columns.push_back(c);
    ro.table.columns.push_back("f");
    ro.table.columns.push_back("status");
    for (std::size_t i = 0; i < records.size(); ++i) {
      std::vector<std::string> row{std::to_string(i), num(records[i].tau)};
      for (int k = 0; k < d; ++k) row.push_back(num(records[i].exit_point[k]));
      row.push_back(num(f(records[i].exit_point)));
      row.push_back(to_string(records[i].status));
      ro.table.rows.push_back(std::move(row));
    }
    rec_where = write_output(cfg, ro, out, "_records");
  }
  out << "dirichlet: estimate=" << num(r.estimate) << " stderr=" << num(r.stderr_)
      << " horizon_fraction=" << num(r.horizon_fraction) << " collar_residual_max=" << num(r.collar_residual_max)
      << (r.flagged ? " FLAGGED" : "") << " " << summary_seed(cfg) << " -> " << where
      << (rec_where.empty() ? "" : ", " + rec_where) << '\n';
  return 0;
}

}  // namespace

int run(const RunConfig& cfg, std::ostream& out, std::ostream& /*err*/) {
  const std::string& c = cfg.command();
  if (c == "simulate") return cmd_simulate(cfg, out);
  if (c == "density") return cmd_density(cfg, out);
  if (c == "line-integral") return cmd_line_integral(cfg, out);
  if (c == "charfn") return cmd_charfn(cfg, out);
  if (c == "check-model") return cmd_check_model(cfg, out);
  if (c == "check-hormander") return cmd_check_hormander(cfg, out);
  if (c == "check-smoothness") return cmd_check_smoothness(cfg, out);
  if (c == "dirichlet") return cmd_dirichlet(cfg, out);
  throw ConfigError("run.command", "missing command");
}

int main_entry(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  try {
    const ParsedArgs args = parse_args(argc, argv);
    if (args.help) {
      out << args.help_text;
      return 0;
    }
    if (args.dump_config) {
      out << args.config.to_ini();
      return 0;
    }
    return run(args.config, out, err);
  } catch (const ConfigError& e) {
    err << "crdiff: " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    err << "crdiff: error: " << e.what() << '\n';
    return 1;
  }
}

}  // namespace crdiff::cli
