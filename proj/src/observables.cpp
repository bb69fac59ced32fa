#include "crdiff/observables.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>

namespace crdiff {

DimVector<Complex> OneForm::frame_components(const CrModel& m, const ChartPoint& x) const {
  const int n = m.n();
  const CCovector c = components(x);
  const FrameValues z = m.frame(x);
  DimVector<Complex> xi(2 * n);
  for (int a = 0; a < n; ++a) {
    xi[a] = pairing(c, z.col(a));
    xi[n + a] = pairing(c, z.col(a).conjugate());
  }
  return xi;
}

Complex OneForm::frame_component(const CrModel& m, const ChartPoint& x, FrameIndex a) const {
  return pairing(components(x), m.frame_field(x, a));
}

OneForm OneForm::scaled(double a) const {
  OneForm out;
  out.name = std::to_string(a) + "*" + name;
  out.components = [f = components, a](const ChartPoint& x) -> CCovector { return a * f(x); };
  if (jacobian) out.jacobian = [j = jacobian, a](const ChartPoint& x) -> CJacobian { return a * j(x); };
  return out;
}

OneForm operator+(const OneForm& a, const OneForm& b) {
  OneForm out;
  out.name = a.name + "+" + b.name;
  out.components = [fa = a.components, fb = b.components](const ChartPoint& x) -> CCovector {
    return fa(x) + fb(x);
  };
  if (a.jacobian && b.jacobian)
    out.jacobian = [ja = a.jacobian, jb = b.jacobian](const ChartPoint& x) -> CJacobian {
      return ja(x) + jb(x);
    };
  return out;
}

OneForm theta_form(ModelPtr m) {
  OneForm f;
  f.name = "theta";
  f.components = [m](const ChartPoint& x) { return m->theta(x); };
  return f;
}

OneForm coordinate_form(int dim, int k) {
  if (k < 0 || k >= dim) throw std::invalid_argument("coordinate_form: index out of range");
  OneForm f;
  f.name = "dx" + std::to_string(k + 1);
  f.components = [dim, k](const ChartPoint&) {
    CCovector c = CCovector::Zero(dim);
    c[k] = 1.0;
    return c;
  };
  f.jacobian = [dim](const ChartPoint&) -> CJacobian { return CJacobian::Zero(dim, dim); };
  return f;
}

OneForm half_dz_plus_dzbar(int n, int alpha) {
  OneForm f = coordinate_form(2 * n + 1, 2 * alpha);
  f.name = "half_dz_plus_dzbar" + std::to_string(alpha + 1);
  return f;
}

OneForm area_form(int n, int alpha) {
  const int dim = 2 * n + 1;
  OneForm f;
  f.name = "area" + std::to_string(alpha + 1);
  f.components = [dim, alpha](const ChartPoint& x) {
    CCovector c = CCovector::Zero(dim);
    c[2 * alpha] = -x[2 * alpha + 1];
    c[2 * alpha + 1] = x[2 * alpha];
    return c;
  };
  f.jacobian = [dim, alpha](const ChartPoint&) {
    CJacobian j = CJacobian::Zero(dim, dim);
    j(2 * alpha, 2 * alpha + 1) = -1.0;
    j(2 * alpha + 1, 2 * alpha) = 1.0;
    return j;
  };
  return f;
}

OneForm zero_form(int dim) {
  OneForm f;
  f.name = "zero";
  f.components = [dim](const ChartPoint&) -> CCovector { return CCovector::Zero(dim); };
  f.jacobian = [dim](const ChartPoint&) -> CJacobian { return CJacobian::Zero(dim, dim); };
  return f;
}

LineIntegrator::LineIntegrator(ModelPtr m, OneForm form) : model_(std::move(m)), form_(std::move(form)) {}

DimVector<Complex> LineIntegrator::integrand(const FrameState& s) const {
  const int n = model_->n();
  const DimVector<Complex> xi = form_.frame_components(*model_, s.x);
  DimVector<Complex> g(2 * n);
  g.head(n) = s.e.transpose() * xi.head(n);
  g.tail(n) = s.e.adjoint() * xi.tail(n);
  return g;
}

void LineIntegrator::on_step(const FrameState& before, const FrameState& after, const CVectorN& dB) {
  const int n = model_->n();
  const DimVector<Complex> g = 0.5 * (integrand(before) + integrand(after));
  Complex sum = 0.0;
  for (int a = 0; a < n; ++a) sum += g[a] * dB[a] + g[n + a] * std::conj(dB[a]);
  total_ += sum.real();
}

ObserverFactory line_integral_observer(ModelPtr m, OneForm form) {
  return [m = std::move(m), form = std::move(form)]() -> std::unique_ptr<StepObserver> {
    return std::make_unique<LineIntegrator>(m, form);
  };
}

double line_integral(const ModelPtr& m, const Path& path, const OneForm& form) {
  if (!path.has_full_increments())
    throw std::invalid_argument("line_integral: path has no full-resolution increments");
  LineIntegrator acc(m, form);
  for (std::size_t k = 0; k < path.increments.size(); ++k)
    acc.on_step(path.states[k], path.states[k + 1], path.increments[k]);
  return acc.value();
}

Path reversed(const Path& path) {
  Path out = path;
  std::reverse(out.states.begin(), out.states.end());
  std::reverse(out.increments.begin(), out.increments.end());
  for (auto& db : out.increments) db = -db;
  const double t_end = path.times.empty() ? 0.0 : path.times.back();
  for (std::size_t k = 0; k < out.times.size(); ++k) out.times[k] = t_end - path.times[path.times.size() - 1 - k];
  return out;
}

MeanEstimate mean_with_stderr(const std::vector<double>& values) {
  if (values.empty()) throw Error("mean_with_stderr: no samples");
  MeanEstimate est;
  est.n_used = values.size();
  // shifted by the first sample so that constant data reproduce exactly
  const double shift = values.front();
  double sum = 0.0;
  for (double v : values) sum += v - shift;
  est.mean = shift + sum / values.size();
  if (values.size() > 1) {
    double ss = 0.0;
    for (double v : values) ss += (v - est.mean) * (v - est.mean);
    est.stderr_ = std::sqrt(ss / (values.size() - 1) / values.size());
  }
  return est;
}

MeanEstimate semigroup_average(const Ensemble& ens, const std::function<double(const ChartPoint&)>& f) {
  std::vector<double> vals;
  vals.reserve(ens.n_paths);
  for (std::size_t i = 0; i < ens.n_paths; ++i)
    if (ens.status[i] == PathStatus::completed) vals.push_back(f(ens.terminal[i].x));
  if (vals.empty()) throw Error("semigroup_average: every path was capped");
  MeanEstimate est = mean_with_stderr(vals);
  est.capped_fraction = 1.0 - static_cast<double>(vals.size()) / ens.n_paths;
  return est;
}

MeanEstimate variance_with_stderr(const std::vector<double>& values) {
  if (values.size() < 2) throw Error("variance_with_stderr: need at least two samples");
  const double n = static_cast<double>(values.size());
  const double mean = mean_with_stderr(values).mean;
  double m2 = 0.0, m4 = 0.0;
  for (double v : values) {
    const double d2 = (v - mean) * (v - mean);
    m2 += d2;
    m4 += d2 * d2;
  }
  MeanEstimate est;
  est.n_used = values.size();
  est.mean = m2 / (n - 1.0);
  const double var_pop = m2 / n;
  est.stderr_ = std::sqrt(std::max(m4 / n - var_pop * var_pop, 0.0) / n);
  return est;
}

ChartPoint scott_bandwidth(const std::vector<ChartPoint>& samples) {
  if (samples.size() < 2) throw Error("scott_bandwidth: need at least two samples");
  const int d = static_cast<int>(samples.front().size());
  const double n = static_cast<double>(samples.size());
  ChartPoint mean = ChartPoint::Zero(d);
  for (const auto& s : samples) mean += s;
  mean /= n;
  ChartPoint var = ChartPoint::Zero(d);
  for (const auto& s : samples) var += (s - mean).cwiseAbs2();
  var /= (n - 1.0);
  return var.cwiseSqrt() * std::pow(n, -1.0 / (d + 4));
}

double DensityEstimate::integral(const CrModel& m) const {
  double total = 0.0;
  for (std::size_t i = 0; i < values.size(); ++i) total += values[i] * m.volume_density(grid_point(i));
  return total * cell_volume;
}

ChartPoint DensityEstimate::grid_point(std::size_t flat_index) const {
  const int d = static_cast<int>(axes.size());
  ChartPoint p(d);
  for (int k = d - 1; k >= 0; --k) {
    const std::size_t len = axes[k].size();
    p[k] = axes[k][flat_index % len];
    flat_index /= len;
  }
  return p;
}

namespace {

constexpr double kKernelCutoff = 6.0;  // bandwidths

}  // namespace

DensityEstimate estimate_density(const CrModel& m, const std::vector<ChartPoint>& samples,
                                 const DensityWindow& window, std::optional<ChartPoint> bandwidth) {
  if (samples.size() < 100) throw Error("estimate_density: need at least 100 samples");
  const int d = m.dim();
  if (window.lower.size() != d || window.upper.size() != d || static_cast<int>(window.points.size()) != d)
    throw std::invalid_argument("estimate_density: window dimension mismatch");

  DensityEstimate est;
  est.n_samples = samples.size();
  est.bandwidth = bandwidth ? *bandwidth : scott_bandwidth(samples);
  if ((est.bandwidth.array() <= 0.0).any()) throw Error("estimate_density: nonpositive bandwidth");

  std::size_t inside = 0;
  for (const auto& s : samples)
    inside += (s.array() >= window.lower.array()).all() && (s.array() <= window.upper.array()).all();
  if (inside == 0) throw Error("estimate_density: no samples inside the window");

  est.axes.resize(d);
  std::vector<double> spacing(d);
  std::size_t total = 1;
  for (int k = 0; k < d; ++k) {
    const int np = window.points[k];
    if (np < 2) throw std::invalid_argument("estimate_density: need >= 2 grid points per axis");
    spacing[k] = (window.upper[k] - window.lower[k]) / (np - 1);
    est.axes[k].resize(np);
    for (int i = 0; i < np; ++i) est.axes[k][i] = window.lower[k] + i * spacing[k];
    est.cell_volume *= spacing[k];
    total *= np;
  }
  est.values.assign(total, 0.0);

  std::vector<std::size_t> stride(d, 1);
  for (int k = d - 2; k >= 0; --k) stride[k] = stride[k + 1] * est.axes[k + 1].size();

  double norm = 1.0 / samples.size();
  for (int k = 0; k < d; ++k) norm /= std::sqrt(2.0 * std::numbers::pi) * est.bandwidth[k];

  // Each thread owns a slab of the first axis and visits samples in order, so
  // the sum in every cell is formed in the same order for any thread count.
  const long long first_len = static_cast<long long>(est.axes[0].size());
#pragma omp parallel for schedule(static)
  for (long long i0 = 0; i0 < first_len; ++i0) {
    std::vector<std::vector<double>> w(d);
    std::vector<int> lo(d), hi(d), idx(d);
    for (const auto& s : samples) {
      if (std::abs(est.axes[0][i0] - s[0]) > kKernelCutoff * est.bandwidth[0]) continue;
      const double w0 = std::exp(-0.5 * std::pow((est.axes[0][i0] - s[0]) / est.bandwidth[0], 2));
      bool empty = false;
      for (int k = 1; k < d; ++k) {
        const double h = est.bandwidth[k];
        const int np = static_cast<int>(est.axes[k].size());
        lo[k] = std::max(0, static_cast<int>(std::ceil((s[k] - kKernelCutoff * h - window.lower[k]) / spacing[k])));
        hi[k] = std::min(np - 1, static_cast<int>(std::floor((s[k] + kKernelCutoff * h - window.lower[k]) / spacing[k])));
        if (lo[k] > hi[k]) {
          empty = true;
          break;
        }
        w[k].resize(hi[k] - lo[k] + 1);
        for (int i = lo[k]; i <= hi[k]; ++i) w[k][i - lo[k]] = std::exp(-0.5 * std::pow((est.axes[k][i] - s[k]) / h, 2));
      }
      if (empty) continue;
      // odometer over the remaining axes
      for (int k = 1; k < d; ++k) idx[k] = lo[k];
      while (true) {
        double weight = w0;
        std::size_t flat = static_cast<std::size_t>(i0) * stride[0];
        for (int k = 1; k < d; ++k) {
          weight *= w[k][idx[k] - lo[k]];
          flat += idx[k] * stride[k];
        }
        est.values[flat] += weight;
        int k = d - 1;
        while (k >= 1 && ++idx[k] > hi[k]) {
          idx[k] = lo[k];
          --k;
        }
        if (k < 1) break;
      }
    }
  }
  for (std::size_t i = 0; i < total; ++i) est.values[i] *= norm / m.volume_density(est.grid_point(i));
  return est;
}

double density_at(const CrModel& m, const std::vector<ChartPoint>& samples, const ChartPoint& bandwidth,
                  const ChartPoint& y) {
  if (samples.empty()) throw Error("density_at: no samples");
  const int d = static_cast<int>(y.size());
  double sum = 0.0;
  for (const auto& s : samples) sum += std::exp(-0.5 * ((s - y).array() / bandwidth.array()).square().sum());
  double norm = 1.0 / samples.size();
  for (int k = 0; k < d; ++k) norm /= std::sqrt(2.0 * std::numbers::pi) * bandwidth[k];
  return sum * norm / m.volume_density(y);
}

std::vector<CharFnValue> char_function(const std::vector<double>& samples, const std::vector<double>& lambdas) {
  std::vector<CharFnValue> out;
  std::vector<double> re(samples.size()), im(samples.size());
  for (double lam : lambdas) {
    for (std::size_t i = 0; i < samples.size(); ++i) {
      re[i] = std::cos(lam * samples[i]);
      im[i] = std::sin(lam * samples[i]);
    }
    const MeanEstimate r = mean_with_stderr(re);
    const MeanEstimate s = mean_with_stderr(im);
    out.push_back({lam, Complex(r.mean, s.mean), r.stderr_, s.stderr_});
  }
  return out;
}

double ks_distance(std::vector<double> a, std::vector<double> b) {
  if (a.empty() || b.empty()) throw Error("ks_distance: empty sample");
  std::sort(a.begin(), a.end());
  std::sort(b.begin(), b.end());
  const double na = static_cast<double>(a.size());
  const double nb = static_cast<double>(b.size());
  std::size_t i = 0, j = 0;
  double best = 0.0;
  while (i < a.size() && j < b.size()) {
    const double x = std::min(a[i], b[j]);
    while (i < a.size() && a[i] <= x) ++i;
    while (j < b.size() && b[j] <= x) ++j;
    best = std::max(best, std::abs(i / na - j / nb));
  }
  return best;
}

double max_bin_mass(const std::vector<double>& samples, double width) {
  if (samples.empty()) return 0.0;
  std::vector<long long> bins(samples.size());
  for (std::size_t i = 0; i < samples.size(); ++i) bins[i] = static_cast<long long>(std::floor(samples[i] / width));
  std::sort(bins.begin(), bins.end());
  std::size_t best = 0;
  for (std::size_t i = 0; i < bins.size();) {
    std::size_t j = i;
    while (j < bins.size() && bins[j] == bins[i]) ++j;
    best = std::max(best, j - i);
    i = j;
  }
  return static_cast<double>(best) / samples.size();
}

}  // namespace crdiff
