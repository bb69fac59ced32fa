#include "crdiff/hypo_check.hpp"

#include <stdexcept>

namespace crdiff {

std::string multi_index_label(const MultiIndex& idx, int n) {
  std::string s = "(";
  for (std::size_t i = 0; i < idx.size(); ++i) {
    if (i) s += ",";
    s += frame_label(idx[i], n);
  }
  return s + ")";
}

namespace {

double fd_step(int fd_depth) { return fd_depth == 0 ? kFdStep : kNestedFdStep; }

void require_in_chart(const CrModel& m, const ChartPoint& x) {
  if (!m.in_chart(x)) throw ChartError("finite-difference stencil leaves the chart");
}

std::vector<FrameIndex> horizontal_indices(int n) {
  std::vector<FrameIndex> out;
  for (int a = 0; a < n; ++a) out.push_back(FrameIndex::holomorphic(a));
  for (int a = 0; a < n; ++a) out.push_back(FrameIndex::antiholomorphic(a, n));
  return out;
}

}  // namespace

VectorField frame_vector_field(const ModelPtr& m, FrameIndex a, bool allow_analytic) {
  VectorField f;
  f.eval = [m, a](const ChartPoint& x) { return m->frame_field(x, a); };
  if (allow_analytic && !a.is_characteristic()) {
    const int n = m->n();
    const int alpha = a.alpha(n);
    const bool barred = a.is_barred(n);
    if (m->frame_jacobian(ChartPoint::Zero(m->dim()), alpha)) {
      f.jacobian = [m, alpha, barred](const ChartPoint& x) -> CJacobian {
        const CJacobian j = *m->frame_jacobian(x, alpha);
        return barred ? CJacobian(j.conjugate()) : j;
      };
    }
  }
  return f;
}

CJacobian field_jacobian(const CrModel& m, const VectorField& f, const ChartPoint& x) {
  if (f.jacobian) return f.jacobian(x);
  const int d = m.dim();
  const double h = fd_step(f.fd_depth);
  CJacobian j(d, d);
  for (int k = 0; k < d; ++k) {
    ChartPoint xp = x, xm = x;
    xp[k] += h;
    xm[k] -= h;
    require_in_chart(m, xp);
    require_in_chart(m, xm);
    j.col(k) = (f.eval(xp) - f.eval(xm)) / (2.0 * h);
  }
  return j;
}

DimVector<Complex> field_gradient(const CrModel& m, const ScalarField& f, const ChartPoint& x) {
  if (f.gradient) return f.gradient(x);
  const int d = m.dim();
  const double h = fd_step(f.fd_depth);
  DimVector<Complex> g(d);
  for (int k = 0; k < d; ++k) {
    ChartPoint xp = x, xm = x;
    xp[k] += h;
    xm[k] -= h;
    require_in_chart(m, xp);
    require_in_chart(m, xm);
    g[k] = (f.eval(xp) - f.eval(xm)) / (2.0 * h);
  }
  return g;
}

VectorField bracket_field(const ModelPtr& m, const VectorField& a, const VectorField& b) {
  VectorField out;
  out.eval = [m, a, b](const ChartPoint& x) -> CTangent {
    return field_jacobian(*m, b, x) * a.eval(x) - field_jacobian(*m, a, x) * b.eval(x);
  };
  const int da = a.jacobian ? a.fd_depth : a.fd_depth + 1;
  const int db = b.jacobian ? b.fd_depth : b.fd_depth + 1;
  out.fd_depth = std::max(da, db);
  return out;
}

VectorField nested_bracket_field(const ModelPtr& m, const MultiIndex& idx, bool allow_analytic) {
  if (idx.empty()) throw std::invalid_argument("nested_bracket_field: empty multi-index");
  VectorField f = frame_vector_field(m, idx.back(), allow_analytic);
  for (auto it = idx.rbegin() + 1; it != idx.rend(); ++it)
    f = bracket_field(m, frame_vector_field(m, *it, allow_analytic), f);
  return f;
}

CTangent lie_bracket(const ModelPtr& m, FrameIndex a, FrameIndex b, const ChartPoint& x, bool force_fd) {
  return nested_bracket_field(m, {a, b}, !force_fd).eval(x);
}

BracketTable span_rank(const ModelPtr& m, const ChartPoint& x, int max_bracket_order) {
  if (max_bracket_order < 1) throw std::invalid_argument("span_rank: max_bracket_order must be >= 1");
  const int n = m->n();
  const int d = m->dim();
  const auto letters = horizontal_indices(n);

  std::vector<CTangent> fields;
  BracketTable table;
  table.x = x;
  for (int order = 1; order <= max_bracket_order; ++order) {
    MultiIndex idx(order, letters.front());
    std::vector<int> digit(order, 0);
    while (true) {
      for (int i = 0; i < order; ++i) idx[i] = letters[digit[i]];
      // order 1 only needs Z_alpha: the conjugates add no new real directions
      if (order > 1 || !idx[0].is_barred(n)) {
        fields.push_back(nested_bracket_field(m, idx).eval(x));
        table.labels.push_back("Re" + multi_index_label(idx, n));
        table.labels.push_back("Im" + multi_index_label(idx, n));
      }
      int k = order - 1;
      while (k >= 0 && ++digit[k] == static_cast<int>(letters.size())) digit[k--] = 0;
      if (k < 0) break;
    }
  }

  table.vectors.resize(d, 2 * static_cast<Eigen::Index>(fields.size()));
  for (std::size_t i = 0; i < fields.size(); ++i) {
    table.vectors.col(2 * i) = fields[i].real();
    table.vectors.col(2 * i + 1) = fields[i].imag();
  }
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(table.vectors);
  table.singular_values = svd.singularValues();
  const double smax = table.singular_values.size() ? table.singular_values[0] : 0.0;
  table.rank = 0;
  if (smax > 0.0)
    for (Eigen::Index i = 0; i < table.singular_values.size(); ++i)
      table.rank += table.singular_values[i] > kRankTolerance * smax;
  return table;
}

namespace {

ScalarField frame_component_field(const ModelPtr& m, const OneForm& form, FrameIndex a) {
  ScalarField f;
  f.eval = [m, form, a](const ChartPoint& x) { return form.frame_component(*m, x, a); };
  const VectorField z = frame_vector_field(m, a);
  if (form.jacobian && z.jacobian) {
    f.gradient = [m, form, z](const ChartPoint& x) -> DimVector<Complex> {
      // d_j (c_k Z^k) = (dc_k/dx^j) Z^k + c_k dZ^k/dx^j
      return form.jacobian(x).transpose() * z.eval(x) + z.jacobian(x).transpose() * form.components(x);
    };
  }
  return f;
}

int gradient_depth(const ScalarField& f) { return f.gradient ? f.fd_depth : f.fd_depth + 1; }

}  // namespace

ScalarField phi_field(const ModelPtr& m, const OneForm& form, const MultiIndex& idx) {
  if (idx.empty()) throw std::invalid_argument("phi_field: empty multi-index");
  for (FrameIndex a : idx)
    if (a.is_characteristic()) throw std::invalid_argument("phi_field: indices must be horizontal");
  const ScalarField xi_first = frame_component_field(m, form, idx.front());
  if (idx.size() == 1) return xi_first;

  const MultiIndex tail(idx.begin() + 1, idx.end());
  const ScalarField rest = phi_field(m, form, tail);
  const VectorField bracket = nested_bracket_field(m, tail);
  const VectorField lead = frame_vector_field(m, idx.front());

  ScalarField f;
  f.eval = [m, rest, bracket, lead, xi_first](const ChartPoint& x) -> Complex {
    return pairing(field_gradient(*m, rest, x), lead.eval(x)) -
           pairing(field_gradient(*m, xi_first, x), bracket.eval(x));
  };
  f.fd_depth = std::max({gradient_depth(rest), gradient_depth(xi_first), bracket.fd_depth});
  return f;
}

Complex phi_functional(const ModelPtr& m, const OneForm& form, const MultiIndex& idx, const ChartPoint& x) {
  return phi_field(m, form, idx).eval(x);
}

SmoothnessResult smoothness_condition(const ModelPtr& m, const OneForm& form, const ChartPoint& x, int max_order) {
  if (max_order < 1) throw std::invalid_argument("smoothness_condition: max_order must be >= 1");
  const auto letters = horizontal_indices(m->n());
  SmoothnessResult result;
  for (int order = 1; order <= max_order; ++order) {
    std::vector<int> digit(order, 0);
    MultiIndex idx(order, letters.front());
    while (true) {
      for (int i = 0; i < order; ++i) idx[i] = letters[digit[i]];
      const Complex v = phi_functional(m, form, idx, x);
      if (std::abs(v) > kPhiThreshold) {
        result.satisfied = true;
        result.witness = idx;
        result.value = v;
        return result;
      }
      int k = order - 1;
      while (k >= 0 && ++digit[k] == static_cast<int>(letters.size())) digit[k--] = 0;
      if (k < 0) break;
    }
  }
  return result;
}

}  // namespace crdiff
