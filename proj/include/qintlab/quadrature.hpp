#pragma once

// Tensor-product midpoint rules and the piecewise-polynomial projection P_n
// used to split an integral into an exactly integrable part and a small
// residual.

#include <cmath>
#include <cstdint>
#include <memory>
#include <span>
#include <vector>

#include "qintlab/holder.hpp"

namespace qintlab::quadrature {

using holder::HolderClassSpec;
using holder::HolderFunction;

inline constexpr unsigned max_degree = 3;
inline constexpr unsigned max_dimension = 4;
inline constexpr unsigned probe_oversampling = 8;

/// Midpoint of cell `i` along one axis with `cells` cells.
inline double cell_midpoint(std::uint64_t i, std::uint64_t cells) {
  return (2.0 * static_cast<double>(i) + 1.0) / (2.0 * static_cast<double>(cells));
}

/// Visits every midpoint of the l^d grid; `visit` receives the point.
template <class Visitor>
void for_each_midpoint(unsigned d, std::uint64_t cells_per_axis, Visitor&& visit) {
  std::vector<std::uint64_t> idx(d, 0);
  std::vector<double> x(d, cell_midpoint(0, cells_per_axis));
  for (;;) {
    visit(std::span<const double>(x));
    unsigned a = d;
    while (a-- > 0) {
      if (++idx[a] < cells_per_axis) {
        x[a] = cell_midpoint(idx[a], cells_per_axis);
        break;
      }
      idx[a] = 0;
      x[a] = cell_midpoint(0, cells_per_axis);
    }
    if (a == static_cast<unsigned>(-1)) return;
  }
}

/// Q_n^d(f): average of f over the midpoints of the l^d uniform cells.
inline double midpoint_rule(const HolderFunction& f, unsigned d, std::uint64_t cells_per_axis,
                            ResourceLedger* ledger = nullptr) {
  if (cells_per_axis < 1) throw domain_error("midpoint_rule: need at least one cell per axis");
  double sum = 0.0;
  std::uint64_t count = 0;
  for_each_midpoint(d, cells_per_axis, [&](std::span<const double> x) {
    sum += f(x);
    ++count;
  });
  charge_evals(ledger, count);
  return sum / static_cast<double>(count);
}

namespace detail {

/// Equispaced interior nodes (j + 1/2)/(k + 1) on [0,1].
inline std::vector<double> local_nodes(unsigned k) {
  std::vector<double> t(k + 1);
  for (unsigned j = 0; j <= k; ++j) t[j] = (j + 0.5) / (k + 1.0);
  return t;
}

/// Integrals over [0,1] of the Lagrange basis polynomials on `nodes`,
/// obtained by expanding each basis polynomial into monomials.
inline std::vector<double> lagrange_weights(const std::vector<double>& nodes) {
  const std::size_t n = nodes.size();
  std::vector<double> w(n);
  for (std::size_t j = 0; j < n; ++j) {
    std::vector<double> poly{1.0};
    double denom = 1.0;
    for (std::size_t i = 0; i < n; ++i) {
      if (i == j) continue;
      std::vector<double> next(poly.size() + 1, 0.0);
      for (std::size_t p = 0; p < poly.size(); ++p) {
        next[p + 1] += poly[p];
        next[p] -= nodes[i] * poly[p];
      }
      poly = std::move(next);
      denom *= nodes[j] - nodes[i];
    }
    double integral = 0.0;
    for (std::size_t p = 0; p < poly.size(); ++p) integral += poly[p] / static_cast<double>(p + 1);
    w[j] = integral / denom;
  }
  return w;
}

inline void lagrange_values(const std::vector<double>& nodes, double t, std::span<double> out) {
  for (std::size_t j = 0; j < nodes.size(); ++j) {
    double v = 1.0;
    for (std::size_t i = 0; i < nodes.size(); ++i)
      if (i != j) v *= (t - nodes[i]) / (nodes[j] - nodes[i]);
    out[j] = v;
  }
}

}  // namespace detail

/// P_n f: on each of the l^d uniform cells, the degree-k tensor Lagrange
/// interpolant through (k + 1)^d equispaced interior nodes.
class PiecewiseInterpolant {
 public:
  PiecewiseInterpolant(HolderClassSpec spec, std::uint64_t cells_per_axis, std::vector<double> values)
      : spec_(spec),
        cells_(cells_per_axis),
        nodes_(detail::local_nodes(spec.k)),
        weights_(detail::lagrange_weights(nodes_)),
        values_(std::move(values)) {
    local_ = holder::detail::ipow(spec.k + 1, spec.d);
    if (values_.size() != holder::detail::ipow(cells_, spec.d) * local_)
      throw domain_error("PiecewiseInterpolant: coefficient count mismatch");
  }

  const HolderClassSpec& spec() const { return spec_; }
  std::uint64_t cells_per_axis() const { return cells_; }
  std::uint64_t n_points() const { return values_.size(); }
  std::span<const double> coefficients() const { return values_; }
  const std::vector<double>& local_nodes() const { return nodes_; }

  /// Position of local node `node` (per-axis indices) in cell `cell`.
  void node_point(std::span<const std::uint64_t> cell, std::span<const unsigned> node, std::span<double> out) const {
    const double h = 1.0 / static_cast<double>(cells_);
    for (unsigned a = 0; a < spec_.d; ++a) out[a] = (static_cast<double>(cell[a]) + nodes_[node[a]]) * h;
  }

  /// O((k + 1)^d) evaluation, independent of the number of cells.
  double operator()(std::span<const double> x) const {
    const unsigned d = spec_.d, m = spec_.k + 1;
    std::uint64_t cell = 0;
    double basis[max_dimension][max_degree + 1];
    for (unsigned a = 0; a < d; ++a) {
      const double s = x[a] * static_cast<double>(cells_);
      auto c = static_cast<std::uint64_t>(std::floor(s));
      if (c >= cells_) c = cells_ - 1;
      cell = cell * cells_ + c;
      detail::lagrange_values(nodes_, s - static_cast<double>(c), std::span<double>(basis[a], m));
    }
    const double* coeff = values_.data() + cell * local_;
    double sum = 0.0;
    for (std::uint64_t j = 0; j < local_; ++j) {
      double w = 1.0;
      std::uint64_t rem = j;
      for (unsigned a = d; a-- > 0;) {
        w *= basis[a][rem % m];
        rem /= m;
      }
      sum += w * coeff[j];
    }
    return sum;
  }

  /// I(P_n f), from the closed-form integrals of the local basis.
  double exact_integral() const {
    const unsigned d = spec_.d, m = spec_.k + 1;
    std::vector<double> node_weight(local_);
    for (std::uint64_t j = 0; j < local_; ++j) {
      double w = 1.0;
      std::uint64_t rem = j;
      for (unsigned a = 0; a < d; ++a) {
        w *= weights_[rem % m];
        rem /= m;
      }
      node_weight[j] = w;
    }
    double sum = 0.0;
    for (std::size_t i = 0; i < values_.size(); ++i) sum += node_weight[i % local_] * values_[i];
    return sum / static_cast<double>(holder::detail::ipow(cells_, d));
  }

 private:
  HolderClassSpec spec_;
  std::uint64_t cells_;
  std::vector<double> nodes_;
  std::vector<double> weights_;
  std::vector<double> values_;
  std::uint64_t local_ = 1;
};

/// Largest cell count l with l^d (k + 1)^d <= n_target.
inline std::uint64_t cells_for_budget(const HolderClassSpec& spec, std::uint64_t n_target) {
  const std::uint64_t local = holder::detail::ipow(spec.k + 1, spec.d);
  if (n_target < local) throw domain_error("interpolate: node budget below (k + 1)^d");
  return holder::integer_root(n_target / local, spec.d);
}

/// P_n f using at most n_target function values.
inline PiecewiseInterpolant interpolate(const HolderFunction& f, std::uint64_t n_target,
                                        ResourceLedger* ledger = nullptr) {
  const HolderClassSpec& spec = f.spec;
  if (spec.k > max_degree) throw domain_error("interpolate: k above supported maximum");
  if (spec.d > max_dimension) throw domain_error("interpolate: d above supported maximum");
  const std::uint64_t cells = cells_for_budget(spec, n_target);
  const unsigned d = spec.d, m = spec.k + 1;
  const std::uint64_t local = holder::detail::ipow(m, d);
  const std::uint64_t n_cells = holder::detail::ipow(cells, d);
  const std::vector<double> nodes = detail::local_nodes(spec.k);
  const double h = 1.0 / static_cast<double>(cells);

  std::vector<double> values(n_cells * local);
  std::vector<double> x(d);
  for (std::uint64_t c = 0; c < n_cells; ++c) {
    for (std::uint64_t j = 0; j < local; ++j) {
      std::uint64_t crem = c, jrem = j;
      for (unsigned a = d; a-- > 0;) {
        x[a] = (static_cast<double>(crem % cells) + nodes[jrem % m]) * h;
        crem /= cells;
        jrem /= m;
      }
      values[c * local + j] = f(x);
    }
  }
  charge_evals(ledger, values.size());
  return PiecewiseInterpolant(spec, cells, std::move(values));
}

/// g = f - P_n f. One evaluation costs one f value plus a local polynomial
/// evaluation.
inline HolderFunction residual(const HolderFunction& f, std::shared_ptr<const PiecewiseInterpolant> p) {
  HolderFunction g;
  g.name = "residual(" + f.name + ")";
  g.spec = f.spec;
  if (f.exact_integral) g.exact_integral = *f.exact_integral - p->exact_integral();
  g.evaluator = [e = f.evaluator, p](std::span<const double> x) { return e(x) - (*p)(x); };
  return g;
}

inline HolderFunction as_function(std::shared_ptr<const PiecewiseInterpolant> p) {
  const double integral = p->exact_integral();
  return {"interpolant", p->spec(), [p](std::span<const double> x) { return (*p)(x); }, integral};
}

/// max |g| over the closed grid {j / per_axis}^d.
inline double probe_sup(const holder::Evaluator& g, unsigned d, std::uint64_t per_axis) {
  const std::uint64_t pts = per_axis + 1;
  std::vector<std::uint64_t> idx(d, 0);
  std::vector<double> x(d, 0.0);
  double sup = 0.0;
  for (;;) {
    sup = std::max(sup, std::abs(g(x)));
    unsigned a = d;
    while (a-- > 0) {
      if (++idx[a] < pts) {
        x[a] = static_cast<double>(idx[a]) / static_cast<double>(per_axis);
        break;
      }
      idx[a] = 0;
      x[a] = 0.0;
    }
    if (a == static_cast<unsigned>(-1)) return sup;
  }
}

/// Probe-grid estimate of sup |f - P_n f| at 8x the cell resolution.
inline double residual_sup(const HolderFunction& f, const PiecewiseInterpolant& p) {
  return probe_sup([&](std::span<const double> x) { return f(x) - p(x); }, p.spec().d,
                   probe_oversampling * p.cells_per_axis());
}

}  // namespace qintlab::quadrature
