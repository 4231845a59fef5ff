#pragma once

// Hölder classes F_d^{k,alpha} on [0,1]^d: functions bounded by 1 whose
// order-k partial derivatives satisfy |D^i f(x) - D^i f(y)| <= |x - y|^alpha.
//
// Membership is checked numerically on a grid. Benchmark functions with
// closed-form integrals and the disjoint-support bump family used as a hard
// instance for integration rules live here too.

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <memory>
#include <numbers>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "qintlab/core.hpp"

namespace qintlab::holder {

struct HolderClassSpec {
  unsigned d = 1;
  unsigned k = 0;
  double alpha = 1.0;
  double gamma = 1.0;  // (k + alpha) / d
};

inline HolderClassSpec make_spec(unsigned d, unsigned k, double alpha) {
  if (d < 1) throw domain_error("make_spec: d must be at least 1");
  if (!(alpha > 0.0 && alpha <= 1.0)) throw domain_error("make_spec: alpha must lie in (0, 1]");
  return {d, k, alpha, (static_cast<double>(k) + alpha) / static_cast<double>(d)};
}

using Evaluator = std::function<double(std::span<const double>)>;

/// A d-variate function tagged with the class it is meant to belong to.
struct HolderFunction {
  std::string name;
  HolderClassSpec spec;
  Evaluator evaluator;
  std::optional<double> exact_integral;

  double operator()(std::span<const double> x) const { return evaluator(x); }

  double operator()(std::span<const double> x, ResourceLedger* ledger) const {
    charge_evals(ledger, 1);
    return evaluator(x);
  }

  HolderFunction scaled(double c) const {
    HolderFunction g{name, spec, [e = evaluator, c](std::span<const double> x) { return c * e(x); }, std::nullopt};
    if (exact_integral) g.exact_integral = c * *exact_integral;
    return g;
  }
};

inline constexpr double membership_tolerance = 0.05;

struct MembershipReport {
  bool pass = false;
  double sup_norm = 0.0;
  /// Largest |D^i f(x) - D^i f(y)| / |x - y|^alpha over sampled pairs.
  double worst_ratio = 0.0;
  std::vector<double> witness_x;
  std::vector<double> witness_y;
  unsigned resolution = 0;
};

namespace detail {

inline std::uint64_t ipow(std::uint64_t base, unsigned exp) {
  std::uint64_t r = 1;
  for (unsigned i = 0; i < exp; ++i) r *= base;
  return r;
}

/// All multi-indices of length d with entries summing to k.
inline std::vector<std::vector<unsigned>> multi_indices(unsigned d, unsigned k) {
  std::vector<std::vector<unsigned>> out;
  std::vector<unsigned> cur(d, 0);
  std::function<void(unsigned, unsigned)> rec = [&](unsigned axis, unsigned left) {
    if (axis + 1 == d) {
      cur[axis] = left;
      out.push_back(cur);
      return;
    }
    for (unsigned v = 0; v <= left; ++v) {
      cur[axis] = v;
      rec(axis + 1, left - v);
    }
  };
  rec(0, k);
  return out;
}

/// Neighbourhood offsets: the positive half of {-1,0,1}^d plus dyadic
/// strides along each axis.
inline std::vector<std::vector<int>> pair_offsets(unsigned d, unsigned resolution) {
  std::vector<std::vector<int>> out;
  const std::uint64_t total = ipow(3, d);
  for (std::uint64_t code = 0; code < total; ++code) {
    std::vector<int> o(d);
    std::uint64_t c = code;
    for (unsigned a = d; a-- > 0;) {
      o[a] = static_cast<int>(c % 3) - 1;
      c /= 3;
    }
    auto first = std::find_if(o.begin(), o.end(), [](int v) { return v != 0; });
    if (first != o.end() && *first > 0) out.push_back(o);
  }
  for (unsigned a = 0; a < d; ++a) {
    for (unsigned s = 2; s < resolution; s *= 2) {
      std::vector<int> o(d, 0);
      o[a] = static_cast<int>(s);
      out.push_back(o);
    }
  }
  return out;
}

}  // namespace detail

/// Samples f on the grid {j/(r-1)}^d, forms order-k forward divided
/// differences for every multi-index of order k, and reports the sup norm and
/// the worst Hölder quotient between neighbouring grid points. Passes when
/// sup <= 1 and quotient <= 1 + tol.
inline MembershipReport verify_membership(const HolderFunction& f, unsigned resolution,
                                          double tol = membership_tolerance) {
  const unsigned d = f.spec.d, k = f.spec.k;
  const double alpha = f.spec.alpha;
  if (resolution < 2) throw domain_error("verify_membership: need at least 2 points per axis");
  if (detail::ipow(resolution, d) > (std::uint64_t{1} << 26))
    throw domain_error("verify_membership: grid too large");

  const std::size_t total = detail::ipow(resolution, d);
  const double h = 1.0 / static_cast<double>(resolution - 1);
  std::vector<std::size_t> stride(d);
  for (unsigned a = 0; a < d; ++a) stride[a] = detail::ipow(resolution, d - 1 - a);

  auto coords = [&](std::size_t idx, std::vector<unsigned>& out) {
    for (unsigned a = 0; a < d; ++a) {
      out[a] = static_cast<unsigned>((idx / stride[a]) % resolution);
    }
  };
  auto point = [&](const std::vector<unsigned>& c) {
    std::vector<double> x(d);
    for (unsigned a = 0; a < d; ++a) x[a] = c[a] * h;
    return x;
  };

  MembershipReport report;
  report.resolution = resolution;
  std::vector<double> values(total);
  std::vector<unsigned> c(d), cq(d);
  std::vector<double> x(d);
  for (std::size_t idx = 0; idx < total; ++idx) {
    coords(idx, c);
    for (unsigned a = 0; a < d; ++a) x[a] = c[a] * h;
    values[idx] = f(x);
    if (std::abs(values[idx]) > report.sup_norm) {
      report.sup_norm = std::abs(values[idx]);
      if (report.sup_norm > 1.0) {
        report.witness_x = x;
        report.witness_y.clear();
      }
    }
  }

  const auto offsets = detail::pair_offsets(d, resolution);
  std::vector<double> denom;
  for (const auto& o : offsets) {
    double dist2 = 0.0;
    for (int v : o) dist2 += static_cast<double>(v) * v;
    denom.push_back(std::pow(std::sqrt(dist2) * h, alpha));
  }
  for (const auto& mi : detail::multi_indices(d, k)) {
    std::vector<double> deriv = values;
    std::vector<unsigned> extent(d, resolution);
    for (unsigned a = 0; a < d; ++a) {
      for (unsigned rep = 0; rep < mi[a]; ++rep) {
        if (extent[a] < 2) break;
        for (std::size_t idx = 0; idx < total; ++idx) {
          coords(idx, c);
          bool inside = true;
          for (unsigned b = 0; b < d; ++b) inside = inside && c[b] < extent[b];
          if (!inside || c[a] + 1 >= extent[a]) continue;
          deriv[idx] = (deriv[idx + stride[a]] - deriv[idx]) / h;
        }
        --extent[a];
      }
    }
    for (std::size_t idx = 0; idx < total; ++idx) {
      coords(idx, c);
      bool inside = true;
      for (unsigned b = 0; b < d; ++b) inside = inside && c[b] < extent[b];
      if (!inside) continue;
      for (std::size_t oi = 0; oi < offsets.size(); ++oi) {
        const auto& o = offsets[oi];
        bool ok = true;
        std::size_t qidx = 0;
        for (unsigned b = 0; b < d; ++b) {
          const long long v = static_cast<long long>(c[b]) + o[b];
          if (v < 0 || v >= static_cast<long long>(extent[b])) {
            ok = false;
            break;
          }
          cq[b] = static_cast<unsigned>(v);
          qidx += cq[b] * stride[b];
        }
        if (!ok) continue;
        const double ratio = std::abs(deriv[idx] - deriv[qidx]) / denom[oi];
        if (ratio > report.worst_ratio) {
          report.worst_ratio = ratio;
          if (report.sup_norm <= 1.0) {
            report.witness_x = point(c);
            report.witness_y = point(cq);
          }
        }
      }
    }
  }
  report.pass = report.sup_norm <= 1.0 + 1e-12 && report.worst_ratio <= 1.0 + tol;
  return report;
}

/// Grid resolution used to calibrate scale constants.
inline unsigned calibration_resolution(unsigned d) { return d <= 3 ? 64 : 16; }

/// Largest multiple of 2^-10, capped at 1, keeping the measured
/// max(sup, quotient) times the multiple at or below 1 - tol.
inline double dyadic_scale(double measured, double tol = membership_tolerance) {
  if (measured <= 0.0) return 1.0;
  const double c = std::floor((1.0 - tol) / measured * 1024.0) / 1024.0;
  return std::min(1.0, c);
}

/// Benchmark functions for a class, each rescaled into the class by its
/// measured constant: const, product, cosine, sumsq, exp and rough
/// ((1/d) sum |x_j - 1/2|^{k+alpha}, tight for the class).
inline std::vector<HolderFunction> test_suite(const HolderClassSpec& spec) {
  const unsigned d = spec.d;
  const double dd = static_cast<double>(d);
  const double p = static_cast<double>(spec.k) + spec.alpha;
  std::vector<HolderFunction> raw;
  raw.push_back({"const", spec, [](std::span<const double>) { return 0.5; }, 0.5});
  raw.push_back({"product", spec,
                 [](std::span<const double> x) {
                   double v = 1.0;
                   for (double xi : x) v *= xi;
                   return v;
                 },
                 std::pow(0.5, dd)});
  raw.push_back({"cosine", spec,
                 [](std::span<const double> x) {
                   double v = 1.0;
                   for (double xi : x) v *= std::cos(std::numbers::pi * xi);
                   return v;
                 },
                 0.0});
  raw.push_back({"sumsq", spec,
                 [dd](std::span<const double> x) {
                   double v = 0.0;
                   for (double xi : x) v += xi * xi;
                   return v / dd;
                 },
                 1.0 / 3.0});
  raw.push_back({"exp", spec,
                 [](std::span<const double> x) {
                   double v = 0.0;
                   for (double xi : x) v += xi - 1.0;
                   return std::exp(v);
                 },
                 std::pow(1.0 - std::exp(-1.0), dd)});
  raw.push_back({"rough", spec,
                 [dd, p](std::span<const double> x) {
                   double v = 0.0;
                   for (double xi : x) v += std::pow(std::abs(xi - 0.5), p);
                   return v / dd;
                 },
                 std::pow(0.5, p) / (p + 1.0)});

  std::vector<HolderFunction> suite;
  for (const auto& f : raw) {
    const auto report = verify_membership(f, calibration_resolution(d));
    const double c = dyadic_scale(std::max(report.sup_norm, report.worst_ratio));
    suite.push_back(f.scaled(c));
  }
  return suite;
}

inline std::optional<HolderFunction> find_in_suite(const HolderClassSpec& spec, const std::string& name) {
  for (auto& f : test_suite(spec))
    if (f.name == name) return f;
  return std::nullopt;
}

// Bump family.

/// One-dimensional bump profile on [0,1] with peak 1: the tent 2 min(t, 1-t)
/// for k = 0, (4 t (1 - t))^{k+1} otherwise.
inline double bump_profile(double t, unsigned k) {
  if (t <= 0.0 || t >= 1.0) return 0.0;
  if (k == 0) return 2.0 * std::min(t, 1.0 - t);
  return std::pow(4.0 * t * (1.0 - t), static_cast<double>(k + 1));
}

/// Integral of bump_profile over [0,1]: 1/2 for the tent,
/// 4^{k+1} ((k+1)!)^2 / (2k+3)! otherwise.
inline double bump_profile_integral(unsigned k) {
  if (k == 0) return 0.5;
  const double kk = static_cast<double>(k);
  return std::exp((kk + 1.0) * std::log(4.0) + 2.0 * std::lgamma(kk + 2.0) - std::lgamma(2.0 * kk + 4.0));
}

/// sum_i lambda_i f_i over the l^d subcubes of edge h = 1/l, where f_i is
/// the tensor bump of height c_geom h^{k+alpha} supported on subcube i.
struct FoolingInstance {
  HolderClassSpec spec;
  std::uint64_t cells_per_axis = 1;
  std::uint64_t n_bumps = 1;
  std::vector<double> signs;
  double edge = 1.0;
  double c_geom = 1.0;
  double height = 1.0;
  double bump_integral = 0.0;
  double exact_integral = 0.0;

  std::uint64_t cell_of(std::span<const double> x) const {
    std::uint64_t idx = 0;
    for (unsigned a = 0; a < spec.d; ++a) {
      auto c = static_cast<std::uint64_t>(std::floor(x[a] * static_cast<double>(cells_per_axis)));
      idx = idx * cells_per_axis + std::min(c, cells_per_axis - 1);
    }
    return idx;
  }

  /// Value of the single unit-sign bump f_i at x.
  double bump(std::uint64_t i, std::span<const double> x) const {
    double v = height;
    std::uint64_t rem = i;
    for (unsigned a = spec.d; a-- > 0;) {
      const std::uint64_t c = rem % cells_per_axis;
      rem /= cells_per_axis;
      const double t = x[a] * static_cast<double>(cells_per_axis) - static_cast<double>(c);
      v *= bump_profile(t, spec.k);
      if (v == 0.0) return 0.0;
    }
    return v;
  }

  double operator()(std::span<const double> x) const {
    const std::uint64_t i = cell_of(x);
    if (signs[i] == 0.0) return 0.0;
    return signs[i] * bump(i, x);
  }

  /// Closed support box [lo, hi] of bump i.
  std::pair<std::vector<double>, std::vector<double>> support(std::uint64_t i) const {
    std::vector<double> lo(spec.d), hi(spec.d);
    std::uint64_t rem = i;
    for (unsigned a = spec.d; a-- > 0;) {
      const std::uint64_t c = rem % cells_per_axis;
      rem /= cells_per_axis;
      lo[a] = static_cast<double>(c) * edge;
      hi[a] = static_cast<double>(c + 1) * edge;
    }
    return {lo, hi};
  }

  HolderFunction as_function() const {
    auto self = std::make_shared<const FoolingInstance>(*this);
    return {"fool", spec, [self](std::span<const double> x) { return (*self)(x); }, exact_integral};
  }
};

/// True when the interiors of the support boxes of bumps i and j intersect.
inline bool supports_overlap(const FoolingInstance& inst, std::uint64_t i, std::uint64_t j) {
  const auto [lo_i, hi_i] = inst.support(i);
  const auto [lo_j, hi_j] = inst.support(j);
  for (unsigned a = 0; a < inst.spec.d; ++a)
    if (std::min(hi_i[a], hi_j[a]) - std::max(lo_i[a], lo_j[a]) <= 1e-15) return false;
  return true;
}

inline std::uint64_t integer_root(std::uint64_t n, unsigned d) {
  auto r = static_cast<std::uint64_t>(std::llround(std::pow(static_cast<double>(n), 1.0 / d)));
  while (r > 0 && detail::ipow(r, d) > n) --r;
  while (detail::ipow(r + 1, d) <= n) ++r;
  return r;
}

namespace detail {
inline FoolingInstance build_fooling(const HolderClassSpec& spec, std::uint64_t per_axis,
                                     std::vector<double> signs, double c_geom) {
  FoolingInstance inst;
  inst.spec = spec;
  inst.cells_per_axis = per_axis;
  inst.n_bumps = ipow(per_axis, spec.d);
  inst.signs = std::move(signs);
  inst.edge = 1.0 / static_cast<double>(per_axis);
  inst.c_geom = c_geom;
  inst.height = c_geom * std::pow(inst.edge, static_cast<double>(spec.k) + spec.alpha);
  inst.bump_integral = inst.height * std::pow(inst.edge * bump_profile_integral(spec.k), spec.d);
  double total = 0.0;
  for (double s : inst.signs) total += s;
  inst.exact_integral = total * inst.bump_integral;
  return inst;
}
}  // namespace detail

/// Auto-chosen bump constant: the dyadic multiple keeping a 2^d-bump
/// instance (all-plus and checkerboard signs) under 1 - tol in the membership
/// check. The quotient does not depend on the cell size, so the coarse
/// instance is representative.
inline double default_bump_constant(const HolderClassSpec& spec) {
  const std::uint64_t n = detail::ipow(2, spec.d);
  std::vector<double> plus(n, 1.0), checker(n);
  for (std::uint64_t i = 0; i < n; ++i) checker[i] = (std::popcount(i) % 2 == 0) ? 1.0 : -1.0;
  double worst = 0.0;
  for (const auto& s : {plus, checker}) {
    const auto inst = detail::build_fooling(spec, 2, s, 1.0);
    const auto r = verify_membership(inst.as_function(), calibration_resolution(spec.d));
    worst = std::max({worst, r.sup_norm, r.worst_ratio});
  }
  return dyadic_scale(worst);
}

/// Bump family with n_bumps = l^d disjoint-support bumps and signs lambda.
/// c_geom defaults to default_bump_constant(spec).
inline FoolingInstance fooling_family(const HolderClassSpec& spec, std::uint64_t n_bumps,
                                      std::vector<double> signs, std::optional<double> c_geom = std::nullopt) {
  const std::uint64_t per_axis = integer_root(n_bumps, spec.d);
  if (per_axis == 0 || detail::ipow(per_axis, spec.d) != n_bumps)
    throw domain_error("fooling_family: n_bumps must be a perfect d-th power");
  if (signs.size() != n_bumps) throw domain_error("fooling_family: need one sign per bump");
  for (double s : signs)
    if (!(std::abs(s) <= 1.0)) throw domain_error("fooling_family: signs must satisfy |lambda| <= 1");
  return detail::build_fooling(spec, per_axis, std::move(signs), c_geom.value_or(default_bump_constant(spec)));
}

inline std::vector<double> all_plus_signs(std::uint64_t n) { return std::vector<double>(n, 1.0); }

inline std::vector<double> alternating_signs(std::uint64_t n) {
  std::vector<double> s(n);
  for (std::uint64_t i = 0; i < n; ++i) s[i] = (i % 2 == 0) ? 1.0 : -1.0;
  return s;
}

inline std::vector<double> random_signs(std::uint64_t n, Rng& rng) {
  std::vector<double> s(n);
  for (auto& v : s) v = (rng() >> 63) ? 1.0 : -1.0;
  return s;
}

}  // namespace qintlab::holder
