#pragma once

// Finitely supported sequences c_{j,k} and the anisotropic Triebel-Lizorkin
// sequence quasi-norm
//
//   ||c|| = || ( sum_{j,k} (|det A|^{-j(alpha+1/2)} |c_{j,k}| 1_{Q_{j,k}})^q )^{1/q} ||_{L^p}
//
// for p < infinity, its sup-over-cubes variant for p = infinity, and the
// weighted sup for p = q = infinity.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <limits>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "adl/errors.hpp"
#include "adl/expansive.hpp"
#include "adl/geometry.hpp"
#include "adl/linalg.hpp"
#include "adl/parallel.hpp"
#include "adl/rng.hpp"
#include "adl/tiling.hpp"

namespace adl {

/// A Lebesgue exponent in (0, infinity]; infinity is a flag, not a large float.
class Exponent {
 public:
  constexpr Exponent() = default;
  constexpr Exponent(double v) : v_(v) {}  // NOLINT: numeric exponents read naturally
  static constexpr Exponent infinity() {
    Exponent e;
    e.inf_ = true;
    return e;
  }
  constexpr bool is_inf() const { return inf_; }
  constexpr double value() const { return inf_ ? std::numeric_limits<double>::infinity() : v_; }
  bool operator==(const Exponent& o) const { return inf_ == o.inf_ && (inf_ || v_ == o.v_); }
  std::string str() const {
    if (inf_) return "inf";
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.17g", v_);
    return buf;
  }

 private:
  double v_ = 1.0;
  bool inf_ = false;
};

inline Exponent parse_exponent(const std::string& s) {
  if (s == "inf" || s == "infinity" || s == "Inf") return Exponent::infinity();
  std::size_t pos = 0;
  double v = 0.0;
  try {
    v = std::stod(s, &pos);
  } catch (const std::exception&) {
    fail(ErrorKind::ParseError, "bad exponent '" + s + "'");
  }
  if (pos != s.size() || !(v > 0) || !std::isfinite(v))
    fail(ErrorKind::ParseError, "exponent must be a positive number or 'inf', got '" + s + "'");
  return Exponent(v);
}

struct TLParams {
  double alpha = 0.0;
  Exponent p{2.0};
  Exponent q{2.0};

  void validate() const {
    if (!p.is_inf() && !(p.value() > 0)) fail(ErrorKind::PreconditionViolation, "p must be positive");
    if (!q.is_inf() && !(q.value() > 0)) fail(ErrorKind::PreconditionViolation, "q must be positive");
    if (!std::isfinite(alpha)) fail(ErrorKind::PreconditionViolation, "alpha must be finite");
  }
};

/// Finitely supported nonnegative coefficients indexed by (scale j, cell k).
/// Only moduli are stored; zeros are never stored.
class SparseSequence {
 public:
  using Slice = std::map<IntVec, double>;

  SparseSequence() = default;
  explicit SparseSequence(std::size_t dim) : dim_(dim) {}

  std::size_t dim() const { return dim_; }

  void set(std::int64_t j, const IntVec& k, double v) {
    if (k.size() != dim_) fail(ErrorKind::InvalidInput, "cell index has wrong dimension");
    if (!std::isfinite(v)) fail(ErrorKind::InvalidInput, "coefficient must be finite");
    v = std::abs(v);
    if (v == 0.0) {
      erase(j, k);
      return;
    }
    scales_[j][k] = v;
  }
  void set_complex(std::int64_t j, const IntVec& k, double re, double im) {
    set(j, k, std::hypot(re, im));
    moduli_taken_ = true;
  }
  void erase(std::int64_t j, const IntVec& k) {
    auto it = scales_.find(j);
    if (it == scales_.end()) return;
    it->second.erase(k);
    if (it->second.empty()) scales_.erase(it);
  }

  double get(std::int64_t j, const IntVec& k) const {
    auto it = scales_.find(j);
    if (it == scales_.end()) return 0.0;
    auto jt = it->second.find(k);
    return jt == it->second.end() ? 0.0 : jt->second;
  }

  const std::map<std::int64_t, Slice>& scales() const { return scales_; }
  const Slice* slice(std::int64_t j) const {
    auto it = scales_.find(j);
    return it == scales_.end() ? nullptr : &it->second;
  }

  bool empty() const { return scales_.empty(); }
  std::size_t size() const {
    std::size_t n = 0;
    for (const auto& [j, s] : scales_) n += s.size();
    return n;
  }
  std::int64_t j_min() const { return scales_.begin()->first; }
  std::int64_t j_max() const { return scales_.rbegin()->first; }
  bool moduli_taken() const { return moduli_taken_; }

  template <class F>
  void for_each(F&& f) const {
    for (const auto& [j, s] : scales_)
      for (const auto& [k, v] : s) f(j, k, v);
  }

  SparseSequence scaled(double lambda) const {
    SparseSequence out(dim_);
    for_each([&](std::int64_t j, const IntVec& k, double v) { out.set(j, k, lambda * v); });
    return out;
  }

  bool operator==(const SparseSequence& o) const { return dim_ == o.dim_ && scales_ == o.scales_; }

 private:
  std::size_t dim_ = 0;
  std::map<std::int64_t, Slice> scales_;
  bool moduli_taken_ = false;
};

/// Bounding box of the union of the supporting cubes of c under A.
inline Box support_box(const Dilation& a, const SparseSequence& c) {
  Box out;
  for (const auto& [j, slice] : c.scales()) {
    Matrix pw = a.power(j);
    for (const auto& [k, v] : slice) extend(out, parallelepiped_bounds(pw * to_real(k), pw));
  }
  return out;
}

enum class NormMethod { ClosedForm, DyadicExact, GridQuadrature, MonteCarlo };

inline const char* to_string(NormMethod m) {
  switch (m) {
    case NormMethod::ClosedForm: return "ClosedForm";
    case NormMethod::DyadicExact: return "DyadicExact";
    case NormMethod::GridQuadrature: return "GridQuadrature";
    case NormMethod::MonteCarlo: return "MonteCarlo";
  }
  return "?";
}

struct NormEstimate {
  double value = 0.0;
  double abs_error = 0.0;
  NormMethod method = NormMethod::ClosedForm;
  int refinement = 0;         ///< cells per finest-cube edge (grid) or samples per cube (mc)
  std::size_t evaluations = 0;
  std::optional<std::uint64_t> seed;
  bool unresolved = false;    ///< abs_error / value above the requested tolerance
  /// p = infinity: the maximizing cube P and whether it sits at the top of the
  /// candidate range (where truncation could hide a larger value).
  std::optional<std::pair<std::int64_t, IntVec>> argmax_cube;
  bool pad_saturated = false;
};

struct QuadratureSpec {
  enum class Method { Auto, Grid, MonteCarlo, Dyadic };
  Method method = Method::Auto;
  int n = 16;              ///< initial cells per finest-cube edge
  int max_n = 64;          ///< refinement stops once 2n would exceed this
  double rel_tol = 1e-2;   ///< abs_error / value threshold for the unresolved flag
  int mc_samples = 64;     ///< samples per finest cube (second level doubles it)
  std::uint64_t seed = 0;
  std::int64_t pad = 2;    ///< extra scales above j_max for p = infinity candidates
};

/// Per-scale lookup tables for evaluating the coefficient field of c under A.
class CoefficientField {
 public:
  struct Level {
    std::int64_t j;
    Matrix inv_pow;  ///< A^{-j}
    double log_weight_base;  ///< -j ln|det A|, weight = exp(log_weight_base * (alpha + 1/2))
    const SparseSequence::Slice* slice;
  };

  CoefficientField(const Dilation& a, const SparseSequence& c) : d_(a.dim()) {
    for (const auto& [j, s] : c.scales())
      levels_.push_back({j, a.power(-j), -static_cast<double>(j) * a.log_detmag(), &s});
  }

  const std::vector<Level>& levels() const { return levels_; }

  /// |c_{j, k(j,x)}| for every level, written into out.
  void values_at(std::span<const double> x, std::vector<double>& out, IntVec& scratch) const {
    out.resize(levels_.size());
    scratch.resize(d_);
    for (std::size_t l = 0; l < levels_.size(); ++l) {
      const Matrix& m = levels_[l].inv_pow;
      for (std::size_t i = 0; i < d_; ++i) {
        double y = 0.0;
        for (std::size_t k = 0; k < d_; ++k) y += m(i, k) * x[k];
        scratch[i] = snapped_floor(y);
      }
      auto it = levels_[l].slice->find(scratch);
      out[l] = it == levels_[l].slice->end() ? 0.0 : it->second;
    }
  }

 private:
  std::size_t d_;
  std::vector<Level> levels_;
};

inline std::vector<double> level_weights(const CoefficientField& f, double alpha) {
  std::vector<double> w;
  for (const auto& l : f.levels()) w.push_back(std::exp(l.log_weight_base * (alpha + 0.5)));
  return w;
}

namespace detail {

// (sum_l (w_l v_l)^q)^{1/q}, or max_l w_l v_l for q = infinity.
inline double lq_combine(const std::vector<double>& w, const std::vector<double>& v, Exponent q,
                         std::size_t upto = std::numeric_limits<std::size_t>::max()) {
  const std::size_t n = std::min(upto, v.size());
  if (q.is_inf()) {
    double m = 0.0;
    for (std::size_t l = 0; l < n; ++l) m = std::max(m, w[l] * v[l]);
    return m;
  }
  double s = 0.0;
  for (std::size_t l = 0; l < n; ++l)
    if (v[l] > 0) s += std::pow(w[l] * v[l], q.value());
  return std::pow(s, 1.0 / q.value());
}

// sum_{levels with j <= top} (w_l v_l)^q
inline double lq_power_sum(const std::vector<double>& w, const std::vector<double>& v, double q,
                           std::size_t upto) {
  double s = 0.0;
  for (std::size_t l = 0; l < std::min(upto, v.size()); ++l)
    if (v[l] > 0) s += std::pow(w[l] * v[l], q);
  return s;
}

}  // namespace detail

/// Pointwise integrand (sum_j (w_j |c_{j,k(j,x)}|)^q)^{1/q}; max for q = inf.
inline double integrand(const Dilation& a, const TLParams& params, const SparseSequence& c,
                        std::span<const double> x) {
  if (c.empty()) return 0.0;
  CoefficientField field(a, c);
  std::vector<double> v;
  IntVec scratch;
  field.values_at(x, v, scratch);
  return detail::lq_combine(level_weights(field, params.alpha), v, params.q);
}

/// Closed form for p = q, exploiting disjointness of same-scale cubes:
/// (sum_{j,k} |det A|^{j(1 - p(alpha+1/2))} |c_{j,k}|^p)^{1/p}; for
/// p = q = infinity the weighted sup.
inline NormEstimate seqnorm_exact_pq(const Dilation& a, const TLParams& params, const SparseSequence& c) {
  params.validate();
  if (!(params.p == params.q)) fail(ErrorKind::PreconditionViolation, "seqnorm_exact_pq requires p = q");
  NormEstimate est;
  est.method = NormMethod::ClosedForm;
  const double ld = a.log_detmag();
  if (params.p.is_inf()) {
    double m = 0.0;
    c.for_each([&](std::int64_t j, const IntVec&, double v) {
      m = std::max(m, std::exp(-static_cast<double>(j) * (params.alpha + 0.5) * ld) * v);
    });
    est.value = m;
    return est;
  }
  const double p = params.p.value();
  CompensatedSum sum;
  c.for_each([&](std::int64_t j, const IntVec&, double v) {
    sum.add(std::exp(p * std::log(v) + static_cast<double>(j) * ld * (1.0 - p * (params.alpha + 0.5))));
  });
  est.value = std::pow(sum.value(), 1.0 / p);
  return est;
}

/// The single-entry value |det A|^{-j(alpha + 1/2 - 1/p)} v (1/p = 0 for p = inf).
inline double single_entry_norm(const Dilation& a, const TLParams& params, std::int64_t j, double v) {
  double inv_p = params.p.is_inf() ? 0.0 : 1.0 / params.p.value();
  return std::exp(-static_cast<double>(j) * (params.alpha + 0.5 - inv_p) * a.log_detmag()) * v;
}

namespace detail {

// Finest-scale cubes covering the union of the supporting cubes.
inline std::vector<IntVec> finest_cover(const Dilation& a, const SparseSequence& c) {
  std::set<IntVec> cover;
  const std::int64_t jf = c.j_min();
  for (const auto& [j, slice] : c.scales()) {
    Matrix pw = a.power(j);
    for (const auto& [k, v] : slice) {
      Box b = parallelepiped_bounds(pw * to_real(k), pw);
      for (auto& f : cubes_in_box(a, jf, b)) cover.insert(std::move(f));
    }
  }
  return {cover.begin(), cover.end()};
}

// Integral of F^p over the support with an m^d midpoint grid inside every
// finest-scale cube.
inline double grid_integral_p(const Dilation& a, const CoefficientField& field, const std::vector<double>& w,
                              const std::vector<IntVec>& cover, std::int64_t jf, int m, const TLParams& params,
                              std::size_t& evals) {
  const std::size_t d = a.dim();
  const Matrix pw = a.power(jf);
  const double cell_vol = cube_volume(a, jf) / std::pow(static_cast<double>(m), static_cast<double>(d));
  const double p = params.p.value();
  std::vector<double> partial(cover.size());
  parallel_for(cover.size(), [&](std::size_t ci) {
    const IntVec& kk = cover[ci];
    std::vector<double> vals;
    IntVec scratch;
    Vec u(d), x(d);
    IntVec idx(d, 0);
    CompensatedSum s;
    for_each_index(IntVec(d, 0), IntVec(d, m - 1), [&](const IntVec& g) {
      for (std::size_t i = 0; i < d; ++i) u[i] = static_cast<double>(kk[i]) + (static_cast<double>(g[i]) + 0.5) / m;
      for (std::size_t i = 0; i < d; ++i) {
        double t = 0.0;
        for (std::size_t k = 0; k < d; ++k) t += pw(i, k) * u[k];
        x[i] = t;
      }
      field.values_at(x, vals, scratch);
      double f = lq_combine(w, vals, params.q);
      if (f > 0) s.add(std::pow(f, p));
    });
    partial[ci] = s.value() * cell_vol;
  });
  evals += cover.size() * static_cast<std::size_t>(std::pow(m, static_cast<double>(d)));
  return tree_sum(partial);
}

inline double mc_integral_p(const Dilation& a, const CoefficientField& field, const std::vector<double>& w,
                            const std::vector<IntVec>& cover, std::int64_t jf, int samples, const TLParams& params,
                            std::uint64_t seed, std::size_t& evals) {
  const std::size_t d = a.dim();
  const Matrix pw = a.power(jf);
  const double vol = cube_volume(a, jf);
  const double p = params.p.value();
  std::vector<double> partial(cover.size());
  parallel_for(cover.size(), [&](std::size_t ci) {
    const IntVec& kk = cover[ci];
    CounterRng rng(seed, ci);
    std::vector<double> vals;
    IntVec scratch;
    Vec u(d), x(d);
    CompensatedSum s;
    for (int t = 0; t < samples; ++t) {
      for (std::size_t i = 0; i < d; ++i) u[i] = static_cast<double>(kk[i]) + rng.uniform();
      for (std::size_t i = 0; i < d; ++i) {
        double acc = 0.0;
        for (std::size_t k = 0; k < d; ++k) acc += pw(i, k) * u[k];
        x[i] = acc;
      }
      field.values_at(x, vals, scratch);
      double f = lq_combine(w, vals, params.q);
      if (f > 0) s.add(std::pow(f, p));
    }
    partial[ci] = s.value() * vol / samples;
  });
  evals += cover.size() * static_cast<std::size_t>(samples);
  return tree_sum(partial);
}

struct SupResult {
  double value = 0.0;
  std::int64_t scale = 0;
  IntVec cell;
};

// sup over candidate cubes P of ( |P|^{-1} int_P sum_{j <= scale P} (w_j v_j)^q )^{1/q}
inline SupResult grid_sup_q(const Dilation& a, const CoefficientField& field, const std::vector<double>& w,
                            const SparseSequence& c, int n, double q, std::int64_t pad, std::size_t& evals) {
  const std::size_t d = a.dim();
  const Box box = support_box(a, c);
  const std::int64_t jf = c.j_min();
  SupResult best;
  bool have = false;
  for (std::int64_t s = c.j_min(); s <= c.j_max() + pad; ++s) {
    // levels with j <= s form a prefix
    std::size_t upto = 0;
    while (upto < field.levels().size() && field.levels()[upto].j <= s) ++upto;
    const auto cands = cubes_in_box(a, s, box);
    const Matrix pw = a.power(s);
    const int m = n * static_cast<int>(std::ceil(std::pow(a.detmag(), static_cast<double>(s - jf) / d) - 1e-9));
    std::vector<double> avg(cands.size());
    parallel_for(cands.size(), [&](std::size_t ci) {
      const IntVec& kk = cands[ci];
      std::vector<double> vals;
      IntVec scratch;
      Vec u(d), x(d);
      CompensatedSum acc;
      for_each_index(IntVec(d, 0), IntVec(d, m - 1), [&](const IntVec& g) {
        for (std::size_t i = 0; i < d; ++i) u[i] = static_cast<double>(kk[i]) + (static_cast<double>(g[i]) + 0.5) / m;
        for (std::size_t i = 0; i < d; ++i) {
          double t = 0.0;
          for (std::size_t k = 0; k < d; ++k) t += pw(i, k) * u[k];
          x[i] = t;
        }
        field.values_at(x, vals, scratch);
        acc.add(lq_power_sum(w, vals, q, upto));
      });
      avg[ci] = acc.value() / std::pow(static_cast<double>(m), static_cast<double>(d));
    });
    evals += cands.size() * static_cast<std::size_t>(std::pow(m, static_cast<double>(d)));
    for (std::size_t ci = 0; ci < cands.size(); ++ci) {
      double v = std::pow(avg[ci], 1.0 / q);
      if (!have || v > best.value) {
        best = {v, s, cands[ci]};
        have = true;
      }
    }
  }
  return best;
}

// Integer diagonal matrices with entries >= 2: cubes nest exactly.
inline std::optional<std::vector<std::int64_t>> nesting_factors(const Dilation& a) {
  const Matrix& m = a.matrix();
  if (!is_diagonal(m)) return std::nullopt;
  std::vector<std::int64_t> f;
  for (std::size_t i = 0; i < m.dim(); ++i) {
    double v = m(i, i);
    double r = std::round(v);
    if (r < 2 || std::abs(v - r) > 1e-12) return std::nullopt;
    f.push_back(static_cast<std::int64_t>(r));
  }
  return f;
}

inline std::int64_t ipow(std::int64_t b, std::int64_t e) {
  std::int64_t r = 1;
  for (std::int64_t i = 0; i < e; ++i) r *= b;
  return r;
}

inline std::int64_t floor_div(std::int64_t a, std::int64_t b) {
  std::int64_t q = a / b;
  if ((a % b != 0) && ((a < 0) != (b < 0))) --q;
  return q;
}

}  // namespace detail

/// True when A is diagonal with integer entries >= 2, the case in which the
/// dyadic-exact path applies.
inline bool supports_dyadic(const Dilation& a) { return detail::nesting_factors(a).has_value(); }

/// Exact evaluation for nesting (integer diagonal) dilations: the field is
/// constant on finest-scale cubes, whose ancestors are found by integer
/// floor division. Shares no geometry code with the quadrature path.
inline NormEstimate seqnorm_dyadic(const Dilation& a, const TLParams& params, const SparseSequence& c,
                                   std::int64_t pad = 2) {
  params.validate();
  auto factors = detail::nesting_factors(a);
  if (!factors) fail(ErrorKind::PreconditionViolation, "dyadic-exact path needs an integer diagonal dilation");
  NormEstimate est;
  est.method = NormMethod::DyadicExact;
  if (c.empty()) return est;
  const std::size_t d = a.dim();
  const std::int64_t jf = c.j_min();
  const double ld = a.log_detmag();

  auto ancestor = [&](const IntVec& f, std::int64_t j) {
    IntVec k(d);
    for (std::size_t i = 0; i < d; ++i) k[i] = detail::floor_div(f[i], detail::ipow((*factors)[i], j - jf));
    return k;
  };
  std::set<IntVec> finest;
  c.for_each([&](std::int64_t j, const IntVec& k, double) {
    IntVec lo(d), hi(d);
    for (std::size_t i = 0; i < d; ++i) {
      std::int64_t r = detail::ipow((*factors)[i], j - jf);
      lo[i] = k[i] * r;
      hi[i] = k[i] * r + r - 1;
    }
    for_each_index(lo, hi, [&](const IntVec& f) { finest.insert(f); });
  });
  const double fvol = std::exp(static_cast<double>(jf) * ld);
  std::vector<std::int64_t> js;
  std::vector<double> w;
  for (const auto& [j, s] : c.scales()) {
    js.push_back(j);
    w.push_back(std::exp(-static_cast<double>(j) * (params.alpha + 0.5) * ld));
  }
  auto values = [&](const IntVec& f) {
    std::vector<double> v;
    for (std::int64_t j : js) v.push_back(c.get(j, ancestor(f, j)));
    return v;
  };

  if (!params.p.is_inf()) {
    CompensatedSum sum;
    for (const auto& f : finest) {
      double fx = detail::lq_combine(w, values(f), params.q);
      if (fx > 0) sum.add(std::pow(fx, params.p.value()) * fvol);
    }
    est.value = std::pow(sum.value(), 1.0 / params.p.value());
    est.evaluations = finest.size();
    return est;
  }
  if (params.q.is_inf()) return seqnorm_exact_pq(a, params, c);

  const double q = params.q.value();
  double best = -1.0;
  for (std::int64_t s = jf; s <= c.j_max() + pad; ++s) {
    std::size_t upto = 0;
    while (upto < js.size() && js[upto] <= s) ++upto;
    std::map<IntVec, CompensatedSum> acc;
    for (const auto& f : finest) acc[ancestor(f, s)].add(detail::lq_power_sum(w, values(f), q, upto) * fvol);
    const double pvol = std::exp(static_cast<double>(s) * ld);
    for (const auto& [kp, sum] : acc) {
      double v = std::pow(sum.value() / pvol, 1.0 / q);
      if (v > best) {
        best = v;
        est.argmax_cube = std::make_pair(s, kp);
        est.pad_saturated = (s == c.j_max() + pad);
      }
    }
  }
  est.value = std::max(best, 0.0);
  est.evaluations = finest.size();
  return est;
}

/// Sequence quasi-norm in every regime. p = q uses the closed form unless a
/// quadrature method is forced; single entries short-circuit to their closed
/// form; nesting dilations are evaluated exactly; everything else integrates the field at two refinement levels and
/// reports their difference as abs_error.
inline NormEstimate seqnorm(const Dilation& a, const TLParams& params, const SparseSequence& c,
                            const QuadratureSpec& quad = {}) {
  params.validate();
  using M = QuadratureSpec::Method;
  NormEstimate est;
  if (c.empty()) return est;
  if (quad.method == M::Auto) {
    if (params.p == params.q) return seqnorm_exact_pq(a, params, c);
    if (c.size() == 1) {
      c.for_each([&](std::int64_t j, const IntVec& k, double v) {
        est.value = single_entry_norm(a, params, j, v);
        if (params.p.is_inf()) est.argmax_cube = std::make_pair(j, k);
      });
      return est;
    }
    if (supports_dyadic(a)) return seqnorm_dyadic(a, params, c, quad.pad);
  }
  if (params.p.is_inf() && params.q.is_inf()) return seqnorm_exact_pq(a, params, c);
  if (quad.method == M::Dyadic) return seqnorm_dyadic(a, params, c, quad.pad);

  CoefficientField field(a, c);
  const auto w = level_weights(field, params.alpha);

  if (params.p.is_inf()) {
    est.method = NormMethod::GridQuadrature;
    int n = std::max(1, quad.n);
    auto coarse = detail::grid_sup_q(a, field, w, c, n, params.q.value(), quad.pad, est.evaluations);
    for (;;) {
      auto fine = detail::grid_sup_q(a, field, w, c, 2 * n, params.q.value(), quad.pad, est.evaluations);
      est.value = fine.value;
      est.abs_error = std::abs(fine.value - coarse.value);
      est.refinement = 2 * n;
      est.argmax_cube = std::make_pair(fine.scale, fine.cell);
      est.pad_saturated = fine.scale == c.j_max() + quad.pad;
      if (est.abs_error <= quad.rel_tol * est.value || 4 * n > quad.max_n) break;
      n *= 2;
      coarse = fine;
    }
    est.unresolved = est.abs_error > quad.rel_tol * est.value;
    return est;
  }

  const auto cover = detail::finest_cover(a, c);
  const std::int64_t jf = c.j_min();
  const double p = params.p.value();
  if (quad.method == M::MonteCarlo) {
    est.method = NormMethod::MonteCarlo;
    est.seed = quad.seed;
    int m = std::max(1, quad.mc_samples);
    double lo = std::pow(detail::mc_integral_p(a, field, w, cover, jf, m, params, quad.seed, est.evaluations), 1.0 / p);
    double hi = std::pow(detail::mc_integral_p(a, field, w, cover, jf, 2 * m, params, quad.seed, est.evaluations), 1.0 / p);
    est.value = hi;
    est.abs_error = std::abs(hi - lo);
    est.refinement = 2 * m;
    est.unresolved = est.abs_error > quad.rel_tol * est.value;
    return est;
  }

  est.method = NormMethod::GridQuadrature;
  int n = std::max(1, quad.n);
  double coarse = std::pow(detail::grid_integral_p(a, field, w, cover, jf, n, params, est.evaluations), 1.0 / p);
  for (;;) {
    double fine = std::pow(detail::grid_integral_p(a, field, w, cover, jf, 2 * n, params, est.evaluations), 1.0 / p);
    est.value = fine;
    est.abs_error = std::abs(fine - coarse);
    est.refinement = 2 * n;
    if (est.abs_error <= quad.rel_tol * est.value || 4 * n > quad.max_n) break;
    n *= 2;
    coarse = fine;
  }
  est.unresolved = est.abs_error > quad.rel_tol * est.value;
  return est;
}

/// Seeded random sequence: on every scale in [j_lo, j_hi], each cell whose cube
/// meets the window is populated with probability `density` by |N(0,1)|.
inline SparseSequence random_sequence(const Dilation& a, const Box& window, std::int64_t j_lo, std::int64_t j_hi,
                                      double density, std::uint64_t seed) {
  if (!(density > 0.0 && density <= 1.0)) fail(ErrorKind::PreconditionViolation, "density must lie in (0, 1]");
  SparseSequence c(a.dim());
  for (std::int64_t j = j_lo; j <= j_hi; ++j) {
    const auto cells = cubes_in_box(a, j, window);
    const std::uint64_t stream_seed = derive_seed(seed, static_cast<std::uint64_t>(j));
    for (std::size_t i = 0; i < cells.size(); ++i) {
      CounterRng rng(stream_seed, i);
      if (rng.uniform() < density) c.set(j, cells[i], std::abs(rng.normal()));
    }
  }
  return c;
}

}  // namespace adl
