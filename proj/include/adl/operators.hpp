#pragma once

// Majorizing functions, a centered anisotropic maximal function, and the
// scale-wise relabeling operators between sequence spaces of two equivalent
// dilations:
//
//   permutation  (P c)_{j, pi_j(k)}        = c_{j,k}            |det A| = |det B|
//   retract      (S c)_{floor(j eps), pi_j(k)} = c_{j,k},
//                (T s)_{j,k} = s_{floor(j eps), pi_j(k)}      |det A| > |det B|
//
// Everything works on finite windows; maps carry their own displacement
// certificates from the matching module.

#include <algorithm>
#include <cmath>
#include <cstdint>
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
#include "adl/matching.hpp"
#include "adl/parallel.hpp"
#include "adl/quasinorm.hpp"
#include "adl/rng.hpp"
#include "adl/sequences.hpp"
#include "adl/tiling.hpp"

namespace adl {

struct MajorantParams {
  double r = 0.5;
  double lam = 2.0;
  double a = 0.5;

  /// a = r = min(1, p, q) / 2 and lam = 2.
  static MajorantParams defaults_for(const TLParams& tl) {
    double m = std::min({1.0, tl.p.value(), tl.q.value()}) / 2.0;
    return {m, 2.0, m};
  }
  void validate() const {
    if (!(r > 0) || !std::isfinite(r)) fail(ErrorKind::PreconditionViolation, "majorant r must be positive");
    if (!std::isfinite(lam)) fail(ErrorKind::PreconditionViolation, "majorant lambda must be finite");
    if (!(a > 0) || a > r) fail(ErrorKind::PreconditionViolation, "majorant needs 0 < a <= r");
  }
};

/// c^A_j(x) = (sum_k |c_{j,k}|^r / (1 + rho_A(A^{-j} x - k))^lam)^{1/r}.
inline double majorant(const StepQuasiNorm& qn, const SparseSequence& c, std::int64_t j, const MajorantParams& mp,
                       std::span<const double> x) {
  const auto* slice = c.slice(j);
  if (!slice) return 0.0;
  const Vec y = qn.dilation().power(-j) * x;
  Vec z(y.size());
  CompensatedSum sum;
  for (const auto& [k, v] : *slice) {
    for (std::size_t i = 0; i < y.size(); ++i) z[i] = y[i] - static_cast<double>(k[i]);
    sum.add(std::pow(v, mp.r) / std::pow(1.0 + qn.rho(z), mp.lam));
  }
  return std::pow(sum.value(), 1.0 / mp.r);
}

/// sup of rho_A over [0,1]^d. Sublevel sets of rho_A are ellipsoids, hence
/// convex, so the sup over the cube is attained at a vertex.
struct CubeRhoSup {
  double vertex_max = 0.0;
  double grid_max = 0.0;  ///< 64^d grid; a lower bound, kept as a cross-check
  std::size_t grid_points = 0;
};

inline CubeRhoSup cube_rho_sup(const StepQuasiNorm& qn, std::size_t grid = 64) {
  const std::size_t d = qn.dilation().dim();
  CubeRhoSup out;
  IntVec lo(d, 0), hi(d, 1);
  for_each_index(lo, hi, [&](const IntVec& v) { out.vertex_max = std::max(out.vertex_max, qn.rho(to_real(v))); });
  IntVec ghi(d, static_cast<std::int64_t>(grid));
  Vec x(d);
  for_each_index(lo, ghi, [&](const IntVec& g) {
    for (std::size_t i = 0; i < d; ++i) x[i] = static_cast<double>(g[i]) / static_cast<double>(grid);
    out.grid_max = std::max(out.grid_max, qn.rho(x));
    ++out.grid_points;
  });
  return out;
}

struct DominationReport {
  double c_sup = 0.0;         ///< sup of rho_A over the unit cube
  double c_grid = 0.0;
  double constant = 0.0;      ///< (1 + C)^{lam / r}
  std::size_t samples = 0;
  std::size_t violations = 0;
  double max_ratio = 0.0;     ///< max LHS / (constant * RHS); <= 1 when the inequality holds
  Vec witness;
};

/// Checks  sum_k |c_{j,k}| 1_{Q_{j,k}}(x) <= (1 + C)^{lam/r} c^A_j(x)  at every
/// sample point. Inside Q_{j,k} the k-th term alone is at least
/// |c_{j,k}|^r (1 + C)^{-lam}, which gives the constant.
inline DominationReport majorant_dominates(const StepQuasiNorm& qn, const SparseSequence& c, std::int64_t j,
                                           const MajorantParams& mp, const std::vector<Vec>& points) {
  mp.validate();
  DominationReport rep;
  const auto sup = cube_rho_sup(qn);
  rep.c_sup = std::max(sup.vertex_max, sup.grid_max);
  rep.c_grid = sup.grid_max;
  rep.constant = std::pow(1.0 + rep.c_sup, mp.lam / mp.r);
  rep.samples = points.size();
  const Matrix inv = qn.dilation().power(-j);
  std::vector<double> ratio(points.size(), 0.0);
  parallel_for(points.size(), [&](std::size_t i) {
    double lhs = c.get(j, cell_of(inv, points[i]));
    if (lhs == 0.0) return;
    double rhs = rep.constant * majorant(qn, c, j, mp, points[i]);
    ratio[i] = rhs > 0 ? lhs / rhs : std::numeric_limits<double>::infinity();
  });
  for (std::size_t i = 0; i < points.size(); ++i) {
    if (ratio[i] > rep.max_ratio) {
      rep.max_ratio = ratio[i];
      rep.witness = points[i];
    }
    if (ratio[i] > 1.0 + 1e-12) ++rep.violations;
  }
  if (rep.violations > 0) {
    std::string w;
    for (double v : rep.witness) w += (w.empty() ? "" : ", ") + std::to_string(v);
    fail(ErrorKind::DominationViolation, std::to_string(rep.violations) + " violations; worst at x = (" + w + ")");
  }
  return rep;
}

struct MaximalSpec {
  std::size_t samples = 1024;  ///< stratified samples per ball (before rejection)
  std::int64_t radius_span = 4;
  std::uint64_t seed = 0;
};

namespace detail {

// Largest J with |det A|^J < r: the ball {rho < r} is A^{J+1}{q < 1}.
inline std::int64_t ball_cap(const Dilation& a, double r) {
  std::int64_t n = scale_of_ball(a, r);
  double pw = std::pow(a.detmag(), static_cast<double>(n));
  return std::abs(r / pw - 1.0) <= 1e-12 ? n - 1 : n;
}

// Half-widths of the bounding box of the ellipsoid {q < 1}.
inline Vec ellipsoid_halfwidths(const StepQuasiNorm& qn) {
  const Matrix pinv = inverse(qn.form().p);
  Vec h(pinv.dim());
  for (std::size_t i = 0; i < h.size(); ++i) h[i] = std::sqrt(pinv(i, i));
  return h;
}

}  // namespace detail

/// Centered maximal function of f = sum_k |c_{j,k}|^power 1_{Q_{j,k}} at x:
/// the max over radii |det A|^{m/2}, m in [2(j - span), 2(j + span)], of the
/// average of f over {y : rho_A(x - y) < r}. Each average samples the
/// ellipsoid {q < 1} on a jittered grid and maps it through A^{J+1}; the
/// test q(u) < 1 is the same set as ball_membership, without the orbit walk.
inline double maximal(const StepQuasiNorm& qn, const SparseSequence& c, std::int64_t j, std::span<const double> x,
                      const MaximalSpec& spec = {}, double power = 1.0, std::uint64_t stream = 0) {
  const auto* slice = c.slice(j);
  if (!slice) return 0.0;
  const Dilation& a = qn.dilation();
  const std::size_t d = a.dim();
  const Matrix inv = a.power(-j);
  const Vec h = detail::ellipsoid_halfwidths(qn);
  const auto g = static_cast<std::int64_t>(
      std::max(1.0, std::ceil(std::pow(static_cast<double>(spec.samples), 1.0 / static_cast<double>(d)) - 1e-9)));
  const IntVec glo(d, 0), ghi(d, g - 1);
  double best = 0.0;
  Vec u(d), y(d);
  IntVec cell(d);
  for (std::int64_t m = 2 * (j - spec.radius_span); m <= 2 * (j + spec.radius_span); ++m) {
    const double r = std::pow(a.detmag(), 0.5 * static_cast<double>(m));
    const Matrix pw = a.power(detail::ball_cap(a, r) + 1);
    CounterRng rng(derive_seed(spec.seed, stream), static_cast<std::uint64_t>(m - 2 * (j - spec.radius_span)));
    CompensatedSum sum;
    std::size_t hits = 0;
    for_each_index(glo, ghi, [&](const IntVec& s) {
      for (std::size_t i = 0; i < d; ++i)
        u[i] = h[i] * (2.0 * (static_cast<double>(s[i]) + rng.uniform()) / static_cast<double>(g) - 1.0);
      if (qn.q(u) >= 1.0) return;
      ++hits;
      Vec z = pw * u;
      for (std::size_t i = 0; i < d; ++i) y[i] = x[i] - z[i];
      double v = c.get(j, cell_of(inv, y));
      if (v > 0) sum.add(power == 1.0 ? v : std::pow(v, power));
    });
    if (hits > 0) best = std::max(best, sum.value() / static_cast<double>(hits));
  }
  return best;
}

struct MaximalBoundReport {
  double c_hat = 0.0;        ///< over the first half of the samples
  double c_hat_double = 0.0; ///< over all samples
  bool finite = true;
  bool stable = true;        ///< c_hat_double <= 1.25 c_hat
  std::size_t samples = 0;
  std::uint64_t seed = 0;
  Vec argmax;
};

/// Sample points uniform in the support box of scale j, grown by one cube
/// diameter on each side.
inline std::vector<Vec> sample_near_slice(const Dilation& a, const SparseSequence& c, std::int64_t j, std::size_t n,
                                          std::uint64_t seed) {
  std::vector<Vec> pts;
  const auto* slice = c.slice(j);
  if (!slice) return pts;
  SparseSequence only(c.dim());
  for (const auto& [k, v] : *slice) only.set(j, k, v);
  Box box = support_box(a, only).inflated(parallelepiped_diameter(a.power(j)));
  pts.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    CounterRng rng(seed, i);
    Vec x(a.dim());
    for (std::size_t t = 0; t < x.size(); ++t) x[t] = rng.uniform(box.lo[t], box.hi[t]);
    pts[i] = std::move(x);
  }
  return pts;
}

/// Empirical constant in c^A_j(x) <= C (M[(sum_k |c_{j,k}| 1_Q)^a](x))^{1/a},
/// over n and then 2n points (the first n are shared). Report only.
inline MaximalBoundReport maximal_bound_check(const StepQuasiNorm& qn, const SparseSequence& c, std::int64_t j,
                                              const MajorantParams& mp, std::size_t n, const MaximalSpec& spec = {},
                                              std::uint64_t seed = 0) {
  mp.validate();
  if (!(mp.lam > mp.r / mp.a)) fail(ErrorKind::PreconditionViolation, "maximal bound needs lam > r / a");
  MaximalBoundReport rep;
  rep.samples = 2 * n;
  rep.seed = seed;
  const auto pts = sample_near_slice(qn.dilation(), c, j, 2 * n, seed);
  if (pts.empty()) return rep;
  std::vector<double> ratio(pts.size(), 0.0);
  parallel_for(pts.size(), [&](std::size_t i) {
    double lhs = majorant(qn, c, j, mp, pts[i]);
    if (lhs == 0.0) return;
    double m = maximal(qn, c, j, pts[i], spec, mp.a, i);
    ratio[i] = m > 0 ? lhs / std::pow(m, 1.0 / mp.a) : std::numeric_limits<double>::infinity();
  });
  for (std::size_t i = 0; i < pts.size(); ++i) {
    if (i < n) rep.c_hat = std::max(rep.c_hat, ratio[i]);
    if (ratio[i] > rep.c_hat_double) {
      rep.c_hat_double = ratio[i];
      rep.argmax = pts[i];
    }
  }
  rep.finite = std::isfinite(rep.c_hat_double);
  rep.stable = rep.finite && rep.c_hat_double <= 1.25 * rep.c_hat;
  return rep;
}

enum class ScaleMode { Permutation, Retract };

inline const char* to_string(ScaleMode m) { return m == ScaleMode::Permutation ? "Permutation" : "Retract"; }

struct ScaleMap {
  std::int64_t j = 0, i = 0;
  IntVec lo, hi;                       ///< source window (inclusive index box)
  std::map<IntVec, IntVec> forward;    ///< k -> pi_j(k)
  std::map<IntVec, IntVec> inverse;
  IntVec image_lo, image_hi;           ///< index hull of pi_j(window)
  double max_displacement = 0.0;       ///< max |k - A^{-j} B^i pi_j(k)|
  double bound = 0.0;                  ///< sqrt(d) (1 + |A^{-j} B^i|)
  std::size_t candidate_edges = 0;
};

struct ScaleMaps {
  ScaleMode mode = ScaleMode::Permutation;
  double epsilon = 1.0;
  std::map<std::int64_t, ScaleMap> maps;  ///< keyed by source scale j
  std::map<std::int64_t, std::int64_t> by_target;  ///< i(j) -> j
  std::int64_t i_lo = 0, i_hi = 0;        ///< target scale range
  EquivalenceReport precondition;

  std::int64_t target_scale(std::int64_t j) const {
    return mode == ScaleMode::Permutation ? j : scale_floor(epsilon, j);
  }
};

inline constexpr std::int64_t kPreconditionWindow = 32;

/// Builds pi_j for every j in [j_lo, j_hi] on the cells whose A-cubes meet
/// the spatial window (taken as an index box per scale).
inline ScaleMaps build_scale_maps(const Dilation& a, const Dilation& b, ScaleMode mode, std::int64_t j_lo,
                                  std::int64_t j_hi, const Box& window) {
  if (a.dim() != b.dim()) fail(ErrorKind::PreconditionViolation, "dimension mismatch");
  if (j_lo > j_hi) fail(ErrorKind::PreconditionViolation, "empty scale range");
  ScaleMaps out;
  out.mode = mode;
  out.epsilon = epsilon(a, b);
  const double da = a.detmag(), db = b.detmag();
  if (mode == ScaleMode::Permutation && std::abs(da - db) > 1e-9 * da)
    fail(ErrorKind::PreconditionViolation,
         "Permutation needs |det A| = |det B|, got " + std::to_string(da) + " and " + std::to_string(db));
  if (mode == ScaleMode::Retract && !(da > db * (1 + 1e-9)))
    fail(ErrorKind::PreconditionViolation,
         "Retract needs |det A| > |det B|, got " + std::to_string(da) + " and " + std::to_string(db));
  out.precondition = classify_equivalence(a, b, kPreconditionWindow);
  if (out.precondition.verdict != EquivalenceVerdict::Equivalent)
    fail(ErrorKind::PreconditionViolation,
         std::string("dilations are not classified Equivalent (verdict ") + to_string(out.precondition.verdict) + ")");

  for (std::int64_t j = j_lo; j <= j_hi; ++j) {
    ScaleMap sm;
    sm.j = j;
    sm.i = out.target_scale(j);
    const auto cells = cubes_in_box(a, j, window);
    if (cells.empty()) fail(ErrorKind::PreconditionViolation, "window meets no cube at scale " + std::to_string(j));
    std::tie(sm.lo, sm.hi) = index_hull(cells);
    auto res = lattice_injection_pi(a, b, j, sm.i, index_window(sm.lo, sm.hi));
    sm.max_displacement = res.max_displacement;
    sm.bound = res.bound;
    sm.candidate_edges = res.candidate_edges;
    std::vector<IntVec> image;
    image.reserve(res.assignment.size());
    for (const auto& [k, n] : res.assignment) {
      sm.inverse.emplace(n, k);
      image.push_back(n);
    }
    std::tie(sm.image_lo, sm.image_hi) = index_hull(image);
    sm.forward = std::move(res.assignment);
    if (!out.by_target.emplace(sm.i, j).second)
      fail(ErrorKind::PreconditionViolation, "scale map j -> i(j) is not injective at j = " + std::to_string(j));
    out.maps.emplace(j, std::move(sm));
  }
  out.i_lo = out.by_target.begin()->first;
  out.i_hi = out.by_target.rbegin()->first;
  return out;
}

namespace detail {

inline bool in_index_box(const IntVec& k, const IntVec& lo, const IntVec& hi) {
  for (std::size_t t = 0; t < k.size(); ++t)
    if (k[t] < lo[t] || k[t] > hi[t]) return false;
  return true;
}

inline SparseSequence relabel(const SparseSequence& c, const ScaleMaps& maps) {
  SparseSequence s(c.dim());
  c.for_each([&](std::int64_t j, const IntVec& k, double v) {
    auto it = maps.maps.find(j);
    if (it == maps.maps.end())
      fail(ErrorKind::SupportEscapesWindow, "scale " + std::to_string(j) + " is outside the map range");
    auto kt = it->second.forward.find(k);
    if (kt == it->second.forward.end())
      fail(ErrorKind::SupportEscapesWindow,
           "cell " + detail::format_index(k) + " at scale " + std::to_string(j) + " is outside the map window");
    s.set(it->second.i, kt->second, v);
  });
  return s;
}

}  // namespace detail

/// (P c)_{j, pi_j(k)} = c_{j,k}.
inline SparseSequence permute(const SparseSequence& c, const ScaleMaps& maps) {
  if (maps.mode != ScaleMode::Permutation) fail(ErrorKind::PreconditionViolation, "permute needs Permutation maps");
  return detail::relabel(c, maps);
}

/// (S c)_{floor(j eps), pi_j(k)} = c_{j,k}; every other entry is zero.
inline SparseSequence lift_S(const SparseSequence& c, const ScaleMaps& maps) {
  if (maps.mode != ScaleMode::Retract) fail(ErrorKind::PreconditionViolation, "lift_S needs Retract maps");
  return detail::relabel(c, maps);
}

/// (T s)_{j,k} = s_{floor(j eps), pi_j(k)}. Entries of s on target scales that
/// no j reaches, or on cells outside pi_j's image, are never read. An entry
/// outside the index hull of the image would have been read by pi_j on a
/// larger window, so it is reported as escaping.
inline SparseSequence project_T(const SparseSequence& s, const ScaleMaps& maps) {
  if (maps.mode != ScaleMode::Retract) fail(ErrorKind::PreconditionViolation, "project_T needs Retract maps");
  SparseSequence c(s.dim());
  s.for_each([&](std::int64_t i, const IntVec& n, double v) {
    if (i < maps.i_lo || i > maps.i_hi)
      fail(ErrorKind::SupportEscapesWindow, "scale " + std::to_string(i) + " is outside the target scale range");
    auto bt = maps.by_target.find(i);
    if (bt == maps.by_target.end()) return;
    const ScaleMap& sm = maps.maps.at(bt->second);
    if (!detail::in_index_box(n, sm.image_lo, sm.image_hi))
      fail(ErrorKind::SupportEscapesWindow,
           "cell " + detail::format_index(n) + " at scale " + std::to_string(i) + " is outside the map image");
    auto it = sm.inverse.find(n);
    if (it != sm.inverse.end()) c.set(sm.j, it->second, v);
  });
  return c;
}

/// Value multiset of one scale, sorted.
inline std::vector<double> scale_values(const SparseSequence& c, std::int64_t j) {
  std::vector<double> v;
  if (const auto* s = c.slice(j))
    for (const auto& [k, x] : *s) v.push_back(x);
  std::sort(v.begin(), v.end());
  return v;
}

inline std::vector<double> all_values(const SparseSequence& c) {
  std::vector<double> v;
  c.for_each([&](std::int64_t, const IntVec&, double x) { v.push_back(x); });
  std::sort(v.begin(), v.end());
  return v;
}

struct ExperimentSpec {
  std::int64_t j_lo = -1, j_hi = 1;
  Box window;
  double density = 0.3;
};

struct TrialRecord {
  std::size_t index = 0;
  std::uint64_t seed = 0;
  std::size_t entries = 0;
  double norm_src = 0.0, norm_dst = 0.0, ratio = 0.0;           ///< P or S family
  double norm_t_src = 0.0, norm_t_dst = 0.0, ratio_t = 0.0;     ///< T family (Retract)
  bool ts_identity = true;
  bool unresolved = false;
};

struct RatioSummary {
  double min = 0.0, max = 0.0, median = 0.0;
  double max_first_half = 0.0;  ///< over trials [0, ceil(n/2)), for the doubling check
  bool stable = true;           ///< max <= 1.25 max_first_half
};

inline RatioSummary summarize(const std::vector<double>& r) {
  RatioSummary s;
  if (r.empty()) return s;
  std::vector<double> v = r;
  std::sort(v.begin(), v.end());
  s.min = v.front();
  s.max = v.back();
  const std::size_t n = v.size();
  s.median = n % 2 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
  const std::size_t half = (n + 1) / 2;
  s.max_first_half = *std::max_element(r.begin(), r.begin() + static_cast<std::ptrdiff_t>(half));
  s.stable = s.max <= 1.25 * s.max_first_half;
  return s;
}

struct ExperimentReport {
  ScaleMode mode = ScaleMode::Permutation;
  double epsilon = 1.0;
  std::vector<TrialRecord> trials;
  RatioSummary forward;   ///< ||P c||_B / ||c||_A or ||S c||_B / ||c||_A
  RatioSummary backward;  ///< ||T s||_A / ||s||_B (Retract only)
  bool ts_identity_all = true;
  std::size_t unresolved = 0;
  std::map<std::int64_t, double> displacement;  ///< per source scale
  std::map<std::int64_t, double> bound;
};

namespace detail {

// Random B-sequence that project_T can read without escaping: image hulls on
// matched target scales, window cells elsewhere in the target range.
inline SparseSequence random_target_sequence(const Dilation& b, const ScaleMaps& maps, const Box& window,
                                             double density, std::uint64_t seed) {
  SparseSequence s(b.dim());
  for (std::int64_t i = maps.i_lo; i <= maps.i_hi; ++i) {
    std::vector<IntVec> cells;
    auto bt = maps.by_target.find(i);
    if (bt != maps.by_target.end()) {
      const ScaleMap& sm = maps.maps.at(bt->second);
      cells = index_window(sm.image_lo, sm.image_hi);
    } else {
      cells = cubes_in_box(b, i, window);
    }
    const std::uint64_t stream = derive_seed(seed, static_cast<std::uint64_t>(i));
    for (std::size_t t = 0; t < cells.size(); ++t) {
      CounterRng rng(stream, t);
      if (rng.uniform() < density) s.set(i, cells[t], std::abs(rng.normal()));
    }
  }
  return s;
}

inline double safe_ratio(double num, double den) {
  if (den == 0.0) return num == 0.0 ? 1.0 : std::numeric_limits<double>::infinity();
  return num / den;
}

}  // namespace detail

/// Trial t draws c from derive_seed(seed, 2t) and, in Retract mode, the
/// B-side sequence for T from derive_seed(seed, 2t + 1).
inline ExperimentReport equivalence_experiment(const Dilation& a, const Dilation& b, const TLParams& params,
                                               ScaleMode mode, std::size_t trials, std::uint64_t seed,
                                               const QuadratureSpec& quad, const ExperimentSpec& ex) {
  params.validate();
  if (trials == 0) fail(ErrorKind::PreconditionViolation, "need at least one trial");
  const ScaleMaps maps = build_scale_maps(a, b, mode, ex.j_lo, ex.j_hi, ex.window);
  ExperimentReport rep;
  rep.mode = mode;
  rep.epsilon = maps.epsilon;
  for (const auto& [j, sm] : maps.maps) {
    rep.displacement[j] = sm.max_displacement;
    rep.bound[j] = sm.bound;
  }
  rep.trials.resize(trials);
  parallel_for(trials, [&](std::size_t t) {
    TrialRecord& tr = rep.trials[t];
    tr.index = t;
    tr.seed = derive_seed(seed, 2 * t);
    SparseSequence c = random_sequence(a, ex.window, ex.j_lo, ex.j_hi, ex.density, tr.seed);
    tr.entries = c.size();
    QuadratureSpec qs = quad;
    qs.seed = tr.seed;
    auto na = seqnorm(a, params, c, qs);
    SparseSequence s = mode == ScaleMode::Permutation ? permute(c, maps) : lift_S(c, maps);
    auto nb = seqnorm(b, params, s, qs);
    tr.norm_src = na.value;
    tr.norm_dst = nb.value;
    tr.ratio = detail::safe_ratio(nb.value, na.value);
    tr.unresolved = na.unresolved || nb.unresolved;
    if (mode == ScaleMode::Retract) {
      tr.ts_identity = project_T(s, maps) == c;
      const std::uint64_t seed_t = derive_seed(seed, 2 * t + 1);
      SparseSequence sb = detail::random_target_sequence(b, maps, ex.window, ex.density, seed_t);
      qs.seed = seed_t;
      auto nsb = seqnorm(b, params, sb, qs);
      auto nts = seqnorm(a, params, project_T(sb, maps), qs);
      tr.norm_t_src = nsb.value;
      tr.norm_t_dst = nts.value;
      tr.ratio_t = detail::safe_ratio(nts.value, nsb.value);
      tr.unresolved = tr.unresolved || nsb.unresolved || nts.unresolved;
    }
  });
  std::vector<double> fwd, bwd;
  for (const auto& tr : rep.trials) {
    fwd.push_back(tr.ratio);
    if (mode == ScaleMode::Retract) bwd.push_back(tr.ratio_t);
    rep.ts_identity_all = rep.ts_identity_all && tr.ts_identity;
    rep.unresolved += tr.unresolved;
  }
  rep.forward = summarize(fwd);
  rep.backward = summarize(bwd);
  return rep;
}

struct BracketReport {
  double k_half = 1.0;  ///< K over the first half of the points
  double k_full = 1.0;  ///< K over all points
  bool stable = true;   ///< k_full <= 1.25 k_half
  std::size_t points = 0;
  std::size_t sequences = 0;
};

/// Pointwise comparison c^A_j(x) ~ s^B_{i(j)}(x) for s = P c or S c, over
/// `sequences` seeded sequences and 2n points each in the window. K is the
/// smallest constant with every ratio in [1/K, K].
inline BracketReport pointwise_bracket(const StepQuasiNorm& qa, const StepQuasiNorm& qb, const ScaleMaps& maps,
                                       const MajorantParams& mp, const ExperimentSpec& ex, std::size_t sequences,
                                       std::size_t n, std::uint64_t seed) {
  mp.validate();
  BracketReport rep;
  rep.points = 2 * n;
  rep.sequences = sequences;
  const Dilation& a = qa.dilation();
  const std::size_t d = a.dim();
  std::vector<double> k_half(sequences, 1.0), k_full(sequences, 1.0);
  parallel_for(sequences, [&](std::size_t t) {
    const std::uint64_t sd = derive_seed(seed, t);
    SparseSequence c = random_sequence(a, ex.window, ex.j_lo, ex.j_hi, ex.density, sd);
    SparseSequence s = maps.mode == ScaleMode::Permutation ? permute(c, maps) : lift_S(c, maps);
    for (std::size_t p = 0; p < 2 * n; ++p) {
      CounterRng rng(derive_seed(sd, 1), p);
      Vec x(d);
      for (std::size_t i = 0; i < d; ++i) x[i] = rng.uniform(ex.window.lo[i], ex.window.hi[i]);
      for (const auto& [j, slice] : c.scales()) {
        double ca = majorant(qa, c, j, mp, x);
        double sb = majorant(qb, s, maps.maps.at(j).i, mp, x);
        double r = detail::safe_ratio(ca, sb);
        double k = std::max(r, 1.0 / r);
        if (p < n) k_half[t] = std::max(k_half[t], k);
        k_full[t] = std::max(k_full[t], k);
      }
    }
  });
  for (std::size_t t = 0; t < sequences; ++t) {
    rep.k_half = std::max(rep.k_half, k_half[t]);
    rep.k_full = std::max(rep.k_full, k_full[t]);
  }
  rep.stable = std::isfinite(rep.k_full) && rep.k_full <= 1.25 * rep.k_half;
  return rep;
}

struct FeffermanSteinReport {
  std::vector<double> ratios;  ///< one per family, over the first half of the points
  std::vector<double> ratios_double;
  double max_ratio = 0.0;
  bool finite = true;
  bool stable = true;  ///< every family within 25% under point doubling
  std::size_t families = 0;
  std::size_t points = 0;
};

/// Vector-valued maximal inequality with f_j = sum_k |c_{j,k}| 1_{Q_{j,k}}:
///   || (sum_j (M f_j)^q)^{1/q} ||_p / || (sum_j |f_j|^q)^{1/q} ||_p,
/// both integrated by Monte Carlo over the support box grown by a factor of 3.
/// Report only.
inline FeffermanSteinReport fefferman_stein_check(const StepQuasiNorm& qn, double p, double q, std::size_t families,
                                                  const ExperimentSpec& ex, std::size_t n, std::uint64_t seed,
                                                  const MaximalSpec& spec = {}) {
  FeffermanSteinReport rep;
  rep.families = families;
  rep.points = 2 * n;
  const Dilation& a = qn.dilation();
  const std::size_t d = a.dim();
  rep.ratios.assign(families, 0.0);
  rep.ratios_double.assign(families, 0.0);
  parallel_for(families, [&](std::size_t t) {
    const std::uint64_t sd = derive_seed(seed, t);
    SparseSequence c = random_sequence(a, ex.window, ex.j_lo, ex.j_hi, ex.density, sd);
    if (c.empty()) return;
    Box box = support_box(a, c);
    Box big = box;
    for (std::size_t i = 0; i < d; ++i) {
      double w = box.hi[i] - box.lo[i];
      big.lo[i] -= w;
      big.hi[i] += w;
    }
    const double vol = big.volume();
    std::vector<Matrix> invs;
    for (const auto& [j, s] : c.scales()) invs.push_back(a.power(-j));
    CompensatedSum num_half, num_full, den_half, den_full;
    for (std::size_t pt = 0; pt < 2 * n; ++pt) {
      CounterRng rng(derive_seed(sd, 1), pt);
      Vec x(d);
      for (std::size_t i = 0; i < d; ++i) x[i] = rng.uniform(big.lo[i], big.hi[i]);
      double sm = 0.0, sf = 0.0;
      std::size_t level = 0;
      for (const auto& [j, s] : c.scales()) {
        double mf = maximal(qn, c, j, x, spec, 1.0, pt * 1000 + level);
        double f = c.get(j, cell_of(invs[level], x));
        sm += std::pow(mf, q);
        sf += std::pow(f, q);
        ++level;
      }
      double vm = std::pow(sm, p / q), vf = std::pow(sf, p / q);
      if (pt < n) {
        num_half.add(vm);
        den_half.add(vf);
      }
      num_full.add(vm);
      den_full.add(vf);
    }
    auto ratio = [&](const CompensatedSum& num, const CompensatedSum& den, std::size_t m) {
      double nn = std::pow(num.value() * vol / static_cast<double>(m), 1.0 / p);
      double dd = std::pow(den.value() * vol / static_cast<double>(m), 1.0 / p);
      return detail::safe_ratio(nn, dd);
    };
    rep.ratios[t] = ratio(num_half, den_half, n);
    rep.ratios_double[t] = ratio(num_full, den_full, 2 * n);
  });
  for (std::size_t t = 0; t < families; ++t) {
    rep.max_ratio = std::max(rep.max_ratio, rep.ratios_double[t]);
    rep.finite = rep.finite && std::isfinite(rep.ratios_double[t]);
    double lo = std::min(rep.ratios[t], rep.ratios_double[t]), hi = std::max(rep.ratios[t], rep.ratios_double[t]);
    rep.stable = rep.stable && hi <= 1.25 * lo;
  }
  return rep;
}

}  // namespace adl
