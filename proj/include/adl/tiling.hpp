#pragma once

// Dilated cubes Q_{j,k} = A^j([0,1)^d + k). Cubes are half-open throughout,
// so each scale partitions R^d and membership is a function.

#include <cmath>
#include <cstdint>
#include <vector>

#include "adl/errors.hpp"
#include "adl/expansive.hpp"
#include "adl/geometry.hpp"
#include "adl/linalg.hpp"
#include "adl/parallel.hpp"

namespace adl {

/// floor() that snaps values within 1e-10 (relative) of an integer onto it,
/// so corners A^j k computed in floating point land in their own cube.
inline std::int64_t snapped_floor(double y) {
  double r = std::round(y);
  if (std::abs(y - r) <= 1e-10 * std::max(1.0, std::abs(y))) return static_cast<std::int64_t>(r);
  return static_cast<std::int64_t>(std::floor(y));
}

/// Cell index of x at the scale whose inverse power is inv_pow = A^{-j}.
inline IntVec cell_of(const Matrix& inv_pow, std::span<const double> x) {
  Vec y = inv_pow * x;
  IntVec k(y.size());
  for (std::size_t i = 0; i < y.size(); ++i) k[i] = snapped_floor(y[i]);
  return k;
}

inline IntVec cube_containing(const Dilation& a, std::int64_t j, std::span<const double> x) {
  return cell_of(a.power(-j), x);
}

/// Lower-left corner A^j k.
inline Vec cube_corner(const Dilation& a, std::int64_t j, const IntVec& k) { return a.power(j) * to_real(k); }

inline double cube_volume(const Dilation& a, std::int64_t j) {
  return std::pow(a.detmag(), static_cast<double>(j));
}

/// Calls f(k) for every k in the integer box [lo, hi] (inclusive), in
/// lexicographic order.
template <class F>
void for_each_index(const IntVec& lo, const IntVec& hi, F&& f) {
  const std::size_t d = lo.size();
  for (std::size_t i = 0; i < d; ++i)
    if (lo[i] > hi[i]) return;
  IntVec k = lo;
  for (;;) {
    f(static_cast<const IntVec&>(k));
    std::size_t i = d;
    while (i-- > 0) {
      if (k[i] < hi[i]) {
        ++k[i];
        break;
      }
      k[i] = lo[i];
      if (i == 0) return;
    }
  }
}

inline constexpr double kMaxWindowCandidates = 1e8;

/// Every k whose cube A^j([0,1)^d + k) overlaps the box in positive measure,
/// lexicographically sorted. Candidates come from the integer hull of the
/// preimage A^{-j}(box); each is confirmed by an exact overlap test.
inline std::vector<IntVec> cubes_in_box(const Dilation& a, std::int64_t j, const Box& box) {
  std::vector<IntVec> out;
  if (box.empty()) return out;
  const std::size_t d = a.dim();
  const Matrix pw = a.power(j);
  const Matrix inv = a.power(-j);
  Box pre = parallelepiped_bounds(inv * box.lo, inv * box.edges());
  IntVec lo(d), hi(d);
  double count = 1.0;
  for (std::size_t i = 0; i < d; ++i) {
    lo[i] = static_cast<std::int64_t>(std::floor(pre.lo[i])) - 1;
    hi[i] = static_cast<std::int64_t>(std::ceil(pre.hi[i])) + 1;
    count *= static_cast<double>(hi[i] - lo[i] + 1);
  }
  if (count > kMaxWindowCandidates)
    fail(ErrorKind::WindowTooLarge, std::to_string(count) + " candidate cubes at scale " + std::to_string(j));

  std::vector<IntVec> cand;
  cand.reserve(static_cast<std::size_t>(count));
  for_each_index(lo, hi, [&](const IntVec& k) { cand.push_back(k); });
  std::vector<char> keep(cand.size(), 0);
  const bool axis_aligned = is_diagonal(pw);
  const Matrix edges = box.edges();
  parallel_for(cand.size(), [&](std::size_t c) {
    Vec corner = pw * to_real(cand[c]);
    if (axis_aligned) {
      bool hit = true;
      for (std::size_t i = 0; i < d && hit; ++i) {
        double e0 = corner[i], e1 = corner[i] + pw(i, i);
        if (e0 > e1) std::swap(e0, e1);
        hit = e0 < box.hi[i] && box.lo[i] < e1;
      }
      keep[c] = hit;
    } else {
      keep[c] = parallelepipeds_meet(corner, pw, box.lo, edges, 1e-9);
    }
  });
  for (std::size_t c = 0; c < cand.size(); ++c)
    if (keep[c]) out.push_back(std::move(cand[c]));
  return out;
}

/// floor(log_{|det A|} r), snapping r within 1e-12 (relative) of an exact
/// determinant power onto that power.
inline std::int64_t scale_of_ball(const Dilation& a, double r) {
  if (!(r > 0)) fail(ErrorKind::PreconditionViolation, "ball radius must be positive");
  double t = std::log(r) / a.log_detmag();
  double n = std::round(t);
  double pw = std::pow(a.detmag(), n);
  if (std::abs(r / pw - 1.0) <= 1e-12) return static_cast<std::int64_t>(n);
  return static_cast<std::int64_t>(std::floor(t));
}

/// Integer hull (inclusive) of the cells meeting a box at scale j.
inline std::pair<IntVec, IntVec> index_hull(const std::vector<IntVec>& cells) {
  if (cells.empty()) return {};
  IntVec lo = cells.front(), hi = cells.front();
  for (const auto& k : cells)
    for (std::size_t i = 0; i < k.size(); ++i) {
      lo[i] = std::min(lo[i], k[i]);
      hi[i] = std::max(hi[i], k[i]);
    }
  return {lo, hi};
}

}  // namespace adl
