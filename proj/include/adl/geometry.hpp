#pragma once

// Linear feasibility for intersecting parallelepipeds x + S[0,1]^d and
// y + T[0,1]^d. The test is a phase-one simplex on
//   [S, -T] (u, v) = y - x,   (u, v) in [0,1]^{2d},
// which works in any dimension.

#include <cmath>
#include <cstddef>
#include <limits>
#include <vector>

#include "adl/linalg.hpp"

namespace adl {

/// Does some w in [0,1]^n satisfy g w = b (g given row-wise)?
inline bool box_feasible(const std::vector<Vec>& g, const Vec& b, double tol = 1e-10) {
  const std::size_t meq = g.size();
  const std::size_t n = meq ? g[0].size() : 0;
  // Columns: w (n), slack s (n), artificial a (meq), rhs.
  const std::size_t cols = 2 * n + meq + 1;
  const std::size_t rows = meq + n;
  std::vector<Vec> t(rows, Vec(cols, 0.0));
  std::vector<std::size_t> basis(rows);
  double scale = 1.0;
  for (std::size_t i = 0; i < meq; ++i) {
    double sg = b[i] < 0 ? -1.0 : 1.0;
    for (std::size_t j = 0; j < n; ++j) {
      t[i][j] = sg * g[i][j];
      scale = std::max(scale, std::abs(g[i][j]));
    }
    t[i][2 * n + i] = 1.0;
    t[i][cols - 1] = sg * b[i];
    scale = std::max(scale, std::abs(b[i]));
    basis[i] = 2 * n + i;
  }
  for (std::size_t k = 0; k < n; ++k) {
    Vec& r = t[meq + k];
    r[k] = 1.0;
    r[n + k] = 1.0;
    r[cols - 1] = 1.0;
    basis[meq + k] = n + k;
  }
  // Reduced costs for min sum(a).
  Vec cost(cols, 0.0);
  for (std::size_t i = 0; i < meq; ++i)
    for (std::size_t j = 0; j < cols; ++j)
      if (j < 2 * n || j == cols - 1) cost[j] -= t[i][j];
  const double eps = 1e-12 * scale;
  for (int iter = 0; iter < 500; ++iter) {
    // Bland's rule: lowest-index improving column.
    std::size_t enter = cols;
    for (std::size_t j = 0; j + 1 < cols; ++j) {
      if (cost[j] < -eps) {
        enter = j;
        break;
      }
    }
    if (enter == cols) break;
    std::size_t leave = rows;
    double best = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < rows; ++i) {
      if (t[i][enter] > eps) {
        double ratio = t[i][cols - 1] / t[i][enter];
        if (ratio < best - 1e-15 || (std::abs(ratio - best) <= 1e-15 && leave < rows && basis[i] < basis[leave])) {
          best = ratio;
          leave = i;
        }
      }
    }
    if (leave == rows) break;  // unbounded direction; cannot happen with box rows
    double piv = t[leave][enter];
    for (double& v : t[leave]) v /= piv;
    for (std::size_t i = 0; i < rows; ++i) {
      if (i == leave || t[i][enter] == 0.0) continue;
      double f = t[i][enter];
      for (std::size_t j = 0; j < cols; ++j) t[i][j] -= f * t[leave][j];
    }
    double f = cost[enter];
    for (std::size_t j = 0; j < cols; ++j) cost[j] -= f * t[leave][j];
    basis[leave] = enter;
  }
  double infeas = 0.0;
  for (std::size_t i = 0; i < rows; ++i)
    if (basis[i] >= 2 * n && basis[i] < 2 * n + meq) infeas += std::max(0.0, t[i][cols - 1]);
  return infeas <= tol * scale;
}

/// (x + S[m, 1-m]^d) and (y + T[m, 1-m]^d) intersect. A negative margin m
/// enlarges both domains (closed test with tolerance); a positive margin
/// tests for interior overlap.
inline bool parallelepipeds_meet(std::span<const double> x, const Matrix& s, std::span<const double> y,
                                 const Matrix& t, double margin) {
  const std::size_t d = x.size();
  const double len = 1.0 - 2.0 * margin;
  std::vector<Vec> g(d, Vec(2 * d));
  Vec b(d);
  for (std::size_t i = 0; i < d; ++i) {
    double rs = 0.0, rt = 0.0;
    for (std::size_t k = 0; k < d; ++k) {
      g[i][k] = len * s(i, k);
      g[i][d + k] = -len * t(i, k);
      rs += s(i, k);
      rt += t(i, k);
    }
    b[i] = y[i] - x[i] + margin * (rt - rs);
  }
  return box_feasible(g, b);
}

/// Diameter of the parallelepiped S[0,1]^d: max |S e| over e in {-1,0,1}^d.
inline double parallelepiped_diameter(const Matrix& s) {
  const std::size_t d = s.dim();
  std::size_t total = 1;
  for (std::size_t i = 0; i < d; ++i) total *= 3;
  double best = 0.0;
  Vec e(d), v(d);
  for (std::size_t code = 0; code < total; ++code) {
    std::size_t c = code;
    for (std::size_t i = 0; i < d; ++i) {
      e[i] = static_cast<double>(c % 3) - 1.0;
      c /= 3;
    }
    best = std::max(best, norm2(s * e));
  }
  return best;
}

/// Axis-aligned half-open box [lo, hi).
struct Box {
  Vec lo, hi;

  std::size_t dim() const { return lo.size(); }
  bool empty() const {
    for (std::size_t i = 0; i < lo.size(); ++i)
      if (!(lo[i] < hi[i])) return true;
    return false;
  }
  double volume() const {
    if (empty()) return 0.0;
    double v = 1.0;
    for (std::size_t i = 0; i < lo.size(); ++i) v *= hi[i] - lo[i];
    return v;
  }
  Matrix edges() const {
    Vec w(lo.size());
    for (std::size_t i = 0; i < lo.size(); ++i) w[i] = hi[i] - lo[i];
    return Matrix::diagonal(w);
  }
  Box inflated(double by) const {
    Box b = *this;
    for (std::size_t i = 0; i < lo.size(); ++i) {
      b.lo[i] -= by;
      b.hi[i] += by;
    }
    return b;
  }
};

/// Bounding box of the parallelepiped corner + M[0,1]^d.
inline Box parallelepiped_bounds(std::span<const double> corner, const Matrix& m) {
  const std::size_t d = corner.size();
  Box b{Vec(corner.begin(), corner.end()), Vec(corner.begin(), corner.end())};
  for (std::size_t i = 0; i < d; ++i)
    for (std::size_t k = 0; k < d; ++k) {
      double v = m(i, k);
      (v < 0 ? b.lo[i] : b.hi[i]) += v;
    }
  return b;
}

inline void extend(Box& into, const Box& other) {
  if (into.lo.empty()) {
    into = other;
    return;
  }
  for (std::size_t i = 0; i < into.lo.size(); ++i) {
    into.lo[i] = std::min(into.lo[i], other.lo[i]);
    into.hi[i] = std::max(into.hi[i], other.hi[i]);
  }
}

inline bool is_diagonal(const Matrix& m) {
  for (std::size_t i = 0; i < m.dim(); ++i)
    for (std::size_t k = 0; k < m.dim(); ++k)
      if (i != k && m(i, k) != 0.0) return false;
  return true;
}

}  // namespace adl
