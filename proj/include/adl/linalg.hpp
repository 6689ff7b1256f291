#pragma once

// Small dense linear algebra for d x d real matrices. Dimensions in this
// library are tiny (d = 2 in every experiment), so everything is plain
// row-major storage with value semantics.

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstddef>
#include <cstdint>
#include <initializer_list>
#include <limits>
#include <numeric>
#include <span>
#include <vector>

#include "adl/errors.hpp"

namespace adl {

using Vec = std::vector<double>;
using IntVec = std::vector<std::int64_t>;

namespace detail {

// Error-free transformations (Knuth TwoSum, FMA TwoProd).
inline void two_sum(double a, double b, double& s, double& e) {
  s = a + b;
  double z = s - a;
  e = (a - (s - z)) + (b - z);
}

inline void two_prod(double a, double b, double& p, double& e) {
  p = a * b;
  e = std::fma(a, b, -p);
}

}  // namespace detail

/// Dot product with doubled working precision (Ogita-Rump-Oishi Dot2).
inline double dot2(std::span<const double> x, std::span<const double> y) {
  double s = 0.0, c = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    double p, ep, t, et;
    detail::two_prod(x[i], y[i], p, ep);
    detail::two_sum(s, p, t, et);
    s = t;
    c += ep + et;
  }
  return s + c;
}

/// Neumaier compensated summation.
class CompensatedSum {
 public:
  void add(double v) {
    double t = sum_ + v;
    if (std::abs(sum_) >= std::abs(v))
      comp_ += (sum_ - t) + v;
    else
      comp_ += (v - t) + sum_;
    sum_ = t;
  }
  double value() const { return sum_ + comp_; }

 private:
  double sum_ = 0.0;
  double comp_ = 0.0;
};

inline double norm2(std::span<const double> x) {
  double scale = 0.0;
  for (double v : x) scale = std::max(scale, std::abs(v));
  if (scale == 0.0 || !std::isfinite(scale)) return scale;
  double s = 0.0;
  for (double v : x) s += (v / scale) * (v / scale);
  return scale * std::sqrt(s);
}

inline Vec sub(std::span<const double> x, std::span<const double> y) {
  Vec r(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) r[i] = x[i] - y[i];
  return r;
}

inline Vec to_real(const IntVec& k) { return Vec(k.begin(), k.end()); }

class Matrix {
 public:
  Matrix() = default;
  explicit Matrix(std::size_t n) : n_(n), a_(n * n, 0.0) {}
  Matrix(std::size_t n, std::vector<double> row_major) : n_(n), a_(std::move(row_major)) {
    if (a_.size() != n * n) fail(ErrorKind::InvalidInput, "matrix entry count does not match dimension");
  }
  Matrix(std::initializer_list<std::initializer_list<double>> rows) : n_(rows.size()) {
    a_.reserve(n_ * n_);
    for (const auto& r : rows) {
      if (r.size() != n_) fail(ErrorKind::InvalidInput, "matrix must be square");
      a_.insert(a_.end(), r.begin(), r.end());
    }
  }

  static Matrix identity(std::size_t n) {
    Matrix m(n);
    for (std::size_t i = 0; i < n; ++i) m(i, i) = 1.0;
    return m;
  }
  static Matrix diagonal(std::span<const double> d) {
    Matrix m(d.size());
    for (std::size_t i = 0; i < d.size(); ++i) m(i, i) = d[i];
    return m;
  }
  static Matrix diagonal(std::initializer_list<double> d) {
    return diagonal(std::span<const double>(d.begin(), d.size()));
  }
  /// s * R_theta in the plane.
  static Matrix scaled_rotation(double s, double theta) {
    return Matrix{{s * std::cos(theta), -s * std::sin(theta)}, {s * std::sin(theta), s * std::cos(theta)}};
  }

  std::size_t dim() const { return n_; }
  double& operator()(std::size_t i, std::size_t j) { return a_[i * n_ + j]; }
  double operator()(std::size_t i, std::size_t j) const { return a_[i * n_ + j]; }
  std::span<const double> row(std::size_t i) const { return {a_.data() + i * n_, n_}; }
  const std::vector<double>& data() const { return a_; }

  bool operator==(const Matrix&) const = default;

  Matrix transpose() const {
    Matrix t(n_);
    for (std::size_t i = 0; i < n_; ++i)
      for (std::size_t j = 0; j < n_; ++j) t(j, i) = (*this)(i, j);
    return t;
  }

  friend Matrix operator*(const Matrix& x, const Matrix& y) {
    const std::size_t n = x.n_;
    Matrix r(n);
    std::vector<double> col(n);
    for (std::size_t j = 0; j < n; ++j) {
      for (std::size_t k = 0; k < n; ++k) col[k] = y(k, j);
      for (std::size_t i = 0; i < n; ++i) r(i, j) = dot2(x.row(i), col);
    }
    return r;
  }

  friend Vec operator*(const Matrix& m, std::span<const double> v) {
    Vec r(m.n_);
    for (std::size_t i = 0; i < m.n_; ++i) {
      double s = 0.0;
      for (std::size_t j = 0; j < m.n_; ++j) s += m(i, j) * v[j];
      r[i] = s;
    }
    return r;
  }
  friend Vec operator*(const Matrix& m, const Vec& v) { return m * std::span<const double>(v); }

  friend Matrix operator+(Matrix x, const Matrix& y) {
    for (std::size_t i = 0; i < x.a_.size(); ++i) x.a_[i] += y.a_[i];
    return x;
  }
  friend Matrix operator-(Matrix x, const Matrix& y) {
    for (std::size_t i = 0; i < x.a_.size(); ++i) x.a_[i] -= y.a_[i];
    return x;
  }
  friend Matrix operator*(double s, Matrix x) {
    for (double& v : x.a_) v *= s;
    return x;
  }

  double max_abs() const {
    double m = 0.0;
    for (double v : a_) m = std::max(m, std::abs(v));
    return m;
  }
  double frobenius() const { return norm2(a_); }
  bool all_finite() const {
    return std::all_of(a_.begin(), a_.end(), [](double v) { return std::isfinite(v); });
  }

 private:
  std::size_t n_ = 0;
  std::vector<double> a_;
};

/// max_ij |x_ij - y_ij|
inline double max_abs_diff(const Matrix& x, const Matrix& y) { return (x - y).max_abs(); }

struct LuResult {
  Matrix lu;
  std::vector<std::size_t> perm;
  int sign = 1;
  bool singular = false;
};

inline LuResult lu_decompose(const Matrix& m) {
  const std::size_t n = m.dim();
  LuResult r{m, std::vector<std::size_t>(n), 1, false};
  std::iota(r.perm.begin(), r.perm.end(), 0);
  Matrix& a = r.lu;
  for (std::size_t k = 0; k < n; ++k) {
    std::size_t piv = k;
    for (std::size_t i = k + 1; i < n; ++i)
      if (std::abs(a(i, k)) > std::abs(a(piv, k))) piv = i;
    if (a(piv, k) == 0.0) {
      r.singular = true;
      continue;
    }
    if (piv != k) {
      for (std::size_t j = 0; j < n; ++j) std::swap(a(k, j), a(piv, j));
      std::swap(r.perm[k], r.perm[piv]);
      r.sign = -r.sign;
    }
    for (std::size_t i = k + 1; i < n; ++i) {
      a(i, k) /= a(k, k);
      for (std::size_t j = k + 1; j < n; ++j) a(i, j) -= a(i, k) * a(k, j);
    }
  }
  return r;
}

inline double determinant(const Matrix& m) {
  auto r = lu_decompose(m);
  if (r.singular) return 0.0;
  double d = r.sign;
  for (std::size_t i = 0; i < m.dim(); ++i) d *= r.lu(i, i);
  return d;
}

inline Matrix inverse(const Matrix& m) {
  const std::size_t n = m.dim();
  auto r = lu_decompose(m);
  if (r.singular) fail(ErrorKind::NotInvertible, "singular matrix");
  Matrix inv(n);
  Vec y(n);
  for (std::size_t c = 0; c < n; ++c) {
    for (std::size_t i = 0; i < n; ++i) {
      double s = (r.perm[i] == c) ? 1.0 : 0.0;
      for (std::size_t j = 0; j < i; ++j) s -= r.lu(i, j) * y[j];
      y[i] = s;
    }
    for (std::size_t ii = n; ii-- > 0;) {
      double s = y[ii];
      for (std::size_t j = ii + 1; j < n; ++j) s -= r.lu(ii, j) * inv(j, c);
      inv(ii, c) = s / r.lu(ii, ii);
    }
  }
  return inv;
}

/// Solves m x = b by LU with partial pivoting.
inline Vec solve(const Matrix& m, std::span<const double> b) {
  const std::size_t n = m.dim();
  auto r = lu_decompose(m);
  if (r.singular) fail(ErrorKind::NotInvertible, "singular matrix");
  Vec y(n), x(n);
  for (std::size_t i = 0; i < n; ++i) {
    double s = b[r.perm[i]];
    for (std::size_t j = 0; j < i; ++j) s -= r.lu(i, j) * y[j];
    y[i] = s;
  }
  for (std::size_t i = n; i-- > 0;) {
    double s = y[i];
    for (std::size_t j = i + 1; j < n; ++j) s -= r.lu(i, j) * x[j];
    x[i] = s / r.lu(i, i);
  }
  return x;
}

/// base^e for e >= 0 by repeated squaring.
inline Matrix power_nonneg(Matrix base, std::uint64_t e) {
  Matrix result = Matrix::identity(base.dim());
  while (e > 0) {
    if (e & 1u) result = result * base;
    e >>= 1u;
    if (e) base = base * base;
  }
  return result;
}

/// m^e for any integer e; inv must be m^{-1}.
inline Matrix power(const Matrix& m, const Matrix& inv, std::int64_t e) {
  if (e >= 0) return power_nonneg(m, static_cast<std::uint64_t>(e));
  return power_nonneg(inv, static_cast<std::uint64_t>(-e));
}

struct NormResult {
  double value = 0.0;
  int iterations = 0;
  bool converged = false;
};

/// Spectral norm: sqrt of the largest eigenvalue of M^T M, found by cyclic
/// Jacobi sweeps (accurate to rounding, unlike power iteration when the top
/// two singular values are close). `iterations` counts sweeps.
inline NormResult operator_norm(const Matrix& m, double rel_tol = 1e-15, int max_sweeps = 100) {
  const std::size_t n = m.dim();
  NormResult out;
  const double scale = m.max_abs();
  if (scale == 0.0) {
    out.converged = true;
    return out;
  }
  if (!std::isfinite(scale)) {
    out.value = std::numeric_limits<double>::infinity();
    return out;
  }
  // Work with m / scale so squares cannot overflow.
  Matrix ms = (1.0 / scale) * m;
  std::vector<double> g = (ms.transpose() * ms).data();
  auto at = [&](std::size_t i, std::size_t j) -> double& { return g[i * n + j]; };
  for (int sweep = 1; sweep <= max_sweeps; ++sweep) {
    double off = 0.0, total = 0.0;
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = 0; j < n; ++j) {
        total += at(i, j) * at(i, j);
        if (i != j) off += at(i, j) * at(i, j);
      }
    out.iterations = sweep - 1;
    if (off <= rel_tol * rel_tol * total) {
      out.converged = true;
      break;
    }
    for (std::size_t p = 0; p + 1 < n; ++p)
      for (std::size_t q = p + 1; q < n; ++q) {
        const double apq = at(p, q);
        if (apq == 0.0) continue;
        const double theta = (at(q, q) - at(p, p)) / (2.0 * apq);
        const double t = (theta >= 0 ? 1.0 : -1.0) / (std::abs(theta) + std::sqrt(theta * theta + 1.0));
        const double c = 1.0 / std::sqrt(t * t + 1.0), s = t * c;
        for (std::size_t k = 0; k < n; ++k) {
          const double gkp = at(k, p), gkq = at(k, q);
          at(k, p) = c * gkp - s * gkq;
          at(k, q) = s * gkp + c * gkq;
        }
        for (std::size_t k = 0; k < n; ++k) {
          const double gpk = at(p, k), gqk = at(q, k);
          at(p, k) = c * gpk - s * gqk;
          at(q, k) = s * gpk + c * gqk;
        }
      }
  }
  double lambda = 0.0;
  for (std::size_t i = 0; i < n; ++i) lambda = std::max(lambda, at(i, i));
  out.value = scale * std::sqrt(lambda);
  return out;
}

/// Householder QR; returns (Q, R) with m = Q R.
inline void qr_decompose(const Matrix& m, Matrix& q, Matrix& r) {
  const std::size_t n = m.dim();
  r = m;
  q = Matrix::identity(n);
  Vec v(n);
  for (std::size_t k = 0; k + 1 < n; ++k) {
    double alpha = 0.0;
    for (std::size_t i = k; i < n; ++i) alpha += r(i, k) * r(i, k);
    alpha = std::sqrt(alpha);
    if (alpha == 0.0) continue;
    if (r(k, k) > 0) alpha = -alpha;
    std::fill(v.begin(), v.end(), 0.0);
    for (std::size_t i = k; i < n; ++i) v[i] = r(i, k);
    v[k] -= alpha;
    double vn = 0.0;
    for (std::size_t i = k; i < n; ++i) vn += v[i] * v[i];
    if (vn == 0.0) continue;
    for (std::size_t j = 0; j < n; ++j) {
      double s = 0.0;
      for (std::size_t i = k; i < n; ++i) s += v[i] * r(i, j);
      s = 2.0 * s / vn;
      for (std::size_t i = k; i < n; ++i) r(i, j) -= s * v[i];
    }
    for (std::size_t i = 0; i < n; ++i) {
      double s = 0.0;
      for (std::size_t jj = k; jj < n; ++jj) s += q(i, jj) * v[jj];
      s = 2.0 * s / vn;
      for (std::size_t jj = k; jj < n; ++jj) q(i, jj) -= s * v[jj];
    }
  }
}

namespace detail {

inline std::vector<std::complex<double>> quadratic_roots(double b, double c) {
  // roots of x^2 + b x + c
  double disc = b * b - 4.0 * c;
  if (disc >= 0.0) {
    double sq = std::sqrt(disc);
    double q = -0.5 * (b + (b >= 0 ? sq : -sq));
    double r1 = q;
    double r2 = (q != 0.0) ? c / q : 0.0;
    if (q == 0.0) r1 = r2 = 0.0;
    return {r1, r2};
  }
  double re = -0.5 * b, im = 0.5 * std::sqrt(-disc);
  return {{re, im}, {re, -im}};
}

inline std::vector<std::complex<double>> cubic_roots(double c2, double c1, double c0) {
  // roots of x^3 - c2 x^2 + c1 x - c0
  auto p = [&](double x) { return ((x - c2) * x + c1) * x - c0; };
  double bound = 1.0 + std::max({std::abs(c2), std::abs(c1), std::abs(c0)});
  double lo = -bound, hi = bound;
  for (int it = 0; it < 200 && hi - lo > 0; ++it) {
    double mid = 0.5 * (lo + hi);
    if (mid == lo || mid == hi) break;
    if ((p(lo) < 0) == (p(mid) < 0))
      lo = mid;
    else
      hi = mid;
  }
  double r = 0.5 * (lo + hi);
  for (int it = 0; it < 3; ++it) {
    double d = (3.0 * r - 2.0 * c2) * r + c1;
    if (d == 0.0) break;
    double nr = r - p(r) / d;
    if (!std::isfinite(nr)) break;
    r = nr;
  }
  double b = r - c2;
  double c = c1 + r * b;
  auto rest = quadratic_roots(b, c);
  return {r, rest[0], rest[1]};
}

}  // namespace detail

struct Spectrum {
  /// Eigenvalue moduli, ascending.
  std::vector<double> moduli;
  /// Individual eigenvalues when resolvable (always for d <= 3; for d >= 4 only
  /// when every diagonal block after QR iteration has size <= 2).
  std::vector<std::complex<double>> values;
  bool values_known = false;
};

/// Eigenvalue moduli: characteristic-polynomial roots for d <= 3, unshifted QR
/// iteration for d >= 4. Unshifted QR separates eigenvalues of distinct moduli
/// only, so each surviving diagonal block holds one modulus, recovered as
/// |det(block)|^{1/size}.
inline Spectrum spectrum(const Matrix& m, int max_iter = 10000) {
  const std::size_t n = m.dim();
  Spectrum s;
  if (n == 1) {
    s.values = {m(0, 0)};
  } else if (n == 2) {
    double tr = m(0, 0) + m(1, 1);
    double det = m(0, 0) * m(1, 1) - m(0, 1) * m(1, 0);
    s.values = detail::quadratic_roots(-tr, det);
  } else if (n == 3) {
    double tr = m(0, 0) + m(1, 1) + m(2, 2);
    double minors = m(0, 0) * m(1, 1) - m(0, 1) * m(1, 0) + m(0, 0) * m(2, 2) - m(0, 2) * m(2, 0) +
                    m(1, 1) * m(2, 2) - m(1, 2) * m(2, 1);
    s.values = detail::cubic_roots(tr, minors, determinant(m));
  }
  if (n <= 3) {
    s.values_known = true;
    for (auto v : s.values) s.moduli.push_back(std::abs(v));
    std::sort(s.moduli.begin(), s.moduli.end());
    return s;
  }

  Matrix a = m;
  const double tol = 1e-13 * std::max(m.frobenius(), 1e-300);
  auto split_points = [&](const Matrix& x) {
    std::vector<std::size_t> cuts{0};
    for (std::size_t i = 1; i < n; ++i) {
      double off = 0.0;
      for (std::size_t r = i; r < n; ++r)
        for (std::size_t c = 0; c < i; ++c) off = std::max(off, std::abs(x(r, c)));
      if (off <= tol) cuts.push_back(i);
    }
    cuts.push_back(n);
    return cuts;
  };
  std::vector<std::size_t> cuts = split_points(a), prev;
  int stable = 0;
  for (int it = 0; it < max_iter; ++it) {
    Matrix q, r;
    qr_decompose(a, q, r);
    a = r * q;
    if (it % 8 == 7) {
      cuts = split_points(a);
      stable = (cuts == prev) ? stable + 1 : 0;
      prev = cuts;
      if (cuts.size() == n + 1 || stable >= 64) break;
    }
  }
  cuts = split_points(a);
  s.values_known = true;
  for (std::size_t b = 0; b + 1 < cuts.size(); ++b) {
    std::size_t lo = cuts[b], sz = cuts[b + 1] - cuts[b];
    Matrix blk(sz);
    for (std::size_t i = 0; i < sz; ++i)
      for (std::size_t j = 0; j < sz; ++j) blk(i, j) = a(lo + i, lo + j);
    double mod = std::pow(std::abs(determinant(blk)), 1.0 / static_cast<double>(sz));
    for (std::size_t i = 0; i < sz; ++i) s.moduli.push_back(mod);
    if (sz == 1) {
      s.values.push_back(blk(0, 0));
    } else if (sz == 2) {
      auto v = detail::quadratic_roots(-(blk(0, 0) + blk(1, 1)), determinant(blk));
      s.values.insert(s.values.end(), v.begin(), v.end());
    } else {
      s.values_known = false;
    }
  }
  if (!s.values_known) s.values.clear();
  std::sort(s.moduli.begin(), s.moduli.end());
  return s;
}

}  // namespace adl
