#pragma once

// Expansive matrices and their classification up to quasi-norm equivalence.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "adl/errors.hpp"
#include "adl/linalg.hpp"
#include "adl/parallel.hpp"

namespace adl {

/// A validated expansive matrix with cached determinant, inverse and spectrum.
class Dilation {
 public:
  std::size_t dim() const { return a_.dim(); }
  const Matrix& matrix() const { return a_; }
  const Matrix& inverse() const { return inv_; }
  double det() const { return det_; }
  double detmag() const { return std::abs(det_); }
  double log_detmag() const { return std::log(std::abs(det_)); }
  const std::vector<double>& eigmods() const { return spec_.moduli; }
  const Spectrum& spectrum() const { return spec_; }
  double lambda_minus() const { return lambda_minus_; }
  double lambda_plus() const { return lambda_plus_; }

  /// A^j for any integer j.
  Matrix power(std::int64_t j) const { return adl::power(a_, inv_, j); }

  /// True when every eigenvalue is real and strictly positive.
  bool positive_real_spectrum() const {
    if (!spec_.values_known) return false;
    return std::all_of(spec_.values.begin(), spec_.values.end(), [](std::complex<double> v) {
      return v.real() > 0.0 && std::abs(v.imag()) <= 1e-9 * std::abs(v);
    });
  }

  friend Dilation validate_dilation(const Matrix& m);

 private:
  Matrix a_, inv_;
  double det_ = 0.0;
  Spectrum spec_;
  double lambda_minus_ = 0.0, lambda_plus_ = 0.0;
};

/// Checks expansiveness and caches everything later modules need.
inline Dilation validate_dilation(const Matrix& m) {
  if (m.dim() == 0) fail(ErrorKind::InvalidInput, "empty matrix");
  if (!m.all_finite()) fail(ErrorKind::InvalidInput, "matrix has non-finite entries");
  double det = determinant(m);
  if (std::abs(det) < 1e-12) fail(ErrorKind::NotInvertible, "|det| = " + std::to_string(std::abs(det)));
  Dilation d;
  d.a_ = m;
  d.inv_ = adl::inverse(m);
  d.det_ = det;
  d.spec_ = adl::spectrum(m);
  const double lo = d.spec_.moduli.front();
  const double hi = d.spec_.moduli.back();
  if (lo <= 1.0 + 1e-9) {
    fail(ErrorKind::NotExpansive, "eigenvalue modulus " + std::to_string(lo) + " <= 1");
  }
  // Strictly inside (1, min|lambda|) and above max|lambda|.
  d.lambda_minus_ = 1.0 + 0.9 * (lo - 1.0);
  d.lambda_plus_ = hi + 0.1 * (lo - 1.0);
  return d;
}

/// ln|det A| / ln|det B|.
inline double epsilon(const Dilation& a, const Dilation& b) { return a.log_detmag() / b.log_detmag(); }

/// floor(eps * j), snapping products within 1e-9 of an integer so that exact
/// ratios such as ln 64 / ln 16 = 3/2 are not broken by rounding.
inline std::int64_t scale_floor(double eps, std::int64_t j) {
  double t = eps * static_cast<double>(j);
  double r = std::round(t);
  if (std::abs(t - r) <= 1e-9 * std::max(1.0, std::abs(t))) return static_cast<std::int64_t>(r);
  return static_cast<std::int64_t>(std::floor(t));
}

enum class EquivalenceVerdict { Equivalent, NotEquivalent, Inconclusive };

inline const char* to_string(EquivalenceVerdict v) {
  switch (v) {
    case EquivalenceVerdict::Equivalent: return "Equivalent";
    case EquivalenceVerdict::NotEquivalent: return "NotEquivalent";
    case EquivalenceVerdict::Inconclusive: return "Inconclusive";
  }
  return "?";
}

struct EquivalenceReport {
  double epsilon = 1.0;
  std::int64_t window = 0;            ///< requested J
  std::int64_t effective_window = 0;  ///< J actually evaluated (smaller after overflow)
  std::vector<std::pair<std::int64_t, double>> norms;  ///< (j, ||A^{-j} B^{floor(eps j)}||)
  double growth_slope = 0.0;
  double slope_tol = 0.02;
  double kappa = 1.5;
  double max_norm = 0.0;       ///< over |j| <= effective window
  double max_norm_half = 0.0;  ///< over |j| <= effective window / 2
  bool overflow = false;
  EquivalenceVerdict verdict = EquivalenceVerdict::Inconclusive;
};

inline constexpr double kOverflowNorm = 1e150;

/// Least-squares slope of ys against xs.
inline double ls_slope(const std::vector<double>& xs, const std::vector<double>& ys) {
  const double n = static_cast<double>(xs.size());
  if (xs.size() < 2) return 0.0;
  double mx = std::accumulate(xs.begin(), xs.end(), 0.0) / n;
  double my = std::accumulate(ys.begin(), ys.end(), 0.0) / n;
  double sxy = 0.0, sxx = 0.0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    sxy += (xs[i] - mx) * (ys[i] - my);
    sxx += (xs[i] - mx) * (xs[i] - mx);
  }
  return sxx == 0.0 ? 0.0 : sxy / sxx;
}

/// Profiles ||A^{-j} B^{floor(eps j)}|| over |j| <= J and applies the
/// boundedness heuristic. The raw profile is always part of the report.
inline EquivalenceReport classify_equivalence(const Dilation& a, const Dilation& b, std::int64_t J,
                                              double slope_tol = 0.02) {
  if (J < 8) fail(ErrorKind::PreconditionViolation, "classify_equivalence needs J >= 8");
  if (a.dim() != b.dim()) fail(ErrorKind::PreconditionViolation, "dimension mismatch");
  EquivalenceReport rep;
  rep.epsilon = epsilon(a, b);
  rep.window = J;
  rep.slope_tol = slope_tol;

  const std::size_t count = static_cast<std::size_t>(2 * J + 1);
  std::vector<double> vals(count);
  parallel_for(count, [&](std::size_t idx) {
    std::int64_t j = static_cast<std::int64_t>(idx) - J;
    Matrix m = a.power(-j) * b.power(scale_floor(rep.epsilon, j));
    double n = m.all_finite() ? operator_norm(m).value : std::numeric_limits<double>::infinity();
    vals[idx] = n;
  });

  std::int64_t eff = J;
  for (std::size_t idx = 0; idx < count; ++idx) {
    std::int64_t j = static_cast<std::int64_t>(idx) - J;
    if (!(vals[idx] <= kOverflowNorm)) {
      rep.overflow = true;
      eff = std::min(eff, std::abs(j) - 1);
    }
  }
  rep.effective_window = eff;
  std::vector<double> xs, ys;
  for (std::int64_t j = -eff; j <= eff; ++j) {
    double n = vals[static_cast<std::size_t>(j + J)];
    rep.norms.emplace_back(j, n);
    xs.push_back(static_cast<double>(std::abs(j)));
    ys.push_back(std::log(n));
    rep.max_norm = std::max(rep.max_norm, n);
    if (2 * std::abs(j) <= eff) rep.max_norm_half = std::max(rep.max_norm_half, n);
  }
  rep.growth_slope = ls_slope(xs, ys);

  if (rep.overflow || rep.growth_slope > 2.0 * slope_tol)
    rep.verdict = EquivalenceVerdict::NotEquivalent;
  else if (rep.growth_slope < slope_tol && rep.max_norm <= rep.kappa * rep.max_norm_half)
    rep.verdict = EquivalenceVerdict::Equivalent;
  else
    rep.verdict = EquivalenceVerdict::Inconclusive;
  return rep;
}

enum class CocycleVerdict { Finite, Infinite, Inconclusive };

inline const char* to_string(CocycleVerdict v) {
  switch (v) {
    case CocycleVerdict::Finite: return "Finite";
    case CocycleVerdict::Infinite: return "Infinite";
    case CocycleVerdict::Inconclusive: return "Inconclusive";
  }
  return "?";
}

struct CocycleProbe {
  double tau = 1e-6;
  std::int64_t window = 0;
  /// counts[J'] = #distinct {A^j B^{-j} : |j| <= J'} for J' = 0..J.
  std::vector<std::pair<std::int64_t, std::int64_t>> counts;
  CocycleVerdict verdict = CocycleVerdict::Inconclusive;
  /// Same probe for the order A^{-j} B^{j}.
  std::vector<std::pair<std::int64_t, std::int64_t>> counts_inverse_order;
  CocycleVerdict verdict_inverse_order = CocycleVerdict::Inconclusive;
  bool overflow = false;
};

namespace detail {

struct CocycleCounts {
  std::vector<std::pair<std::int64_t, std::int64_t>> counts;
  bool overflow = false;
};

// Greedy tau-clustering in the order j = 0, 1, -1, 2, -2, ...
inline CocycleCounts count_distinct_cocycles(const Dilation& a, const Dilation& b, std::int64_t J,
                                             double tau, bool inverse_order) {
  const std::int64_t sign = inverse_order ? -1 : 1;
  std::vector<Matrix> mats(static_cast<std::size_t>(2 * J + 1));
  parallel_for(mats.size(), [&](std::size_t idx) {
    std::int64_t j = static_cast<std::int64_t>(idx) - J;
    mats[idx] = a.power(sign * j) * b.power(-sign * j);
  });
  auto at = [&](std::int64_t j) -> const Matrix& { return mats[static_cast<std::size_t>(j + J)]; };

  CocycleCounts out;
  std::vector<const Matrix*> reps;
  auto add = [&](const Matrix& m) {
    if (!m.all_finite() || m.max_abs() > kOverflowNorm) return false;
    for (const Matrix* r : reps)
      if (max_abs_diff(*r, m) <= tau) return true;
    reps.push_back(&m);
    return true;
  };
  for (std::int64_t jj = 0; jj <= J; ++jj) {
    bool ok = add(at(jj));
    if (jj > 0) ok = add(at(-jj)) && ok;
    if (!ok) {
      out.overflow = true;
      break;
    }
    out.counts.emplace_back(jj, static_cast<std::int64_t>(reps.size()));
  }
  return out;
}

inline CocycleVerdict cocycle_verdict(const CocycleCounts& c, std::int64_t J) {
  if (c.overflow) return CocycleVerdict::Infinite;
  const std::int64_t half = (J + 1) / 2;
  const std::int64_t full = c.counts.back().second;
  const std::int64_t mid = c.counts[static_cast<std::size_t>(half)].second;
  if (full == mid) return CocycleVerdict::Finite;
  if (full - mid >= J - half) return CocycleVerdict::Infinite;
  return CocycleVerdict::Inconclusive;
}

}  // namespace detail

/// Counts the distinct matrices A^j B^{-j}, |j| <= J, under entrywise
/// tolerance tau. Finite iff the count stops growing over the second half of
/// the window.
inline CocycleProbe cocycle_probe(const Dilation& a, const Dilation& b, std::int64_t J, double tau = 1e-6) {
  if (J < 8) fail(ErrorKind::PreconditionViolation, "cocycle_probe needs J >= 8");
  if (!(tau > 0)) fail(ErrorKind::PreconditionViolation, "tau must be positive");
  CocycleProbe p;
  p.tau = tau;
  p.window = J;
  auto fwd = detail::count_distinct_cocycles(a, b, J, tau, false);
  auto inv = detail::count_distinct_cocycles(a, b, J, tau, true);
  p.counts = fwd.counts;
  p.counts_inverse_order = inv.counts;
  p.verdict = detail::cocycle_verdict(fwd, J);
  p.verdict_inverse_order = detail::cocycle_verdict(inv, J);
  p.overflow = fwd.overflow || inv.overflow;
  return p;
}

/// For positive real spectra with det A = det B, equivalence holds exactly
/// when A = B. Returns nullopt when that rule does not apply.
inline std::optional<EquivalenceVerdict> rigidity_oracle(const Dilation& a, const Dilation& b) {
  if (a.dim() != b.dim()) return std::nullopt;
  if (!a.positive_real_spectrum() || !b.positive_real_spectrum()) return std::nullopt;
  if (std::abs(a.det() - b.det()) > 1e-9 * std::max(std::abs(a.det()), std::abs(b.det())))
    return std::nullopt;
  return max_abs_diff(a.matrix(), b.matrix()) <= 1e-9 ? EquivalenceVerdict::Equivalent
                                                      : EquivalenceVerdict::NotEquivalent;
}

}  // namespace adl
