#pragma once

// A concrete symmetric homogeneous quasi-norm for an expansive matrix A.
//
// P = sum_{m>=0} (A^{-m})^T A^{-m} solves P - A^{-T} P A^{-1} = I, so the
// quadratic form q(y) = y^T P y satisfies q(A^{-1} y) = q(y) - |y|^2. Along
// the orbit A^{-m} x the form is therefore strictly decreasing, and
//
//   rho_A(x) = |det A|^{j(x)},  q(A^{-j} x) >= 1 > q(A^{-j-1} x),
//
// is well defined, even, and exactly homogeneous: j(Ax) = j(x) + 1.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <vector>

#include "adl/errors.hpp"
#include "adl/expansive.hpp"
#include "adl/linalg.hpp"
#include "adl/parallel.hpp"
#include "adl/rng.hpp"

namespace adl {

struct LyapunovForm {
  Matrix p;
  int doublings = 0;
  double residual = 0.0;  ///< max |P - A^{-T} P A^{-1} - I|
};

inline double lyapunov_residual(const Dilation& a, const Matrix& p) {
  const Matrix& inv = a.inverse();
  Matrix r = p - inv.transpose() * p * inv - Matrix::identity(a.dim());
  return r.max_abs();
}

/// Doubling recurrence P_{2n} = P_n + (A^{-n})^T P_n A^{-n}, P_1 = I.
inline LyapunovForm solve_lyapunov(const Dilation& a) {
  const std::size_t d = a.dim();
  Matrix p = Matrix::identity(d);
  Matrix m = a.inverse();
  LyapunovForm out;
  bool converged = false;
  for (int it = 1; it <= 200; ++it) {
    Matrix inc = m.transpose() * p * m;
    p = p + inc;
    out.doublings = it;
    if (inc.frobenius() < 1e-12) {
      converged = true;
      break;
    }
    m = m * m;
  }
  if (!converged) fail(ErrorKind::SlowConvergence, "Lyapunov series did not converge in 200 doublings");
  p = 0.5 * (p + p.transpose());
  out.p = p;
  out.residual = lyapunov_residual(a, p);
  return out;
}

/// Scale index j(x) of a point; saturated when the search hit the step cap.
struct RhoIndex {
  std::int64_t j = 0;
  bool zero = false;
  bool saturated = false;
};

class StepQuasiNorm {
 public:
  static constexpr std::int64_t kMaxSteps = 4000;

  explicit StepQuasiNorm(Dilation a) : a_(std::move(a)), form_(solve_lyapunov(a_)) {}

  const Dilation& dilation() const { return a_; }
  const LyapunovForm& form() const { return form_; }

  double q(std::span<const double> y) const {
    const std::size_t d = y.size();
    double s = 0.0;
    for (std::size_t i = 0; i < d; ++i) {
      double r = 0.0;
      for (std::size_t k = 0; k < d; ++k) r += form_.p(i, k) * y[k];
      s += y[i] * r;
    }
    return s;
  }

  RhoIndex index(std::span<const double> x) const {
    RhoIndex out;
    if (std::all_of(x.begin(), x.end(), [](double v) { return v == 0.0; })) {
      out.zero = true;
      return out;
    }
    const Matrix& a = a_.matrix();
    const Matrix& inv = a_.inverse();
    Vec y(x.begin(), x.end());
    std::int64_t j = 0;
    if (q(y) >= 1.0) {
      for (;;) {
        Vec next = inv * y;
        if (q(next) < 1.0) break;
        y = std::move(next);
        if (++j >= kMaxSteps) {
          out.saturated = true;
          break;
        }
      }
    } else {
      while (q(y) < 1.0) {
        y = a * y;
        if (--j <= -kMaxSteps) {
          out.saturated = true;
          break;
        }
      }
    }
    out.j = j;
    return out;
  }

  double value_of(const RhoIndex& idx) const {
    if (idx.zero) return 0.0;
    return std::pow(a_.detmag(), static_cast<double>(idx.j));
  }

  double rho(std::span<const double> x) const { return value_of(index(x)); }
  double operator()(std::span<const double> x) const { return rho(x); }

 private:
  Dilation a_;
  LyapunovForm form_;
};

/// rho_A(center - x) < r.
inline bool ball_membership(const StepQuasiNorm& qn, std::span<const double> center, double r,
                            std::span<const double> x) {
  return qn.rho(sub(center, x)) < r;
}

namespace detail {

// A^s g with s uniform in [lo, hi] and g standard normal: a Gaussian mixture
// with one component per dyadic-like shell.
inline Vec shell_sample(const Dilation& a, CounterRng& rng, std::int64_t s) {
  Vec g(a.dim());
  for (double& v : g) v = rng.normal();
  return a.power(s) * g;
}

}  // namespace detail

struct TriangleEstimate {
  double c_hat = 1.0;
  std::size_t samples = 0;
  std::uint64_t seed = 0;
  Vec argmax_x, argmax_y;
};

/// Empirical quasi-triangle constant max rho(x+y) / (rho(x) + rho(y)).
/// Pairs (x, 0) give ratio 1, so the estimate starts there.
inline TriangleEstimate quasi_triangle_estimate(const StepQuasiNorm& qn, std::size_t samples,
                                                std::uint64_t seed) {
  if (samples < 1000) fail(ErrorKind::PreconditionViolation, "quasi_triangle_estimate needs >= 1000 samples");
  const Dilation& a = qn.dilation();
  std::vector<double> ratio(samples);
  std::vector<Vec> xs(samples), ys(samples);
  parallel_for(samples, [&](std::size_t i) {
    CounterRng rng(seed, i);
    std::int64_t sx = rng.uniform_int(-8, 8);
    std::int64_t sy = std::clamp<std::int64_t>(sx + rng.uniform_int(-3, 3), -8, 8);
    Vec x = detail::shell_sample(a, rng, sx);
    Vec y = detail::shell_sample(a, rng, sy);
    Vec s(x.size());
    for (std::size_t k = 0; k < s.size(); ++k) s[k] = x[k] + y[k];
    double den = qn.rho(x) + qn.rho(y);
    ratio[i] = den > 0 ? qn.rho(s) / den : 0.0;
    xs[i] = std::move(x);
    ys[i] = std::move(y);
  });
  TriangleEstimate out;
  out.samples = samples;
  out.seed = seed;
  for (std::size_t i = 0; i < samples; ++i) {
    if (ratio[i] > out.c_hat) {
      out.c_hat = ratio[i];
      out.argmax_x = xs[i];
      out.argmax_y = ys[i];
    }
  }
  return out;
}

struct EnvelopeReport {
  double exponent_minus = 0.0;  ///< ln(lambda_-) / ln|det A|
  double exponent_plus = 0.0;   ///< ln(lambda_+) / ln|det A|
  double c_min = 1.0;           ///< smallest c making both envelopes hold on the samples
  std::size_t samples = 0;
  std::size_t above_one = 0;  ///< samples with rho >= 1
  std::size_t below_one = 0;
  std::uint64_t seed = 0;
};

/// Fits the two-sided power-law envelopes between rho_A and the Euclidean norm:
///   rho >= 1:  c^-1 rho^{e-} <= |x| <= c rho^{e+}
///   rho <= 1:  c^-1 rho^{e+} <= |x| <= c rho^{e-}
inline EnvelopeReport envelope_check(const StepQuasiNorm& qn, std::size_t samples, std::uint64_t seed) {
  const Dilation& a = qn.dilation();
  EnvelopeReport rep;
  rep.samples = samples;
  rep.seed = seed;
  const double ld = a.log_detmag();
  rep.exponent_minus = std::log(a.lambda_minus()) / ld;
  rep.exponent_plus = std::log(a.lambda_plus()) / ld;
  std::vector<double> need(samples, 1.0);
  std::vector<char> above(samples, 0);
  parallel_for(samples, [&](std::size_t i) {
    CounterRng rng(seed, i);
    Vec x = detail::shell_sample(a, rng, rng.uniform_int(-8, 8));
    double r = qn.rho(x);
    double n = norm2(x);
    if (r == 0.0 || n == 0.0) return;
    double lo_exp = r >= 1.0 ? rep.exponent_minus : rep.exponent_plus;
    double hi_exp = r >= 1.0 ? rep.exponent_plus : rep.exponent_minus;
    // c >= rho^lo / |x| and c >= |x| / rho^hi
    need[i] = std::max(std::pow(r, lo_exp) / n, n / std::pow(r, hi_exp));
    above[i] = r >= 1.0;
  });
  for (std::size_t i = 0; i < samples; ++i) {
    rep.c_min = std::max(rep.c_min, need[i]);
    (above[i] ? rep.above_one : rep.below_one)++;
  }
  if (!std::isfinite(rep.c_min) || rep.c_min > 1e6)
    fail(ErrorKind::EnvelopeViolation, "no envelope constant <= 1e6 fits (c = " + std::to_string(rep.c_min) + ")");
  return rep;
}

}  // namespace adl
