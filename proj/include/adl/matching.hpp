#pragma once

// Bounded-displacement injections between lattices S Z^d and T Z^d.
//
// A source x = S m is adjacent to a target y = T n when the fundamental
// domains x + S[0,1]^d and y + T[0,1]^d meet. Adjacent pairs are at most
// r_S + r_T apart, and when |det S| >= |det T| the volume count
// |E| |det S| <= |N(E)| |det T| gives Hall's condition, so a maximum bipartite
// matching saturates every finite source window.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <map>
#include <queue>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "adl/errors.hpp"
#include "adl/expansive.hpp"
#include "adl/geometry.hpp"
#include "adl/linalg.hpp"
#include "adl/parallel.hpp"
#include "adl/tiling.hpp"

namespace adl {

struct LatticePair {
  Matrix s, t;
  double det_s = 0.0, det_t = 0.0;  ///< |det S|, |det T|
  double r_s = 0.0, r_t = 0.0;      ///< diameters of S[0,1)^d and T[0,1)^d
  Matrix t_inv;

  LatticePair() = default;
  LatticePair(Matrix s_, Matrix t_) : s(std::move(s_)), t(std::move(t_)) {
    if (s.dim() != t.dim()) fail(ErrorKind::InvalidInput, "lattice matrices differ in dimension");
    det_s = std::abs(determinant(s));
    det_t = std::abs(determinant(t));
    if (det_s < 1e-12 || det_t < 1e-12) fail(ErrorKind::NotInvertible, "lattice matrix is singular");
    r_s = parallelepiped_diameter(s);
    r_t = parallelepiped_diameter(t);
    t_inv = inverse(t);
  }
  std::size_t dim() const { return s.dim(); }
  Vec source_point(const IntVec& m) const { return s * to_real(m); }
  Vec target_point(const IntVec& n) const { return t * to_real(n); }
};

/// Closed domains with 1e-9 slack. Enlarging U_x keeps Hall's condition.
inline bool domains_overlap(const LatticePair& pair, const IntVec& m, const IntVec& n) {
  return parallelepipeds_meet(pair.source_point(m), pair.s, pair.target_point(n), pair.t, -1e-9);
}

/// U_x for x = S m, nearest targets first (ties broken lexicographically), so
/// that a point sitting on the other lattice is matched to itself.
inline std::vector<IntVec> candidate_targets(const LatticePair& pair, const IntVec& m) {
  const std::size_t d = pair.dim();
  const Vec x = pair.source_point(m);
  const double reach = pair.r_s + pair.r_t;
  const Vec center = pair.t_inv * x;
  IntVec lo(d), hi(d);
  for (std::size_t i = 0; i < d; ++i) {
    double rn = norm2(pair.t_inv.row(i)) * reach;
    lo[i] = static_cast<std::int64_t>(std::floor(center[i] - rn)) - 1;
    hi[i] = static_cast<std::int64_t>(std::ceil(center[i] + rn)) + 1;
  }
  std::vector<std::pair<double, IntVec>> found;
  for_each_index(lo, hi, [&](const IntVec& n) {
    double dist = norm2(sub(x, pair.target_point(n)));
    if (dist > reach * (1 + 1e-12)) return;
    if (domains_overlap(pair, m, n)) found.emplace_back(dist, n);
  });
  std::sort(found.begin(), found.end());
  std::vector<IntVec> out;
  out.reserve(found.size());
  for (auto& [dist, n] : found) out.push_back(std::move(n));
  return out;
}

/// N(E): union of the candidate sets of the sources in E.
inline std::set<IntVec> hall_neighborhood(const LatticePair& pair, const std::vector<IntVec>& sources) {
  std::set<IntVec> out;
  for (const auto& m : sources)
    for (auto& n : candidate_targets(pair, m)) out.insert(std::move(n));
  return out;
}

struct MatchingResult {
  std::map<IntVec, IntVec> assignment;  ///< source coords m -> target coords n
  double max_displacement = 0.0;
  double bound = 0.0;
  bool saturated = false;
  std::size_t candidate_edges = 0;
};

/// Integer source coordinates in the inclusive box [lo, hi].
inline std::vector<IntVec> index_window(const IntVec& lo, const IntVec& hi) {
  std::vector<IntVec> out;
  for_each_index(lo, hi, [&](const IntVec& k) { out.push_back(k); });
  return out;
}

namespace detail {

// Hopcroft-Karp on a bipartite graph given by adjacency lists of left nodes.
class HopcroftKarp {
 public:
  HopcroftKarp(const std::vector<std::vector<std::size_t>>& adj, std::size_t n_right)
      : adj_(adj), match_l_(adj.size(), kNone), match_r_(n_right, kNone), dist_(adj.size()) {}

  std::size_t run() {
    std::size_t matched = 0;
    while (bfs()) {
      for (std::size_t u = 0; u < adj_.size(); ++u)
        if (match_l_[u] == kNone && dfs(u)) ++matched;
    }
    return matched;
  }

  const std::vector<std::size_t>& match_left() const { return match_l_; }
  const std::vector<std::size_t>& match_right() const { return match_r_; }
  static constexpr std::size_t kNone = std::numeric_limits<std::size_t>::max();

 private:
  bool bfs() {
    std::queue<std::size_t> q;
    bool found = false;
    for (std::size_t u = 0; u < adj_.size(); ++u) {
      if (match_l_[u] == kNone) {
        dist_[u] = 0;
        q.push(u);
      } else {
        dist_[u] = kNone;
      }
    }
    while (!q.empty()) {
      std::size_t u = q.front();
      q.pop();
      for (std::size_t v : adj_[u]) {
        std::size_t w = match_r_[v];
        if (w == kNone) {
          found = true;
        } else if (dist_[w] == kNone) {
          dist_[w] = dist_[u] + 1;
          q.push(w);
        }
      }
    }
    return found;
  }

  bool dfs(std::size_t u) {
    for (std::size_t v : adj_[u]) {
      std::size_t w = match_r_[v];
      if (w == kNone || (dist_[w] == dist_[u] + 1 && dfs(w))) {
        match_l_[u] = v;
        match_r_[v] = u;
        return true;
      }
    }
    dist_[u] = kNone;
    return false;
  }

  const std::vector<std::vector<std::size_t>>& adj_;
  std::vector<std::size_t> match_l_, match_r_, dist_;
};

inline std::string format_index(const IntVec& k) {
  std::ostringstream os;
  os << '(';
  for (std::size_t i = 0; i < k.size(); ++i) os << (i ? "," : "") << k[i];
  os << ')';
  return os.str();
}

}  // namespace detail

/// Saturating injection from a finite source window into T Z^d with every
/// assigned pair adjacent. Sources are processed in lexicographic order and
/// candidates nearest first, so the result is reproducible.
inline MatchingResult hall_injection(const LatticePair& pair, std::vector<IntVec> sources) {
  if (pair.det_s < pair.det_t * (1 - 1e-9))
    fail(ErrorKind::PreconditionViolation, "hall_injection needs |det S| >= |det T|");
  std::sort(sources.begin(), sources.end());
  sources.erase(std::unique(sources.begin(), sources.end()), sources.end());

  std::vector<std::vector<IntVec>> cand(sources.size());
  parallel_for(sources.size(), [&](std::size_t i) { cand[i] = candidate_targets(pair, sources[i]); });

  std::map<IntVec, std::size_t> right_id;
  for (const auto& list : cand)
    for (const auto& n : list) right_id.emplace(n, 0);
  std::vector<IntVec> rights;
  rights.reserve(right_id.size());
  for (auto& [n, id] : right_id) {
    id = rights.size();
    rights.push_back(n);
  }
  std::vector<std::vector<std::size_t>> adj(sources.size());
  MatchingResult res;
  for (std::size_t i = 0; i < sources.size(); ++i) {
    for (const auto& n : cand[i]) adj[i].push_back(right_id.at(n));
    res.candidate_edges += adj[i].size();
  }

  detail::HopcroftKarp hk(adj, rights.size());
  const std::size_t matched = hk.run();
  res.bound = pair.r_s + pair.r_t;
  res.saturated = matched == sources.size();
  if (!res.saturated) {
    // Alternating-path closure of an unmatched source violates Hall's condition.
    std::size_t start = 0;
    while (hk.match_left()[start] != detail::HopcroftKarp::kNone) ++start;
    std::set<std::size_t> seen_l{start}, seen_r;
    std::vector<std::size_t> stack{start};
    while (!stack.empty()) {
      std::size_t u = stack.back();
      stack.pop_back();
      for (std::size_t v : adj[u]) {
        if (!seen_r.insert(v).second) continue;
        std::size_t w = hk.match_right()[v];
        if (w != detail::HopcroftKarp::kNone && seen_l.insert(w).second) stack.push_back(w);
      }
    }
    std::ostringstream os;
    os << "matching left " << sources.size() - matched << " sources unmatched; Hall set of size " << seen_l.size()
       << " has only " << seen_r.size() << " neighbours:";
    for (std::size_t u : seen_l) os << ' ' << detail::format_index(sources[u]);
    fail(ErrorKind::Unsaturated, os.str());
  }
  for (std::size_t i = 0; i < sources.size(); ++i) {
    const IntVec& n = rights[hk.match_left()[i]];
    res.assignment.emplace(sources[i], n);
    res.max_displacement =
        std::max(res.max_displacement, norm2(sub(pair.source_point(sources[i]), pair.target_point(n))));
  }
  return res;
}

/// pi_j with sup_k |k - A^{-j} B^i pi_j(k)| <= sqrt(d) (1 + |A^{-j} B^i|),
/// obtained from hall_injection with S = I and T = A^{-j} B^i.
inline MatchingResult lattice_injection_pi(const Dilation& a, const Dilation& b, std::int64_t j, std::int64_t i,
                                           const std::vector<IntVec>& window) {
  const std::size_t d = a.dim();
  Matrix t = a.power(-j) * b.power(i);
  LatticePair pair(Matrix::identity(d), t);
  if (pair.det_t > 1.0 + 1e-9)
    fail(ErrorKind::PreconditionViolation, "lattice_injection_pi needs |det A|^j >= |det B|^i");
  MatchingResult res = hall_injection(pair, window);
  res.bound = std::sqrt(static_cast<double>(d)) * (1.0 + operator_norm(t).value);
  for (const auto& [k, n] : res.assignment) {
    Vec phi = t * to_real(n);
    Vec back = solve(t, phi);
    for (std::size_t c = 0; c < d; ++c) {
      if (std::abs(back[c] - static_cast<double>(n[c])) > 1e-6)
        fail(ErrorKind::NonIntegerTarget, "target " + detail::format_index(n) + " does not round-trip through T");
    }
    double disp = norm2(sub(to_real(k), phi));
    if (disp > res.bound + 1e-9)
      fail(ErrorKind::CertificateFailure, "displacement certificate failed at " + detail::format_index(k));
  }
  return res;
}

}  // namespace adl
