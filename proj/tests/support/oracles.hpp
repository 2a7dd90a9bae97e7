#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <vector>

#include "envelope.hpp"
#include "pvalues.hpp"

// brute-force reference implementations, deliberately quadratic and
// structured differently from the library code paths
namespace testsupport {

inline long long count_le(const std::vector<double>& raw, double t) {
  long long n = 0;
  for (double v : raw)
    if (v <= t) ++n;
  return n;
}

inline long long count_ge(const std::vector<double>& raw, double x) {
  long long n = 0;
  for (double v : raw)
    if (v >= x) ++n;
  return n;
}

struct TailPoint {
  double t;
  long long bound;
};

// thresholds where the upper-tail count can change, paired with the count
// attained there; window start always included
inline std::vector<TailPoint> tail_points(const std::vector<double>& raw, double lo, double hi) {
  std::vector<TailPoint> pts;
  pts.push_back({lo, count_ge(raw, 1.0 - lo)});
  std::vector<double> uniq(raw);
  std::sort(uniq.begin(), uniq.end());
  uniq.erase(std::unique(uniq.begin(), uniq.end()), uniq.end());
  for (double x : uniq) {
    const double t = 1.0 - x;
    if (t <= lo || t > hi) continue;
    pts.push_back({t, count_ge(raw, x)});
  }
  std::sort(pts.begin(), pts.end(), [](const TailPoint& a, const TailPoint& b) { return a.t < b.t; });
  std::vector<TailPoint> merged;
  for (const auto& pt : pts) {
    if (!merged.empty() && merged.back().t == pt.t)
      merged.back().bound = std::max(merged.back().bound, pt.bound);
    else
      merged.push_back(pt);
  }
  return merged;
}

inline bool kappa_feasible(double kappa, double c, const std::vector<TailPoint>& pts) {
  for (const auto& pt : pts) {
    if (pt.bound <= 0) continue;
    if (pt.t + c <= 0.0) continue;  // unsatisfiable point, excluded from the family condition
    if (mfdp::candidate_bound(kappa, c, pt.t) < pt.bound) return false;
  }
  return true;
}

// exhaustive search over candidate ratios plus a dense grid, then an
// ulp-by-ulp climb to the exact floating-point feasibility boundary
inline double oracle_kappa_max(const std::vector<double>& raw, const mfdp::CandidateFamilyConfig& cfg,
                               bool* fallback = nullptr) {
  const auto pts = tail_points(raw, cfg.window.lo, cfg.window.hi);
  if (fallback) *fallback = false;
  std::vector<double> cands;
  for (const auto& pt : pts) {
    if (pt.bound <= 0) continue;
    const double num = pt.t + cfg.c;
    if (num <= 0.0) {
      if (fallback) *fallback = true;
      continue;
    }
    cands.push_back(num / static_cast<double>(pt.bound));
  }
  if (cands.empty()) return std::numeric_limits<double>::infinity();
  const double ref = *std::min_element(cands.begin(), cands.end());
  for (int k = -64; k <= 64; ++k) cands.push_back(ref * (1.0 + static_cast<double>(k) * 1e-14));
  double best = 0.0;
  for (double k : cands)
    if (k > best && kappa_feasible(k, cfg.c, pts)) best = k;
  if (best == 0.0) {
    // candidate list itself infeasible at every entry; walk down from ref
    best = ref;
    while (!kappa_feasible(best, cfg.c, pts)) best = std::nextafter(best, 0.0);
  }
  while (true) {
    const double up = std::nextafter(best, std::numeric_limits<double>::infinity());
    if (!kappa_feasible(up, cfg.c, pts)) break;
    best = up;
  }
  return best;
}

// definition-level improvement: R(t) minus the largest certified-signal
// surplus at any earlier candidate threshold
inline long long oracle_improved_value(const std::vector<double>& raw, const mfdp::EnvelopeCurve& plain,
                                       double t) {
  const double lo = plain.window().lo;
  std::vector<double> cands{lo};
  for (double v : raw)
    if (v > lo && v <= t) cands.push_back(v);
  long long surplus = 0;
  for (double l : cands) {
    const long long gap = count_le(raw, l) - plain.value_at(l);
    surplus = std::max(surplus, gap);
  }
  return count_le(raw, t) - surplus;
}

inline double clamped_ratio(long long env, long long rej) {
  const double r = static_cast<double>(env) / static_cast<double>(rej);
  return r < 1.0 ? r : 1.0;
}

// per-definition adjusted values: for each hypothesis, minimize the clamped
// envelope/rejection ratio over every candidate threshold at or above it
inline std::vector<double> oracle_adjusted(const std::vector<double>& raw, const mfdp::EnvelopeCurve& env) {
  const double lo = env.window().lo;
  const double hi = env.window().hi;
  std::vector<double> cands{lo};
  for (double v : raw)
    if (v > lo && v <= hi) cands.push_back(v);
  std::vector<double> out(raw.size(), std::numeric_limits<double>::infinity());
  for (std::size_t i = 0; i < raw.size(); ++i) {
    if (raw[i] > hi) continue;
    const double lower = std::max(lo, raw[i]);
    double best = std::numeric_limits<double>::infinity();
    for (double t : cands) {
      if (t < lower) continue;
      const long long r = count_le(raw, t);
      if (r <= 0) continue;
      best = std::min(best, clamped_ratio(env.value_at(t), r));
    }
    out[i] = best;
  }
  return out;
}

inline double oracle_t_max(const std::vector<double>& raw, const mfdp::EnvelopeCurve& env, double gamma) {
  const double lo = env.window().lo;
  const double hi = env.window().hi;
  std::vector<double> cands{lo};
  for (double v : raw)
    if (v > lo && v <= hi) cands.push_back(v);
  double best = 0.0;
  for (double v : raw) {
    if (v > hi) continue;
    const double lower = std::max(lo, v);
    for (double t : cands) {
      if (t < lower) continue;
      const long long r = count_le(raw, t);
      const long long b = env.value_at(t);
      const double fdp = r > 0 ? clamped_ratio(b, r) : (b > 0 ? 1.0 : 0.0);
      if (fdp <= gamma) {
        best = std::max(best, v);
        break;
      }
    }
  }
  return best;
}

}  // namespace testsupport
