#include "envelope.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>

namespace mfdp {

namespace {

// saturation plateau for curve values; far above any conceivable count
constexpr std::int64_t kSaturated = std::int64_t{1} << 62;
// kept below 2^53 so the multiply predicate works on exact integers
constexpr double kSaturationThreshold = 4.5e15;

void check_config(const CandidateFamilyConfig& cfg) {
  if (!(cfg.c >= 0.0) || !std::isfinite(cfg.c)) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "c=%g must be finite and >= 0", cfg.c);
    throw ParameterError(buf);
  }
}

// constraint point: the curve must reach at least `bound` at threshold `t`
struct ConstraintPoint {
  double t;
  std::int64_t bound;
};

// Jump thresholds of the upper-tail count inside the window, each paired with
// the count just attained there, plus the window start. 1-p is computed once
// per distinct p-value; if two distinct p-values round to the same threshold
// the stronger (larger) count wins.
std::vector<ConstraintPoint> upper_tail_jumps(const PValueSet& p, const ThresholdWindow& w) {
  const auto& sp = p.sorted();
  const std::int64_t m = p.size();
  std::vector<ConstraintPoint> pts;
  pts.push_back({w.lo, p.count_upper_tail(w.lo)});
  std::int64_t i = m - 1;
  while (i >= 0) {
    const double v = sp[static_cast<std::size_t>(i)];
    std::int64_t first = i;
    while (first > 0 && sp[static_cast<std::size_t>(first - 1)] == v) --first;
    const double t = 1.0 - v;           // ascending as p descends
    const std::int64_t count = m - first;  // |{p_j >= v}|
    if (t > w.hi) break;
    if (t >= w.lo) {
      if (!pts.empty() && pts.back().t == t)
        pts.back().bound = std::max(pts.back().bound, count);
      else
        pts.push_back({t, count});
    }
    i = first - 1;
  }
  return pts;
}

bool dominates_at(double kappa, double c, const ConstraintPoint& pt) {
  return candidate_bound(kappa, c, pt.t) >= pt.bound;
}

}  // namespace

std::int64_t candidate_bound(double kappa, double c, double t) {
  if (std::isinf(kappa) && kappa > 0.0) return 0;
  if (!(kappa > 0.0) || std::isnan(kappa)) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "kappa=%g must be positive or +inf", kappa);
    throw ParameterError(buf);
  }
  const double s = t + c;
  if (s < 0.0) return 0;
  const double q = s / kappa;
  if (q >= kSaturationThreshold) return kSaturated;
  std::int64_t k = static_cast<std::int64_t>(std::floor(q));
  while (k > 0 && static_cast<double>(k) * kappa > s) --k;
  while (static_cast<double>(k + 1) * kappa <= s) ++k;
  return k;
}

KappaResult kappa_max(const PValueSet& p, const CandidateFamilyConfig& cfg) {
  check_config(cfg);
  const auto pts = upper_tail_jumps(p, cfg.window);

  KappaResult res;
  std::vector<ConstraintPoint> active;  // satisfiable constraints
  double kraw = kNoKappa;
  for (const auto& pt : pts) {
    if (pt.bound <= 0) continue;
    const double num = pt.t + cfg.c;
    if (num <= 0.0) {
      res.zero_kappa_fallback = true;  // unreachable for any kappa > 0
      continue;
    }
    active.push_back(pt);
    kraw = std::min(kraw, num / static_cast<double>(pt.bound));
  }
  if (std::isinf(kraw)) {
    res.kappa = kNoKappa;
    return res;
  }

  // only constraints whose ratio sits within rounding distance of the minimum
  // can flip across the ulp search below; the rest hold with provable margin
  std::vector<ConstraintPoint> tight;
  for (const auto& pt : active) {
    const double ratio = (pt.t + cfg.c) / static_cast<double>(pt.bound);
    if (ratio <= kraw * (1.0 + 1e-12)) tight.push_back(pt);
  }

  auto feasible = [&](double kappa) {
    for (const auto& pt : tight)
      if (!dominates_at(kappa, cfg.c, pt)) return false;
    return true;
  };

  // pin the exact double-precision boundary: the candidate ratios are correct
  // up to rounding, so only a few ulp steps are ever needed
  if (!feasible(kraw)) {
    int guard = 0;
    do {
      kraw = std::nextafter(kraw, 0.0);
    } while (!feasible(kraw) && kraw > 0.0 && ++guard < 64);
  } else {
    int guard = 0;
    for (;;) {
      const double up = std::nextafter(kraw, kNoKappa);
      if (std::isinf(up) || !feasible(up) || ++guard > 64) break;
      kraw = up;
    }
  }
  res.kappa = kraw;
  return res;
}

EnvelopeCurve EnvelopeCurve::family(double kappa, double c, ThresholdWindow w, bool zero_kappa_fallback) {
  if (!(kappa > 0.0) || std::isnan(kappa)) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "kappa=%g must be positive or +inf", kappa);
    throw ParameterError(buf);
  }
  if (!(c >= 0.0) || !std::isfinite(c)) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "c=%g must be finite and >= 0", c);
    throw ParameterError(buf);
  }
  EnvelopeCurve e;
  e.kappa_ = kappa;
  e.c_ = c;
  e.window_ = w;
  e.improved_ = false;
  e.zero_kappa_fallback_ = zero_kappa_fallback;
  return e;
}

EnvelopeCurve EnvelopeCurve::stepped(std::vector<double> ts, std::vector<std::int64_t> values, double kappa, double c,
                                     ThresholdWindow w, bool zero_kappa_fallback) {
  if (ts.empty() || ts.size() != values.size()) throw ParameterError("step table must be non-empty and aligned");
  if (ts.front() != w.lo) throw ParameterError("step table must start at the window start");
  EnvelopeCurve e;
  e.kappa_ = kappa;
  e.c_ = c;
  e.window_ = w;
  e.improved_ = true;
  e.zero_kappa_fallback_ = zero_kappa_fallback;
  e.ts_ = std::move(ts);
  e.values_ = std::move(values);
  return e;
}

std::int64_t EnvelopeCurve::value_at(double t) const {
  if (!window_.contains(t)) {
    char buf[96];
    std::snprintf(buf, sizeof buf, "t=%g outside envelope window [%g,%g]", t, window_.lo, window_.hi);
    throw RangeError(buf);
  }
  if (!improved_) return candidate_bound(kappa_, c_, t);
  const auto it = std::upper_bound(ts_.begin(), ts_.end(), t);
  return values_[static_cast<std::size_t>(it - ts_.begin() - 1)];
}

std::vector<std::int64_t> EnvelopeCurve::values_at_ascending(const std::vector<double>& ts) const {
  std::vector<std::int64_t> out;
  out.reserve(ts.size());
  if (!improved_) {
    for (double t : ts) out.push_back(value_at(t));  // closed form, O(1) each
    return out;
  }
  double prev = window_.lo;
  std::size_t j = 0;  // last step index with ts_[j] <= t
  for (double t : ts) {
    if (!window_.contains(t)) {
      char buf[96];
      std::snprintf(buf, sizeof buf, "t=%g outside envelope window [%g,%g]", t, window_.lo, window_.hi);
      throw RangeError(buf);
    }
    if (t < prev) throw ParameterError("thresholds must be non-decreasing");
    prev = t;
    while (j + 1 < ts_.size() && ts_[j + 1] <= t) ++j;
    out.push_back(values_[j]);
  }
  return out;
}

std::vector<std::pair<double, std::int64_t>> EnvelopeCurve::jumps(std::size_t max_points) const {
  std::vector<std::pair<double, std::int64_t>> out;
  if (improved_) {
    for (std::size_t i = 0; i < ts_.size(); ++i) {
      if (i == 0 || values_[i] > values_[i - 1]) {
        if (out.size() >= max_points) throw CapacityError("envelope jump table exceeds the row cap");
        out.emplace_back(ts_[i], values_[i]);
      }
    }
    return out;
  }

  const std::int64_t v_lo = value_at(window_.lo);
  const std::int64_t v_hi = value_at(window_.hi);
  if (v_hi >= kSaturated || static_cast<std::uint64_t>(v_hi - v_lo) + 1 > max_points)
    throw CapacityError("envelope jump table exceeds the row cap");
  out.emplace_back(window_.lo, v_lo);
  for (std::int64_t k = v_lo + 1; k <= v_hi; ++k) {
    // smallest double t with k*kappa <= t+c, nudged past rounding of k*kappa-c
    double t = static_cast<double>(k) * kappa_ - c_;
    if (t < window_.lo) t = window_.lo;
    int guard = 0;
    while (candidate_bound(kappa_, c_, t) < k && ++guard <= 4) t = std::nextafter(t, kNoKappa);
    if (t > window_.hi) break;
    const std::int64_t v = candidate_bound(kappa_, c_, t);
    if (v > out.back().second) {
      out.emplace_back(t, v);
      k = v;
    }
  }
  return out;
}

EnvelopeCurve build_envelope(const PValueSet& p, const CandidateFamilyConfig& cfg) {
  check_config(cfg);
  const KappaResult kr = kappa_max(p, cfg);
  return EnvelopeCurve::family(kr.kappa, cfg.c, cfg.window, kr.zero_kappa_fallback);
}

EnvelopeCurve improve_envelope(const PValueSet& p, const EnvelopeCurve& env) {
  if (env.improved()) throw ParameterError("envelope is already improved");
  const ThresholdWindow& w = env.window();
  const auto& sp = p.sorted();
  const std::int64_t m = p.size();

  std::vector<double> ts;
  std::vector<std::int64_t> values;

  std::int64_t r = p.count_rejections(w.lo);
  std::int64_t max_surplus = std::max<std::int64_t>(r - env.value_at(w.lo), 0);
  ts.push_back(w.lo);
  values.push_back(r - max_surplus);

  std::int64_t i = r;  // first sorted index with p > lo
  while (i < m && sp[static_cast<std::size_t>(i)] <= w.hi) {
    const double v = sp[static_cast<std::size_t>(i)];
    while (i < m && sp[static_cast<std::size_t>(i)] == v) ++i;
    r = i;
    max_surplus = std::max(max_surplus, r - env.value_at(v));
    ts.push_back(v);
    values.push_back(r - max_surplus);
  }
  return EnvelopeCurve::stepped(std::move(ts), std::move(values), env.kappa(), env.c(), w,
                                env.zero_kappa_fallback());
}

double fdp_envelope_at(const PValueSet& p, const EnvelopeCurve& env, double t) {
  const std::int64_t v = env.value_at(t);  // range-checks t
  const std::int64_t r = p.count_rejections(t);
  if (r == 0) return v == 0 ? 0.0 : 1.0;
  return std::min(static_cast<double>(v) / static_cast<double>(r), 1.0);
}

CurveTable curve_table(const PValueSet& p, const CandidateFamilyConfig& cfg, std::size_t max_rows) {
  const EnvelopeCurve plain = build_envelope(p, cfg);
  const EnvelopeCurve better = improve_envelope(p, plain);
  const ThresholdWindow& w = cfg.window;

  std::vector<double> grid;
  for (const auto& [t, v] : plain.jumps(max_rows)) {
    (void)v;
    grid.push_back(t);
  }
  const auto& sp = p.sorted();
  for (double v : sp)
    if (v > w.lo && v <= w.hi) grid.push_back(v);
  std::sort(grid.begin(), grid.end());
  grid.erase(std::unique(grid.begin(), grid.end()), grid.end());
  if (grid.size() > max_rows) throw CapacityError("envelope jump table exceeds the row cap");

  CurveTable tab;
  for (double t : grid) {
    tab.t.push_back(t);
    tab.rejections.push_back(p.count_rejections(t));
    tab.plain.push_back(plain.value_at(t));
    tab.improved.push_back(better.value_at(t));
    tab.fdp_bound.push_back(fdp_envelope_at(p, better, t));
  }
  return tab;
}

}  // namespace mfdp
