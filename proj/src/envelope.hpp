#pragma once

#include <cstdint>
#include <limits>
#include <utility>
#include <vector>

#include "pvalues.hpp"

namespace mfdp {

// Sentinel for "no finite slope": the corresponding curve is identically 0.
inline constexpr double kNoKappa = std::numeric_limits<double>::infinity();

struct CandidateFamilyConfig {
  double c = 0.0;  // intercept shift, c >= 0
  ThresholdWindow window;
};

// B(t) = |{i >= 1 : i*kappa - c <= t}| = floor((t+c)/kappa), one member of the
// linear candidate family; kappa = +inf gives the zero curve. The value is
// pinned to the multiply predicate i*kappa <= t+c so that dominance checks
// agree bit-for-bit with the kappa search, and it saturates near 2^62 when
// (t+c)/kappa overflows useful integer range.
std::int64_t candidate_bound(double kappa, double c, double t);

struct KappaResult {
  double kappa = kNoKappa;
  // Set when no kappa in (0, inf] can dominate the upper-tail count (window
  // start 0, c = 0, and some p_i = 1); kappa is then the best value over the
  // satisfiable constraints only.
  bool zero_kappa_fallback = false;
};

// Largest kappa whose curve stays at or above count_upper_tail everywhere in
// the window. It suffices to check the jump thresholds 1-p_i that land in the
// window plus the window start; the result is refined by ulp steps to the
// exact double-precision feasibility boundary (feasibility is monotone in
// kappa because correctly rounded division is).
KappaResult kappa_max(const PValueSet& p, const CandidateFamilyConfig& cfg);

// Non-decreasing integer step function over a window: a simultaneous
// 50%-confidence upper bound for the number of false rejections at every
// threshold in the window. Plain curves (improved() == false) are evaluated
// in closed form from (kappa, c); improved curves carry an explicit step
// table whose jumps sit only at p-values and the window start.
class EnvelopeCurve {
 public:
  static EnvelopeCurve family(double kappa, double c, ThresholdWindow w, bool zero_kappa_fallback = false);
  static EnvelopeCurve stepped(std::vector<double> ts, std::vector<std::int64_t> values, double kappa, double c,
                               ThresholdWindow w, bool zero_kappa_fallback);

  // value at t; throws RangeError outside the window
  std::int64_t value_at(double t) const;

  // values at a non-decreasing threshold sequence: one pass over the step
  // table instead of a search per query
  std::vector<std::int64_t> values_at_ascending(const std::vector<double>& ts) const;

  const ThresholdWindow& window() const { return window_; }
  double kappa() const { return kappa_; }
  double c() const { return c_; }
  bool improved() const { return improved_; }
  bool zero_kappa_fallback() const { return zero_kappa_fallback_; }

  // (t, value) at the window start and at every t in the window where the
  // value increases. max_points guards the floor-grid blowup for tiny kappa.
  std::vector<std::pair<double, std::int64_t>> jumps(std::size_t max_points) const;

 private:
  EnvelopeCurve() = default;

  double kappa_ = kNoKappa;
  double c_ = 0.0;
  ThresholdWindow window_;
  bool improved_ = false;
  bool zero_kappa_fallback_ = false;
  // step table for improved curves: ts_[0] == window.lo, values_ non-decreasing
  std::vector<double> ts_;
  std::vector<std::int64_t> values_;
};

EnvelopeCurve build_envelope(const PValueSet& p, const CandidateFamilyConfig& cfg);

// Tightening pass: value(t) = R(t) - max_{l <= t} max(R(l) - env(l), 0), never
// above min(R(t), env(t)) and still a valid simultaneous bound. One forward
// sweep over the window start and the p-values in the window.
EnvelopeCurve improve_envelope(const PValueSet& p, const EnvelopeCurve& env);

// min(env(t)/R(t), 1); 0 when R(t) = 0 and env(t) = 0, 1 when R(t) = 0 and
// env(t) > 0. Throws RangeError outside the window.
double fdp_envelope_at(const PValueSet& p, const EnvelopeCurve& env, double t);

// Plot/export table: one row per t where any of R, the plain curve, or the
// improved curve changes inside the window; fdp_bound is the clamped ratio of
// the improved curve to R.
struct CurveTable {
  std::vector<double> t;
  std::vector<std::int64_t> rejections;
  std::vector<std::int64_t> plain;
  std::vector<std::int64_t> improved;
  std::vector<double> fdp_bound;
};

CurveTable curve_table(const PValueSet& p, const CandidateFamilyConfig& cfg, std::size_t max_rows);

}  // namespace mfdp
