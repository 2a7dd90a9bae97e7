#pragma once

#include <cstdint>
#include <vector>

#include "envelope.hpp"
#include "pvalues.hpp"

namespace mfdp {

// Largest p_i such that some threshold u in the window with u >= p_i has a
// clamped ratio env(u)/R(u) <= gamma; 0.0 when no p-value qualifies.
// Rejecting everything at or below the result keeps the envelope's FDP bound
// at or below gamma. Uses the same double comparison as adjusted_pvalues, so
// |{adjusted <= gamma}| always equals R(t_max) exactly.
double t_max(const PValueSet& p, const EnvelopeCurve& env, double gamma);

// Per-hypothesis adjusted values in input order: the smallest gamma at which
// hypothesis i is rejected; min over thresholds u in the window with u >= p_i
// of the clamped ratio env(u)/R(u). +inf when p_i lies above the window (no
// attainable bound). Backward running-min sweep, non-decreasing in p.
std::vector<double> adjusted_pvalues(const PValueSet& p, const EnvelopeCurve& env);

struct MfdpReport {
  double gamma = 0.0;
  double t_max = 0.0;
  std::int64_t rejections = 0;
  double fdp_bound = 0.0;               // certified bound covering the rejection set; 0 if none rejected
  std::vector<std::int64_t> rejected;   // input indices, ascending
  std::vector<double> adjusted;         // input order, +inf = unbounded
};

MfdpReport reject_at(const PValueSet& p, const EnvelopeCurve& env, double gamma);

// Step-up count: largest k with p_(k) <= k*alpha/m; rejects the k smallest.
std::int64_t bh_rejections(const PValueSet& p, double alpha);

}  // namespace mfdp
