#include "point_estimators.hpp"

#include <algorithm>
#include <cstdio>

namespace mfdp {

static void check_interior(double v, const char* name) {
  if (!(v > 0.0 && v < 1.0)) {
    char buf[96];
    std::snprintf(buf, sizeof buf, "%s=%g outside (0,1)", name, v);
    throw ParameterError(buf);
  }
}

Pi0Estimate storey_pi0(const PValueSet& p, double lambda) {
  check_interior(lambda, "lambda");
  const double m = static_cast<double>(p.size());
  const double above = static_cast<double>(p.size() - p.count_rejections(lambda));
  Pi0Estimate e;
  e.raw = above / (m * (1.0 - lambda));
  e.clamped = std::min(e.raw, 1.0);
  e.method = Pi0Method::storey;
  e.tuning = lambda;
  return e;
}

Pi0Estimate median_unbiased_pi0(const PValueSet& p, double t) {
  check_interior(t, "t");
  const double above = static_cast<double>(p.size() - p.count_rejections(t));
  const double upper = static_cast<double>(p.count_upper_tail(t));
  Pi0Estimate e;
  e.raw = (above + upper) / static_cast<double>(p.size());
  e.clamped = std::min(e.raw, 1.0);
  e.method = Pi0Method::median_unbiased;
  e.tuning = t;
  return e;
}

FixedThresholdReport fixed_threshold_report(const PValueSet& p, double t) {
  FixedThresholdReport r;
  r.t = t;
  r.rejections = p.count_rejections(t);
  r.false_rejection_bound = p.count_upper_tail(t);
  const std::int64_t capped = std::min(r.false_rejection_bound, r.rejections);
  r.true_rejection_lower = r.rejections - capped;
  if (r.rejections > 0) {
    r.fdp_bound = std::min(static_cast<double>(r.false_rejection_bound) / static_cast<double>(r.rejections), 1.0);
    r.tdp_lower = static_cast<double>(r.true_rejection_lower) / static_cast<double>(r.rejections);
  }
  return r;
}

}  // namespace mfdp
