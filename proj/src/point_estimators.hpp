#pragma once

#include <cstdint>

#include "pvalues.hpp"

namespace mfdp {

enum class Pi0Method { storey, median_unbiased };

struct Pi0Estimate {
  double raw = 0.0;      // may exceed 1
  double clamped = 0.0;  // min(raw, 1)
  Pi0Method method = Pi0Method::storey;
  double tuning = 0.0;   // lambda for storey, t for median_unbiased
};

// |{p_i > lambda}| / (m (1-lambda)), 0 < lambda < 1
Pi0Estimate storey_pi0(const PValueSet& p, double lambda);

// (|{p_i > t}| + |{p_i >= 1-t}|) / m, 0 < t < 1. Median-unbiased in the sense
// that it lands at or above the true null fraction with probability >= 1/2.
Pi0Estimate median_unbiased_pi0(const PValueSet& p, double t);

// Everything the fixed-threshold analysis reports at a single t.
struct FixedThresholdReport {
  double t = 0.0;
  std::int64_t rejections = 0;             // R(t)
  std::int64_t false_rejection_bound = 0;  // |{p_i >= 1-t}|
  double fdp_bound = 0.0;                  // min(bound/R, 1); 0 when R = 0
  std::int64_t true_rejection_lower = 0;   // R - min(bound, R)
  double tdp_lower = 0.0;                  // true_lower/R; 0 when R = 0
};

FixedThresholdReport fixed_threshold_report(const PValueSet& p, double t);

}  // namespace mfdp
