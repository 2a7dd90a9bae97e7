#pragma once

#include <cstdint>
#include <vector>

#include "errors.hpp"

namespace mfdp {

// Closed interval [lo, hi] of candidate rejection thresholds, 0 <= lo < hi <= 1.
struct ThresholdWindow {
  double lo = 0.0;
  double hi = 0.1;

  ThresholdWindow() = default;
  ThresholdWindow(double lo_, double hi_);

  bool contains(double t) const { return lo <= t && t <= hi; }
};

// Validated p-value vector, kept sorted ascending with the input order
// recoverable. Values must be finite and in (0,1]; ties keep their input
// order (stable sort), so the permutation is deterministic.
class PValueSet {
 public:
  explicit PValueSet(const std::vector<double>& raw);

  std::int64_t size() const { return static_cast<std::int64_t>(sorted_.size()); }
  const std::vector<double>& sorted() const { return sorted_; }

  // the input arrived non-decreasing, so the permutation is the identity
  bool input_sorted() const { return input_sorted_; }

  // input index (0-based) of sorted position k
  std::int64_t original_index(std::int64_t k) const { return perm_[static_cast<std::size_t>(k)]; }
  const std::vector<std::int64_t>& order() const { return perm_; }

  // sorted position of input index i
  std::int64_t rank_of(std::int64_t i) const { return rank_[static_cast<std::size_t>(i)]; }
  double value_at_original(std::int64_t i) const {
    return sorted_[static_cast<std::size_t>(rank_[static_cast<std::size_t>(i)])];
  }

  // R(t) = |{i : p_i <= t}|, requires 0 <= t <= 1
  std::int64_t count_rejections(double t) const;

  // |{i : p_i >= 1-t}|: a 50%-confidence upper bound for the number of true
  // nulls among the rejections at t. Requires 0 <= t <= 1.
  std::int64_t count_upper_tail(double t) const;

 private:
  std::vector<double> sorted_;
  std::vector<std::int64_t> perm_;
  std::vector<std::int64_t> rank_;
  bool input_sorted_ = false;
};

}  // namespace mfdp
