#include "pvalues.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numeric>
#include <string>

namespace mfdp {

static void check_threshold(double t) {
  if (!(t >= 0.0 && t <= 1.0)) {
    char buf[96];
    std::snprintf(buf, sizeof buf, "threshold t=%g outside [0,1]", t);
    throw RangeError(buf);
  }
}

ThresholdWindow::ThresholdWindow(double lo_, double hi_) : lo(lo_), hi(hi_) {
  if (!(lo >= 0.0) || !(hi <= 1.0) || !(lo < hi)) {
    char buf[96];
    std::snprintf(buf, sizeof buf, "threshold window [%g,%g] must satisfy 0 <= lo < hi <= 1", lo_, hi_);
    throw ParameterError(buf);
  }
}

PValueSet::PValueSet(const std::vector<double>& raw) {
  if (raw.empty()) throw DomainError("empty p-value set");
  bool presorted = true;
  double prev = 0.0;
  for (std::size_t i = 0; i < raw.size(); ++i) {
    const double v = raw[i];
    if (!std::isfinite(v)) {
      char buf[96];
      std::snprintf(buf, sizeof buf, "p-value at index %zu is not finite", i + 1);
      throw DomainError(buf);
    }
    if (!(v > 0.0 && v <= 1.0)) {
      char buf[96];
      std::snprintf(buf, sizeof buf, "p-value at index %zu outside (0,1]", i + 1);
      throw DomainError(buf);
    }
    presorted = presorted && v >= prev;
    prev = v;
  }

  perm_.resize(raw.size());
  std::iota(perm_.begin(), perm_.end(), std::int64_t{0});
  if (presorted) {
    // stable sort of sorted input is the identity permutation; skip it
    input_sorted_ = true;
    sorted_ = raw;
    rank_ = perm_;
    return;
  }
  std::stable_sort(perm_.begin(), perm_.end(), [&raw](std::int64_t a, std::int64_t b) {
    return raw[static_cast<std::size_t>(a)] < raw[static_cast<std::size_t>(b)];
  });

  sorted_.resize(raw.size());
  rank_.resize(raw.size());
  for (std::size_t k = 0; k < raw.size(); ++k) {
    sorted_[k] = raw[static_cast<std::size_t>(perm_[k])];
    rank_[static_cast<std::size_t>(perm_[k])] = static_cast<std::int64_t>(k);
  }
}

std::int64_t PValueSet::count_rejections(double t) const {
  check_threshold(t);
  return std::upper_bound(sorted_.begin(), sorted_.end(), t) - sorted_.begin();
}

std::int64_t PValueSet::count_upper_tail(double t) const {
  check_threshold(t);
  return sorted_.end() - std::lower_bound(sorted_.begin(), sorted_.end(), 1.0 - t);
}

}  // namespace mfdp
