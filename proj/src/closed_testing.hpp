#pragma once

#include <cstdint>
#include <functional>
#include <vector>

#include "envelope.hpp"
#include "pvalues.hpp"

namespace mfdp {

enum class PsiKind { one, linear, quadratic, custom };

// Weight function psi on [0, 1/2], non-decreasing. Evaluated at |1/2 - p|.
class PsiWeight {
 public:
  static PsiWeight one();        // psi(x) = 1
  static PsiWeight linear();     // psi(x) = x
  static PsiWeight quadratic();  // psi(x) = x^2
  // custom fn; monotonicity is checked on a sample grid at construction
  static PsiWeight custom(std::function<double(double)> fn);

  double operator()(double x) const;
  PsiKind kind() const { return kind_; }

 private:
  PsiWeight(PsiKind k, std::function<double(double)> fn) : kind_(k), fn_(std::move(fn)) {}
  PsiKind kind_;
  std::function<double(double)> fn_;
};

struct LocalTestStats {
  double w_minus = 0.0;  // weight mass of subset p-values at or below t
  double w_plus = 0.0;   // weight mass of subset p-values at or above 1-t
  bool reject = false;   // w_minus > w_plus (strict)
};

// Weighted sign test of the joint null on `subset` (input indices, 0-based).
LocalTestStats local_test(const PValueSet& p, const std::vector<std::int64_t>& subset, double t,
                          const PsiWeight& psi);

// Largest a such that the local test at t retains every a-subset of the
// largest p-values: a median upper bound for the total number of true nulls.
// 0 when even a = 1 is rejected.
std::int64_t generalized_n_bound(const PValueSet& p, double t, const PsiWeight& psi);

// Same search restricted to the rejections at t (the a largest p-values at or
// below t, weight mass compared against all of {p >= 1-t}): a median upper
// bound for the number of false rejections at t.
std::int64_t generalized_v_bound(const PValueSet& p, double t, const PsiWeight& psi);

// Exhaustive reference: the largest size of a non-empty subset A of `subset`
// whose running rejection counts stay at or below the improved envelope at
// every threshold in the window (checked at the window start and at member
// p-values). Requires env.improved() and window hi < 1/2; |subset| <= 22.
std::int64_t brute_force_closed_bound(const PValueSet& p, const std::vector<std::int64_t>& subset,
                                      const EnvelopeCurve& env);

struct EquivalenceReport {
  std::int64_t instances = 0;
  std::int64_t points_checked = 0;
  std::int64_t mismatches = 0;
};

// Randomized cross-check that the improved envelope equals the exhaustive
// closed-testing bound over the rejection set at every jump threshold.
EquivalenceReport verify_envelope_equivalence(std::int64_t instances, std::uint64_t seed, std::int64_t m_min,
                                              std::int64_t m_max);

}  // namespace mfdp
