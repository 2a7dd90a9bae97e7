#include "closed_testing.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdio>
#include <limits>

#include "philox.hpp"

namespace mfdp {

namespace {

void check_interior(double t) {
  if (!(t > 0.0 && t < 1.0)) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "t=%g outside (0,1)", t);
    throw ParameterError(buf);
  }
}

void check_subset(const PValueSet& p, const std::vector<std::int64_t>& subset) {
  for (std::int64_t i : subset) {
    if (i < 0 || i >= p.size()) {
      char buf[64];
      std::snprintf(buf, sizeof buf, "hypothesis index %lld out of range", static_cast<long long>(i));
      throw ParameterError(buf);
    }
  }
}

}  // namespace

PsiWeight PsiWeight::one() {
  return PsiWeight(PsiKind::one, [](double) { return 1.0; });
}

PsiWeight PsiWeight::linear() {
  return PsiWeight(PsiKind::linear, [](double x) { return x; });
}

PsiWeight PsiWeight::quadratic() {
  return PsiWeight(PsiKind::quadratic, [](double x) { return x * x; });
}

PsiWeight PsiWeight::custom(std::function<double(double)> fn) {
  if (!fn) throw ParameterError("custom psi must be callable");
  double prev = -std::numeric_limits<double>::infinity();
  for (int k = 0; k <= 100; ++k) {
    const double x = 0.5 * static_cast<double>(k) / 100.0;
    const double y = fn(x);
    if (!std::isfinite(y)) throw ParameterError("custom psi must be finite on [0, 1/2]");
    if (y < prev) throw ParameterError("custom psi must be non-decreasing on [0, 1/2]");
    prev = y;
  }
  return PsiWeight(PsiKind::custom, std::move(fn));
}

double PsiWeight::operator()(double x) const { return fn_(x); }

LocalTestStats local_test(const PValueSet& p, const std::vector<std::int64_t>& subset, double t,
                          const PsiWeight& psi) {
  check_interior(t);
  check_subset(p, subset);
  LocalTestStats s;
  for (std::int64_t i : subset) {
    const double v = p.value_at_original(i);
    if (v <= t) s.w_minus += psi(std::fabs(0.5 - v));
    if (v >= 1.0 - t) s.w_plus += psi(std::fabs(v - 0.5));
  }
  s.reject = s.w_minus > s.w_plus;
  return s;
}

std::int64_t generalized_n_bound(const PValueSet& p, double t, const PsiWeight& psi) {
  check_interior(t);
  const auto& sp = p.sorted();
  const std::int64_t m = p.size();
  const double one_minus_t = 1.0 - t;

  double w_plus = 0.0;
  for (std::int64_t i = m - 1; i >= 0 && sp[static_cast<std::size_t>(i)] >= one_minus_t; --i)
    w_plus += psi(std::fabs(sp[static_cast<std::size_t>(i)] - 0.5));

  double w_minus = 0.0;
  std::int64_t best = 0;
  for (std::int64_t a = 1; a <= m; ++a) {
    const double v = sp[static_cast<std::size_t>(m - a)];  // a-th largest
    if (v <= t) w_minus += psi(std::fabs(0.5 - v));
    if (w_minus <= w_plus) best = a;
  }
  return best;
}

std::int64_t generalized_v_bound(const PValueSet& p, double t, const PsiWeight& psi) {
  check_interior(t);
  const auto& sp = p.sorted();
  const std::int64_t m = p.size();
  const std::int64_t r = p.count_rejections(t);
  const double one_minus_t = 1.0 - t;

  double w_plus = 0.0;
  for (std::int64_t i = m - 1; i >= 0 && sp[static_cast<std::size_t>(i)] >= one_minus_t; --i)
    w_plus += psi(std::fabs(sp[static_cast<std::size_t>(i)] - 0.5));

  double w_minus = 0.0;
  std::int64_t best = 0;
  for (std::int64_t a = 1; a <= r; ++a) {
    w_minus += psi(std::fabs(0.5 - sp[static_cast<std::size_t>(r - a)]));  // a-th largest rejection
    if (w_minus <= w_plus) best = a;
  }
  return best;
}

std::int64_t brute_force_closed_bound(const PValueSet& p, const std::vector<std::int64_t>& subset,
                                      const EnvelopeCurve& env) {
  if (!env.improved()) throw ParameterError("brute-force closed bound requires an improved envelope");
  const ThresholdWindow& w = env.window();
  if (!(w.hi < 0.5)) throw ParameterError("closed-testing window must end below 1/2");
  check_subset(p, subset);
  if (subset.size() > 22) {
    char buf[96];
    std::snprintf(buf, sizeof buf, "subset enumeration capped at 22 hypotheses (got %zu)", subset.size());
    throw CapacityError(buf);
  }

  const std::size_t n = subset.size();
  std::vector<double> values(n);
  for (std::size_t j = 0; j < n; ++j) values[j] = p.value_at_original(subset[j]);

  const std::int64_t env_lo = env.value_at(w.lo);
  std::vector<double> members;  // sorted p-values of the current subset
  members.reserve(n);

  auto feasible = [&]() {
    std::size_t k = 0;
    while (k < members.size() && members[k] <= w.lo) ++k;
    if (static_cast<std::int64_t>(k) > env_lo) return false;
    while (k < members.size() && members[k] <= w.hi) {
      const double v = members[k];
      while (k < members.size() && members[k] == v) ++k;
      if (static_cast<std::int64_t>(k) > env.value_at(v)) return false;
    }
    return true;
  };

  std::int64_t best = 0;
  // Gray-code walk: one membership toggle per step keeps the sorted member
  // list maintenance O(|subset|)
  for (std::uint64_t g = 1; g < (std::uint64_t{1} << n); ++g) {
    const std::size_t bit = static_cast<std::size_t>(std::countr_zero(g));
    const double v = values[bit];
    const std::uint64_t gray = g ^ (g >> 1);
    const auto it = std::lower_bound(members.begin(), members.end(), v);
    if (gray & (std::uint64_t{1} << bit))
      members.insert(it, v);
    else
      members.erase(it);
    if (static_cast<std::int64_t>(members.size()) > best && feasible())
      best = static_cast<std::int64_t>(members.size());
  }
  return best;
}

EquivalenceReport verify_envelope_equivalence(std::int64_t instances, std::uint64_t seed, std::int64_t m_min,
                                              std::int64_t m_max) {
  if (instances < 1) throw ParameterError("instances must be >= 1");
  if (m_min < 1 || m_min > m_max || m_max > 22) throw ParameterError("need 1 <= m_min <= m_max <= 22");

  constexpr double kBelowOne = 1.0 - 0x1p-53;  // largest double < 1
  EquivalenceReport rep;
  rep.instances = instances;
  for (std::int64_t inst = 0; inst < instances; ++inst) {
    rng::CounterRng g(seed, static_cast<std::uint64_t>(inst));
    const std::int64_t m = m_min + static_cast<std::int64_t>(g.next_u64() % static_cast<std::uint64_t>(m_max - m_min + 1));

    std::vector<double> raw(static_cast<std::size_t>(m));
    for (auto& v : raw) {
      const double u = g.uniform_open();
      switch (g.next_u32() % 3) {
        case 0: v = u; break;
        case 1: v = u * u * u * u; break;
        default: v = std::min(1.0 - u * u * u * u, kBelowOne); break;
      }
      if (!(v > 0.0)) v = 0x1p-53;
    }
    const PValueSet p(raw);

    const double lo = (g.next_u32() % 2 == 0) ? 0.0 : 0.05 * g.uniform_open();
    const double hi = 0.2 + 0.29 * g.uniform_open();
    double c = 0.0;
    switch (g.next_u32() % 3) {
      case 0: c = 0.0; break;
      case 1: c = 1.0 / (2.0 * static_cast<double>(m)); break;
      default: c = 0.2 * g.uniform_open(); break;
    }
    const CandidateFamilyConfig cfg{c, ThresholdWindow(lo, hi)};
    const EnvelopeCurve improved = improve_envelope(p, build_envelope(p, cfg));

    std::vector<double> thresholds{lo};
    for (double v : p.sorted())
      if (v > lo && v <= hi) thresholds.push_back(v);

    for (double t : thresholds) {
      std::vector<std::int64_t> rejected;
      for (std::int64_t k = 0; k < m; ++k)
        if (p.sorted()[static_cast<std::size_t>(k)] <= t) rejected.push_back(p.original_index(k));
      const std::int64_t exhaustive = brute_force_closed_bound(p, rejected, improved);
      ++rep.points_checked;
      if (exhaustive != improved.value_at(t)) ++rep.mismatches;
    }
  }
  return rep;
}

}  // namespace mfdp
