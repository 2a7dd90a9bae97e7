#include "control.hpp"

#include <algorithm>
#include <cstdio>
#include <limits>

namespace mfdp {

namespace {

void check_unit(double v, const char* name) {
  if (!(v >= 0.0 && v <= 1.0)) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%s=%g outside [0,1]", name, v);
    throw ParameterError(buf);
  }
}

double clamped_ratio(std::int64_t env, std::int64_t rejections) {
  const double x = static_cast<double>(env) / static_cast<double>(rejections);
  return x < 1.0 ? x : 1.0;
}

// same comparison the adjusted values use, so reports stay coherent at any gamma
bool level_ok(std::int64_t env, std::int64_t rejections, double gamma) {
  if (rejections <= 0) return env <= 0 || gamma >= 1.0;
  return clamped_ratio(env, rejections) <= gamma;
}

}  // namespace

double t_max(const PValueSet& p, const EnvelopeCurve& env, double gamma) {
  check_unit(gamma, "gamma");
  const ThresholdWindow& w = env.window();
  const auto& sp = p.sorted();

  std::int64_t i = p.size() - 1;
  while (i >= 0 && sp[static_cast<std::size_t>(i)] > w.hi) --i;  // above the window: never rejectable

  bool ok = false;
  while (i >= 0 && sp[static_cast<std::size_t>(i)] >= w.lo) {
    const double v = sp[static_cast<std::size_t>(i)];
    ok = ok || level_ok(env.value_at(v), i + 1, gamma);
    if (ok) return v;
    while (i >= 0 && sp[static_cast<std::size_t>(i)] == v) --i;
  }
  if (i >= 0) {
    // p-values below the window start share its threshold
    ok = ok || level_ok(env.value_at(w.lo), i + 1, gamma);
    if (ok) return sp[static_cast<std::size_t>(i)];
  }
  return 0.0;
}

std::vector<double> adjusted_pvalues(const PValueSet& p, const EnvelopeCurve& env) {
  const ThresholdWindow& w = env.window();
  const auto& sp = p.sorted();
  const std::int64_t m = p.size();

  std::vector<double> ad(static_cast<std::size_t>(m), std::numeric_limits<double>::infinity());
  const std::int64_t r = p.count_rejections(w.hi);
  if (r > 0) {
    // distinct tie-run tops inside the window, ascending, with the window
    // start standing in for anything below it; the envelope is evaluated once
    // per threshold in a single forward pass
    std::int64_t lo_block = 0;
    while (lo_block < r && sp[static_cast<std::size_t>(lo_block)] < w.lo) ++lo_block;
    std::vector<double> query;
    std::vector<std::int64_t> run_end;  // exclusive sorted-index end per run
    if (lo_block > 0) {
      query.push_back(w.lo);
      run_end.push_back(lo_block);
    }
    for (std::int64_t i = lo_block; i < r;) {
      const double v = sp[static_cast<std::size_t>(i)];
      while (i < r && sp[static_cast<std::size_t>(i)] == v) ++i;
      query.push_back(v);
      run_end.push_back(i);
    }
    const auto env_vals = env.values_at_ascending(query);

    double running = std::numeric_limits<double>::infinity();
    for (std::size_t q = query.size(); q-- > 0;) {
      const std::int64_t last = run_end[q] - 1;
      const std::int64_t first = q > 0 ? run_end[q - 1] : 0;
      // the below-window block shares the bound at the window start
      const std::int64_t rejections = q == 0 && lo_block > 0 ? lo_block : last + 1;
      running = std::min(running, clamped_ratio(env_vals[q], rejections));
      for (std::int64_t k = first; k <= last; ++k) ad[static_cast<std::size_t>(k)] = running;
    }
  }

  if (p.input_sorted()) return ad;  // identity permutation
  std::vector<double> out(static_cast<std::size_t>(m));
  for (std::int64_t k = 0; k < m; ++k) out[static_cast<std::size_t>(p.original_index(k))] = ad[static_cast<std::size_t>(k)];
  return out;
}

MfdpReport reject_at(const PValueSet& p, const EnvelopeCurve& env, double gamma) {
  check_unit(gamma, "gamma");
  MfdpReport rep;
  rep.gamma = gamma;
  rep.t_max = t_max(p, env, gamma);
  rep.adjusted = adjusted_pvalues(p, env);

  const std::int64_t m = p.size();
  std::vector<double> ad_sorted(static_cast<std::size_t>(m));
  for (std::int64_t k = 0; k < m; ++k)
    ad_sorted[static_cast<std::size_t>(k)] = rep.adjusted[static_cast<std::size_t>(p.original_index(k))];

  std::int64_t k = 0;
  while (k < m && ad_sorted[static_cast<std::size_t>(k)] <= gamma) ++k;
  rep.rejections = k;
  rep.fdp_bound = k > 0 ? ad_sorted[static_cast<std::size_t>(k - 1)] : 0.0;
  rep.rejected.reserve(static_cast<std::size_t>(k));
  for (std::int64_t j = 0; j < k; ++j) rep.rejected.push_back(p.original_index(j));
  std::sort(rep.rejected.begin(), rep.rejected.end());
  return rep;
}

std::int64_t bh_rejections(const PValueSet& p, double alpha) {
  if (!(alpha > 0.0 && alpha < 1.0)) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "alpha=%g outside (0,1)", alpha);
    throw ParameterError(buf);
  }
  const auto& sp = p.sorted();
  const double m = static_cast<double>(p.size());
  for (std::int64_t k = p.size(); k >= 1; --k) {
    if (sp[static_cast<std::size_t>(k - 1)] <= static_cast<double>(k) * alpha / m) return k;
  }
  return 0;
}

}  // namespace mfdp
