#include "simulation.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <exception>
#include <limits>
#include <thread>

#include "control.hpp"
#include "envelope.hpp"
#include "philox.hpp"

namespace mfdp {

namespace {

constexpr double kInvSqrt2 = 0.70710678118654752440084436210485;

double two_sided_p(double z) {
  double p = std::erfc(std::fabs(z) * kInvSqrt2);
  if (p <= 0.0) p = std::numeric_limits<double>::min();
  return p > 1.0 ? 1.0 : p;
}

double right_sided_p(double z) {
  double p = 0.5 * std::erfc(z * kInvSqrt2);
  if (p <= 0.0) p = std::numeric_limits<double>::min();
  return p > 1.0 ? 1.0 : p;
}

[[noreturn]] void not_psd(const char* detail) {
  char buf[128];
  std::snprintf(buf, sizeof buf, "covariance parameters are not positive semi-definite: %s", detail);
  throw ParameterError(buf);
}

// pairwise correlation rho among n exchangeable standard normals;
// valid for -1/(n-1) <= rho <= 1
void equicorrelated_sample(double rho, std::size_t n, rng::CounterRng& g, double* out) {
  if (rho == 0.0) {
    for (std::size_t i = 0; i < n; ++i) out[i] = g.normal();
    return;
  }
  if (rho > 0.0) {
    const double a = std::sqrt(rho);
    const double b = std::sqrt(1.0 - rho);
    const double shared = g.normal();
    for (std::size_t i = 0; i < n; ++i) out[i] = a * shared + b * g.normal();
    return;
  }
  // negative rho: scale deviations from the mean of an iid draw
  const double a = std::sqrt(1.0 - rho);
  const double b = std::sqrt(1.0 + (static_cast<double>(n) - 1.0) * rho);
  double sum = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    out[i] = g.normal();
    sum += out[i];
  }
  const double mean = sum / static_cast<double>(n);
  for (std::size_t i = 0; i < n; ++i) out[i] = a * (out[i] - mean) + b * mean;
}

std::vector<double> sample_statistics(const Scenario& s, rng::CounterRng& g) {
  const std::size_t m = static_cast<std::size_t>(s.m);
  std::vector<double> z(m);
  switch (s.dependence) {
    case Dependence::independent:
      for (auto& v : z) v = g.normal();
      break;
    case Dependence::equicorrelated:
      equicorrelated_sample(s.rho, m, g, z.data());
      break;
    case Dependence::block: {
      const std::size_t bs = m / static_cast<std::size_t>(s.n_blocks);
      for (std::size_t b = 0; b < static_cast<std::size_t>(s.n_blocks); ++b)
        equicorrelated_sample(s.rho, bs, g, z.data() + b * bs);
      break;
    }
    case Dependence::two_level_block: {
      const std::size_t nb = static_cast<std::size_t>(s.n_blocks);
      const std::size_t bs = m / nb;
      if (s.rho_within == 0.0) {
        for (auto& v : z) v = g.normal();
        break;
      }
      std::vector<double> factors(nb);
      equicorrelated_sample(s.rho_between / s.rho_within, nb, g, factors.data());
      const double a = std::sqrt(s.rho_within);
      const double b = std::sqrt(1.0 - s.rho_within);
      for (std::size_t i = 0; i < m; ++i) z[i] = a * factors[i / bs] + b * g.normal();
      break;
    }
  }
  return z;
}

// dense reference path: explicit covariance matrix and its Cholesky factor
std::vector<double> covariance_matrix(const Scenario& s) {
  const std::size_t m = static_cast<std::size_t>(s.m);
  std::vector<double> a(m * m, 0.0);
  auto at = [&](std::size_t i, std::size_t j) -> double& { return a[i * m + j]; };
  for (std::size_t i = 0; i < m; ++i) at(i, i) = 1.0;
  switch (s.dependence) {
    case Dependence::independent:
      break;
    case Dependence::equicorrelated:
      for (std::size_t i = 0; i < m; ++i)
        for (std::size_t j = 0; j < m; ++j)
          if (i != j) at(i, j) = s.rho;
      break;
    case Dependence::block: {
      const std::size_t bs = m / static_cast<std::size_t>(s.n_blocks);
      for (std::size_t i = 0; i < m; ++i)
        for (std::size_t j = 0; j < m; ++j)
          if (i != j && i / bs == j / bs) at(i, j) = s.rho;
      break;
    }
    case Dependence::two_level_block: {
      const std::size_t bs = m / static_cast<std::size_t>(s.n_blocks);
      for (std::size_t i = 0; i < m; ++i)
        for (std::size_t j = 0; j < m; ++j)
          if (i != j) at(i, j) = (i / bs == j / bs) ? s.rho_within : s.rho_between;
      break;
    }
  }
  return a;
}

std::vector<double> cholesky_lower(std::vector<double> a, std::size_t m) {
  auto at = [&](std::size_t i, std::size_t j) -> double& { return a[i * m + j]; };
  for (std::size_t j = 0; j < m; ++j) {
    double d = at(j, j);
    for (std::size_t k = 0; k < j; ++k) d -= at(j, k) * at(j, k);
    if (d < -1e-9) not_psd("Cholesky factorization failed");
    const double l = std::sqrt(d > 0.0 ? d : 0.0);
    at(j, j) = l;
    for (std::size_t i = j + 1; i < m; ++i) {
      double v = at(i, j);
      for (std::size_t k = 0; k < j; ++k) v -= at(i, k) * at(j, k);
      at(i, j) = l > 0.0 ? v / l : 0.0;
    }
    for (std::size_t k = j + 1; k < m; ++k) at(j, k) = 0.0;
  }
  return a;
}

std::vector<double> sample_statistics_dense(const std::vector<double>& chol, std::size_t m, rng::CounterRng& g) {
  std::vector<double> u(m);
  for (auto& v : u) v = g.normal();
  std::vector<double> z(m, 0.0);
  for (std::size_t i = 0; i < m; ++i) {
    double acc = 0.0;
    for (std::size_t j = 0; j <= i; ++j) acc += chol[i * m + j] * u[j];
    z[i] = acc;
  }
  return z;
}

double resolved_c(const Scenario& s) { return s.c < 0.0 ? 1.0 / (2.0 * static_cast<double>(s.m)) : s.c; }

std::vector<double> replicate_pvalues(const Scenario& s, std::int64_t rep, const std::vector<double>* chol,
                                      std::int64_t n_false) {
  rng::CounterRng g(s.seed, static_cast<std::uint64_t>(rep));
  std::vector<double> z = chol ? sample_statistics_dense(*chol, static_cast<std::size_t>(s.m), g)
                               : sample_statistics(s, g);
  for (std::int64_t i = 0; i < n_false; ++i) z[static_cast<std::size_t>(i)] += s.delta;
  std::vector<double> p(z.size());
  if (s.sidedness == Sidedness::two_sided)
    for (std::size_t i = 0; i < z.size(); ++i) p[i] = two_sided_p(z[i]);
  else
    for (std::size_t i = 0; i < z.size(); ++i) p[i] = right_sided_p(z[i]);
  return p;
}

// any threshold in the window (equivalently: the window start or a p-value in
// it) where the true count of false rejections exceeds the envelope
bool violated(const PValueSet& ps, const std::vector<std::uint8_t>& is_null, const EnvelopeCurve& env) {
  const ThresholdWindow& w = env.window();
  const auto& sp = ps.sorted();
  const std::int64_t m = ps.size();
  std::int64_t nulls = 0;
  std::int64_t i = 0;
  while (i < m && sp[static_cast<std::size_t>(i)] <= w.lo) {
    nulls += is_null[static_cast<std::size_t>(ps.original_index(i))];
    ++i;
  }
  if (nulls > env.value_at(w.lo)) return true;
  while (i < m && sp[static_cast<std::size_t>(i)] <= w.hi) {
    const double v = sp[static_cast<std::size_t>(i)];
    while (i < m && sp[static_cast<std::size_t>(i)] == v) {
      nulls += is_null[static_cast<std::size_t>(ps.original_index(i))];
      ++i;
    }
    if (nulls > env.value_at(v)) return true;
  }
  return false;
}

struct RepOutputs {
  std::vector<std::uint8_t> err;
  std::vector<double> power;  // reps x n_gamma
  std::vector<double> bh;
};

McResult run_scenario(const Scenario& s, bool want_error, bool want_power) {
  validate_scenario(s);
  const TruthMask mask = truth_mask(s);
  if (want_power && mask.n_false == 0) throw ParameterError("power estimation requires pi0 < 1");

  const CandidateFamilyConfig cfg{resolved_c(s), s.window};
  const std::size_t n_gamma = s.gamma_grid.size();
  const std::int64_t reps = s.reps;

  std::vector<double> chol;
  if (s.use_dense_sampler)
    chol = cholesky_lower(covariance_matrix(s), static_cast<std::size_t>(s.m));

  RepOutputs out;
  if (want_error) out.err.assign(static_cast<std::size_t>(reps), 0);
  if (want_power) {
    out.power.assign(static_cast<std::size_t>(reps) * n_gamma, 0.0);
    out.bh.assign(static_cast<std::size_t>(reps), 0.0);
  }

  auto work = [&](std::int64_t lo, std::int64_t hi) {
    for (std::int64_t rep = lo; rep < hi; ++rep) {
      const PValueSet ps(replicate_pvalues(s, rep, s.use_dense_sampler ? &chol : nullptr, mask.n_false));
      const EnvelopeCurve env = build_envelope(ps, cfg);
      if (want_error) out.err[static_cast<std::size_t>(rep)] = violated(ps, mask.is_null, env) ? 1 : 0;
      if (want_power) {
        const std::vector<double> ad =
            s.use_improved_envelope ? adjusted_pvalues(ps, improve_envelope(ps, env)) : adjusted_pvalues(ps, env);
        for (std::size_t gi = 0; gi < n_gamma; ++gi) {
          std::int64_t hits = 0;
          for (std::int64_t i = 0; i < mask.n_false; ++i)
            if (ad[static_cast<std::size_t>(i)] <= s.gamma_grid[gi]) ++hits;
          out.power[static_cast<std::size_t>(rep) * n_gamma + gi] =
              static_cast<double>(hits) / static_cast<double>(mask.n_false);
        }
        const std::int64_t k = bh_rejections(ps, s.bh_alpha);
        std::int64_t hits = 0;
        for (std::int64_t j = 0; j < k; ++j)
          if (!mask.is_null[static_cast<std::size_t>(ps.original_index(j))]) ++hits;
        out.bh[static_cast<std::size_t>(rep)] = static_cast<double>(hits) / static_cast<double>(mask.n_false);
      }
    }
  };

  int threads = s.threads > 0 ? s.threads : static_cast<int>(std::thread::hardware_concurrency());
  if (threads < 1) threads = 1;
  threads = static_cast<int>(std::min<std::int64_t>(threads, reps));
  if (threads == 1) {
    work(0, reps);
  } else {
    std::vector<std::thread> pool;
    std::vector<std::exception_ptr> errs(static_cast<std::size_t>(threads));
    for (int t = 0; t < threads; ++t) {
      const std::int64_t lo = reps * t / threads;
      const std::int64_t hi = reps * (t + 1) / threads;
      pool.emplace_back([&, t, lo, hi] {
        try {
          work(lo, hi);
        } catch (...) {
          errs[static_cast<std::size_t>(t)] = std::current_exception();
        }
      });
    }
    for (auto& th : pool) th.join();
    for (const auto& e : errs)
      if (e) std::rethrow_exception(e);
  }

  McResult res;
  res.reps = reps;
  if (want_error) {
    double sum = 0.0;
    for (auto v : out.err) sum += v;
    res.error_rate = sum / static_cast<double>(reps);
    res.error_se = std::sqrt(res.error_rate * (1.0 - res.error_rate) / static_cast<double>(reps));
  }
  if (want_power) {
    res.power.resize(n_gamma);
    res.power_se.resize(n_gamma);
    for (std::size_t gi = 0; gi < n_gamma; ++gi) {
      double sum = 0.0;
      for (std::int64_t rep = 0; rep < reps; ++rep) sum += out.power[static_cast<std::size_t>(rep) * n_gamma + gi];
      const double mean = sum / static_cast<double>(reps);
      double ss = 0.0;
      for (std::int64_t rep = 0; rep < reps; ++rep) {
        const double d = out.power[static_cast<std::size_t>(rep) * n_gamma + gi] - mean;
        ss += d * d;
      }
      res.power[gi] = mean;
      res.power_se[gi] = reps > 1 ? std::sqrt(ss / (static_cast<double>(reps) * (static_cast<double>(reps) - 1.0))) : 0.0;
    }
    double sum = 0.0;
    for (double v : out.bh) sum += v;
    res.bh_power = sum / static_cast<double>(reps);
    double ss = 0.0;
    for (double v : out.bh) {
      const double d = v - res.bh_power;
      ss += d * d;
    }
    res.bh_power_se = reps > 1 ? std::sqrt(ss / (static_cast<double>(reps) * (static_cast<double>(reps) - 1.0))) : 0.0;
  }
  return res;
}

}  // namespace

void validate_scenario(const Scenario& s) {
  if (s.m < 1) throw ParameterError("m must be >= 1");
  if (!(s.pi0 >= 0.0 && s.pi0 <= 1.0)) throw ParameterError("pi0 must lie in [0,1]");
  if (s.reps < 1) throw ParameterError("reps must be >= 1");
  if (!std::isfinite(s.delta)) throw ParameterError("delta must be finite");
  if (s.c >= 0.0 && !std::isfinite(s.c)) throw ParameterError("c must be finite");
  for (double g : s.gamma_grid)
    if (!(g >= 0.0 && g <= 1.0)) throw ParameterError("gamma grid entries must lie in [0,1]");
  if (!(s.bh_alpha > 0.0 && s.bh_alpha < 1.0)) throw ParameterError("bh_alpha must lie in (0,1)");

  switch (s.dependence) {
    case Dependence::independent:
      break;
    case Dependence::equicorrelated: {
      const double lo = s.m > 1 ? -1.0 / (static_cast<double>(s.m) - 1.0) : 0.0;
      if (s.rho > 1.0 || s.rho < lo) not_psd("need -1/(m-1) <= rho <= 1");
      break;
    }
    case Dependence::block: {
      if (s.n_blocks < 1 || s.m % s.n_blocks != 0) throw ParameterError("n_blocks must divide m");
      const std::int64_t bs = s.m / s.n_blocks;
      const double lo = bs > 1 ? -1.0 / (static_cast<double>(bs) - 1.0) : 0.0;
      if (s.rho > 1.0 || s.rho < lo) not_psd("need -1/(block size - 1) <= rho <= 1");
      break;
    }
    case Dependence::two_level_block: {
      if (s.n_blocks < 1 || s.m % s.n_blocks != 0) throw ParameterError("n_blocks must divide m");
      if (!(s.rho_within >= 0.0 && s.rho_within <= 1.0)) not_psd("need 0 <= rho_within <= 1");
      if (s.rho_within == 0.0) {
        if (s.rho_between != 0.0) not_psd("rho_between requires rho_within > 0");
      } else {
        const double x = s.rho_between / s.rho_within;
        const double lo = s.n_blocks > 1 ? -1.0 / (static_cast<double>(s.n_blocks) - 1.0) : 0.0;
        if (x > 1.0 || x < lo) not_psd("need -rho_within/(n_blocks-1) <= rho_between <= rho_within");
      }
      break;
    }
  }
}

TruthMask truth_mask(const Scenario& s) {
  TruthMask mask;
  std::int64_t n_false = static_cast<std::int64_t>(std::llround((1.0 - s.pi0) * static_cast<double>(s.m)));
  n_false = std::clamp<std::int64_t>(n_false, 0, s.m);
  mask.n_false = n_false;
  mask.is_null.assign(static_cast<std::size_t>(s.m), 1);
  for (std::int64_t i = 0; i < n_false; ++i) mask.is_null[static_cast<std::size_t>(i)] = 0;
  return mask;
}

std::vector<double> sample_pvalues(const Scenario& s, std::int64_t rep) {
  validate_scenario(s);
  const TruthMask mask = truth_mask(s);
  std::vector<double> chol;
  if (s.use_dense_sampler) chol = cholesky_lower(covariance_matrix(s), static_cast<std::size_t>(s.m));
  return replicate_pvalues(s, rep, s.use_dense_sampler ? &chol : nullptr, mask.n_false);
}

McResult estimate_error_rate(const Scenario& s) { return run_scenario(s, true, false); }

McResult estimate_power(const Scenario& s) { return run_scenario(s, false, true); }

}  // namespace mfdp
