#include <cmath>
#include <vector>

#include "doctest.h"
#include "errors.hpp"
#include "simulation.hpp"
#include "support/random_instances.hpp"

using mfdp::Dependence;
using mfdp::McResult;
using mfdp::Scenario;
using mfdp::Sidedness;

namespace {

// expected Pearson correlation of the probability transforms of a bivariate
// normal pair with correlation rho: (6/pi) asin(rho/2)
double grade_corr(double rho) { return 6.0 / 3.14159265358979323846 * std::asin(rho / 2.0); }

// mean pairwise sample correlation of p-values over replicates, pairs chosen
// by a predicate on (i, j)
template <typename Pred>
double mean_pair_corr(const Scenario& s, std::int64_t reps, Pred&& want) {
  const std::size_t m = static_cast<std::size_t>(s.m);
  std::vector<std::vector<double>> cols(m);
  for (auto& c : cols) c.reserve(static_cast<std::size_t>(reps));
  for (std::int64_t r = 0; r < reps; ++r) {
    const auto p = mfdp::sample_pvalues(s, r);
    for (std::size_t i = 0; i < m; ++i) cols[i].push_back(p[i]);
  }
  std::vector<double> mean(m, 0.0), sd(m, 0.0);
  for (std::size_t i = 0; i < m; ++i) {
    for (double v : cols[i]) mean[i] += v;
    mean[i] /= static_cast<double>(reps);
    for (double v : cols[i]) sd[i] += (v - mean[i]) * (v - mean[i]);
    sd[i] = std::sqrt(sd[i] / static_cast<double>(reps - 1));
  }
  double total = 0.0;
  std::int64_t pairs = 0;
  for (std::size_t i = 0; i < m; ++i)
    for (std::size_t j = i + 1; j < m; ++j) {
      if (!want(i, j)) continue;
      double cov = 0.0;
      for (std::int64_t r = 0; r < reps; ++r)
        cov += (cols[i][static_cast<std::size_t>(r)] - mean[i]) * (cols[j][static_cast<std::size_t>(r)] - mean[j]);
      cov /= static_cast<double>(reps - 1);
      total += cov / (sd[i] * sd[j]);
      ++pairs;
    }
  return total / static_cast<double>(pairs);
}

}  // namespace

TEST_SUITE("simulation") {

TEST_CASE("scenario validation") {
  Scenario s;
  CHECK_NOTHROW(mfdp::validate_scenario(s));
  s.pi0 = 1.2;
  CHECK_THROWS_AS(mfdp::validate_scenario(s), mfdp::ParameterError);
  s.pi0 = 1.0;

  s.dependence = Dependence::equicorrelated;
  s.m = 5;
  s.rho = -0.3;  // below -1/(m-1)
  CHECK_THROWS_WITH_AS(mfdp::validate_scenario(s), doctest::Contains("positive semi-definite"),
                       mfdp::ParameterError);
  s.rho = -0.25;
  CHECK_NOTHROW(mfdp::validate_scenario(s));

  s.dependence = Dependence::block;
  s.m = 10;
  s.n_blocks = 3;  // does not divide m
  s.rho = 0.5;
  CHECK_THROWS_AS(mfdp::validate_scenario(s), mfdp::ParameterError);
  s.n_blocks = 5;
  CHECK_NOTHROW(mfdp::validate_scenario(s));

  s.dependence = Dependence::two_level_block;
  s.m = 20;
  s.n_blocks = 4;
  s.rho_within = 0.5;
  s.rho_between = -0.2;  // ratio -0.4 < -1/(blocks-1)
  CHECK_THROWS_AS(mfdp::validate_scenario(s), mfdp::ParameterError);
  s.rho_between = -0.01;
  CHECK_NOTHROW(mfdp::validate_scenario(s));
  s.rho_within = 0.0;
  s.rho_between = -0.01;  // between needs within
  CHECK_THROWS_AS(mfdp::validate_scenario(s), mfdp::ParameterError);
}

TEST_CASE("truth mask marks the leading shifted hypotheses") {
  Scenario s;
  s.m = 1000;
  s.pi0 = 0.95;
  const auto mask = mfdp::truth_mask(s);
  CHECK(mask.n_false == 50);
  for (std::size_t i = 0; i < 50; ++i) CHECK(mask.is_null[i] == 0);
  for (std::size_t i = 50; i < 1000; ++i) CHECK(mask.is_null[i] == 1);
}

TEST_CASE("replicates are deterministic in (seed, rep)") {
  Scenario s;
  s.m = 64;
  s.seed = 7;
  const auto a = mfdp::sample_pvalues(s, 3);
  const auto b = mfdp::sample_pvalues(s, 3);
  CHECK(a == b);
  CHECK(a != mfdp::sample_pvalues(s, 4));
  Scenario s2 = s;
  s2.seed = 8;
  CHECK(a != mfdp::sample_pvalues(s2, 3));
  for (double v : a) {
    CHECK(v > 0.0);
    CHECK(v <= 1.0);
  }
}

TEST_CASE("null p-values are uniform") {
  Scenario s;
  s.m = 1000;
  s.seed = 11;
  std::vector<double> pool;
  pool.reserve(100000);
  for (std::int64_t r = 0; r < 100; ++r)
    for (double v : mfdp::sample_pvalues(s, r)) pool.push_back(v);
  CHECK(testsupport::ks_uniform(pool) < 1.63 / std::sqrt(100000.0));  // alpha ~ 0.01

  s.sidedness = Sidedness::right_sided;
  pool.clear();
  for (std::int64_t r = 0; r < 100; ++r)
    for (double v : mfdp::sample_pvalues(s, r)) pool.push_back(v);
  CHECK(testsupport::ks_uniform(pool) < 1.63 / std::sqrt(100000.0));
}

TEST_CASE("equicorrelated sampling hits the target correlation") {
  Scenario s;
  s.m = 8;
  s.seed = 21;
  s.sidedness = Sidedness::right_sided;
  s.dependence = Dependence::equicorrelated;
  s.rho = 0.5;
  const double got = mean_pair_corr(s, 20000, [](std::size_t, std::size_t) { return true; });
  CHECK(got == doctest::Approx(grade_corr(0.5)).epsilon(0.03));

  s.rho = -0.2;  // negative branch uses the mean-deviation construction
  s.m = 4;
  const double neg = mean_pair_corr(s, 20000, [](std::size_t, std::size_t) { return true; });
  CHECK(neg == doctest::Approx(grade_corr(-0.2)).epsilon(0.08));
}

TEST_CASE("block sampling correlates inside blocks only") {
  Scenario s;
  s.m = 20;
  s.seed = 22;
  s.sidedness = Sidedness::right_sided;
  s.dependence = Dependence::block;
  s.rho = 0.9;
  s.n_blocks = 4;  // block size 5
  const auto block_of = [](std::size_t i) { return i / 5; };
  const double within =
      mean_pair_corr(s, 12000, [&](std::size_t i, std::size_t j) { return block_of(i) == block_of(j); });
  const double across =
      mean_pair_corr(s, 12000, [&](std::size_t i, std::size_t j) { return block_of(i) != block_of(j); });
  CHECK(within == doctest::Approx(grade_corr(0.9)).epsilon(0.02));
  CHECK(std::fabs(across) < 0.01);
}

TEST_CASE("two-level block sampling matches both correlation targets") {
  Scenario s;
  s.m = 40;
  s.seed = 23;
  s.sidedness = Sidedness::right_sided;
  s.dependence = Dependence::two_level_block;
  s.n_blocks = 4;  // block size 10
  s.rho_within = 0.5;
  s.rho_between = -0.01;
  const auto block_of = [](std::size_t i) { return i / 10; };
  const double within =
      mean_pair_corr(s, 12000, [&](std::size_t i, std::size_t j) { return block_of(i) == block_of(j); });
  const double across =
      mean_pair_corr(s, 12000, [&](std::size_t i, std::size_t j) { return block_of(i) != block_of(j); });
  CHECK(within == doctest::Approx(grade_corr(0.5)).epsilon(0.03));
  CHECK(across == doctest::Approx(grade_corr(-0.01)).scale(1.0).epsilon(0.008));

  // dense reference sampler reproduces the same dependence
  Scenario d = s;
  d.use_dense_sampler = true;
  const double within_dense =
      mean_pair_corr(d, 8000, [&](std::size_t i, std::size_t j) { return block_of(i) == block_of(j); });
  CHECK(within_dense == doctest::Approx(grade_corr(0.5)).epsilon(0.04));
}

TEST_CASE("shift moves the leading statistics") {
  Scenario s;
  s.m = 200;
  s.pi0 = 0.5;
  s.delta = 3.0;
  s.seed = 31;
  s.sidedness = Sidedness::right_sided;
  double mean_false = 0.0, mean_null = 0.0;
  for (std::int64_t r = 0; r < 200; ++r) {
    const auto p = mfdp::sample_pvalues(s, r);
    for (std::size_t i = 0; i < 100; ++i) mean_false += p[i];
    for (std::size_t i = 100; i < 200; ++i) mean_null += p[i];
  }
  mean_false /= 200.0 * 100.0;
  mean_null /= 200.0 * 100.0;
  CHECK(mean_false < 0.1);  // shifted stats give small right-sided p
  CHECK(mean_null == doctest::Approx(0.5).epsilon(0.03));
}

TEST_CASE("no true nulls means no envelope violations") {
  Scenario s;
  s.m = 100;
  s.pi0 = 0.0;
  s.delta = 2.0;
  s.reps = 50;
  const auto res = mfdp::estimate_error_rate(s);
  CHECK(res.error_rate == 0.0);
  CHECK(res.error_se == 0.0);
  CHECK(res.reps == 50);
}

TEST_CASE("global-null violation frequency stays at or below one half") {
  Scenario s;
  s.m = 200;
  s.reps = 2000;
  s.seed = 41;
  const auto res = mfdp::estimate_error_rate(s);
  CHECK(res.error_rate <= 0.5 + 3.0 * res.error_se);
  CHECK(res.error_rate > 0.3);  // not vacuously conservative
  CHECK(res.error_se == doctest::Approx(std::sqrt(res.error_rate * (1.0 - res.error_rate) / 2000.0)));
}

TEST_CASE("power estimation requires false hypotheses and responds to gamma") {
  Scenario s;
  s.m = 200;
  s.reps = 200;
  s.seed = 51;
  CHECK_THROWS_WITH_AS(mfdp::estimate_power(s), doctest::Contains("pi0 < 1"), mfdp::ParameterError);

  s.pi0 = 0.9;
  s.delta = 3.0;
  s.gamma_grid = {0.01, 0.05, 0.1};
  const auto res = mfdp::estimate_power(s);
  REQUIRE(res.power.size() == 3);
  CHECK(res.power[0] <= res.power[1]);
  CHECK(res.power[1] <= res.power[2]);
  CHECK(res.power[2] > 0.0);
  CHECK(res.bh_power > 0.0);
  CHECK(res.bh_power <= 1.0);
  for (double se : res.power_se) CHECK(se < 0.1);

  // with no signal the procedure almost never certifies discoveries
  Scenario flat = s;
  flat.delta = 0.0;
  flat.gamma_grid = {0.05};
  const auto none = mfdp::estimate_power(flat);
  CHECK(none.power[0] < 0.05);
}

TEST_CASE("results do not depend on the thread count") {
  Scenario s;
  s.m = 50;
  s.reps = 60;
  s.pi0 = 0.8;
  s.delta = 2.5;
  s.seed = 61;
  s.gamma_grid = {0.05, 0.2};
  Scenario s1 = s, s4 = s;
  s1.threads = 1;
  s4.threads = 4;
  const auto e1 = mfdp::estimate_error_rate(s1);
  const auto e4 = mfdp::estimate_error_rate(s4);
  CHECK(e1.error_rate == e4.error_rate);
  const auto p1 = mfdp::estimate_power(s1);
  const auto p4 = mfdp::estimate_power(s4);
  CHECK(p1.power == p4.power);
  CHECK(p1.power_se == p4.power_se);
  CHECK(p1.bh_power == p4.bh_power);
}

}  // TEST_SUITE
