#pragma once

#include <cstdint>
#include <vector>

#include "pvalues.hpp"

namespace mfdp {

enum class Dependence {
  independent,
  equicorrelated,     // one shared factor, pairwise correlation rho
  block,              // contiguous blocks, within-block correlation rho
  two_level_block     // within-block rho_within, between-block rho_between
};

enum class Sidedness { two_sided, right_sided };

struct Scenario {
  std::int64_t m = 1000;
  double pi0 = 1.0;     // true-null fraction; round((1-pi0)m) leading stats get the shift
  double delta = 0.0;   // mean shift of the non-null statistics
  Dependence dependence = Dependence::independent;
  double rho = 0.0;           // equicorrelated / block
  std::int64_t n_blocks = 5;  // block / two_level_block
  double rho_within = 0.0;    // two_level_block
  double rho_between = 0.0;   // two_level_block
  Sidedness sidedness = Sidedness::two_sided;
  std::int64_t reps = 1000;
  std::uint64_t seed = 1;
  ThresholdWindow window{0.0, 0.1};
  double c = -1.0;  // negative: use 1/(2m)
  std::vector<double> gamma_grid{0.05};
  double bh_alpha = 0.05;
  bool use_improved_envelope = false;  // adjusted p-values from the tightened curve
  bool use_dense_sampler = false;      // dense Cholesky reference path
  int threads = 0;                     // 0: hardware concurrency
};

struct TruthMask {
  std::vector<std::uint8_t> is_null;  // input order
  std::int64_t n_false = 0;
};

struct McResult {
  double error_rate = 0.0;  // frequency of any-threshold envelope violation
  double error_se = 0.0;    // sqrt(r(1-r)/reps)
  std::vector<double> power;     // by gamma_grid: mean fraction of false nulls rejected
  std::vector<double> power_se;  // sample standard errors
  double bh_power = 0.0;
  double bh_power_se = 0.0;
  std::int64_t reps = 0;
};

void validate_scenario(const Scenario& s);
TruthMask truth_mask(const Scenario& s);

// p-values of one replicate in input order; deterministic in (seed, rep)
std::vector<double> sample_pvalues(const Scenario& s, std::int64_t rep);

// Frequency of {some threshold in the window where the true false-rejection
// count exceeds the envelope}, with its binomial standard error.
McResult estimate_error_rate(const Scenario& s);

// Mean fraction of false hypotheses rejected, per gamma and for the step-up
// baseline at bh_alpha. Requires pi0 < 1.
McResult estimate_power(const Scenario& s);

}  // namespace mfdp
