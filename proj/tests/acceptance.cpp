// release gate: each criterion prints exactly one [PASS]/[FAIL] line and the
// exit code follows it. Tolerances are pinned here on purpose.
#include <chrono>
#include <cinttypes>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <cstdlib>
#include <cstring>
#include <filesystem>
#include <random>
#include <string>
#include <vector>

#include "closed_testing.hpp"
#include "control.hpp"
#include "envelope.hpp"
#include "point_estimators.hpp"
#include "pvalues.hpp"
#include "simulation.hpp"
#include "support/cli_reference.hpp"
#include "support/oracles.hpp"
#include "support/random_instances.hpp"

namespace {

using mfdp::CandidateFamilyConfig;
using mfdp::Dependence;
using mfdp::PValueSet;
using mfdp::Scenario;
using mfdp::Sidedness;
using mfdp::ThresholdWindow;

struct Outcome {
  bool pass = false;
  std::string detail;
};

std::string num(double v, const char* spec = "%.4f") {
  char buf[48];
  std::snprintf(buf, sizeof buf, spec, v);
  return buf;
}

Scenario table_base() {
  Scenario s;
  s.m = 1000;
  s.reps = 10000;
  s.window = ThresholdWindow(0.0, 0.1);
  s.c = 0.0005;
  return s;
}

Scenario scen_in() { return table_base(); }

Scenario scen_ho(double rho) {
  Scenario s = table_base();
  s.dependence = Dependence::equicorrelated;
  s.rho = rho;
  return s;
}

Scenario scen_bl(double rho) {
  Scenario s = table_base();
  s.dependence = Dependence::block;
  s.rho = rho;
  s.n_blocks = 5;
  return s;
}

Scenario scen_ne() {
  Scenario s = table_base();
  s.dependence = Dependence::two_level_block;
  s.n_blocks = 50;
  s.rho_within = 0.5;
  s.rho_between = -0.01;
  s.sidedness = Sidedness::right_sided;
  return s;
}

void add_signal(Scenario& s, double pi0, double delta) {
  s.pi0 = pi0;
  s.delta = delta;
}

// ---------------------------------------------------------------- criterion 1
// spot error probabilities for four dependence settings
Outcome criterion1() {
  constexpr double kTol = 0.02;
  struct Row {
    const char* name;
    Scenario s;
    double target;
  };
  std::vector<Row> rows;
  rows.push_back({"IN(pi0=1)", scen_in(), 0.499});
  rows.push_back({"NE(pi0=1)", scen_ne(), 0.500});
  rows.push_back({"HO(.5,pi0=1)", scen_ho(0.5), 0.266});
  Scenario bl = scen_bl(0.5);
  add_signal(bl, 0.95, 3.0);
  rows.push_back({"BL(.5,pi0=.95)", bl, 0.338});

  Outcome out{true, ""};
  std::uint64_t seed = 41001;
  for (auto& row : rows) {
    row.s.seed = seed++;
    const auto r = mfdp::estimate_error_rate(row.s);
    const bool ok = std::fabs(r.error_rate - row.target) <= kTol;
    out.pass = out.pass && ok;
    out.detail += std::string(row.name) + " " + num(r.error_rate) + "/" + num(row.target, "%.3f") + " ";
  }
  out.detail += "(tol 0.02, 10^4 reps)";
  return out;
}

// ---------------------------------------------------------------- criterion 2
// power against the published grid, plus the step-up baseline
Outcome criterion2() {
  constexpr double kTol = 0.02;
  Outcome out{true, ""};

  struct Case {
    const char* name;
    Scenario s;
    std::vector<double> targets;  // per gamma
    double bh_target;
  };
  Scenario in = scen_in();
  add_signal(in, 0.9, 3.0);
  in.seed = 42001;
  Scenario ne = scen_ne();
  add_signal(ne, 0.9, 4.0);
  ne.seed = 42002;
  std::vector<Case> cases{{"IN(d=3)", in, {0.224, 0.431, 0.557}, 0.495},
                          {"NE(d=4)", ne, {0.593, 0.895, 0.940}, 0.919}};

  for (auto& cs : cases) {
    cs.s.gamma_grid = {0.01, 0.05, 0.1};
    cs.s.bh_alpha = 0.05;
    const auto r = mfdp::estimate_power(cs.s);
    out.detail += std::string(cs.name) + " ";
    for (std::size_t i = 0; i < cs.targets.size(); ++i) {
      const bool ok = std::fabs(r.power[i] - cs.targets[i]) <= kTol;
      out.pass = out.pass && ok;
      out.detail += num(r.power[i]) + "/" + num(cs.targets[i], "%.3f") + " ";
    }
    const bool bh_ok = std::fabs(r.bh_power - cs.bh_target) <= kTol;
    out.pass = out.pass && bh_ok;
    out.detail += "bh " + num(r.bh_power) + "/" + num(cs.bh_target, "%.3f") + "  ";
  }
  out.detail += "(tol 0.02)";
  return out;
}

// ---------------------------------------------------------------- criterion 3
// every published error setting stays below 0.5 plus three standard errors
Outcome criterion3() {
  struct Row {
    std::string name;
    Scenario s;
  };
  std::vector<Row> rows;
  for (double pi0 : {1.0, 0.95}) {
    const double delta = pi0 < 1.0 ? 3.0 : 0.0;
    auto tag = [&](const char* base) { return std::string(base) + (pi0 < 1.0 ? ",pi0=.95" : ",pi0=1"); };
    Scenario s = scen_in();
    add_signal(s, pi0, delta);
    rows.push_back({tag("IN"), s});
    for (double rho : {0.2, 0.5, 0.9}) {
      s = scen_ho(rho);
      add_signal(s, pi0, delta);
      rows.push_back({tag("HO"), s});
    }
    for (double rho : {0.5, 0.9}) {
      s = scen_bl(rho);
      add_signal(s, pi0, delta);
      rows.push_back({tag("BL"), s});
    }
    s = scen_ne();
    add_signal(s, pi0, delta);
    rows.push_back({tag("NE"), s});
  }

  Outcome out{true, ""};
  std::uint64_t seed = 43001;
  double worst_margin = 1.0;
  std::string worst;
  int passed = 0;
  for (auto& row : rows) {
    row.s.seed = seed++;
    const auto r = mfdp::estimate_error_rate(row.s);
    const double limit = 0.5 + 3.0 * r.error_se;
    const double margin = limit - r.error_rate;
    if (margin < worst_margin) {
      worst_margin = margin;
      worst = row.name + " " + num(r.error_rate) + " limit " + num(limit);
    }
    if (r.error_rate <= limit) ++passed;
  }
  out.pass = passed == static_cast<int>(rows.size());
  out.detail = std::to_string(passed) + "/" + std::to_string(rows.size()) +
               " settings within 0.5+3SE (tightest: " + worst + ")";
  return out;
}

// ---------------------------------------------------------------- criterion 4
// improved envelope equals the exhaustive closed-testing bound on [0, 0.45]
Outcome criterion4() {
  std::mt19937_64 rng(44001u);
  std::int64_t points = 0, mismatches = 0;
  for (int inst = 0; inst < 200; ++inst) {
    const std::int64_t m = testsupport::pick(rng, 5, 10);
    const auto raw = testsupport::random_pvalues(rng, m);
    const PValueSet p(raw);
    double c = 0.0;
    switch (inst % 3) {
      case 0: c = 0.0; break;
      case 1: c = 1.0 / (2.0 * static_cast<double>(m)); break;
      default: c = 0.1 * testsupport::unit_open(rng); break;
    }
    const CandidateFamilyConfig cfg{c, ThresholdWindow(0.0, 0.45)};
    const auto improved = mfdp::improve_envelope(p, mfdp::build_envelope(p, cfg));

    std::vector<double> thresholds{0.0};
    for (double v : p.sorted())
      if (v <= 0.45) thresholds.push_back(v);
    for (double t : thresholds) {
      std::vector<std::int64_t> rejected;
      for (std::int64_t k = 0; k < m; ++k)
        if (p.sorted()[static_cast<std::size_t>(k)] <= t) rejected.push_back(p.original_index(k));
      ++points;
      if (mfdp::brute_force_closed_bound(p, rejected, improved) != improved.value_at(t)) ++mismatches;
    }
  }
  return {mismatches == 0, "200 instances, " + std::to_string(points) + " thresholds, " +
                               std::to_string(mismatches) + " mismatches"};
}

// ---------------------------------------------------------------- criterion 5
// one-pass adjusted p-values equal the quadratic definition oracle
Outcome criterion5() {
  std::mt19937_64 rng(45001u);
  int bad_instances = 0;
  for (int inst = 0; inst < 1000; ++inst) {
    const std::int64_t m = testsupport::pick(rng, 1, 60);
    const auto raw = testsupport::random_pvalues(rng, m);
    const PValueSet p(raw);
    const double lo = (rng() % 2 == 0) ? 0.0 : 0.05 * testsupport::unit_open(rng);
    const double hi = lo + 0.02 + (0.9 - lo) * testsupport::unit_open(rng);
    double c = 0.0;
    switch (inst % 3) {
      case 0: c = 0.0; break;
      case 1: c = 1.0 / (2.0 * static_cast<double>(m)); break;
      default: c = 0.2 * testsupport::unit_open(rng); break;
    }
    auto env = mfdp::build_envelope(p, CandidateFamilyConfig{c, ThresholdWindow(lo, hi)});
    if (inst % 2 == 1) env = mfdp::improve_envelope(p, env);

    const auto got = mfdp::adjusted_pvalues(p, env);
    const auto want = testsupport::oracle_adjusted(raw, env);
    for (std::int64_t i = 0; i < m; ++i)
      if (got[static_cast<std::size_t>(i)] != want[static_cast<std::size_t>(i)]) {
        ++bad_instances;
        break;
      }
  }
  return {bad_instances == 0,
          "1000 instances, exact agreement failures: " + std::to_string(bad_instances)};
}

// ---------------------------------------------------------------- criterion 6
// closed-form slope search equals the brute-force candidate/grid/ulp oracle
Outcome criterion6() {
  std::mt19937_64 rng(46001u);
  int bad = 0;
  for (int inst = 0; inst < 1000; ++inst) {
    const std::int64_t m = testsupport::pick(rng, 1, 80);
    const auto raw = testsupport::random_pvalues(rng, m);
    const PValueSet p(raw);
    const double lo = (rng() % 2 == 0) ? 0.0 : 0.05 * testsupport::unit_open(rng);
    const double hi = lo + 0.02 + (0.93 - lo) * testsupport::unit_open(rng);
    double c = 0.0;
    switch (inst % 3) {
      case 0: c = 0.0; break;
      case 1: c = 1.0 / (2.0 * static_cast<double>(m)); break;
      default: c = 0.2 * testsupport::unit_open(rng); break;
    }
    const CandidateFamilyConfig cfg{c, ThresholdWindow(lo, hi)};
    const auto got = mfdp::kappa_max(p, cfg);
    bool oracle_fallback = false;
    const double want = testsupport::oracle_kappa_max(raw, cfg, &oracle_fallback);
    if (got.kappa != want || got.zero_kappa_fallback != oracle_fallback) ++bad;
  }
  return {bad == 0, "1000 instances, slope mismatches: " + std::to_string(bad)};
}

// ---------------------------------------------------------------- criterion 7
// with the flat weight, the generalized bounds collapse to the count formulas
Outcome criterion7() {
  std::mt19937_64 rng(47001u);
  const auto one = mfdp::PsiWeight::one();
  int bad = 0;
  for (int inst = 0; inst < 1000; ++inst) {
    const std::int64_t m = testsupport::pick(rng, 1, 100);
    const auto raw = testsupport::random_pvalues(rng, m);
    const PValueSet p(raw);

    double t = testsupport::unit_open(rng);
    if (inst % 4 == 1) {
      const double v = raw[static_cast<std::size_t>(rng() % raw.size())];
      if (v < 1.0) t = v;  // exact lower-boundary threshold
    } else if (inst % 4 == 2) {
      const double v = raw[static_cast<std::size_t>(rng() % raw.size())];
      if (v > 0.0 && v < 1.0) t = 1.0 - v;  // exact upper-boundary threshold
    } else if (inst % 8 == 3) {
      t = 0.5;
    }

    const std::int64_t above = m - p.count_rejections(t);
    const std::int64_t tail = p.count_upper_tail(t);
    const std::int64_t expect_n = std::min(m, above + tail);
    const std::int64_t expect_v = std::min(p.count_rejections(t), tail);
    if (mfdp::generalized_n_bound(p, t, one) != expect_n ||
        mfdp::generalized_v_bound(p, t, one) != expect_v)
      ++bad;
  }
  return {bad == 0, "1000 instances, reduction mismatches: " + std::to_string(bad)};
}

// ---------------------------------------------------------------- criterion 8
// the two point estimators coincide exactly at the midpoint tuning
Outcome criterion8() {
  std::mt19937_64 rng(48001u);
  int bad = 0;
  for (int inst = 0; inst < 1000; ++inst) {
    const std::int64_t m = testsupport::pick(rng, 1, 500);
    std::vector<double> raw(static_cast<std::size_t>(m));
    for (auto& v : raw) v = testsupport::unit_open(rng);  // continuous, interior
    const PValueSet p(raw);
    const auto a = mfdp::median_unbiased_pi0(p, 0.5);
    const auto b = mfdp::storey_pi0(p, 0.5);
    if (a.raw != b.raw || a.clamped != b.clamped) ++bad;
  }
  return {bad == 0, "1000 instances, identity failures: " + std::to_string(bad)};
}

// ---------------------------------------------------------------- criterion 9
// near-linear cost: a million pre-sorted p-values inside one second
Outcome criterion9() {
  std::mt19937_64 rng(49001u);
  auto make_sorted = [&rng](std::int64_t n) {
    std::vector<double> v(static_cast<std::size_t>(n));
    for (auto& x : v) x = testsupport::unit(rng);
    std::sort(v.begin(), v.end());
    return v;
  };

  volatile double sink = 0.0;
  auto pipeline_seconds = [&sink](const PValueSet& p) {
    const auto t0 = std::chrono::steady_clock::now();
    const CandidateFamilyConfig cfg{1.0 / (2.0 * static_cast<double>(p.size())), ThresholdWindow(0.0, 0.1)};
    const auto improved = mfdp::improve_envelope(p, mfdp::build_envelope(p, cfg));
    const auto adjusted = mfdp::adjusted_pvalues(p, improved);
    const auto t1 = std::chrono::steady_clock::now();
    for (double a : adjusted)
      if (std::isfinite(a)) sink = sink + a;
    return std::chrono::duration<double>(t1 - t0).count();
  };

  const PValueSet small(make_sorted(100000));
  const PValueSet large(make_sorted(1000000));
  (void)pipeline_seconds(small);  // warm-up
  (void)pipeline_seconds(large);
  double t_small = 1e9, t_large = 1e9;
  for (int rep = 0; rep < 9; ++rep) {
    t_small = std::min(t_small, pipeline_seconds(small));
    t_large = std::min(t_large, pipeline_seconds(large));
  }
  const double ratio = t_large / t_small;
  const bool pass = t_large < 1.0 && ratio <= 12.0;
  char buf[160];
  std::snprintf(buf, sizeof buf, "10^6 in %.3fs (limit 1s), 10^5->10^6 scaling %.1fx (limit 12x)", t_large,
                ratio);
  (void)sink;
  return {pass, buf};
}

// --------------------------------------------------------------- criterion 10
// the command-line analyze path is byte-identical to the library and its
// rejection counts are monotone in gamma
Outcome criterion10() {
  const char* cli = std::getenv("MFDP_CLI");
  if (!cli) return {false, "MFDP_CLI not set"};

  const auto dir = testsupport::fresh_dir("acceptance10");
  std::mt19937_64 rng(50001u);
  int byte_mismatches = 0, monotonicity_breaks = 0, run_failures = 0;
  for (int inst = 0; inst < 100; ++inst) {
    const std::int64_t m = testsupport::pick(rng, 1, 300);
    const auto raw = testsupport::random_pvalues(rng, m);
    std::string body = "p_value\n";
    for (double v : raw) body += testsupport::fmt17(v) + "\n";
    const auto input = dir / "input.csv";
    testsupport::write_file(input, body);

    std::vector<double> gammas;
    for (int k = 0; k < 4; ++k) gammas.push_back(testsupport::unit_open(rng));
    std::sort(gammas.begin(), gammas.end());

    std::string cmd = std::string(cli) + " analyze --input \"" + input.string() + "\" --out \"" +
                      dir.string() + "\"";
    for (double g : gammas) cmd += " --gamma " + testsupport::fmt17(g);
    cmd += " > /dev/null 2>&1";
    if (testsupport::run_command(cmd) != 0) {
      ++run_failures;
      continue;
    }

    const auto expect = testsupport::reference_analyze(input.string(), gammas);
    if (testsupport::read_file(dir / "adjusted_pvalues.csv") != expect.adjusted ||
        testsupport::read_file(dir / "rejections.csv") != expect.rejections ||
        testsupport::read_file(dir / "envelope.csv") != expect.envelope)
      ++byte_mismatches;

    std::istringstream lines(testsupport::read_file(dir / "rejections.csv"));
    std::string line;
    std::getline(lines, line);
    long long prev = -1;
    while (std::getline(lines, line)) {
      const auto cut = line.find(',', line.find(',') + 1);
      const long long rej = std::stoll(line.substr(cut + 1));
      if (rej < prev) ++monotonicity_breaks;
      prev = rej;
    }
  }
  std::filesystem::remove_all(dir);
  const bool pass = byte_mismatches == 0 && monotonicity_breaks == 0 && run_failures == 0;
  return {pass, "100 csvs: " + std::to_string(byte_mismatches) + " byte mismatches, " +
                    std::to_string(monotonicity_breaks) + " monotonicity breaks, " +
                    std::to_string(run_failures) + " run failures"};
}

}  // namespace

int main(int argc, char** argv) {
  if (argc != 2) {
    std::fprintf(stderr, "usage: %s <criterion 1..10>\n", argv[0]);
    return 2;
  }
  const int n = std::atoi(argv[1]);
  Outcome o;
  switch (n) {
    case 1: o = criterion1(); break;
    case 2: o = criterion2(); break;
    case 3: o = criterion3(); break;
    case 4: o = criterion4(); break;
    case 5: o = criterion5(); break;
    case 6: o = criterion6(); break;
    case 7: o = criterion7(); break;
    case 8: o = criterion8(); break;
    case 9: o = criterion9(); break;
    case 10: o = criterion10(); break;
    default:
      std::fprintf(stderr, "usage: %s <criterion 1..10>\n", argv[0]);
      return 2;
  }
  std::printf("[%s] criterion %d: %s\n", o.pass ? "PASS" : "FAIL", n, o.detail.c_str());
  return o.pass ? 0 : 1;
}
