// command-line front end; talks to the library through the C API only
#include <cinttypes>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <cstring>
#include <memory>
#include <stdexcept>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"
#include "mfdp/mfdp.h"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitFailure = 1;  // internal faults, equivalence mismatches
constexpr int kExitUsage = 2;    // bad arguments or bad input data
constexpr int kExitIo = 3;

struct CliError : std::runtime_error {
  CliError(int code, const std::string& msg) : std::runtime_error(msg), exit_code(code) {}
  int exit_code;
};

[[noreturn]] void raise(mfdp_status st) {
  int code = kExitUsage;
  if (st == MFDP_ERR_IO) code = kExitIo;
  if (st == MFDP_ERR_NOMEM || st == MFDP_ERR_INTERNAL) code = kExitFailure;
  throw CliError(code, mfdp_last_error());
}

void check(mfdp_status st) {
  if (st != MFDP_OK) raise(st);
}

using PvaluesPtr = std::unique_ptr<mfdp_pvalues, decltype(&mfdp_pvalues_free)>;
using EnvelopePtr = std::unique_ptr<mfdp_envelope, decltype(&mfdp_envelope_free)>;
using TablePtr = std::unique_ptr<mfdp_curve_table, decltype(&mfdp_curve_table_free)>;
using ReportPtr = std::unique_ptr<mfdp_report, decltype(&mfdp_report_free)>;

PvaluesPtr load_pvalues(const std::string& path, const std::string& column) {
  mfdp_pvalues* raw = nullptr;
  check(mfdp_pvalues_read_csv(path.c_str(), column.empty() ? nullptr : column.c_str(), &raw));
  return PvaluesPtr(raw, &mfdp_pvalues_free);
}

std::string fmt(double v) {
  if (std::isinf(v)) return v > 0 ? "Inf" : "-Inf";
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

nlohmann::json json_number(double v) {
  if (std::isinf(v)) return v > 0 ? nlohmann::json("Inf") : nlohmann::json("-Inf");
  return nlohmann::json(v);
}

struct OutFile {
  explicit OutFile(const std::string& path) {
    if (path == "-") {
      f = stdout;
      owned = false;
      return;
    }
    f = std::fopen(path.c_str(), "w");
    if (!f) throw CliError(kExitIo, "cannot open for writing: " + path);
  }
  ~OutFile() {
    if (owned && f) std::fclose(f);
  }
  OutFile(const OutFile&) = delete;
  OutFile& operator=(const OutFile&) = delete;
  std::FILE* f = nullptr;
  bool owned = true;
};

struct EnvelopeBundle {
  PvaluesPtr pvals;
  EnvelopePtr plain;
  EnvelopePtr improved;
  double c_used = 0.0;
};

EnvelopeBundle build_envelopes(const std::string& input, const std::string& column, double c, double t_min,
                               double t_max) {
  EnvelopeBundle out{load_pvalues(input, column), {nullptr, &mfdp_envelope_free}, {nullptr, &mfdp_envelope_free}, 0.0};
  out.c_used = c < 0.0 ? 1.0 / (2.0 * static_cast<double>(mfdp_pvalues_size(out.pvals.get()))) : c;
  mfdp_envelope* plain = nullptr;
  check(mfdp_envelope_build(out.pvals.get(), out.c_used, t_min, t_max, &plain));
  out.plain.reset(plain);
  mfdp_envelope* improved = nullptr;
  check(mfdp_envelope_improve(out.pvals.get(), out.plain.get(), &improved));
  out.improved.reset(improved);
  return out;
}

void write_envelope_csv(const EnvelopeBundle& b, double t_min, double t_max, std::int64_t max_rows,
                        OutFile& out) {
  mfdp_curve_table* traw = nullptr;
  check(mfdp_curve_table_build(b.pvals.get(), b.c_used, t_min, t_max, max_rows, &traw));
  TablePtr table(traw, &mfdp_curve_table_free);
  std::fprintf(out.f, "t,rejections,plain_bound,improved_bound,fdp_bound\n");
  for (std::int64_t i = 0; i < mfdp_curve_table_rows(table.get()); ++i) {
    double t = 0.0, fdp = 0.0;
    std::int64_t r = 0, plain = 0, improved = 0;
    check(mfdp_curve_table_row(table.get(), i, &t, &r, &plain, &improved, &fdp));
    std::fprintf(out.f, "%s,%" PRId64 ",%" PRId64 ",%" PRId64 ",%s\n", fmt(t).c_str(), r, plain, improved,
                 fmt(fdp).c_str());
  }
}

nlohmann::json envelope_json(const EnvelopeBundle& b, double t_min, double t_max, std::int64_t max_rows) {
  mfdp_curve_table* traw = nullptr;
  check(mfdp_curve_table_build(b.pvals.get(), b.c_used, t_min, t_max, max_rows, &traw));
  TablePtr table(traw, &mfdp_curve_table_free);
  auto rows = nlohmann::json::array();
  for (std::int64_t i = 0; i < mfdp_curve_table_rows(table.get()); ++i) {
    double t = 0.0, fdp = 0.0;
    std::int64_t r = 0, plain = 0, improved = 0;
    check(mfdp_curve_table_row(table.get(), i, &t, &r, &plain, &improved, &fdp));
    rows.push_back({{"t", t},
                    {"rejections", r},
                    {"plain_bound", plain},
                    {"improved_bound", improved},
                    {"fdp_bound", fdp}});
  }
  return rows;
}

int run_analyze(const std::string& input, const std::string& column, std::vector<double> gammas, double c,
                double t_min, double t_max, const std::string& out_dir, std::int64_t max_rows,
                bool as_json) {
  if (gammas.empty()) gammas.push_back(0.05);
  auto b = build_envelopes(input, column, c, t_min, t_max);
  const std::int64_t m = mfdp_pvalues_size(b.pvals.get());

  std::vector<double> values(static_cast<std::size_t>(m));
  {
    // recover input order from the sorted view and the permutation
    std::vector<double> sorted(static_cast<std::size_t>(m));
    std::vector<std::int64_t> order(static_cast<std::size_t>(m));
    check(mfdp_pvalues_sorted(b.pvals.get(), sorted.data()));
    check(mfdp_pvalues_order(b.pvals.get(), order.data()));
    for (std::int64_t k = 0; k < m; ++k) values[static_cast<std::size_t>(order[k])] = sorted[static_cast<std::size_t>(k)];
  }

  std::vector<double> adjusted(static_cast<std::size_t>(m));
  check(mfdp_adjusted_pvalues(b.pvals.get(), b.improved.get(), adjusted.data()));

  struct GammaRow {
    double gamma, t_max, fdp_bound;
    std::int64_t rejections;
    std::vector<std::int64_t> rejected;
  };
  std::vector<GammaRow> rows;
  for (double gamma : gammas) {
    mfdp_report* rraw = nullptr;
    check(mfdp_reject_at(b.pvals.get(), b.improved.get(), gamma, &rraw));
    ReportPtr rep(rraw, &mfdp_report_free);
    GammaRow row{};
    check(mfdp_report_info(rep.get(), &row.gamma, &row.t_max, &row.rejections, &row.fdp_bound));
    row.rejected.resize(static_cast<std::size_t>(row.rejections));
    if (row.rejections > 0) check(mfdp_report_rejected(rep.get(), row.rejected.data()));
    rows.push_back(std::move(row));
  }

  if (as_json) {
    double kappa = 0.0, c_used = 0.0, lo = 0.0, hi = 0.0;
    int improved_flag = 0, fallback = 0;
    check(mfdp_envelope_info(b.plain.get(), &kappa, &c_used, &lo, &hi, &improved_flag, &fallback));
    nlohmann::json doc;
    doc["m"] = m;
    doc["kappa"] = json_number(kappa);
    doc["c"] = c_used;
    doc["window"] = {lo, hi};
    doc["zero_kappa_fallback"] = fallback != 0;
    auto adj = nlohmann::json::array();
    for (std::int64_t i = 0; i < m; ++i)
      adj.push_back({{"index", i + 1},
                     {"p_value", values[static_cast<std::size_t>(i)]},
                     {"adjusted", json_number(adjusted[static_cast<std::size_t>(i)])}});
    doc["adjusted_p_values"] = std::move(adj);
    auto reports = nlohmann::json::array();
    for (const auto& row : rows)
      reports.push_back({{"gamma", row.gamma},
                         {"t_max", row.t_max},
                         {"rejections", row.rejections},
                         {"fdp_bound", row.fdp_bound},
                         {"rejected", row.rejected}});
    doc["rejections"] = std::move(reports);
    doc["envelope"] = envelope_json(b, t_min, t_max, max_rows);
    std::printf("%s\n", doc.dump(2).c_str());
    return kExitOk;
  }

  {
    OutFile f(out_dir + "/adjusted_pvalues.csv");
    std::fprintf(f.f, "index,p_value,adjusted\n");
    for (std::int64_t i = 0; i < m; ++i)
      std::fprintf(f.f, "%" PRId64 ",%s,%s\n", i + 1, fmt(values[static_cast<std::size_t>(i)]).c_str(),
                   fmt(adjusted[static_cast<std::size_t>(i)]).c_str());
  }
  {
    OutFile f(out_dir + "/rejections.csv");
    std::fprintf(f.f, "gamma,t_max,rejections,fdp_bound\n");
    for (const auto& row : rows)
      std::fprintf(f.f, "%s,%s,%" PRId64 ",%s\n", fmt(row.gamma).c_str(), fmt(row.t_max).c_str(),
                   row.rejections, fmt(row.fdp_bound).c_str());
  }
  {
    OutFile f(out_dir + "/envelope.csv");
    write_envelope_csv(b, t_min, t_max, max_rows, f);
  }
  std::fprintf(stderr, "wrote adjusted_pvalues.csv, rejections.csv, envelope.csv to %s\n", out_dir.c_str());
  return kExitOk;
}

int run_estimate(const std::string& input, const std::string& column, double lambda, double t) {
  auto p = load_pvalues(input, column);
  std::printf("method,tuning,raw,clamped\n");
  if (lambda >= 0.0) {
    double raw = 0.0, clamped = 0.0;
    check(mfdp_storey_pi0(p.get(), lambda, &raw, &clamped));
    std::printf("tail_ratio,%s,%s,%s\n", fmt(lambda).c_str(), fmt(raw).c_str(), fmt(clamped).c_str());
  }
  if (t >= 0.0) {
    double raw = 0.0, clamped = 0.0;
    check(mfdp_median_unbiased_pi0(p.get(), t, &raw, &clamped));
    std::printf("two_tail,%s,%s,%s\n", fmt(t).c_str(), fmt(raw).c_str(), fmt(clamped).c_str());
  }
  return kExitOk;
}

int run_envelope(const std::string& input, const std::string& column, double c, double t_min, double t_max,
                 std::int64_t max_rows, const std::string& out_path) {
  auto b = build_envelopes(input, column, c, t_min, t_max);
  OutFile f(out_path);
  write_envelope_csv(b, t_min, t_max, max_rows, f);
  return kExitOk;
}

int run_simulate(const std::string& scenario, double pi0, double delta, std::int64_t m, std::int64_t reps,
                 std::uint64_t seed, std::vector<double> gammas, double alpha, bool improved, int threads) {
  mfdp_scenario s;
  mfdp_scenario_init(&s);
  s.m = m;
  s.pi0 = pi0;
  s.delta = delta;
  s.reps = reps;
  s.seed = seed;
  s.bh_alpha = alpha;
  s.use_improved_envelope = improved ? 1 : 0;
  s.threads = threads;

  if (scenario == "in") {
    s.dependence = MFDP_DEP_INDEPENDENT;
  } else if (scenario.rfind("ho:", 0) == 0) {
    s.dependence = MFDP_DEP_EQUICORRELATED;
    s.rho = std::stod(scenario.substr(3));
  } else if (scenario.rfind("bl:", 0) == 0) {
    s.dependence = MFDP_DEP_BLOCK;
    s.rho = std::stod(scenario.substr(3));
    s.n_blocks = 5;
  } else if (scenario == "ne") {
    s.dependence = MFDP_DEP_TWO_LEVEL_BLOCK;
    s.n_blocks = 50;
    s.rho_within = 0.5;
    s.rho_between = -0.01;
    s.sidedness = MFDP_RIGHT_SIDED;
  } else {
    throw CliError(kExitUsage, "unknown scenario '" + scenario + "' (expected in, ho:RHO, bl:RHO or ne)");
  }

  if (gammas.empty()) gammas = {0.01, 0.05, 0.1};
  s.gamma_grid = gammas.data();
  s.n_gamma = static_cast<std::int64_t>(gammas.size());

  double error_rate = 0.0, error_se = 0.0;
  check(mfdp_simulate_error_rate(&s, &error_rate, &error_se));

  std::string header = "scenario,m,pi0,delta,reps,error_rate,error_se";
  std::string row = scenario + "," + std::to_string(m) + "," + fmt(pi0) + "," + fmt(delta) + "," +
                    std::to_string(reps) + "," + fmt(error_rate) + "," + fmt(error_se);
  if (pi0 < 1.0) {
    std::vector<double> power(gammas.size()), power_se(gammas.size());
    double bh_power = 0.0, bh_power_se = 0.0;
    check(mfdp_simulate_power(&s, power.data(), power_se.data(), &bh_power, &bh_power_se));
    for (std::size_t i = 0; i < gammas.size(); ++i) {
      header += ",power_gamma_" + fmt(gammas[i]) + ",power_se_" + fmt(gammas[i]);
      row += "," + fmt(power[i]) + "," + fmt(power_se[i]);
    }
    header += ",bh_power,bh_power_se";
    row += "," + fmt(bh_power) + "," + fmt(bh_power_se);
  }
  std::printf("%s\n%s\n", header.c_str(), row.c_str());
  return kExitOk;
}

int run_verify(std::int64_t instances, std::uint64_t seed, std::int64_t m_min, std::int64_t m_max) {
  std::int64_t points = 0, mismatches = 0;
  check(mfdp_verify_envelope_equivalence(instances, seed, m_min, m_max, &points, &mismatches));
  std::printf("instances=%" PRId64 " points_checked=%" PRId64 " mismatches=%" PRId64 "\n", instances, points,
              mismatches);
  if (mismatches != 0) {
    std::fprintf(stderr, "equivalence check FAILED\n");
    return kExitFailure;
  }
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Simultaneous median-FDP envelopes, adjusted p-values and Monte Carlo checks"};
  app.require_subcommand(1);
  app.set_version_flag("--version", []() { return std::string(mfdp_version()); });

  std::string input, column, out_dir = ".", out_path = "-";
  std::vector<double> gammas;
  double c = -1.0, t_min = 0.0, t_max = 0.1;
  std::int64_t max_rows = 100000;
  bool as_json = false;

  auto* analyze = app.add_subcommand("analyze", "Full pipeline: envelope, adjusted p-values, rejections");
  analyze->add_option("--input", input, "CSV/TSV file of p-values")->required();
  analyze->add_option("--column", column, "column name or 1-based index");
  analyze->add_option("--gamma", gammas, "FDP level(s); default 0.05");
  analyze->add_option("--c", c, "envelope intercept shift; default 1/(2m)");
  analyze->add_option("--t-min", t_min, "window start (default 0)");
  analyze->add_option("--t-max", t_max, "window end (default 0.1)");
  analyze->add_option("--out", out_dir, "output directory (default .)");
  analyze->add_option("--max-rows", max_rows, "envelope table row cap");
  analyze->add_flag("--json", as_json, "print everything as JSON to stdout instead of CSV files");

  double lambda = -1.0, est_t = -1.0;
  auto* estimate = app.add_subcommand("estimate", "Null-fraction point estimates");
  estimate->add_option("--input", input, "CSV/TSV file of p-values")->required();
  estimate->add_option("--column", column, "column name or 1-based index");
  auto* opt_lambda = estimate->add_option("--lambda", lambda, "tail-ratio tuning in (0,1)");
  auto* opt_t = estimate->add_option("--t", est_t, "two-tail tuning in (0,1)");
  opt_lambda->excludes(opt_t);

  auto* envelope = app.add_subcommand("envelope", "Envelope table only");
  envelope->add_option("--input", input, "CSV/TSV file of p-values")->required();
  envelope->add_option("--column", column, "column name or 1-based index");
  envelope->add_option("--c", c, "envelope intercept shift; default 1/(2m)");
  envelope->add_option("--t-min", t_min, "window start (default 0)");
  envelope->add_option("--t-max", t_max, "window end (default 0.1)");
  envelope->add_option("--max-rows", max_rows, "envelope table row cap");
  envelope->add_option("--out", out_path, "output file (default - for stdout)");

  std::string scenario = "in";
  double pi0 = 1.0, delta = 0.0, alpha = 0.05;
  std::int64_t m = 1000, reps = 1000;
  std::uint64_t seed = 1;
  bool improved = false;
  int threads = 0;
  auto* simulate = app.add_subcommand("simulate", "Monte Carlo error and power estimates");
  simulate->add_option("--scenario", scenario, "in, ho:RHO, bl:RHO or ne")->required();
  simulate->add_option("--pi0", pi0, "true-null fraction (default 1)");
  simulate->add_option("--delta", delta, "mean shift of false-hypothesis statistics");
  simulate->add_option("--m", m, "number of hypotheses (default 1000)");
  simulate->add_option("--reps", reps, "replicates (default 1000)");
  simulate->add_option("--seed", seed, "RNG seed (default 1)");
  simulate->add_option("--gamma", gammas, "FDP levels; default 0.01 0.05 0.1");
  simulate->add_option("--alpha", alpha, "step-up baseline level (default 0.05)");
  simulate->add_flag("--improved", improved, "use the tightened envelope for power");
  simulate->add_option("--threads", threads, "worker threads (default: hardware)");

  std::int64_t instances = 200, m_min = 5, m_max = 10;
  auto* verify = app.add_subcommand("verify-equivalence", "Randomized closed-testing equivalence check");
  verify->add_option("--instances", instances, "random instances (default 200)");
  verify->add_option("--seed", seed, "RNG seed (default 1)");
  verify->add_option("--m-min", m_min, "smallest instance size (default 5)");
  verify->add_option("--m-max", m_max, "largest instance size (default 10)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForVersion& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitUsage;
  }

  try {
    if (analyze->parsed())
      return run_analyze(input, column, gammas, c, t_min, t_max, out_dir, max_rows, as_json);
    if (estimate->parsed()) {
      if (lambda < 0.0 && est_t < 0.0) throw CliError(kExitUsage, "pass --lambda or --t");
      return run_estimate(input, column, lambda, est_t);
    }
    if (envelope->parsed()) return run_envelope(input, column, c, t_min, t_max, max_rows, out_path);
    if (simulate->parsed())
      return run_simulate(scenario, pi0, delta, m, reps, seed, gammas, alpha, improved, threads);
    if (verify->parsed()) return run_verify(instances, seed, m_min, m_max);
  } catch (const CliError& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return e.exit_code;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return kExitFailure;
  }
  return kExitUsage;
}
