#include "mfdp/mfdp.h"

#include <algorithm>
#include <initializer_list>
#include <new>
#include <string>
#include <vector>

#include "closed_testing.hpp"
#include "control.hpp"
#include "csv.hpp"
#include "envelope.hpp"
#include "errors.hpp"
#include "point_estimators.hpp"
#include "pvalues.hpp"
#include "simulation.hpp"

struct mfdp_pvalues {
  mfdp::PValueSet set;
};

struct mfdp_envelope {
  mfdp::EnvelopeCurve curve;
};

struct mfdp_curve_table {
  mfdp::CurveTable table;
};

struct mfdp_report {
  mfdp::MfdpReport rep;
};

namespace {

thread_local std::string g_last_error;

mfdp_status fail(mfdp_status code, const char* msg) {
  g_last_error = msg;
  return code;
}

mfdp_status fail(mfdp_status code, const std::exception& e) { return fail(code, e.what()); }

// every entry point funnels through this so the status mapping stays in one place
template <typename Fn>
mfdp_status guarded(Fn&& fn) {
  try {
    g_last_error.clear();
    fn();
    return MFDP_OK;
  } catch (const mfdp::ParameterError& e) {
    return fail(MFDP_ERR_INVALID_ARGUMENT, e);
  } catch (const mfdp::DomainError& e) {
    return fail(MFDP_ERR_DOMAIN, e);
  } catch (const mfdp::RangeError& e) {
    return fail(MFDP_ERR_RANGE, e);
  } catch (const mfdp::CapacityError& e) {
    return fail(MFDP_ERR_CAPACITY, e);
  } catch (const mfdp::IoError& e) {
    return fail(MFDP_ERR_IO, e);
  } catch (const mfdp::ParseError& e) {
    return fail(MFDP_ERR_PARSE, e);
  } catch (const std::bad_alloc& e) {
    return fail(MFDP_ERR_NOMEM, e);
  } catch (const std::exception& e) {
    return fail(MFDP_ERR_INTERNAL, e);
  } catch (...) {
    return fail(MFDP_ERR_INTERNAL, "unknown error");
  }
}

bool all_nonnull(std::initializer_list<const void*> ptrs) {
  for (const void* q : ptrs)
    if (!q) return false;
  return true;
}

mfdp_status check_ptrs(std::initializer_list<const void*> ptrs) {
  if (!all_nonnull(ptrs)) return fail(MFDP_ERR_INVALID_ARGUMENT, "null pointer argument");
  return MFDP_OK;
}

const mfdp::PsiWeight& psi_from(mfdp_psi psi) {
  static const mfdp::PsiWeight one = mfdp::PsiWeight::one();
  static const mfdp::PsiWeight linear = mfdp::PsiWeight::linear();
  static const mfdp::PsiWeight quadratic = mfdp::PsiWeight::quadratic();
  switch (psi) {
    case MFDP_PSI_ONE: return one;
    case MFDP_PSI_LINEAR: return linear;
    case MFDP_PSI_QUADRATIC: return quadratic;
    default: throw mfdp::ParameterError("unknown psi preset");
  }
}

mfdp::Scenario scenario_from(const mfdp_scenario& s) {
  mfdp::Scenario out;
  out.m = s.m;
  out.pi0 = s.pi0;
  out.delta = s.delta;
  switch (s.dependence) {
    case MFDP_DEP_INDEPENDENT: out.dependence = mfdp::Dependence::independent; break;
    case MFDP_DEP_EQUICORRELATED: out.dependence = mfdp::Dependence::equicorrelated; break;
    case MFDP_DEP_BLOCK: out.dependence = mfdp::Dependence::block; break;
    case MFDP_DEP_TWO_LEVEL_BLOCK: out.dependence = mfdp::Dependence::two_level_block; break;
    default: throw mfdp::ParameterError("unknown dependence kind");
  }
  out.rho = s.rho;
  out.n_blocks = s.n_blocks;
  out.rho_within = s.rho_within;
  out.rho_between = s.rho_between;
  switch (s.sidedness) {
    case MFDP_TWO_SIDED: out.sidedness = mfdp::Sidedness::two_sided; break;
    case MFDP_RIGHT_SIDED: out.sidedness = mfdp::Sidedness::right_sided; break;
    default: throw mfdp::ParameterError("unknown sidedness");
  }
  out.reps = s.reps;
  out.seed = s.seed;
  out.window = mfdp::ThresholdWindow(s.window_lo, s.window_hi);
  out.c = s.c;
  if (s.gamma_grid) {
    if (s.n_gamma < 1) throw mfdp::ParameterError("n_gamma must be >= 1 when gamma_grid is set");
    out.gamma_grid.assign(s.gamma_grid, s.gamma_grid + s.n_gamma);
  }
  out.bh_alpha = s.bh_alpha;
  out.use_improved_envelope = s.use_improved_envelope != 0;
  out.use_dense_sampler = s.use_dense_sampler != 0;
  out.threads = s.threads;
  return out;
}

}  // namespace

extern "C" {

const char* mfdp_last_error(void) { return g_last_error.c_str(); }

const char* mfdp_version(void) { return "0.1.0"; }

mfdp_status mfdp_pvalues_create(const double* values, int64_t n, mfdp_pvalues** out) {
  if (auto st = check_ptrs({values, out})) return st;
  return guarded([&] {
    if (n < 0) throw mfdp::ParameterError("negative length");
    *out = new mfdp_pvalues{mfdp::PValueSet(std::vector<double>(values, values + n))};
  });
}

mfdp_status mfdp_pvalues_read_csv(const char* path, const char* column, mfdp_pvalues** out) {
  if (auto st = check_ptrs({path, out})) return st;
  return guarded([&] {
    const auto values = mfdp::read_numeric_column(path, column ? column : "");
    *out = new mfdp_pvalues{mfdp::PValueSet(values)};
  });
}

void mfdp_pvalues_free(mfdp_pvalues* p) { delete p; }

int64_t mfdp_pvalues_size(const mfdp_pvalues* p) { return p ? p->set.size() : 0; }

mfdp_status mfdp_pvalues_sorted(const mfdp_pvalues* p, double* out) {
  if (auto st = check_ptrs({p, out})) return st;
  return guarded([&] {
    const auto& s = p->set.sorted();
    std::copy(s.begin(), s.end(), out);
  });
}

mfdp_status mfdp_pvalues_order(const mfdp_pvalues* p, int64_t* out) {
  if (auto st = check_ptrs({p, out})) return st;
  return guarded([&] {
    for (std::int64_t k = 0; k < p->set.size(); ++k) out[k] = p->set.original_index(k);
  });
}

mfdp_status mfdp_count_rejections(const mfdp_pvalues* p, double t, int64_t* out) {
  if (auto st = check_ptrs({p, out})) return st;
  return guarded([&] { *out = p->set.count_rejections(t); });
}

mfdp_status mfdp_count_upper_tail(const mfdp_pvalues* p, double t, int64_t* out) {
  if (auto st = check_ptrs({p, out})) return st;
  return guarded([&] { *out = p->set.count_upper_tail(t); });
}

mfdp_status mfdp_storey_pi0(const mfdp_pvalues* p, double lambda, double* raw, double* clamped) {
  if (auto st = check_ptrs({p, raw, clamped})) return st;
  return guarded([&] {
    const auto e = mfdp::storey_pi0(p->set, lambda);
    *raw = e.raw;
    *clamped = e.clamped;
  });
}

mfdp_status mfdp_median_unbiased_pi0(const mfdp_pvalues* p, double t, double* raw, double* clamped) {
  if (auto st = check_ptrs({p, raw, clamped})) return st;
  return guarded([&] {
    const auto e = mfdp::median_unbiased_pi0(p->set, t);
    *raw = e.raw;
    *clamped = e.clamped;
  });
}

mfdp_status mfdp_threshold_report_at(const mfdp_pvalues* p, double t, mfdp_threshold_report* out) {
  if (auto st = check_ptrs({p, out})) return st;
  return guarded([&] {
    const auto r = mfdp::fixed_threshold_report(p->set, t);
    *out = {r.t, r.rejections, r.false_rejection_bound, r.fdp_bound, r.true_rejection_lower, r.tdp_lower};
  });
}

mfdp_status mfdp_kappa_max(const mfdp_pvalues* p, double c, double t_min, double t_max, double* kappa,
                           int* fallback) {
  if (auto st = check_ptrs({p, kappa, fallback})) return st;
  return guarded([&] {
    const auto r = mfdp::kappa_max(p->set, {c, mfdp::ThresholdWindow(t_min, t_max)});
    *kappa = r.kappa;
    *fallback = r.zero_kappa_fallback ? 1 : 0;
  });
}

mfdp_status mfdp_candidate_bound(double kappa, double c, double t, int64_t* out) {
  if (auto st = check_ptrs({out})) return st;
  return guarded([&] { *out = mfdp::candidate_bound(kappa, c, t); });
}

mfdp_status mfdp_envelope_build(const mfdp_pvalues* p, double c, double t_min, double t_max,
                                mfdp_envelope** out) {
  if (auto st = check_ptrs({p, out})) return st;
  return guarded([&] {
    *out = new mfdp_envelope{mfdp::build_envelope(p->set, {c, mfdp::ThresholdWindow(t_min, t_max)})};
  });
}

mfdp_status mfdp_envelope_improve(const mfdp_pvalues* p, const mfdp_envelope* env, mfdp_envelope** out) {
  if (auto st = check_ptrs({p, env, out})) return st;
  return guarded([&] { *out = new mfdp_envelope{mfdp::improve_envelope(p->set, env->curve)}; });
}

void mfdp_envelope_free(mfdp_envelope* env) { delete env; }

mfdp_status mfdp_envelope_value_at(const mfdp_envelope* env, double t, int64_t* out) {
  if (auto st = check_ptrs({env, out})) return st;
  return guarded([&] { *out = env->curve.value_at(t); });
}

mfdp_status mfdp_envelope_fdp_at(const mfdp_pvalues* p, const mfdp_envelope* env, double t, double* out) {
  if (auto st = check_ptrs({p, env, out})) return st;
  return guarded([&] { *out = mfdp::fdp_envelope_at(p->set, env->curve, t); });
}

mfdp_status mfdp_envelope_info(const mfdp_envelope* env, double* kappa, double* c, double* t_min,
                               double* t_max, int* improved, int* fallback) {
  if (auto st = check_ptrs({env, kappa, c, t_min, t_max, improved, fallback})) return st;
  return guarded([&] {
    *kappa = env->curve.kappa();
    *c = env->curve.c();
    *t_min = env->curve.window().lo;
    *t_max = env->curve.window().hi;
    *improved = env->curve.improved() ? 1 : 0;
    *fallback = env->curve.zero_kappa_fallback() ? 1 : 0;
  });
}

mfdp_status mfdp_curve_table_build(const mfdp_pvalues* p, double c, double t_min, double t_max,
                                   int64_t max_rows, mfdp_curve_table** out) {
  if (auto st = check_ptrs({p, out})) return st;
  return guarded([&] {
    if (max_rows < 1) throw mfdp::ParameterError("max_rows must be >= 1");
    *out = new mfdp_curve_table{mfdp::curve_table(p->set, {c, mfdp::ThresholdWindow(t_min, t_max)},
                                                  static_cast<std::size_t>(max_rows))};
  });
}

int64_t mfdp_curve_table_rows(const mfdp_curve_table* table) {
  return table ? static_cast<int64_t>(table->table.t.size()) : 0;
}

mfdp_status mfdp_curve_table_row(const mfdp_curve_table* table, int64_t i, double* t, int64_t* rejections,
                                 int64_t* plain, int64_t* improved, double* fdp_bound) {
  if (auto st = check_ptrs({table, t, rejections, plain, improved, fdp_bound})) return st;
  return guarded([&] {
    if (i < 0 || i >= static_cast<int64_t>(table->table.t.size()))
      throw mfdp::RangeError("row index out of range");
    const auto k = static_cast<std::size_t>(i);
    *t = table->table.t[k];
    *rejections = table->table.rejections[k];
    *plain = table->table.plain[k];
    *improved = table->table.improved[k];
    *fdp_bound = table->table.fdp_bound[k];
  });
}

void mfdp_curve_table_free(mfdp_curve_table* table) { delete table; }

mfdp_status mfdp_t_max(const mfdp_pvalues* p, const mfdp_envelope* env, double gamma, double* out) {
  if (auto st = check_ptrs({p, env, out})) return st;
  return guarded([&] { *out = mfdp::t_max(p->set, env->curve, gamma); });
}

mfdp_status mfdp_adjusted_pvalues(const mfdp_pvalues* p, const mfdp_envelope* env, double* out) {
  if (auto st = check_ptrs({p, env, out})) return st;
  return guarded([&] {
    const auto ad = mfdp::adjusted_pvalues(p->set, env->curve);
    std::copy(ad.begin(), ad.end(), out);
  });
}

mfdp_status mfdp_reject_at(const mfdp_pvalues* p, const mfdp_envelope* env, double gamma,
                           mfdp_report** out) {
  if (auto st = check_ptrs({p, env, out})) return st;
  return guarded([&] { *out = new mfdp_report{mfdp::reject_at(p->set, env->curve, gamma)}; });
}

mfdp_status mfdp_report_info(const mfdp_report* r, double* gamma, double* t_max, int64_t* rejections,
                             double* fdp_bound) {
  if (auto st = check_ptrs({r, gamma, t_max, rejections, fdp_bound})) return st;
  return guarded([&] {
    *gamma = r->rep.gamma;
    *t_max = r->rep.t_max;
    *rejections = r->rep.rejections;
    *fdp_bound = r->rep.fdp_bound;
  });
}

mfdp_status mfdp_report_rejected(const mfdp_report* r, int64_t* out) {
  if (auto st = check_ptrs({r, out})) return st;
  return guarded([&] { std::copy(r->rep.rejected.begin(), r->rep.rejected.end(), out); });
}

mfdp_status mfdp_report_adjusted(const mfdp_report* r, double* out) {
  if (auto st = check_ptrs({r, out})) return st;
  return guarded([&] { std::copy(r->rep.adjusted.begin(), r->rep.adjusted.end(), out); });
}

void mfdp_report_free(mfdp_report* r) { delete r; }

mfdp_status mfdp_bh_rejections(const mfdp_pvalues* p, double alpha, int64_t* out) {
  if (auto st = check_ptrs({p, out})) return st;
  return guarded([&] { *out = mfdp::bh_rejections(p->set, alpha); });
}

mfdp_status mfdp_local_test(const mfdp_pvalues* p, const int64_t* subset, int64_t n_subset, double t,
                            mfdp_psi psi, double* w_minus, double* w_plus, int* reject) {
  if (auto st = check_ptrs({p, w_minus, w_plus, reject})) return st;
  if (n_subset > 0 && !subset) return fail(MFDP_ERR_INVALID_ARGUMENT, "null pointer argument");
  return guarded([&] {
    std::vector<std::int64_t> idx;
    if (n_subset > 0) idx.assign(subset, subset + n_subset);
    const auto s = mfdp::local_test(p->set, idx, t, psi_from(psi));
    *w_minus = s.w_minus;
    *w_plus = s.w_plus;
    *reject = s.reject ? 1 : 0;
  });
}

mfdp_status mfdp_generalized_n_bound(const mfdp_pvalues* p, double t, mfdp_psi psi, int64_t* out) {
  if (auto st = check_ptrs({p, out})) return st;
  return guarded([&] { *out = mfdp::generalized_n_bound(p->set, t, psi_from(psi)); });
}

mfdp_status mfdp_generalized_v_bound(const mfdp_pvalues* p, double t, mfdp_psi psi, int64_t* out) {
  if (auto st = check_ptrs({p, out})) return st;
  return guarded([&] { *out = mfdp::generalized_v_bound(p->set, t, psi_from(psi)); });
}

mfdp_status mfdp_brute_force_closed_bound(const mfdp_pvalues* p, const int64_t* subset, int64_t n_subset,
                                          const mfdp_envelope* env, int64_t* out) {
  if (auto st = check_ptrs({p, env, out})) return st;
  if (n_subset > 0 && !subset) return fail(MFDP_ERR_INVALID_ARGUMENT, "null pointer argument");
  return guarded([&] {
    std::vector<std::int64_t> idx;
    if (n_subset > 0) idx.assign(subset, subset + n_subset);
    *out = mfdp::brute_force_closed_bound(p->set, idx, env->curve);
  });
}

mfdp_status mfdp_verify_envelope_equivalence(int64_t instances, uint64_t seed, int64_t m_min, int64_t m_max,
                                             int64_t* points_checked, int64_t* mismatches) {
  if (auto st = check_ptrs({points_checked, mismatches})) return st;
  return guarded([&] {
    const auto rep = mfdp::verify_envelope_equivalence(instances, seed, m_min, m_max);
    *points_checked = rep.points_checked;
    *mismatches = rep.mismatches;
  });
}

void mfdp_scenario_init(mfdp_scenario* s) {
  if (!s) return;
  *s = mfdp_scenario{};
  s->m = 1000;
  s->pi0 = 1.0;
  s->delta = 0.0;
  s->dependence = MFDP_DEP_INDEPENDENT;
  s->rho = 0.0;
  s->n_blocks = 5;
  s->rho_within = 0.0;
  s->rho_between = 0.0;
  s->sidedness = MFDP_TWO_SIDED;
  s->reps = 1000;
  s->seed = 1;
  s->window_lo = 0.0;
  s->window_hi = 0.1;
  s->c = -1.0;
  s->gamma_grid = nullptr;
  s->n_gamma = 0;
  s->bh_alpha = 0.05;
  s->use_improved_envelope = 0;
  s->use_dense_sampler = 0;
  s->threads = 0;
}

mfdp_status mfdp_simulate_error_rate(const mfdp_scenario* s, double* error_rate, double* error_se) {
  if (auto st = check_ptrs({s, error_rate, error_se})) return st;
  return guarded([&] {
    const auto res = mfdp::estimate_error_rate(scenario_from(*s));
    *error_rate = res.error_rate;
    *error_se = res.error_se;
  });
}

mfdp_status mfdp_simulate_power(const mfdp_scenario* s, double* power, double* power_se, double* bh_power,
                                double* bh_power_se) {
  if (auto st = check_ptrs({s, power, power_se, bh_power, bh_power_se})) return st;
  return guarded([&] {
    const auto res = mfdp::estimate_power(scenario_from(*s));
    std::copy(res.power.begin(), res.power.end(), power);
    std::copy(res.power_se.begin(), res.power_se.end(), power_se);
    *bh_power = res.bh_power;
    *bh_power_se = res.bh_power_se;
  });
}

}  // extern "C"
