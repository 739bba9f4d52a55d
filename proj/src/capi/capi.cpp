#include "welfare_lcb.h"

#include <cstring>
#include <new>
#include <stdexcept>
#include <string>
#include <vector>

#include "core/first_stage.hpp"
#include "core/policy.hpp"
#include "core/sample.hpp"
#include "core/scores.hpp"
#include "dgp/dgp.hpp"
#include "dgp/experiments.hpp"
#include "inference/lcb.hpp"
#include "math/stats.hpp"

using namespace wlcb;

struct wlcb_sample {
    Sample impl;
};
struct wlcb_policies {
    std::vector<Policy> impl;
};
struct wlcb_first_stage {
    FirstStage impl;
};
struct wlcb_panel {
    ScorePanel impl;
};

namespace {

thread_local std::string g_last_error;

void set_error(const char* msg) { g_last_error = msg; }

// Runs fn, translating exceptions into status codes + wlcb_last_error().
template <typename Fn>
wlcb_status guarded(Fn&& fn) {
    try {
        fn();
        return WLCB_OK;
    } catch (const std::invalid_argument& e) {
        set_error(e.what());
        return WLCB_ERR_INVALID_ARGUMENT;
    } catch (const std::runtime_error& e) {
        set_error(e.what());
        return WLCB_ERR_NUMERIC;
    } catch (const std::bad_alloc&) {
        set_error("out of memory");
        return WLCB_ERR_INTERNAL;
    } catch (const std::exception& e) {
        set_error(e.what());
        return WLCB_ERR_INTERNAL;
    }
}

wlcb_status require(bool ok, const char* msg) {
    if (ok) return WLCB_OK;
    set_error(msg);
    return WLCB_ERR_INVALID_ARGUMENT;
}

dgp::DominanceDgp to_dominance(const wlcb_dominance_dgp& c) {
    dgp::DominanceDgp d;
    d.p = c.p;
    d.pi1 = c.pi1;
    d.pi0 = c.pi0;
    d.eps = c.eps;
    d.family = c.family == WLCB_FAMILY_GAUSSIAN ? dgp::OutcomeFamily::Gaussian
                                                : dgp::OutcomeFamily::TwoPoint;
    d.variant = c.variant == WLCB_VARIANT_GAIN ? dgp::DominanceVariant::Gain
                                               : dgp::DominanceVariant::Welfare;
    d.variances = {c.var11, c.var10, c.var01, c.var00};
    return d;
}

dgp::MarginDgp to_margin(const wlcb_margin_dgp& c) {
    dgp::MarginDgp d;
    d.M = c.M;
    d.eps = c.eps;
    d.nu = c.nu;
    return d;
}

LcbConfig to_config(const wlcb_lcb_config& c) {
    LcbConfig cfg;
    cfg.alpha = c.alpha;
    cfg.n_sim = c.n_sim;
    if (!c.kappa_auto) cfg.kappa = c.kappa;
    cfg.seed = c.seed;
    cfg.ridge = c.ridge;
    cfg.multiplier_bootstrap = c.multiplier_bootstrap != 0;
    return cfg;
}

LcbMethod to_method(wlcb_method m) {
    switch (m) {
        case WLCB_LCB_NAIVE: return LcbMethod::Naive;
        case WLCB_LCB_MAX_LF: return LcbMethod::MaxLF;
        case WLCB_LCB_MAX_GMS: return LcbMethod::MaxGMS;
        case WLCB_LCB_QLR_MIX: return LcbMethod::QlrMix;
    }
    throw std::invalid_argument("unknown lcb method");
}

void fill_population(const dgp::PopulationMoments& pm, wlcb_population_moments* out) {
    out->w_gstar = pm.w_gstar;
    out->w_g = pm.w_g;
    out->sigma2_gstar = pm.sigma2_gstar;
    out->sigma2_g = pm.sigma2_g;
    out->delta_gap = pm.delta_gap;
}

wlcb_status coverage_common(const dgp::CoverageReport& rep, const int32_t* methods,
                            int32_t n_methods, wlcb_coverage_report* out) {
    out->n = rep.n;
    out->n_reps = rep.n_reps;
    out->w_gstar = rep.w_gstar;
    for (int i = 0; i < 4; ++i) {
        out->coverage[i] = 0.0;
        out->mean_lcb[i] = 0.0;
        out->se_lcb[i] = 0.0;
        out->methods_run[i] = 0;
    }
    for (int32_t i = 0; i < n_methods; ++i) {
        const auto m = to_method(static_cast<wlcb_method>(methods[i]));
        const int slot = methods[i];
        out->coverage[slot] = rep.coverage.at(m);
        out->mean_lcb[slot] = rep.mean_lcb.at(m);
        out->se_lcb[slot] = rep.se_lcb.at(m);
        out->methods_run[slot] = 1;
    }
    out->gms_ge_lf_every_rep = rep.gms_ge_lf_every_rep ? 1 : 0;
    return WLCB_OK;
}

std::vector<LcbMethod> to_methods(const int32_t* methods, int32_t n_methods) {
    if (methods == nullptr || n_methods < 1) {
        throw std::invalid_argument("at least one method required");
    }
    std::vector<LcbMethod> out;
    for (int32_t i = 0; i < n_methods; ++i) {
        if (methods[i] < 0 || methods[i] > 3) throw std::invalid_argument("unknown lcb method");
        out.push_back(to_method(static_cast<wlcb_method>(methods[i])));
    }
    return out;
}

}  // namespace

extern "C" {

const char* wlcb_last_error(void) { return g_last_error.c_str(); }

const char* wlcb_version(void) { return "0.1.0"; }

wlcb_status wlcb_sample_create(int64_t n, int32_t k, const int32_t* treat, const double* outcome,
                               const double* covariates, const int32_t* column_kinds,
                               wlcb_sample** out) {
    if (auto st = require(out && treat && outcome && covariates && column_kinds,
                          "null argument"); st != WLCB_OK) {
        return st;
    }
    if (auto st = require(n >= 1 && k >= 1, "n and k must be positive"); st != WLCB_OK) return st;
    return guarded([&] {
        Sample s;
        s.treat.resize(n);
        s.outcome.resize(n);
        s.covariates.resize(n, k);
        s.kinds.resize(static_cast<std::size_t>(k));
        for (int64_t i = 0; i < n; ++i) {
            s.treat[i] = treat[i];
            s.outcome[i] = outcome[i];
            for (int32_t j = 0; j < k; ++j) s.covariates(i, j) = covariates[i * k + j];
        }
        for (int32_t j = 0; j < k; ++j) {
            s.kinds[static_cast<std::size_t>(j)] = column_kinds[j] == WLCB_COL_CONTINUOUS
                                                       ? ColumnKind::Continuous
                                                       : ColumnKind::Discrete;
        }
        s.validate();
        *out = new wlcb_sample{std::move(s)};
    });
}

void wlcb_sample_free(wlcb_sample* s) { delete s; }

int64_t wlcb_sample_n(const wlcb_sample* s) { return s ? s->impl.n() : 0; }

int32_t wlcb_sample_k(const wlcb_sample* s) { return s ? s->impl.k() : 0; }

wlcb_status wlcb_sample_covariate(const wlcb_sample* s, int32_t col, double* out) {
    if (auto st = require(s && out, "null argument"); st != WLCB_OK) return st;
    return guarded([&] {
        s->impl.require_column(col);
        for (long i = 0; i < s->impl.n(); ++i) out[i] = s->impl.covariates(i, col);
    });
}

wlcb_status wlcb_sample_bin_covariate(const wlcb_sample* s, int32_t col, int32_t n_bins,
                                      wlcb_sample** out) {
    if (auto st = require(s && out, "null argument"); st != WLCB_OK) return st;
    return guarded([&] { *out = new wlcb_sample{bin_covariate(s->impl, col, n_bins)}; });
}

wlcb_status wlcb_policies_create(wlcb_policies** out) {
    if (auto st = require(out != nullptr, "null argument"); st != WLCB_OK) return st;
    return guarded([&] { *out = new wlcb_policies{}; });
}

void wlcb_policies_free(wlcb_policies* p) { delete p; }

int32_t wlcb_policies_size(const wlcb_policies* p) {
    return p ? static_cast<int32_t>(p->impl.size()) : 0;
}

wlcb_status wlcb_policies_add_treat_all(wlcb_policies* p, const char* label) {
    if (auto st = require(p != nullptr, "null argument"); st != WLCB_OK) return st;
    return guarded([&] { p->impl.push_back(Policy::treat_all(label ? label : "treat-all")); });
}

wlcb_status wlcb_policies_add_treat_none(wlcb_policies* p, const char* label) {
    if (auto st = require(p != nullptr, "null argument"); st != WLCB_OK) return st;
    return guarded([&] { p->impl.push_back(Policy::treat_none(label ? label : "treat-none")); });
}

wlcb_status wlcb_policies_add_cutoff_le(wlcb_policies* p, int32_t col, double cutoff,
                                        const char* label) {
    if (auto st = require(p != nullptr, "null argument"); st != WLCB_OK) return st;
    return guarded([&] {
        p->impl.push_back(Policy::cutoff_le(col, cutoff, label ? label : ""));
    });
}

wlcb_status wlcb_policies_add_cell_set(wlcb_policies* p, int32_t col, const double* cells,
                                       int32_t n_cells, const char* label) {
    if (auto st = require(p && cells && n_cells >= 1, "cells array required"); st != WLCB_OK) {
        return st;
    }
    return guarded([&] {
        p->impl.push_back(Policy::cell_set(col, std::vector<double>(cells, cells + n_cells),
                                           label ? label : ""));
    });
}

wlcb_status wlcb_first_stage_fit(const wlcb_sample* s, int32_t col, int32_t smoothing,
                                 const double* known_pi, wlcb_first_stage** out) {
    if (auto st = require(s && out, "null argument"); st != WLCB_OK) return st;
    return guarded([&] {
        std::optional<double> pi;
        if (known_pi) pi = *known_pi;
        *out = new wlcb_first_stage{fit_first_stage(s->impl, col, smoothing != 0, pi)};
    });
}

void wlcb_first_stage_free(wlcb_first_stage* fs) { delete fs; }

int32_t wlcb_first_stage_clipped(const wlcb_first_stage* fs) {
    return fs && fs->impl.clipped ? 1 : 0;
}

wlcb_status wlcb_panel_build(const wlcb_sample* s, const wlcb_first_stage* fs,
                             const wlcb_policies* policies, wlcb_panel** out) {
    if (auto st = require(s && fs && policies && out, "null argument"); st != WLCB_OK) return st;
    return guarded([&] { *out = new wlcb_panel{dr_scores(s->impl, fs->impl, policies->impl)}; });
}

wlcb_status wlcb_panel_build_crossfit(const wlcb_sample* s, int32_t col, int32_t smoothing,
                                      const double* known_pi, const wlcb_policies* policies,
                                      int32_t crossfit_folds, wlcb_panel** out) {
    if (auto st = require(s && policies && out, "null argument"); st != WLCB_OK) return st;
    return guarded([&] {
        PanelOptions opts;
        opts.smoothing = smoothing != 0;
        if (known_pi) opts.known_pi = *known_pi;
        opts.crossfit_folds = crossfit_folds;
        *out = new wlcb_panel{build_panel(s->impl, col, policies->impl, opts)};
    });
}

void wlcb_panel_free(wlcb_panel* p) { delete p; }

int32_t wlcb_panel_cols(const wlcb_panel* p) { return p ? p->impl.cols() : 0; }

int64_t wlcb_panel_rows(const wlcb_panel* p) { return p ? p->impl.n : 0; }

wlcb_status wlcb_panel_w_hat(const wlcb_panel* p, double* out) {
    if (auto st = require(p && out, "null argument"); st != WLCB_OK) return st;
    for (int j = 0; j < p->impl.cols(); ++j) out[j] = p->impl.w_hat[j];
    return WLCB_OK;
}

wlcb_status wlcb_panel_sigma_hat(const wlcb_panel* p, double* out) {
    if (auto st = require(p && out, "null argument"); st != WLCB_OK) return st;
    for (int j = 0; j < p->impl.cols(); ++j) out[j] = p->impl.sigma_hat[j];
    return WLCB_OK;
}

wlcb_status wlcb_panel_cov(const wlcb_panel* p, double* out) {
    if (auto st = require(p && out, "null argument"); st != WLCB_OK) return st;
    const int J = p->impl.cols();
    for (int a = 0; a < J; ++a) {
        for (int b = 0; b < J; ++b) out[a * J + b] = p->impl.cov_hat(a, b);
    }
    return WLCB_OK;
}

wlcb_status wlcb_panel_gain(const wlcb_panel* p, int32_t baseline, wlcb_panel** out) {
    if (auto st = require(p && out, "null argument"); st != WLCB_OK) return st;
    return guarded([&] { *out = new wlcb_panel{welfare_gain_scores(p->impl, baseline)}; });
}

wlcb_status wlcb_panel_subset(const wlcb_panel* p, const int32_t* columns, int32_t n_columns,
                              wlcb_panel** out) {
    if (auto st = require(p && columns && n_columns >= 1 && out, "column list required");
        st != WLCB_OK) {
        return st;
    }
    return guarded([&] {
        *out = new wlcb_panel{
            p->impl.subset(std::vector<int>(columns, columns + n_columns))};
    });
}

wlcb_status wlcb_welfare_cellwise(const wlcb_sample* s, const wlcb_first_stage* fs,
                                  const wlcb_policies* policies, int32_t index, double* out) {
    if (auto st = require(s && fs && policies && out, "null argument"); st != WLCB_OK) return st;
    if (auto st = require(index >= 0 && index < static_cast<int32_t>(policies->impl.size()),
                          "policy index out of range");
        st != WLCB_OK) {
        return st;
    }
    return guarded([&] {
        *out = estimate_welfare_cellwise(s->impl, fs->impl,
                                         policies->impl[static_cast<std::size_t>(index)]);
    });
}

void wlcb_lcb_config_init(wlcb_lcb_config* cfg) {
    if (!cfg) return;
    cfg->alpha = 0.05;
    cfg->n_sim = 100000;
    cfg->kappa = 0.0;
    cfg->kappa_auto = 1;
    cfg->seed = 0;
    cfg->ridge = 1e-8;
    cfg->multiplier_bootstrap = 0;
}

wlcb_status wlcb_panel_lcb(const wlcb_panel* p, wlcb_method method, const wlcb_lcb_config* cfg,
                           wlcb_lcb_result* out, double* lambda_out, int32_t* selected_out) {
    if (auto st = require(p && cfg && out, "null argument"); st != WLCB_OK) return st;
    return guarded([&] {
        const LcbResult res = compute_lcb(p->impl, to_method(method), to_config(*cfg));
        out->value = res.value;
        out->crit = res.crit;
        out->argmax_policy = res.argmax_policy;
        out->gms_fallback = res.gms_fallback ? 1 : 0;
        out->lambda_degenerate = res.lambda_degenerate ? 1 : 0;
        out->n_selected = static_cast<int32_t>(res.selected.size());
        out->bisection_iterations = res.bisection_iterations;
        if (lambda_out) {
            for (int j = 0; j < p->impl.cols(); ++j) {
                lambda_out[j] = res.lambda.size() == p->impl.cols() ? res.lambda[j] : 0.0;
            }
        }
        if (selected_out) {
            for (std::size_t i = 0; i < res.selected.size(); ++i) {
                selected_out[i] = res.selected[i];
            }
        }
    });
}

wlcb_status wlcb_naive_lcb(double w_hat, double sigma_hat, int64_t n, double alpha, double* out) {
    if (auto st = require(out != nullptr, "null argument"); st != WLCB_OK) return st;
    return guarded([&] { *out = naive_lcb(w_hat, sigma_hat, n, alpha).value; });
}

wlcb_status wlcb_normal_quantile(double p, double* out) {
    if (auto st = require(out != nullptr, "null argument"); st != WLCB_OK) return st;
    return guarded([&] { *out = normal_quantile(p); });
}

void wlcb_dominance_dgp_init(wlcb_dominance_dgp* dgp, int32_t variant) {
    if (!dgp) return;
    dgp->p = 0.5;
    dgp->pi1 = 0.5;
    dgp->pi0 = 0.5;
    dgp->eps = 0.01;
    dgp->family = WLCB_FAMILY_TWO_POINT;
    dgp->variant = variant;
    if (variant == WLCB_VARIANT_GAIN) {
        dgp->var11 = 1.0;
        dgp->var10 = 10.0;
        dgp->var01 = 1.0;
        dgp->var00 = 10.0;
    } else {
        dgp->var11 = 1.0;
        dgp->var10 = 1.0;
        dgp->var01 = 10.0;
        dgp->var00 = 10.0;
    }
}

void wlcb_margin_dgp_init(wlcb_margin_dgp* dgp) {
    if (!dgp) return;
    dgp->M = 5.0;
    dgp->eps = 0.1;
    dgp->nu = 1.0;
}

wlcb_status wlcb_sample_dominance(const wlcb_dominance_dgp* dgp, int64_t n, uint64_t seed,
                                  wlcb_sample** out) {
    if (auto st = require(dgp && out, "null argument"); st != WLCB_OK) return st;
    return guarded([&] { *out = new wlcb_sample{dgp::sample_dominance(to_dominance(*dgp), n, seed)}; });
}

wlcb_status wlcb_sample_margin(const wlcb_margin_dgp* dgp, int64_t n, uint64_t seed,
                               wlcb_sample** out) {
    if (auto st = require(dgp && out, "null argument"); st != WLCB_OK) return st;
    return guarded([&] { *out = new wlcb_sample{dgp::sample_margin(to_margin(*dgp), n, seed)}; });
}

wlcb_status wlcb_closed_form_moments(const wlcb_dominance_dgp* dgp, int64_t n, double alpha,
                                     wlcb_population_moments* out) {
    if (auto st = require(dgp && out, "null argument"); st != WLCB_OK) return st;
    return guarded([&] { fill_population(dgp::closed_form_moments(to_dominance(*dgp), n, alpha), out); });
}

wlcb_status wlcb_margin_moments(const wlcb_margin_dgp* dgp, int64_t n, double alpha,
                                wlcb_population_moments* out) {
    if (auto st = require(dgp && out, "null argument"); st != WLCB_OK) return st;
    return guarded([&] { fill_population(dgp::margin_moments(to_margin(*dgp), n, alpha), out); });
}

wlcb_status wlcb_mse_experiment(const wlcb_dominance_dgp* dgp, int64_t n, int64_t n_reps,
                                uint64_t seed, wlcb_mse_report* out) {
    if (auto st = require(dgp && out, "null argument"); st != WLCB_OK) return st;
    return guarded([&] {
        const dgp::MseReport rep = dgp::mse_experiment(to_dominance(*dgp), n, n_reps, seed);
        out->n = rep.n;
        out->n_reps = rep.n_reps;
        out->w_target = rep.w_target;
        out->mse_suboptimal = rep.mse_suboptimal;
        out->mse_oracle = rep.mse_oracle;
        out->se_suboptimal = rep.se_suboptimal;
        out->se_oracle = rep.se_oracle;
    });
}

wlcb_status wlcb_coverage_experiment_dominance(const wlcb_dominance_dgp* dgp, int64_t n,
                                               const wlcb_policies* policies,
                                               const int32_t* methods, int32_t n_methods,
                                               const wlcb_lcb_config* cfg, int64_t n_reps,
                                               uint64_t seed, wlcb_coverage_report* out) {
    if (auto st = require(dgp && policies && cfg && out, "null argument"); st != WLCB_OK) {
        return st;
    }
    return guarded([&] {
        const auto rep = dgp::coverage_experiment(to_dominance(*dgp), n, policies->impl,
                                                  to_methods(methods, n_methods), to_config(*cfg),
                                                  n_reps, seed);
        coverage_common(rep, methods, n_methods, out);
    });
}

wlcb_status wlcb_coverage_experiment_margin(const wlcb_margin_dgp* dgp, int64_t n, int32_t n_bins,
                                            const wlcb_policies* policies, const int32_t* methods,
                                            int32_t n_methods, const wlcb_lcb_config* cfg,
                                            int64_t n_reps, uint64_t seed,
                                            wlcb_coverage_report* out) {
    if (auto st = require(dgp && policies && cfg && out, "null argument"); st != WLCB_OK) {
        return st;
    }
    return guarded([&] {
        const auto rep = dgp::coverage_experiment(to_margin(*dgp), n, n_bins, policies->impl,
                                                  to_methods(methods, n_methods), to_config(*cfg),
                                                  n_reps, seed);
        coverage_common(rep, methods, n_methods, out);
    });
}

wlcb_status wlcb_margin_diagnostics(const wlcb_sample* s, const wlcb_first_stage* fs,
                                    const wlcb_policies* policies, int32_t gstar_index,
                                    int32_t g_index, double delta_low, double eta, double alpha,
                                    wlcb_margin_diag* out, double* cell_t_out) {
    if (auto st = require(s && fs && policies && out, "null argument"); st != WLCB_OK) return st;
    const auto size = static_cast<int32_t>(policies->impl.size());
    if (auto st = require(gstar_index >= 0 && gstar_index < size && g_index >= 0 && g_index < size,
                          "policy index out of range");
        st != WLCB_OK) {
        return st;
    }
    return guarded([&] {
        const auto diag = dgp::margin_diagnostics(
            s->impl, fs->impl, policies->impl[static_cast<std::size_t>(gstar_index)],
            policies->impl[static_cast<std::size_t>(g_index)], delta_low, eta, alpha);
        out->sym_diff_share = diag.sym_diff_share;
        out->welfare_gap_hat = diag.welfare_gap_hat;
        out->margin_lhs = diag.margin_lhs;
        out->violated = diag.violated ? 1 : 0;
        out->iut_reject = diag.iut_reject ? 1 : 0;
        out->n_cells = static_cast<int32_t>(diag.cell_t.size());
        if (cell_t_out) {
            for (std::size_t i = 0; i < diag.cell_t.size(); ++i) cell_t_out[i] = diag.cell_t[i];
        }
    });
}

}  // extern "C"
