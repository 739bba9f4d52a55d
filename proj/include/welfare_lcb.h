/*
 * welfare_lcb — C API for lower confidence bands on optimal treatment welfare.
 *
 * All functions return wlcb_status; on failure wlcb_last_error() describes the
 * problem (the message is thread-local). Objects returned through out-params
 * are owned by the caller and released with the matching _free function.
 */
#ifndef WELFARE_LCB_H
#define WELFARE_LCB_H

#include <stddef.h>
#include <stdint.h>

#if defined(_WIN32)
#define WLCB_API __declspec(dllexport)
#else
#define WLCB_API __attribute__((visibility("default")))
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum wlcb_status {
    WLCB_OK = 0,
    WLCB_ERR_INVALID_ARGUMENT = 1,
    WLCB_ERR_NUMERIC = 2,
    WLCB_ERR_INTERNAL = 3
} wlcb_status;

WLCB_API const char* wlcb_last_error(void);
WLCB_API const char* wlcb_version(void);

/* ---------- samples ---------- */

typedef struct wlcb_sample wlcb_sample;

enum { WLCB_COL_DISCRETE = 0, WLCB_COL_CONTINUOUS = 1 };

/* covariates are row-major n x k; column_kinds has k entries. */
WLCB_API wlcb_status wlcb_sample_create(int64_t n, int32_t k, const int32_t* treat,
                                        const double* outcome, const double* covariates,
                                        const int32_t* column_kinds, wlcb_sample** out);
WLCB_API void wlcb_sample_free(wlcb_sample* s);
WLCB_API int64_t wlcb_sample_n(const wlcb_sample* s);
WLCB_API int32_t wlcb_sample_k(const wlcb_sample* s);
/* copies the column into out (length n) */
WLCB_API wlcb_status wlcb_sample_covariate(const wlcb_sample* s, int32_t col, double* out);
WLCB_API wlcb_status wlcb_sample_bin_covariate(const wlcb_sample* s, int32_t col, int32_t n_bins,
                                               wlcb_sample** out);

/* ---------- policies ---------- */

typedef struct wlcb_policies wlcb_policies;

WLCB_API wlcb_status wlcb_policies_create(wlcb_policies** out);
WLCB_API void wlcb_policies_free(wlcb_policies* p);
WLCB_API int32_t wlcb_policies_size(const wlcb_policies* p);
WLCB_API wlcb_status wlcb_policies_add_treat_all(wlcb_policies* p, const char* label);
WLCB_API wlcb_status wlcb_policies_add_treat_none(wlcb_policies* p, const char* label);
WLCB_API wlcb_status wlcb_policies_add_cutoff_le(wlcb_policies* p, int32_t col, double cutoff,
                                                 const char* label);
WLCB_API wlcb_status wlcb_policies_add_cell_set(wlcb_policies* p, int32_t col,
                                                const double* cells, int32_t n_cells,
                                                const char* label);

/* ---------- first stage ---------- */

typedef struct wlcb_first_stage wlcb_first_stage;

/* known_pi: NULL to estimate cell propensities, else a constant in (0,1). */
WLCB_API wlcb_status wlcb_first_stage_fit(const wlcb_sample* s, int32_t col, int32_t smoothing,
                                          const double* known_pi, wlcb_first_stage** out);
WLCB_API void wlcb_first_stage_free(wlcb_first_stage* fs);
/* 1 if any propensity was clipped or a degenerate cell was patched */
WLCB_API int32_t wlcb_first_stage_clipped(const wlcb_first_stage* fs);

/* ---------- score panels ---------- */

typedef struct wlcb_panel wlcb_panel;

WLCB_API wlcb_status wlcb_panel_build(const wlcb_sample* s, const wlcb_first_stage* fs,
                                      const wlcb_policies* policies, wlcb_panel** out);
/* crossfit_folds = 0 disables cross-fitting */
WLCB_API wlcb_status wlcb_panel_build_crossfit(const wlcb_sample* s, int32_t col,
                                               int32_t smoothing, const double* known_pi,
                                               const wlcb_policies* policies,
                                               int32_t crossfit_folds, wlcb_panel** out);
WLCB_API void wlcb_panel_free(wlcb_panel* p);
WLCB_API int32_t wlcb_panel_cols(const wlcb_panel* p);
WLCB_API int64_t wlcb_panel_rows(const wlcb_panel* p);
WLCB_API wlcb_status wlcb_panel_w_hat(const wlcb_panel* p, double* out);      /* length J */
WLCB_API wlcb_status wlcb_panel_sigma_hat(const wlcb_panel* p, double* out);  /* length J */
WLCB_API wlcb_status wlcb_panel_cov(const wlcb_panel* p, double* out);        /* row-major J x J */
/* gain panel vs a baseline column; the baseline column is kept (all zeros) */
WLCB_API wlcb_status wlcb_panel_gain(const wlcb_panel* p, int32_t baseline, wlcb_panel** out);
/* panel restricted to columns[0..n_columns) */
WLCB_API wlcb_status wlcb_panel_subset(const wlcb_panel* p, const int32_t* columns,
                                       int32_t n_columns, wlcb_panel** out);

/* cellwise plug-in welfare of one policy (index into the policy list) */
WLCB_API wlcb_status wlcb_welfare_cellwise(const wlcb_sample* s, const wlcb_first_stage* fs,
                                           const wlcb_policies* policies, int32_t index,
                                           double* out);

/* ---------- lower confidence bands ---------- */

typedef enum wlcb_method {
    WLCB_LCB_NAIVE = 0,
    WLCB_LCB_MAX_LF = 1,
    WLCB_LCB_MAX_GMS = 2,
    WLCB_LCB_QLR_MIX = 3
} wlcb_method;

typedef struct wlcb_lcb_config {
    double alpha;        /* significance level in (0,1) */
    int64_t n_sim;       /* critical-value simulation draws */
    double kappa;        /* GMS tuning; ignored unless kappa_auto = 0 */
    int32_t kappa_auto;  /* 1 => kappa = sqrt(log N) */
    uint64_t seed;
    double ridge;        /* QLR covariance regularization scale */
    int32_t multiplier_bootstrap; /* 1 => bootstrap over score rows */
} wlcb_lcb_config;

/* defaults: alpha 0.05, n_sim 100000, kappa auto, seed 0, ridge 1e-8 */
WLCB_API void wlcb_lcb_config_init(wlcb_lcb_config* cfg);

typedef struct wlcb_lcb_result {
    double value;
    double crit;
    int32_t argmax_policy;
    int32_t gms_fallback;
    int32_t lambda_degenerate;
    int32_t n_selected;
    int32_t bisection_iterations;
} wlcb_lcb_result;

/* lambda_out/selected_out are optional; pass NULL or arrays of length J */
WLCB_API wlcb_status wlcb_panel_lcb(const wlcb_panel* p, wlcb_method method,
                                    const wlcb_lcb_config* cfg, wlcb_lcb_result* out,
                                    double* lambda_out, int32_t* selected_out);
WLCB_API wlcb_status wlcb_naive_lcb(double w_hat, double sigma_hat, int64_t n, double alpha,
                                    double* out);
WLCB_API wlcb_status wlcb_normal_quantile(double p, double* out);

/* ---------- synthetic designs ---------- */

enum { WLCB_FAMILY_TWO_POINT = 0, WLCB_FAMILY_GAUSSIAN = 1 };
enum { WLCB_VARIANT_WELFARE = 0, WLCB_VARIANT_GAIN = 1 };

typedef struct wlcb_dominance_dgp {
    double p, pi1, pi0, eps;
    int32_t family;
    int32_t variant;
    double var11, var10, var01, var00; /* cell variances sigma^2(d,x) */
} wlcb_dominance_dgp;

WLCB_API void wlcb_dominance_dgp_init(wlcb_dominance_dgp* dgp, int32_t variant);

typedef struct wlcb_margin_dgp {
    double M, eps, nu;
} wlcb_margin_dgp;

WLCB_API void wlcb_margin_dgp_init(wlcb_margin_dgp* dgp);

WLCB_API wlcb_status wlcb_sample_dominance(const wlcb_dominance_dgp* dgp, int64_t n,
                                           uint64_t seed, wlcb_sample** out);
WLCB_API wlcb_status wlcb_sample_margin(const wlcb_margin_dgp* dgp, int64_t n, uint64_t seed,
                                        wlcb_sample** out);

typedef struct wlcb_population_moments {
    double w_gstar, w_g;
    double sigma2_gstar, sigma2_g;
    double delta_gap;
} wlcb_population_moments;

WLCB_API wlcb_status wlcb_closed_form_moments(const wlcb_dominance_dgp* dgp, int64_t n,
                                              double alpha, wlcb_population_moments* out);
WLCB_API wlcb_status wlcb_margin_moments(const wlcb_margin_dgp* dgp, int64_t n, double alpha,
                                         wlcb_population_moments* out);

/* ---------- Monte Carlo experiments ---------- */

typedef struct wlcb_mse_report {
    int64_t n, n_reps;
    double w_target;
    double mse_suboptimal, mse_oracle;
    double se_suboptimal, se_oracle;
} wlcb_mse_report;

WLCB_API wlcb_status wlcb_mse_experiment(const wlcb_dominance_dgp* dgp, int64_t n,
                                         int64_t n_reps, uint64_t seed, wlcb_mse_report* out);

/* per-method slots are indexed by wlcb_method; methods_run marks filled slots */
typedef struct wlcb_coverage_report {
    int64_t n, n_reps;
    double w_gstar;
    double coverage[4];
    double mean_lcb[4];
    double se_lcb[4];
    int32_t methods_run[4];
    int32_t gms_ge_lf_every_rep;
} wlcb_coverage_report;

WLCB_API wlcb_status wlcb_coverage_experiment_dominance(
    const wlcb_dominance_dgp* dgp, int64_t n, const wlcb_policies* policies,
    const int32_t* methods, int32_t n_methods, const wlcb_lcb_config* cfg, int64_t n_reps,
    uint64_t seed, wlcb_coverage_report* out);
WLCB_API wlcb_status wlcb_coverage_experiment_margin(
    const wlcb_margin_dgp* dgp, int64_t n, int32_t n_bins, const wlcb_policies* policies,
    const int32_t* methods, int32_t n_methods, const wlcb_lcb_config* cfg, int64_t n_reps,
    uint64_t seed, wlcb_coverage_report* out);

/* ---------- margin diagnostics ---------- */

typedef struct wlcb_margin_diag {
    double sym_diff_share;
    double welfare_gap_hat;
    double margin_lhs;
    int32_t violated;
    int32_t iut_reject;
    int32_t n_cells;
} wlcb_margin_diag;

/* cell_t_out is optional (NULL or an array with room for one t per cell; call
 * once with cell_t_out = NULL to learn n_cells). */
WLCB_API wlcb_status wlcb_margin_diagnostics(const wlcb_sample* s, const wlcb_first_stage* fs,
                                             const wlcb_policies* policies, int32_t gstar_index,
                                             int32_t g_index, double delta_low, double eta,
                                             double alpha, wlcb_margin_diag* out,
                                             double* cell_t_out);

#ifdef __cplusplus
}
#endif

#endif /* WELFARE_LCB_H */
