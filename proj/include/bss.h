/* C API for the BSS usage-pattern toolkit.
 *
 * All functions return bss_status; on failure a thread-local message is
 * available from bss_last_error(). Strings returned through char** out
 * parameters are heap-allocated and must be released with bss_string_free().
 * Opaque handles are released with their matching *_free() function.
 */
#ifndef BSS_H
#define BSS_H

#include <stddef.h>
#include <stdint.h>

#ifdef __cplusplus
extern "C" {
#endif

typedef enum bss_status {
  BSS_OK = 0,
  BSS_ERR_INVALID = 2,    /* bad arguments / validation failure */
  BSS_ERR_STAGE = 3,      /* a pipeline stage failed */
  BSS_ERR_IO = 4,
  BSS_ERR_PARSE = 5,
  BSS_ERR_NOCONVERGE = 6, /* fit did not converge; outputs hold best-so-far */
} bss_status;

const char* bss_version(void);

/* Message describing the most recent failure on this thread. */
const char* bss_last_error(void);

void bss_string_free(char* s);

/* ---- divergence ------------------------------------------------------- */

/* Kullback-Leibler divergence in bits. Fails on a support violation. */
bss_status bss_kl_divergence(const double* p, const double* q, size_t n,
                             double* out);

/* Jensen-Shannon divergence, log base 2, in [0, 1]. */
bss_status bss_js_divergence(const double* p, const double* q, size_t n,
                             double* out);

/* ---- rank distribution model: P(k) = C k^-alpha exp(-beta k^gamma) ---- */

bss_status bss_rank_model_eval(double k, double alpha, double beta,
                               double gamma, double norm_const, double* out);

/* ---- weekday/weekend rank correspondence model ------------------------ */

/* y(x) = (b - M/a)(1 - a/M)^x + M/a, 0 < a < 1. */
bss_status bss_rank_corr_eval(double x, double a, double b, double m_max,
                              double* out);

/* S(k) = S(k-1) + (M - a S(k-1))/M; fills out[0..steps-1] with S(1..steps). */
bss_status bss_rank_corr_recurrence(double s1, double a, double m_max,
                                    size_t steps, double* out);

/* Monte Carlo occupancy process averaged over `trials`; mean and standard
 * error per step (arrays of length `steps`). Bit-exact for a fixed seed. */
bss_status bss_rank_corr_simulate(size_t steps, double a, double m_max,
                                  double s1, uint64_t seed, size_t trials,
                                  double* mean, double* stderr_out);

/* ---- canonical event streams ------------------------------------------ */

typedef struct bss_events bss_events; /* opaque */

/* Parse trip CSVs under a city schema (JSON file) into an event stream.
 * report_json (optional) receives row counts and malformed-row diagnostics. */
bss_status bss_events_from_trip_files(const char* schema_path,
                                      const char* const* paths, size_t n_paths,
                                      double malformed_threshold,
                                      bss_events** out, char** report_json);

/* Reconstruct events from minute-resolution station snapshots. */
bss_status bss_events_from_snapshot_files(const char* const* paths,
                                          size_t n_paths, int max_gap_minutes,
                                          bss_events** out, char** report_json);

bss_status bss_events_load_csv(const char* path, bss_events** out);
bss_status bss_events_save_csv(const bss_events* ev, const char* path);
size_t bss_events_size(const bss_events* ev);

/* Table-1-style summary over an inclusive [start, end] date range
 * ("YYYY-MM-DD"). */
bss_status bss_events_summary_json(const bss_events* ev, const char* city,
                                   const char* period_start,
                                   const char* period_end, char** json_out);

/* Drop events outside the date range, in place. */
bss_status bss_events_filter_period(bss_events* ev, const char* period_start,
                                    const char* period_end);

void bss_events_free(bss_events* ev);

/* ---- file-to-file analysis stages ------------------------------------- */

/* Long-format day-of-week distribution CSV from a canonical event CSV. */
bss_status bss_stage_distributions(const char* events_csv, const char* city,
                                   int bin_width, const char* out_csv);

/* 7x7 day JSD matrix for one (city, direction) slice of a distribution CSV.
 * out_json may be NULL. */
bss_status bss_stage_jsd_matrix(const char* dist_csv, const char* city,
                                const char* direction, const char* out_csv,
                                const char* out_json);

/* Complete inverse-JSD network over every (city, day) distribution found in
 * the given CSVs, with Louvain communities; writes nodes.csv, edges.csv and
 * network.json into out_dir. */
bss_status bss_stage_network(const char* const* dist_csvs, size_t n,
                             const char* direction, size_t top_k,
                             uint64_t seed, double resolution, double epsilon,
                             const char* out_dir);

/* Station rank distribution and truncated-power-law fit for one day class
 * ("weekday" / "weekend"). out_fit_json may be NULL to skip fitting. */
bss_status bss_stage_rank_fit(const char* events_csv, const char* day_class,
                              const char* out_rank_csv,
                              const char* out_fit_json);

/* Weekday/weekend rank pairing over the common station set. */
bss_status bss_stage_rank_compare(const char* weekday_rank_csv,
                                  const char* weekend_rank_csv,
                                  const char* out_csv);

/* Fit the correspondence model to a rank-compare CSV. */
bss_status bss_stage_model_fit(const char* correspondence_csv,
                               const char* out_json);

bss_status bss_stage_simulate(size_t steps, double a, double m_max, double s1,
                              uint64_t seed, size_t trials,
                              const char* out_csv);

/* ---- pipeline --------------------------------------------------------- */

/* Full run from a JSON config. out_dir_override / seed_override replace the
 * config values when non-NULL / non-negative. manifest_json (optional)
 * receives the run manifest. */
bss_status bss_run_pipeline(const char* config_path,
                            const char* out_dir_override,
                            int64_t seed_override, char** manifest_json);

/* Plot-ready CSV for one of "fig1".."fig5" from a stage output file or
 * directory. */
bss_status bss_plot_data(const char* stage_path, const char* figure,
                         const char* out_csv);

#ifdef __cplusplus
} /* extern "C" */
#endif

#endif /* BSS_H */
