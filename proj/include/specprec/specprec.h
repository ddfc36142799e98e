/*
 * Copyright 2026 The specprec Authors.
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *      http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

/*
 * C interface to libspecprec.
 *
 * Complex arrays are interleaved doubles (re, im). Matrices are row-major.
 * Every call returns an spp_status; on failure spp_last_error() describes the
 * problem for the calling thread until its next failing call.
 */

#ifndef SPECPREC_SPECPREC_H_
#define SPECPREC_SPECPREC_H_

#include <stddef.h>
#include <stdint.h>

#if defined(SPECPREC_BUILDING_LIBRARY)
#define SPP_API __attribute__((visibility("default")))
#else
#define SPP_API
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum {
  SPP_OK = 0,
  SPP_ERR_INVALID_ARGUMENT = 1,
  SPP_ERR_CONFIG = 2,
  SPP_ERR_DIMENSION = 3,
  SPP_ERR_DEGENERATE = 4,
  SPP_ERR_SINGULAR = 5,
  SPP_ERR_ORACLE = 6,
  SPP_ERR_IO = 7,
  SPP_ERR_SOLVER = 8,
  SPP_ERR_INTERNAL = 9
} spp_status;

typedef enum {
  SPP_PRECODER_NONE = 0,
  SPP_PRECODER_NSP,
  SPP_PRECODER_ENSP,
  SPP_PRECODER_ADMM,
  SPP_PRECODER_SSP,
  SPP_PRECODER_EADMM,
  SPP_PRECODER_ESSP,
  SPP_PRECODER_ORACLE
} spp_precoder;

typedef struct spp_numerology spp_numerology;
typedef struct spp_kernel spp_kernel;
typedef struct spp_scenario spp_scenario;

typedef struct {
  double rho;           /* ADMM penalty */
  int admm_iterations;
  int ssp_sweeps;
  int essp_outer_iterations;
  int essp_inner_sweeps;
  int essp_early_stop;  /* nonzero: stop when total OOBE rises */
  double evm_fraction;  /* wideband EVM budget for ENSP, EADMM, ESSP */
} spp_solver_options;

typedef struct {
  double aclr_lower_db;
  double aclr_upper_db;
  double aclr_worst_db;
  double evm_pooled;
  double evm_max_symbol;
  double mask_ratio_max;
  double mean_iterations;
  double inband_density_db;
  long long early_stops;
} spp_run_summary;

SPP_API const char* spp_version(void);
SPP_API const char* spp_last_error(void);
SPP_API const char* spp_status_string(spp_status status);

/* Fills defaults: rho 10, 100 ADMM iterations, 3 SSP sweeps, ESSP 2 x 2
 * with early stop, 8% EVM. */
SPP_API void spp_solver_options_default(spp_solver_options* opts);

/* Contiguous active block of `count` subcarriers starting at signed offset
 * `first`. */
SPP_API spp_status spp_numerology_create(int fft_size, int cp_len,
                                         double scs_hz, int first, int count,
                                         int prb_size, spp_numerology** out);
SPP_API void spp_numerology_destroy(spp_numerology* num);

/* Kernel at `m` frequency points given in Hz, with idle columns zeroed. */
SPP_API spp_status spp_kernel_create(const spp_numerology* num,
                                     const double* points_hz, int m,
                                     spp_kernel** out);
SPP_API void spp_kernel_destroy(spp_kernel* kernel);
SPP_API spp_status spp_kernel_dims(const spp_kernel* kernel, int* rows,
                                   int* cols);
/* rows * cols complex entries. */
SPP_API spp_status spp_kernel_matrix(const spp_kernel* kernel, double* out);

/* Mask levels in dB per 100 kHz to kernel-domain bounds. */
SPP_API spp_status spp_mask_calibrate(const spp_numerology* num,
                                      const double* mask_db, int m,
                                      double reference_db, double* gamma_out);

/* N_T x N grid of unit-power QAM symbols; constellation is "qpsk", "16qam",
 * "64qam" or "256qam". */
SPP_API spp_status spp_generate_grid(const spp_numerology* num, uint64_t seed,
                                     int n_tx, const char* constellation,
                                     double* out);

SPP_API spp_status spp_oobe_power(const spp_kernel* kernel, const double* d,
                                  double* out);

/* Projection of x onto {z : |u^H z|^2 <= b}. */
SPP_API spp_status spp_project_rank1(const double* x, const double* u, int n,
                                     double b, double* out);

/* One vector through NONE, NSP, ENSP, ADMM, SSP or ORACLE. `iterations` may
 * be NULL. */
SPP_API spp_status spp_precode_vector(const spp_kernel* kernel,
                                      spp_precoder precoder,
                                      const double* gamma,
                                      const spp_solver_options* opts,
                                      const double* d, double* dbar,
                                      int* iterations);

/* N_T x N grid through EADMM or ESSP with a wideband EVM budget.
 * `early_stopped` may be NULL. */
SPP_API spp_status spp_precode_grid(const spp_numerology* num,
                                    const spp_kernel* kernel,
                                    spp_precoder precoder,
                                    const double* gamma,
                                    const spp_solver_options* opts, int n_tx,
                                    const double* x, double* xbar,
                                    int* early_stopped);

/* Scenario runs. Overrides apply on top of the loaded config. */
SPP_API spp_status spp_scenario_load(const char* path, spp_scenario** out);
SPP_API spp_status spp_scenario_parse(const char* json_text,
                                      spp_scenario** out);
SPP_API void spp_scenario_destroy(spp_scenario* s);
SPP_API spp_status spp_scenario_set_precoder(spp_scenario* s,
                                             const char* name);
SPP_API spp_status spp_scenario_set_seed(spp_scenario* s, uint64_t seed);
SPP_API spp_status spp_scenario_set_symbols(spp_scenario* s, int symbols);
SPP_API spp_status spp_scenario_set_out_dir(spp_scenario* s, const char* dir);
SPP_API spp_status spp_scenario_set_emit_waveforms(spp_scenario* s, int on);
SPP_API spp_status spp_scenario_set_threads(spp_scenario* s, int threads);
SPP_API spp_status spp_scenario_run(spp_scenario* s, spp_run_summary* out);

/* Writes the comparison CSV into buf (NUL-terminated). When cap is too
 * small, returns SPP_ERR_INVALID_ARGUMENT and sets *needed. */
SPP_API spp_status spp_compare_runs(const char* const* run_dirs, int n,
                                    char* buf, size_t cap, size_t* needed);

#ifdef __cplusplus
}
#endif

#endif /* SPECPREC_SPECPREC_H_ */
