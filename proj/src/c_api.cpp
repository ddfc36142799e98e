// Copyright 2026 The specprec Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "specprec/specprec.h"

#include <cstring>
#include <memory>
#include <new>
#include <string>
#include <vector>

#include "specprec/baselines.hpp"
#include "specprec/constrained.hpp"
#include "specprec/metrics.hpp"
#include "specprec/oracle.hpp"
#include "specprec/projections.hpp"
#include "specprec/scenario.hpp"
#include "specprec/signal_model.hpp"
#include "specprec/unconstrained.hpp"

struct spp_numerology {
  specprec::OfdmNumerology num;
};

struct spp_kernel {
  specprec::SpectralKernel kernel;
  specprec::OfdmNumerology num;
};

struct spp_scenario {
  specprec::ScenarioConfig cfg;
};

namespace {

using specprec::CMatrix;
using specprec::CVector;
using specprec::Complex;

thread_local std::string g_last_error;

spp_status fail(spp_status code, const std::string& msg) {
  g_last_error = msg;
  return code;
}

template <typename F>
spp_status guarded(F&& f) {
  try {
    f();
    return SPP_OK;
  } catch (const specprec::ConfigError& e) {
    return fail(SPP_ERR_CONFIG, e.what());
  } catch (const specprec::DimensionError& e) {
    return fail(SPP_ERR_DIMENSION, e.what());
  } catch (const specprec::DegenerateConstraintError& e) {
    return fail(SPP_ERR_DEGENERATE, e.what());
  } catch (const specprec::NumericalSingularityError& e) {
    return fail(SPP_ERR_SINGULAR, e.what());
  } catch (const specprec::OracleError& e) {
    return fail(SPP_ERR_ORACLE, e.what());
  } catch (const specprec::IoError& e) {
    return fail(SPP_ERR_IO, e.what());
  } catch (const specprec::SymbolError& e) {
    return fail(SPP_ERR_SOLVER, e.what());
  } catch (const specprec::Error& e) {
    return fail(SPP_ERR_SOLVER, e.what());
  } catch (const std::bad_alloc&) {
    return fail(SPP_ERR_INTERNAL, "out of memory");
  } catch (const std::exception& e) {
    return fail(SPP_ERR_INTERNAL, e.what());
  } catch (...) {
    return fail(SPP_ERR_INTERNAL, "unknown exception");
  }
}

CVector read_vec(const double* p, int n) {
  CVector v(n);
  for (int i = 0; i < n; ++i) v[i] = Complex(p[2 * i], p[2 * i + 1]);
  return v;
}

void write_vec(const CVector& v, double* p) {
  for (Eigen::Index i = 0; i < v.size(); ++i) {
    p[2 * i] = v[i].real();
    p[2 * i + 1] = v[i].imag();
  }
}

CMatrix read_mat(const double* p, int rows, int cols) {
  CMatrix m(rows, cols);
  for (int r = 0; r < rows; ++r)
    for (int c = 0; c < cols; ++c) {
      const size_t i = 2 * (static_cast<size_t>(r) * cols + c);
      m(r, c) = Complex(p[i], p[i + 1]);
    }
  return m;
}

void write_mat(const CMatrix& m, double* p) {
  for (Eigen::Index r = 0; r < m.rows(); ++r)
    for (Eigen::Index c = 0; c < m.cols(); ++c) {
      const size_t i = 2 * (static_cast<size_t>(r) * m.cols() + c);
      p[i] = m(r, c).real();
      p[i + 1] = m(r, c).imag();
    }
}

specprec::MaskSpec mask_from(const double* gamma, int m) {
  specprec::MaskSpec mask;
  mask.gamma.assign(gamma, gamma + m);
  mask.validate(m);
  return mask;
}

spp_solver_options resolve(const spp_solver_options* opts) {
  spp_solver_options o;
  spp_solver_options_default(&o);
  return opts ? *opts : o;
}

#define SPP_REQUIRE(cond, msg) \
  do {                         \
    if (!(cond)) return fail(SPP_ERR_INVALID_ARGUMENT, msg); \
  } while (0)

}  // namespace

extern "C" {

const char* spp_version(void) { return specprec::version(); }

const char* spp_last_error(void) { return g_last_error.c_str(); }

const char* spp_status_string(spp_status status) {
  switch (status) {
    case SPP_OK: return "ok";
    case SPP_ERR_INVALID_ARGUMENT: return "invalid argument";
    case SPP_ERR_CONFIG: return "configuration error";
    case SPP_ERR_DIMENSION: return "dimension mismatch";
    case SPP_ERR_DEGENERATE: return "degenerate constraint";
    case SPP_ERR_SINGULAR: return "numerical singularity";
    case SPP_ERR_ORACLE: return "oracle failure";
    case SPP_ERR_IO: return "I/O error";
    case SPP_ERR_SOLVER: return "solver error";
    case SPP_ERR_INTERNAL: return "internal error";
  }
  return "unknown status";
}

void spp_solver_options_default(spp_solver_options* opts) {
  if (!opts) return;
  opts->rho = 10.0;
  opts->admm_iterations = 100;
  opts->ssp_sweeps = 3;
  opts->essp_outer_iterations = 2;
  opts->essp_inner_sweeps = 2;
  opts->essp_early_stop = 1;
  opts->evm_fraction = 0.08;
}

spp_status spp_numerology_create(int fft_size, int cp_len, double scs_hz,
                                 int first, int count, int prb_size,
                                 spp_numerology** out) {
  SPP_REQUIRE(out, "out is null");
  *out = nullptr;
  return guarded([&] {
    auto h = std::make_unique<spp_numerology>();
    h->num = specprec::OfdmNumerology::contiguous(fft_size, cp_len, scs_hz,
                                                  first, count, prb_size);
    h->num.validate();
    *out = h.release();
  });
}

void spp_numerology_destroy(spp_numerology* num) { delete num; }

spp_status spp_kernel_create(const spp_numerology* num,
                             const double* points_hz, int m,
                             spp_kernel** out) {
  SPP_REQUIRE(out, "out is null");
  *out = nullptr;
  SPP_REQUIRE(num, "numerology is null");
  SPP_REQUIRE(points_hz && m > 0, "need at least one frequency point");
  return guarded([&] {
    auto h = std::make_unique<spp_kernel>();
    h->num = num->num;
    const std::vector<double> hz(points_hz, points_hz + m);
    h->kernel = specprec::restrict_to_active(
        specprec::build_kernel(
            num->num, specprec::FrequencyGrid::from_hz(hz, num->num.scs_hz)),
        num->num);
    *out = h.release();
  });
}

void spp_kernel_destroy(spp_kernel* kernel) { delete kernel; }

spp_status spp_kernel_dims(const spp_kernel* kernel, int* rows, int* cols) {
  SPP_REQUIRE(kernel && rows && cols, "null argument");
  *rows = kernel->kernel.rows();
  *cols = kernel->kernel.cols();
  return SPP_OK;
}

spp_status spp_kernel_matrix(const spp_kernel* kernel, double* out) {
  SPP_REQUIRE(kernel && out, "null argument");
  return guarded([&] { write_mat(kernel->kernel.A, out); });
}

spp_status spp_mask_calibrate(const spp_numerology* num,
                              const double* mask_db, int m,
                              double reference_db, double* gamma_out) {
  SPP_REQUIRE(num && mask_db && gamma_out && m > 0, "null argument");
  return guarded([&] {
    const double ref = specprec::unit_power_reference(num->num, 4);
    const specprec::MaskSpec mask = specprec::calibrate_mask(
        std::vector<double>(mask_db, mask_db + m), reference_db, ref);
    std::memcpy(gamma_out, mask.gamma.data(), sizeof(double) * m);
  });
}

spp_status spp_generate_grid(const spp_numerology* num, uint64_t seed,
                             int n_tx, const char* constellation,
                             double* out) {
  SPP_REQUIRE(num && constellation && out, "null argument");
  SPP_REQUIRE(n_tx >= 1, "n_tx must be >= 1");
  return guarded([&] {
    const auto grid = specprec::generate_qam_grid(
        seed, num->num, n_tx, specprec::parse_constellation(constellation));
    write_mat(grid.X, out);
  });
}

spp_status spp_oobe_power(const spp_kernel* kernel, const double* d,
                          double* out) {
  SPP_REQUIRE(kernel && d && out, "null argument");
  return guarded([&] {
    const auto p =
        specprec::oobe_power(read_vec(d, kernel->kernel.cols()), kernel->kernel);
    for (Eigen::Index i = 0; i < p.size(); ++i) out[i] = p[i];
  });
}

spp_status spp_project_rank1(const double* x, const double* u, int n,
                             double b, double* out) {
  SPP_REQUIRE(x && u && out && n > 0, "null argument");
  return guarded([&] {
    specprec::Rank1Constraint c{read_vec(u, n), b};
    write_vec(specprec::project_rank1(read_vec(x, n), c), out);
  });
}

spp_status spp_precode_vector(const spp_kernel* kernel, spp_precoder precoder,
                              const double* gamma,
                              const spp_solver_options* opts, const double* d,
                              double* dbar, int* iterations) {
  SPP_REQUIRE(kernel && d && dbar, "null argument");
  const spp_solver_options o = resolve(opts);
  return guarded([&] {
    const auto& k = kernel->kernel;
    const CVector x = read_vec(d, k.cols());
    CVector y = x;
    int iters = 0;
    switch (precoder) {
      case SPP_PRECODER_NONE:
        break;
      case SPP_PRECODER_NSP:
        y = specprec::nsp_precode(x, k);
        break;
      case SPP_PRECODER_ENSP:
        y = specprec::ensp_precode(x, k, o.evm_fraction).dbar;
        break;
      case SPP_PRECODER_ADMM: {
        if (!gamma) throw specprec::ConfigError("ADMM needs mask bounds");
        specprec::AdmmConfig c;
        c.rho = o.rho;
        c.iters = o.admm_iterations;
        c.record_trace = false;
        const auto r =
            specprec::admm_precode(x, k, mask_from(gamma, k.rows()), c);
        y = r.dbar;
        iters = r.report.iterations;
        break;
      }
      case SPP_PRECODER_SSP: {
        if (!gamma) throw specprec::ConfigError("SSP needs mask bounds");
        specprec::SspConfig c;
        c.sweeps = o.ssp_sweeps;
        c.record_trace = false;
        const auto r = specprec::ssp_precode(x, k, mask_from(gamma, k.rows()), c);
        y = r.dbar;
        iters = r.report.iterations;
        break;
      }
      case SPP_PRECODER_ORACLE:
        if (!gamma) throw specprec::ConfigError("oracle needs mask bounds");
        y = specprec::oracle_mask_projection_subspace(
                x, k, mask_from(gamma, k.rows()))
                .dbar;
        break;
      default:
        throw specprec::ConfigError(
            "precoder is not a single-vector method; use spp_precode_grid");
    }
    write_vec(y, dbar);
    if (iterations) *iterations = iters;
  });
}

spp_status spp_precode_grid(const spp_numerology* num,
                            const spp_kernel* kernel, spp_precoder precoder,
                            const double* gamma,
                            const spp_solver_options* opts, int n_tx,
                            const double* x, double* xbar,
                            int* early_stopped) {
  SPP_REQUIRE(num && kernel && gamma && x && xbar, "null argument");
  SPP_REQUIRE(n_tx >= 1, "n_tx must be >= 1");
  const spp_solver_options o = resolve(opts);
  return guarded([&] {
    const auto& k = kernel->kernel;
    specprec::DataGrid grid{read_mat(x, n_tx, k.cols()), num->num};
    specprec::EvmConstraint evm;
    evm.eps_avg = o.evm_fraction;
    const std::vector<specprec::MaskSpec> masks{mask_from(gamma, k.rows())};
    specprec::GridResult r;
    if (precoder == SPP_PRECODER_EADMM) {
      specprec::AdmmConfig c;
      c.rho = o.rho;
      c.iters = o.admm_iterations;
      c.record_trace = false;
      r = specprec::eadmm_precode(grid, k, masks, evm, c);
    } else if (precoder == SPP_PRECODER_ESSP) {
      specprec::EsspConfig c;
      c.outer_iters = o.essp_outer_iterations;
      c.inner_sweeps = o.essp_inner_sweeps;
      c.early_stop = o.essp_early_stop != 0;
      c.record_trace = false;
      r = specprec::essp_precode(grid, k, masks, evm, c);
    } else {
      throw specprec::ConfigError("spp_precode_grid supports EADMM and ESSP");
    }
    write_mat(r.Xbar, xbar);
    if (early_stopped) *early_stopped = r.report.early_stopped ? 1 : 0;
  });
}

spp_status spp_scenario_load(const char* path, spp_scenario** out) {
  SPP_REQUIRE(path && out, "null argument");
  *out = nullptr;
  return guarded([&] {
    auto h = std::make_unique<spp_scenario>();
    h->cfg = specprec::load_scenario_file(path);
    *out = h.release();
  });
}

spp_status spp_scenario_parse(const char* json_text, spp_scenario** out) {
  SPP_REQUIRE(json_text && out, "null argument");
  *out = nullptr;
  return guarded([&] {
    auto h = std::make_unique<spp_scenario>();
    h->cfg = specprec::parse_scenario_json(json_text);
    *out = h.release();
  });
}

void spp_scenario_destroy(spp_scenario* s) { delete s; }

spp_status spp_scenario_set_precoder(spp_scenario* s, const char* name) {
  SPP_REQUIRE(s && name, "null argument");
  return guarded([&] {
    const auto p = specprec::parse_precoder(name);
    specprec::ScenarioConfig c = s->cfg;
    c.precoder = p;
    c.validate();
    s->cfg = std::move(c);
  });
}

spp_status spp_scenario_set_seed(spp_scenario* s, uint64_t seed) {
  SPP_REQUIRE(s, "null argument");
  s->cfg.seed = seed;
  return SPP_OK;
}

spp_status spp_scenario_set_symbols(spp_scenario* s, int symbols) {
  SPP_REQUIRE(s, "null argument");
  if (symbols < 1) return fail(SPP_ERR_CONFIG, "symbols: must be >= 1");
  s->cfg.symbols = symbols;
  return SPP_OK;
}

spp_status spp_scenario_set_out_dir(spp_scenario* s, const char* dir) {
  SPP_REQUIRE(s && dir, "null argument");
  if (!*dir) return fail(SPP_ERR_CONFIG, "output.directory: must be set");
  s->cfg.out_dir = dir;
  return SPP_OK;
}

spp_status spp_scenario_set_emit_waveforms(spp_scenario* s, int on) {
  SPP_REQUIRE(s, "null argument");
  s->cfg.emit_waveforms = on != 0;
  return SPP_OK;
}

spp_status spp_scenario_set_threads(spp_scenario* s, int threads) {
  SPP_REQUIRE(s, "null argument");
  if (threads < 0) return fail(SPP_ERR_CONFIG, "threads: must be >= 0");
  s->cfg.threads = threads;
  return SPP_OK;
}

spp_status spp_scenario_run(spp_scenario* s, spp_run_summary* out) {
  SPP_REQUIRE(s, "null argument");
  return guarded([&] {
    const auto man = specprec::run_scenario(s->cfg);
    if (out) {
      const auto& r = man.summary;
      out->aclr_lower_db = r.aclr.lower_db;
      out->aclr_upper_db = r.aclr.upper_db;
      out->aclr_worst_db = r.aclr.worst_db;
      out->evm_pooled = r.evm_pooled;
      out->evm_max_symbol = r.evm_max_symbol;
      out->mask_ratio_max = r.mask_ratio_max;
      out->mean_iterations = r.mean_iterations;
      out->inband_density_db = r.inband_density_db;
      out->early_stops = r.early_stops;
    }
  });
}

spp_status spp_compare_runs(const char* const* run_dirs, int n, char* buf,
                            size_t cap, size_t* needed) {
  SPP_REQUIRE(run_dirs && n > 0, "need at least one run directory");
  std::string csv;
  const spp_status st = guarded([&] {
    std::vector<std::string> dirs;
    for (int i = 0; i < n; ++i) {
      if (!run_dirs[i]) throw specprec::ConfigError("null run directory");
      dirs.emplace_back(run_dirs[i]);
    }
    csv = specprec::compare_runs(dirs);
  });
  if (st != SPP_OK) return st;
  if (needed) *needed = csv.size() + 1;
  if (!buf || cap < csv.size() + 1)
    return fail(SPP_ERR_INVALID_ARGUMENT, "buffer too small");
  std::memcpy(buf, csv.c_str(), csv.size() + 1);
  return SPP_OK;
}

}  // extern "C"
