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

#include "specprec/scenario.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <exception>
#include <filesystem>
#include <fstream>
#include <map>
#include <memory>
#include <mutex>
#include <set>
#include <sstream>
#include <thread>

#include <openssl/evp.h>

#include "json.hpp"
#include "specprec/baselines.hpp"
#include "specprec/waveform_io.hpp"

namespace specprec {

using json = nlohmann::ordered_json;
namespace fs = std::filesystem;

namespace {

// ---------------------------------------------------------------------------
// JSON helpers. Every error names the dotted field path.

class Obj {
 public:
  Obj(const json& j, std::string path) : j_(j), path_(std::move(path)) {
    if (!j_.is_object()) fail("", "expected an object");
  }

  bool has(const std::string& key) const { return j_.contains(key); }

  const json& at(const std::string& key) const {
    used_.insert(key);
    if (!j_.contains(key)) fail(key, "missing required field");
    return j_.at(key);
  }

  std::string field(const std::string& key) const {
    return path_.empty() ? key : path_ + "." + key;
  }

  [[noreturn]] void fail(const std::string& key, const std::string& msg) const {
    const std::string where = key.empty() ? path_ : field(key);
    throw ConfigError((where.empty() ? std::string("config") : where) + ": " +
                      msg);
  }

  double num(const std::string& key) const {
    const json& v = at(key);
    if (!v.is_number()) fail(key, "expected a number");
    return v.get<double>();
  }
  double num(const std::string& key, double def) const {
    return has(key) ? num(key) : def;
  }

  long long integer(const std::string& key) const {
    const json& v = at(key);
    if (!v.is_number_integer()) fail(key, "expected an integer");
    return v.get<long long>();
  }
  long long integer(const std::string& key, long long def) const {
    return has(key) ? integer(key) : def;
  }

  std::uint64_t u64(const std::string& key, std::uint64_t def) const {
    if (!has(key)) return def;
    const json& v = at(key);
    if (v.is_number_unsigned()) return v.get<std::uint64_t>();
    if (v.is_number_integer() && v.get<long long>() >= 0)
      return static_cast<std::uint64_t>(v.get<long long>());
    fail(key, "expected a nonnegative integer");
  }

  bool boolean(const std::string& key, bool def) const {
    if (!has(key)) return def;
    const json& v = at(key);
    if (!v.is_boolean()) fail(key, "expected true or false");
    return v.get<bool>();
  }

  std::string str(const std::string& key) const {
    const json& v = at(key);
    if (!v.is_string()) fail(key, "expected a string");
    return v.get<std::string>();
  }
  std::string str(const std::string& key, const std::string& def) const {
    return has(key) ? str(key) : def;
  }

  std::vector<double> nums(const std::string& key) const {
    const json& v = at(key);
    if (!v.is_array()) fail(key, "expected an array of numbers");
    std::vector<double> out;
    for (const auto& e : v) {
      if (!e.is_number()) fail(key, "expected an array of numbers");
      out.push_back(e.get<double>());
    }
    return out;
  }

  Obj sub(const std::string& key) const { return Obj(at(key), field(key)); }

  void reject_unknown() const {
    for (auto it = j_.begin(); it != j_.end(); ++it)
      if (!used_.count(it.key())) fail(it.key(), "unknown field");
  }

 private:
  const json& j_;
  std::string path_;
  mutable std::set<std::string> used_;
};

template <typename F>
auto with_path(const std::string& path, F&& f) -> decltype(f()) {
  try {
    return f();
  } catch (const ConfigError& e) {
    throw ConfigError(path + ": " + e.what());
  }
}

std::vector<EvmProfile::Entry> parse_entries(const Obj& o,
                                             const std::string& key) {
  const json& v = o.at(key);
  if (!v.is_array()) o.fail(key, "expected an array");
  std::vector<EvmProfile::Entry> out;
  for (const auto& e : v) {
    EvmProfile::Entry entry;
    if (e.is_number()) {
      entry.values.push_back(e.get<double>());
    } else if (e.is_array()) {
      for (const auto& x : e) {
        if (!x.is_number()) o.fail(key, "ramp values must be numbers");
        entry.values.push_back(x.get<double>());
      }
    } else {
      o.fail(key, "entries must be a number or an array of numbers");
    }
    out.push_back(std::move(entry));
  }
  return out;
}

json entries_to_json(const std::vector<EvmProfile::Entry>& entries) {
  json a = json::array();
  for (const auto& e : entries) {
    if (e.values.size() == 1)
      a.push_back(e.values[0]);
    else
      a.push_back(e.values);
  }
  return a;
}

std::string init_name(AdmmConfig::Init i) {
  return i == AdmmConfig::Init::kZero ? "zero" : "data";
}

std::string zinit_name(EsspConfig::ZInit i) {
  return i == EsspConfig::ZInit::kZero ? "zero" : "data";
}

// ---------------------------------------------------------------------------
// Output formatting.

std::string fmt(double x) {
  if (std::isnan(x)) return "nan";
  if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.10g", x);
  return buf;
}

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream os(path, std::ios::binary | std::ios::trunc);
  if (!os) throw IoError("cannot open " + path.string() + " for writing");
  os << text;
  if (!os) throw IoError("write failed: " + path.string());
}

// ---------------------------------------------------------------------------
// Per-symbol pipeline.

struct TraceAcc {
  double evm = 0.0;
  std::vector<double> oobe;
  double primal = 0.0;
  double dual = 0.0;
  long long count = 0;
};

struct SymbolResult {
  std::vector<double> err_sq;  // per FFT bin, summed over antennas
  std::vector<double> ref_sq;
  std::vector<double> periodogram;
  std::vector<double> oobe;  // per point, summed over antennas
  // Trace rows keyed by iteration; oobe already per antenna.
  std::vector<TraceRow> trace;
  std::vector<int> trace_weight;
  double evm = 0.0;
  double budget_excess = 0.0;
  double mask_ratio_max = 0.0;
  double iterations = 0.0;
  bool early_stopped = false;
  CMatrix time;
  CMatrix xbar;
};

struct Shared {
  const ScenarioConfig& cfg;
  SpectralKernel kernel;
  std::vector<MaskSpec> masks;
  std::unique_ptr<NotchProjector> notch;
  std::vector<double> eps;  // per active subcarrier when frequency selective
  EvmConstraint evm;
  PsdAccumulator psd_shape;
};

const MaskSpec& mask_of(const Shared& sh, int j) {
  return sh.masks.size() == 1 ? sh.masks[0] : sh.masks[j];
}

void add_vector_trace(SymbolResult& r, const SolverReport& rep) {
  for (const auto& row : rep.trace) {
    const size_t i = static_cast<size_t>(row.iter - 1);
    if (r.trace.size() <= i) {
      r.trace.resize(i + 1);
      r.trace_weight.resize(i + 1, 0);
    }
    TraceRow& t = r.trace[i];
    t.iter = row.iter;
    t.evm_wideband += row.evm_wideband;
    if (t.oobe.empty()) t.oobe.assign(row.oobe.size(), 0.0);
    for (size_t m = 0; m < row.oobe.size(); ++m) t.oobe[m] += row.oobe[m];
    t.primal_res += row.primal_res;
    t.dual_res += row.dual_res;
    r.trace_weight[i] += 1;
  }
}

SymbolResult run_symbol(const Shared& sh, long long index) {
  const ScenarioConfig& cfg = sh.cfg;
  const OfdmNumerology& num = cfg.numerology;
  const DataGrid grid =
      generate_qam_grid(derive_seed(cfg.seed, static_cast<std::uint64_t>(index)),
                        num, cfg.antennas, cfg.constellation);
  const int nt = grid.antennas();
  SymbolResult r;
  CMatrix xbar = grid.X;

  switch (cfg.precoder) {
    case Precoder::kNone:
      break;
    case Precoder::kNsp:
      for (int j = 0; j < nt; ++j)
        xbar.row(j) = nsp_precode(grid.X.row(j).transpose(), *sh.notch)
                          .transpose();
      break;
    case Precoder::kEnsp:
      for (int j = 0; j < nt; ++j)
        xbar.row(j) = ensp_precode(grid.X.row(j).transpose(), *sh.notch,
                                   sh.evm.eps_avg)
                          .dbar.transpose();
      break;
    case Precoder::kAdmm:
      for (int j = 0; j < nt; ++j) {
        const PrecodeResult p = admm_precode(grid.X.row(j).transpose(),
                                             sh.kernel, mask_of(sh, j),
                                             cfg.admm);
        xbar.row(j) = p.dbar.transpose();
        add_vector_trace(r, p.report);
        r.iterations += p.report.iterations / static_cast<double>(nt);
      }
      break;
    case Precoder::kSsp:
      for (int j = 0; j < nt; ++j) {
        const PrecodeResult p = ssp_precode(grid.X.row(j).transpose(),
                                            sh.kernel, mask_of(sh, j), cfg.ssp);
        xbar.row(j) = p.dbar.transpose();
        add_vector_trace(r, p.report);
        r.iterations += p.report.iterations / static_cast<double>(nt);
      }
      break;
    case Precoder::kOracle:
      for (int j = 0; j < nt; ++j)
        xbar.row(j) = oracle_mask_projection_subspace(
                          grid.X.row(j).transpose(), sh.kernel,
                          mask_of(sh, j), cfg.oracle)
                          .dbar.transpose();
      break;
    case Precoder::kEadmm:
    case Precoder::kEssp: {
      const GridResult g =
          cfg.precoder == Precoder::kEadmm
              ? eadmm_precode(grid, sh.kernel, sh.masks, sh.evm, cfg.admm)
              : essp_precode(grid, sh.kernel, sh.masks, sh.evm, cfg.essp);
      xbar = g.Xbar;
      SolverReport rep = g.report;
      for (auto& row : rep.trace)
        for (double& v : row.oobe) v /= nt;
      add_vector_trace(r, rep);
      r.iterations = g.report.returned_iteration;
      r.early_stopped = g.report.early_stopped;
      break;
    }
  }

  for (size_t i = 0; i < r.trace.size(); ++i) {
    const double w = r.trace_weight[i];
    if (w <= 0) continue;
    r.trace[i].evm_wideband /= w;
    for (double& v : r.trace[i].oobe) v /= w;
    r.trace[i].primal_res /= w;
    r.trace[i].dual_res /= w;
  }

  const int n = num.fft_size;
  r.err_sq.assign(n, 0.0);
  r.ref_sq.assign(n, 0.0);
  for (int k = 0; k < n; ++k) {
    r.err_sq[k] = (xbar.col(k) - grid.X.col(k)).squaredNorm();
    r.ref_sq[k] = grid.X.col(k).squaredNorm();
  }
  r.evm = evm_wideband(grid.X, xbar);

  const bool constrained = cfg.precoder == Precoder::kEnsp ||
                           cfg.precoder == Precoder::kEadmm ||
                           cfg.precoder == Precoder::kEssp;
  r.budget_excess = std::nan("");
  if (constrained) {
    if (sh.evm.mode == EvmConstraint::Mode::kWideband) {
      r.budget_excess = sh.evm.eps_avg > 0.0 ? r.evm / sh.evm.eps_avg - 1.0
                                             : (r.evm > 0.0 ? INFINITY : 0.0);
    } else {
      double worst = -1.0;
      for (int i = 0; i < num.num_active(); ++i) {
        const int k = num.active_set[i];
        const double ref = std::sqrt(r.ref_sq[k]);
        const double err = std::sqrt(r.err_sq[k]);
        const double budget = sh.eps[i] * ref;
        worst = std::max(worst, budget > 0.0 ? err / budget - 1.0
                                             : (err > 0.0 ? INFINITY : -1.0));
      }
      r.budget_excess = worst;
    }
  }

  r.oobe.assign(sh.kernel.rows(), 0.0);
  for (int j = 0; j < nt; ++j) {
    const RVector p = oobe_power(xbar.row(j).transpose(), sh.kernel);
    const RVector q = mask_ratio(xbar.row(j).transpose(), sh.kernel,
                                 mask_of(sh, j));
    for (int m = 0; m < sh.kernel.rows(); ++m) r.oobe[m] += p[m];
    r.mask_ratio_max = std::max(r.mask_ratio_max, q.maxCoeff());
  }

  DataGrid out{xbar, num};
  r.time = synthesize_time_signal(out);
  r.periodogram = sh.psd_shape.symbol_periodogram(r.time);
  if (cfg.emit_waveforms) {
    r.xbar = std::move(xbar);
  } else {
    r.time.resize(0, 0);
  }
  return r;
}

double elapsed_s(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0)
      .count();
}

}  // namespace

// ---------------------------------------------------------------------------

Precoder parse_precoder(const std::string& name) {
  static const std::map<std::string, Precoder> names = {
      {"none", Precoder::kNone},   {"nsp", Precoder::kNsp},
      {"ensp", Precoder::kEnsp},   {"admm", Precoder::kAdmm},
      {"ssp", Precoder::kSsp},     {"eadmm", Precoder::kEadmm},
      {"essp", Precoder::kEssp},   {"oracle", Precoder::kOracle}};
  auto it = names.find(name);
  if (it == names.end()) throw ConfigError("unknown precoder '" + name + "'");
  return it->second;
}

std::string precoder_name(Precoder p) {
  switch (p) {
    case Precoder::kNone: return "none";
    case Precoder::kNsp: return "nsp";
    case Precoder::kEnsp: return "ensp";
    case Precoder::kAdmm: return "admm";
    case Precoder::kSsp: return "ssp";
    case Precoder::kEadmm: return "eadmm";
    case Precoder::kEssp: return "essp";
    case Precoder::kOracle: return "oracle";
  }
  return "none";
}

std::vector<double> expand_evm_profile(const EvmProfile& profile,
                                       const OfdmNumerology& num) {
  num.validate_prb_layout();
  const int prb = num.prb_size;
  const int nprb = num.num_active() / prb;
  if (!profile.prb.empty() && !profile.edges.empty())
    throw ConfigError("evm profile: give either per-PRB values or edges, "
                      "not both");

  // entry per PRB, with `mirror` set for upper-edge PRBs whose ramp runs
  // from the top subcarrier downwards.
  std::vector<const EvmProfile::Entry*> per(nprb, nullptr);
  std::vector<bool> mirror(nprb, false);
  if (!profile.prb.empty()) {
    if (static_cast<int>(profile.prb.size()) != nprb)
      throw ConfigError("evm profile: " + std::to_string(profile.prb.size()) +
                        " PRB entries for " + std::to_string(nprb) +
                        " active PRBs");
    for (int p = 0; p < nprb; ++p) per[p] = &profile.prb[p];
  } else {
    const int ne = static_cast<int>(profile.edges.size());
    for (int p = 0; p < nprb; ++p) {
      const int from_top = nprb - 1 - p;
      const int d = std::min(p, from_top);
      if (d < ne) {
        per[p] = &profile.edges[d];
        mirror[p] = from_top < p;
      }
    }
  }

  std::vector<double> eps(num.num_active(), 0.0);
  for (int p = 0; p < nprb; ++p) {
    for (int s = 0; s < prb; ++s) {
      double v;
      if (per[p] == nullptr) {
        if (!(profile.interior >= 0.0))
          throw ConfigError("evm profile: PRB " + std::to_string(p) +
                            " is not covered and no interior value is set");
        v = profile.interior;
      } else {
        const auto& vals = per[p]->values;
        if (vals.size() == 1) {
          v = vals[0];
        } else if (static_cast<int>(vals.size()) == prb) {
          v = mirror[p] ? vals[prb - 1 - s] : vals[s];
        } else {
          throw ConfigError("evm profile: ramp has " +
                            std::to_string(vals.size()) + " values, PRB has " +
                            std::to_string(prb) + " subcarriers");
        }
      }
      if (!(v >= 0.0) || !std::isfinite(v))
        throw ConfigError("evm profile: budgets must be finite and >= 0");
      eps[p * prb + s] = v;
    }
  }
  return eps;
}

double pooled_evm_budget(const std::vector<double>& eps) {
  if (eps.empty()) return 0.0;
  double acc = 0.0;
  for (double e : eps) acc += e * e;
  return std::sqrt(acc / static_cast<double>(eps.size()));
}

// ---------------------------------------------------------------------------

void ScenarioConfig::validate() const {
  with_path("numerology", [&] { numerology.validate(); });
  if (freq_points_hz.empty())
    throw ConfigError("frequency_points_hz: at least one point is required");
  for (double f : freq_points_hz)
    if (!std::isfinite(f))
      throw ConfigError("frequency_points_hz: values must be finite");
  if (mask_db.size() != freq_points_hz.size())
    throw ConfigError("mask.levels_db_per_100khz: expected " +
                      std::to_string(freq_points_hz.size()) +
                      " values, got " + std::to_string(mask_db.size()));
  if (!mask_db_per_antenna.empty()) {
    if (static_cast<int>(mask_db_per_antenna.size()) != antennas)
      throw ConfigError(
          "mask.per_antenna_levels_db_per_100khz: one row per antenna");
    for (const auto& row : mask_db_per_antenna)
      if (row.size() != freq_points_hz.size())
        throw ConfigError("mask.per_antenna_levels_db_per_100khz: rows must "
                          "have one value per frequency point");
  }
  with_path("admm", [&] { admm.validate(); });
  with_path("ssp", [&] { ssp.validate(); });
  with_path("essp", [&] { essp.validate(); });
  with_path("oracle", [&] { oracle.validate(); });
  if (evm_from_profile) {
    with_path("evm.profile",
              [&] { (void)expand_evm_profile(evm_profile, numerology); });
  } else if (evm.mode == EvmConstraint::Mode::kFrequencySelective) {
    with_path("evm.per_subcarrier_fraction", [&] { evm.validate(numerology); });
  } else {
    with_path("evm", [&] { evm.validate(numerology); });
  }
  if (precoder == Precoder::kEnsp &&
      evm.mode != EvmConstraint::Mode::kWideband)
    throw ConfigError("evm.mode: ensp supports the wideband mode only");
  if (antennas < 1) throw ConfigError("antennas: must be >= 1");
  if (symbols < 1) throw ConfigError("symbols: must be >= 1");
  if (psd_oversample < 1) throw ConfigError("psd.oversample: must be >= 1");
  if (static_cast<long>(psd_oversample) * numerology.fft_size <
      numerology.symbol_length())
    throw ConfigError("psd.oversample: FFT too short for a CP-OFDM symbol");
  if (!(aclr.bandwidth_hz > 0.0) || !(aclr.spacing_hz > 0.0))
    throw ConfigError("aclr: bandwidth_hz and spacing_hz must be positive");
  const double half_span = numerology.fft_size * numerology.scs_hz / 2.0;
  const double c = aclr_center_hz();
  if (std::fabs(c) + aclr.spacing_hz + aclr.bandwidth_hz / 2.0 > half_span)
    throw ConfigError("aclr: adjacent channels exceed the sampled span of " +
                      fmt(2 * half_span) + " Hz");
  if (threads < 0) throw ConfigError("threads: must be >= 0");
  if (out_dir.empty()) throw ConfigError("output.directory: must be set");
}

double ScenarioConfig::aclr_center_hz() const {
  if (!aclr.center_from_active || numerology.active_set.empty())
    return aclr.center_hz;
  int lo = numerology.signed_index(numerology.active_set.front());
  int hi = lo;
  for (int k : numerology.active_set) {
    lo = std::min(lo, numerology.signed_index(k));
    hi = std::max(hi, numerology.signed_index(k));
  }
  return 0.5 * (lo + hi) * numerology.scs_hz;
}

ScenarioConfig parse_scenario_json(const std::string& text) {
  json root;
  try {
    root = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ConfigError(std::string("config is not valid JSON: ") + e.what());
  }
  const Obj r(root, "");
  ScenarioConfig cfg;

  {
    const Obj n = r.sub("numerology");
    const int fft = static_cast<int>(n.integer("fft_size"));
    const int cp = static_cast<int>(n.integer("cp_len_samples"));
    const double scs = n.num("subcarrier_spacing_hz");
    const int prb = static_cast<int>(n.integer("prb_size", 12));
    cfg.active_first = static_cast<int>(n.integer("active_first_subcarrier"));
    cfg.active_count = static_cast<int>(n.integer("active_count"));
    if (fft < 2) n.fail("fft_size", "must be >= 2");
    if (cfg.active_count < 1 || cfg.active_count >= fft)
      n.fail("active_count", "must lie in [1, fft_size)");
    cfg.numerology = OfdmNumerology::contiguous(fft, cp, scs, cfg.active_first,
                                                cfg.active_count, prb);
    n.reject_unknown();
  }
  cfg.freq_points_hz = r.nums("frequency_points_hz");
  {
    const Obj m = r.sub("mask");
    cfg.reference_db = m.num("reference_db_per_100khz", -21.5);
    cfg.mask_db = m.nums("levels_db_per_100khz");
    if (m.has("per_antenna_levels_db_per_100khz")) {
      const json& rows = m.at("per_antenna_levels_db_per_100khz");
      if (!rows.is_array())
        m.fail("per_antenna_levels_db_per_100khz", "expected an array");
      for (const auto& row : rows) {
        if (!row.is_array())
          m.fail("per_antenna_levels_db_per_100khz", "rows must be arrays");
        std::vector<double> v;
        for (const auto& x : row) {
          if (!x.is_number())
            m.fail("per_antenna_levels_db_per_100khz", "expected numbers");
          v.push_back(x.get<double>());
        }
        cfg.mask_db_per_antenna.push_back(std::move(v));
      }
    }
    m.reject_unknown();
  }
  with_path("precoder",
            [&] { cfg.precoder = parse_precoder(r.str("precoder", "none")); });

  if (r.has("admm")) {
    const Obj a = r.sub("admm");
    cfg.admm.rho = a.num("rho", cfg.admm.rho);
    cfg.admm.iters = static_cast<int>(a.integer("iterations", cfg.admm.iters));
    cfg.admm.residual_tol = a.num("residual_tol_fraction", 0.0);
    const std::string init = a.str("init", init_name(cfg.admm.init));
    if (init == "zero")
      cfg.admm.init = AdmmConfig::Init::kZero;
    else if (init == "data")
      cfg.admm.init = AdmmConfig::Init::kData;
    else
      a.fail("init", "expected \"zero\" or \"data\"");
    cfg.admm.record_trace = a.boolean("record_trace", true);
    a.reject_unknown();
  }
  if (r.has("ssp")) {
    const Obj s = r.sub("ssp");
    cfg.ssp.sweeps = static_cast<int>(s.integer("sweeps", cfg.ssp.sweeps));
    cfg.ssp.phi = s.num("phi_rad", 0.0);
    cfg.ssp.clamp_nonneg = s.boolean("clamp_nonnegative", true);
    cfg.ssp.record_trace = s.boolean("record_trace", true);
    s.reject_unknown();
  }
  if (r.has("essp")) {
    const Obj e = r.sub("essp");
    cfg.essp.outer_iters =
        static_cast<int>(e.integer("outer_iterations", cfg.essp.outer_iters));
    cfg.essp.inner_sweeps =
        static_cast<int>(e.integer("inner_sweeps", cfg.essp.inner_sweeps));
    if (e.has("relaxation")) cfg.essp.relaxation = e.nums("relaxation");
    cfg.essp.tau = e.num("tau", 1.0);
    cfg.essp.early_stop = e.boolean("early_stop", true);
    cfg.essp.phi = e.num("phi_rad", 0.0);
    const std::string zi = e.str("z_init", zinit_name(cfg.essp.z_init));
    if (zi == "zero")
      cfg.essp.z_init = EsspConfig::ZInit::kZero;
    else if (zi == "data")
      cfg.essp.z_init = EsspConfig::ZInit::kData;
    else
      e.fail("z_init", "expected \"zero\" or \"data\"");
    cfg.essp.record_trace = e.boolean("record_trace", true);
    e.reject_unknown();
  }
  if (r.has("oracle")) {
    const Obj o = r.sub("oracle");
    cfg.oracle.t0 = o.num("t0", cfg.oracle.t0);
    cfg.oracle.multiplier = o.num("multiplier", cfg.oracle.multiplier);
    cfg.oracle.outer_steps =
        static_cast<int>(o.integer("outer_steps", cfg.oracle.outer_steps));
    cfg.oracle.inner_tol = o.num("inner_tol", cfg.oracle.inner_tol);
    cfg.oracle.max_inner =
        static_cast<int>(o.integer("max_inner", cfg.oracle.max_inner));
    o.reject_unknown();
  }
  if (r.has("evm")) {
    const Obj e = r.sub("evm");
    const std::string mode = e.str("mode", "wideband");
    if (mode == "wideband") {
      cfg.evm.mode = EvmConstraint::Mode::kWideband;
      cfg.evm.eps_avg = e.num("wideband_fraction", cfg.evm.eps_avg);
    } else if (mode == "frequency_selective") {
      cfg.evm.mode = EvmConstraint::Mode::kFrequencySelective;
      if (e.has("per_subcarrier_fraction") == e.has("profile"))
        e.fail("", "frequency_selective needs exactly one of "
                   "per_subcarrier_fraction or profile");
      if (e.has("per_subcarrier_fraction")) {
        cfg.evm.eps = e.nums("per_subcarrier_fraction");
      } else {
        const Obj p = e.sub("profile");
        cfg.evm_from_profile = true;
        if (p.has("prb_fraction"))
          cfg.evm_profile.prb = parse_entries(p, "prb_fraction");
        if (p.has("edges_fraction"))
          cfg.evm_profile.edges = parse_entries(p, "edges_fraction");
        cfg.evm_profile.interior = p.num("interior_fraction", -1.0);
        p.reject_unknown();
        cfg.evm.eps = with_path(e.field("profile"), [&] {
          return expand_evm_profile(cfg.evm_profile, cfg.numerology);
        });
      }
      cfg.evm.eps_avg = pooled_evm_budget(cfg.evm.eps);
    } else {
      e.fail("mode", "expected \"wideband\" or \"frequency_selective\"");
    }
    e.reject_unknown();
  }
  cfg.antennas = static_cast<int>(r.integer("antennas", 1));
  with_path("constellation", [&] {
    cfg.constellation = parse_constellation(r.str("constellation", "64qam"));
  });
  cfg.seed = r.u64("seed", 1);
  cfg.symbols = static_cast<int>(r.integer("symbols", 100));
  if (r.has("psd")) {
    const Obj p = r.sub("psd");
    cfg.psd_oversample = static_cast<int>(p.integer("oversample", 4));
    p.reject_unknown();
  }
  if (r.has("aclr")) {
    const Obj a = r.sub("aclr");
    cfg.aclr.bandwidth_hz = a.num("bandwidth_hz", cfg.aclr.bandwidth_hz);
    cfg.aclr.spacing_hz = a.num("spacing_hz", cfg.aclr.spacing_hz);
    if (a.has("center_hz")) {
      const json& c = a.at("center_hz");
      if (c.is_string() && c.get<std::string>() == "active") {
        cfg.aclr.center_from_active = true;
      } else if (c.is_number()) {
        cfg.aclr.center_from_active = false;
        cfg.aclr.center_hz = c.get<double>();
      } else {
        a.fail("center_hz", "expected a number or \"active\"");
      }
    }
    a.reject_unknown();
  }
  if (r.has("output")) {
    const Obj o = r.sub("output");
    cfg.out_dir = o.str("directory", cfg.out_dir);
    cfg.emit_waveforms = o.boolean("emit_waveforms", false);
    o.reject_unknown();
  }
  cfg.threads = static_cast<int>(r.integer("threads", 0));
  r.reject_unknown();
  cfg.validate();
  return cfg;
}

ScenarioConfig load_scenario_file(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw ConfigError("cannot read config file " + path);
  std::ostringstream ss;
  ss << is.rdbuf();
  return parse_scenario_json(ss.str());
}

std::string scenario_to_json(const ScenarioConfig& cfg) {
  json j;
  j["numerology"] = {{"fft_size", cfg.numerology.fft_size},
                     {"cp_len_samples", cfg.numerology.cp_len},
                     {"subcarrier_spacing_hz", cfg.numerology.scs_hz},
                     {"active_first_subcarrier", cfg.active_first},
                     {"active_count", cfg.active_count},
                     {"prb_size", cfg.numerology.prb_size}};
  j["frequency_points_hz"] = cfg.freq_points_hz;
  j["mask"] = {{"reference_db_per_100khz", cfg.reference_db},
               {"levels_db_per_100khz", cfg.mask_db}};
  if (!cfg.mask_db_per_antenna.empty())
    j["mask"]["per_antenna_levels_db_per_100khz"] = cfg.mask_db_per_antenna;
  j["precoder"] = precoder_name(cfg.precoder);
  j["admm"] = {{"rho", cfg.admm.rho},
               {"iterations", cfg.admm.iters},
               {"init", init_name(cfg.admm.init)},
               {"residual_tol_fraction", cfg.admm.residual_tol},
               {"record_trace", cfg.admm.record_trace}};
  j["ssp"] = {{"sweeps", cfg.ssp.sweeps},
              {"phi_rad", cfg.ssp.phi},
              {"clamp_nonnegative", cfg.ssp.clamp_nonneg},
              {"record_trace", cfg.ssp.record_trace}};
  j["essp"] = {{"outer_iterations", cfg.essp.outer_iters},
               {"inner_sweeps", cfg.essp.inner_sweeps},
               {"relaxation", cfg.essp.relaxation},
               {"tau", cfg.essp.tau},
               {"early_stop", cfg.essp.early_stop},
               {"z_init", zinit_name(cfg.essp.z_init)},
               {"phi_rad", cfg.essp.phi},
               {"record_trace", cfg.essp.record_trace}};
  j["oracle"] = {{"t0", cfg.oracle.t0},
                 {"multiplier", cfg.oracle.multiplier},
                 {"outer_steps", cfg.oracle.outer_steps},
                 {"inner_tol", cfg.oracle.inner_tol},
                 {"max_inner", cfg.oracle.max_inner}};
  if (cfg.evm.mode == EvmConstraint::Mode::kWideband) {
    j["evm"] = {{"mode", "wideband"}, {"wideband_fraction", cfg.evm.eps_avg}};
  } else if (cfg.evm_from_profile) {
    json p;
    if (!cfg.evm_profile.prb.empty())
      p["prb_fraction"] = entries_to_json(cfg.evm_profile.prb);
    if (!cfg.evm_profile.edges.empty())
      p["edges_fraction"] = entries_to_json(cfg.evm_profile.edges);
    if (cfg.evm_profile.interior >= 0.0)
      p["interior_fraction"] = cfg.evm_profile.interior;
    j["evm"] = {{"mode", "frequency_selective"}, {"profile", p}};
  } else {
    j["evm"] = {{"mode", "frequency_selective"},
                {"per_subcarrier_fraction", cfg.evm.eps}};
  }
  j["antennas"] = cfg.antennas;
  j["constellation"] = constellation_name(cfg.constellation);
  j["seed"] = cfg.seed;
  j["symbols"] = cfg.symbols;
  j["psd"] = {{"oversample", cfg.psd_oversample}};
  j["aclr"] = {{"bandwidth_hz", cfg.aclr.bandwidth_hz},
               {"spacing_hz", cfg.aclr.spacing_hz}};
  if (cfg.aclr.center_from_active)
    j["aclr"]["center_hz"] = "active";
  else
    j["aclr"]["center_hz"] = cfg.aclr.center_hz;
  j["output"] = {{"directory", cfg.out_dir},
                 {"emit_waveforms", cfg.emit_waveforms}};
  j["threads"] = cfg.threads;
  return j.dump(2);
}

// ---------------------------------------------------------------------------

std::string sha256_file(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw IoError("cannot open " + path + " for hashing");
  std::unique_ptr<EVP_MD_CTX, decltype(&EVP_MD_CTX_free)> ctx(
      EVP_MD_CTX_new(), &EVP_MD_CTX_free);
  if (!ctx || EVP_DigestInit_ex(ctx.get(), EVP_sha256(), nullptr) != 1)
    throw IoError("SHA-256 unavailable");
  std::vector<char> buf(1 << 16);
  while (is) {
    is.read(buf.data(), static_cast<std::streamsize>(buf.size()));
    const std::streamsize got = is.gcount();
    if (got > 0 &&
        EVP_DigestUpdate(ctx.get(), buf.data(), static_cast<size_t>(got)) != 1)
      throw IoError("SHA-256 update failed");
  }
  unsigned char md[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  if (EVP_DigestFinal_ex(ctx.get(), md, &len) != 1)
    throw IoError("SHA-256 final failed");
  static const char* hex = "0123456789abcdef";
  std::string out;
  for (unsigned int i = 0; i < len; ++i) {
    out.push_back(hex[md[i] >> 4]);
    out.push_back(hex[md[i] & 15]);
  }
  return out;
}

RunManifest run_scenario(const ScenarioConfig& cfg) {
  cfg.validate();
  const auto t_start = std::chrono::steady_clock::now();
  RunManifest man;
  man.config_json = scenario_to_json(cfg);
  man.version = version();

  const OfdmNumerology& num = cfg.numerology;
  const double unit_ref = unit_power_reference(num, cfg.psd_oversample);
  PsdConfig pcfg;
  pcfg.oversample = cfg.psd_oversample;
  pcfg.reference_db = cfg.reference_db;
  pcfg.unit_reference = unit_ref;

  Shared sh{cfg,
            restrict_to_active(
                build_kernel(num, FrequencyGrid::from_hz(cfg.freq_points_hz,
                                                         num.scs_hz)),
                num),
            {},
            nullptr,
            cfg.evm.eps,
            cfg.evm,
            PsdAccumulator(num, pcfg)};
  if (cfg.mask_db_per_antenna.empty()) {
    sh.masks.push_back(calibrate_mask(cfg.mask_db, cfg.reference_db, unit_ref));
  } else {
    for (const auto& row : cfg.mask_db_per_antenna)
      sh.masks.push_back(calibrate_mask(row, cfg.reference_db, unit_ref));
  }
  if (cfg.precoder == Precoder::kNsp || cfg.precoder == Precoder::kEnsp)
    sh.notch = std::make_unique<NotchProjector>(sh.kernel);
  man.timings_s.emplace_back("setup", elapsed_s(t_start));

  const fs::path dir(cfg.out_dir);
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw IoError("cannot create " + dir.string() + ": " + ec.message());

  std::unique_ptr<WaveformWriter> wave, gridw;
  if (cfg.emit_waveforms) {
    wave = std::make_unique<WaveformWriter>((dir / "waveform.bin").string(),
                                            num.symbol_length());
    gridw = std::make_unique<WaveformWriter>((dir / "grid.bin").string(),
                                             num.fft_size);
  }

  int threads = cfg.threads > 0
                    ? cfg.threads
                    : static_cast<int>(std::thread::hardware_concurrency());
  threads = std::max(1, std::min(threads, cfg.symbols));

  const int n = num.fft_size;
  const int m_count = sh.kernel.rows();
  PsdAccumulator psd(num, pcfg);
  std::vector<double> err_sq(n, 0.0), ref_sq(n, 0.0), oobe(m_count, 0.0);
  std::vector<TraceAcc> trace;
  RunSummary& sum = man.summary;
  double iter_acc = 0.0;
  double evm_num = 0.0, evm_den = 0.0;
  sum.evm_budget_excess_max = -INFINITY;
  bool any_budget = false;

  const auto t_solve = std::chrono::steady_clock::now();
  // Blocks of symbols are solved in parallel and folded in index order so the
  // floating-point reduction does not depend on the thread count.
  const int block = std::max(threads * 4, 16);
  std::vector<SymbolResult> results;
  for (int base = 0; base < cfg.symbols; base += block) {
    const int count = std::min(block, cfg.symbols - base);
    results.assign(count, SymbolResult{});
    std::atomic<int> next{0};
    std::exception_ptr first_error;
    long long error_symbol = -1;
    std::mutex error_mu;
    auto worker = [&] {
      for (;;) {
        const int i = next.fetch_add(1);
        if (i >= count) return;
        try {
          results[i] = run_symbol(sh, base + i);
        } catch (...) {
          std::lock_guard<std::mutex> lock(error_mu);
          if (error_symbol < 0 || base + i < error_symbol) {
            error_symbol = base + i;
            first_error = std::current_exception();
          }
        }
      }
    };
    std::vector<std::thread> pool;
    for (int t = 1; t < std::min(threads, count); ++t) pool.emplace_back(worker);
    worker();
    for (auto& t : pool) t.join();
    if (first_error) {
      try {
        std::rethrow_exception(first_error);
      } catch (const ConfigError&) {
        throw;
      } catch (const std::exception& e) {
        throw SymbolError(error_symbol, e.what());
      }
    }

    for (int i = 0; i < count; ++i) {
      SymbolResult& r = results[i];
      psd.add_periodogram(r.periodogram, cfg.antennas);
      for (int k = 0; k < n; ++k) {
        err_sq[k] += r.err_sq[k];
        ref_sq[k] += r.ref_sq[k];
        evm_num += r.err_sq[k];
        evm_den += r.ref_sq[k];
      }
      for (int m = 0; m < m_count; ++m) oobe[m] += r.oobe[m];
      sum.evm_max_symbol = std::max(sum.evm_max_symbol, r.evm);
      if (!std::isnan(r.budget_excess)) {
        any_budget = true;
        sum.evm_budget_excess_max =
            std::max(sum.evm_budget_excess_max, r.budget_excess);
      }
      sum.mask_ratio_max = std::max(sum.mask_ratio_max, r.mask_ratio_max);
      iter_acc += r.iterations;
      sum.early_stops += r.early_stopped ? 1 : 0;
      if (trace.size() < r.trace.size()) trace.resize(r.trace.size());
      for (size_t t = 0; t < r.trace.size(); ++t) {
        if (r.trace_weight[t] == 0) continue;
        TraceAcc& a = trace[t];
        a.evm += r.trace[t].evm_wideband;
        if (a.oobe.empty()) a.oobe.assign(m_count, 0.0);
        for (int m = 0; m < m_count; ++m) a.oobe[m] += r.trace[t].oobe[m];
        a.primal += r.trace[t].primal_res;
        a.dual += r.trace[t].dual_res;
        a.count += 1;
      }
      if (wave) {
        wave->append(r.time);
        gridw->append(r.xbar);
      }
    }
  }
  man.timings_s.emplace_back("precode", elapsed_s(t_solve));
  if (wave) {
    wave->close();
    gridw->close();
  }

  const auto t_write = std::chrono::steady_clock::now();
  man.psd = psd.finish();
  const double center = cfg.aclr_center_hz();
  sum.aclr = aclr(man.psd, cfg.aclr.bandwidth_hz, cfg.aclr.spacing_hz, center);
  sum.evm_pooled = evm_den > 0.0 ? std::sqrt(evm_num / evm_den) : 0.0;
  if (!any_budget) sum.evm_budget_excess_max = std::nan("");
  sum.mean_iterations = iter_acc / cfg.symbols;
  const double denom = static_cast<double>(cfg.symbols) * cfg.antennas;
  for (int m = 0; m < m_count; ++m)
    sum.oobe_db.push_back(10.0 * std::log10(std::max(oobe[m] / denom, 1e-300)));
  {
    // Mean density over the central half of the active block.
    const double half = cfg.active_count / 4.0;
    const double mid = center / num.scs_hz;
    const double pw = man.psd.mean_power(mid - half, mid + half);
    sum.inband_density_db =
        cfg.reference_db + 10.0 * std::log10(std::max(pw, 1e-300) / unit_ref);
  }

  {
    std::ostringstream os;
    os << "iter,evm_wideband";
    for (int m = 0; m < m_count; ++m) os << ",oobe_power_" << (m + 1);
    os << ",primal_res,dual_res\n";
    for (size_t t = 0; t < trace.size(); ++t) {
      const TraceAcc& a = trace[t];
      if (a.count == 0) continue;
      const double c = static_cast<double>(a.count);
      os << (t + 1) << ',' << fmt(a.evm / c);
      for (int m = 0; m < m_count; ++m) os << ',' << fmt(a.oobe[m] / c);
      os << ',' << fmt(a.primal / c) << ',' << fmt(a.dual / c) << '\n';
    }
    write_text(dir / "trace.csv", os.str());
  }
  {
    std::ostringstream os;
    os << "bin,subcarrier,evm,budget\n";
    for (int i = 0; i < num.num_active(); ++i) {
      const int k = num.active_set[i];
      const double e =
          ref_sq[k] > 0.0 ? std::sqrt(err_sq[k] / ref_sq[k]) : std::nan("");
      double budget = std::nan("");
      const bool constrained = cfg.precoder == Precoder::kEnsp ||
                               cfg.precoder == Precoder::kEadmm ||
                               cfg.precoder == Precoder::kEssp;
      if (constrained)
        budget = cfg.evm.mode == EvmConstraint::Mode::kWideband
                     ? cfg.evm.eps_avg
                     : cfg.evm.eps[i];
      os << k << ',' << num.signed_index(k) << ',' << fmt(e) << ','
         << fmt(budget) << '\n';
    }
    write_text(dir / "evm_subcarrier.csv", os.str());
  }
  {
    std::ostringstream os;
    os << "freq_hz,density_db\n";
    for (size_t i = 0; i < man.psd.freq_hz.size(); ++i)
      os << fmt(man.psd.freq_hz[i]) << ',' << fmt(man.psd.density_db[i])
         << '\n';
    write_text(dir / "psd.csv", os.str());
  }
  {
    std::ostringstream os;
    os << "precoder,symbols,aclr_lower_db,aclr_upper_db,aclr_worst_db,"
          "evm_wideband,evm_max_symbol,evm_budget_excess_max,"
          "mask_ratio_max,mean_iterations,early_stops,inband_density_db";
    for (int m = 0; m < m_count; ++m) os << ",oobe_db_" << (m + 1);
    os << '\n';
    os << precoder_name(cfg.precoder) << ',' << cfg.symbols << ','
       << fmt(sum.aclr.lower_db) << ',' << fmt(sum.aclr.upper_db) << ','
       << fmt(sum.aclr.worst_db) << ',' << fmt(sum.evm_pooled) << ','
       << fmt(sum.evm_max_symbol) << ',' << fmt(sum.evm_budget_excess_max)
       << ',' << fmt(sum.mask_ratio_max) << ',' << fmt(sum.mean_iterations)
       << ',' << sum.early_stops << ',' << fmt(sum.inband_density_db);
    for (double v : sum.oobe_db) os << ',' << fmt(v);
    os << '\n';
    write_text(dir / "summary.csv", os.str());
  }
  write_text(dir / "config.json", man.config_json + "\n");

  std::vector<std::string> names = {"config.json", "trace.csv",
                                    "evm_subcarrier.csv", "psd.csv",
                                    "summary.csv"};
  if (cfg.emit_waveforms) {
    names.push_back("waveform.bin");
    names.push_back("grid.bin");
  }
  for (const auto& name : names) {
    const fs::path p = dir / name;
    man.files.push_back(
        {name, static_cast<std::uint64_t>(fs::file_size(p)),
         sha256_file(p.string())});
  }
  man.timings_s.emplace_back("write", elapsed_s(t_write));
  man.timings_s.emplace_back("total", elapsed_s(t_start));

  json mj;
  mj["version"] = man.version;
  mj["config"] = json::parse(man.config_json);
  json timings = json::object();
  for (const auto& [k, v] : man.timings_s) timings[k + "_s"] = v;
  mj["timings"] = timings;
  json files = json::array();
  for (const auto& f : man.files)
    files.push_back({{"name", f.name}, {"bytes", f.bytes}, {"sha256", f.sha256}});
  mj["files"] = files;
  write_text(dir / "manifest.json", mj.dump(2) + "\n");
  return man;
}

}  // namespace specprec
