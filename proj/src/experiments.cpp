#include "pairsim/experiments.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <complex>
#include <cstdint>
#include <filesystem>
#include <iostream>
#include <map>
#include <string>
#include <vector>

#ifdef _OPENMP
#include <omp.h>
#endif

#include "pairsim/constants.hpp"
#include "pairsim/cosmo.hpp"
#include "pairsim/entangle.hpp"
#include "pairsim/errors.hpp"
#include "pairsim/fock.hpp"
#include "pairsim/gaussian.hpp"
#include "pairsim/io.hpp"
#include "pairsim/ramps.hpp"
#include "pairsim/tomography.hpp"

namespace pairsim::experiments {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

class Stopwatch {
 public:
  double seconds() const {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() -
                                         start_)
        .count();
  }

 private:
  std::chrono::steady_clock::time_point start_ =
      std::chrono::steady_clock::now();
};

void require_object(const json& j, const std::string& where) {
  if (!j.is_object()) throw ConfigError(where + " must be a JSON object");
}

/// Schema guard: every required key present, nothing outside the allowed set.
void check_keys(const json& obj, const std::string& where,
                const std::vector<std::string>& required,
                const std::vector<std::string>& optional) {
  require_object(obj, where);
  for (const auto& key : required)
    if (!obj.contains(key))
      throw ConfigError(where + " is missing required key '" + key + "'");
  for (const auto& item : obj.items()) {
    const std::string& key = item.key();
    if (std::find(required.begin(), required.end(), key) == required.end() &&
        std::find(optional.begin(), optional.end(), key) == optional.end())
      throw ConfigError("unknown key '" + key + "' in " + where);
  }
}

double get_num(const json& obj, const std::string& where,
               const std::string& key) {
  if (!obj.contains(key) || !obj[key].is_number())
    throw ConfigError(where + "." + key + " must be a number");
  return obj[key].get<double>();
}

double get_num_or(const json& obj, const std::string& where,
                  const std::string& key, double fallback) {
  if (!obj.contains(key)) return fallback;
  if (!obj[key].is_number())
    throw ConfigError(where + "." + key + " must be a number");
  return obj[key].get<double>();
}

int get_int_or(const json& obj, const std::string& where,
               const std::string& key, int fallback) {
  if (!obj.contains(key)) return fallback;
  if (!obj[key].is_number_integer())
    throw ConfigError(where + "." + key + " must be an integer");
  return obj[key].get<int>();
}

bool get_bool_or(const json& obj, const std::string& where,
                 const std::string& key, bool fallback) {
  if (!obj.contains(key)) return fallback;
  if (!obj[key].is_boolean())
    throw ConfigError(where + "." + key + " must be a boolean");
  return obj[key].get<bool>();
}

std::string get_str(const json& obj, const std::string& where,
                    const std::string& key) {
  if (!obj.contains(key) || !obj[key].is_string())
    throw ConfigError(where + "." + key + " must be a string");
  return obj[key].get<std::string>();
}

std::vector<double> get_num_list(const json& obj, const std::string& where) {
  if (!obj.is_array()) throw ConfigError(where + " must be an array");
  std::vector<double> out;
  out.reserve(obj.size());
  for (const auto& v : obj) {
    if (!v.is_number()) throw ConfigError(where + " must hold numbers only");
    out.push_back(v.get<double>());
  }
  return out;
}

/// The parameters block of a validated top-level config.
const json& params_of(const json& config, const std::string& experiment) {
  check_keys(config, "config", {"schema", "experiment", "parameters"}, {});
  if (!config["schema"].is_string() ||
      config["schema"].get<std::string>() != "pairsim/1")
    throw ConfigError("config.schema must be \"pairsim/1\"");
  if (!config["experiment"].is_string() ||
      config["experiment"].get<std::string>() != experiment)
    throw ConfigError("config.experiment must be \"" + experiment + "\"");
  require_object(config["parameters"], "config.parameters");
  return config["parameters"];
}

ramps::TrapCalibration calibration_from(const json& p) {
  if (!p.contains("calibration"))
    throw ConfigError("parameters.calibration is required");
  const json& c = p["calibration"];
  check_keys(c, "calibration", {"kappa_rf", "omega_dc", "omega_lf"}, {});
  ramps::TrapCalibration cal;
  cal.kappa_rf = get_num(c, "calibration", "kappa_rf");
  cal.omega_dc = get_num(c, "calibration", "omega_dc");
  cal.omega_lf = get_num(c, "calibration", "omega_lf");
  return cal;
}

ramps::PulseSpec pulse_from(const json& p, bool need_t_ramp) {
  if (!p.contains("pulse")) throw ConfigError("parameters.pulse is required");
  const json& j = p["pulse"];
  std::vector<std::string> required = {"t_hold", "u_high", "u_low"};
  std::vector<std::string> optional = {"smooth_order", "t_delay",
                                       "filter_bandwidth"};
  (need_t_ramp ? required : optional).push_back("t_ramp");
  check_keys(j, "pulse", required, optional);
  ramps::PulseSpec spec;
  spec.t_ramp = get_num_or(j, "pulse", "t_ramp", 1.0e-6);
  spec.t_hold = get_num(j, "pulse", "t_hold");
  spec.u_high = get_num(j, "pulse", "u_high");
  spec.u_low = get_num(j, "pulse", "u_low");
  spec.smooth_order = get_int_or(j, "pulse", "smooth_order", 2);
  spec.t_delay = get_num_or(j, "pulse", "t_delay", 0.0);
  spec.filter_bandwidth = get_num_or(j, "pulse", "filter_bandwidth", 0.0);
  spec.validate();
  return spec;
}

/// Common single-mode run settings shared by the pulse experiments.
struct PulseRun {
  ramps::TrapCalibration cal;
  ramps::PulseSpec pulse;
  double grid_dt = 0.0;
  double t_settle_pre = 0.0;
  double t_settle_post = 0.0;
  gaussian::Drive drive;
  bool svg = true;
};

PulseRun pulse_run_from(const json& p, bool need_t_ramp) {
  PulseRun run;
  run.cal = calibration_from(p);
  run.pulse = pulse_from(p, need_t_ramp);
  run.grid_dt =
      get_num_or(p, "parameters", "grid_dt",
                 ramps::default_grid_dt(
                     ramps::rocking_of_u(run.pulse.u_high, run.cal)));
  run.t_settle_pre = get_num_or(p, "parameters", "t_settle_pre", 0.0);
  run.t_settle_post = get_num_or(p, "parameters", "t_settle_post", 0.0);
  run.drive.force_newton =
      get_num_or(p, "parameters", "ion_charge_c", kElementaryCharge) *
      get_num_or(p, "parameters", "stray_field_v_per_m", 0.0);
  run.drive.mass_kg = get_num_or(p, "parameters", "ion_mass_kg", kMg25MassKg);
  run.svg = get_bool_or(p, "parameters", "svg", true);
  return run;
}

/// Final-state summary of one evolution, read out at the instantaneous
/// frequency of the last sample.
struct Readout {
  double r = 0.0, theta = 0.0, abs_alpha = 0.0, n_pair = 0.0;
  double n_th = 0.0, purity = 0.0, mean_n = 0.0;
  std::complex<double> alpha;
};

Readout read_out(const gaussian::Trajectory& traj) {
  const gaussian::GaussianState phys =
      traj.states.back().rescaled(traj.omega_inst.back());
  const gaussian::SqueezeParams sp = gaussian::squeeze_params(phys);
  Readout out;
  out.r = sp.r;
  out.theta = sp.theta;
  out.n_th = sp.n_th;
  out.alpha = gaussian::displacement(phys);
  out.abs_alpha = std::abs(out.alpha);
  out.purity = phys.purity();
  out.mean_n = gaussian::mean_phonons(phys);
  out.n_pair = gaussian::bogoliubov(traj.transfers.back(),
                                    traj.initial.omega_ref,
                                    traj.omega_inst.back())
                   .n_pair();
  return out;
}

Readout evolve_profile(const ramps::FrequencyProfile& profile,
                       const gaussian::Drive& drive) {
  const auto traj = gaussian::evolve(
      gaussian::GaussianState::vacuum(profile.omega().front()), profile,
      drive);
  return read_out(traj);
}

json readout_json(const Readout& r) {
  return json{{"r", r.r},
              {"theta", r.theta},
              {"abs_alpha", r.abs_alpha},
              {"n_pair", r.n_pair},
              {"n_bar_thermal", r.n_th},
              {"n_bar_total", r.mean_n},
              {"purity", r.purity}};
}

void write_csv(const std::string& path, const std::string& header,
               const std::vector<std::vector<double>>& rows) {
  std::string text = header;
  text += '\n';
  for (const auto& row : rows) {
    for (std::size_t i = 0; i < row.size(); ++i) {
      if (i) text += ',';
      text += io::format_double(row[i]);
    }
    text += '\n';
  }
  io::write_text_file(path, text);
}

std::string hash_hex(std::uint64_t h) {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx",
                static_cast<unsigned long long>(h));
  return buf;
}

/// run_record.json: config snapshot, version, timing, manifest, input hash.
/// Wall time varies run to run, so determinism checks compare the listed
/// outputs, not the record itself.
void write_run_record(const json& config, const RunContext& ctx,
                      std::vector<std::string> outputs,
                      const Stopwatch& watch) {
  json record{
      {"schema", "pairsim-run/1"},
      {"toolkit_version", kToolkitVersion},
      {"config", config},
      {"seed", ctx.seed},
      {"jobs", ctx.jobs},
      {"input_hash",
       hash_hex(io::fnv1a64(config.dump() + ":" + std::to_string(ctx.seed)))},
      {"outputs", outputs},
      {"wall_time_s", watch.seconds()}};
  io::write_text_file((fs::path(ctx.output_dir) / "run_record.json").string(),
                      record.dump(2) + "\n");
}

void write_results(const fs::path& dir, const json& summary) {
  io::write_text_file((dir / "results.json").string(), summary.dump(2) + "\n");
}

/// Fan a sweep out over the worker pool; results land by index. Exceptions
/// cannot cross the parallel region, so they are carried out by message.
template <typename Body>
void parallel_sweep(int jobs, std::size_t count, const Body& body) {
  std::vector<std::string> errors(count);
#ifdef _OPENMP
#pragma omp parallel for schedule(dynamic) num_threads(std::max(1, jobs))
#endif
  for (std::int64_t i = 0; i < static_cast<std::int64_t>(count); ++i) {
    try {
      body(static_cast<std::size_t>(i));
    } catch (const std::exception& e) {
      errors[static_cast<std::size_t>(i)] = e.what();
    }
  }
  for (const auto& message : errors)
    if (!message.empty()) throw NumericalError(message);
}

std::vector<double> sweep_values(const json& p, const std::string& key) {
  if (!p.contains(key)) throw ConfigError("parameters." + key + " is required");
  const json& j = p[key];
  require_object(j, "parameters." + key);
  if (j.contains("values")) {
    check_keys(j, key, {"values"}, {});
    return get_num_list(j["values"], key + ".values");
  }
  check_keys(j, key, {"min", "max", "count"}, {});
  const double lo = get_num(j, key, "min");
  const double hi = get_num(j, key, "max");
  const int count = get_int_or(j, key, "count", 0);
  if (count < 2 || !(hi > lo))
    throw ConfigError(key + " range needs max > min and count >= 2");
  std::vector<double> out(static_cast<std::size_t>(count));
  for (int i = 0; i < count; ++i)
    out[static_cast<std::size_t>(i)] =
        lo + (hi - lo) * static_cast<double>(i) / (count - 1);
  return out;
}

cosmo::History history_from(const json& h) {
  require_object(h, "history");
  if (h.contains("preset")) {
    check_keys(h, "history", {"preset"}, {});
    const json& pr = h["preset"];
    const std::string type = get_str(pr, "preset", "type");
    if (type == "constant") {
      check_keys(pr, "preset", {"type", "value"}, {});
      return cosmo::History::constant(get_num(pr, "preset", "value"));
    }
    if (type == "de_sitter_proper") {
      check_keys(pr, "preset", {"type", "hubble"}, {});
      return cosmo::History::de_sitter_proper(get_num(pr, "preset", "hubble"));
    }
    if (type == "de_sitter_conformal") {
      check_keys(pr, "preset", {"type", "hubble"}, {});
      return cosmo::History::de_sitter_conformal(
          get_num(pr, "preset", "hubble"));
    }
    if (type == "power_law") {
      check_keys(pr, "preset", {"type", "exponent", "t_ref"}, {});
      return cosmo::History::power_law(get_num(pr, "preset", "exponent"),
                                       get_num(pr, "preset", "t_ref"));
    }
    if (type == "sauter_pulse") {
      check_keys(pr, "preset", {"type", "e0", "omega0"}, {});
      return cosmo::History::sauter_pulse(get_num(pr, "preset", "e0"),
                                          get_num(pr, "preset", "omega0"));
    }
    throw ConfigError("unknown history preset: " + type);
  }
  if (h.contains("samples")) {
    check_keys(h, "history", {"samples"}, {});
    const json& s = h["samples"];
    check_keys(s, "samples", {"times", "values"}, {"smooth_window"});
    return cosmo::History::from_samples(
        get_num_list(s["times"], "samples.times"),
        get_num_list(s["values"], "samples.values"),
        get_int_or(s, "samples", "smooth_window", 7));
  }
  if (h.contains("csv")) {
    check_keys(h, "history", {"csv"}, {"smooth_window"});
    const io::CsvTable table = io::read_csv(get_str(h, "history", "csv"));
    std::vector<double> ts, vs;
    ts.reserve(table.rows.size());
    vs.reserve(table.rows.size());
    for (std::size_t i = 0; i < table.rows.size(); ++i) {
      if (table.rows[i].size() < 2)
        throw IoError("history csv row " + std::to_string(i + 2) +
                      " needs two columns");
      ts.push_back(std::stod(table.rows[i][0]));
      vs.push_back(std::stod(table.rows[i][1]));
    }
    return cosmo::History::from_samples(
        ts, vs, get_int_or(h, "history", "smooth_window", 7));
  }
  throw ConfigError("history needs one of: preset, samples, csv");
}

cosmo::ScenarioSpec scenario_from(const json& p) {
  if (!p.contains("scenario"))
    throw ConfigError("parameters.scenario is required");
  const json& s = p["scenario"];
  check_keys(s, "scenario", {"kind"},
             {"history", "mode_k", "mass", "charge", "surface_gravity",
              "hawking_cutoff", "natural_units"});
  cosmo::ScenarioSpec spec;
  spec.kind = cosmo::scenario_kind_from_string(get_str(s, "scenario", "kind"));
  if (s.contains("history")) spec.history = history_from(s["history"]);
  spec.mode_k = get_num_or(s, "scenario", "mode_k", 0.0);
  spec.mass = get_num_or(s, "scenario", "mass", 0.0);
  spec.charge = get_num_or(s, "scenario", "charge", 0.0);
  spec.surface_gravity = get_num_or(s, "scenario", "surface_gravity", 0.0);
  spec.hawking_cutoff = get_num_or(s, "scenario", "hawking_cutoff", 1.0e-3);
  spec.natural_units = get_bool_or(s, "scenario", "natural_units", true);
  return spec;
}

}  // namespace

json run_single_pulse(const json& config, const RunContext& ctx) {
  Stopwatch watch;
  const json& p = params_of(config, "single_pulse");
  check_keys(p, "parameters", {"calibration", "pulse"},
             {"grid_dt", "t_settle_pre", "t_settle_post", "stray_field_v_per_m",
              "ion_mass_kg", "ion_charge_c", "pn_n_max", "fock_check", "svg"});
  const PulseRun run = pulse_run_from(p, /*need_t_ramp=*/true);
  const int pn_n_max = get_int_or(p, "parameters", "pn_n_max", 32);
  if (pn_n_max < 2) throw ConfigError("pn_n_max must be >= 2");

  bool fock_enabled = false;
  int fock_n_max = 128;
  if (p.contains("fock_check")) {
    const json& f = p["fock_check"];
    check_keys(f, "fock_check", {}, {"enabled", "n_max"});
    fock_enabled = get_bool_or(f, "fock_check", "enabled", true);
    fock_n_max = get_int_or(f, "fock_check", "n_max", 128);
  }

  const auto profile = ramps::build_pulse(run.pulse, run.cal, run.grid_dt,
                                          run.t_settle_pre, run.t_settle_post);
  const auto traj = gaussian::evolve(
      gaussian::GaussianState::vacuum(profile.omega().front()), profile,
      run.drive);
  const Readout out = read_out(traj);

  const fs::path dir(ctx.output_dir);
  std::vector<std::string> outputs = {"results.json", "trajectory.csv",
                                      "pn.csv"};
  const auto rows = gaussian::physical_rows(traj);
  gaussian::write_trajectory_csv((dir / "trajectory.csv").string(), rows);

  const auto pn = fock::phonon_distribution(fock::squeezed_displaced_thermal(
      out.r, out.theta, out.alpha, out.n_th, pn_n_max,
      traj.omega_inst.back()));
  fock::write_distribution_csv((dir / "pn.csv").string(), pn);

  json summary{{"experiment", "single_pulse"}, {"final", readout_json(out)}};

  if (fock_enabled) {
    fock::FockEvolveOptions fopts;
    const auto ftraj = fock::evolve_fixed_basis(
        fock::make_vacuum(fock_n_max, profile.omega().front()), profile,
        run.drive, fopts);
    const auto& m = ftraj.moments.back();
    gaussian::GaussianState fstate;
    fstate.mean << m.mean_x(), m.mean_p();
    fstate.cov << m.cov_xx(), m.cov_xp(), m.cov_xp(), m.cov_pp();
    fstate.omega_ref = profile.omega().front();
    const gaussian::GaussianState fphys =
        fstate.rescaled(traj.omega_inst.back());
    const auto fsp = gaussian::squeeze_params(fphys);
    const double falpha = std::abs(gaussian::displacement(fphys));
    summary["fock_check"] = json{
        {"n_max", fock_n_max},
        {"r", fsp.r},
        {"abs_alpha", falpha},
        {"delta_r", std::abs(fsp.r - out.r)},
        {"delta_abs_alpha", std::abs(falpha - out.abs_alpha)},
        {"unitarity_defect", ftraj.unitarity_defect}};
  }

  if (run.svg) {
    io::SvgSeries mean{"<X>", "#1f6fb2", {}, {}};
    io::SvgSeries vxx{"var X", "#c23b22", {}, {}};
    io::SvgSeries vpp{"var P", "#2a9d5c", {}, {}};
    for (const auto& row : rows) {
      mean.x.push_back(row.t);
      mean.y.push_back(row.mean_x);
      vxx.x.push_back(row.t);
      vxx.y.push_back(row.cov_xx);
      vpp.x.push_back(row.t);
      vpp.y.push_back(row.cov_pp);
    }
    io::write_svg_plot((dir / "traces.svg").string(), "single pulse traces",
                       "t (s)", "quadrature", {mean, vxx, vpp});
    outputs.push_back("traces.svg");
  }

  write_results(dir, summary);
  write_run_record(config, ctx, outputs, watch);
  return summary;
}

json run_echo_sweep(const json& config, const RunContext& ctx) {
  Stopwatch watch;
  const json& p = params_of(config, "echo_sweep");
  check_keys(p, "parameters", {"calibration", "pulse", "t_free"},
             {"grid_dt", "t_settle_pre", "t_settle_post", "stray_field_v_per_m",
              "ion_mass_kg", "ion_charge_c", "svg"});
  const PulseRun run = pulse_run_from(p, /*need_t_ramp=*/true);
  const std::vector<double> t_free = sweep_values(p, "t_free");

  std::vector<Readout> results(t_free.size());
  parallel_sweep(ctx.jobs, t_free.size(), [&](std::size_t i) {
    const auto profile =
        ramps::build_echo(run.pulse, t_free[i], run.cal, run.grid_dt,
                          run.t_settle_pre, run.t_settle_post);
    results[i] = evolve_profile(profile, run.drive);
  });

  const fs::path dir(ctx.output_dir);
  std::vector<std::vector<double>> rows;
  rows.reserve(t_free.size());
  for (std::size_t i = 0; i < t_free.size(); ++i)
    rows.push_back({t_free[i], results[i].r, results[i].abs_alpha,
                    results[i].n_pair});
  write_csv((dir / "echo_sweep.csv").string(), "t_free,r,abs_alpha,n_pair",
            rows);
  std::vector<std::string> outputs = {"results.json", "echo_sweep.csv"};

  json summary{{"experiment", "echo_sweep"}, {"points", t_free.size()}};
  if (!t_free.empty()) {
    std::size_t best_r = 0, least_alpha = 0;
    for (std::size_t i = 1; i < results.size(); ++i) {
      if (results[i].r > results[best_r].r) best_r = i;
      if (results[i].abs_alpha < results[least_alpha].abs_alpha)
        least_alpha = i;
    }
    summary["max_r"] = json{{"t_free", t_free[best_r]},
                            {"r", results[best_r].r},
                            {"abs_alpha", results[best_r].abs_alpha}};
    summary["min_abs_alpha"] =
        json{{"t_free", t_free[least_alpha]},
             {"r", results[least_alpha].r},
             {"abs_alpha", results[least_alpha].abs_alpha}};
  }

  if (run.svg && !t_free.empty()) {
    io::SvgSeries sr{"r", "#1f6fb2", t_free, {}};
    io::SvgSeries sa{"|alpha|", "#c23b22", t_free, {}};
    for (const auto& res : results) {
      sr.y.push_back(res.r);
      sa.y.push_back(res.abs_alpha);
    }
    io::write_svg_plot((dir / "echo_sweep.svg").string(),
                       "echo sweep vs free evolution time", "t_free (s)",
                       "excitation", {sr, sa});
    outputs.push_back("echo_sweep.svg");
  }

  write_results(dir, summary);
  write_run_record(config, ctx, outputs, watch);
  return summary;
}

json run_ramp_study(const json& config, const RunContext& ctx) {
  Stopwatch watch;
  const json& p = params_of(config, "ramp_study");
  check_keys(p, "parameters", {"calibration", "ramp", "t_ramp"},
             {"grid_dt", "t_settle_pre", "t_settle_post", "stray_field_v_per_m",
              "ion_mass_kg", "ion_charge_c", "svg"});
  const ramps::TrapCalibration cal = calibration_from(p);
  const json& rj = p["ramp"];
  check_keys(rj, "ramp", {"u_from", "u_to"}, {"smooth_order"});
  const double u_from = get_num(rj, "ramp", "u_from");
  const double u_to = get_num(rj, "ramp", "u_to");
  const int smooth_order = get_int_or(rj, "ramp", "smooth_order", 2);
  const double grid_dt = get_num_or(
      p, "parameters", "grid_dt",
      ramps::default_grid_dt(
          std::max(ramps::rocking_of_u(u_from, cal),
                   ramps::rocking_of_u(u_to, cal))));
  const double settle_pre = get_num_or(p, "parameters", "t_settle_pre", 0.0);
  const double settle_post = get_num_or(p, "parameters", "t_settle_post", 0.0);
  gaussian::Drive drive;
  drive.force_newton =
      get_num_or(p, "parameters", "ion_charge_c", kElementaryCharge) *
      get_num_or(p, "parameters", "stray_field_v_per_m", 0.0);
  drive.mass_kg = get_num_or(p, "parameters", "ion_mass_kg", kMg25MassKg);
  const bool svg = get_bool_or(p, "parameters", "svg", true);
  const std::vector<double> t_ramp = sweep_values(p, "t_ramp");

  std::vector<Readout> results(t_ramp.size());
  parallel_sweep(ctx.jobs, t_ramp.size(), [&](std::size_t i) {
    const auto profile = ramps::build_ramp(u_from, u_to, t_ramp[i],
                                           smooth_order, cal, grid_dt,
                                           settle_pre, settle_post);
    results[i] = evolve_profile(profile, drive);
  });

  const fs::path dir(ctx.output_dir);
  std::vector<std::vector<double>> rows;
  rows.reserve(t_ramp.size());
  for (std::size_t i = 0; i < t_ramp.size(); ++i)
    rows.push_back({t_ramp[i], results[i].r, results[i].abs_alpha});
  write_csv((dir / "ramp_study.csv").string(), "t_ramp,r,abs_alpha", rows);
  std::vector<std::string> outputs = {"results.json", "ramp_study.csv"};

  json summary{{"experiment", "ramp_study"}, {"points", t_ramp.size()}};
  if (!t_ramp.empty()) {
    summary["r_first"] = results.front().r;
    summary["r_last"] = results.back().r;
    double r_max = 0.0;
    for (const auto& res : results) r_max = std::max(r_max, res.r);
    summary["r_max"] = r_max;
  }

  if (svg && !t_ramp.empty()) {
    io::SvgSeries sr{"r", "#1f6fb2", t_ramp, {}};
    io::SvgSeries sa{"|alpha|", "#c23b22", t_ramp, {}};
    for (const auto& res : results) {
      sr.y.push_back(res.r);
      sa.y.push_back(res.abs_alpha);
    }
    io::write_svg_plot((dir / "ramp_study.svg").string(),
                       "final excitation vs ramp duration", "t_ramp (s)",
                       "excitation", {sr, sa});
    outputs.push_back("ramp_study.svg");
  }

  write_results(dir, summary);
  write_run_record(config, ctx, outputs, watch);
  return summary;
}

json run_fit(const json& config, const RunContext& ctx) {
  Stopwatch watch;
  const json& p = params_of(config, "fit");
  check_keys(p, "parameters", {"reconstruct"},
             {"blue_csv", "red_csv", "model_fit"});
  if (!p.contains("blue_csv") && !p.contains("red_csv"))
    throw ConfigError("fit needs blue_csv and/or red_csv");

  const json& rj = p["reconstruct"];
  check_keys(rj, "reconstruct", {"n_max"},
             {"fit_scale", "fit_gamma", "gamma_init", "sigma_floor"});
  tomography::ReconstructOptions ropts;
  ropts.n_max = get_int_or(rj, "reconstruct", "n_max", 8);
  ropts.fit_scale = get_bool_or(rj, "reconstruct", "fit_scale", true);
  ropts.fit_gamma = get_bool_or(rj, "reconstruct", "fit_gamma", true);
  ropts.gamma_init = get_num_or(rj, "reconstruct", "gamma_init", -1.0);
  ropts.sigma_floor = get_num_or(rj, "reconstruct", "sigma_floor", 5.0e-3);

  bool fit_enabled = true;
  tomography::ParamFitOptions fopts;
  if (p.contains("model_fit")) {
    const json& f = p["model_fit"];
    check_keys(f, "model_fit", {},
               {"enabled", "n_bar_th", "fit_n_bar", "n_max_model",
                "theta_starts"});
    fit_enabled = get_bool_or(f, "model_fit", "enabled", true);
    fopts.n_bar_th = get_num_or(f, "model_fit", "n_bar_th", fopts.n_bar_th);
    fopts.fit_n_bar = get_bool_or(f, "model_fit", "fit_n_bar", false);
    fopts.n_max_model =
        get_int_or(f, "model_fit", "n_max_model", fopts.n_max_model);
    fopts.theta_starts =
        get_int_or(f, "model_fit", "theta_starts", fopts.theta_starts);
  }

  std::vector<tomography::SidebandSignal> signals;
  if (p.contains("blue_csv"))
    signals.push_back(
        tomography::read_signal_csv(get_str(p, "parameters", "blue_csv")));
  if (p.contains("red_csv"))
    signals.push_back(
        tomography::read_signal_csv(get_str(p, "parameters", "red_csv")));

  const auto recon = tomography::reconstruct_pn(signals, ropts);

  const fs::path dir(ctx.output_dir);
  fock::write_distribution_csv((dir / "pn.csv").string(), recon.dist);
  std::vector<std::string> outputs = {"results.json", "pn.csv"};

  json summary{{"experiment", "fit"},
               {"reconstruction",
                json{{"n_max", ropts.n_max},
                     {"scale", recon.scale},
                     {"gamma", recon.gamma},
                     {"chi2_reduced", recon.chi2_reduced},
                     {"converged", recon.converged},
                     {"warnings", recon.warnings}}}};

  if (fit_enabled) {
    const auto fit = tomography::fit_parametrized(recon.dist, fopts);
    const std::string fit_text = tomography::fit_result_to_json(fit);
    io::write_text_file((dir / "fit.json").string(), fit_text + "\n");
    outputs.push_back("fit.json");
    summary["fit"] = json::parse(fit_text);
  }

  write_results(dir, summary);
  write_run_record(config, ctx, outputs, watch);
  return summary;
}

json run_entangle(const json& config, const RunContext& ctx) {
  Stopwatch watch;
  const json& p = params_of(config, "entangle");
  check_keys(p, "parameters", {"omega_minus", "r"},
             {"omega_plus", "kappa", "n_plus", "n_minus", "schmidt_terms"});
  if (p.contains("omega_plus") == p.contains("kappa"))
    throw ConfigError("entangle needs exactly one of omega_plus or kappa");

  entangle::TwoModeSpec spec;
  spec.omega_minus = get_num(p, "parameters", "omega_minus");
  spec.omega_plus =
      p.contains("omega_plus")
          ? get_num(p, "parameters", "omega_plus")
          : spec.omega_minus *
                entangle::ratio_of_kappa(get_num(p, "parameters", "kappa"));
  spec.n_plus = get_num_or(p, "parameters", "n_plus", 0.03);
  spec.n_minus = get_num_or(p, "parameters", "n_minus", 0.03);
  spec.r = get_num(p, "parameters", "r");
  spec.validate();

  const double kappa = entangle::kappa_of(spec.omega_plus, spec.omega_minus);
  const double chi = entangle::chi_of(spec);
  const double ef = entangle::entanglement_of_formation(chi);
  const auto schmidt = entangle::schmidt_vacuum(
      kappa, get_int_or(p, "parameters", "schmidt_terms", -1));

  json summary{
      {"experiment", "entangle"},
      {"kappa", kappa},
      {"frequency_ratio", spec.omega_plus / spec.omega_minus},
      {"chi", chi},
      {"entanglement_of_formation_nats", ef},
      {"entanglement_of_formation_bits", entangle::nats_to_bits(ef)},
      {"formula_raw_nats",
       chi > 0.0 ? entangle::entanglement_of_formation_formula(chi) : 0.0}};
  summary["schmidt"] = json{
      {"beta", std::isinf(schmidt.beta) ? json() : json(schmidt.beta)},
      {"coefficients",
       std::vector<double>(schmidt.c.begin(),
                           schmidt.c.begin() +
                               std::min<std::size_t>(schmidt.c.size(), 10))}};

  const fs::path dir(ctx.output_dir);
  write_results(dir, summary);
  write_run_record(config, ctx, {"results.json"}, watch);
  return summary;
}

json run_cosmo(const json& config, const RunContext& ctx) {
  Stopwatch watch;
  const json& p = params_of(config, "cosmo");
  check_keys(p, "parameters", {"scenario", "window"},
             {"k_list", "points_per_period", "probe_points", "svg"});
  cosmo::ScenarioSpec spec = scenario_from(p);
  const std::vector<double> window = get_num_list(p["window"], "window");
  if (window.size() != 2)
    throw ConfigError("window must be [t_begin, t_end]");

  cosmo::CompileOptions copts;
  copts.points_per_period =
      get_num_or(p, "parameters", "points_per_period", 400.0);
  copts.probe_points = get_int_or(p, "parameters", "probe_points", 2048);

  const auto profile = cosmo::compile(spec, window[0], window[1], copts);
  const auto traj = gaussian::evolve(
      gaussian::GaussianState::vacuum(profile.omega().front()), profile, {});
  const auto bog = gaussian::bogoliubov(traj.transfers.back(),
                                        profile.omega().front(),
                                        profile.omega().back());

  const fs::path dir(ctx.output_dir);
  ramps::write_profile_csv((dir / "profile.csv").string(), profile);
  std::vector<std::string> outputs = {"results.json", "profile.csv"};

  json summary{{"experiment", "cosmo"},
               {"kind", cosmo::to_string(spec.kind)},
               {"omega_begin", profile.omega().front()},
               {"omega_end", profile.omega().back()},
               {"omega_min", profile.omega_min()},
               {"omega_max", profile.omega_max()},
               {"grid_points", profile.size()},
               {"n_pair", bog.n_pair()},
               {"bogoliubov_defect", bog.defect()}};

  if (p.contains("k_list")) {
    const std::vector<double> k_list = get_num_list(p["k_list"], "k_list");
    std::vector<std::vector<double>> rows(k_list.size());
    parallel_sweep(ctx.jobs, k_list.size(), [&](std::size_t i) {
      cosmo::ScenarioSpec sk = spec;
      sk.mode_k = k_list[i];
      const auto prof_k = cosmo::compile(sk, window[0], window[1], copts);
      const auto traj_k = gaussian::evolve(
          gaussian::GaussianState::vacuum(prof_k.omega().front()), prof_k, {});
      const auto bog_k = gaussian::bogoliubov(traj_k.transfers.back(),
                                              prof_k.omega().front(),
                                              prof_k.omega().back());
      rows[i] = {k_list[i], prof_k.omega().front(), prof_k.omega().back(),
                 bog_k.n_pair()};
    });
    write_csv((dir / "spectrum.csv").string(), "k,omega_in,omega_out,n_pair",
              rows);
    outputs.push_back("spectrum.csv");
    summary["spectrum_points"] = k_list.size();
  }

  if (get_bool_or(p, "parameters", "svg", true)) {
    io::write_svg_plot((dir / "profile.svg").string(),
                       "compiled mode frequency", "t", "omega",
                       {{"omega", "#1f6fb2", profile.times(),
                         profile.omega()}});
    outputs.push_back("profile.svg");
  }

  write_results(dir, summary);
  write_run_record(config, ctx, outputs, watch);
  return summary;
}

int run_experiment(const std::string& name, const std::string& config_path,
                   const RunContext& ctx) {
  try {
    json config;
    try {
      config = json::parse(io::read_text_file(config_path));
    } catch (const json::parse_error& e) {
      throw ConfigError(std::string("config does not parse: ") + e.what());
    }
    if (ctx.output_dir.empty())
      throw ConfigError("an output directory is required");
    if (ctx.jobs < 1) throw ConfigError("jobs must be >= 1");
    std::error_code ec;
    fs::create_directories(ctx.output_dir, ec);
    if (ec)
      throw IoError("cannot create output directory '" + ctx.output_dir +
                    "': " + ec.message());

    using Runner = json (*)(const json&, const RunContext&);
    static const std::map<std::string, Runner> runners = {
        {"single-pulse", &run_single_pulse}, {"echo-sweep", &run_echo_sweep},
        {"ramp-study", &run_ramp_study},     {"fit", &run_fit},
        {"entangle", &run_entangle},         {"cosmo", &run_cosmo}};
    const auto it = runners.find(name);
    if (it == runners.end())
      throw ConfigError("unknown experiment subcommand: " + name);
    it->second(config, ctx);
    return 0;
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return 2;
  } catch (const json::exception& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return 2;
  } catch (const NumericalError& e) {
    std::cerr << "numerical error: " << e.what() << '\n';
    return 3;
  } catch (const IoError& e) {
    std::cerr << "io error: " << e.what() << '\n';
    return 4;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
}

}  // namespace pairsim::experiments
