#include "settings.hpp"

#include <algorithm>
#include <fstream>
#include <set>

#include <fmt/format.h>

#include "crashdyn/error.hpp"
#include "crashdyn/params_json.hpp"

namespace crashdyn::cli {

namespace {

using nlohmann::json;

void reject_unknown(const json& j, std::string_view section, std::initializer_list<std::string_view> known) {
  for (const auto& [key, _] : j.items()) {
    if (std::find(known.begin(), known.end(), key) == known.end()) {
      throw UsageError(fmt::format("config: unknown key '{}' in {}", key, section));
    }
  }
}

const json& object_at(const json& j, std::string_view key) {
  const auto& v = j.at(std::string(key));
  if (!v.is_object()) throw UsageError(fmt::format("config: '{}' must be an object", key));
  return v;
}

template <class T>
void read(const json& j, std::string_view key, T& dst) {
  const auto it = j.find(std::string(key));
  if (it == j.end()) return;
  try {
    dst = it->template get<T>();
  } catch (const json::exception& e) {
    throw UsageError(fmt::format("config: bad value for '{}': {}", key, e.what()));
  }
}

template <class Params>
void read_params(const json& j, std::string_view key, Params& dst) {
  const auto it = j.find(std::string(key));
  if (it == j.end()) return;
  try {
    dst = it->template get<Params>();
  } catch (const DataError& e) {
    throw UsageError(fmt::format("config: '{}': {}", key, e.what()));
  }
}

OuSpec read_ou(const json& j, std::uint64_t default_seed) {
  reject_unknown(j, "input.synth", {"theta", "D", "n_assets", "n_days", "dt", "seed", "initial_sd"});
  OuSpec spec;
  spec.seed = default_seed;
  read(j, "theta", spec.theta);
  read(j, "D", spec.D);
  read(j, "n_assets", spec.n_assets);
  read(j, "n_days", spec.n_days);
  read(j, "dt", spec.dt);
  read(j, "seed", spec.seed);
  if (j.contains("initial_sd")) spec.initial_sd = j.at("initial_sd").get<double>();
  return spec;
}

}  // namespace

void Settings::validate() const {
  binning.validate();
  if (tau != 1) throw UsageError(fmt::format("tau is fixed at 1 trading day, got {}", tau));
  if (min_support < 1) throw UsageError("min_support must be >= 1");
  if (!(fit.tol > 0.0) || fit.max_iter < 1 || !(fit.t_floor > 0.0)) {
    throw UsageError("fit: need tol > 0, max_iter >= 1, t_floor > 0");
  }
  potential_init.validate();
  diffusion_init.validate();
  sim.validate();
  sim_potential.validate();
  sim_diffusion.validate();
  if (sim_parameters != "reference" && sim_parameters != "fitted") {
    throw UsageError(fmt::format("simulation.parameters must be 'reference' or 'fitted', got '{}'", sim_parameters));
  }
  if (omori.threshold_multiples.empty()) throw UsageError("omori.threshold_multiples must not be empty");
  for (double m : omori.threshold_multiples) {
    if (!(m > 0.0)) throw UsageError(fmt::format("omori threshold multiple must be > 0, got {}", m));
  }
  if (input.synth) input.synth->validate();
}

Settings settings_from_json(const nlohmann::json& j, Settings s, bool require_sections) {
  if (!j.is_object()) throw UsageError("config: top level must be a JSON object");
  reject_unknown(j, "config", {"seed", "out_dir", "input", "binning", "tau", "fit", "simulation", "omori"});
  if (require_sections) {
    std::string missing;
    for (const char* key : {"seed", "out_dir", "input", "binning", "fit", "simulation", "omori"}) {
      if (!j.contains(key)) missing += missing.empty() ? key : fmt::format(", {}", key);
    }
    if (!missing.empty()) throw UsageError(fmt::format("config: missing keys: {}", missing));
  }

  read(j, "seed", s.seed);
  if (j.contains("out_dir")) s.out_dir = j.at("out_dir").get<std::string>();
  read(j, "tau", s.tau);

  if (j.contains("input")) {
    const auto& in = object_at(j, "input");
    reject_unknown(in, "input", {"prices", "ensemble", "crash_date", "synth"});
    const int sources = static_cast<int>(in.contains("prices")) + static_cast<int>(in.contains("ensemble")) +
                        static_cast<int>(in.contains("synth"));
    if (sources != 1) throw UsageError("config: input needs exactly one of 'prices', 'ensemble', 'synth'");
    s.input = {};
    if (in.contains("prices")) s.input.prices = in.at("prices").get<std::string>();
    if (in.contains("ensemble")) s.input.ensemble = in.at("ensemble").get<std::string>();
    read(in, "crash_date", s.input.crash_date);
    if (in.contains("synth")) s.input.synth = read_ou(object_at(in, "synth"), substream_seed(s.seed, 0x5e));
  }

  if (j.contains("binning")) {
    const auto& b = object_at(j, "binning");
    reject_unknown(b, "binning", {"x_min", "x_max", "n_bins", "min_support"});
    read(b, "x_min", s.binning.x_min);
    read(b, "x_max", s.binning.x_max);
    read(b, "n_bins", s.binning.n_bins);
    read(b, "min_support", s.min_support);
  }

  if (j.contains("fit")) {
    const auto& f = object_at(j, "fit");
    reject_unknown(f, "fit", {"tol", "max_iter", "t_floor", "initial_step", "potential_init", "diffusion_init",
                              "index_init"});
    read(f, "tol", s.fit.tol);
    read(f, "max_iter", s.fit.max_iter);
    read(f, "t_floor", s.fit.t_floor);
    read(f, "initial_step", s.fit.initial_step);
    read_params(f, "potential_init", s.potential_init);
    read_params(f, "diffusion_init", s.diffusion_init);
    read_params(f, "index_init", s.sim.index_init);
  }
  s.sim.fit_options = s.fit;

  if (j.contains("simulation")) {
    const auto& m = object_at(j, "simulation");
    reject_unknown(m, "simulation",
                   {"t_start", "t_end", "substeps_per_day", "n_accepted_target", "decline_threshold",
                    "decline_window_days", "max_attempts", "x0", "s0", "diffusion_scale", "fit_from_day",
                    "threads", "parameters", "potential", "diffusion", "dump_trajectories"});
    read(m, "t_start", s.sim.t_start);
    read(m, "t_end", s.sim.t_end);
    read(m, "substeps_per_day", s.sim.substeps_per_day);
    read(m, "n_accepted_target", s.sim.n_accepted_target);
    read(m, "decline_threshold", s.sim.decline_threshold);
    read(m, "decline_window_days", s.sim.decline_window_days);
    read(m, "max_attempts", s.sim.max_attempts);
    read(m, "x0", s.sim.x0);
    read(m, "s0", s.sim.s0);
    read(m, "diffusion_scale", s.sim.diffusion_scale);
    read(m, "fit_from_day", s.sim.fit_from_day);
    read(m, "threads", s.sim.threads);
    read(m, "parameters", s.sim_parameters);
    read_params(m, "potential", s.sim_potential);
    read_params(m, "diffusion", s.sim_diffusion);
    read(m, "dump_trajectories", s.dump_trajectories);
  }
  s.sim.seed = s.seed;

  if (j.contains("omori")) {
    const auto& o = object_at(j, "omori");
    reject_unknown(o, "omori", {"threshold_multiples", "exclude_main_shock"});
    read(o, "threshold_multiples", s.omori.threshold_multiples);
    read(o, "exclude_main_shock", s.omori.exclude_main_shock);
  }
  return s;
}

nlohmann::json settings_to_json(const Settings& s) {
  json input = json::object();
  if (s.input.prices) input["prices"] = s.input.prices->generic_string();
  if (s.input.ensemble) input["ensemble"] = s.input.ensemble->generic_string();
  if (s.input.prices) input["crash_date"] = s.input.crash_date;
  if (s.input.synth) {
    const auto& o = *s.input.synth;
    input["synth"] = {{"theta", o.theta}, {"D", o.D}, {"n_assets", o.n_assets},
                      {"n_days", o.n_days}, {"dt", o.dt}, {"seed", o.seed}};
    if (o.initial_sd) input["synth"]["initial_sd"] = *o.initial_sd;
  }
  return {
      {"seed", s.seed},
      {"out_dir", s.out_dir.generic_string()},
      {"input", input},
      {"binning", {{"x_min", s.binning.x_min}, {"x_max", s.binning.x_max}, {"n_bins", s.binning.n_bins},
                   {"min_support", s.min_support}}},
      {"tau", s.tau},
      {"fit", {{"tol", s.fit.tol}, {"max_iter", s.fit.max_iter}, {"t_floor", s.fit.t_floor},
               {"initial_step", s.fit.initial_step}, {"potential_init", s.potential_init},
               {"diffusion_init", s.diffusion_init}, {"index_init", s.sim.index_init}}},
      {"simulation", {{"t_start", s.sim.t_start}, {"t_end", s.sim.t_end},
                      {"substeps_per_day", s.sim.substeps_per_day}, {"n_accepted_target", s.sim.n_accepted_target},
                      {"decline_threshold", s.sim.decline_threshold},
                      {"decline_window_days", s.sim.decline_window_days}, {"max_attempts", s.sim.max_attempts},
                      {"x0", s.sim.x0}, {"s0", s.sim.s0}, {"diffusion_scale", s.sim.diffusion_scale},
                      {"fit_from_day", s.sim.fit_from_day}, {"parameters", s.sim_parameters},
                      {"potential", s.sim_potential}, {"diffusion", s.sim_diffusion},
                      {"dump_trajectories", s.dump_trajectories}}},
      {"omori", {{"threshold_multiples", s.omori.threshold_multiples},
                 {"exclude_main_shock", s.omori.exclude_main_shock}}},
  };
}

Settings load_settings(const std::filesystem::path& path, bool require_sections) {
  std::ifstream in(path);
  if (!in) throw DataError(fmt::format("cannot open config file '{}'", path.string()));
  json j;
  try {
    j = json::parse(in);
  } catch (const json::parse_error& e) {
    throw DataError(fmt::format("config '{}': {}", path.string(), e.what()));
  }
  return settings_from_json(j, Settings{}, require_sections);
}

}  // namespace crashdyn::cli
