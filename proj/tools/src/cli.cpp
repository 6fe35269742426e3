#include "cli.hpp"

#include <iostream>
#include <optional>
#include <tuple>

#include <CLI11.hpp>
#include <fmt/format.h>
#include <nlohmann/json.hpp>

#include "commands.hpp"
#include "crashdyn/error.hpp"
#include "settings.hpp"

namespace crashdyn::cli {

namespace {

/// Flags common to every subcommand; each one overrides the config file.
struct CommonFlags {
  std::optional<std::uint64_t> seed;
  std::optional<std::string> out_dir;
  std::optional<std::string> config;
  bool strict = false;
};

struct InputFlags {
  std::optional<std::string> prices;
  std::optional<std::string> ensemble;
  std::optional<std::string> crash_date;
};

struct BinningFlags {
  std::optional<double> x_min, x_max;
  std::optional<std::size_t> bins, min_support;
  std::optional<int> tau;
};

struct SimFlags {
  std::optional<std::size_t> trajectories, max_attempts, substeps, threads;
  std::optional<double> decline, diffusion_scale;
  bool dump = false;
};

void add_input(CLI::App* cmd, InputFlags& f, bool prices_only) {
  cmd->add_option("--prices", f.prices, "Price CSV with header asset,date,close");
  if (!prices_only) cmd->add_option("--input", f.ensemble, "Return ensemble CSV with header t,asset,x");
  cmd->add_option("--crash-date", f.crash_date, "Date mapped to trading day 0 (YYYY-MM-DD)");
}

void add_binning(CLI::App* cmd, BinningFlags& f) {
  cmd->add_option("--x-min", f.x_min, "Lower edge of the return binning");
  cmd->add_option("--x-max", f.x_max, "Upper edge of the return binning");
  cmd->add_option("--bins", f.bins, "Number of return bins");
  cmd->add_option("--min-support", f.min_support, "Paired samples needed for a supported bin");
  cmd->add_option("--tau", f.tau, "Lag in trading days (only 1 is supported)");
}

void add_sim(CLI::App* cmd, SimFlags& f) {
  cmd->add_option("--trajectories", f.trajectories, "Accepted trajectories to average");
  cmd->add_option("--max-attempts", f.max_attempts, "Upper bound on simulated trajectories");
  cmd->add_option("--substeps", f.substeps, "Euler-Maruyama steps per day");
  cmd->add_option("--threads", f.threads, "Worker threads (0 = hardware concurrency)");
  cmd->add_option("--decline", f.decline, "Required first-day decline, 0 disables the filter");
  cmd->add_option("--diffusion-scale", f.diffusion_scale, "Multiplier on the diffusion coefficient");
  cmd->add_flag("--dump-trajectories", f.dump, "Also write trajectories.csv");
}

void apply_input(Settings& s, const InputFlags& f) {
  if (f.prices || f.ensemble) {
    s.input.prices.reset();
    s.input.ensemble.reset();
    s.input.synth.reset();
  }
  if (f.prices && f.ensemble) throw UsageError("give only one of --prices, --input");
  if (f.prices) s.input.prices = *f.prices;
  if (f.ensemble) s.input.ensemble = *f.ensemble;
  if (f.crash_date) s.input.crash_date = *f.crash_date;
}

void apply_binning(Settings& s, const BinningFlags& f) {
  if (f.x_min) s.binning.x_min = *f.x_min;
  if (f.x_max) s.binning.x_max = *f.x_max;
  if (f.bins) s.binning.n_bins = *f.bins;
  if (f.min_support) s.min_support = *f.min_support;
  if (f.tau) s.tau = *f.tau;
}

void apply_sim(Settings& s, const SimFlags& f) {
  if (f.trajectories) s.sim.n_accepted_target = *f.trajectories;
  if (f.max_attempts) s.sim.max_attempts = *f.max_attempts;
  if (f.substeps) s.sim.substeps_per_day = *f.substeps;
  if (f.threads) s.sim.threads = *f.threads;
  if (f.decline) s.sim.decline_threshold = *f.decline;
  if (f.diffusion_scale) s.sim.diffusion_scale = *f.diffusion_scale;
  if (f.dump) s.dump_trajectories = true;
}

Settings base_settings(const CommonFlags& common, bool require_sections) {
  Settings s = common.config ? load_settings(*common.config, require_sections) : Settings{};
  if (common.seed) {
    s.seed = *common.seed;
    s.sim.seed = *common.seed;
  }
  if (common.out_dir) s.out_dir = *common.out_dir;
  if (common.strict) s.strict = true;
  return s;
}

int report(std::string_view kind, const std::exception& e, int code) {
  std::cerr << fmt::format("crashdyn: {}: {}\n", kind, e.what());
  return code;
}

}  // namespace

int run(int argc, const char* const* argv) {
  CLI::App app{"Post-crash market dynamics: estimation, fitting, simulation and aftershock statistics", "crashdyn"};
  app.require_subcommand(1);
  app.fallthrough();
  app.set_version_flag("--version", "crashdyn 0.1.0");

  CommonFlags common;
  app.add_option("--seed", common.seed, "Random seed");
  app.add_option("--out-dir", common.out_dir, "Directory for output artifacts");
  app.add_option("--config", common.config, "JSON run configuration; flags override its values")
      ->check(CLI::ExistingFile);
  app.add_flag("--strict", common.strict, "Exit with status 3 when a fit does not converge");

  InputFlags input;
  BinningFlags binning;
  SimFlags sim;

  auto* ingest = app.add_subcommand("ingest", "Price CSV to return ensemble CSV");
  std::optional<std::string> ingest_output;
  add_input(ingest, input, true);
  ingest->add_option("-o,--output", ingest_output, "Output path (default <out-dir>/ensemble.csv)");

  auto* estimate = app.add_subcommand("estimate", "Drift, diffusion and potential on the (x, t) grid");
  add_input(estimate, input, false);
  add_binning(estimate, binning);

  FitCommand fit_cmd;
  std::optional<double> fit_tol, fit_floor;
  std::optional<std::size_t> fit_iter;
  auto* fit = app.add_subcommand("fit", "Least-squares fit of a model surface");
  fit->add_option("--model", fit_cmd.model, "potential | diffusion | index")->required();
  fit->add_option("--data", fit_cmd.data, "Samples CSV with header x,t,value");
  fit->add_option("--field", fit_cmd.field, "Coefficient field CSV from estimate");
  fit->add_option("--init", fit_cmd.init, "JSON file with the initial parameters");
  fit->add_option("--tol", fit_tol, "Relative convergence tolerance");
  fit->add_option("--max-iter", fit_iter, "Iteration budget");
  fit->add_option("--t-floor", fit_floor, "Regularization of the diffusion shock at t = 0");

  SimulateCommand sim_cmd;
  auto* simulate = app.add_subcommand("simulate", "Averaged index of simulated post-crash trajectories");
  simulate->add_option("--potential", sim_cmd.potential, "JSON potential parameters");
  simulate->add_option("--diffusion", sim_cmd.diffusion, "JSON diffusion parameters");
  add_sim(simulate, sim);

  OmoriCommand omori_cmd;
  std::vector<double> multiples;
  auto* omori = app.add_subcommand("omori", "Cumulative exceedance counts and power-law exponents");
  omori->add_option("--returns", omori_cmd.returns, "Trajectories CSV (trajectory,t,x,s); default simulates");
  omori->add_option("--counts", omori_cmd.counts, "Counts CSV (t,N) to fit directly");
  omori->add_option("--multiples", multiples, "Thresholds as multiples of sigma");
  omori->add_option("--potential", omori_cmd.sim.potential, "JSON potential parameters");
  omori->add_option("--diffusion", omori_cmd.sim.diffusion, "JSON diffusion parameters");
  add_sim(omori, sim);

  SynthCommand synth_cmd;
  OuSpec ou;
  auto* synth = app.add_subcommand("synth", "Synthetic ensembles and noisy model samples");
  synth->add_option("--model", synth_cmd.model, "ou | potential | diffusion | index");
  synth->add_option("--params", synth_cmd.params, "JSON parameters for a model surface");
  synth->add_option("--noise", synth_cmd.noise, "Gaussian noise sd added to samples");
  std::vector<double> x_range, t_range;
  synth->add_option("--x-range", x_range, "x grid bounds")->expected(2);
  synth->add_option("--t-range", t_range, "t grid bounds")->expected(2);
  synth->add_option("--nx", synth_cmd.nx, "x grid points");
  synth->add_option("--nt", synth_cmd.nt, "t grid points");
  synth->add_option("--theta", ou.theta, "OU mean-reversion rate per day");
  synth->add_option("--D", ou.D, "OU diffusion per day");
  synth->add_option("--assets", ou.n_assets, "OU ensemble size");
  synth->add_option("--days", ou.n_days, "OU days");
  synth->add_option("--dt", ou.dt, "OU integration step in days");

  auto* pipeline = app.add_subcommand("pipeline", "Every stage from a single JSON configuration");
  add_sim(pipeline, sim);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kOk : kUsageError;
  }

  try {
    Settings s = base_settings(common, pipeline->parsed());
    if (pipeline->parsed() && !common.config) throw UsageError("pipeline needs --config");
    apply_input(s, input);
    apply_binning(s, binning);
    apply_sim(s, sim);
    if (fit_tol) s.fit.tol = *fit_tol;
    if (fit_iter) s.fit.max_iter = *fit_iter;
    if (fit_floor) s.fit.t_floor = *fit_floor;
    s.sim.fit_options = s.fit;
    if (!multiples.empty()) s.omori.threshold_multiples = multiples;
    s.validate();

    if (ingest->parsed()) return cmd_ingest(s, ingest_output ? std::optional<std::filesystem::path>(*ingest_output)
                                                             : std::nullopt);
    if (estimate->parsed()) return cmd_estimate(s);
    if (fit->parsed()) return cmd_fit(s, fit_cmd);
    if (simulate->parsed()) return cmd_simulate(s, sim_cmd);
    if (omori->parsed()) return cmd_omori(s, omori_cmd);
    if (synth->parsed()) {
      if (!x_range.empty()) std::tie(synth_cmd.x_min, synth_cmd.x_max) = std::pair(x_range[0], x_range[1]);
      if (!t_range.empty()) std::tie(synth_cmd.t_min, synth_cmd.t_max) = std::pair(t_range[0], t_range[1]);
      ou.seed = substream_seed(s.seed, 0x5e);
      synth_cmd.ou = ou;
      return cmd_synth(s, synth_cmd);
    }
    return cmd_pipeline(s);
  } catch (const UsageError& e) {
    return report("usage error", e, kUsageError);
  } catch (const DataError& e) {
    return report("data error", e, kDataError);
  } catch (const NumericalError& e) {
    return report("numerical failure", e, kNumericalFailure);
  } catch (const nlohmann::json::exception& e) {
    return report("data error", e, kDataError);
  } catch (const std::invalid_argument& e) {
    return report("usage error", e, kUsageError);
  } catch (const std::exception& e) {
    return report("data error", e, kDataError);
  }
}

int run(const std::vector<std::string>& args) {
  std::vector<const char*> argv;
  argv.reserve(args.size());
  for (const auto& a : args) argv.push_back(a.c_str());
  return run(static_cast<int>(argv.size()), argv.data());
}

}  // namespace crashdyn::cli
