#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "cli.hpp"
#include "crashdyn/ingest.hpp"
#include "crashdyn/km_estimate.hpp"
#include "crashdyn/synth.hpp"
#include "settings.hpp"

namespace crashdyn::cli {

/// Each command writes its artifacts under settings.out_dir and returns an
/// exit code; data and usage problems are thrown as crashdyn exceptions.

int cmd_ingest(const Settings& s, const std::optional<std::filesystem::path>& output);
int cmd_estimate(const Settings& s);

struct FitCommand {
  std::string model;
  std::optional<std::filesystem::path> data;
  std::optional<std::filesystem::path> field;
  std::optional<std::filesystem::path> init;
};
int cmd_fit(const Settings& s, const FitCommand& cmd);

struct SimulateCommand {
  std::optional<std::filesystem::path> potential;
  std::optional<std::filesystem::path> diffusion;
};
int cmd_simulate(const Settings& s, const SimulateCommand& cmd);

struct OmoriCommand {
  std::optional<std::filesystem::path> returns;
  std::optional<std::filesystem::path> counts;
  SimulateCommand sim;
};
int cmd_omori(const Settings& s, const OmoriCommand& cmd);

struct SynthCommand {
  std::string model = "ou";
  /// Used when model is "ou"; the seed defaults to a substream of --seed.
  std::optional<OuSpec> ou;
  std::optional<std::filesystem::path> params;
  double noise = 0.0;
  double x_min = -0.3, x_max = 0.3;
  std::size_t nx = 13;
  double t_min = -5.0, t_max = 25.0;
  std::size_t nt = 31;
};
int cmd_synth(const Settings& s, const SynthCommand& cmd);

int cmd_pipeline(const Settings& s);

// Shared helpers.
ReturnEnsemble load_input_ensemble(const Settings& s);
CoefficientField estimate_field(const ReturnEnsemble& ensemble, const Settings& s);
void write_text(const std::filesystem::path& path, const std::string& content);
std::string format_multiple(double m);

/// Plain gnuplot scripts for every figure analog, written under out_dir/plots.
void write_plot_scripts(const std::filesystem::path& out_dir, const std::vector<double>& threshold_multiples);

}  // namespace crashdyn::cli
