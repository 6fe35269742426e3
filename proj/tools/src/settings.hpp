#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>

#include <nlohmann/json.hpp>

#include "crashdyn/aftershock.hpp"
#include "crashdyn/density.hpp"
#include "crashdyn/sde_sim.hpp"
#include "crashdyn/surfaces.hpp"
#include "crashdyn/synth.hpp"

namespace crashdyn::cli {

struct InputSettings {
  std::optional<std::filesystem::path> prices;
  std::optional<std::filesystem::path> ensemble;
  std::string crash_date = "1987-10-19";
  std::optional<OuSpec> synth;
};

/// Everything a run needs. The JSON form mirrors this struct section by
/// section: seed, out_dir, input, binning, tau, fit, simulation, omori.
struct Settings {
  std::uint64_t seed = 1987;
  std::filesystem::path out_dir = ".";
  InputSettings input;

  BinningSpec binning;
  std::size_t min_support = kDefaultMinSupport;
  int tau = 1;

  FitOptions fit;
  PotentialParams potential_init = reference_potential_params();
  DiffusionParams diffusion_init = reference_diffusion_params();

  SimConfig sim;
  /// "reference" simulates the published surfaces; "fitted" uses the fits of
  /// the estimated field.
  std::string sim_parameters = "reference";
  PotentialParams sim_potential = reference_potential_params();
  DiffusionParams sim_diffusion = reference_diffusion_params();

  OmoriOptions omori;

  bool strict = false;
  bool dump_trajectories = false;

  void validate() const;
};

/// Reads the JSON form over `base`. With `require_sections`, every top-level
/// section must be present and a UsageError lists the missing ones. Unknown
/// keys are rejected.
Settings settings_from_json(const nlohmann::json& j, Settings base = {}, bool require_sections = false);
nlohmann::json settings_to_json(const Settings& s);

Settings load_settings(const std::filesystem::path& path, bool require_sections = false);

}  // namespace crashdyn::cli
