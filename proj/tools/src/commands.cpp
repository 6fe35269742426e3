#include "commands.hpp"

#include <fstream>
#include <functional>
#include <iostream>
#include <sstream>

#include <fmt/format.h>
#include <nlohmann/json.hpp>

#include "crashdyn/aftershock.hpp"
#include "crashdyn/density.hpp"
#include "crashdyn/error.hpp"
#include "crashdyn/params_json.hpp"
#include "crashdyn/sde_sim.hpp"
#include "crashdyn/surfaces.hpp"

namespace crashdyn::cli {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

void ensure_dir(const fs::path& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw DataError(fmt::format("cannot create output directory '{}': {}", dir.string(), ec.message()));
}

void write_file(const fs::path& path, const std::function<void(std::ostream&)>& body) {
  if (path.has_parent_path()) ensure_dir(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError(fmt::format("cannot write '{}'", path.string()));
  body(out);
  out.flush();
  if (!out) throw DataError(fmt::format("write to '{}' failed", path.string()));
}

void write_json(const fs::path& path, const json& j) {
  write_file(path, [&](std::ostream& out) { out << j.dump(2) << '\n'; });
}

std::ifstream open_input(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw DataError(fmt::format("cannot open '{}'", path.string()));
  return in;
}

json read_json_file(const fs::path& path) {
  auto in = open_input(path);
  try {
    return json::parse(in);
  } catch (const json::parse_error& e) {
    throw DataError(fmt::format("'{}': {}", path.string(), e.what()));
  }
}

template <class Params>
Params read_params_file(const fs::path& path) {
  try {
    return read_json_file(path).get<Params>();
  } catch (const json::exception& e) {
    throw DataError(fmt::format("'{}': {}", path.string(), e.what()));
  }
}

std::vector<Sample> samples_from_field(const CoefficientField& field, SurfaceModel model) {
  std::vector<Sample> out;
  for (std::size_t ti = 0; ti < field.t_axis.size(); ++ti) {
    const double t = field.t_axis[ti];
    for (std::size_t b = 0; b < field.binning.n_bins; ++b) {
      const std::size_t c = field.cell(ti, b);
      const double x = field.binning.center(b);
      if (model == SurfaceModel::potential && field.u[c]) out.push_back({x, t, *field.u[c]});
      if (model == SurfaceModel::diffusion && field.supported[c] && field.d2[c]) out.push_back({x, t, *field.d2[c]});
    }
  }
  return out;
}

std::vector<double> init_for(const Settings& s, SurfaceModel model) {
  switch (model) {
    case SurfaceModel::potential: {
      const auto a = s.potential_init.to_array();
      return {a.begin(), a.end()};
    }
    case SurfaceModel::diffusion: {
      const auto a = s.diffusion_init.to_array();
      return {a.begin(), a.end()};
    }
    case SurfaceModel::index: {
      const auto a = s.sim.index_init.to_array();
      return {a.begin(), a.end()};
    }
  }
  return {};
}

int strict_code(const Settings& s, bool converged, std::string_view what) {
  if (converged) return kOk;
  std::cerr << fmt::format("warning: {} did not converge\n", what);
  return s.strict ? kNumericalFailure : kOk;
}

json simulation_report(const IndexSimulation& sim) {
  return {
      {"fit", fit_report_to_json(SurfaceModel::index, sim.fit)},
      {"n_accepted", sim.n_accepted},
      {"attempts", sim.attempts},
      {"aborted", sim.aborted},
      {"acceptance_rate", sim.acceptance_rate},
      {"partial", sim.partial},
  };
}

struct SimOutcome {
  IndexSimulation sim;
  int code = kOk;
};

SimOutcome run_simulation(const Settings& s, const PotentialParams& potential, const DiffusionParams& diffusion) {
  SimOutcome out;
  out.sim = simulate_index(potential, diffusion, s.sim);
  if (out.sim.n_accepted == 0) {
    throw NumericalError(fmt::format("no trajectory passed the decline filter in {} attempts", out.sim.attempts));
  }
  write_file(s.out_dir / "index.csv", [&](std::ostream& o) { write_index_csv(out.sim, o); });
  write_json(s.out_dir / "index_fit.json", simulation_report(out.sim));
  if (s.dump_trajectories) {
    write_file(s.out_dir / "trajectories.csv", [&](std::ostream& o) { write_trajectories_csv(out.sim.accepted, o); });
  }
  if (out.sim.partial) {
    std::cerr << fmt::format("warning: only {} of {} trajectories accepted\n", out.sim.n_accepted,
                             s.sim.n_accepted_target);
  }
  out.code = strict_code(s, out.sim.fit.converged && !out.sim.partial, "index fit");
  return out;
}

int run_omori(const Settings& s, std::span<const std::vector<double>> series) {
  const auto summary = analyze_ensemble(series, s.omori);
  json j = omori_summary_to_json(summary);
  bool all_fitted = true;
  for (const auto& ts : summary.thresholds) {
    write_file(s.out_dir / fmt::format("omori_N_{}.csv", format_multiple(ts.multiple)),
               [&](std::ostream& o) { write_counts_csv(ts.ensemble, o); });
    if (!ts.ensemble_fitted) {
      all_fitted = false;
      std::cerr << fmt::format("omori: no power-law fit at {} sigma (too few exceedances)\n",
                               format_multiple(ts.multiple));
    }
  }
  j["all_fitted"] = all_fitted;
  write_json(s.out_dir / "omori.json", j);
  if (!all_fitted && s.strict) return kNumericalFailure;
  return kOk;
}

OmoriResult read_counts_csv(const fs::path& path) {
  auto in = open_input(path);
  OmoriResult r;
  std::string line;
  std::size_t line_no = 0;
  bool header = false;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    if (!header) {
      if (line != "t,N") throw DataError(fmt::format("{}:{}: expected header 't,N'", path.string(), line_no));
      header = true;
      continue;
    }
    std::istringstream row(line);
    int t = 0;
    double n = 0.0;
    char comma = 0;
    if (!(row >> t >> comma >> n) || comma != ',' || !(row >> std::ws).eof()) {
      throw DataError(fmt::format("{}:{}: unparseable row", path.string(), line_no));
    }
    r.times.push_back(t);
    r.counts.push_back(n);
  }
  if (r.times.empty()) throw DataError(fmt::format("{}: no rows", path.string()));
  return r;
}

void write_field_outputs(const Settings& s, const ReturnEnsemble& ensemble, const CoefficientField& field) {
  std::vector<OnePointDensity> densities;
  for (int t = ensemble.t_min(); t <= ensemble.t_max(); ++t) {
    if (ensemble.present_count(t) > 0) densities.push_back(one_point(ensemble, t, s.binning));
  }
  write_file(s.out_dir / "densities.csv", [&](std::ostream& o) { write_density_csv(densities, o); });
  write_file(s.out_dir / "field.csv", [&](std::ostream& o) { write_field_csv(field, o); });
}

}  // namespace

std::string format_multiple(double m) { return fmt::format("{:g}", m); }

void write_text(const fs::path& path, const std::string& content) {
  write_file(path, [&](std::ostream& o) { o << content; });
}

ReturnEnsemble load_input_ensemble(const Settings& s) {
  if (s.input.prices) {
    const auto series = load_prices(*s.input.prices, CsvLayout{s.input.crash_date});
    return compute_returns(series);
  }
  if (s.input.ensemble) return read_ensemble_csv(*s.input.ensemble);
  if (s.input.synth) return generate_ou(*s.input.synth);
  throw UsageError("no input given: use --prices, --input or a config 'input' section");
}

CoefficientField estimate_field(const ReturnEnsemble& ensemble, const Settings& s) {
  auto field = estimate_coefficients(ensemble, s.binning, EstimateOptions{s.min_support});
  return reconstruct_potential(std::move(field), zero_bin(s.binning));
}

int cmd_ingest(const Settings& s, const std::optional<fs::path>& output) {
  if (!s.input.prices) throw UsageError("ingest needs --prices");
  const auto ensemble = load_input_ensemble(s);
  const fs::path path = output.value_or(s.out_dir / "ensemble.csv");
  write_file(path, [&](std::ostream& o) { write_ensemble_csv(ensemble, o); });
  std::cout << fmt::format("{} assets, days {}..{} -> {}\n", ensemble.n_assets(), ensemble.t_min(),
                           ensemble.t_max(), path.string());
  return kOk;
}

int cmd_estimate(const Settings& s) {
  const auto ensemble = load_input_ensemble(s);
  const auto field = estimate_field(ensemble, s);
  write_field_outputs(s, ensemble, field);
  std::size_t supported = 0;
  for (bool b : field.supported) supported += b ? 1 : 0;
  std::cout << fmt::format("{} of {} cells supported\n", supported, field.n_cells());
  return kOk;
}

int cmd_fit(const Settings& s, const FitCommand& cmd) {
  const SurfaceModel model = parse_surface_model(cmd.model);
  if (cmd.data.has_value() == cmd.field.has_value()) throw UsageError("fit needs exactly one of --data, --field");
  std::vector<Sample> data;
  if (cmd.data) {
    auto in = open_input(*cmd.data);
    data = read_samples_csv(in, cmd.data->string());
  } else {
    if (model == SurfaceModel::index) throw UsageError("the index model is fitted from --data, not --field");
    auto in = open_input(*cmd.field);
    data = samples_from_field(read_field_csv(in, cmd.field->string()), model);
    if (data.empty()) throw DataError(fmt::format("'{}' has no usable cells for {}", cmd.field->string(), cmd.model));
  }
  const auto init = cmd.init ? params_from_json(model, read_json_file(*cmd.init)) : init_for(s, model);
  const auto report = fit(model, data, init, s.fit);
  write_json(s.out_dir / fmt::format("fit_{}.json", to_string(model)), fit_report_to_json(model, report));
  std::cout << fmt::format("{}: residual {:.6g} after {} iterations\n", to_string(model), report.residual_sum,
                           report.iterations);
  return strict_code(s, report.converged, fmt::format("{} fit", to_string(model)));
}

int cmd_simulate(const Settings& s, const SimulateCommand& cmd) {
  const auto potential = cmd.potential ? read_params_file<PotentialParams>(*cmd.potential) : s.sim_potential;
  const auto diffusion = cmd.diffusion ? read_params_file<DiffusionParams>(*cmd.diffusion) : s.sim_diffusion;
  const auto out = run_simulation(s, potential, diffusion);
  const auto q = IndexFitParams::from_span(out.sim.fit.params);
  std::cout << fmt::format("{} accepted of {} attempts; A0 = {:.4f}, omega = {:.4f}\n", out.sim.n_accepted,
                           out.sim.attempts, q.A0, q.omega);
  return out.code;
}

int cmd_omori(const Settings& s, const OmoriCommand& cmd) {
  if (cmd.returns && cmd.counts) throw UsageError("omori takes at most one of --returns, --counts");
  if (cmd.counts) {
    OmoriResult r = read_counts_csv(*cmd.counts);
    json j = {{"source", cmd.counts->string()}};
    int code = kOk;
    try {
      r = fit_omori(std::move(r));
      j["omega"] = *r.omega;
      j["slope"] = r.slope;
      j["intercept"] = r.intercept;
      j["fit_residual"] = r.fit_residual;
    } catch (const DataError& e) {
      std::cerr << fmt::format("omori: {}\n", e.what());
      j["omega"] = nullptr;
      j["fit_error"] = e.what();
      if (s.strict) code = kNumericalFailure;
    }
    write_json(s.out_dir / "omori.json", j);
    return code;
  }

  std::vector<std::vector<double>> series;
  int code = kOk;
  if (cmd.returns) {
    auto in = open_input(*cmd.returns);
    for (const auto& tr : read_trajectories_csv(in, cmd.returns->string())) series.push_back(tr.daily_returns());
  } else {
    const auto potential = cmd.sim.potential ? read_params_file<PotentialParams>(*cmd.sim.potential) : s.sim_potential;
    const auto diffusion = cmd.sim.diffusion ? read_params_file<DiffusionParams>(*cmd.sim.diffusion) : s.sim_diffusion;
    const auto out = run_simulation(s, potential, diffusion);
    code = out.code;
    for (const auto& tr : out.sim.accepted) series.push_back(tr.daily_returns());
  }
  const int omori_code = run_omori(s, series);
  return code != kOk ? code : omori_code;
}

int cmd_synth(const Settings& s, const SynthCommand& cmd) {
  if (cmd.model == "ou") {
    OuSpec spec = cmd.ou.value_or(OuSpec{});
    if (!cmd.ou) spec.seed = substream_seed(s.seed, 0x5e);
    spec.validate();
    const auto ensemble = generate_ou(spec);
    write_file(s.out_dir / "ensemble.csv", [&](std::ostream& o) { write_ensemble_csv(ensemble, o); });
    return kOk;
  }
  const SurfaceModel model = parse_surface_model(cmd.model);
  const auto params = cmd.params ? params_from_json(model, read_json_file(*cmd.params)) : reference_params(model);
  if (cmd.nx < 1 || cmd.nt < 1) throw UsageError("synth grid needs at least one point per axis");
  auto axis = [](double lo, double hi, std::size_t n) {
    std::vector<double> v;
    for (std::size_t i = 0; i < n; ++i) v.push_back(n == 1 ? lo : lo + (hi - lo) * static_cast<double>(i) / (n - 1));
    return v;
  };
  const auto xs = model == SurfaceModel::potential ? axis(cmd.x_min, cmd.x_max, cmd.nx) : std::vector<double>{0.0};
  const auto grid = product_grid(xs, axis(cmd.t_min, cmd.t_max, cmd.nt));
  const auto samples = sample_surface(model, params, grid, cmd.noise, s.seed, s.fit.t_floor);
  write_file(s.out_dir / "samples.csv", [&](std::ostream& o) { write_samples_csv(samples, o); });
  return kOk;
}

int cmd_pipeline(const Settings& s) {
  int code = kOk;
  auto merge = [&code](int c) {
    if (code == kOk) code = c;
  };

  const auto ensemble = load_input_ensemble(s);
  write_file(s.out_dir / "ensemble.csv", [&](std::ostream& o) { write_ensemble_csv(ensemble, o); });
  const auto field = estimate_field(ensemble, s);
  write_field_outputs(s, ensemble, field);

  std::optional<PotentialParams> fitted_potential;
  std::optional<DiffusionParams> fitted_diffusion;
  for (const SurfaceModel model : {SurfaceModel::potential, SurfaceModel::diffusion}) {
    const auto path = s.out_dir / fmt::format("{}_fit.json", to_string(model));
    const auto samples = samples_from_field(field, model);
    if (samples.empty()) {
      write_json(path, {{"model", to_string(model)}, {"skipped", true}, {"reason", "no supported cells"}});
      continue;
    }
    const auto report = fit(model, samples, init_for(s, model), s.fit);
    write_json(path, fit_report_to_json(model, report));
    merge(strict_code(s, report.converged, fmt::format("{} fit", to_string(model))));
    if (model == SurfaceModel::potential) fitted_potential = PotentialParams::from_span(report.params);
    if (model == SurfaceModel::diffusion) fitted_diffusion = DiffusionParams::from_span(report.params);
  }

  PotentialParams potential = s.sim_potential;
  DiffusionParams diffusion = s.sim_diffusion;
  if (s.sim_parameters == "fitted") {
    if (!fitted_potential || !fitted_diffusion) {
      throw DataError("simulation.parameters is 'fitted' but a surface fit was skipped");
    }
    potential = *fitted_potential;
    diffusion = *fitted_diffusion;
  }

  std::vector<double> xs;
  for (std::size_t b = 0; b < s.binning.n_bins; ++b) xs.push_back(s.binning.center(b));
  std::vector<double> ts;
  for (double t = s.sim.t_start - 5.0; t <= s.sim.t_end + 1e-9; t += 1.0) ts.push_back(t);
  const auto pgrid = product_grid(xs, ts);
  const auto pvals = potential.to_array();
  write_file(s.out_dir / "potential_surface.csv", [&](std::ostream& o) {
    write_samples_csv(sample_surface(SurfaceModel::potential, pvals, pgrid, 0.0, s.seed, s.fit.t_floor), o);
  });
  const std::vector<double> x0{0.0};
  const auto dgrid = product_grid(x0, ts);
  const auto dvals = diffusion.to_array();
  write_file(s.out_dir / "diffusion_surface.csv", [&](std::ostream& o) {
    write_samples_csv(sample_surface(SurfaceModel::diffusion, dvals, dgrid, 0.0, s.seed, s.sim.step()), o);
  });

  const auto sim = run_simulation(s, potential, diffusion);
  merge(sim.code);
  std::vector<std::vector<double>> series;
  for (const auto& tr : sim.sim.accepted) series.push_back(tr.daily_returns());
  merge(run_omori(s, series));

  write_plot_scripts(s.out_dir, s.omori.threshold_multiples);
  write_json(s.out_dir / "resolved_config.json", settings_to_json(s));
  std::cout << fmt::format("pipeline artifacts in {}\n", s.out_dir.string());
  return code;
}

}  // namespace crashdyn::cli
