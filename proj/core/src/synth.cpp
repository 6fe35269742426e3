#include "crashdyn/synth.hpp"

#include <cmath>
#include <istream>
#include <ostream>
#include <string>

#include <fmt/format.h>
#include <fmt/ostream.h>

#include "crashdyn/error.hpp"
#include "crashdyn/random.hpp"
#include "csv_util.hpp"

namespace crashdyn {

void OuSpec::validate() const {
  if (!(theta > 0.0)) throw UsageError(fmt::format("OU: theta must be > 0, got {}", theta));
  if (!(D >= 0.0)) throw UsageError(fmt::format("OU: D must be >= 0, got {}", D));
  if (n_assets < 1 || n_days < 2) throw UsageError("OU: need n_assets >= 1 and n_days >= 2");
  if (!(dt > 0.0 && dt <= 1.0)) throw UsageError(fmt::format("OU: dt must lie in (0, 1], got {}", dt));
  const double steps = 1.0 / dt;
  if (std::abs(steps - std::round(steps)) > 1e-9 * steps) {
    throw UsageError(fmt::format("OU: 1/dt must be an integer, got dt = {}", dt));
  }
  if (std::abs(1.0 - theta * dt) >= 1.0) {
    throw UsageError(fmt::format("OU: theta * dt = {} makes the recursion unstable", theta * dt));
  }
  if (initial_sd && !(*initial_sd >= 0.0)) throw UsageError("OU: initial_sd must be >= 0");
}

std::size_t OuSpec::steps_per_day() const { return static_cast<std::size_t>(std::llround(1.0 / dt)); }

double OuSpec::stationary_variance() const {
  const double rho = 1.0 - theta * dt;
  return D * dt / (1.0 - rho * rho);
}

ReturnEnsemble generate_ou(const OuSpec& spec) {
  spec.validate();
  std::vector<std::string> ids;
  ids.reserve(spec.n_assets);
  for (std::size_t i = 0; i < spec.n_assets; ++i) ids.push_back(fmt::format("ou{:06d}", i));
  ReturnEnsemble ensemble(std::move(ids), 0, static_cast<int>(spec.n_days) - 1);

  const double x0_sd = spec.initial_sd.value_or(spec.D > 0.0 ? std::sqrt(spec.stationary_variance()) : 0.1);
  const double decay = 1.0 - spec.theta * spec.dt;
  const double noise = std::sqrt(spec.D * spec.dt);
  const std::size_t steps = spec.steps_per_day();
  std::normal_distribution<double> normal(0.0, 1.0);

  for (std::size_t a = 0; a < spec.n_assets; ++a) {
    Rng rng = make_substream(spec.seed, a);
    double x = x0_sd * normal(rng);
    ensemble.set(a, 0, x);
    for (std::size_t d = 1; d < spec.n_days; ++d) {
      for (std::size_t k = 0; k < steps; ++k) x = decay * x + noise * normal(rng);
      ensemble.set(a, static_cast<int>(d), x);
    }
  }
  return ensemble;
}

std::vector<Sample> sample_surface(SurfaceModel model, std::span<const double> params,
                                   std::span<const Coord> grid, double noise_sigma, std::uint64_t seed,
                                   double t_floor) {
  if (grid.empty()) throw UsageError("sample_surface: empty grid");
  if (!(noise_sigma >= 0.0)) throw UsageError("sample_surface: noise_sigma must be >= 0");
  if (params.size() != parameter_count(model)) {
    throw UsageError(fmt::format("sample_surface: {} needs {} parameters, got {}", to_string(model),
                                 parameter_count(model), params.size()));
  }
  Rng rng{substream_seed(seed, 0)};
  std::normal_distribution<double> normal(0.0, 1.0);
  std::vector<Sample> out;
  out.reserve(grid.size());
  for (const auto& c : grid) {
    double v = model_value(model, params, c.x, c.t, t_floor);
    if (noise_sigma > 0.0) v += noise_sigma * normal(rng);
    out.push_back({c.x, c.t, v});
  }
  return out;
}

std::vector<Coord> product_grid(std::span<const double> xs, std::span<const double> ts) {
  std::vector<Coord> grid;
  grid.reserve(xs.size() * ts.size());
  for (double t : ts) {
    for (double x : xs) grid.push_back({x, t});
  }
  return grid;
}

void write_samples_csv(std::span<const Sample> samples, std::ostream& out) {
  out << "x,t,value\n";
  for (const auto& s : samples) fmt::print(out, "{:.17g},{:.17g},{:.17g}\n", s.x, s.t, s.value);
}

std::vector<Sample> read_samples_csv(std::istream& in, const std::string& source_name) {
  std::vector<Sample> samples;
  std::string line;
  std::size_t line_no = 0;
  bool header_seen = false;
  while (std::getline(in, line)) {
    ++line_no;
    if (detail::blank(line)) continue;
    const auto f = detail::split(line, ',');
    if (!header_seen) {
      if (f.size() != 3 || f[0] != "x" || f[1] != "t" || f[2] != "value") {
        throw DataError(fmt::format("{}:{}: expected header 'x,t,value'", source_name, line_no));
      }
      header_seen = true;
      continue;
    }
    const auto x = f.size() == 3 ? detail::parse_double(f[0]) : std::nullopt;
    const auto t = f.size() == 3 ? detail::parse_double(f[1]) : std::nullopt;
    const auto v = f.size() == 3 ? detail::parse_double(f[2]) : std::nullopt;
    if (!x || !t || !v || !std::isfinite(*x) || !std::isfinite(*t) || !std::isfinite(*v)) {
      throw DataError(fmt::format("{}:{}: unparseable row", source_name, line_no));
    }
    samples.push_back({*x, *t, *v});
  }
  if (samples.empty()) throw DataError(fmt::format("{}: no rows", source_name));
  return samples;
}

}  // namespace crashdyn
