#pragma once

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <optional>
#include <span>
#include <vector>

#include "crashdyn/ingest.hpp"
#include "crashdyn/surfaces.hpp"

namespace crashdyn {

/// Ornstein-Uhlenbeck ensemble: x_{k+1} = x_k - theta x_k dt + sqrt(D dt) xi_k,
/// sampled once per day.
struct OuSpec {
  double theta = 0.5;
  double D = 0.01;
  std::size_t n_assets = 1000;
  std::size_t n_days = 25;
  double dt = 0.01;
  std::uint64_t seed = 1;
  /// Spread of x at day 0. Defaults to the stationary standard deviation of
  /// the discrete recursion (or 0.1 when D == 0).
  std::optional<double> initial_sd;

  void validate() const;
  std::size_t steps_per_day() const;
  /// Stationary variance of the discrete recursion, D dt / (1 - (1 - theta dt)^2).
  double stationary_variance() const;
};

/// Day axis 0 .. n_days-1; asset i uses substream i of the seed.
ReturnEnsemble generate_ou(const OuSpec& spec);

struct Coord {
  double x = 0.0;
  double t = 0.0;
};

/// Exact model values on `grid` plus independent N(0, noise_sigma^2) noise.
std::vector<Sample> sample_surface(SurfaceModel model, std::span<const double> params,
                                   std::span<const Coord> grid, double noise_sigma, std::uint64_t seed,
                                   double t_floor = 0.02);

/// Regular (x, t) product grid; for diffusion and index models pass a single x.
std::vector<Coord> product_grid(std::span<const double> xs, std::span<const double> ts);

/// `x,t,value`
void write_samples_csv(std::span<const Sample> samples, std::ostream& out);
std::vector<Sample> read_samples_csv(std::istream& in, const std::string& source_name = "<stream>");

}  // namespace crashdyn
