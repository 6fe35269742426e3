#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "crashdyn/random.hpp"
#include "crashdyn/surfaces.hpp"

namespace crashdyn {

/// Ito dynamics dx = drift(x, t) dt + sqrt(diffusion(x, t)) dW.
struct Dynamics {
  std::function<double(double x, double t)> drift;
  std::function<double(double x, double t)> diffusion;
};

struct SimConfig {
  double t_start = 0.0;
  double t_end = 25.0;
  std::size_t substeps_per_day = 50;
  std::size_t n_accepted_target = 150;
  /// A trajectory is kept when s(t_start + decline_window_days) / s0 < 1 - decline_threshold.
  /// A threshold of 0 disables the filter.
  double decline_threshold = 0.25;
  std::size_t decline_window_days = 1;
  std::size_t max_attempts = 200000;
  std::uint64_t seed = 1987;
  double x0 = 0.0;
  double s0 = 1.0;
  /// Multiplies D2; 0 gives the deterministic drift-only limit.
  double diffusion_scale = 1.0;
  /// First day of the averaged index included in the decaying-sinusoid fit.
  std::size_t fit_from_day = 1;
  IndexFitParams index_init = reference_index_params();
  FitOptions fit_options{};
  /// Worker threads for trajectory generation; 0 picks the hardware concurrency.
  std::size_t threads = 0;

  void validate() const;
  double step() const noexcept { return 1.0 / static_cast<double>(substeps_per_day); }
  std::size_t n_days() const;
};

/// State sampled on the daily grid t_start, t_start + 1, ..., t_end.
struct Trajectory {
  std::vector<double> times;
  std::vector<double> x;
  std::vector<double> s;

  /// r(d) = x(d+1) - x(d), the log-return accumulated over day d.
  std::vector<double> daily_returns() const;
};

/// -dU/dx of the potential, analytic away from x = 0 and a symmetric finite
/// difference at the cube-root singularity.
double drift(const PotentialParams& params, double x, double t);

/// Drift from the potential and the x-independent D2(t) regularized at t_floor = h.
Dynamics potential_dynamics(const PotentialParams& potential, const DiffusionParams& diffusion,
                            const SimConfig& config);

/// Euler-Maruyama endpoint for prescribed Wiener increments dW (one per step).
double euler_maruyama_endpoint(const Dynamics& dynamics, double x0, double t0, double h,
                               std::span<const double> dW);

/// x_{k+1} = x_k + drift h + sqrt(D2 h) xi_k with xi_k ~ N(0, 1). Index path
/// s(d) = s0 exp(x(d) - x0). Throws NumericalError on a non-finite state.
Trajectory simulate_trajectory(const Dynamics& dynamics, const SimConfig& config, Rng& rng);
Trajectory simulate_trajectory(const PotentialParams& potential, const DiffusionParams& diffusion,
                               const SimConfig& config, Rng& rng);

struct IndexSimulation {
  std::vector<double> days;
  std::vector<double> s_mean;
  std::size_t n_accepted = 0;
  std::size_t attempts = 0;
  std::size_t aborted = 0;
  double acceptance_rate = 0.0;
  /// Attempts ran out before n_accepted_target trajectories were kept.
  bool partial = false;
  /// Decaying-sinusoid fit of s_mean over days >= fit_from_day.
  FitReport fit;
  std::vector<Trajectory> accepted;
};

/// Draws trajectories (attempt k uses substream k of config.seed) until the
/// target number pass the decline filter, then averages s(t) pointwise.
/// Results do not depend on the thread count.
IndexSimulation simulate_index(const Dynamics& dynamics, const SimConfig& config);
IndexSimulation simulate_index(const PotentialParams& potential, const DiffusionParams& diffusion,
                               const SimConfig& config);

/// `t,s_mean,n_accepted`
void write_index_csv(const IndexSimulation& sim, std::ostream& out);
/// `trajectory,t,x,s`
void write_trajectories_csv(std::span<const Trajectory> trajectories, std::ostream& out);
std::vector<Trajectory> read_trajectories_csv(std::istream& in, const std::string& source_name = "<stream>");

}  // namespace crashdyn
