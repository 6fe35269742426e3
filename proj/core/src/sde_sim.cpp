#include "crashdyn/sde_sim.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <optional>
#include <istream>
#include <map>
#include <ostream>
#include <thread>

#include <fmt/format.h>
#include <fmt/ostream.h>

#include "crashdyn/error.hpp"
#include "csv_util.hpp"

namespace crashdyn {

void SimConfig::validate() const {
  if (!std::isfinite(t_start) || !std::isfinite(t_end) || !(t_start < t_end)) {
    throw UsageError(fmt::format("simulation: need t_start < t_end, got [{}, {}]", t_start, t_end));
  }
  const double span = t_end - t_start;
  if (std::abs(span - std::round(span)) > 1e-9) {
    throw UsageError(fmt::format("simulation: t_end - t_start must be a whole number of days, got {}", span));
  }
  if (substeps_per_day < 1) throw UsageError("simulation: substeps_per_day must be >= 1");
  if (!(decline_threshold >= 0.0 && decline_threshold < 1.0)) {
    throw UsageError(fmt::format("simulation: decline_threshold must lie in [0, 1), got {}", decline_threshold));
  }
  if (decline_window_days < 1 || decline_window_days > n_days()) {
    throw UsageError(fmt::format("simulation: decline window of {} days outside the {}-day span",
                                 decline_window_days, n_days()));
  }
  if (!(s0 > 0.0) || !std::isfinite(x0)) throw UsageError("simulation: need s0 > 0 and finite x0");
  if (!(diffusion_scale >= 0.0)) throw UsageError("simulation: diffusion_scale must be >= 0");
  if (max_attempts < 1) throw UsageError("simulation: max_attempts must be >= 1");
  index_init.validate();
}

std::size_t SimConfig::n_days() const {
  return static_cast<std::size_t>(std::llround(t_end - t_start));
}

std::vector<double> Trajectory::daily_returns() const {
  std::vector<double> r;
  if (x.size() < 2) return r;
  r.reserve(x.size() - 1);
  for (std::size_t d = 0; d + 1 < x.size(); ++d) r.push_back(x[d + 1] - x[d]);
  return r;
}

double drift(const PotentialParams& q, double x, double t) {
  if (std::abs(x) < 1e-12) {
    constexpr double kStep = 1e-6;
    return -(eval_potential(q, x + kStep, t) - eval_potential(q, x - kStep, t)) / (2.0 * kStep);
  }
  const double time_factor = t < 0.0 ? q.A * std::exp(q.beta1 * t)
                                      : q.B * std::sin(q.omega1 * t + q.b) * std::exp(-q.beta2 * t);
  const double decay = std::exp(-q.alpha * x);
  const double s = std::sin(q.omega * x);
  const double shape = s * decay;
  const double shape_dx = decay * (q.omega * std::cos(q.omega * x) - q.alpha * s);
  const double root = std::cbrt(x);
  const double smoothing = std::exp(-q.gamma * std::abs(t));
  const double phi = 1.0 - q.a * root * smoothing;
  const double phi_dx = -q.a * smoothing / (3.0 * root * root);
  return -time_factor * (phi_dx * shape + phi * shape_dx);
}

Dynamics potential_dynamics(const PotentialParams& potential, const DiffusionParams& diffusion,
                            const SimConfig& config) {
  const double t_floor = config.step();
  const double scale = config.diffusion_scale;
  return {
      [potential](double x, double t) { return drift(potential, x, t); },
      [diffusion, t_floor, scale](double, double t) { return scale * eval_diffusion(diffusion, t, t_floor); },
  };
}

double euler_maruyama_endpoint(const Dynamics& dynamics, double x0, double t0, double h,
                               std::span<const double> dW) {
  double x = x0;
  for (std::size_t k = 0; k < dW.size(); ++k) {
    const double t = t0 + static_cast<double>(k) * h;
    x += dynamics.drift(x, t) * h + std::sqrt(std::max(dynamics.diffusion(x, t), 0.0)) * dW[k];
  }
  return x;
}

Trajectory simulate_trajectory(const Dynamics& dynamics, const SimConfig& config, Rng& rng) {
  const std::size_t days = config.n_days();
  const std::size_t sub = config.substeps_per_day;
  const double h = config.step();
  const double sqrt_h = std::sqrt(h);
  std::normal_distribution<double> normal(0.0, 1.0);

  Trajectory traj;
  traj.times.reserve(days + 1);
  traj.x.reserve(days + 1);
  traj.s.reserve(days + 1);
  traj.times.push_back(config.t_start);
  traj.x.push_back(config.x0);
  traj.s.push_back(config.s0);

  double x = config.x0;
  for (std::size_t d = 0; d < days; ++d) {
    for (std::size_t k = 0; k < sub; ++k) {
      const double t = config.t_start + static_cast<double>(d) + static_cast<double>(k) * h;
      const double d2 = std::max(dynamics.diffusion(x, t), 0.0);
      x += dynamics.drift(x, t) * h + std::sqrt(d2) * sqrt_h * normal(rng);
      if (!std::isfinite(x)) {
        throw NumericalError(fmt::format("trajectory diverged at t = {} (day {}, substep {})", t, d, k));
      }
    }
    const double s = config.s0 * std::exp(x - config.x0);
    if (!(s > 0.0) || !std::isfinite(s)) {
      throw NumericalError(fmt::format("index level left (0, inf) at day {}", d + 1));
    }
    traj.times.push_back(config.t_start + static_cast<double>(d + 1));
    traj.x.push_back(x);
    traj.s.push_back(s);
  }
  return traj;
}

Trajectory simulate_trajectory(const PotentialParams& potential, const DiffusionParams& diffusion,
                               const SimConfig& config, Rng& rng) {
  config.validate();
  return simulate_trajectory(potential_dynamics(potential, diffusion, config), config, rng);
}

namespace {

struct Attempt {
  std::optional<Trajectory> trajectory;  // empty when aborted
};

Attempt run_attempt(const Dynamics& dynamics, const SimConfig& config, std::size_t index) {
  Rng rng = make_substream(config.seed, index);
  try {
    return {simulate_trajectory(dynamics, config, rng)};
  } catch (const NumericalError&) {
    return {};
  }
}

bool passes_filter(const Trajectory& traj, const SimConfig& config) {
  if (config.decline_threshold == 0.0) return true;
  return traj.s[config.decline_window_days] / config.s0 < 1.0 - config.decline_threshold;
}

}  // namespace

IndexSimulation simulate_index(const Dynamics& dynamics, const SimConfig& config) {
  config.validate();
  const std::size_t threads =
      config.threads != 0 ? config.threads : std::max<std::size_t>(1, std::thread::hardware_concurrency());
  const std::size_t batch = std::max<std::size_t>(256, threads * 64);

  IndexSimulation sim;
  std::vector<Attempt> results;
  while (sim.n_accepted < config.n_accepted_target && sim.attempts < config.max_attempts) {
    const std::size_t first = sim.attempts;
    const std::size_t count = std::min(batch, config.max_attempts - first);
    results.assign(count, Attempt{});
    if (threads <= 1) {
      for (std::size_t i = 0; i < count; ++i) results[i] = run_attempt(dynamics, config, first + i);
    } else {
      std::atomic<std::size_t> next{0};
      std::vector<std::thread> pool;
      for (std::size_t w = 0; w < std::min(threads, count); ++w) {
        pool.emplace_back([&] {
          for (std::size_t i = next++; i < count; i = next++) results[i] = run_attempt(dynamics, config, first + i);
        });
      }
      for (auto& th : pool) th.join();
    }
    // Ordered scan: acceptance depends only on attempt index, not scheduling.
    for (std::size_t i = 0; i < count; ++i) {
      ++sim.attempts;
      auto& r = results[i];
      if (!r.trajectory) {
        ++sim.aborted;
      } else if (passes_filter(*r.trajectory, config)) {
        sim.accepted.push_back(std::move(*r.trajectory));
        if (++sim.n_accepted == config.n_accepted_target) break;
      }
    }
  }
  sim.acceptance_rate = static_cast<double>(sim.n_accepted) / static_cast<double>(sim.attempts);
  sim.partial = sim.n_accepted < config.n_accepted_target;

  const std::size_t days = config.n_days();
  for (std::size_t d = 0; d <= days; ++d) sim.days.push_back(config.t_start + static_cast<double>(d));
  if (sim.accepted.empty()) return sim;

  sim.s_mean.assign(days + 1, 0.0);
  for (const auto& traj : sim.accepted) {
    for (std::size_t d = 0; d <= days; ++d) sim.s_mean[d] += traj.s[d];
  }
  for (auto& v : sim.s_mean) v /= static_cast<double>(sim.n_accepted);

  std::vector<Sample> samples;
  for (std::size_t d = config.fit_from_day; d <= days; ++d) samples.push_back({0.0, sim.days[d], sim.s_mean[d]});
  if (!samples.empty()) {
    const auto init = config.index_init.to_array();
    sim.fit = fit(SurfaceModel::index, samples, init, config.fit_options);
  }
  return sim;
}

IndexSimulation simulate_index(const PotentialParams& potential, const DiffusionParams& diffusion,
                               const SimConfig& config) {
  config.validate();
  return simulate_index(potential_dynamics(potential, diffusion, config), config);
}

void write_index_csv(const IndexSimulation& sim, std::ostream& out) {
  out << "t,s_mean,n_accepted\n";
  for (std::size_t d = 0; d < sim.s_mean.size(); ++d) {
    fmt::print(out, "{:.17g},{:.17g},{}\n", sim.days[d], sim.s_mean[d], sim.n_accepted);
  }
}

void write_trajectories_csv(std::span<const Trajectory> trajectories, std::ostream& out) {
  out << "trajectory,t,x,s\n";
  for (std::size_t j = 0; j < trajectories.size(); ++j) {
    const auto& tr = trajectories[j];
    for (std::size_t d = 0; d < tr.times.size(); ++d) {
      fmt::print(out, "{},{:.17g},{:.17g},{:.17g}\n", j, tr.times[d], tr.x[d], tr.s[d]);
    }
  }
}

std::vector<Trajectory> read_trajectories_csv(std::istream& in, const std::string& source_name) {
  std::map<long long, Trajectory> by_id;
  std::string line;
  std::size_t line_no = 0;
  bool header_seen = false;
  while (std::getline(in, line)) {
    ++line_no;
    if (detail::blank(line)) continue;
    const auto f = detail::split(line, ',');
    if (!header_seen) {
      if (f.size() != 4 || f[0] != "trajectory" || f[1] != "t" || f[2] != "x" || f[3] != "s") {
        throw DataError(fmt::format("{}:{}: expected header 'trajectory,t,x,s'", source_name, line_no));
      }
      header_seen = true;
      continue;
    }
    const auto id = f.size() == 4 ? detail::parse_int(f[0]) : std::nullopt;
    const auto t = f.size() == 4 ? detail::parse_double(f[1]) : std::nullopt;
    const auto x = f.size() == 4 ? detail::parse_double(f[2]) : std::nullopt;
    const auto s = f.size() == 4 ? detail::parse_double(f[3]) : std::nullopt;
    if (!id || !t || !x || !s) throw DataError(fmt::format("{}:{}: unparseable row", source_name, line_no));
    auto& tr = by_id[*id];
    if (!tr.times.empty() && !(*t > tr.times.back())) {
      throw DataError(fmt::format("{}:{}: times of trajectory {} not increasing", source_name, line_no, *id));
    }
    tr.times.push_back(*t);
    tr.x.push_back(*x);
    tr.s.push_back(*s);
  }
  if (by_id.empty()) throw DataError(fmt::format("{}: no rows", source_name));
  std::vector<Trajectory> out;
  out.reserve(by_id.size());
  for (auto& [id, tr] : by_id) out.push_back(std::move(tr));
  return out;
}

}  // namespace crashdyn
