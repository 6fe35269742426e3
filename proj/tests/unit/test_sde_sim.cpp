#include <cmath>
#include <random>
#include <sstream>

#include <gtest/gtest.h>

#include "crashdyn/error.hpp"
#include "crashdyn/sde_sim.hpp"

using namespace crashdyn;

namespace {

Dynamics ou(double theta, double c) {
  return {[theta](double x, double) { return -theta * x; }, [c](double, double) { return c; }};
}

SimConfig short_config() {
  SimConfig c;
  c.n_accepted_target = 20;
  c.max_attempts = 5000;
  c.threads = 2;
  return c;
}

}  // namespace

TEST(SimConfig, Validation) {
  SimConfig c;
  EXPECT_NO_THROW(c.validate());
  EXPECT_EQ(c.n_days(), 25u);
  EXPECT_DOUBLE_EQ(c.step(), 0.02);
  auto bad = c;
  bad.t_end = 0.0;
  EXPECT_THROW(bad.validate(), UsageError);
  bad = c;
  bad.t_end = 10.5;
  EXPECT_THROW(bad.validate(), UsageError);
  bad = c;
  bad.decline_threshold = 1.0;
  EXPECT_THROW(bad.validate(), UsageError);
  bad = c;
  bad.decline_window_days = 26;
  EXPECT_THROW(bad.validate(), UsageError);
  bad = c;
  bad.s0 = 0.0;
  EXPECT_THROW(bad.validate(), UsageError);
}

TEST(Trajectory, ZeroDynamicsStaysPut) {
  const Dynamics none{[](double, double) { return 0.0; }, [](double, double) { return 0.0; }};
  SimConfig c;
  c.x0 = 0.3;
  c.s0 = 2.0;
  Rng rng = make_substream(1, 0);
  const auto tr = simulate_trajectory(none, c, rng);
  ASSERT_EQ(tr.x.size(), 26u);
  for (std::size_t d = 0; d < 26; ++d) {
    EXPECT_EQ(tr.x[d], 0.3);
    EXPECT_EQ(tr.s[d], 2.0);
    EXPECT_EQ(tr.times[d], static_cast<double>(d));
  }
  for (double r : tr.daily_returns()) EXPECT_EQ(r, 0.0);
}

TEST(Trajectory, SameSeedIsBitwiseIdentical) {
  SimConfig c;
  Rng a = make_substream(99, 3), b = make_substream(99, 3);
  const auto p = reference_potential_params();
  const auto d = reference_diffusion_params();
  const auto ta = simulate_trajectory(p, d, c, a);
  const auto tb = simulate_trajectory(p, d, c, b);
  EXPECT_EQ(ta.x, tb.x);
  EXPECT_EQ(ta.s, tb.s);
}

TEST(Trajectory, DailyReturnsAreIncrements) {
  SimConfig c;
  Rng rng = make_substream(5, 0);
  const auto tr = simulate_trajectory(reference_potential_params(), reference_diffusion_params(), c, rng);
  const auto r = tr.daily_returns();
  ASSERT_EQ(r.size(), 25u);
  for (std::size_t d = 0; d < 25; ++d) {
    EXPECT_DOUBLE_EQ(r[d], tr.x[d + 1] - tr.x[d]);
    EXPECT_NEAR(std::log(tr.s[d + 1] / tr.s[d]), r[d], 1e-12);
    EXPECT_GT(tr.s[d], 0.0);
  }
}

TEST(Trajectory, DivergenceIsNumericalError) {
  const Dynamics blowup{[](double x, double) { return 1e300 * (1 + std::abs(x)); }, [](double, double) { return 0.0; }};
  SimConfig c;
  Rng rng = make_substream(1, 0);
  EXPECT_THROW(simulate_trajectory(blowup, c, rng), NumericalError);
}

TEST(Trajectory, OuStationaryVariance) {
  const double theta = 0.5, c2 = 0.01;
  SimConfig c;
  c.t_end = 20;
  const auto dyn = ou(theta, c2);
  double m2 = 0.0;
  const std::size_t n = 10000;
  for (std::size_t i = 0; i < n; ++i) {
    Rng rng = make_substream(2024, i);
    const auto tr = simulate_trajectory(dyn, c, rng);
    m2 += tr.x.back() * tr.x.back();
  }
  EXPECT_NEAR(m2 / n, c2 / (2 * theta), 0.1 * c2 / (2 * theta));
}

TEST(EulerMaruyama, StrongOrderOnOu) {
  // Endpoint difference between step h and h/2 on a shared Wiener path.
  const auto dyn = ou(1.0, 0.04);
  const std::size_t fine_steps = 1024;
  const double fine_h = 1.0 / fine_steps;
  std::vector<double> levels{8, 16, 32, 64, 128, 256};
  std::vector<double> err(levels.size() - 1, 0.0);
  std::normal_distribution<double> normal(0.0, 1.0);
  const int paths = 300;
  for (int p = 0; p < paths; ++p) {
    Rng rng = make_substream(7, p);
    std::vector<double> dw(fine_steps);
    for (auto& w : dw) w = std::sqrt(fine_h) * normal(rng);
    std::vector<double> ends;
    for (double m : levels) {
      const std::size_t agg = fine_steps / static_cast<std::size_t>(m);
      std::vector<double> coarse(static_cast<std::size_t>(m), 0.0);
      for (std::size_t k = 0; k < fine_steps; ++k) coarse[k / agg] += dw[k];
      ends.push_back(euler_maruyama_endpoint(dyn, 0.2, 0.0, 1.0 / m, coarse));
    }
    for (std::size_t l = 0; l + 1 < levels.size(); ++l) err[l] += std::abs(ends[l] - ends[l + 1]) / paths;
  }
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  const double n = static_cast<double>(err.size());
  for (std::size_t l = 0; l < err.size(); ++l) {
    const double x = std::log(1.0 / levels[l]);
    const double y = std::log(err[l]);
    sx += x, sy += y, sxx += x * x, sxy += x * y;
  }
  const double rate = (n * sxy - sx * sy) / (n * sxx - sx * sx);
  EXPECT_GE(rate, 0.4);
  EXPECT_LE(rate, 1.2);
}

TEST(SimulateIndex, VacuousFilterAcceptsAll) {
  auto c = short_config();
  c.decline_threshold = 0.0;
  const auto sim = simulate_index(reference_potential_params(), reference_diffusion_params(), c);
  EXPECT_EQ(sim.n_accepted, 20u);
  EXPECT_EQ(sim.attempts, 20u);
  EXPECT_EQ(sim.acceptance_rate, 1.0);
  EXPECT_FALSE(sim.partial);
  ASSERT_EQ(sim.s_mean.size(), 26u);
  EXPECT_EQ(sim.s_mean.front(), 1.0);
}

TEST(SimulateIndex, DeterministicLimit) {
  auto c = short_config();
  c.diffusion_scale = 0.0;
  c.max_attempts = 40;
  const auto sim = simulate_index(reference_potential_params(), reference_diffusion_params(), c);
  EXPECT_TRUE(sim.acceptance_rate == 0.0 || sim.acceptance_rate == 1.0);
  c.decline_threshold = 0.0;
  const auto all = simulate_index(reference_potential_params(), reference_diffusion_params(), c);
  for (const auto& tr : all.accepted) EXPECT_EQ(tr.x, all.accepted.front().x);
}

TEST(SimulateIndex, FilterAndThreadIndependence) {
  auto c = short_config();
  c.threads = 1;
  const auto one = simulate_index(reference_potential_params(), reference_diffusion_params(), c);
  c.threads = 4;
  const auto four = simulate_index(reference_potential_params(), reference_diffusion_params(), c);
  EXPECT_EQ(one.s_mean, four.s_mean);
  EXPECT_EQ(one.attempts, four.attempts);
  EXPECT_EQ(one.fit.params, four.fit.params);
  for (const auto& tr : one.accepted) EXPECT_LT(tr.s[1], 0.75);
  EXPECT_GT(one.attempts, one.n_accepted);
}

TEST(SimulateIndex, PartialWhenAttemptsRunOut) {
  auto c = short_config();
  c.max_attempts = 10;
  c.decline_threshold = 0.9;
  const auto sim = simulate_index(reference_potential_params(), reference_diffusion_params(), c);
  EXPECT_TRUE(sim.partial);
  EXPECT_EQ(sim.attempts, 10u);
  EXPECT_LT(sim.n_accepted, 20u);
}

TEST(TrajectoriesCsv, RoundTrip) {
  SimConfig c;
  c.t_end = 3;
  std::vector<Trajectory> trs;
  for (int i = 0; i < 3; ++i) {
    Rng rng = make_substream(1, i);
    trs.push_back(simulate_trajectory(reference_potential_params(), reference_diffusion_params(), c, rng));
  }
  std::stringstream ss;
  write_trajectories_csv(trs, ss);
  const auto back = read_trajectories_csv(ss);
  ASSERT_EQ(back.size(), 3u);
  for (int i = 0; i < 3; ++i) {
    EXPECT_EQ(back[i].x, trs[i].x);
    EXPECT_EQ(back[i].s, trs[i].s);
  }
  std::stringstream bad("trajectory,t,x,s\n0,1,0,1\n0,0,0,1\n");
  EXPECT_THROW(read_trajectories_csv(bad), DataError);
}
