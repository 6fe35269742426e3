#include <cmath>
#include <fstream>

#include <gtest/gtest.h>
#include <nlohmann/json.hpp>

#include "cli.hpp"
#include "crashdyn/ingest.hpp"
#include "crashdyn/km_estimate.hpp"
#include "crashdyn/params_json.hpp"
#include "crashdyn/sde_sim.hpp"
#include "test_support.hpp"

using namespace crashdyn;
using crashdyn::testing::read_file;
using crashdyn::testing::TempDir;
using crashdyn::testing::write_file;
using nlohmann::json;

namespace {

int crashdyn_run(std::vector<std::string> args) {
  args.insert(args.begin(), "crashdyn");
  return cli::run(args);
}

json load_json(const std::filesystem::path& p) { return json::parse(read_file(p)); }

const char* kPrices =
    "asset,date,close\n"
    "AAA,1987-10-15,100\nAAA,1987-10-16,98\nAAA,1987-10-19,75\nAAA,1987-10-20,80\n"
    "BBB,1987-10-16,50\nBBB,1987-10-19,40\nBBB,1987-10-20,41\n";

}  // namespace

TEST(CliIngest, WritesEnsembleAnchoredAtCrash) {
  TempDir dir("ingest");
  write_file(dir / "p.csv", kPrices);
  ASSERT_EQ(crashdyn_run({"ingest", "--prices", (dir / "p.csv").string(), "--crash-date", "1987-10-19", "--out-dir",
                          dir.path().string()}),
            0);
  std::ifstream in(dir / "ensemble.csv");
  const auto e = read_ensemble_csv(in);
  EXPECT_EQ(e.t_min(), -2);
  EXPECT_EQ(e.t_max(), 0);
  EXPECT_NEAR(*e.at(0, -1), std::log(75.0 / 98.0), 1e-15);
  EXPECT_NEAR(*e.at(1, 0), std::log(41.0 / 40.0), 1e-15);
}

TEST(CliIngest, MissingFileIsDataError) {
  ::testing::internal::CaptureStderr();
  const int code = crashdyn_run({"ingest", "--prices", "/no/such/prices.csv"});
  const auto err = ::testing::internal::GetCapturedStderr();
  EXPECT_EQ(code, 2);
  EXPECT_NE(err.find("/no/such/prices.csv"), std::string::npos) << err;
}

TEST(CliUsage, ExitCodes) {
  ::testing::internal::CaptureStderr();
  ::testing::internal::CaptureStdout();
  EXPECT_EQ(crashdyn_run({}), 1);
  EXPECT_EQ(crashdyn_run({"frobnicate"}), 1);
  EXPECT_EQ(crashdyn_run({"estimate", "--tau", "2", "--input", "x.csv"}), 1);
  EXPECT_EQ(crashdyn_run({"fit", "--model", "heston", "--data", "x.csv"}), 1);
  EXPECT_EQ(crashdyn_run({"--help"}), 0);
  ::testing::internal::GetCapturedStdout();
  ::testing::internal::GetCapturedStderr();
}

TEST(CliEstimate, OuSynthGivesLinearDriftAndUnsupportedRows) {
  TempDir dir("estimate");
  const auto out = dir.path().string();
  ASSERT_EQ(crashdyn_run({"synth", "--model", "ou", "--assets", "4000", "--days", "6", "--out-dir", out}), 0);
  ::testing::internal::CaptureStdout();
  ASSERT_EQ(crashdyn_run({"estimate", "--input", (dir / "ensemble.csv").string(), "--out-dir", out}), 0);
  ::testing::internal::GetCapturedStdout();
  const auto text = read_file(dir / "field.csv");
  EXPECT_NE(text.find(",false\n"), std::string::npos);
  std::ifstream in(dir / "field.csv");
  const auto f = read_field_csv(in);
  EXPECT_EQ(f.t_axis.size(), 5u);
  // Pool the supported central cells and regress D1 on x.
  double sx = 0, sy = 0, sxx = 0, sxy = 0, n = 0;
  for (std::size_t c = 0; c < f.n_cells(); ++c) {
    const double x = f.binning.center(c % f.binning.n_bins);
    if (!f.supported[c] || std::abs(x) > 0.1) continue;
    sx += x, sy += *f.d1[c], sxx += x * x, sxy += x * *f.d1[c], n += 1;
  }
  const double slope = (n * sxy - sx * sy) / (n * sxx - sx * sx);
  // dt = 0.01 integration over a day: exact one-day slope is exp(-0.5) - 1.
  EXPECT_NEAR(slope, std::exp(-0.5) - 1.0, 0.1);
  EXPECT_TRUE(std::filesystem::exists(dir / "densities.csv"));
}

TEST(CliEstimate, TwoDayInputGivesSingleLag) {
  TempDir dir("twoday");
  std::string csv = "t,asset,x\n";
  for (int i = 0; i < 8; ++i) csv += "0,a" + std::to_string(i) + ",0.01\n1,a" + std::to_string(i) + ",0.02\n";
  write_file(dir / "e.csv", csv);
  ::testing::internal::CaptureStdout();
  ASSERT_EQ(crashdyn_run({"estimate", "--input", (dir / "e.csv").string(), "--out-dir", dir.path().string()}), 0);
  ::testing::internal::GetCapturedStdout();
  std::ifstream in(dir / "field.csv");
  EXPECT_EQ(read_field_csv(in).t_axis, std::vector<int>{0});
}

TEST(CliFit, NoiselessSelfFitAndStrictNonConvergence) {
  TempDir dir("fit");
  const auto out = dir.path().string();
  ::testing::internal::CaptureStdout();
  ASSERT_EQ(crashdyn_run({"synth", "--model", "diffusion", "--t-range", "-5", "25", "--nt", "61", "--out-dir", out}),
            0);
  write_file(dir / "init.json", R"({"A": 0.009, "B": 0.0008, "p": 0.5})");
  ASSERT_EQ(crashdyn_run({"fit", "--model", "diffusion", "--data", (dir / "samples.csv").string(), "--init",
                          (dir / "init.json").string(), "--out-dir", out}),
            0);
  const auto report = load_json(dir / "fit_diffusion.json");
  EXPECT_TRUE(report["converged"].get<bool>());
  EXPECT_NEAR(report["params"]["A"].get<double>(), 7.6e-3, 7.6e-5);
  EXPECT_NEAR(report["params"]["B"].get<double>(), 9.3e-4, 9.3e-6);
  EXPECT_NEAR(report["params"]["p"].get<double>(), 0.57, 0.0057);

  write_file(dir / "far.json", R"({"A": 1.0, "B": 1.0, "p": 3.0})");
  ::testing::internal::CaptureStderr();
  EXPECT_EQ(crashdyn_run({"fit", "--model", "diffusion", "--data", (dir / "samples.csv").string(), "--init",
                          (dir / "far.json").string(), "--max-iter", "3", "--out-dir", out}),
            0);
  EXPECT_FALSE(load_json(dir / "fit_diffusion.json")["converged"].get<bool>());
  EXPECT_EQ(crashdyn_run({"--strict", "fit", "--model", "diffusion", "--data", (dir / "samples.csv").string(),
                          "--init", (dir / "far.json").string(), "--max-iter", "3", "--out-dir", out}),
            3);
  ::testing::internal::GetCapturedStderr();
  ::testing::internal::GetCapturedStdout();
}

TEST(CliFit, PublishedPotentialJsonRoundTrips) {
  TempDir dir("roundtrip");
  const json j = reference_potential_params();
  write_file(dir / "p.json", j.dump());
  const auto back = load_json(dir / "p.json").get<PotentialParams>();
  EXPECT_EQ(back.to_array(), reference_potential_params().to_array());
}

TEST(CliSimulate, ZeroDiffusionAndDeterminism) {
  TempDir dir("simulate");
  const auto a = (dir / "a").string(), b = (dir / "b").string(), z = (dir / "z").string();
  ::testing::internal::CaptureStdout();
  ASSERT_EQ(crashdyn_run({"--seed", "5", "simulate", "--trajectories", "30", "--out-dir", a}), 0);
  ASSERT_EQ(crashdyn_run({"--seed", "5", "simulate", "--trajectories", "30", "--threads", "1", "--out-dir", b}), 0);
  EXPECT_EQ(read_file(dir / "a/index.csv"), read_file(dir / "b/index.csv"));
  EXPECT_EQ(read_file(dir / "a/index_fit.json"), read_file(dir / "b/index_fit.json"));
  ASSERT_EQ(crashdyn_run({"simulate", "--diffusion-scale", "0", "--decline", "0", "--trajectories", "5",
                          "--dump-trajectories", "--out-dir", z}),
            0);
  ::testing::internal::GetCapturedStdout();
  std::ifstream in(dir / "z/trajectories.csv");
  const auto trs = read_trajectories_csv(in);
  ASSERT_EQ(trs.size(), 5u);
  for (const auto& tr : trs) EXPECT_EQ(tr.x, trs.front().x);
}

TEST(CliOmori, HugeThresholdAndPowerLawCounts) {
  TempDir dir("omori");
  const auto out = dir.path().string();
  ::testing::internal::CaptureStdout();
  ::testing::internal::CaptureStderr();
  ASSERT_EQ(crashdyn_run({"simulate", "--trajectories", "10", "--dump-trajectories", "--out-dir", out}), 0);
  const auto traj = (dir / "trajectories.csv").string();
  EXPECT_EQ(crashdyn_run({"omori", "--returns", traj, "--multiples", "1000", "--out-dir", out}), 0);
  EXPECT_FALSE(load_json(dir / "omori.json")["all_fitted"].get<bool>());
  EXPECT_EQ(read_file(dir / "omori_N_1000.csv").find(",1"), std::string::npos);
  EXPECT_EQ(crashdyn_run({"--strict", "omori", "--returns", traj, "--multiples", "1000", "--out-dir", out}), 3);
  ::testing::internal::GetCapturedStderr();
  ::testing::internal::GetCapturedStdout();

  std::string counts = "t,N\n0,0\n";
  for (int t = 1; t <= 25; ++t) counts += std::to_string(t) + "," + std::to_string(1.7 * std::pow(t, 0.296)) + "\n";
  write_file(dir / "counts.csv", counts);
  ASSERT_EQ(crashdyn_run({"omori", "--counts", (dir / "counts.csv").string(), "--out-dir", out}), 0);
  EXPECT_NEAR(load_json(dir / "omori.json")["omega"].get<double>(), 0.704, 1e-5);
}

TEST(CliPipeline, PartialConfigListsMissingKeys) {
  TempDir dir("partial");
  write_file(dir / "c.json", R"({"seed": 3, "binning": {}})");
  ::testing::internal::CaptureStderr();
  EXPECT_EQ(crashdyn_run({"pipeline", "--config", (dir / "c.json").string()}), 1);
  const auto err = ::testing::internal::GetCapturedStderr();
  EXPECT_NE(err.find("out_dir, input, fit, simulation, omori"), std::string::npos) << err;
}

TEST(CliPipeline, EndToEndArtifactsAndRerunIdentity) {
  TempDir dir("pipeline");
  const json config = {
      {"seed", 11},
      {"out_dir", (dir / "run").string()},
      {"input", {{"synth", {{"n_assets", 800}, {"n_days", 8}}}}},
      {"binning", json::object()},
      {"fit", {{"max_iter", 2000}}},
      {"simulation", {{"n_accepted_target", 20}, {"dump_trajectories", true}}},
      {"omori", {{"threshold_multiples", {1.0, 1.5}}}},
  };
  write_file(dir / "c.json", config.dump());
  ::testing::internal::CaptureStdout();
  ::testing::internal::CaptureStderr();
  ASSERT_EQ(crashdyn_run({"pipeline", "--config", (dir / "c.json").string()}), 0);
  std::map<std::string, std::string> first;
  for (const auto& e : std::filesystem::recursive_directory_iterator(dir / "run")) {
    if (e.is_regular_file()) first[e.path().lexically_relative(dir / "run").string()] = read_file(e.path());
  }
  ASSERT_EQ(crashdyn_run({"pipeline", "--config", (dir / "c.json").string(), "--threads", "1"}), 0);
  ::testing::internal::GetCapturedStderr();
  ::testing::internal::GetCapturedStdout();
  for (const char* name :
       {"ensemble.csv", "densities.csv", "field.csv", "potential_fit.json", "diffusion_fit.json",
        "potential_surface.csv", "diffusion_surface.csv", "index.csv", "index_fit.json", "trajectories.csv",
        "omori.json", "omori_N_1.csv", "omori_N_1.5.csv", "resolved_config.json", "plots/index.gp",
        "plots/omori.gp", "plots/densities.gp", "plots/coefficients.gp", "plots/potential.gp", "plots/diffusion.gp"}) {
    ASSERT_TRUE(first.count(name)) << name;
    EXPECT_EQ(read_file(dir / "run" / name), first[name]) << name;
  }
}
