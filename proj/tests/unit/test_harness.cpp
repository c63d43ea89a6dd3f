#include <gtest/gtest.h>

#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <limits>
#include <sstream>
#include <string>

#include "harness.hpp"

namespace great::harness {
namespace {

namespace fs = std::filesystem;

class TempDir {
 public:
  explicit TempDir(const std::string& name)
      : path_(fs::temp_directory_path() / ("great_test_" + name)) {
    fs::remove_all(path_);
    fs::create_directories(path_);
  }
  ~TempDir() { fs::remove_all(path_); }
  const fs::path& path() const { return path_; }

 private:
  fs::path path_;
};

std::string slurp(const fs::path& p) {
  std::ifstream in(p);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::string first_line(const fs::path& p) {
  std::ifstream in(p);
  std::string line;
  std::getline(in, line);
  return line;
}

const char* kSmallSynthetic = R"(
[experiment]
mode = synthetic
out = ignored

[synthetic]
ambient_dim = 5
dim = 2
horizon = 40
drift = 1e-4
noise = 1e-4
seed = 3
window = 10
inner_iters = 3
tube_radius = 0.3
t0 = 15
step_sizes = cvg, 1e-4
step_rule = fixed
baselines = grouse, past
grouse_step = 0.01
)";

TEST(StepChoice, Parsing) {
  EXPECT_EQ(parse_step_choice("cvg").label, "cvg");
  EXPECT_FALSE(parse_step_choice("ub").value.has_value());
  EXPECT_EQ(parse_step_choice("mid").label, "mid");
  const auto num = parse_step_choice("2.5e-4");
  ASSERT_TRUE(num.value.has_value());
  EXPECT_DOUBLE_EQ(*num.value, 2.5e-4);
  EXPECT_THROW(parse_step_choice("fast"), Error);
}

TEST(FormatDouble, RoundTripsExactly) {
  for (double x : {0.0, 1.0, -3.25, 1.0 / 3.0, 4.18e-5, 1e300, 5e-324}) {
    EXPECT_EQ(std::strtod(format_double(x).c_str(), nullptr), x);
  }
}

TEST(SamplesCsv, RoundTrip) {
  TempDir dir("csv");
  Rng rng(1);
  std::vector<Vector> samples;
  for (int i = 0; i < 7; ++i) samples.push_back(rng.normal_vector(4));
  write_samples_csv(dir.path() / "s.csv", samples);
  const auto back = read_samples_csv(dir.path() / "s.csv");
  ASSERT_EQ(back.size(), samples.size());
  for (std::size_t i = 0; i < samples.size(); ++i) EXPECT_EQ(back[i], samples[i]);
  EXPECT_THROW(read_samples_csv(dir.path() / "missing.csv"), Error);
}

TEST(ParseConfig, SyntheticSection) {
  const auto cfg = parse_config(kSmallSynthetic, ".");
  EXPECT_EQ(cfg.mode, Mode::kSynthetic);
  EXPECT_EQ(cfg.synthetic.data.ambient_dim, 5);
  EXPECT_EQ(cfg.synthetic.data.horizon, 40);
  EXPECT_DOUBLE_EQ(cfg.synthetic.data.drift, 1e-4);
  EXPECT_EQ(cfg.synthetic.window_length, 10);
  EXPECT_EQ(cfg.synthetic.t0, 15);
  ASSERT_EQ(cfg.synthetic.step_sizes.size(), 2u);
  EXPECT_EQ(cfg.synthetic.step_sizes[0].label, "cvg");
  EXPECT_EQ(cfg.synthetic.baselines.size(), 2u);
}

TEST(ParseConfig, RejectsMalformedInput) {
  EXPECT_THROW(parse_config("[experiment]\nmode = banana\n", "."), Error);
  EXPECT_THROW(parse_config("[experiment]\nmode = synthetic\n[synthetic]\nwindow = ten\n", "."), Error);
  EXPECT_THROW(load_config("/nonexistent/config.ini"), Error);
}

TEST(ParseConfig, SysidPathRelativeToConfig) {
  TempDir dir("relpath");
  fs::copy_file(fs::path(GREAT_SOURCE_DIR) / "data" / "lti_plant.ltv", dir.path() / "plant.ltv");
  const std::string text = "[experiment]\nmode = sysid\n[sysid]\nsystem = plant.ltv\n";
  const auto cfg = parse_config(text, dir.path());
  EXPECT_EQ(cfg.sysid.system_file.lexically_normal(), (dir.path() / "plant.ltv").lexically_normal());
  EXPECT_THROW(parse_config(text, "/nonexistent"), Error);
}

TEST(ApplySeed, OverridesEverySeed) {
  auto cfg = parse_config(kSmallSynthetic, ".");
  apply_seed(cfg, 77);
  EXPECT_EQ(cfg.synthetic.data.seed, 77u);
  EXPECT_EQ(cfg.sysid.seed, 77u);
}

TEST(RunSynthetic, WritesArtifactsAndStaysInTube) {
  TempDir dir("synthetic");
  const auto cfg = parse_config(kSmallSynthetic, ".");
  const auto res = run_synthetic(cfg.synthetic, dir.path());
  ASSERT_EQ(res.runs.size(), 2u);
  for (const auto& r : res.runs) {
    EXPECT_TRUE(r.assumption.holds);
    EXPECT_EQ(r.violations, 0);
    EXPECT_EQ(r.times.front(), 16);
    EXPECT_EQ(r.times.back(), 40);
    for (std::size_t i = 0; i < r.distance.size(); ++i) {
      EXPECT_LE(r.distance[i] * r.distance[i], r.tube_sq[i]);
    }
  }
  for (const char* f : {"dataset_samples.csv", "dataset_truth.csv", "manifest.txt", "summary.txt",
                        "synthetic_cvg.csv", "synthetic_baselines.csv"}) {
    EXPECT_TRUE(fs::exists(dir.path() / f)) << f;
  }
  EXPECT_EQ(first_line(dir.path() / "synthetic_cvg.csv"), "t,d2_measured,tube_bound,ultimate_bound");
  EXPECT_NE(slurp(dir.path() / "manifest.txt").find("reprojection"), std::string::npos);
  EXPECT_EQ(read_samples_csv(dir.path() / "dataset_samples.csv").size(), 40u);
}

TEST(RunSynthetic, DeterministicOutput) {
  TempDir a("det_a"), b("det_b");
  const auto cfg = parse_config(kSmallSynthetic, ".");
  run_synthetic(cfg.synthetic, a.path());
  run_synthetic(cfg.synthetic, b.path());
  for (const auto& e : fs::directory_iterator(a.path())) {
    EXPECT_EQ(slurp(e.path()), slurp(b.path() / e.path().filename())) << e.path().filename();
  }
}

TEST(RunSynthetic, LineSearchOmitsCertificates) {
  TempDir dir("linesearch");
  auto cfg = parse_config(kSmallSynthetic, ".");
  cfg.synthetic.step_rule = StepRule::kLineSearch;
  cfg.synthetic.step_sizes = {{"fixed", 0.01}};
  run_synthetic(cfg.synthetic, dir.path());
  EXPECT_EQ(first_line(dir.path() / "synthetic_fixed.csv"), "t,d2_measured");
}

TEST(RunSynthetic, ViolatedAssumptionAbortsWithReport) {
  TempDir dir("violated");
  auto cfg = parse_config(kSmallSynthetic, ".");
  cfg.synthetic.data.noise = 0.2;
  try {
    run_synthetic(cfg.synthetic, dir.path());
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kAssumptionViolated);
  }
  EXPECT_TRUE(fs::exists(dir.path() / "assumption4_cvg.txt"));
  EXPECT_NE(slurp(dir.path() / "assumption4_cvg.txt").find("holds = false"), std::string::npos);
}

SysidConfig small_sysid() {
  SysidConfig cfg;
  cfg.system_file = fs::path(GREAT_SOURCE_DIR) / "data" / "lti_plant.ltv";
  cfg.lag = 3;
  cfg.t_ini = 2;
  cfg.t_fut = 2;
  cfg.dim = 7;
  cfg.window_length = 20;
  cfg.step_size = 0.05;
  cfg.inner_iters = 3;
  cfg.init_length = 40;
  cfg.validate_length = 20;
  cfg.test_length = 20;
  cfg.test_reps = 3;
  cfg.seed = 2;
  return cfg;
}

TEST(Sysid, ExactDataYieldsSmallErrors) {
  const auto res = simulate_sysid(small_sysid());
  ASSERT_EQ(res.trackers.size(), 3u);
  EXPECT_EQ(res.rows.size(), 40u);
  EXPECT_LT(res.split_mean(0, "validate"), 1e-6);
  EXPECT_LT(res.split_mean(0, "test"), 1e-6);
}

TEST(Sysid, RejectsInconsistentPartition) {
  auto cfg = small_sysid();
  cfg.t_fut = 3;
  EXPECT_THROW(simulate_sysid(cfg), Error);
}

TEST(Sysid, WritesErrorTable) {
  TempDir dir("sysid");
  run_sysid(small_sysid(), dir.path());
  EXPECT_EQ(first_line(dir.path() / "sysid_errors.csv"),
            "t,split,great_mean,great_std,grouse_mean,grouse_std,past_mean,past_std");
}

TEST(Validate, PicksBehaviorDimensionAndScoresFailuresInf) {
  ValidateGrid grid;
  grid.dims = {6, 7, 8, 9};
  grid.windows = {20};
  const auto res = validate(small_sysid(), grid);
  ASSERT_EQ(res.entries.size(), 4u);
  EXPECT_EQ(res.best.dim, 7);
  EXPECT_EQ(res.entries.back().score, std::numeric_limits<double>::infinity());
  grid.dims.clear();
  grid.windows.clear();
  EXPECT_THROW(validate(small_sysid(), grid), Error);
}

TEST(Certify, WritesBoundsTable) {
  TempDir dir("certify");
  CertifyConfig cfg;
  cfg.params.noise_bound = 1e-3;
  cfg.params.drift_bound = 5e-5;
  cfg.params.sigma_lower = 8.49;
  cfg.params.sigma_upper = 11.28;
  cfg.params.tube_radius = 0.1;
  cfg.params.window_length = 100;
  cfg.params.inner_iters = 10;
  cfg.params.dim = 3;
  cfg.step = StepChoice{"ub", {}};
  cfg.delta_sup = 0.0615676;
  cfg.initial_distance = 0.0999;
  cfg.steps = 10;
  const auto res = certify(cfg, dir.path());
  EXPECT_NEAR(res.alpha, 4.20e-5, 0.05 * 4.20e-5);
  EXPECT_TRUE(res.assumption.holds);
  EXPECT_EQ(res.tube.per_step.size(), 11u);
  EXPECT_EQ(first_line(dir.path() / "certify.csv"), "step,tube_bound,ultimate_bound");
  EXPECT_TRUE(fs::exists(dir.path() / "assumption4.txt"));
}

}  // namespace
}  // namespace great::harness
