#pragma once

// Config-driven experiment runners behind the `great` command-line tool.
//
// Every runner writes plain CSV (header row, %.17g numbers) plus small
// key = value report files into an output directory. Runs are deterministic
// in (config, seed).

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "great/behavior.hpp"
#include "great/certs.hpp"
#include "great/simgen.hpp"
#include "great/tracker.hpp"

namespace great::harness {

/// Step-size spec: "cvg", "ub", "mid" (midpoint of the two) or a number.
struct StepChoice {
  std::string label;
  std::optional<double> value;
};

StepChoice parse_step_choice(const std::string& text);

struct SyntheticConfig {
  SyntheticSpec data{};
  Index window_length = 100;
  int inner_iters = 10;
  double tube_radius = 0.1;
  /// Time of the initial estimate; tracking covers t0 + 1 .. horizon.
  long t0 = 99;
  /// Distance from U_{t0+1} at which the initial estimate is drawn; defaults
  /// to r_b - 2c so that the estimate lies within r_b - c of U_{t0}.
  std::optional<double> init_radius;
  std::optional<double> sigma_lower;
  std::optional<double> sigma_upper;
  std::vector<StepChoice> step_sizes{{"cvg", {}}, {"mid", {}}, {"ub", {}}};
  StepRule step_rule = StepRule::kFixed;
  /// Extra trackers run on the same data for comparison: "grouse", "past".
  std::vector<std::string> baselines;
  double grouse_step = 0.0;
  double past_forget = 0.985;
};

struct SysidConfig {
  std::filesystem::path system_file;
  Index lag = 9;  // L
  Index t_ini = 5;
  Index t_fut = 5;
  Index dim = 13;
  Index window_length = 40;
  double step_size = 1e-2;
  int inner_iters = 1;
  StepRule step_rule = StepRule::kLineSearch;
  std::vector<std::string> trackers{"great", "grouse", "past"};
  double grouse_step = 1e-2;
  double past_forget = 0.985;
  long init_length = 100;
  long validate_length = 100;
  long test_length = 100;
  int test_reps = 20;
  double noise = 0.0;
  double input_scale = 1.0;
  double state_scale = 1.0;
  /// Optional large measurement error added to y at one time step.
  std::optional<long> disturbance_time;
  double disturbance_norm = 0.0;
  std::uint64_t seed = 1;
};

struct ValidateGrid {
  std::vector<Index> dims;
  std::vector<Index> windows;
  std::vector<double> step_sizes;
  std::vector<double> forgets;
  std::string tracker = "great";
};

struct CertifyConfig {
  CertificateParams params{};
  std::optional<StepChoice> step;
  double delta_sup = 0.0;
  double initial_distance = 0.0;
  long steps = 100;
};

enum class Mode { kSynthetic, kSysid, kValidate, kCertify };

struct ExperimentConfig {
  Mode mode = Mode::kSynthetic;
  std::filesystem::path out_dir = "out";
  SyntheticConfig synthetic{};
  SysidConfig sysid{};
  ValidateGrid grid{};
  CertifyConfig certify{};
};

/// Reads an INI file. Relative file paths inside resolve against the config's
/// directory. Throws Error(kConfig) on malformed or missing keys.
ExperimentConfig load_config(const std::filesystem::path& path);
ExperimentConfig parse_config(const std::string& text, const std::filesystem::path& base_dir);

/// Overrides every seed in the config.
void apply_seed(ExperimentConfig& cfg, std::uint64_t seed);

struct SyntheticStepResult {
  std::string label;
  double alpha = 0.0;
  Assumption4Report assumption{};
  std::vector<long> times;
  std::vector<double> distance;  // d2(Û_t, U_t)
  std::vector<double> tube_sq;   // squared tube bound
  double ultimate_sq = 0.0;
  int violations = 0;
};

struct SyntheticResult {
  double sigma_lower = 0.0;
  double sigma_upper = 0.0;
  double delta_sup = 0.0;
  double initial_distance = 0.0;  // d2(Û_{t0}, U_{t0})
  std::vector<SyntheticStepResult> runs;
};

/// Runs the synthetic tracking study. Step sizes are resolved and checked
/// against the sufficient decrease condition before any tracking; a failing
/// step size aborts with kAssumptionViolated after the report is written.
/// Line-search runs emit distances only, never certificates.
SyntheticResult run_synthetic(const SyntheticConfig& cfg, const std::filesystem::path& out_dir);

struct SysidRow {
  long t = 0;
  std::string split;
  std::vector<double> mean;  // one per tracker
  std::vector<double> stddev;
};

struct SysidResult {
  std::vector<std::string> trackers;
  std::vector<SysidRow> rows;

  /// Mean of the per-t mean errors of tracker i over rows with `split`.
  double split_mean(std::size_t tracker, const std::string& split) const;
};

SysidResult run_sysid(const SysidConfig& cfg, const std::filesystem::path& out_dir);
/// Same pipeline without writing files.
SysidResult simulate_sysid(const SysidConfig& cfg);

struct ValidationEntry {
  Index dim = 0;
  Index window_length = 0;
  double step_size = 0.0;
  double forget = 0.0;
  double score = 0.0;  // +inf if the candidate failed
};

struct ValidationResult {
  std::vector<ValidationEntry> entries;
  ValidationEntry best;
};

/// Scores every grid point by its mean validation-split error and returns the
/// argmin; ties go to the smaller d, then the smaller T. Throws kEmptyGrid.
ValidationResult validate(const SysidConfig& base, const ValidateGrid& grid,
                          const std::filesystem::path* out_dir = nullptr);

struct CertifyResult {
  double alpha = 0.0;
  Assumption4Report assumption{};
  TubeBound tube{};
};

CertifyResult certify(const CertifyConfig& cfg, const std::filesystem::path& out_dir);

/// Serialization helpers shared with the tests.
std::string format_double(double x);
void write_samples_csv(const std::filesystem::path& path, const std::vector<Vector>& samples);
std::vector<Vector> read_samples_csv(const std::filesystem::path& path);

}  // namespace great::harness
