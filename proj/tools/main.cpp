#include <cmath>
#include <cstdint>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>
#include <fmt/format.h>

#include "harness.hpp"

namespace {

using great::harness::ExperimentConfig;
using great::harness::Mode;

struct Options {
  std::string config;
  std::optional<std::uint64_t> seed;
  std::optional<std::string> out;
};

void add_common(CLI::App* cmd, Options& opts) {
  cmd->add_option("--config", opts.config, "INI experiment config")->required()->check(CLI::ExistingFile);
  cmd->add_option("--seed", opts.seed, "Override every seed in the config");
  cmd->add_option("--out", opts.out, "Output directory (overrides [experiment] out)");
}

ExperimentConfig load(const Options& opts) {
  ExperimentConfig cfg = great::harness::load_config(opts.config);
  if (opts.seed) great::harness::apply_seed(cfg, *opts.seed);
  if (opts.out) cfg.out_dir = *opts.out;
  return cfg;
}

int run_synthetic(const Options& opts) {
  const ExperimentConfig cfg = load(opts);
  const auto result = great::harness::run_synthetic(cfg.synthetic, cfg.out_dir);
  fmt::print("sigma_lower {:.6g}  sigma_upper {:.6g}  delta_sup {:.6g}  d0 {:.6g}\n",
             result.sigma_lower, result.sigma_upper, result.delta_sup, result.initial_distance);
  if (cfg.synthetic.step_rule != great::StepRule::kFixed) {
    fmt::print("line-search mode: certificates are not emitted\n");
  }
  int violations = 0;
  for (const auto& r : result.runs) {
    if (cfg.synthetic.step_rule == great::StepRule::kFixed) {
      fmt::print("{:>4}  alpha {:.6g}  slack {:.6g}  final d2 {:.6g}  tube violations {}\n", r.label,
                 r.alpha, r.assumption.slack, r.distance.back(), r.violations);
    } else {
      fmt::print("{:>4}  alpha {:.6g}  final d2 {:.6g}\n", r.label, r.alpha, r.distance.back());
    }
    violations += r.violations;
  }
  fmt::print("wrote {}\n", cfg.out_dir.string());
  return violations == 0 ? 0 : 3;
}

int run_sysid(const Options& opts) {
  const ExperimentConfig cfg = load(opts);
  const auto result = great::harness::run_sysid(cfg.sysid, cfg.out_dir);
  for (std::size_t j = 0; j < result.trackers.size(); ++j) {
    fmt::print("{:>7}  validate {:.6g}  test {:.6g}\n", result.trackers[j],
               result.split_mean(j, "validate"), result.split_mean(j, "test"));
  }
  fmt::print("wrote {}\n", cfg.out_dir.string());
  return 0;
}

int run_validate(const Options& opts) {
  const ExperimentConfig cfg = load(opts);
  const auto result = great::harness::validate(cfg.sysid, cfg.grid, &cfg.out_dir);
  fmt::print("best {}: d {}  T {}  step {:.6g}  forget {:.6g}  score {:.6g}\n", cfg.grid.tracker,
             result.best.dim, result.best.window_length, result.best.step_size, result.best.forget,
             result.best.score);
  fmt::print("wrote {}\n", cfg.out_dir.string());
  return 0;
}

int run_certify(const Options& opts) {
  const ExperimentConfig cfg = load(opts);
  const auto result = great::harness::certify(cfg.certify, cfg.out_dir);
  fmt::print("alpha {:.6g}  rho_tilde {:.6g}  slack {:.6g}  ultimate {:.6g}\n", result.alpha,
             result.assumption.rho_tilde, result.assumption.slack, std::sqrt(result.tube.ultimate));
  fmt::print("wrote {}\n", cfg.out_dir.string());
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Grassmannian subspace tracking with certificates"};
  app.require_subcommand(1);
  Options opts;
  auto* synthetic = app.add_subcommand("synthetic", "Synthetic geodesic tracking study");
  auto* sysid = app.add_subcommand("sysid", "Online identification of an LTV plant");
  auto* validate = app.add_subcommand("validate", "Grid search on the validation split");
  auto* certify = app.add_subcommand("certify", "Evaluate tube and ultimate bounds");
  for (auto* cmd : {synthetic, sysid, validate, certify}) add_common(cmd, opts);

  CLI11_PARSE(app, argc, argv);

  try {
    if (synthetic->parsed()) return run_synthetic(opts);
    if (sysid->parsed()) return run_sysid(opts);
    if (validate->parsed()) return run_validate(opts);
    return run_certify(opts);
  } catch (const great::Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return e.code() == great::ErrorCode::kAssumptionViolated ? 2 : 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
}
