#include <benchmark/benchmark.h>

#include <vector>

#include "great/baselines.hpp"
#include "great/simgen.hpp"
#include "great/tracker.hpp"

namespace {

constexpr great::Index kN = 40;
constexpr great::Index kD = 13;

std::vector<great::Vector> stream(great::Rng& rng) {
  const great::Subspace truth = great::orthonormalize(rng.normal_matrix(kN, kD));
  std::vector<great::Vector> out;
  for (int i = 0; i < 256; ++i) out.push_back(truth.basis() * rng.normal_vector(kD) + 1e-3 * rng.normal_vector(kN));
  return out;
}

// One outer tracker step (window push plus K inner iterations) at n = 40, d = 13.
void BM_GreatStep(benchmark::State& state) {
  great::Rng rng(3);
  const auto samples = stream(rng);
  great::TrackerConfig cfg{kN, kD, 40, 1e-3, static_cast<int>(state.range(0))};
  great::GreatTracker tracker(cfg, great::orthonormalize(rng.normal_matrix(kN, kD)));
  for (int i = 0; i < 40; ++i) tracker.prime(samples[static_cast<std::size_t>(i)]);
  std::size_t i = 0;
  for (auto _ : state) {
    tracker.observe(samples[i++ & 255]);
    benchmark::DoNotOptimize(tracker.state().estimate.basis().data());
  }
}
BENCHMARK(BM_GreatStep)->Arg(1)->Arg(5)->Arg(10);

void BM_GrouseStep(benchmark::State& state) {
  great::Rng rng(4);
  const auto samples = stream(rng);
  great::GrouseTracker tracker(1e-2, great::orthonormalize(rng.normal_matrix(kN, kD)));
  std::size_t i = 0;
  for (auto _ : state) {
    tracker.observe(samples[i++ & 255]);
    benchmark::DoNotOptimize(tracker.estimate().basis().data());
  }
}
BENCHMARK(BM_GrouseStep);

void BM_PastStep(benchmark::State& state) {
  great::Rng rng(5);
  const auto samples = stream(rng);
  great::PastState s = great::PastState::from_subspace(great::orthonormalize(rng.normal_matrix(kN, kD)));
  std::size_t i = 0;
  for (auto _ : state) {
    s = great::past_step(std::move(s), samples[i++ & 255]);
    benchmark::DoNotOptimize(s.w.data());
  }
}
BENCHMARK(BM_PastStep);

}  // namespace
