#include <benchmark/benchmark.h>

#include <vector>

#include "great/simgen.hpp"
#include "great/window.hpp"

namespace {

// Push cost at fixed n for several window lengths; should not grow with T.
void BM_WindowPush(benchmark::State& state) {
  const great::Index n = 40;
  const great::Index t_len = state.range(0);
  great::Rng rng(1);
  std::vector<great::Vector> samples;
  for (int i = 0; i < 256; ++i) samples.push_back(rng.normal_vector(n));
  great::DataWindow window(n, t_len);
  for (great::Index i = 0; i < t_len; ++i) window.push(samples[static_cast<std::size_t>(i % 256)]);
  std::size_t i = 0;
  for (auto _ : state) {
    window.push(samples[i++ & 255]);
    benchmark::DoNotOptimize(window.covariance().data());
  }
}
BENCHMARK(BM_WindowPush)->Arg(30)->Arg(150);

void BM_DiscountedPush(benchmark::State& state) {
  const great::Index n = 40;
  great::Rng rng(2);
  const great::Vector u = rng.normal_vector(n);
  great::DiscountedWindow window(n, 0.985);
  for (auto _ : state) {
    window.push(u);
    benchmark::DoNotOptimize(window.covariance().data());
  }
}
BENCHMARK(BM_DiscountedPush);

}  // namespace
