#include <random>

#include <benchmark/benchmark.h>

#include "abft_guard/executor.hpp"
#include "abft_guard/random.hpp"
#include "abft_guard/roofline.hpp"
#include "abft_guard/selector.hpp"

using namespace abft_guard;

namespace {

// Simulated tiled GEMM per scheme; argument 0 is the scheme, 1 the square size.
void BM_Execute(benchmark::State& state) {
  const auto scheme = kAllSchemes[static_cast<std::size_t>(state.range(0))];
  const auto s = static_cast<std::size_t>(state.range(1));
  std::mt19937_64 rng(1);
  const auto a = random_matrix<float>(s, s, ElementType::binary16, rng);
  const auto b = random_matrix<float>(s, s, ElementType::binary16, rng);
  const TilingConfig tiling{};
  for (auto _ : state) {
    auto r = execute<float>(a, b, tiling, scheme, {}, ElementType::binary16);
    benchmark::DoNotOptimize(r.output);
  }
  state.SetLabel(std::string(to_string(scheme)));
  state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(2 * s * s * s));
}
BENCHMARK(BM_Execute)->ArgsProduct({{0, 1, 2, 3, 4, 5}, {64, 128}})->Unit(benchmark::kMicrosecond);

void BM_ArithmeticIntensity(benchmark::State& state) {
  std::int64_t s = 1;
  for (auto _ : state) {
    benchmark::DoNotOptimize(arithmetic_intensity({s, s + 1, s + 2}, DType::binary16()));
    s = s % 4096 + 1;
  }
}
BENCHMARK(BM_ArithmeticIntensity);

void BM_Select(benchmark::State& state) {
  const auto t4 = DeviceProfile::from_datasheet("T4", 65, 320);
  std::vector<LayerGemm> layers;
  std::mt19937_64 rng(2);
  std::uniform_int_distribution<std::int64_t> d(1, 4096);
  for (std::size_t i = 0; i < static_cast<std::size_t>(state.range(0)); ++i) layers.push_back({i, {d(rng), d(rng), d(rng)}});
  for (auto _ : state) benchmark::DoNotOptimize(select(layers, DType::binary16(), t4, TilingConfig{}));
}
BENCHMARK(BM_Select)->Arg(8)->Arg(256);

}  // namespace

BENCHMARK_MAIN();
