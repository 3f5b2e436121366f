#include <random>
#include <sstream>

#include "abft_guard/selector.hpp"
#include "doctest.h"
#include "oracle.hpp"

using namespace abft_guard;

namespace {

const DeviceProfile kT4 = DeviceProfile::from_datasheet("T4", 65, 320);
const DType kHalf = DType::binary16();

std::vector<LayerGemm> square(std::int64_t s) { return {{0, {s, s, s}}}; }

}  // namespace

TEST_CASE("base time is the roofline maximum") {
  CHECK(base_time({2048, 2048, 2048}, kHalf, kT4) == doctest::Approx(17179869184.0 / 65e12));
  CHECK(base_time({2048, 2048, 2048}, kHalf, kT4) == doctest::Approx(264.3e-6).epsilon(1e-3));
  CHECK(base_time({8, 512, 16}, kHalf, kT4) == doctest::Approx(17664.0 / 320e9));
  CHECK(base_time({8, 512, 16}, kHalf, kT4) == doctest::Approx(55.2e-9).epsilon(1e-3));
  const auto unit = DeviceProfile::from_datasheet("unit", 12e-12, 12e-9);  // CMR 1
  const GemmShape s{3, 3, 3};                                              // AI 1 at 2 bytes/element
  CHECK(base_time(s, DType::exact_int(2), unit) == doctest::Approx(54.0 / 12.0));
}

TEST_CASE("overhead formula") {
  CHECK(overhead_pct(2.0, 3.0) == doctest::Approx(50.0));
  CHECK(overhead_pct(2.0, 2.0) == 0.0);
  std::mt19937_64 rng(1);
  std::uniform_real_distribution<double> t(1e-9, 1e-2);
  for (int i = 0; i < 1000; ++i) {
    const double to = t(rng), tr = to * (1 + t(rng));
    const auto e = make_estimate(to, tr, CostSource::model);
    CHECK(e.overhead_pct == doctest::Approx(100.0 * (tr - to) / to).epsilon(1e-12));
    CHECK(e.overhead_pct >= 0.0);
  }
}

TEST_CASE("global ABFT cost terms") {
  // Bandwidth-bound shape: extra traffic of (k + n + 2) elements plus launch latency.
  const GemmShape s{8, 512, 16};
  const double bytes = 2.0 * (8 * 16 + 16 * 512 + 8 * 512) + 2.0 * (16 + 512 + 2);
  CHECK(scheme_time(s, kHalf, kT4, Scheme::global_abft, TilingConfig{}) ==
        doctest::Approx(bytes / 320e9 + 5e-6).epsilon(1e-12));
  auto no_launch = kT4;
  no_launch.verification_launch_latency = 0;
  CHECK(scheme_time(s, kHalf, no_launch, Scheme::global_abft, TilingConfig{}) ==
        doctest::Approx(bytes / 320e9).epsilon(1e-12));
}

TEST_CASE("thread-level cost absorbed on bandwidth-bound shapes") {
  const GemmShape s{16, 4096, 4096};  // AI ~ 16, far below CMR 203
  const auto e = estimate_overhead(s, kHalf, kT4, Scheme::thread_one_sided, TilingConfig{});
  CHECK(e.overhead_pct == doctest::Approx(0.0));
  CHECK(e.source == CostSource::model);
}

TEST_CASE("replication doubles compute-bound time") {
  const GemmShape s{2048, 2048, 2048};
  const double t_o = base_time(s, kHalf, kT4);
  CHECK(scheme_time(s, kHalf, kT4, Scheme::thread_replication_full, TilingConfig{}) ==
        doctest::Approx(2 * t_o).epsilon(1e-9));
  CHECK(estimate_overhead(s, kHalf, kT4, Scheme::global_abft, TilingConfig{}).overhead_pct <
        estimate_overhead(s, kHalf, kT4, Scheme::thread_one_sided, TilingConfig{}).overhead_pct);
}

TEST_CASE("one-sided tensor time on a compute-bound shape") {
  const GemmShape s{2048, 2048, 2048};
  const TilingConfig t{};
  // Mt/2 redundant MMAs of 2 rows x k_step x 1 column per thread per step.
  const double threads = (2048.0 / 16) * (2048.0 / 8), steps = 2048.0 / 2;
  const double extra = threads * steps * 8 * (2 * 2 * 2);
  CHECK(scheme_time(s, kHalf, kT4, Scheme::thread_one_sided, t) ==
        doctest::Approx((2.0 * 2048 * 2048 * 2048 + extra) / 65e12).epsilon(1e-12));
  CHECK(extra == doctest::Approx(2.0 * 2048 * 2048 * 2048 / 8));  // 2mnk / Nt
}

TEST_CASE("selection examples") {
  ModelSpec bottom{"bottom", 1, 1, 1, 13, {LayerSpec::fc(512), LayerSpec::fc(256), LayerSpec::fc(64)}};
  const auto layers = model_to_gemm_sequence(bottom, PaddingPolicy::multiple_of_8);
  const auto plan = select(layers, kHalf, kT4, TilingConfig{});
  CHECK(plan.alu_defaulted);
  CHECK(plan.cmr == doctest::Approx(203.125));
  for (const auto& l : plan.layers) {
    CHECK(l.chosen == Scheme::thread_one_sided);
    CHECK(l.candidates.size() == 2);
    CHECK(l.bound == Bound::bandwidth);
  }
  CHECK(select(square(2048), kHalf, kT4, TilingConfig{}).layers[0].chosen == Scheme::global_abft);
  CHECK_THROWS_AS(select(std::vector<LayerGemm>{}, kHalf, kT4, TilingConfig{}), EmptyInputError);
}

TEST_CASE("measured timings override the model") {
  const auto layers = square(2048);
  std::istringstream csv("layer_index,scheme,time_us\n0,unprotected,100\n0,global-abft,150\n0,thread-one-sided,101\n");
  const auto timings = MeasuredTimings::parse_csv(csv);
  const auto plan = select(layers, kHalf, kT4, TilingConfig{}, &timings);
  CHECK(plan.layers[0].chosen == Scheme::thread_one_sided);
  CHECK(plan.layers[0].chosen_estimate().estimate.source == CostSource::measured);
  CHECK(plan.layers[0].chosen_estimate().estimate.overhead_pct == doctest::Approx(1.0));
  CHECK(plan.aggregate_overhead_pct == doctest::Approx(1.0));

  std::istringstream partial("layer_index,scheme,time_us\n0,global-abft,1e9\n");
  const auto partial_timings = MeasuredTimings::parse_csv(partial);
  const auto p2 = select(layers, kHalf, kT4, TilingConfig{}, &partial_timings);
  CHECK(p2.layers[0].chosen == Scheme::thread_one_sided);
  CHECK(p2.layers[0].candidates[0].estimate.source == CostSource::measured);
  CHECK(p2.layers[0].candidates[1].estimate.source == CostSource::model);

  std::istringstream unknown("layer_index,scheme,time_us\n3,global-abft,5\n");
  const auto bad = MeasuredTimings::parse_csv(unknown);
  CHECK_THROWS_AS(select(layers, kHalf, kT4, TilingConfig{}, &bad), ValidationError);
}

TEST_CASE("timings CSV validation") {
  auto parse = [](const std::string& text) {
    std::istringstream in(text);
    return MeasuredTimings::parse_csv(in);
  };
  CHECK(parse("layer_index,scheme,time_us\n").empty());
  CHECK(parse("layer_index,scheme,time_us\r\n 1 , one-sided , 2.5 \r\n").get(1, Scheme::thread_one_sided) ==
        doctest::Approx(2.5e-6));
  for (const char* bad : {"", "layer,scheme,time\n", "layer_index,scheme,time_us\nx,global,1\n",
                          "layer_index,scheme,time_us\n0,bogus,1\n", "layer_index,scheme,time_us\n0,global,-1\n",
                          "layer_index,scheme,time_us\n0,global\n", "layer_index,scheme,time_us\n0,global,1us\n"}) {
    CAPTURE(bad);
    CHECK_THROWS_AS(parse(bad), ValidationError);
  }
  try {
    parse("layer_index,scheme,time_us\n0,global,1\n1,global,oops\n");
  } catch (const ValidationError& e) {
    CHECK(e.path() == "line 3");
  }
}

TEST_CASE("plan never worse than a uniform policy") {
  std::mt19937_64 rng(2);
  std::uniform_int_distribution<std::int64_t> d(1, 4096);
  std::uniform_int_distribution<int> count(1, 10);
  for (int trial = 0; trial < 50; ++trial) {
    std::vector<LayerGemm> layers;
    for (int i = count(rng); i > 0; --i) layers.push_back({layers.size(), {d(rng), d(rng), d(rng)}});
    const auto plan = select(layers, kHalf, kT4, TilingConfig{});
    for (Scheme s : kSelectableSchemes) {
      CHECK(plan.aggregate_overhead_pct <=
            uniform_policy_overhead_pct(layers, kHalf, kT4, TilingConfig{}, s) * (1 + 1e-12) + 1e-12);
    }
  }
}

TEST_CASE("single crossover for square GEMMs") {
  int switches = 0;
  Scheme prev = select(square(8), kHalf, kT4, TilingConfig{}).layers[0].chosen;
  CHECK(prev == Scheme::thread_one_sided);
  for (std::int64_t s = 16; s <= 8192; s += 8) {
    const Scheme cur = select(square(s), kHalf, kT4, TilingConfig{}).layers[0].chosen;
    if (cur != prev) ++switches;
    prev = cur;
  }
  CHECK(switches == 1);
  CHECK(prev == Scheme::global_abft);
}
