#include <random>

#include "abft_guard/shapes.hpp"
#include "doctest.h"

using namespace abft_guard;

TEST_CASE("conv output extents") {
  CHECK(conv_output_shape(1080, 1920, LayerSpec::conv(64, 7, 2, 3)) == std::pair<std::int64_t, std::int64_t>{540, 960});
  CHECK(conv_output_shape(5, 5, LayerSpec::conv(8, 1)) == std::pair<std::int64_t, std::int64_t>{5, 5});
  CHECK_THROWS_AS(conv_output_shape(3, 3, LayerSpec::conv(8, 5)), InvalidLayerError);
  CHECK_THROWS_AS(conv_output_shape(3, 3, LayerSpec::fc(8)), InvalidLayerError);

  LayerSpec rect{ConvParams{4, 3, 5, 1, 2, 1, 0}};
  // h: (10 + 2 - 3) / 1 + 1 = 10; w: (11 - 5) / 2 + 1 = 4
  CHECK(conv_output_shape(10, 11, rect) == std::pair<std::int64_t, std::int64_t>{10, 4});
}

TEST_CASE("layer to gemm") {
  CHECK(layer_to_gemm(1, 1080, 1920, 3, LayerSpec::conv(64, 7, 2, 3)) == GemmShape{518400, 64, 147});
  CHECK(layer_to_gemm(1, 1, 1, 13, LayerSpec::fc(512)) == GemmShape{1, 512, 13});
  CHECK(layer_to_gemm(2048, 1, 1, 256, LayerSpec::fc(1)) == GemmShape{2048, 1, 256});
  // FC after a conv flattens the activation.
  CHECK(layer_to_gemm(4, 7, 7, 32, LayerSpec::fc(10)) == GemmShape{4, 10, 7 * 7 * 32});
  CHECK_THROWS_AS(layer_to_gemm(1, 3, 3, 1, LayerSpec::conv(1, 5)), InvalidLayerError);
}

TEST_CASE("padding") {
  CHECK(pad_gemm({1, 512, 13}, PaddingPolicy::multiple_of_8) == GemmShape{8, 512, 16});
  CHECK(pad_gemm({2048, 64, 147}, PaddingPolicy::none) == GemmShape{2048, 64, 147});
  CHECK(pad_gemm({8, 8, 8}, PaddingPolicy::multiple_of_8) == GemmShape{8, 8, 8});

  std::mt19937_64 rng(3);
  std::uniform_int_distribution<std::int64_t> d(1, 5000);
  for (int i = 0; i < 1000; ++i) {
    const GemmShape s{d(rng), d(rng), d(rng)};
    const GemmShape p = pad_gemm(s, PaddingPolicy::multiple_of_8);
    CHECK(p.m % 8 == 0);
    CHECK(p.n % 8 == 0);
    CHECK(p.k % 8 == 0);
    CHECK(p.m >= s.m);
    CHECK(p.m - s.m < 8);
    CHECK(p.k - s.k < 8);
    CHECK(pad_gemm(s, PaddingPolicy::none) == s);
  }
}

TEST_CASE("model to gemm sequence") {
  ModelSpec bottom{"bottom", 1, 1, 1, 13, {LayerSpec::fc(512), LayerSpec::fc(256), LayerSpec::fc(64)}};
  const auto seq = model_to_gemm_sequence(bottom, PaddingPolicy::multiple_of_8);
  REQUIRE(seq.size() == 3);
  CHECK(seq[0] == LayerGemm{0, {8, 512, 16}});
  CHECK(seq[1] == LayerGemm{1, {8, 256, 512}});
  CHECK(seq[2] == LayerGemm{2, {8, 64, 256}});

  ModelSpec fc{"fc", 1, 1, 1, 2048, {LayerSpec::fc(1000)}};
  CHECK(model_to_gemm_sequence(fc, PaddingPolicy::none) == std::vector<LayerGemm>{{0, {1, 1000, 2048}}});

  ModelSpec empty{"empty", 1, 1, 1, 4, {}};
  CHECK(model_to_gemm_sequence(empty, PaddingPolicy::none).empty());
}

TEST_CASE("fc chain round trip") {
  std::mt19937_64 rng(11);
  std::uniform_int_distribution<std::int64_t> width(1, 300);
  for (int trial = 0; trial < 100; ++trial) {
    ModelSpec m{"chain", width(rng), 1, 1, width(rng), {}};
    for (int l = 0; l < 5; ++l) m.layers.push_back(LayerSpec::fc(width(rng)));
    const auto seq = model_to_gemm_sequence(m, PaddingPolicy::none);
    CHECK(seq[0].shape.k == m.input_c);
    for (std::size_t i = 1; i < seq.size(); ++i) CHECK(seq[i].shape.k == seq[i - 1].shape.n);
    for (const auto& g : seq) CHECK(g.shape.m * g.shape.n * g.shape.k > 0);
  }
}

TEST_CASE("conv chain propagates activations") {
  ModelSpec m{"cnn", 2, 32, 32, 3, {LayerSpec::conv(16, 3, 1, 1), LayerSpec::conv(32, 3, 2, 1), LayerSpec::fc(10)}};
  const auto seq = model_to_gemm_sequence(m, PaddingPolicy::none);
  CHECK(seq[0].shape == GemmShape{2 * 32 * 32, 16, 27});
  CHECK(seq[1].shape == GemmShape{2 * 16 * 16, 32, 144});
  CHECK(seq[2].shape == GemmShape{2, 10, 16 * 16 * 32});
}

TEST_CASE("model validation names the layer") {
  ModelSpec bad{"bad", 1, 4, 4, 3, {LayerSpec::conv(8, 3), LayerSpec::conv(8, 3), LayerSpec::conv(8, 3)}};
  try {
    validate(bad);
    FAIL("expected a validation error");
  } catch (const ValidationError& e) {
    CHECK(e.path() == "layers[1]");  // 4x4 -> 2x2, second 3x3 no longer fits
  }
}

TEST_CASE("dtype and device basics") {
  CHECK(DType::binary16().bytes_per_element == 2);
  CHECK(DType::binary32().bytes_per_element == 4);
  CHECK(DType::exact_int().bytes_per_element == 2);
  CHECK(DType::exact_int(4).bytes_per_element == 4);
  CHECK(element_type_from_string("fp16") == ElementType::binary16);
  CHECK_THROWS_AS(element_type_from_string("bf16"), ValidationError);

  const auto t4 = DeviceProfile::from_datasheet("T4", 65, 320);
  CHECK(t4.tensor_throughput == doctest::Approx(65e12));
  CHECK(t4.memory_bandwidth == doctest::Approx(320e9));
  CHECK(t4.alu_defaulted);
  CHECK(t4.alu_throughput == doctest::Approx(65e12 / 8));
  CHECK(t4.verification_launch_latency == doctest::Approx(5e-6));
  const auto explicit_alu = DeviceProfile::from_datasheet("x", 10, 100, 2, 1);
  CHECK_FALSE(explicit_alu.alu_defaulted);
  CHECK(explicit_alu.alu_throughput == doctest::Approx(2e12));
  CHECK(explicit_alu.verification_launch_latency == doctest::Approx(1e-6));

  DeviceProfile bad = t4;
  bad.memory_bandwidth = 0;
  CHECK_THROWS_AS(validate(bad), ValidationError);
}

TEST_CASE("square model") {
  const auto m = square_gemm_model(96);
  const auto seq = model_to_gemm_sequence(m, PaddingPolicy::none);
  REQUIRE(seq.size() == 1);
  CHECK(seq[0].shape == GemmShape{96, 96, 96});
}
