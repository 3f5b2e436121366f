#include "abft_guard/campaign.hpp"
#include "abft_guard/reports.hpp"
#include "doctest.h"

using namespace abft_guard;

namespace {

CampaignConfig small_config(ElementType dtype) {
  CampaignConfig c;
  c.trials = 150;
  c.control_trials = 100;
  c.seed = 99;
  c.max_dim = 24;
  c.schemes.assign(std::begin(kAllSchemes) + 1, std::end(kAllSchemes));
  c.dtype = dtype;
  c.fault_site = CampaignFaultSite::mixed;
  if (dtype != ElementType::exact_int) {
    c.delta_min = 1e-4;
    c.delta_max = 1e3;
  }
  return c;
}

}  // namespace

TEST_CASE("exact campaign: full detection, no false positives") {
  const auto r = run_campaign(small_config(ElementType::exact_int), 1);
  for (const auto& s : r.schemes) {
    CAPTURE(to_string(s.scheme));
    CHECK(s.trials == 150);
    CHECK(s.detected == 150);
    CHECK(s.masked == 0);
    CHECK(s.detection_rate() == 1.0);
    CHECK(s.false_positives == 0);
    CHECK(s.false_positive_rate() == 0.0);
  }
}

TEST_CASE("campaign results do not depend on the worker count") {
  const auto c = small_config(ElementType::binary16);
  const auto one = run_campaign(c, 1);
  const auto three = run_campaign(c, 3);
  CHECK(one == three);
  CHECK(to_json(one) == to_json(three));
  CHECK(to_csv(one) == to_csv(three));
}

TEST_CASE("binary16 small deltas are masked, not missed") {
  auto c = small_config(ElementType::binary16);
  c.delta_min = 1e-6;
  c.delta_max = 1e-4;
  const auto r = run_campaign(c, 1);
  for (const auto& s : r.schemes) {
    CHECK(s.missed == 0);
    CHECK(s.masked > 0);
    CHECK(s.false_positives == 0);
  }
}

TEST_CASE("binary16 campaign never misses") {
  const auto r = run_campaign(small_config(ElementType::binary16), 1);
  for (const auto& s : r.schemes) {
    CHECK(s.missed == 0);
    CHECK(s.detected + s.masked == s.trials);
  }
}

TEST_CASE("campaign config document") {
  const auto c = parse_campaign_config(R"({"trials": 10, "seed": 5, "schemes": ["global", "two-sided"],
    "dtype": "binary16", "size": {"min": 2, "max": 8},
    "tiling": {"tb_m": 16, "tb_n": 8, "warp_m": 8, "warp_n": 8, "thread_m": 4, "thread_n": 2}})");
  CHECK(c.trials == 10);
  CHECK(c.control_trials == 10);
  CHECK(c.schemes == std::vector<Scheme>{Scheme::global_abft, Scheme::thread_two_sided});
  CHECK(c.dtype == ElementType::binary16);
  CHECK(c.delta_min == doctest::Approx(1e-3));
  REQUIRE(c.tiling);
  CHECK(c.tiling->k_step == 2);
  CHECK(c.tiling->thread_m == 4);

  auto path_of = [](const char* json) {
    try {
      parse_campaign_config(json);
    } catch (const ValidationError& e) {
      return e.path();
    }
    return std::string("<no error>");
  };
  CHECK(path_of(R"({"trials": 0, "seed": 1, "schemes": ["global"]})") == "trials");
  CHECK(path_of(R"({"trials": 1, "seed": 1, "schemes": ["global", "x"]})") == "schemes[1]");
  CHECK(path_of(R"({"trials": 1, "seed": 1, "schemes": []})") == "schemes");
  CHECK(path_of(R"({"trials": 1, "seed": 1, "schemes": ["global"], "size": {"min": 5, "max": 2}})") == "size.max");
  CHECK(path_of(R"({"trials": 1, "seed": 1, "schemes": ["global"], "tiling": {"thread_m": 3}})") == "tiling");
  CHECK(path_of(R"({"trials": 1, "seed": 1, "schemes": ["global"], "delta": {"min": 0.5, "max": 2}})") ==
        "delta.min");
  CHECK(path_of(R"({"trials": 1, "schemes": ["global"]})") == "seed");
}

TEST_CASE("thread count from the environment") {
  setenv("ABFT_GUARD_THREADS", "3", 1);
  CHECK(campaign_thread_count() == 3);
  setenv("ABFT_GUARD_THREADS", "zero", 1);
  CHECK(campaign_thread_count() >= 1);
  unsetenv("ABFT_GUARD_THREADS");
}
