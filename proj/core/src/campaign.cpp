#include "abft_guard/campaign.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdlib>
#include <limits>
#include <random>
#include <span>
#include <thread>

#include "abft_guard/random.hpp"
#include "json_fields.hpp"

namespace abft_guard {

using detail::Json;

std::string_view to_string(CampaignFaultSite site) {
  switch (site) {
    case CampaignFaultSite::output_element: return "output-element";
    case CampaignFaultSite::thread_mma: return "thread-mma";
    case CampaignFaultSite::mixed: return "mixed";
  }
  return "unknown";
}

TilingConfig random_tiling(std::mt19937_64& rng) {
  auto pick = [&](std::initializer_list<std::int64_t> options) {
    std::uniform_int_distribution<std::size_t> d(0, options.size() - 1);
    return *(options.begin() + d(rng));
  };
  TilingConfig t;
  t.thread_m = pick({2, 4, 8, 16});
  t.thread_n = pick({1, 2, 4, 8});
  t.warp_m = t.thread_m * pick({1, 2});
  t.warp_n = t.thread_n * pick({1, 2});
  t.tb_m = t.warp_m * pick({1, 2});
  t.tb_n = t.warp_n * pick({1, 2});
  t.k_step = pick({1, 2, 4});
  return t;
}

void validate(const CampaignConfig& c) {
  if (c.trials < 1) throw ValidationError("trials", "must be >= 1");
  if (c.min_dim < 1) throw ValidationError("size.min", "must be >= 1");
  if (c.max_dim < c.min_dim) throw ValidationError("size.max", "must be >= size.min");
  if (c.schemes.empty()) throw ValidationError("schemes", "at least one scheme is required");
  if (!(c.delta_min > 0.0)) throw ValidationError("delta.min", "must be > 0");
  if (!(c.delta_max >= c.delta_min)) throw ValidationError("delta.max", "must be >= delta.min");
  if (c.dtype == ElementType::exact_int && c.delta_min < 1.0) {
    throw ValidationError("delta.min", "exact-int deltas must be >= 1");
  }
  if (c.value_range < 1) throw ValidationError("value_range", "must be >= 1");
  if (c.tiling) validate(*c.tiling);
}

CampaignConfig parse_campaign_config(std::string_view json_text) {
  const Json j = detail::parse_json(json_text);
  detail::check_schema_version(j);
  CampaignConfig c;
  c.trials = detail::as_uint(detail::require(j, "", "trials"), "trials");
  c.control_trials = c.trials;
  if (auto it = j.find("control_trials"); it != j.end()) c.control_trials = detail::as_uint(*it, "control_trials");
  c.seed = detail::as_uint(detail::require(j, "", "seed"), "seed");
  if (auto it = j.find("size"); it != j.end()) {
    detail::require_object(*it, "size");
    c.min_dim = detail::as_int(detail::require(*it, "size", "min"), "size.min", 1);
    c.max_dim = detail::as_int(detail::require(*it, "size", "max"), "size.max", 1);
  }
  const Json& schemes = detail::require(j, "", "schemes");
  if (!schemes.is_array()) throw ValidationError("schemes", "expected an array");
  for (std::size_t i = 0; i < schemes.size(); ++i) {
    const std::string path = detail::index_path("schemes", i);
    try {
      c.schemes.push_back(scheme_from_string(detail::as_string(schemes[i], path)));
    } catch (const ValidationError& e) {
      if (e.path() == path) throw;
      throw ValidationError(path, "unknown scheme '" + schemes[i].get<std::string>() + "'");
    }
  }
  if (auto it = j.find("dtype"); it != j.end()) {
    try {
      c.dtype = element_type_from_string(detail::as_string(*it, "dtype"));
    } catch (const ValidationError& e) {
      throw ValidationError("dtype", e.what());
    }
  }
  if (auto it = j.find("fault_site"); it != j.end()) {
    const std::string s = detail::as_string(*it, "fault_site");
    if (s == "output-element") c.fault_site = CampaignFaultSite::output_element;
    else if (s == "thread-mma") c.fault_site = CampaignFaultSite::thread_mma;
    else if (s == "mixed") c.fault_site = CampaignFaultSite::mixed;
    else throw ValidationError("fault_site", "expected output-element, thread-mma or mixed");
  }
  if (c.dtype != ElementType::exact_int) {
    c.delta_min = 1e-3;
    c.delta_max = 1e3;
  }
  if (auto it = j.find("delta"); it != j.end()) {
    detail::require_object(*it, "delta");
    c.delta_min = detail::as_positive(detail::require(*it, "delta", "min"), "delta.min");
    c.delta_max = detail::as_positive(detail::require(*it, "delta", "max"), "delta.max");
  }
  if (auto it = j.find("tiling"); it != j.end()) {
    if (it->is_string()) {
      if (it->get<std::string>() != "random") throw ValidationError("tiling", "expected \"random\" or an object");
    } else {
      detail::require_object(*it, "tiling");
      TilingConfig t;
      auto field = [&](const char* name, std::int64_t& out) {
        if (auto f = it->find(name); f != it->end()) out = detail::as_int(*f, std::string("tiling.") + name, 1);
      };
      field("tb_m", t.tb_m);
      field("tb_n", t.tb_n);
      field("warp_m", t.warp_m);
      field("warp_n", t.warp_n);
      field("thread_m", t.thread_m);
      field("thread_n", t.thread_n);
      field("k_step", t.k_step);
      try {
        validate(t);
      } catch (const InvalidTilingError& e) {
        throw ValidationError("tiling", e.what());
      }
      c.tiling = t;
    }
  }
  if (auto it = j.find("value_range"); it != j.end()) c.value_range = detail::as_int(*it, "value_range", 1);
  validate(c);
  return c;
}

double SchemeStats::detection_rate() const {
  const std::uint64_t denom = detected + missed;
  if (denom == 0) return std::numeric_limits<double>::quiet_NaN();
  return static_cast<double>(detected) / static_cast<double>(denom);
}

double SchemeStats::false_positive_rate() const {
  if (control_trials == 0) return std::numeric_limits<double>::quiet_NaN();
  return static_cast<double>(false_positives) / static_cast<double>(control_trials);
}

namespace {

std::mt19937_64 trial_rng(std::uint64_t seed, Scheme scheme, std::uint64_t trial, bool control) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(scheme), static_cast<std::uint32_t>(trial),
                    static_cast<std::uint32_t>(trial >> 32), static_cast<std::uint32_t>(control ? 1 : 0)};
  return std::mt19937_64(seq);
}

template <Element T>
T draw_delta(const CampaignConfig& c, std::mt19937_64& rng) {
  const bool negative = std::bernoulli_distribution(0.5)(rng);
  T magnitude;
  if constexpr (is_exact_v<T>) {
    std::uniform_int_distribution<std::int64_t> d(static_cast<std::int64_t>(std::ceil(c.delta_min)),
                                                  static_cast<std::int64_t>(std::floor(c.delta_max)));
    magnitude = d(rng);
  } else {
    std::uniform_real_distribution<double> d(std::log(c.delta_min), std::log(c.delta_max));
    magnitude = static_cast<float>(std::exp(d(rng)));
  }
  return negative ? -magnitude : magnitude;
}

template <Element T>
TrialOutcome run_trial_typed(const CampaignConfig& c, Scheme scheme, std::uint64_t trial, bool control) {
  auto rng = trial_rng(c.seed, scheme, trial, control);
  std::uniform_int_distribution<std::int64_t> dim(c.min_dim, c.max_dim);
  const GemmShape shape{dim(rng), dim(rng), dim(rng)};
  const TilingConfig tiling = c.tiling ? *c.tiling : random_tiling(rng);
  const auto a = random_matrix<T>(static_cast<std::size_t>(shape.m), static_cast<std::size_t>(shape.k), c.dtype, rng,
                                  c.value_range);
  const auto b = random_matrix<T>(static_cast<std::size_t>(shape.k), static_cast<std::size_t>(shape.n), c.dtype, rng,
                                  c.value_range);

  if (control) {
    const auto report = execute<T>(a, b, tiling, scheme, {}, c.dtype);
    return report.detected ? TrialOutcome::false_positive : TrialOutcome::clean;
  }

  FaultSiteKind kind = FaultSiteKind::output_element;
  if (c.fault_site == CampaignFaultSite::thread_mma) kind = FaultSiteKind::thread_mma;
  if (c.fault_site == CampaignFaultSite::mixed && std::bernoulli_distribution(0.5)(rng)) {
    kind = FaultSiteKind::thread_mma;
  }
  const T delta = draw_delta<T>(c, rng);
  const auto fault = FaultSpec<T>::random(kind, shape, tiling, delta, rng);
  const auto report = execute<T>(a, b, tiling, scheme, std::span(&fault, 1), c.dtype);
  if (report.detected) return TrialOutcome::detected;

  // Not detected: masked if the fault hid under the owning verdict's tolerance.
  const auto [row, col] = fault_target(fault, tiling);
  const ThreadCoord owner = owning_thread(row, col, tiling);
  for (const auto& v : report.verdicts) {
    if (v.thread && *v.thread != owner) continue;
    if (std::fabs(static_cast<double>(delta)) <= v.verdict.tolerance_used) return TrialOutcome::masked;
  }
  return TrialOutcome::missed;
}

}  // namespace

TrialOutcome run_trial(const CampaignConfig& config, Scheme scheme, std::uint64_t trial, bool control) {
  if (config.dtype == ElementType::exact_int) return run_trial_typed<std::int64_t>(config, scheme, trial, control);
  return run_trial_typed<float>(config, scheme, trial, control);
}

unsigned campaign_thread_count() {
  unsigned n = std::max(1u, std::thread::hardware_concurrency());
  if (const char* env = std::getenv("ABFT_GUARD_THREADS")) {
    char* end = nullptr;
    const long v = std::strtol(env, &end, 10);
    if (end != env && *end == '\0' && v >= 1) n = static_cast<unsigned>(v);
  }
  return n;
}

CampaignReport run_campaign(const CampaignConfig& config, unsigned threads) {
  validate(config);
  if (threads == 0) threads = campaign_thread_count();

  struct Work {
    std::size_t scheme_index;
    std::uint64_t trial;
    bool control;
  };
  std::vector<Work> work;
  work.reserve(config.schemes.size() * (config.trials + config.control_trials));
  for (std::size_t s = 0; s < config.schemes.size(); ++s) {
    for (std::uint64_t t = 0; t < config.trials; ++t) work.push_back({s, t, false});
    for (std::uint64_t t = 0; t < config.control_trials; ++t) work.push_back({s, t, true});
  }

  std::vector<TrialOutcome> outcomes(work.size());
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t i = next.fetch_add(1); i < work.size(); i = next.fetch_add(1)) {
      const auto& w = work[i];
      outcomes[i] = run_trial(config, config.schemes[w.scheme_index], w.trial, w.control);
    }
  };
  threads = static_cast<unsigned>(std::min<std::size_t>(threads, std::max<std::size_t>(work.size(), 1)));
  if (threads <= 1) {
    worker();
  } else {
    std::vector<std::jthread> pool;
    for (unsigned t = 0; t < threads; ++t) pool.emplace_back(worker);
  }

  CampaignReport report;
  report.seed = config.seed;
  report.dtype = config.dtype;
  for (Scheme s : config.schemes) report.schemes.push_back(SchemeStats{s});
  for (std::size_t i = 0; i < work.size(); ++i) {
    auto& st = report.schemes[work[i].scheme_index];
    switch (outcomes[i]) {
      case TrialOutcome::detected: ++st.trials; ++st.detected; break;
      case TrialOutcome::missed: ++st.trials; ++st.missed; break;
      case TrialOutcome::masked: ++st.trials; ++st.masked; break;
      case TrialOutcome::clean: ++st.control_trials; break;
      case TrialOutcome::false_positive: ++st.control_trials; ++st.false_positives; break;
    }
  }
  return report;
}

}  // namespace abft_guard
