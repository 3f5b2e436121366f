#pragma once

#include <cstdint>
#include <optional>
#include <string_view>
#include <vector>

#include "abft_guard/executor.hpp"

namespace abft_guard {

enum class CampaignFaultSite { output_element, thread_mma, mixed };

std::string_view to_string(CampaignFaultSite site);

/// Fault-injection campaign. Every scheme runs `trials` single-fault trials
/// and `control_trials` fault-free trials on random GEMMs with each of m, n, k
/// drawn from [min_dim, max_dim].
///
/// Document form:
///   {"schema_version": 1, "trials": 10000, "control_trials": 10000, "seed": 42,
///    "size": {"min": 1, "max": 32}, "schemes": ["global-abft", ...],
///    "dtype": "exact-int", "fault_site": "output-element",
///    "delta": {"min": 1, "max": 1000}, "tiling": "random" | {tile fields},
///    "value_range": 8}
/// Exact mode draws |delta| uniformly from the integers in [min, max]; the
/// floating modes draw |delta| log-uniformly from [min, max]. Signs are
/// random.
struct CampaignConfig {
  std::uint64_t trials = 1000;
  std::uint64_t control_trials = 1000;
  std::uint64_t seed = 0;
  std::int64_t min_dim = 1;
  std::int64_t max_dim = 32;
  std::vector<Scheme> schemes;
  ElementType dtype = ElementType::exact_int;
  CampaignFaultSite fault_site = CampaignFaultSite::output_element;
  double delta_min = 1.0;
  double delta_max = 1000.0;
  std::optional<TilingConfig> tiling;  // nullopt: a random tiling per trial
  std::int64_t value_range = 8;
};

/// Throws ValidationError on inconsistent settings.
void validate(const CampaignConfig& config);

CampaignConfig parse_campaign_config(std::string_view json_text);

enum class TrialOutcome : std::uint8_t { detected, missed, masked, clean, false_positive };

struct SchemeStats {
  Scheme scheme = Scheme::unprotected;
  std::uint64_t trials = 0;
  std::uint64_t detected = 0;
  std::uint64_t missed = 0;
  std::uint64_t masked = 0;  // |delta| within the comparison tolerance
  std::uint64_t control_trials = 0;
  std::uint64_t false_positives = 0;

  /// detected / (detected + missed); masked trials are excluded. NaN if none.
  double detection_rate() const;
  /// false_positives / control_trials; NaN if none.
  double false_positive_rate() const;

  friend bool operator==(const SchemeStats&, const SchemeStats&) = default;
};

struct CampaignReport {
  std::uint64_t seed = 0;
  ElementType dtype = ElementType::exact_int;
  std::vector<SchemeStats> schemes;

  friend bool operator==(const CampaignReport&, const CampaignReport&) = default;
};

/// Runs one trial; deterministic in (config.seed, scheme, trial, control).
TrialOutcome run_trial(const CampaignConfig& config, Scheme scheme, std::uint64_t trial, bool control);

/// Worker count: ABFT_GUARD_THREADS if set (>= 1), else hardware concurrency.
unsigned campaign_thread_count();

/// Results do not depend on `threads`; 0 selects campaign_thread_count().
CampaignReport run_campaign(const CampaignConfig& config, unsigned threads = 0);

}  // namespace abft_guard
