#include "commands.hpp"

#include <algorithm>
#include <charconv>
#include <fstream>
#include <iostream>
#include <numeric>
#include <random>
#include <set>
#include <sstream>

#include "CLI11.hpp"
#include "abft_guard/campaign.hpp"
#include "abft_guard/documents.hpp"
#include "abft_guard/random.hpp"
#include "abft_guard/reports.hpp"

namespace abft_guard::cli {

namespace {

struct UsageError : Error {
  using Error::Error;
};

void write_output(const std::string& path, const std::string& text, std::ostream& out) {
  if (path.empty() || path == "-") {
    out << text;
    return;
  }
  std::ofstream f(path, std::ios::binary);
  if (!f) throw UsageError("cannot write '" + path + "'");
  f << text;
}

PaddingPolicy padding_from(const std::string& s) {
  if (s == "none") return PaddingPolicy::none;
  if (s == "eight" || s == "multiple-of-8") return PaddingPolicy::multiple_of_8;
  throw UsageError("--pad must be 'none' or 'eight'");
}

DType dtype_from(const std::string& name, int bytes_per_element) {
  const ElementType tag = element_type_from_string(name);
  switch (tag) {
    case ElementType::binary16: return DType::binary16();
    case ElementType::binary32: return DType::binary32();
    case ElementType::exact_int: return DType::exact_int(bytes_per_element);
  }
  return DType::binary16();
}

std::vector<std::int64_t> parse_int_list(const std::string& text, const std::string& flag) {
  std::vector<std::int64_t> values;
  std::stringstream ss(text);
  std::string field;
  while (std::getline(ss, field, ',')) {
    std::int64_t v = 0;
    const auto [p, ec] = std::from_chars(field.data(), field.data() + field.size(), v);
    if (ec != std::errc{} || p != field.data() + field.size()) {
      throw UsageError(flag + ": bad integer '" + field + "'");
    }
    values.push_back(v);
  }
  return values;
}

TilingConfig tiling_from(const std::string& text) {
  if (text.empty()) return TilingConfig{};
  const auto v = parse_int_list(text, "--tiling");
  if (v.size() != 7) throw UsageError("--tiling expects tb_m,tb_n,warp_m,warp_n,thread_m,thread_n,k_step");
  TilingConfig t{v[0], v[1], v[2], v[3], v[4], v[5], v[6]};
  validate(t);
  return t;
}

struct AnalyzeArgs {
  std::string model, device, pad = "none", dtype = "binary16", out, csv;
  int bytes = 2;
};

int cmd_analyze(const AnalyzeArgs& a, std::ostream& out) {
  const ModelSpec model = load_model(a.model);
  const DeviceProfile device = load_device(a.device);
  const auto report = analyze(model, device, padding_from(a.pad), dtype_from(a.dtype, a.bytes));
  write_output(a.out, to_json(report), out);
  if (!a.csv.empty()) write_output(a.csv, to_csv(report), out);
  return kExitOk;
}

struct SelectArgs {
  std::string model, device, pad = "none", dtype = "binary16", out, timings, tiling;
  int bytes = 2;
};

int cmd_select(const SelectArgs& a, std::ostream& out, std::ostream& err) {
  const ModelSpec model = load_model(a.model);
  const DeviceProfile device = load_device(a.device);
  const auto layers = model_to_gemm_sequence(model, padding_from(a.pad));
  if (layers.empty()) throw EmptyInputError("no linear layers in model '" + model.name + "'");
  std::optional<MeasuredTimings> measured;
  if (!a.timings.empty()) {
    std::ifstream in(a.timings);
    if (!in) throw ValidationError(a.timings, "cannot open file");
    measured = MeasuredTimings::parse_csv(in);
  }
  const auto plan =
      select(layers, dtype_from(a.dtype, a.bytes), device, tiling_from(a.tiling), measured ? &*measured : nullptr);
  write_output(a.out, to_json(plan), out);
  err << summary_table(plan);
  return kExitOk;
}

struct CheckArgs {
  std::int64_t m = 64, n = 64, k = 64;
  std::string scheme = "thread-one-sided", dtype = "exact-int", site = "output", tiling, json;
  std::uint64_t seed = 0;
  std::int64_t inject = 0;
  std::vector<std::string> faults;
  double delta = 0.0;
  bool expect_detect = false, expect_clean = false;
};

/// Threads owning at least one real output cell, in coordinate order.
std::vector<ThreadCoord> live_threads(const GemmShape& shape, const TilingConfig& t) {
  std::vector<ThreadCoord> threads;
  for (std::int64_t r = 0; r < shape.m; r += t.thread_m) {
    for (std::int64_t c = 0; c < shape.n; c += t.thread_n) threads.push_back(owning_thread(r, c, t));
  }
  std::sort(threads.begin(), threads.end());
  return threads;
}

template <Element T>
int run_check(const CheckArgs& a, const GemmShape& shape, Scheme scheme, ElementType mode, const TilingConfig& tiling,
              std::ostream& out) {
  std::mt19937_64 rng(a.seed);
  const auto A = random_matrix<T>(static_cast<std::size_t>(shape.m), static_cast<std::size_t>(shape.k), mode, rng);
  const auto B = random_matrix<T>(static_cast<std::size_t>(shape.k), static_cast<std::size_t>(shape.n), mode, rng);

  auto draw_delta = [&]() -> T {
    const bool negative = std::bernoulli_distribution(0.5)(rng);
    T magnitude = a.delta > 0.0 ? static_cast<T>(a.delta)
                                : static_cast<T>(std::uniform_int_distribution<std::int64_t>(1, 1000)(rng));
    return negative ? -magnitude : magnitude;
  };

  std::vector<FaultSpec<T>> faults;
  for (const auto& text : a.faults) {
    std::vector<std::int64_t> v;
    std::string coords = text;
    std::optional<double> delta;
    const auto first = text.find(',');
    const auto second = first == std::string::npos ? std::string::npos : text.find(',', first + 1);
    if (second != std::string::npos) {
      coords = text.substr(0, second);
      try {
        delta = std::stod(text.substr(second + 1));
      } catch (const std::exception&) {
        throw UsageError("--fault: bad delta in '" + text + "'");
      }
    }
    v = parse_int_list(coords, "--fault");
    if (v.size() != 2) throw UsageError("--fault expects row,col[,delta]");
    const T d = delta ? static_cast<T>(*delta) : (a.delta > 0.0 ? static_cast<T>(a.delta) : T{1});
    faults.push_back(FaultSpec<T>::at_output(v[0], v[1], d));
  }

  if (a.inject > 0) {
    auto threads = live_threads(shape, tiling);
    if (a.inject > static_cast<std::int64_t>(threads.size())) {
      throw UsageError("--inject " + std::to_string(a.inject) + " exceeds the " + std::to_string(threads.size()) +
                       " threads of this problem");
    }
    std::shuffle(threads.begin(), threads.end(), rng);
    const std::int64_t steps = pad_to_tiling(shape, tiling).k / tiling.k_step;
    for (std::int64_t i = 0; i < a.inject; ++i) {
      const ThreadCoord& th = threads[static_cast<std::size_t>(i)];
      const std::int64_t r0 = th.origin_row(tiling), c0 = th.origin_col(tiling);
      const std::int64_t lr = std::uniform_int_distribution<std::int64_t>(0, std::min(tiling.thread_m, shape.m - r0) - 1)(rng);
      const std::int64_t lc = std::uniform_int_distribution<std::int64_t>(0, std::min(tiling.thread_n, shape.n - c0) - 1)(rng);
      const T d = draw_delta();
      if (a.site == "mma") {
        const std::int64_t step = std::uniform_int_distribution<std::int64_t>(0, steps - 1)(rng);
        faults.push_back(FaultSpec<T>::at_mma(th, step, lr, lc, d));
      } else {
        faults.push_back(FaultSpec<T>::at_output(r0 + lr, c0 + lc, d));
      }
    }
  }

  const auto report = execute<T>(A, B, tiling, scheme, faults, mode);

  out << "scheme " << to_string(scheme) << "  dtype " << to_string(mode) << "  shape " << shape.m << "x" << shape.n
      << "x" << shape.k << "  executed " << report.executed_shape.m << "x" << report.executed_shape.n << "x"
      << report.executed_shape.k << "\n";
  out << "faults " << faults.size() << "  verdicts " << report.verdicts.size() << "  fired "
      << std::count_if(report.verdicts.begin(), report.verdicts.end(),
                       [](const auto& v) { return v.verdict.detected; })
      << "\n";
  for (const auto& f : faults) {
    const auto [r, c] = fault_target(f, tiling);
    out << "  fault at (" << r << "," << c << ") delta " << format_double(static_cast<double>(f.delta)) << "\n";
  }
  for (const auto& v : report.verdicts) {
    if (!v.verdict.detected) continue;
    out << "  fired ";
    if (v.thread) {
      out << "thread origin (" << v.thread->origin_row(tiling) << "," << v.thread->origin_col(tiling) << ")";
    } else {
      out << "global";
    }
    out << " lhs " << format_double(static_cast<double>(v.verdict.lhs)) << " rhs "
        << format_double(static_cast<double>(v.verdict.rhs)) << " tol " << format_double(v.verdict.tolerance_used)
        << "\n";
  }
  const auto& oc = report.op_counts;
  out << "op counts: base_mma " << oc.base_mma_count << "  redundant_mma " << oc.redundant_mma_count
      << "  checksum_ops " << oc.checksum_op_count << "  verification_ops " << oc.verification_op_count
      << "  operand_loads " << oc.operand_load_count << "\n";
  out << "detected " << (report.detected ? "yes" : "no") << "\n";
  if (!a.json.empty()) write_output(a.json, to_json(report, scheme, tiling, mode), out);

  if (a.expect_detect && !report.detected) return kExitMismatch;
  if (a.expect_clean && report.detected) return kExitMismatch;
  return kExitOk;
}

int cmd_check(const CheckArgs& a, std::ostream& out) {
  if (a.expect_detect && a.expect_clean) throw UsageError("--expect-detect and --expect-clean are exclusive");
  if (a.site != "output" && a.site != "mma") throw UsageError("--site must be 'output' or 'mma'");
  if (a.inject < 0) throw UsageError("--inject must be >= 0");
  const GemmShape shape{a.m, a.n, a.k};
  validate(shape);
  const Scheme scheme = scheme_from_string(a.scheme);
  const ElementType mode = element_type_from_string(a.dtype);
  const TilingConfig tiling = tiling_from(a.tiling);
  if (mode == ElementType::exact_int) return run_check<std::int64_t>(a, shape, scheme, mode, tiling, out);
  return run_check<float>(a, shape, scheme, mode, tiling, out);
}

struct SimulateArgs {
  std::string config, json, csv;
  unsigned threads = 0;
};

int cmd_simulate(const SimulateArgs& a, std::ostream& out) {
  const CampaignConfig config = parse_campaign_config(read_text_file(a.config));
  const CampaignReport report = run_campaign(config, a.threads);
  write_output(a.json, to_json(report), out);
  if (!a.csv.empty()) write_output(a.csv, to_csv(report), out);
  return kExitOk;
}

int cmd_gen_square(std::int64_t size, const std::string& path, std::ostream& out) {
  if (size < 1) throw UsageError("--size must be >= 1");
  write_output(path, model_to_json(square_gemm_model(size)), out);
  return kExitOk;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"ABFT protection analysis, selection and fault-injection simulation for GEMM layers", "abft-guard"};
  app.require_subcommand(1);

  AnalyzeArgs analyze_args;
  auto* analyze_cmd = app.add_subcommand("analyze", "Per-layer and aggregate arithmetic intensity");
  analyze_cmd->add_option("--model", analyze_args.model, "Model spec JSON")->required();
  analyze_cmd->add_option("--device", analyze_args.device, "Device profile JSON")->required();
  analyze_cmd->add_option("--pad", analyze_args.pad, "Padding policy: none | eight")->capture_default_str();
  analyze_cmd->add_option("--dtype", analyze_args.dtype, "binary16 | binary32 | exact-int")->capture_default_str();
  analyze_cmd->add_option("--bytes-per-element", analyze_args.bytes, "Element size for exact-int")
      ->capture_default_str();
  analyze_cmd->add_option("--out", analyze_args.out, "JSON report path (default stdout)");
  analyze_cmd->add_option("--csv", analyze_args.csv, "Write layer_index,ai,bound CSV here");

  SelectArgs select_args;
  auto* select_cmd = app.add_subcommand("select", "Per-layer protection plan");
  select_cmd->add_option("--model", select_args.model, "Model spec JSON")->required();
  select_cmd->add_option("--device", select_args.device, "Device profile JSON")->required();
  select_cmd->add_option("--pad", select_args.pad, "Padding policy: none | eight")->capture_default_str();
  select_cmd->add_option("--dtype", select_args.dtype, "binary16 | binary32 | exact-int")->capture_default_str();
  select_cmd->add_option("--bytes-per-element", select_args.bytes, "Element size for exact-int")
      ->capture_default_str();
  select_cmd->add_option("--timings", select_args.timings, "Measured timings CSV (layer_index,scheme,time_us)");
  select_cmd->add_option("--tiling", select_args.tiling, "tb_m,tb_n,warp_m,warp_n,thread_m,thread_n,k_step");
  select_cmd->add_option("--out", select_args.out, "Plan JSON path (default stdout)");

  CheckArgs check_args;
  auto* check_cmd = app.add_subcommand("check", "Run one protected GEMM on seeded random inputs");
  check_cmd->add_option("--m", check_args.m)->capture_default_str();
  check_cmd->add_option("--n", check_args.n)->capture_default_str();
  check_cmd->add_option("--k", check_args.k)->capture_default_str();
  check_cmd->add_option("--scheme", check_args.scheme, "Protection scheme")->capture_default_str();
  check_cmd->add_option("--dtype", check_args.dtype, "exact-int | binary16 | binary32")->capture_default_str();
  check_cmd->add_option("--seed", check_args.seed)->capture_default_str();
  check_cmd->add_option("--inject", check_args.inject, "Inject one fault into each of N distinct threads");
  check_cmd->add_option("--site", check_args.site, "Site of --inject faults: output | mma")->capture_default_str();
  check_cmd->add_option("--fault", check_args.faults, "Output fault row,col[,delta]; repeatable");
  check_cmd->add_option("--delta", check_args.delta, "Fault magnitude (default: random 1..1000)");
  check_cmd->add_option("--tiling", check_args.tiling, "tb_m,tb_n,warp_m,warp_n,thread_m,thread_n,k_step");
  check_cmd->add_option("--json", check_args.json, "Write the execution report JSON here ('-' for stdout)");
  check_cmd->add_flag("--expect-detect", check_args.expect_detect, "Exit 1 unless a verdict fires");
  check_cmd->add_flag("--expect-clean", check_args.expect_clean, "Exit 1 if any verdict fires");

  SimulateArgs simulate_args;
  auto* simulate_cmd = app.add_subcommand("simulate", "Fault-injection campaign");
  simulate_cmd->add_option("config", simulate_args.config, "Campaign config JSON")->required();
  simulate_cmd->add_option("--json", simulate_args.json, "JSON report path (default stdout)");
  simulate_cmd->add_option("--csv", simulate_args.csv, "CSV report path");
  simulate_cmd->add_option("--threads", simulate_args.threads, "Worker threads (default ABFT_GUARD_THREADS or all)");

  std::int64_t square_size = 0;
  std::string square_out;
  auto* square_cmd = app.add_subcommand("gen-square", "Write a single-layer square GEMM model spec");
  square_cmd->add_option("--size", square_size, "m = n = k")->required();
  square_cmd->add_option("--out", square_out, "Output path (default stdout)");

  std::vector<const char*> argv;
  for (const auto& a : args) argv.push_back(a.c_str());
  if (argv.empty()) argv.push_back("abft-guard");
  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kExitOk : kExitUsage;
  }

  try {
    if (*analyze_cmd) return cmd_analyze(analyze_args, out);
    if (*select_cmd) return cmd_select(select_args, out, err);
    if (*check_cmd) return cmd_check(check_args, out);
    if (*simulate_cmd) return cmd_simulate(simulate_args, out);
    if (*square_cmd) return cmd_gen_square(square_size, square_out, out);
  } catch (const EmptyInputError& e) {
    err << "error: no linear layers (" << e.what() << ")\n";
    return kExitUsage;
  } catch (const Error& e) {
    err << "error: " << e.what() << "\n";
    return kExitUsage;
  }
  return kExitUsage;
}

}  // namespace abft_guard::cli
