#include "abft_guard/tiling.hpp"

#include <string>

#include "abft_guard/errors.hpp"

namespace abft_guard {

namespace {

std::int64_t round_up(std::int64_t value, std::int64_t multiple) {
  return (value + multiple - 1) / multiple * multiple;
}

std::uint64_t u(std::int64_t v) { return static_cast<std::uint64_t>(v); }

}  // namespace

void validate(const TilingConfig& t) {
  if (t.tb_m < 1 || t.tb_n < 1 || t.warp_m < 1 || t.warp_n < 1 || t.thread_m < 1 || t.thread_n < 1 || t.k_step < 1) {
    throw InvalidTilingError("tile sizes must be >= 1");
  }
  if (t.tb_m % t.warp_m != 0 || t.tb_n % t.warp_n != 0) {
    throw InvalidTilingError("threadblock tile must be divisible by warp tile");
  }
  if (t.warp_m % t.thread_m != 0 || t.warp_n % t.thread_n != 0) {
    throw InvalidTilingError("warp tile must be divisible by thread tile");
  }
  if (t.thread_m % 2 != 0) throw InvalidTilingError("thread_m must be even");
}

GemmShape pad_to_tiling(const GemmShape& shape, const TilingConfig& tiling) {
  validate(shape);
  validate(tiling);
  return {round_up(shape.m, tiling.tb_m), round_up(shape.n, tiling.tb_n), round_up(shape.k, tiling.k_step)};
}

std::string_view to_string(Scheme scheme) {
  switch (scheme) {
    case Scheme::unprotected: return "unprotected";
    case Scheme::global_abft: return "global-abft";
    case Scheme::thread_one_sided: return "thread-one-sided";
    case Scheme::thread_two_sided: return "thread-two-sided";
    case Scheme::thread_replication_full: return "thread-replication-full";
    case Scheme::thread_replication_single_acc: return "thread-replication-single-acc";
  }
  return "unknown";
}

Scheme scheme_from_string(std::string_view name) {
  for (Scheme s : kAllSchemes) {
    if (to_string(s) == name) return s;
  }
  if (name == "none") return Scheme::unprotected;
  if (name == "global") return Scheme::global_abft;
  if (name == "one-sided") return Scheme::thread_one_sided;
  if (name == "two-sided") return Scheme::thread_two_sided;
  if (name == "replication") return Scheme::thread_replication_full;
  if (name == "replication-single") return Scheme::thread_replication_single_acc;
  throw ValidationError("scheme", "unknown scheme '" + std::string(name) + "'");
}

bool is_thread_level(Scheme scheme) {
  return scheme != Scheme::unprotected && scheme != Scheme::global_abft;
}

PerStepCounts per_step_counts(Scheme scheme, const TilingConfig& t) {
  validate(t);
  switch (scheme) {
    case Scheme::unprotected:
    case Scheme::global_abft: return {0, 0};
    case Scheme::thread_one_sided: return {u(t.thread_m / 2), u(t.k_step * t.thread_n)};
    case Scheme::thread_two_sided: return {1, u(t.k_step * (t.thread_m + t.thread_n))};
    case Scheme::thread_replication_full:
    case Scheme::thread_replication_single_acc: return {u(t.thread_m * t.thread_n / 2), 0};
  }
  return {};
}

namespace {

std::uint64_t verification_ops_per_thread(Scheme scheme, const TilingConfig& t) {
  const std::uint64_t tile = u(t.thread_m * t.thread_n);
  switch (scheme) {
    case Scheme::unprotected:
    case Scheme::global_abft: return 0;
    case Scheme::thread_one_sided: return tile + u(t.thread_m);  // row sums + per-row compare
    case Scheme::thread_two_sided: return tile + 1;
    case Scheme::thread_replication_full: return tile;
    case Scheme::thread_replication_single_acc: return tile + u(kSingleAccumulatorWidth) + 1;
  }
  return 0;
}

}  // namespace

OpCounts count_redundant_ops(Scheme scheme, const TilingConfig& t, const GemmShape& gemm) {
  validate(gemm);
  validate(t);
  if (gemm.m % t.thread_m != 0 || gemm.n % t.thread_n != 0 || gemm.k % t.k_step != 0) {
    throw InvalidTilingError("tiling (" + std::to_string(t.thread_m) + "x" + std::to_string(t.thread_n) + ", k_step " +
                             std::to_string(t.k_step) + ") does not divide GEMM " + std::to_string(gemm.m) + "x" +
                             std::to_string(gemm.n) + "x" + std::to_string(gemm.k));
  }
  const std::uint64_t threads = u(gemm.m / t.thread_m) * u(gemm.n / t.thread_n);
  const std::uint64_t steps = u(gemm.k / t.k_step);
  const PerStepCounts step = per_step_counts(scheme, t);

  OpCounts c;
  c.base_mma_count = threads * steps * u(t.thread_m * t.thread_n / 2);
  c.operand_load_count = threads * steps * u(t.k_step * (t.thread_m + t.thread_n));
  c.redundant_mma_count = threads * steps * step.redundant_mma;
  c.checksum_op_count = threads * steps * step.checksum_ops;
  c.verification_op_count = threads * verification_ops_per_thread(scheme, t);
  if (scheme == Scheme::global_abft) {
    // Activation checksum, checksum dot product, output summation.
    c.checksum_op_count = u(gemm.m) * u(gemm.k) + u(gemm.k) + u(gemm.m) * u(gemm.n);
    c.verification_op_count = 1;
  }
  return c;
}

ThreadCoord owning_thread(std::int64_t row, std::int64_t col, const TilingConfig& t) {
  ThreadCoord c;
  c.block_row = row / t.tb_m;
  c.block_col = col / t.tb_n;
  c.warp_row = (row % t.tb_m) / t.warp_m;
  c.warp_col = (col % t.tb_n) / t.warp_n;
  c.thread_row = (row % t.warp_m) / t.thread_m;
  c.thread_col = (col % t.warp_n) / t.thread_n;
  return c;
}

}  // namespace abft_guard
