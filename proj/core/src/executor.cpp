#include "abft_guard/executor.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <map>
#include <string>

#include "abft_guard/checksum.hpp"

namespace abft_guard {

namespace {

std::uint64_t u(std::int64_t v) { return static_cast<std::uint64_t>(v); }

/// Operands one thread holds for a single step along K.
template <Element T>
struct StepChunks {
  std::vector<T> a;  // Mt x k_step
  std::vector<T> b;  // k_step x Nt
  std::int64_t mt, nt, ks;

  StepChunks(std::int64_t mt_, std::int64_t nt_, std::int64_t ks_)
      : a(u(mt_ * ks_)), b(u(ks_ * nt_)), mt(mt_), nt(nt_), ks(ks_) {}

  const T& at(std::int64_t r, std::int64_t kk) const { return a[u(r * ks + kk)]; }
  const T& bt(std::int64_t kk, std::int64_t c) const { return b[u(kk * nt + c)]; }
};

/// One MMA: rows (2*pair, 2*pair+1) of the A chunk against a k_step-long column.
template <Element T, typename ColumnFn>
std::array<T, 2> mma(const StepChunks<T>& chunk, std::int64_t pair, ColumnFn&& column) {
  T o0{}, o1{};
  const std::int64_t r0 = 2 * pair;
  for (std::int64_t kk = 0; kk < chunk.ks; ++kk) {
    const T bv = column(kk);
    o0 = Arith<T>::fma(o0, chunk.at(r0, kk), bv);
    o1 = Arith<T>::fma(o1, chunk.at(r0 + 1, kk), bv);
  }
  return {o0, o1};
}

double magnitude(double lhs, double rhs) { return std::fabs(lhs - rhs); }

/// Keeps the first firing comparison, or the worst one if none fired.
template <Element T>
void keep_worst(std::optional<Verdict<T>>& current, const Verdict<T>& candidate) {
  if (!current) {
    current = candidate;
    return;
  }
  if (current->detected) return;
  if (candidate.detected ||
      magnitude(static_cast<double>(candidate.lhs), static_cast<double>(candidate.rhs)) >
          magnitude(static_cast<double>(current->lhs), static_cast<double>(current->rhs))) {
    current = candidate;
  }
}

}  // namespace

template <Element T>
ThreadTileResult<T> run_thread_tile(MatrixView<T> at, MatrixView<T> bt, std::int64_t k_step, Scheme scheme,
                                    ElementType mode, std::span<const LocalFault<T>> faults) {
  check_mode<T>(mode);
  const auto mt = static_cast<std::int64_t>(at.rows);
  const auto nt = static_cast<std::int64_t>(bt.cols);
  const auto k = static_cast<std::int64_t>(at.cols);
  if (at.cols != bt.rows) throw ShapeMismatchError("thread tile: At columns must equal Bt rows");
  if (mt < 2 || mt % 2 != 0) throw ShapeMismatchError("thread tile: Mt must be a positive even number");
  if (nt < 1 || k < 1) throw ShapeMismatchError("thread tile: empty tile");
  if (k_step < 1 || k % k_step != 0) throw ShapeMismatchError("thread tile: K must be a multiple of k_step");
  const std::int64_t steps = k / k_step;
  for (const auto& f : faults) {
    if (f.row < 0 || f.row >= mt || f.col < 0 || f.col >= nt || f.step >= steps) {
      throw InvalidFaultError("thread-local fault outside the thread tile");
    }
  }

  ThreadTileResult<T> res;
  res.ct = Matrix<T>(u(mt), u(nt));
  OpCounts& cnt = res.counts;
  Matrix<T>& ct = res.ct;

  // Scheme-specific redundant state.
  std::vector<T> abft_col;      // one-sided: Mt x 1
  T abft_scalar{};              // two-sided
  Matrix<T> shadow;             // full replication
  std::vector<T> shared_acc;    // single-accumulator replication
  std::vector<T> checksum_b;    // k_step x 1
  std::vector<T> checksum_a;    // 1 x k_step
  switch (scheme) {
    case Scheme::thread_one_sided: abft_col.assign(u(mt), T{}); break;
    case Scheme::thread_replication_full: shadow = Matrix<T>(u(mt), u(nt)); break;
    case Scheme::thread_replication_single_acc: shared_acc.assign(u(kSingleAccumulatorWidth), T{}); break;
    default: break;
  }

  StepChunks<T> chunk(mt, nt, k_step);
  const std::int64_t pairs = mt / 2;

  for (std::int64_t s = 0; s < steps; ++s) {
    const std::int64_t k0 = s * k_step;
    for (std::int64_t r = 0; r < mt; ++r) {
      for (std::int64_t kk = 0; kk < k_step; ++kk) chunk.a[u(r * k_step + kk)] = at(u(r), u(k0 + kk));
    }
    for (std::int64_t kk = 0; kk < k_step; ++kk) {
      for (std::int64_t c = 0; c < nt; ++c) chunk.b[u(kk * nt + c)] = bt(u(k0 + kk), u(c));
    }
    cnt.operand_load_count += u(mt * k_step + k_step * nt);

    // Base MMAs.
    for (std::int64_t p = 0; p < pairs; ++p) {
      for (std::int64_t c = 0; c < nt; ++c) {
        auto out = mma(chunk, p, [&](std::int64_t kk) { return chunk.bt(kk, c); });
        ++cnt.base_mma_count;
        for (const auto& f : faults) {
          if (f.step == s && f.col == c && f.row / 2 == p) {
            out[u(f.row % 2)] = Arith<T>::add(out[u(f.row % 2)], f.delta);
          }
        }
        ct(u(2 * p), u(c)) = Arith<T>::add(ct(u(2 * p), u(c)), out[0]);
        ct(u(2 * p + 1), u(c)) = Arith<T>::add(ct(u(2 * p + 1), u(c)), out[1]);
      }
    }

    switch (scheme) {
      case Scheme::thread_one_sided: {
        checksum_b.assign(u(k_step), T{});
        for (std::int64_t kk = 0; kk < k_step; ++kk) {
          for (std::int64_t c = 0; c < nt; ++c) {
            checksum_b[u(kk)] = Arith<T>::add(checksum_b[u(kk)], chunk.bt(kk, c));
            ++cnt.checksum_op_count;
          }
        }
        for (std::int64_t p = 0; p < pairs; ++p) {
          const auto out = mma(chunk, p, [&](std::int64_t kk) { return checksum_b[u(kk)]; });
          ++cnt.redundant_mma_count;
          abft_col[u(2 * p)] = Arith<T>::add(abft_col[u(2 * p)], out[0]);
          abft_col[u(2 * p + 1)] = Arith<T>::add(abft_col[u(2 * p + 1)], out[1]);
        }
        break;
      }
      case Scheme::thread_two_sided: {
        checksum_a.assign(u(k_step), T{});
        checksum_b.assign(u(k_step), T{});
        for (std::int64_t kk = 0; kk < k_step; ++kk) {
          for (std::int64_t r = 0; r < mt; ++r) {
            checksum_a[u(kk)] = Arith<T>::add(checksum_a[u(kk)], chunk.at(r, kk));
            ++cnt.checksum_op_count;
          }
          for (std::int64_t c = 0; c < nt; ++c) {
            checksum_b[u(kk)] = Arith<T>::add(checksum_b[u(kk)], chunk.bt(kk, c));
            ++cnt.checksum_op_count;
          }
        }
        T dot{};
        for (std::int64_t kk = 0; kk < k_step; ++kk) dot = Arith<T>::fma(dot, checksum_a[u(kk)], checksum_b[u(kk)]);
        ++cnt.redundant_mma_count;
        abft_scalar = Arith<T>::add(abft_scalar, dot);
        break;
      }
      case Scheme::thread_replication_full:
      case Scheme::thread_replication_single_acc: {
        const bool full = scheme == Scheme::thread_replication_full;
        for (std::int64_t p = 0; p < pairs; ++p) {
          for (std::int64_t c = 0; c < nt; ++c) {
            const auto out = mma(chunk, p, [&](std::int64_t kk) { return chunk.bt(kk, c); });
            ++cnt.redundant_mma_count;
            if (full) {
              shadow(u(2 * p), u(c)) = Arith<T>::add(shadow(u(2 * p), u(c)), out[0]);
              shadow(u(2 * p + 1), u(c)) = Arith<T>::add(shadow(u(2 * p + 1), u(c)), out[1]);
            } else {
              const std::int64_t slot = 2 * (p * nt + c);
              auto& a0 = shared_acc[u(slot % kSingleAccumulatorWidth)];
              auto& a1 = shared_acc[u((slot + 1) % kSingleAccumulatorWidth)];
              a0 = Arith<T>::add(a0, out[0]);
              a1 = Arith<T>::add(a1, out[1]);
            }
          }
        }
        break;
      }
      default: break;
    }
  }

  for (const auto& f : faults) {
    if (f.step < 0) ct(u(f.row), u(f.col)) = Arith<T>::add(ct(u(f.row), u(f.col)), f.delta);
  }

  auto tile_sum = [&] {
    T sum{};
    for (const T v : ct.values()) {
      sum = Arith<T>::add(sum, v);
      ++cnt.verification_op_count;
    }
    return sum;
  };

  switch (scheme) {
    case Scheme::thread_one_sided: {
      for (std::int64_t r = 0; r < mt; ++r) {
        T row_sum{};
        for (std::int64_t c = 0; c < nt; ++c) {
          row_sum = Arith<T>::add(row_sum, ct(u(r), u(c)));
          ++cnt.verification_op_count;
        }
        ++cnt.verification_op_count;
        keep_worst(res.verdict, compare(abft_col[u(r)], row_sum, mode, k));
      }
      break;
    }
    case Scheme::thread_two_sided: {
      const T sum = tile_sum();
      ++cnt.verification_op_count;
      res.verdict = compare(abft_scalar, sum, mode, k);
      break;
    }
    case Scheme::thread_replication_full: {
      for (std::int64_t r = 0; r < mt; ++r) {
        for (std::int64_t c = 0; c < nt; ++c) {
          ++cnt.verification_op_count;
          keep_worst(res.verdict, compare(shadow(u(r), u(c)), ct(u(r), u(c)), mode, k));
        }
      }
      break;
    }
    case Scheme::thread_replication_single_acc: {
      T folded{};
      for (const T v : shared_acc) {
        folded = Arith<T>::add(folded, v);
        ++cnt.verification_op_count;
      }
      const T sum = tile_sum();
      ++cnt.verification_op_count;
      res.verdict = compare(folded, sum, mode, k);
      break;
    }
    default: break;
  }
  return res;
}

namespace {

template <Element T>
void check_tile_shapes(const Matrix<T>& at, const Matrix<T>& bt, const TilingConfig& tiling) {
  validate(tiling);
  if (static_cast<std::int64_t>(at.rows()) != tiling.thread_m || static_cast<std::int64_t>(bt.cols()) != tiling.thread_n) {
    throw ShapeMismatchError("thread tile must be thread_m x K times K x thread_n");
  }
}

}  // namespace

template <Element T>
ThreadTileResult<T> thread_tile_one_sided(const Matrix<T>& at, const Matrix<T>& bt, const TilingConfig& tiling,
                                          ElementType mode, std::span<const LocalFault<T>> faults) {
  check_tile_shapes(at, bt, tiling);
  return run_thread_tile<T>(at, bt, tiling.k_step, Scheme::thread_one_sided, mode, faults);
}

template <Element T>
ThreadTileResult<T> thread_tile_two_sided(const Matrix<T>& at, const Matrix<T>& bt, const TilingConfig& tiling,
                                          ElementType mode, std::span<const LocalFault<T>> faults) {
  check_tile_shapes(at, bt, tiling);
  return run_thread_tile<T>(at, bt, tiling.k_step, Scheme::thread_two_sided, mode, faults);
}

template <Element T>
ThreadTileResult<T> thread_tile_replication(const Matrix<T>& at, const Matrix<T>& bt, const TilingConfig& tiling,
                                            ReplicationVariant variant, ElementType mode,
                                            std::span<const LocalFault<T>> faults) {
  check_tile_shapes(at, bt, tiling);
  const Scheme scheme = variant == ReplicationVariant::full ? Scheme::thread_replication_full
                                                            : Scheme::thread_replication_single_acc;
  return run_thread_tile<T>(at, bt, tiling.k_step, scheme, mode, faults);
}

template <Element T>
FaultSpec<T> FaultSpec<T>::random(FaultSiteKind kind, const GemmShape& shape, const TilingConfig& tiling, T delta,
                                  std::mt19937_64& rng) {
  const GemmShape padded = pad_to_tiling(shape, tiling);
  std::uniform_int_distribution<std::int64_t> row_dist(0, shape.m - 1);
  std::uniform_int_distribution<std::int64_t> col_dist(0, shape.n - 1);
  const std::int64_t row = row_dist(rng);
  const std::int64_t col = col_dist(rng);
  if (kind == FaultSiteKind::output_element) return at_output(row, col, delta);
  std::uniform_int_distribution<std::int64_t> step_dist(0, padded.k / tiling.k_step - 1);
  const std::int64_t step = step_dist(rng);
  return at_mma(owning_thread(row, col, tiling), step, row % tiling.thread_m, col % tiling.thread_n, delta);
}

template <Element T>
std::pair<std::int64_t, std::int64_t> fault_target(const FaultSpec<T>& fault, const TilingConfig& tiling) {
  if (const auto* o = std::get_if<OutputSite>(&fault.site)) return {o->row, o->col};
  const auto& m = std::get<MmaSite>(fault.site);
  return {m.thread.origin_row(tiling) + m.local_row, m.thread.origin_col(tiling) + m.local_col};
}

template <Element T>
ExecutionReport<T> execute(const Matrix<T>& a, const Matrix<T>& b, const TilingConfig& tiling, Scheme scheme,
                           std::span<const FaultSpec<T>> faults, ElementType mode) {
  check_mode<T>(mode);
  validate(tiling);
  if (a.cols() != b.rows()) {
    throw ShapeMismatchError("cannot multiply " + std::to_string(a.rows()) + "x" + std::to_string(a.cols()) + " by " +
                             std::to_string(b.rows()) + "x" + std::to_string(b.cols()));
  }
  const GemmShape shape{static_cast<std::int64_t>(a.rows()), static_cast<std::int64_t>(b.cols()),
                        static_cast<std::int64_t>(a.cols())};
  const GemmShape padded = pad_to_tiling(shape, tiling);
  const std::int64_t steps = padded.k / tiling.k_step;

  Matrix<T> ap(u(padded.m), u(padded.k));
  for (std::size_t i = 0; i < a.rows(); ++i) std::copy(a.row(i), a.row(i) + a.cols(), ap.row(i));
  Matrix<T> bp(u(padded.k), u(padded.n));
  for (std::size_t i = 0; i < b.rows(); ++i) std::copy(b.row(i), b.row(i) + b.cols(), bp.row(i));
  quantize(ap, mode);
  quantize(bp, mode);

  // Route faults to their owning thread.
  std::map<ThreadCoord, std::vector<LocalFault<T>>> routed;
  for (const auto& f : faults) {
    if (f.delta == T{}) throw InvalidFaultError("fault delta must be nonzero");
    const auto [row, col] = fault_target(f, tiling);
    if (row < 0 || row >= shape.m || col < 0 || col >= shape.n) {
      throw InvalidFaultError("fault targets (" + std::to_string(row) + ", " + std::to_string(col) +
                              ") outside the " + std::to_string(shape.m) + "x" + std::to_string(shape.n) + " output");
    }
    LocalFault<T> local{-1, row % tiling.thread_m, col % tiling.thread_n, f.delta};
    if (const auto* m = std::get_if<MmaSite>(&f.site)) {
      if (m->local_row < 0 || m->local_row >= tiling.thread_m || m->local_col < 0 || m->local_col >= tiling.thread_n) {
        throw InvalidFaultError("MMA fault local index outside the thread tile");
      }
      if (m->step < 0 || m->step >= steps) {
        throw InvalidFaultError("MMA fault step " + std::to_string(m->step) + " outside [0, " + std::to_string(steps) +
                                ")");
      }
      local.step = m->step;
    }
    routed[owning_thread(row, col, tiling)].push_back(local);
  }

  ExecutionReport<T> report;
  report.shape = shape;
  report.executed_shape = padded;
  Matrix<T> cp(u(padded.m), u(padded.n));

  const Scheme thread_scheme = is_thread_level(scheme) ? scheme : Scheme::unprotected;
  const MatrixView<T> av(ap);
  const MatrixView<T> bv(bp);
  const std::span<const LocalFault<T>> no_faults;

  ThreadCoord tc;
  for (tc.block_row = 0; tc.block_row < padded.m / tiling.tb_m; ++tc.block_row) {
    for (tc.block_col = 0; tc.block_col < padded.n / tiling.tb_n; ++tc.block_col) {
      for (tc.warp_row = 0; tc.warp_row < tiling.tb_m / tiling.warp_m; ++tc.warp_row) {
        for (tc.warp_col = 0; tc.warp_col < tiling.tb_n / tiling.warp_n; ++tc.warp_col) {
          for (tc.thread_row = 0; tc.thread_row < tiling.warp_m / tiling.thread_m; ++tc.thread_row) {
            for (tc.thread_col = 0; tc.thread_col < tiling.warp_n / tiling.thread_n; ++tc.thread_col) {
              const std::int64_t r0 = tc.origin_row(tiling);
              const std::int64_t c0 = tc.origin_col(tiling);
              const auto it = routed.find(tc);
              const auto local = it == routed.end() ? no_faults : std::span<const LocalFault<T>>(it->second);
              auto tile = run_thread_tile<T>(av.block(u(r0), 0, u(tiling.thread_m), u(padded.k)),
                                             bv.block(0, u(c0), u(padded.k), u(tiling.thread_n)), tiling.k_step,
                                             thread_scheme, mode, local);
              for (std::int64_t r = 0; r < tiling.thread_m; ++r) {
                std::copy(tile.ct.row(u(r)), tile.ct.row(u(r)) + tiling.thread_n, cp.row(u(r0 + r)) + c0);
              }
              report.op_counts += tile.counts;
              if (tile.verdict) {
                report.detected = report.detected || tile.verdict->detected;
                report.verdicts.push_back({tc, *tile.verdict});
              }
            }
          }
        }
      }
    }
  }

  if (scheme == Scheme::global_abft) {
    const Verdict<T> v = global_abft_check(ap, bp, cp, mode);
    report.verdicts.push_back({std::nullopt, v});
    report.detected = v.detected;
    report.op_counts.checksum_op_count += u(padded.m) * u(padded.k) + u(padded.k) + u(padded.m) * u(padded.n);
    report.op_counts.verification_op_count += 1;
  }

  report.output = Matrix<T>(a.rows(), b.cols());
  for (std::size_t i = 0; i < a.rows(); ++i) std::copy(cp.row(i), cp.row(i) + b.cols(), report.output.row(i));
  return report;
}

template <Element T>
std::vector<ThreadCoord> firing_threads(const ExecutionReport<T>& report) {
  std::vector<ThreadCoord> out;
  for (const auto& v : report.verdicts) {
    if (v.verdict.detected && v.thread) out.push_back(*v.thread);
  }
  return out;
}

#define ABFT_GUARD_EXECUTOR_INSTANTIATE(T)                                                                        \
  template struct FaultSpec<T>;                                                                                   \
  template std::pair<std::int64_t, std::int64_t> fault_target(const FaultSpec<T>&, const TilingConfig&);          \
  template ThreadTileResult<T> run_thread_tile(MatrixView<T>, MatrixView<T>, std::int64_t, Scheme, ElementType,   \
                                               std::span<const LocalFault<T>>);                                   \
  template ThreadTileResult<T> thread_tile_one_sided(const Matrix<T>&, const Matrix<T>&, const TilingConfig&,     \
                                                     ElementType, std::span<const LocalFault<T>>);                \
  template ThreadTileResult<T> thread_tile_two_sided(const Matrix<T>&, const Matrix<T>&, const TilingConfig&,     \
                                                     ElementType, std::span<const LocalFault<T>>);                \
  template ThreadTileResult<T> thread_tile_replication(const Matrix<T>&, const Matrix<T>&, const TilingConfig&,   \
                                                       ReplicationVariant, ElementType,                           \
                                                       std::span<const LocalFault<T>>);                           \
  template ExecutionReport<T> execute(const Matrix<T>&, const Matrix<T>&, const TilingConfig&, Scheme,            \
                                      std::span<const FaultSpec<T>>, ElementType);                                \
  template std::vector<ThreadCoord> firing_threads(const ExecutionReport<T>&);

ABFT_GUARD_EXECUTOR_INSTANTIATE(std::int64_t)
ABFT_GUARD_EXECUTOR_INSTANTIATE(float)

}  // namespace abft_guard
