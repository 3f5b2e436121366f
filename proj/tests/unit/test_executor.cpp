#include <algorithm>
#include <random>
#include <set>

#include "abft_guard/executor.hpp"
#include "abft_guard/random.hpp"
#include "doctest.h"
#include "oracle.hpp"

using namespace abft_guard;
using IMat = Matrix<std::int64_t>;
using IFault = FaultSpec<std::int64_t>;

namespace {

const TilingConfig kSmall{32, 16, 16, 8, 8, 4, 2};

ExecutionReport<std::int64_t> run(const IMat& a, const IMat& b, const TilingConfig& t, Scheme s,
                                  const std::vector<IFault>& faults = {}) {
  return execute<std::int64_t>(a, b, t, s, faults, ElementType::exact_int);
}

}  // namespace

TEST_CASE("fault-free execution equals the oracle") {
  std::mt19937_64 rng(1);
  const auto a = oracle::random_int(16, 16, rng);
  const auto b = oracle::random_int(16, 16, rng);
  const auto expected = oracle::gemm(a, b);
  for (Scheme s : kAllSchemes) {
    CAPTURE(to_string(s));
    const auto r = run(a, b, TilingConfig{}, s);
    CHECK_FALSE(r.detected);
    CHECK(r.output == expected);
    CHECK(r.shape == GemmShape{16, 16, 16});
    CHECK(r.executed_shape == GemmShape{128, 128, 16});
  }
}

TEST_CASE("random shapes and tilings match the oracle") {
  std::mt19937_64 rng(2);
  std::uniform_int_distribution<std::size_t> dim(1, 48);
  for (int t = 0; t < 60; ++t) {
    const auto tiling = random_tiling(rng);
    const auto a = oracle::random_int(dim(rng), dim(rng), rng);
    const auto b = oracle::random_int(a.cols(), dim(rng), rng);
    const auto expected = oracle::gemm(a, b);
    for (Scheme s : kAllSchemes) {
      const auto r = run(a, b, tiling, s);
      CHECK_FALSE(r.detected);
      CHECK(r.output == expected);
    }
  }
}

TEST_CASE("verdict layout") {
  std::mt19937_64 rng(3);
  const auto a = oracle::random_int(32, 8, rng);
  const auto b = oracle::random_int(8, 16, rng);
  CHECK(run(a, b, kSmall, Scheme::unprotected).verdicts.empty());
  const auto g = run(a, b, kSmall, Scheme::global_abft);
  REQUIRE(g.verdicts.size() == 1);
  CHECK_FALSE(g.verdicts[0].thread.has_value());
  const auto o = run(a, b, kSmall, Scheme::thread_one_sided);
  CHECK(o.verdicts.size() == (32 / 8) * (16 / 4));
  CHECK(std::is_sorted(o.verdicts.begin(), o.verdicts.end(),
                       [](const auto& x, const auto& y) { return *x.thread < *y.thread; }));
}

TEST_CASE("single output fault: detection and localization") {
  std::mt19937_64 rng(4);
  const auto a = oracle::random_int(64, 64, rng);
  const auto b = oracle::random_int(64, 64, rng);
  const TilingConfig t{64, 64, 32, 32, 16, 8, 2};
  for (int trial = 0; trial < 30; ++trial) {
    const auto f = IFault::random(FaultSiteKind::output_element, {64, 64, 64}, t, trial % 2 ? 3 : -1, rng);
    const auto [row, col] = fault_target(f, t);
    for (Scheme s : kAllSchemes) {
      if (s == Scheme::unprotected) continue;
      CAPTURE(to_string(s));
      const auto r = run(a, b, t, s, {f});
      CHECK(r.detected);
      auto expected = oracle::gemm(a, b);
      expected(static_cast<std::size_t>(row), static_cast<std::size_t>(col)) += f.delta;
      CHECK(r.output == expected);
      if (is_thread_level(s)) {
        const auto firing = firing_threads(r);
        REQUIRE(firing.size() == 1);
        CHECK(firing[0].origin_row(t) == row / 16 * 16);
        CHECK(firing[0].origin_col(t) == col / 8 * 8);
      }
    }
  }
}

TEST_CASE("thread-mma fault on one-sided fires only the owning thread") {
  std::mt19937_64 rng(5);
  const auto a = oracle::random_int(64, 64, rng);
  const auto b = oracle::random_int(64, 64, rng);
  const TilingConfig t{64, 64, 32, 32, 16, 8, 2};
  const ThreadCoord owner = owning_thread(37, 21, t);
  const auto f = IFault::at_mma(owner, 5, 37 % 16, 21 % 8, 9);
  const auto r = run(a, b, t, Scheme::thread_one_sided, {f});
  CHECK(r.detected);
  CHECK(firing_threads(r) == std::vector<ThreadCoord>{owner});
  auto expected = oracle::gemm(a, b);
  expected(37, 21) += 9;
  CHECK(r.output == expected);
}

TEST_CASE("one fault in each of five threads fires all five") {
  std::mt19937_64 rng(6);
  const auto a = oracle::random_int(64, 64, rng);
  const auto b = oracle::random_int(64, 64, rng);
  const TilingConfig t{64, 64, 32, 32, 16, 8, 2};
  const std::vector<std::pair<std::int64_t, std::int64_t>> cells{{0, 0}, {17, 9}, {40, 63}, {63, 30}, {33, 45}};
  std::vector<IFault> faults;
  std::set<ThreadCoord> owners;
  for (auto [r, c] : cells) {
    faults.push_back(IFault::at_mma(owning_thread(r, c, t), 3, r % 16, c % 8, -7));
    owners.insert(owning_thread(r, c, t));
  }
  REQUIRE(owners.size() == 5);
  for (Scheme s : {Scheme::thread_one_sided, Scheme::thread_two_sided, Scheme::thread_replication_full,
                   Scheme::thread_replication_single_acc}) {
    const auto firing = firing_threads(run(a, b, t, s, faults));
    CHECK(std::set<ThreadCoord>(firing.begin(), firing.end()) == owners);
  }
}

TEST_CASE("op counts match the closed form") {
  std::mt19937_64 rng(7);
  std::uniform_int_distribution<std::size_t> dim(1, 40);
  for (int trial = 0; trial < 40; ++trial) {
    const auto t = random_tiling(rng);
    const auto a = oracle::random_int(dim(rng), dim(rng), rng);
    const auto b = oracle::random_int(a.cols(), dim(rng), rng);
    std::uint64_t loads = 0;
    for (Scheme s : kAllSchemes) {
      const auto r = run(a, b, t, s);
      CHECK(r.op_counts == count_redundant_ops(s, t, r.executed_shape));
      if (s == Scheme::unprotected) loads = r.op_counts.operand_load_count;
      // Protection never adds operand loads to the base loop.
      CHECK(r.op_counts.operand_load_count == loads);
    }
  }
}

TEST_CASE("output is independent of the scheme") {
  std::mt19937_64 rng(8);
  const auto a = oracle::random_int(40, 24, rng);
  const auto b = oracle::random_int(24, 20, rng);
  const std::vector<IFault> faults{IFault::at_output(3, 4, 11), IFault::at_output(39, 19, -2)};
  const auto base = run(a, b, kSmall, Scheme::unprotected, faults).output;
  for (Scheme s : kAllSchemes) CHECK(run(a, b, kSmall, s, faults).output == base);
}

TEST_CASE("faults must target real cells") {
  std::mt19937_64 rng(9);
  const auto a = oracle::random_int(10, 6, rng);
  const auto b = oracle::random_int(6, 10, rng);
  CHECK_THROWS_AS(run(a, b, kSmall, Scheme::global_abft, {IFault::at_output(10, 0, 1)}), InvalidFaultError);
  CHECK_THROWS_AS(run(a, b, kSmall, Scheme::global_abft, {IFault::at_output(0, 0, 0)}), InvalidFaultError);
  CHECK_THROWS_AS(run(a, b, kSmall, Scheme::thread_one_sided,
                      {IFault::at_mma(owning_thread(0, 0, kSmall), 99, 0, 0, 1)}),
                  InvalidFaultError);
  CHECK_THROWS_AS(run(a, oracle::random_int(5, 10, rng), kSmall, Scheme::global_abft), ShapeMismatchError);
}

TEST_CASE("one-sided thread tile") {
  const TilingConfig t{8, 8, 8, 8, 8, 8, 2};
  std::mt19937_64 rng(10);
  const auto at = oracle::random_int(8, 8, rng);
  const auto bt = oracle::random_int(8, 8, rng);
  const auto clean = thread_tile_one_sided<std::int64_t>(at, bt, t, ElementType::exact_int);
  REQUIRE(clean.verdict);
  CHECK_FALSE(clean.verdict->detected);
  CHECK(clean.ct == oracle::gemm(at, bt));
  CHECK(clean.counts.redundant_mma_count == 4 * 4);  // Mt/2 per step, 4 steps
  CHECK(clean.counts.checksum_op_count == 4 * 2 * 8);

  const LocalFault<std::int64_t> f{-1, 5, 2, 1};
  CHECK(thread_tile_one_sided<std::int64_t>(at, bt, t, ElementType::exact_int, std::span(&f, 1)).verdict->detected);

  // Rows of Bt summing to one make the checksum column the row sums of At.
  IMat ones(8, 8);
  for (std::size_t p = 0; p < 8; ++p) ones(p, p % 8) = 1;
  const auto r = thread_tile_one_sided<std::int64_t>(at, ones, t, ElementType::exact_int);
  std::vector<std::int64_t> row_sums;
  for (std::size_t i = 0; i < 8; ++i) {
    std::int64_t s = 0;
    for (std::size_t p = 0; p < 8; ++p) s += at(i, p);
    row_sums.push_back(s);
  }
  CHECK_FALSE(r.verdict->detected);
  CHECK(std::find(row_sums.begin(), row_sums.end(), r.verdict->lhs) != row_sums.end());
}

TEST_CASE("two-sided thread tile on the 2x2 example") {
  const TilingConfig t{2, 2, 2, 2, 2, 2, 2};
  const IMat a{{1, 2}, {3, 4}};
  const IMat b{{1, 2}, {3, 4}};
  const auto r = thread_tile_two_sided<std::int64_t>(a, b, t, ElementType::exact_int);
  CHECK(r.verdict->lhs == 54);
  CHECK(r.verdict->rhs == 54);
  CHECK_FALSE(r.verdict->detected);
  CHECK(r.counts.redundant_mma_count == 1);
  const LocalFault<std::int64_t> f{-1, 0, 1, 2};
  CHECK(thread_tile_two_sided<std::int64_t>(a, b, t, ElementType::exact_int, std::span(&f, 1)).verdict->detected);
}

TEST_CASE("two-sided op counts for 8x8 and 16x8") {
  std::mt19937_64 rng(11);
  for (auto [mt, nt] : {std::pair<std::int64_t, std::int64_t>{8, 8}, {16, 8}}) {
    const TilingConfig t{mt, nt, mt, nt, mt, nt, 2};
    const auto at = oracle::random_int(static_cast<std::size_t>(mt), 16, rng);
    const auto bt = oracle::random_int(16, static_cast<std::size_t>(nt), rng);
    const auto r = thread_tile_two_sided<std::int64_t>(at, bt, t, ElementType::exact_int);
    CHECK(r.counts.redundant_mma_count == 8);
    CHECK(r.counts.checksum_op_count == static_cast<std::uint64_t>(8 * 2 * (mt + nt)));
    CHECK(r.counts.base_mma_count == static_cast<std::uint64_t>(8 * mt * nt / 2));
  }
}

TEST_CASE("replication variants") {
  const TilingConfig t{8, 4, 8, 4, 8, 4, 2};
  std::mt19937_64 rng(12);
  const auto at = oracle::random_int(8, 6, rng);
  const auto bt = oracle::random_int(6, 4, rng);
  for (auto variant : {ReplicationVariant::full, ReplicationVariant::single_accumulator}) {
    const auto clean = thread_tile_replication<std::int64_t>(at, bt, t, variant, ElementType::exact_int);
    CHECK_FALSE(clean.verdict->detected);
    CHECK(clean.counts.redundant_mma_count == 3 * 8 * 4 / 2);
    CHECK(clean.counts.checksum_op_count == 0);
    const LocalFault<std::int64_t> f{-1, 7, 3, -4};
    CHECK(thread_tile_replication<std::int64_t>(at, bt, t, variant, ElementType::exact_int, std::span(&f, 1))
              .verdict->detected);
  }
  const std::vector<LocalFault<std::int64_t>> pair{{-1, 1, 0, 5}, {-1, 6, 2, -5}};
  CHECK(thread_tile_replication<std::int64_t>(at, bt, t, ReplicationVariant::full, ElementType::exact_int, pair)
            .verdict->detected);
  CHECK_FALSE(thread_tile_replication<std::int64_t>(at, bt, t, ReplicationVariant::single_accumulator,
                                                    ElementType::exact_int, pair)
                  .verdict->detected);
}

TEST_CASE("canceling pair defeats a global checksum") {
  std::mt19937_64 rng(13);
  const auto a = oracle::random_int(16, 16, rng);
  const auto b = oracle::random_int(16, 16, rng);
  const std::vector<IFault> pair{IFault::at_output(0, 0, 1), IFault::at_output(15, 15, -1)};
  CHECK_FALSE(run(a, b, kSmall, Scheme::global_abft, pair).detected);
  CHECK(run(a, b, kSmall, Scheme::thread_one_sided, pair).detected);
}

TEST_CASE("thread tile shape checks") {
  const TilingConfig t{8, 8, 8, 8, 8, 8, 2};
  std::mt19937_64 rng(14);
  CHECK_THROWS_AS(thread_tile_one_sided<std::int64_t>(oracle::random_int(6, 8, rng), oracle::random_int(8, 8, rng), t,
                                                      ElementType::exact_int),
                  ShapeMismatchError);
  CHECK_THROWS_AS(thread_tile_two_sided<std::int64_t>(oracle::random_int(8, 7, rng), oracle::random_int(7, 8, rng), t,
                                                      ElementType::exact_int),
                  ShapeMismatchError);
}

TEST_CASE("binary16 execution stays clean and catches large faults") {
  std::mt19937_64 rng(15);
  std::uniform_int_distribution<std::size_t> dim(1, 32);
  for (int trial = 0; trial < 40; ++trial) {
    const auto t = random_tiling(rng);
    const auto a = random_matrix<float>(dim(rng), dim(rng), ElementType::binary16, rng);
    const auto b = random_matrix<float>(a.cols(), dim(rng), ElementType::binary16, rng);
    const GemmShape shape{static_cast<std::int64_t>(a.rows()), static_cast<std::int64_t>(b.cols()),
                          static_cast<std::int64_t>(a.cols())};
    for (Scheme s : kAllSchemes) {
      const auto clean = execute<float>(a, b, t, s, {}, ElementType::binary16);
      CHECK_FALSE(clean.detected);
      if (s == Scheme::unprotected) continue;
      const auto f = FaultSpec<float>::random(FaultSiteKind::output_element, shape, t, 1000.0f, rng);
      CHECK(execute<float>(a, b, t, s, std::span(&f, 1), ElementType::binary16).detected);
    }
  }
}
