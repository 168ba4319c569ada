#include "dagledger/errors.hpp"
#include "dagledger/experiment.hpp"
#include "dagledger/metrics.hpp"

#include <doctest.h>

#include <cmath>
#include <numeric>

using namespace dagledger;

namespace {

SimParams two_miners(PointerLimit k = PointerLimit::finite(1)) {
  SimParams p;
  p.miners = {{0.5, 1.0}, {0.5, 1.0}};
  p.k = k;
  return p;
}

// Two-turn fork: B1 by miner 0 carries a (turn 1), B2 by miner 1 carries b.
LedgerState fork_state(const SimParams &p) {
  LedgerState s = genesis(p);
  const TxIndex r1 = s.txs.add_reward(1);
  const TxIndex x = s.txs.add_regular(1, {0});
  s.blocks.add_block(0u, {0}, {x, r1});
  const TxIndex r2 = s.txs.add_reward(2);
  const TxIndex y = s.txs.add_regular(2, {0});
  s.blocks.add_block(1u, {0}, {y, r2});
  s.turn = 2;
  return s;
}

} // namespace

TEST_CASE("fork shares and orphan rate") {
  const auto p = two_miners();
  const auto s = fork_state(p);
  CHECK(reward_shares(s, p) == std::vector<double>{1.0, 0.0});
  CHECK(surplus(reward_shares(s, p), p) == std::vector<double>{0.5, -0.5});
  CHECK(orphan_rate(s, p) == 0.5);

  const auto pinf = two_miners(PointerLimit::unbounded());
  CHECK(reward_shares(s, pinf) == std::vector<double>{0.5, 0.5});
  CHECK(orphan_rate(s, pinf) == 0.0);
}

TEST_CASE("shares are undefined without a valid mined block") {
  const auto p = two_miners();
  const auto s = genesis(p);
  CHECK_THROWS_AS(reward_shares(s, p), UndefinedMetric);
  CHECK_THROWS_AS(compute_metrics(s, p), UndefinedMetric);
  CHECK(pow_efficiency(s, p) == 0.0);
  CHECK(orphan_rate(s, p) == 0.0);
  CHECK(lag(s, p) == 0);
}

TEST_CASE("surplus rejects mismatched shares") {
  CHECK_THROWS_AS(surplus({1.0}, two_miners()), InputError);
}

TEST_CASE("lag and inclusion delay on a hand-built state") {
  const auto p = two_miners();
  auto s = fork_state(p);
  // VB = {B0, B1}; newest included regular tx is from turn 1.
  CHECK(lag(s, p) == 1);
  CHECK(mean_inclusion_delay(s, p) == 0.0);
  // Nothing regular in VB: lag is T.
  const auto pinf = two_miners(PointerLimit::unbounded());
  CHECK(lag(s, pinf) == 0);
  LedgerState bare = genesis(p);
  bare.txs.add_reward(1);
  bare.blocks.add_block(0u, {0}, {1});
  bare.turn = 7;
  CHECK(lag(bare, p) == 7);
  CHECK_FALSE(mean_inclusion_delay(bare, p).has_value());
}

TEST_CASE("a lone miner owns every reward") {
  SimParams p;
  p.miners = {{1.0, 0.2}};
  p.horizon = 30;
  const auto m = compute_metrics(run(p).state, p);
  CHECK(m.shares == std::vector<double>{1.0});
  CHECK(m.surplus == std::vector<double>{0.0});
  CHECK(m.orphan_rate == 0.0);
  CHECK(m.blocks_mined == std::vector<std::uint32_t>{30});
}

TEST_CASE("unbounded k keeps every block valid") {
  SimParams p;
  p.miners = equal_miners(3, 0.2);
  p.k = PointerLimit::unbounded();
  p.horizon = 40;
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    p.seed = seed;
    const auto m = compute_metrics(run(p).state, p);
    CHECK(m.orphan_rate == 0.0);
    CHECK(m.blocks_valid == m.blocks_mined);
    for (std::size_t i = 0; i < 3; ++i) CHECK(m.shares[i] == m.blocks_mined[i] / 40.0);
  }
}

TEST_CASE("efficiency at full information") {
  SimParams p;
  p.miners = equal_miners(4, 1.0);
  p.horizon = 100;
  // Each turn's transactions are carried by the next block; the last turn's
  // are never included.
  auto m = compute_metrics(run(p).state, p);
  CHECK(m.pow_efficiency == 0.99);
  CHECK(m.orphan_rate == 0.0);
  CHECK(m.lag == 1);

  p.horizon = 1;
  m = compute_metrics(run(p).state, p);
  CHECK(m.pow_efficiency == 0.0);
  CHECK(m.lag == 1);
}

TEST_CASE("efficiency is zero when nothing is delivered") {
  SimParams p;
  p.miners = equal_miners(2, 0.0);
  p.horizon = 20;
  const auto m = compute_metrics(run(p).state, p);
  CHECK(m.pow_efficiency == 0.0);
  CHECK(m.lag == 20);
}

TEST_CASE("metric conservation") {
  for (auto k : {PointerLimit::finite(1), PointerLimit::finite(2), PointerLimit::unbounded()}) {
    SimParams p;
    p.miners = {{0.2, 0.1}, {0.3, 0.4}, {0.5, 0.05, MinerKind::non_atomic}};
    p.k = k;
    p.horizon = 50;
    for (std::uint64_t seed = 0; seed < 10; ++seed) {
      p.seed = seed;
      const auto m = compute_metrics(run(p).state, p);
      CHECK(std::accumulate(m.blocks_mined.begin(), m.blocks_mined.end(), 0u) == 50);
      const auto valid = std::accumulate(m.blocks_valid.begin(), m.blocks_valid.end(), 0u);
      CHECK(m.orphan_rate == doctest::Approx(1.0 - valid / 50.0).epsilon(1e-15));
      CHECK(std::accumulate(m.shares.begin(), m.shares.end(), 0.0) == doctest::Approx(1.0));
      CHECK(std::accumulate(m.surplus.begin(), m.surplus.end(), 0.0) ==
            doctest::Approx(0.0).epsilon(1e-12));
      for (std::size_t i = 0; i < 3; ++i) CHECK(m.blocks_valid[i] <= m.blocks_mined[i]);
      CHECK(m.pow_efficiency >= 0.0);
      CHECK(m.pow_efficiency <= 1.0);
      CHECK(m.orphan_rate >= 0.0);
      CHECK(m.orphan_rate < 1.0);
      CHECK(m.lag <= 50);
    }
  }
}
