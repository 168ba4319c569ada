#include "dagledger/emit.hpp"
#include "dagledger/errors.hpp"
#include "dagledger/experiment.hpp"
#include "dagledger/ledger.hpp"
#include "dagledger/strategy.hpp"
#include "oracle.hpp"

#include <doctest.h>

#include <cmath>
#include <memory>
#include <set>

using namespace dagledger;

namespace {

SimParams params_for(std::vector<MinerSpec> miners, PointerLimit k = PointerLimit::finite(1)) {
  SimParams p;
  p.miners = std::move(miners);
  p.k = k;
  return p;
}

std::set<std::uint32_t> ids(const NodeSet &s) { return oracle::as_set(s); }

// Hand-built ledger: B1 (miner 0) carries r1 and a; B2 (miner 1) forks off
// genesis and carries r2. Turn-2 transactions b, c, d, e depend on r0, r2,
// a and b respectively.
struct ForkLedger {
  LedgerState state;
  TxIndex r0, r1, a, r2, b, c, d, e;
};

ForkLedger fork_ledger(const SimParams &p) {
  ForkLedger f{genesis(p), 0, 0, 0, 0, 0, 0, 0, 0};
  auto &s = f.state;
  f.r0 = 0;
  f.r1 = s.txs.add_reward(1);
  f.a = s.txs.add_regular(1, {f.r0});
  s.blocks.add_block(0u, {0}, {f.r1, f.a});
  f.r2 = s.txs.add_reward(2);
  s.blocks.add_block(1u, {0}, {f.r2});
  f.b = s.txs.add_regular(2, {f.r0});
  f.c = s.txs.add_regular(2, {f.r2});
  f.d = s.txs.add_regular(2, {f.a});
  f.e = s.txs.add_regular(2, {f.b});
  s.turn = 2;
  for (BlockId blk = 0; blk < s.blocks.size(); ++blk) s.public_blocks.insert(blk);
  for (TxIndex t = 0; t < s.txs.size(); ++t) s.public_txs.insert(t);
  for (auto &l : s.locals) {
    l.visible_blocks = s.public_blocks;
    l.visible_txs = s.public_txs;
  }
  return f;
}

class WithholdReward final : public MinerStrategy {
public:
  InitDecision initialize(const StrategyView &v) const override {
    return honest_initialize(v.local(), v.state, v.params);
  }
  PublishDecision publish(const StrategyView &v) const override {
    return {v.local().private_blocks.members(), {}};
  }
  std::vector<NewTransaction> create(const StrategyView &) const override { return {}; }
};

class NeverPublish final : public MinerStrategy {
public:
  InitDecision initialize(const StrategyView &v) const override {
    InitDecision d = honest_initialize(v.local(), v.state, v.params);
    // Extend its own private chain when it has one.
    const auto priv = v.local().private_blocks.members();
    if (!priv.empty()) d.pointers = {priv.back()};
    return d;
  }
  PublishDecision publish(const StrategyView &) const override { return {}; }
  std::vector<NewTransaction> create(const StrategyView &) const override { return {}; }
};

class TooManyPointers final : public MinerStrategy {
public:
  InitDecision initialize(const StrategyView &v) const override {
    InitDecision d = honest_initialize(v.local(), v.state, v.params);
    d.pointers.push_back(v.state.turn + 5);
    return d;
  }
  PublishDecision publish(const StrategyView &) const override { return {}; }
  std::vector<NewTransaction> create(const StrategyView &) const override { return {}; }
};

class CreatesTransactions final : public MinerStrategy {
public:
  InitDecision initialize(const StrategyView &v) const override {
    return honest_initialize(v.local(), v.state, v.params);
  }
  PublishDecision publish(const StrategyView &v) const override {
    return HonestStrategy::instance().publish(v);
  }
  std::vector<NewTransaction> create(const StrategyView &) const override {
    return {{{0}, true}, {{0}, false}};
  }
};

void check_invariants(const LedgerState &s) {
  REQUIRE(s.blocks.size() == s.turn + 1);
  CHECK(closure(s.blocks, s.public_blocks) == s.public_blocks);
  for (const auto &l : s.locals) {
    CHECK(l.visible_blocks.contains(kGenesis));
    CHECK(l.visible_blocks.is_subset_of(s.public_blocks));
    CHECK(closure(s.blocks, l.visible_blocks) == l.visible_blocks);
    CHECK(carried_transactions(s.blocks, l.visible_blocks).is_subset_of(l.visible_txs));
    CHECK(closure(s.txs, l.visible_txs) == l.visible_txs);
  }
  for (const auto &b : s.blocks.blocks()) {
    std::uint32_t rewards = 0;
    for (TxIndex t : b.txs) rewards += s.txs.is_reward(t) ? 1 : 0;
    CHECK(rewards == 1);
  }
}

} // namespace

TEST_CASE("genesis state") {
  const auto p = params_for(equal_miners(3, 0.5));
  const LedgerState s = genesis(p);
  CHECK(s.turn == 0);
  CHECK(s.blocks.size() == 1);
  CHECK(s.txs.size() == 1);
  CHECK(s.txs.tx(0).id == TxId{0, 0, TxKind::reward});
  CHECK(s.blocks.block(0).txs == std::vector<TxIndex>{0});
  REQUIRE(s.locals.size() == 3);
  for (const auto &l : s.locals) {
    CHECK(ids(l.visible_blocks) == std::set<std::uint32_t>{0});
    CHECK(ids(l.visible_txs) == std::set<std::uint32_t>{0});
    CHECK(l.private_blocks.empty());
  }
}

TEST_CASE("parameter validation") {
  auto p = params_for({{0.6, 1.0}, {0.3, 1.0}});
  CHECK_THROWS_AS(genesis(p), ConfigError);
  p = params_for({{1.0, 1.5}});
  CHECK_THROWS_AS(genesis(p), ConfigError);
  p = params_for({{0.0, 1.0}, {1.0, 1.0}});
  CHECK_THROWS_AS(genesis(p), ConfigError);
  p = params_for({});
  CHECK_THROWS_AS(genesis(p), ConfigError);
  p = params_for({{1.0, 1.0}});
  p.eta = 0;
  CHECK_THROWS_AS(p.validate(), ConfigError);
  p.eta = 3;
  p.lambda = 0;
  CHECK_THROWS_AS(p.validate(), ConfigError);
  p.lambda = 5;
  CHECK(p.tx_rate() == 5);
  p.gamma = 0.0;
  CHECK_THROWS_AS(p.validate(), ConfigError);
  p.gamma = 2.0;
  p.horizon = 0;
  CHECK_THROWS_AS(p.validate(), ConfigError);
  p.horizon = 5;
  CHECK_NOTHROW(p.validate());
}

TEST_CASE("a lone miner wins every turn") {
  auto p = params_for({{1.0, 1.0}});
  p.horizon = 20;
  const auto r = run(p);
  CHECK(r.winners == std::vector<MinerIndex>(20, 0));
  for (BlockId b = 1; b <= 20; ++b) {
    CHECK(r.state.blocks.block(b).owner == 0u);
    CHECK(r.state.blocks.block(b).pointers == std::vector<BlockId>{b - 1});
  }
}

TEST_CASE("winner selection follows hash power") {
  auto p = params_for({{0.25, 1.0}, {0.75, 1.0}});
  p.horizon = 4000;
  p.seed = 11;
  const auto r = run(p);
  std::uint32_t zero = 0;
  for (auto w : r.winners) zero += w == 0 ? 1 : 0;
  // sd of the count is sqrt(4000 * 0.25 * 0.75) ~ 27.4
  CHECK(std::abs(static_cast<double>(zero) - 1000.0) < 5 * 27.4);
}

TEST_CASE("honest initialisation on a fork") {
  auto p = params_for(equal_miners(2, 1.0));
  auto f = fork_ledger(p);
  const auto &local = f.state.locals[0];

  auto d = honest_initialize(local, f.state, p);
  CHECK(d.pointers == std::vector<BlockId>{1});
  // b (dep r0) and d (dep a) are grounded; c depends on the orphaned reward
  // r2 and e on the not-yet-included b.
  CHECK(d.txs == std::vector<TxIndex>{f.b, f.d});

  p.eta = 1;
  d = honest_initialize(local, f.state, p);
  CHECK(d.txs == std::vector<TxIndex>{f.b});

  p.eta = 6;
  p.k = PointerLimit::unbounded();
  d = honest_initialize(local, f.state, p);
  CHECK(d.pointers == std::vector<BlockId>{1, 2});
  CHECK(d.txs == std::vector<TxIndex>{f.b, f.c, f.d});
}

TEST_CASE("honest initialisation from a partial view") {
  auto p = params_for(equal_miners(2, 1.0));
  auto f = fork_ledger(p);
  LocalInfo partial;
  partial.visible_blocks.insert(0);
  partial.visible_blocks.insert(2);
  partial.visible_txs.insert(f.r0);
  partial.visible_txs.insert(f.r2);
  partial.visible_txs.insert(f.c);
  const auto d = honest_initialize(partial, f.state, p);
  CHECK(d.pointers == std::vector<BlockId>{2});
  CHECK(d.txs == std::vector<TxIndex>{f.c});
}

TEST_CASE("blocks respect the pointer bound") {
  for (auto k : {PointerLimit::finite(1), PointerLimit::finite(2), PointerLimit::finite(3),
                 PointerLimit::unbounded()}) {
    auto p = params_for(equal_miners(4, 0.3), k);
    p.horizon = 60;
    p.seed = 5;
    const auto r = run(p);
    std::size_t widest = 0;
    for (const auto &b : r.state.blocks.blocks()) {
      if (b.id == kGenesis) continue;
      CHECK(!b.pointers.empty());
      CHECK(k.clamp(b.pointers.size()) == b.pointers.size());
      widest = std::max(widest, b.pointers.size());
      std::uint32_t regular = 0;
      for (TxIndex t : b.txs) regular += r.state.txs.is_reward(t) ? 0 : 1;
      CHECK(regular <= p.eta);
    }
    if (!k.is_unbounded() && k.value() == 1) CHECK(widest == 1);
    else CHECK(widest > 1);
  }
}

TEST_CASE("information update extremes") {
  auto p = params_for(equal_miners(3, 1.0));
  p.horizon = 10;
  auto full = run(p);
  for (const auto &l : full.state.locals) {
    CHECK(l.visible_blocks == full.state.public_blocks);
    CHECK(l.visible_txs == full.state.public_txs);
  }

  p.miners = {{1.0, 0.0}};
  p.horizon = 8;
  // With q = 0 a lone miner still sees its own published blocks.
  auto blind = run(p);
  CHECK(blind.state.locals[0].visible_blocks == blind.state.public_blocks);
  // Nature transactions are never delivered, so nothing regular is mined.
  for (const auto &b : blind.state.blocks.blocks())
    for (TxIndex t : b.txs) CHECK(blind.state.txs.is_reward(t));
}

TEST_CASE("information update draws only for unseen items") {
  auto p = params_for(equal_miners(2, 1.0));
  auto f = fork_ledger(p);
  SimRng rng(1);
  information_update_phase(f.state, p, rng);
  CHECK(rng.draws() == 0);
}

TEST_CASE("action phase publishes honest blocks and is otherwise a no-op") {
  auto p = params_for(equal_miners(2, 0.0));
  auto s = genesis(p);
  SimRng rng(3);
  const auto w = mining_phase(s, p, rng);
  CHECK(s.locals[w].private_blocks.contains(1));
  CHECK_FALSE(s.public_blocks.contains(1));
  action_phase(s, p);
  CHECK(s.public_blocks.contains(1));
  CHECK(s.locals[w].private_blocks.empty());
  CHECK(s.locals[w].visible_blocks.contains(1));
  CHECK_FALSE(s.locals[1 - w].visible_blocks.contains(1));

  const auto before_blocks = s.public_blocks;
  const auto before_txs = s.public_txs;
  action_phase(s, p);
  CHECK(s.public_blocks == before_blocks);
  CHECK(s.public_txs == before_txs);
}

TEST_CASE("withholding a block's reward violates the publishing contract") {
  auto p = params_for({{1.0, 1.0}});
  p.miners[0].strategy = std::make_shared<WithholdReward>();
  CHECK_THROWS_AS(run(p), ContractViolation);
}

TEST_CASE("pointer to an unknown block violates the initialisation contract") {
  auto p = params_for({{1.0, 1.0}}, PointerLimit::finite(3));
  p.miners[0].strategy = std::make_shared<TooManyPointers>();
  CHECK_THROWS_AS(run(p), ContractViolation);
}

TEST_CASE("a miner that never publishes keeps a private chain") {
  auto p = params_for({{0.5, 1.0}, {0.5, 1.0}});
  p.miners[1].strategy = std::make_shared<NeverPublish>();
  p.horizon = 40;
  p.seed = 2;
  const auto r = run(p);
  std::uint32_t hidden = 0;
  for (BlockId b = 1; b < r.state.blocks.size(); ++b)
    if (r.winners[b - 1] == 1) {
      ++hidden;
      CHECK_FALSE(r.state.public_blocks.contains(b));
    }
  CHECK(hidden > 0);
  CHECK(r.state.locals[1].private_blocks.size() == hidden);
  CHECK(r.state.locals[0].visible_blocks.is_subset_of(r.state.public_blocks));
}

TEST_CASE("miner-created transactions") {
  auto p = params_for({{1.0, 1.0}});
  p.miners[0].strategy = std::make_shared<CreatesTransactions>();
  p.horizon = 3;
  const auto r = run(p);
  // Per turn: 1 reward, 2 created, 6 from nature.
  CHECK(r.state.txs.size() == 1 + 3 * 9);
  // Honest publishing flushes last turn's private transaction before the
  // next one is created.
  CHECK(r.state.locals[0].private_txs.size() == 1);
}

TEST_CASE("nature transactions") {
  auto p = params_for(equal_miners(2, 1.0));
  p.horizon = 1;
  const auto one = run(p);
  // Turn 1: the only valid transaction of G_0 is the genesis reward.
  std::uint32_t regular = 0;
  for (const auto &t : one.state.txs.transactions()) {
    if (t.id.kind != TxKind::regular) continue;
    ++regular;
    CHECK(t.deps == std::vector<TxIndex>{0});
  }
  CHECK(regular == 6);

  p.horizon = 30;
  p.lambda = 9;
  p.seed = 8;
  run(p, [&](const LedgerState &s) {
    NodeSet before;
    for (BlockId b = 0; b < s.turn; ++b) before.insert(b);
    const NodeSet vt = present_valid_transactions(s.blocks, s.txs, before, p.score, p.k);
    std::uint32_t this_turn = 0;
    for (const auto &t : s.txs.transactions()) {
      if (t.id.kind != TxKind::regular || t.id.turn != s.turn) continue;
      ++this_turn;
      for (TxIndex dep : t.deps) CHECK(vt.contains(dep));
    }
    CHECK(this_turn == 9);
  });
}

TEST_CASE("non-atomic visibility probability") {
  CHECK(direct_visibility_probability(0.5, 0) == 0.0);
  CHECK(direct_visibility_probability(0.5, 1) == 0.5);
  CHECK(direct_visibility_probability(0.5, 2) == 0.75);
  CHECK(direct_visibility_probability(1.0, 3) == 1.0);
  CHECK(direct_visibility_probability(0.0, 30) == 0.0);
}

TEST_CASE("non-atomic resample") {
  auto p = params_for(equal_miners(2, 1.0));
  auto f = fork_ledger(p);
  SimRng rng(4);
  const auto all = non_atomic_resample(f.state, 1.0, 3, rng);
  CHECK(all.visible_blocks == f.state.public_blocks);
  CHECK(all.visible_txs == f.state.public_txs);
  // One uniform (two 32-bit words) per non-genesis public block and transaction.
  CHECK(rng.draws() == 2 * ((f.state.blocks.size() - 1) + (f.state.txs.size() - 1)));

  const auto none = non_atomic_resample(f.state, 0.0, 3, rng);
  CHECK(ids(none.visible_blocks) == std::set<std::uint32_t>{0});
  CHECK(ids(none.visible_txs) == std::set<std::uint32_t>{0});

  // B2 and the turn-2 transactions are one turn old at turn 3, B1 two.
  int saw1 = 0, saw2 = 0;
  const int n = 20000;
  for (int i = 0; i < n; ++i) {
    const auto l = non_atomic_resample(f.state, 0.5, 3, rng);
    saw2 += l.visible_blocks.contains(2) ? 1 : 0;
    saw1 += l.visible_blocks.contains(1) ? 1 : 0;
  }
  // B1 is also pulled in through visible descendants; none exist here.
  const double se1 = std::sqrt(0.75 * 0.25 / n), se2 = std::sqrt(0.25 / n);
  CHECK(std::abs(saw1 / double(n) - 0.75) < 5 * se1);
  CHECK(std::abs(saw2 / double(n) - 0.5) < 5 * se2);
}

TEST_CASE("step and run bookkeeping") {
  auto p = params_for(equal_miners(4, 0.4), PointerLimit::finite(2));
  p.horizon = 25;
  p.seed = 99;
  std::uint32_t calls = 0;
  const auto r = run(p, [&](const LedgerState &s) {
    ++calls;
    CHECK(s.turn == calls);
  });
  CHECK(calls == 25);
  CHECK(r.winners.size() == 25);
  CHECK(r.state.blocks.size() == 26);
  CHECK(r.state.first_inclusion.size() == r.state.txs.size());
  for (BlockId b = 1; b <= 25; ++b) CHECK(r.state.blocks.block(b).owner == r.winners[b - 1]);
}

TEST_CASE("runs replay bit-identically from the seed") {
  auto p = params_for(
      {{0.3, 0.2, MinerKind::atomic}, {0.7, 0.05, MinerKind::non_atomic}},
      PointerLimit::finite(2));
  p.horizon = 40;
  p.seed = 1234;
  const auto a = trace_json(run(p).state).dump();
  const auto b = trace_json(run(p).state).dump();
  CHECK(a == b);
  p.seed = 1235;
  CHECK(trace_json(run(p).state).dump() != a);
}

TEST_CASE("single miner grows a chain") {
  auto p = params_for({{1.0, 0.3}}, PointerLimit::finite(3));
  p.horizon = 30;
  const auto r = run(p);
  CHECK(leaves(r.state.blocks) == std::vector<BlockId>{30});
  CHECK(r.state.blocks.depth(30) == 30);
}

TEST_CASE("full information never forks") {
  for (std::uint64_t seed = 0; seed < 50; ++seed) {
    auto p = params_for(equal_miners(4, 1.0));
    p.horizon = 50;
    p.seed = seed;
    const auto r = run(p);
    CHECK(leaves(r.state.blocks) == std::vector<BlockId>{50});
  }
}

TEST_CASE("state invariants hold every turn") {
  for (auto order : {PhaseOrder::honest_growth, PhaseOrder::general}) {
    for (auto k : {PointerLimit::finite(1), PointerLimit::finite(3), PointerLimit::unbounded()}) {
      auto p = params_for({{0.2, 0.1}, {0.3, 0.5}, {0.5, 0.05, MinerKind::non_atomic}}, k);
      p.order = order;
      p.horizon = 40;
      p.seed = 77;
      run(p, check_invariants);
    }
  }
}

TEST_CASE("general phase order delivers the new block one turn later") {
  auto p = params_for(equal_miners(2, 1.0));
  p.order = PhaseOrder::general;
  auto s = genesis(p);
  SimRng rng(5);
  const auto w = step(s, p, rng);
  // Information is exchanged before publishing, so the loser has not seen B1.
  CHECK_FALSE(s.locals[1 - w].visible_blocks.contains(1));
  step(s, p, rng);
  CHECK(s.locals[1 - w].visible_blocks.contains(1));
}
