#include "dagledger/ledger.hpp"

#include "dagledger/errors.hpp"
#include "dagledger/strategy.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace dagledger {

namespace {

const MinerStrategy &strategy_of(const SimParams &params, MinerIndex i) {
  const auto &s = params.miners[i].strategy;
  return s ? *s : HonestStrategy::instance();
}

void note_inclusion(LedgerState &state, const Block &b) {
  state.first_inclusion.resize(state.txs.size());
  for (TxIndex t : b.txs)
    if (!state.first_inclusion[t]) state.first_inclusion[t] = b.id;
}

void close_view(const LedgerState &state, LocalInfo &local) {
  local.visible_blocks = closure(state.blocks, local.visible_blocks);
  NodeSet seeds = carried_transactions(state.blocks, local.visible_blocks);
  local.visible_txs.for_each([&](TxIndex t) { seeds.insert(t); });
  local.visible_txs = closure(state.txs, seeds);
}

bool known_block(const LocalInfo &l, BlockId b) {
  return l.visible_blocks.contains(b) || l.private_blocks.contains(b);
}

bool known_tx(const LocalInfo &l, TxIndex t) {
  return l.visible_txs.contains(t) || l.private_txs.contains(t);
}

void check_init(const InitDecision &d, const LocalInfo &local, const LedgerState &state,
                const SimParams &params) {
  if (d.pointers.empty() || params.k.clamp(d.pointers.size()) != d.pointers.size())
    throw ContractViolation("initialisation must choose between 1 and k pointers");
  for (BlockId b : d.pointers)
    if (!known_block(local, b))
      throw ContractViolation("pointer to block " + std::to_string(b) + " unknown to miner");
  if (d.txs.size() > params.eta)
    throw ContractViolation("initialisation selected more than eta transactions");
  for (TxIndex t : d.txs) {
    if (!known_tx(local, t))
      throw ContractViolation("transaction " + std::to_string(t) + " unknown to miner");
    if (state.txs.is_reward(t))
      throw ContractViolation("block may not carry another block's reward");
  }
}

} // namespace

void SimParams::validate() const {
  if (miners.empty()) throw ConfigError("at least one miner is required");
  double total = 0.0;
  for (const auto &m : miners) {
    if (!(m.hash > 0.0 && m.hash <= 1.0)) throw ConfigError("miner hash power must lie in (0, 1]");
    if (!(m.info >= 0.0 && m.info <= 1.0))
      throw ConfigError("miner informational parameter must lie in [0, 1]");
    total += m.hash;
  }
  if (std::abs(total - 1.0) > 1e-12) throw ConfigError("miner hash powers must sum to 1");
  if (eta == 0) throw ConfigError("eta must be >= 1");
  if (tx_rate() == 0) throw ConfigError("lambda must be >= 1");
  if (!(gamma > 0.0) || !std::isfinite(gamma)) throw ConfigError("gamma must be positive");
  if (horizon == 0) throw ConfigError("horizon must be >= 1");
  score.validate();
}

LedgerState genesis(const SimParams &params) {
  params.validate();
  LedgerState s;
  const TxIndex reward = s.txs.add_reward(0);
  s.blocks = BlockDag({reward});
  s.public_blocks.insert(kGenesis);
  s.public_txs.insert(reward);
  LocalInfo base;
  base.visible_blocks.insert(kGenesis);
  base.visible_txs.insert(reward);
  s.locals.assign(params.miners.size(), base);
  s.first_inclusion.assign(1, Turn{0});
  return s;
}

// --- mining ------------------------------------------------------------------

InitDecision honest_initialize(const LocalInfo &local, const LedgerState &state,
                               const SimParams &params) {
  InitDecision d;
  d.pointers = top_k_leaves(state.blocks, local.visible_blocks, params.score, params.k);

  const NodeSet vt = present_valid_transactions(state.blocks, state.txs,
                                                local.visible_blocks, params.score, params.k);
  // grounded: tx in VT whose whole dependency closure is in VT. Dependencies
  // always precede their dependents, so one ascending pass suffices.
  NodeSet grounded(state.txs.size());
  vt.for_each([&](TxIndex t) {
    const auto &deps = state.txs.tx(t).deps;
    if (std::all_of(deps.begin(), deps.end(), [&](TxIndex x) { return grounded.contains(x); }))
      grounded.insert(t);
  });

  local.visible_txs.for_each([&](TxIndex t) {
    if (vt.contains(t) || state.txs.is_reward(t)) return;
    const auto &deps = state.txs.tx(t).deps;
    if (std::all_of(deps.begin(), deps.end(), [&](TxIndex x) { return grounded.contains(x); }))
      d.txs.push_back(t);
  });
  // Oldest first: (creation turn, serial). Index order already matches in
  // simulator-built graphs, so this is normally a no-op.
  std::stable_sort(d.txs.begin(), d.txs.end(), [&](TxIndex a, TxIndex b) {
    return state.txs.tx(a).id < state.txs.tx(b).id;
  });
  if (d.txs.size() > params.eta) d.txs.resize(params.eta);
  return d;
}

double direct_visibility_probability(double q, std::uint32_t age) {
  if (age == 0) return 0.0;
  return 1.0 - std::pow(1.0 - q, static_cast<double>(age));
}

LocalInfo non_atomic_resample(const LedgerState &state, double q, Turn current_turn,
                              SimRng &rng) {
  std::vector<double> by_age(current_turn + 1);
  for (Turn a = 0; a <= current_turn; ++a) by_age[a] = direct_visibility_probability(q, a);
  auto age_of = [&](Turn created) { return created >= current_turn ? 0u : current_turn - created; };

  LocalInfo l;
  l.visible_blocks.insert(kGenesis);
  state.public_blocks.for_each([&](BlockId b) {
    if (b == kGenesis) return;
    if (rng.uniform01() < by_age[age_of(b)]) l.visible_blocks.insert(b);
  });
  const TxIndex genesis_reward = state.blocks.block(kGenesis).txs.front();
  l.visible_txs.insert(genesis_reward);
  state.public_txs.for_each([&](TxIndex t) {
    if (t == genesis_reward) return;
    if (rng.uniform01() < by_age[age_of(state.txs.tx(t).id.turn)]) l.visible_txs.insert(t);
  });
  close_view(state, l);
  return l;
}

MinerIndex mining_phase(LedgerState &state, const SimParams &params, SimRng &rng) {
  const Turn t = state.turn + 1;
  state.turn = t;

  const double u = rng.uniform01();
  MinerIndex winner = static_cast<MinerIndex>(params.miners.size() - 1);
  double cumulative = 0.0;
  for (MinerIndex i = 0; i < params.miners.size(); ++i) {
    cumulative += params.miners[i].hash;
    if (u < cumulative) {
      winner = i;
      break;
    }
  }

  const MinerSpec &spec = params.miners[winner];
  if (spec.kind == MinerKind::non_atomic)
    state.locals[winner] = non_atomic_resample(state, spec.info, t, rng);

  const StrategyView view{state, params, winner, t};
  InitDecision d = strategy_of(params, winner).initialize(view);
  check_init(d, state.locals[winner], state, params);

  const TxIndex reward = state.txs.add_reward(t);
  d.txs.push_back(reward);
  const BlockId b = state.blocks.add_block(winner, std::move(d.pointers), std::move(d.txs));
  if (b != t) throw ConsistencyError("block id does not match its creation turn");

  LocalInfo &local = state.locals[winner];
  local.private_blocks.insert(b);
  local.private_txs.insert(reward);
  note_inclusion(state, state.blocks.block(b));
  return winner;
}

// --- action ------------------------------------------------------------------

void action_phase(LedgerState &state, const SimParams &params) {
  for (MinerIndex i = 0; i < params.miners.size(); ++i) {
    const MinerStrategy &strategy = strategy_of(params, i);
    const PublishDecision pub = strategy.publish(StrategyView{state, params, i, state.turn});
    LocalInfo &local = state.locals[i];

    NodeSet blocks_out, txs_out;
    for (TxIndex t : pub.txs) {
      if (!local.private_txs.contains(t))
        throw ContractViolation("published transaction " + std::to_string(t) + " is not private");
      txs_out.insert(t);
    }
    for (BlockId b : pub.blocks) {
      if (!local.private_blocks.contains(b))
        throw ContractViolation("published block " + std::to_string(b) + " is not private");
      blocks_out.insert(b);
    }
    for (BlockId b : pub.blocks) {
      const Block &blk = state.blocks.block(b);
      for (TxIndex t : blk.txs)
        if (state.txs.is_reward(t) && state.txs.tx(t).id.turn == b && !txs_out.contains(t) &&
            !state.public_txs.contains(t))
          throw ContractViolation("block " + std::to_string(b) +
                                  " published without its reward transaction");
      for (BlockId p : blk.pointers)
        if (!state.public_blocks.contains(p) && !blocks_out.contains(p))
          throw ContractViolation("block " + std::to_string(b) +
                                  " published before its ancestor " + std::to_string(p));
    }

    blocks_out.for_each([&](BlockId b) {
      state.public_blocks.insert(b);
      local.private_blocks.erase(b);
      local.visible_blocks.insert(b);
    });
    txs_out.for_each([&](TxIndex t) {
      state.public_txs.insert(t);
      local.private_txs.erase(t);
      local.visible_txs.insert(t);
    });
    if (!blocks_out.empty() || !txs_out.empty()) close_view(state, local);

    for (const NewTransaction &nt : strategy.create(StrategyView{state, params, i, state.turn})) {
      for (TxIndex dep : nt.deps)
        if (!known_tx(local, dep))
          throw ContractViolation("created transaction depends on unknown transaction");
      const TxIndex x = state.txs.add_regular(state.turn, nt.deps);
      state.first_inclusion.resize(state.txs.size());
      if (nt.broadcast) {
        state.public_txs.insert(x);
        local.visible_txs.insert(x);
      } else {
        local.private_txs.insert(x);
      }
    }
  }
}

// --- nature ------------------------------------------------------------------

void nature_phase(LedgerState &state, const SimParams &params, SimRng &rng) {
  // Validity is judged on the ledger as it stood before this turn's block.
  NodeSet before(state.blocks.size());
  for (BlockId b = 0; b < state.turn && b < state.blocks.size(); ++b) before.insert(b);
  if (before.empty()) before.insert(kGenesis);
  const std::vector<TxIndex> vt =
      present_valid_transactions(state.blocks, state.txs, before, params.score, params.k)
          .members();
  if (vt.empty()) throw ConsistencyError("no valid transaction to depend on");

  for (std::uint32_t j = 0; j < params.tx_rate(); ++j) {
    const std::uint32_t draws = std::max<std::uint32_t>(1, rng.poisson(params.gamma));
    std::vector<TxIndex> deps;
    deps.reserve(draws);
    for (std::uint32_t d = 0; d < draws; ++d) deps.push_back(vt[rng.uniform_index(vt.size())]);
    const TxIndex x = state.txs.add_regular(state.turn, std::move(deps));
    state.public_txs.insert(x);
  }
  state.first_inclusion.resize(state.txs.size());
}

// --- information update ------------------------------------------------------

void information_update_phase(LedgerState &state, const SimParams &params, SimRng &rng) {
  for (MinerIndex i = 0; i < params.miners.size(); ++i) {
    const MinerSpec &spec = params.miners[i];
    if (spec.kind != MinerKind::atomic) continue;
    LocalInfo &local = state.locals[i];

    std::vector<BlockId> new_blocks;
    state.public_blocks.for_each([&](BlockId b) {
      if (!local.visible_blocks.contains(b) && rng.uniform01() < spec.info) new_blocks.push_back(b);
    });
    std::vector<TxIndex> new_txs;
    state.public_txs.for_each([&](TxIndex t) {
      if (!local.visible_txs.contains(t) && rng.uniform01() < spec.info) new_txs.push_back(t);
    });
    for (BlockId b : new_blocks) local.visible_blocks.insert(b);
    for (TxIndex t : new_txs) local.visible_txs.insert(t);
    close_view(state, local);
  }
}

// --- driver ------------------------------------------------------------------

MinerIndex step(LedgerState &state, const SimParams &params, SimRng &rng) {
  const MinerIndex winner = mining_phase(state, params, rng);
  if (params.order == PhaseOrder::honest_growth) {
    action_phase(state, params);
    nature_phase(state, params, rng);
    information_update_phase(state, params, rng);
  } else {
    information_update_phase(state, params, rng);
    action_phase(state, params);
    nature_phase(state, params, rng);
  }
  return winner;
}

RunResult run(const SimParams &params, const TurnObserver &observer) {
  RunResult r{genesis(params), {}};
  SimRng rng(params.seed);
  r.winners.reserve(params.horizon);
  for (std::uint32_t t = 0; t < params.horizon; ++t) {
    r.winners.push_back(step(r.state, params, rng));
    if (observer) observer(r.state);
  }
  return r;
}

} // namespace dagledger
