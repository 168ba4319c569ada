#include "dagledger/metrics.hpp"

#include "dagledger/errors.hpp"

#include <algorithm>
#include <limits>

namespace dagledger {

namespace {

NodeSet final_valid(const LedgerState &state, const SimParams &params) {
  return valid_blocks(state.blocks, params.score, params.k);
}

NodeSet final_present(const LedgerState &state, const SimParams &params) {
  return present_valid_transactions(state.blocks, state.txs, params.score, params.k);
}

std::vector<std::uint32_t> valid_per_miner(const LedgerState &state, const SimParams &params,
                                           const NodeSet &vb) {
  std::vector<std::uint32_t> counts(params.miners.size(), 0);
  vb.for_each([&](BlockId b) {
    const auto &owner = state.blocks.block(b).owner;
    if (owner) ++counts.at(*owner);
  });
  return counts;
}

} // namespace

std::vector<double> reward_shares(const LedgerState &state, const SimParams &params) {
  const auto counts = valid_per_miner(state, params, final_valid(state, params));
  std::uint64_t total = 0;
  for (auto c : counts) total += c;
  if (total == 0) throw UndefinedMetric("reward shares undefined: no valid mined block");
  std::vector<double> shares;
  shares.reserve(counts.size());
  for (auto c : counts) shares.push_back(static_cast<double>(c) / static_cast<double>(total));
  return shares;
}

std::vector<double> surplus(const std::vector<double> &shares, const SimParams &params) {
  if (shares.size() != params.miners.size())
    throw InputError("share vector does not match miner count");
  std::vector<double> out(shares.size());
  for (std::size_t i = 0; i < shares.size(); ++i) out[i] = shares[i] - params.miners[i].hash;
  return out;
}

double pow_efficiency(const LedgerState &state, const SimParams &params) {
  const double published = static_cast<double>(state.turn) * params.tx_rate();
  if (published == 0.0) return 0.0;
  std::uint64_t included = 0;
  final_present(state, params).for_each([&](TxIndex t) {
    if (!state.txs.is_reward(t)) ++included;
  });
  return static_cast<double>(included) / published;
}

double orphan_rate(const LedgerState &state, const SimParams &params) {
  if (state.turn == 0) return 0.0;
  const std::size_t valid = final_valid(state, params).size() - 1; // minus genesis
  return 1.0 - static_cast<double>(valid) / static_cast<double>(state.turn);
}

std::uint32_t lag(const LedgerState &state, const SimParams &params) {
  std::optional<Turn> newest;
  final_present(state, params).for_each([&](TxIndex t) {
    const auto &tx = state.txs.tx(t);
    if (tx.id.kind == TxKind::regular && (!newest || tx.id.turn > *newest)) newest = tx.id.turn;
  });
  return newest ? state.turn - *newest : state.turn;
}

std::optional<double> mean_inclusion_delay(const LedgerState &state, const SimParams &params) {
  const NodeSet vb = final_valid(state, params);
  std::vector<Turn> first(state.txs.size(), std::numeric_limits<Turn>::max());
  vb.for_each([&](BlockId b) {
    for (TxIndex t : state.blocks.block(b).txs) first[t] = std::min<Turn>(first[t], b);
  });
  double total = 0.0;
  std::uint64_t n = 0;
  for (TxIndex t = 0; t < state.txs.size(); ++t) {
    const auto &tx = state.txs.tx(t);
    if (tx.id.kind != TxKind::regular || first[t] == std::numeric_limits<Turn>::max()) continue;
    total += static_cast<double>(first[t] - tx.id.turn);
    ++n;
  }
  if (n == 0) return std::nullopt;
  return total / static_cast<double>(n);
}

TrialMetrics compute_metrics(const LedgerState &state, const SimParams &params) {
  TrialMetrics m;
  m.blocks_mined.assign(params.miners.size(), 0);
  for (const Block &b : state.blocks.blocks())
    if (b.owner) ++m.blocks_mined.at(*b.owner);
  m.blocks_valid = valid_per_miner(state, params, final_valid(state, params));
  m.shares = reward_shares(state, params);
  m.surplus = surplus(m.shares, params);
  m.pow_efficiency = pow_efficiency(state, params);
  m.orphan_rate = orphan_rate(state, params);
  m.lag = lag(state, params);
  m.mean_inclusion_delay = mean_inclusion_delay(state, params);
  return m;
}

} // namespace dagledger
