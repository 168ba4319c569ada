#pragma once

#include "dagledger/ledger.hpp"

#include <optional>
#include <vector>

namespace dagledger {

/// Outcome measures of one finished run.
struct TrialMetrics {
  std::vector<std::uint32_t> blocks_mined; // per miner, all blocks found
  std::vector<std::uint32_t> blocks_valid; // per miner, blocks inside VB(G_T)
  std::vector<double> shares;
  std::vector<double> surplus;
  double pow_efficiency = 0.0;
  double orphan_rate = 0.0;
  std::uint32_t lag = 0;
  /// Mean over included regular txs of (first valid inclusion turn - creation
  /// turn). Alternative latency reading; empty when nothing was included.
  std::optional<double> mean_inclusion_delay;
};

/// Fraction of valid non-genesis blocks owned by each miner. Throws
/// UndefinedMetric when there is no valid non-genesis block.
std::vector<double> reward_shares(const LedgerState &state, const SimParams &params);

/// share_i - h_i.
std::vector<double> surplus(const std::vector<double> &shares, const SimParams &params);

/// Regular txs in PVT(G_T) over the T * lambda published by nature.
double pow_efficiency(const LedgerState &state, const SimParams &params);

/// 1 - (valid non-genesis blocks) / T.
double orphan_rate(const LedgerState &state, const SimParams &params);

/// T minus the newest creation turn among included regular txs; T if none.
std::uint32_t lag(const LedgerState &state, const SimParams &params);

std::optional<double> mean_inclusion_delay(const LedgerState &state, const SimParams &params);

TrialMetrics compute_metrics(const LedgerState &state, const SimParams &params);

} // namespace dagledger
