#pragma once

#include "dagledger/ledger.hpp"

#include <vector>

namespace dagledger {

/// What a strategy may look at when asked for a decision.
struct StrategyView {
  const LedgerState &state;
  const SimParams &params;
  MinerIndex self;
  Turn turn;

  const LocalInfo &local() const { return state.locals[self]; }
};

struct PublishDecision {
  std::vector<BlockId> blocks;
  std::vector<TxIndex> txs;
};

struct NewTransaction {
  std::vector<TxIndex> deps;
  bool broadcast = true;
};

/// Memoryless miner strategy: initialisation, publishing and transaction
/// creation, each a function of the miner's local information.
class MinerStrategy {
public:
  virtual ~MinerStrategy() = default;

  virtual InitDecision initialize(const StrategyView &view) const = 0;
  virtual PublishDecision publish(const StrategyView &view) const = 0;
  virtual std::vector<NewTransaction> create(const StrategyView &view) const = 0;
};

/// Points at the top-k visible leaves, packs the oldest includable
/// transactions, publishes everything at once and creates nothing.
class HonestStrategy final : public MinerStrategy {
public:
  InitDecision initialize(const StrategyView &view) const override;
  PublishDecision publish(const StrategyView &view) const override;
  std::vector<NewTransaction> create(const StrategyView &view) const override;

  static const HonestStrategy &instance();
};

} // namespace dagledger
