#include "dagledger/strategy.hpp"

namespace dagledger {

InitDecision HonestStrategy::initialize(const StrategyView &view) const {
  return honest_initialize(view.local(), view.state, view.params);
}

PublishDecision HonestStrategy::publish(const StrategyView &view) const {
  const LocalInfo &l = view.local();
  return PublishDecision{l.private_blocks.members(), l.private_txs.members()};
}

std::vector<NewTransaction> HonestStrategy::create(const StrategyView &) const { return {}; }

const HonestStrategy &HonestStrategy::instance() {
  static const HonestStrategy honest;
  return honest;
}

} // namespace dagledger
