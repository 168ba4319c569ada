#pragma once

// Turn-by-turn ledger growth.
//
// A turn runs four phases: mining, action (publishing and miner-created
// transactions), nature (end-user transactions) and information update.
// PhaseOrder::honest_growth runs them as
//     mining -> action -> nature -> information update
// so the block found this turn is public before anyone updates their view.
// PhaseOrder::general runs the formal transition order
//     mining -> information update -> action -> nature.
//
// Random draws are consumed from a single SimRng in this fixed order:
//   mining:      1 uniform01 to pick the winner; if the winner is a
//                non-atomic aggregate, one uniform01 per public block
//                (ascending id, genesis skipped) then one per public
//                transaction (ascending index, genesis reward skipped).
//   nature:      for each of the lambda new transactions: the Poisson draws
//                for its dependency count, then one uniform_index per
//                dependency draw.
//   information: for each atomic miner in index order, one uniform01 per
//                public block it does not see (ascending), then one per
//                public transaction it does not see (ascending).

#include "dagledger/dag.hpp"
#include "dagledger/node_set.hpp"
#include "dagledger/rng.hpp"

#include <functional>
#include <memory>
#include <optional>
#include <vector>

namespace dagledger {

class MinerStrategy;

enum class MinerKind : std::uint8_t { atomic, non_atomic };
enum class PhaseOrder : std::uint8_t { honest_growth, general };

struct MinerSpec {
  double hash = 1.0;           // h_i, probability of winning a turn
  double info = 1.0;           // q_i, per-turn delivery probability
  MinerKind kind = MinerKind::atomic;
  std::shared_ptr<const MinerStrategy> strategy; // null means honest
};

struct SimParams {
  std::vector<MinerSpec> miners;
  PointerLimit k = PointerLimit::finite(1);
  std::uint32_t eta = 6;                // max regular txs per block
  std::optional<std::uint32_t> lambda;  // nature txs per turn; eta if unset
  double gamma = 2.0;                   // Poisson mean of dependency count
  ScoreParams score;
  std::uint32_t horizon = 50;
  std::uint64_t seed = 0;
  PhaseOrder order = PhaseOrder::honest_growth;

  std::uint32_t tx_rate() const { return lambda.value_or(eta); }
  /// Throws ConfigError.
  void validate() const;
};

/// Miner m_i's knowledge at the end of a turn.
struct LocalInfo {
  NodeSet visible_blocks;
  NodeSet private_blocks;
  NodeSet visible_txs;
  NodeSet private_txs;
};

struct LedgerState {
  Turn turn = 0;
  BlockDag blocks;
  TxGraph txs;
  NodeSet public_blocks;
  NodeSet public_txs;
  std::vector<LocalInfo> locals;
  /// Turn of the first block (any block, valid or not) that carried each tx.
  std::vector<std::optional<Turn>> first_inclusion;
};

LedgerState genesis(const SimParams &params);

/// Picks the winner, lets it initialise B_t and adds B_t and its reward to
/// the global graphs and to the winner's private sets.
MinerIndex mining_phase(LedgerState &state, const SimParams &params, SimRng &rng);

/// Pointers and transactions an honest miner would put in its next block.
struct InitDecision {
  std::vector<TxIndex> txs;
  std::vector<BlockId> pointers;
};
InitDecision honest_initialize(const LocalInfo &local, const LedgerState &state,
                               const SimParams &params);

void action_phase(LedgerState &state, const SimParams &params);
void nature_phase(LedgerState &state, const SimParams &params, SimRng &rng);
void information_update_phase(LedgerState &state, const SimParams &params, SimRng &rng);

/// 1 - (1 - q)^age.
double direct_visibility_probability(double q, std::uint32_t age);

/// Fresh view for a non-atomic aggregate miner at `current_turn`: each
/// public block or transaction created at turn r is directly visible with
/// probability 1 - (1 - q)^(current_turn - r); then ancestors, carried
/// transactions and dependencies are added.
LocalInfo non_atomic_resample(const LedgerState &state, double q, Turn current_turn,
                              SimRng &rng);

/// Advances one turn. Returns the winner.
MinerIndex step(LedgerState &state, const SimParams &params, SimRng &rng);

struct RunResult {
  LedgerState state;
  std::vector<MinerIndex> winners; // winners[t-1] owns B_t
};

using TurnObserver = std::function<void(const LedgerState &)>;

/// genesis() followed by params.horizon steps under SimRng(params.seed).
RunResult run(const SimParams &params, const TurnObserver &observer = {});

} // namespace dagledger
