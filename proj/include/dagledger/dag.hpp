#pragma once

// Block DAGs, transaction graphs and the extractors defined over them:
// closure, depth/weight/score, leaf ranking, valid blocks and present
// valid transactions.
//
// A subgraph is represented by the NodeSet of its vertices; the edges are
// those of the parent graph restricted to the set (an induced subgraph).
// Every block subgraph the simulator produces is ancestor-closed, and for
// such views depth and weight coincide with the values in the full DAG, so
// both are computed once when a block is inserted.

#include "dagledger/node_set.hpp"

#include <compare>
#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace dagledger {

using BlockId = std::uint32_t;
using TxIndex = std::uint32_t;
using MinerIndex = std::uint32_t;
using Turn = std::uint32_t;

inline constexpr BlockId kGenesis = 0;

/// Maximum out-degree k of a block: a positive integer or unbounded.
class PointerLimit {
public:
  static PointerLimit finite(std::uint32_t k);
  static PointerLimit unbounded() { return PointerLimit{}; }

  /// Accepts a positive integer or "inf".
  static PointerLimit parse(std::string_view text);

  bool is_unbounded() const { return !k_.has_value(); }
  std::uint32_t value() const;
  /// min(k, n), or n when unbounded.
  std::size_t clamp(std::size_t n) const;
  std::string to_string() const;

  friend bool operator==(const PointerLimit &, const PointerLimit &) = default;

private:
  PointerLimit() = default;
  std::optional<std::uint32_t> k_;
};

/// (alpha, 1 - alpha) convex combination of depth and weight.
struct ScoreParams {
  double alpha = 0.5;

  void validate() const;
};

struct Block {
  BlockId id = kGenesis;
  std::optional<MinerIndex> owner; // empty for genesis
  std::vector<BlockId> pointers;   // ascending
  std::vector<TxIndex> txs;        // ascending
};

class BlockDag {
public:
  /// Creates a DAG holding only the genesis block.
  explicit BlockDag(std::vector<TxIndex> genesis_txs = {});

  /// Appends block with id == size(). Pointers must be nonempty, distinct
  /// and refer to existing blocks.
  BlockId add_block(std::optional<MinerIndex> owner,
                    std::vector<BlockId> pointers, std::vector<TxIndex> txs);

  std::size_t size() const { return blocks_.size(); }
  bool contains(BlockId b) const { return b < blocks_.size(); }
  const Block &block(BlockId b) const;
  const std::vector<BlockId> &children(BlockId b) const;

  /// Cached shortest-path distance to genesis.
  std::uint32_t depth(BlockId b) const;
  /// Cached |closure({b})| - 1.
  std::uint32_t weight(BlockId b) const;

  /// Every block, as a view.
  NodeSet all() const;

  const std::vector<Block> &blocks() const { return blocks_; }

private:
  void check(BlockId b) const;

  std::vector<Block> blocks_;
  std::vector<std::vector<BlockId>> children_;
  std::vector<std::uint32_t> depth_;
  std::vector<std::uint32_t> weight_;
};

enum class TxKind : std::uint8_t { reward, regular };

/// A transaction's identity: creation turn plus a serial within the turn.
/// The reward transaction of turn t is (t, 0); regular transactions of a
/// turn get serials 1, 2, ... in creation order.
struct TxId {
  Turn turn = 0;
  std::uint32_t serial = 0;
  TxKind kind = TxKind::reward;

  friend bool operator==(const TxId &, const TxId &) = default;
  friend auto operator<=>(const TxId &a, const TxId &b) {
    if (auto c = a.turn <=> b.turn; c != 0) return c;
    return a.serial <=> b.serial;
  }
};

std::string to_string(const TxId &id);

struct Transaction {
  TxId id;
  std::vector<TxIndex> deps; // ascending, distinct
};

/// Append-only transaction graph. Transactions are stored densely in
/// creation order, so every dependency has a smaller index than its
/// dependent and the graph is dependency-closed by construction.
class TxGraph {
public:
  TxGraph() = default;

  TxIndex add_reward(Turn turn);
  TxIndex add_regular(Turn turn, std::vector<TxIndex> deps);

  std::size_t size() const { return txs_.size(); }
  bool contains(TxIndex i) const { return i < txs_.size(); }
  const Transaction &tx(TxIndex i) const;
  std::optional<TxIndex> find(const TxId &id) const;
  bool is_reward(TxIndex i) const { return tx(i).id.kind == TxKind::reward; }

  const std::vector<Transaction> &transactions() const { return txs_; }

private:
  std::vector<Transaction> txs_;
  std::map<std::pair<Turn, std::uint32_t>, TxIndex> index_;
  std::map<Turn, std::uint32_t> next_serial_;
};

// --- closure ---------------------------------------------------------------

/// All blocks reachable from seeds by following pointers, seeds included.
NodeSet closure(const BlockDag &dag, std::span<const BlockId> seeds);
NodeSet closure(const BlockDag &dag, const NodeSet &seeds);

/// All transactions reachable from seeds by following dependencies.
NodeSet closure(const TxGraph &txs, std::span<const TxIndex> seeds);
NodeSet closure(const TxGraph &txs, const NodeSet &seeds);

/// Tx(A): union of carried transactions over the blocks of a view.
NodeSet carried_transactions(const BlockDag &dag, const NodeSet &view);

// --- scoring and extraction --------------------------------------------------

/// Blocks of the view that no other block of the view points to.
std::vector<BlockId> leaves(const BlockDag &dag, const NodeSet &view);
std::vector<BlockId> leaves(const BlockDag &dag);

std::uint32_t depth(const BlockDag &dag, BlockId b);
std::uint32_t weight(const BlockDag &dag, BlockId b);
double score(const BlockDag &dag, BlockId b, const ScoreParams &p);

/// Leaves ordered by score descending then id ascending, truncated to k.
/// The view must be ancestor-closed and contain genesis.
std::vector<BlockId> top_k_leaves(const BlockDag &dag, const NodeSet &view,
                                  const ScoreParams &p, PointerLimit k);
std::vector<BlockId> top_k_leaves(const BlockDag &dag, const ScoreParams &p,
                                  PointerLimit k);

/// VB: closure of the top-k leaves. Always contains genesis.
NodeSet valid_blocks(const BlockDag &dag, const NodeSet &view,
                     const ScoreParams &p, PointerLimit k);
NodeSet valid_blocks(const BlockDag &dag, const ScoreParams &p, PointerLimit k);

/// PVT: Tx(VB). Throws ConsistencyError if a carried tx is not in `txs`.
NodeSet present_valid_transactions(const BlockDag &dag, const TxGraph &txs,
                                   const NodeSet &view, const ScoreParams &p,
                                   PointerLimit k);
NodeSet present_valid_transactions(const BlockDag &dag, const TxGraph &txs,
                                   const ScoreParams &p, PointerLimit k);

} // namespace dagledger
