#include "dagledger/dag.hpp"

#include "dagledger/errors.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <limits>

namespace dagledger {

// --- PointerLimit ------------------------------------------------------------

PointerLimit PointerLimit::finite(std::uint32_t k) {
  if (k == 0) throw ConfigError("pointer limit k must be >= 1");
  PointerLimit p;
  p.k_ = k;
  return p;
}

PointerLimit PointerLimit::parse(std::string_view text) {
  if (text == "inf" || text == "infinity" || text == "∞") return unbounded();
  std::uint32_t k = 0;
  const auto *end = text.data() + text.size();
  const auto [ptr, ec] = std::from_chars(text.data(), end, k);
  if (ec != std::errc{} || ptr != end)
    throw ConfigError("invalid pointer limit '" + std::string(text) +
                      "': expected a positive integer or 'inf'");
  return finite(k);
}

std::uint32_t PointerLimit::value() const {
  if (!k_) throw std::logic_error("PointerLimit::value on unbounded limit");
  return *k_;
}

std::size_t PointerLimit::clamp(std::size_t n) const {
  return k_ ? std::min<std::size_t>(n, *k_) : n;
}

std::string PointerLimit::to_string() const {
  return k_ ? std::to_string(*k_) : std::string("inf");
}

void ScoreParams::validate() const {
  if (!(alpha >= 0.0 && alpha <= 1.0))
    throw ConfigError("score alpha must lie in [0, 1]");
}

// --- BlockDag ----------------------------------------------------------------

BlockDag::BlockDag(std::vector<TxIndex> genesis_txs) {
  std::sort(genesis_txs.begin(), genesis_txs.end());
  genesis_txs.erase(std::unique(genesis_txs.begin(), genesis_txs.end()),
                    genesis_txs.end());
  blocks_.push_back(Block{kGenesis, std::nullopt, {}, std::move(genesis_txs)});
  children_.emplace_back();
  depth_.push_back(0);
  weight_.push_back(0);
}

BlockId BlockDag::add_block(std::optional<MinerIndex> owner,
                            std::vector<BlockId> pointers,
                            std::vector<TxIndex> txs) {
  if (pointers.empty()) throw InputError("non-genesis block needs at least one pointer");
  std::sort(pointers.begin(), pointers.end());
  if (std::adjacent_find(pointers.begin(), pointers.end()) != pointers.end())
    throw InputError("duplicate block pointer");
  for (BlockId p : pointers)
    if (!contains(p)) throw InputError("pointer to unknown block " + std::to_string(p));
  std::sort(txs.begin(), txs.end());
  txs.erase(std::unique(txs.begin(), txs.end()), txs.end());

  const auto id = static_cast<BlockId>(blocks_.size());
  std::uint32_t d = std::numeric_limits<std::uint32_t>::max();
  for (BlockId p : pointers) {
    d = std::min(d, depth_[p] + 1);
    children_[p].push_back(id);
  }
  const NodeSet past = closure(*this, std::span<const BlockId>(pointers));

  blocks_.push_back(Block{id, owner, std::move(pointers), std::move(txs)});
  children_.emplace_back();
  depth_.push_back(d);
  weight_.push_back(static_cast<std::uint32_t>(past.size()));
  return id;
}

void BlockDag::check(BlockId b) const {
  if (!contains(b)) throw InputError("unknown block " + std::to_string(b));
}

const Block &BlockDag::block(BlockId b) const {
  check(b);
  return blocks_[b];
}

const std::vector<BlockId> &BlockDag::children(BlockId b) const {
  check(b);
  return children_[b];
}

std::uint32_t BlockDag::depth(BlockId b) const {
  check(b);
  return depth_[b];
}

std::uint32_t BlockDag::weight(BlockId b) const {
  check(b);
  return weight_[b];
}

NodeSet BlockDag::all() const {
  NodeSet s(size());
  for (BlockId b = 0; b < size(); ++b) s.insert(b);
  return s;
}

// --- TxGraph -----------------------------------------------------------------

std::string to_string(const TxId &id) {
  return (id.kind == TxKind::reward ? "tx*" : "tx") + std::to_string(id.turn) +
         "." + std::to_string(id.serial);
}

TxIndex TxGraph::add_reward(Turn turn) {
  if (index_.contains({turn, 0}))
    throw InputError("reward transaction for turn " + std::to_string(turn) +
                     " already exists");
  const auto idx = static_cast<TxIndex>(txs_.size());
  txs_.push_back(Transaction{TxId{turn, 0, TxKind::reward}, {}});
  index_.emplace(std::pair{turn, 0u}, idx);
  return idx;
}

TxIndex TxGraph::add_regular(Turn turn, std::vector<TxIndex> deps) {
  if (deps.empty()) throw InputError("regular transaction needs at least one dependency");
  std::sort(deps.begin(), deps.end());
  deps.erase(std::unique(deps.begin(), deps.end()), deps.end());
  for (TxIndex d : deps) {
    if (!contains(d)) throw InputError("dependency on unknown transaction " + std::to_string(d));
    if (txs_[d].id.turn > turn)
      throw InputError("dependency created after its dependent");
  }
  auto &serial = next_serial_[turn];
  if (serial == 0) serial = 1;
  const auto idx = static_cast<TxIndex>(txs_.size());
  txs_.push_back(Transaction{TxId{turn, serial, TxKind::regular}, std::move(deps)});
  index_.emplace(std::pair{turn, serial}, idx);
  ++serial;
  return idx;
}

const Transaction &TxGraph::tx(TxIndex i) const {
  if (!contains(i)) throw InputError("unknown transaction " + std::to_string(i));
  return txs_[i];
}

std::optional<TxIndex> TxGraph::find(const TxId &id) const {
  const auto it = index_.find({id.turn, id.serial});
  if (it == index_.end() || txs_[it->second].id.kind != id.kind) return std::nullopt;
  return it->second;
}

// --- closure -----------------------------------------------------------------

namespace {

template <typename Edges>
NodeSet reach(std::size_t universe, std::vector<std::uint32_t> stack, Edges &&edges) {
  NodeSet seen(universe);
  for (auto s : stack) seen.insert(s);
  while (!stack.empty()) {
    const auto v = stack.back();
    stack.pop_back();
    for (auto w : edges(v))
      if (seen.insert(w)) stack.push_back(w);
  }
  return seen;
}

} // namespace

NodeSet closure(const BlockDag &dag, std::span<const BlockId> seeds) {
  for (BlockId s : seeds)
    if (!dag.contains(s)) throw InputError("closure seed " + std::to_string(s) + " not in DAG");
  return reach(dag.size(), {seeds.begin(), seeds.end()},
               [&](BlockId b) -> const std::vector<BlockId> & {
                 return dag.blocks()[b].pointers;
               });
}

NodeSet closure(const BlockDag &dag, const NodeSet &seeds) {
  const auto m = seeds.members();
  return closure(dag, std::span<const BlockId>(m));
}

NodeSet closure(const TxGraph &txs, std::span<const TxIndex> seeds) {
  for (TxIndex s : seeds)
    if (!txs.contains(s)) throw InputError("closure seed " + std::to_string(s) + " not in graph");
  return reach(txs.size(), {seeds.begin(), seeds.end()},
               [&](TxIndex t) -> const std::vector<TxIndex> & {
                 return txs.transactions()[t].deps;
               });
}

NodeSet closure(const TxGraph &txs, const NodeSet &seeds) {
  const auto m = seeds.members();
  return closure(txs, std::span<const TxIndex>(m));
}

NodeSet carried_transactions(const BlockDag &dag, const NodeSet &view) {
  NodeSet out;
  view.for_each([&](BlockId b) {
    for (TxIndex t : dag.block(b).txs) out.insert(t);
  });
  return out;
}

// --- scoring -----------------------------------------------------------------

std::vector<BlockId> leaves(const BlockDag &dag, const NodeSet &view) {
  std::vector<BlockId> out;
  view.for_each([&](BlockId b) {
    const auto &kids = dag.children(b);
    const bool covered =
        std::any_of(kids.begin(), kids.end(), [&](BlockId c) { return view.contains(c); });
    if (!covered) out.push_back(b);
  });
  return out;
}

std::vector<BlockId> leaves(const BlockDag &dag) { return leaves(dag, dag.all()); }

std::uint32_t depth(const BlockDag &dag, BlockId b) { return dag.depth(b); }
std::uint32_t weight(const BlockDag &dag, BlockId b) { return dag.weight(b); }

double score(const BlockDag &dag, BlockId b, const ScoreParams &p) {
  return p.alpha * dag.depth(b) + (1.0 - p.alpha) * dag.weight(b);
}

std::vector<BlockId> top_k_leaves(const BlockDag &dag, const NodeSet &view,
                                  const ScoreParams &p, PointerLimit k) {
  struct Ranked {
    double score;
    BlockId id;
  };
  std::vector<Ranked> ranked;
  for (BlockId b : leaves(dag, view)) ranked.push_back({score(dag, b, p), b});
  std::sort(ranked.begin(), ranked.end(), [](const Ranked &a, const Ranked &b) {
    if (a.score != b.score) return a.score > b.score;
    return a.id < b.id;
  });
  ranked.resize(k.clamp(ranked.size()));
  std::vector<BlockId> out;
  out.reserve(ranked.size());
  for (const auto &r : ranked) out.push_back(r.id);
  return out;
}

std::vector<BlockId> top_k_leaves(const BlockDag &dag, const ScoreParams &p,
                                  PointerLimit k) {
  return top_k_leaves(dag, dag.all(), p, k);
}

NodeSet valid_blocks(const BlockDag &dag, const NodeSet &view, const ScoreParams &p,
                     PointerLimit k) {
  const auto top = top_k_leaves(dag, view, p, k);
  if (top.empty()) {
    NodeSet g(dag.size());
    g.insert(kGenesis);
    return g;
  }
  return closure(dag, std::span<const BlockId>(top));
}

NodeSet valid_blocks(const BlockDag &dag, const ScoreParams &p, PointerLimit k) {
  return valid_blocks(dag, dag.all(), p, k);
}

NodeSet present_valid_transactions(const BlockDag &dag, const TxGraph &txs,
                                   const NodeSet &view, const ScoreParams &p,
                                   PointerLimit k) {
  const NodeSet vb = valid_blocks(dag, view, p, k);
  NodeSet out(txs.size());
  vb.for_each([&](BlockId b) {
    for (TxIndex t : dag.blocks()[b].txs) {
      if (!txs.contains(t))
        throw ConsistencyError("block " + std::to_string(b) +
                               " carries unknown transaction " + std::to_string(t));
      out.insert(t);
    }
  });
  return out;
}

NodeSet present_valid_transactions(const BlockDag &dag, const TxGraph &txs,
                                   const ScoreParams &p, PointerLimit k) {
  return present_valid_transactions(dag, txs, dag.all(), p, k);
}

} // namespace dagledger
