#pragma once

#include <cstddef>
#include <cstdint>
#include <vector>

namespace dagledger {

/// Dense membership set over node indices [0, size). Grows on insert.
///
/// Block and transaction ids are dense, so every subgraph the simulator
/// handles (visible DAGs, closures, valid sub-DAGs) is one of these.
class NodeSet {
public:
  NodeSet() = default;
  explicit NodeSet(std::size_t universe) : bits_(universe, false) {}

  bool contains(std::size_t id) const { return id < bits_.size() && bits_[id]; }

  /// Returns true if the id was newly inserted.
  bool insert(std::size_t id) {
    if (id >= bits_.size()) bits_.resize(id + 1, false);
    if (bits_[id]) return false;
    bits_[id] = true;
    ++count_;
    return true;
  }

  bool erase(std::size_t id) {
    if (!contains(id)) return false;
    bits_[id] = false;
    --count_;
    return true;
  }

  void clear() {
    bits_.assign(bits_.size(), false);
    count_ = 0;
  }

  std::size_t size() const { return count_; }
  bool empty() const { return count_ == 0; }
  std::size_t universe() const { return bits_.size(); }

  /// Members in ascending order.
  std::vector<std::uint32_t> members() const {
    std::vector<std::uint32_t> out;
    out.reserve(count_);
    for (std::size_t i = 0; i < bits_.size(); ++i)
      if (bits_[i]) out.push_back(static_cast<std::uint32_t>(i));
    return out;
  }

  template <typename F> void for_each(F &&f) const {
    for (std::size_t i = 0; i < bits_.size(); ++i)
      if (bits_[i]) f(static_cast<std::uint32_t>(i));
  }

  bool is_subset_of(const NodeSet &other) const {
    for (std::size_t i = 0; i < bits_.size(); ++i)
      if (bits_[i] && !other.contains(i)) return false;
    return true;
  }

  friend bool operator==(const NodeSet &a, const NodeSet &b) {
    if (a.count_ != b.count_) return false;
    return a.is_subset_of(b);
  }

private:
  std::vector<bool> bits_;
  std::size_t count_ = 0;
};

} // namespace dagledger
