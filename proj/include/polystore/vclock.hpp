// Copyright polystore contributors. Licensed under the terms of the Apache 2.0
// license. See LICENSE in the project root.

#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <string_view>

namespace polystore {

using NodeId = std::string;

enum class ClockOrder { Equal, Before, After, Concurrent };

// Per-node counters forming a partial order over versions. Canonical form
// stores no zero entries; an absent node id means counter 0.
class VectorClock {
 public:
  VectorClock() = default;

  static VectorClock of(std::initializer_list<std::pair<NodeId, std::uint64_t>> init) {
    VectorClock c;
    for (const auto& [node, counter] : init) c.set(node, counter);
    return c;
  }

  std::uint64_t counter_for(const NodeId& node) const {
    auto it = entries_.find(node);
    return it == entries_.end() ? 0 : it->second;
  }

  void set(const NodeId& node, std::uint64_t counter) {
    if (counter == 0) {
      entries_.erase(node);
    } else {
      entries_[node] = counter;
    }
  }

  VectorClock incremented(const NodeId& node) const {
    VectorClock out = *this;
    out.set(node, out.counter_for(node) + 1);
    return out;
  }

  static VectorClock merge(const VectorClock& a, const VectorClock& b) {
    VectorClock out = a;
    for (const auto& [node, counter] : b.entries_) {
      if (counter > out.counter_for(node)) out.set(node, counter);
    }
    return out;
  }

  bool empty() const { return entries_.empty(); }
  std::size_t size() const { return entries_.size(); }
  const std::map<NodeId, std::uint64_t>& entries() const { return entries_; }

  // Canonical wire form: entries sorted by node id, "node:counter" joined
  // with commas. The empty clock encodes as the empty string.
  std::string encode() const;
  static VectorClock parse(std::string_view text);

  bool operator==(const VectorClock& other) const {
    return entries_ == other.entries_;
  }
  bool operator!=(const VectorClock& other) const { return !(*this == other); }

  // Canonical-encoding order; used only for deterministic tie-breaks.
  bool operator<(const VectorClock& other) const {
    return encode() < other.encode();
  }

 private:
  std::map<NodeId, std::uint64_t> entries_;
};

ClockOrder vc_compare(const VectorClock& a, const VectorClock& b);

inline VectorClock vc_merge(const VectorClock& a, const VectorClock& b) {
  return VectorClock::merge(a, b);
}

inline VectorClock vc_increment(const VectorClock& clock, const NodeId& node) {
  return clock.incremented(node);
}

// a >= b in the partial order (Equal or After).
inline bool vc_dominates_or_equals(const VectorClock& a, const VectorClock& b) {
  ClockOrder o = vc_compare(a, b);
  return o == ClockOrder::Equal || o == ClockOrder::After;
}

}  // namespace polystore
