// Copyright polystore contributors. Licensed under the terms of the Apache 2.0
// license. See LICENSE in the project root.

#pragma once

#include <array>
#include <cstdint>
#include <iosfwd>
#include <map>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include "polystore/vclock.hpp"

namespace polystore {

// Fixed-partition consistent hashing. The hash space is split into
// partition_count equal contiguous arcs; partitions are the unit of ownership
// and movement. Each physical node runs capacity_weight *
// vnodes_per_unit_capacity virtual nodes and its partitions are dealt to them
// round-robin in partition-index order.
struct RingConfig {
  unsigned hash_space_bits = 160;
  std::uint32_t partition_count = 64;  // must be a power of two
  unsigned vnodes_per_unit_capacity = 3;

  void validate() const;
};

struct PhysicalNode {
  NodeId id;
  std::uint32_t capacity_weight = 1;  // abstracts cpu/ram/storage
};

struct VnodeRef {
  NodeId node;
  std::uint32_t vnode = 0;

  bool operator==(const VnodeRef& other) const {
    return node == other.node && vnode == other.vnode;
  }
};

// Ordered distinct physical nodes responsible for a key, primary owner first.
// A ring with fewer distinct owners than requested replicas yields a
// truncated list with the shortfall flag set, never a silent short list.
struct PreferenceList {
  std::vector<NodeId> nodes;
  bool shortfall = false;
};

using RingDigest = std::array<std::uint8_t, 20>;  // 160-bit positions

RingDigest ring_digest(std::string_view bytes);

// Key for ring placement of a bucketed item: "bucket\0key".
std::string ring_key(std::string_view bucket, std::string_view key);

std::uint32_t partition_of_digest(const RingDigest& digest,
                                  const RingConfig& config);

class RingState {
 public:
  std::uint64_t epoch() const { return epoch_; }
  const RingConfig& config() const { return config_; }
  const std::vector<PhysicalNode>& members() const { return members_; }
  bool has_member(const NodeId& id) const;

  std::uint32_t partition_count() const { return config_.partition_count; }
  const NodeId& owner_of(std::uint32_t partition) const {
    return owner_[partition];
  }
  std::uint32_t vnode_of(std::uint32_t partition) const {
    return vnode_[partition];
  }

  std::map<NodeId, std::uint32_t> partition_counts() const;
  std::vector<std::uint32_t> partitions_of(const NodeId& id) const;
  std::map<std::uint32_t, std::uint32_t> vnode_counts(const NodeId& id) const;

  // Canonical text form, one line per partition:
  // partition_index<TAB>vnode_index<TAB>node_id
  void dump(std::ostream& out) const;

  bool same_assignment(const RingState& other) const {
    return owner_ == other.owner_;
  }

 private:
  friend RingState build_ring(std::vector<PhysicalNode>, RingConfig);
  friend struct RingChange;
  friend RingChange add_node(const RingState&, PhysicalNode);
  friend RingChange remove_node(const RingState&, const NodeId&);

  void deal_vnodes();

  std::uint64_t epoch_ = 1;
  RingConfig config_;
  std::vector<PhysicalNode> members_;  // sorted by node id
  std::vector<NodeId> owner_;          // physical owner per partition
  std::vector<std::uint32_t> vnode_;   // owning vnode index per partition
};

struct RingChange {
  RingState ring;
  std::set<std::uint32_t> moved;  // partitions whose physical owner changed
};

RingState build_ring(std::vector<PhysicalNode> nodes, RingConfig config = {});

std::uint32_t lookup_partition(std::string_view key, const RingState& ring);

PreferenceList preference_list(std::string_view key, const RingState& ring,
                               std::size_t replicas);
PreferenceList preference_list_for_partition(std::uint32_t partition,
                                             const RingState& ring,
                                             std::size_t replicas);

// Joins move partitions only onto the new node; leaves move exactly the
// departed node's partitions, each to its clockwise successor's owner.
RingChange add_node(const RingState& ring, PhysicalNode node);
RingChange remove_node(const RingState& ring, const NodeId& id);

// The sharding alternative: placement by primary-key modulo. Kept for the
// churn comparison; changing shard_count reshuffles most keys.
std::uint64_t modulo_shard(std::uint64_t primary_key, std::uint64_t shard_count);

}  // namespace polystore
