// Copyright polystore contributors. Licensed under the terms of the Apache 2.0
// license. See LICENSE in the project root.

#include "polystore/hashring.hpp"

#include <openssl/evp.h>

#include <algorithm>
#include <ostream>

#include "polystore/errors.hpp"

namespace polystore {

namespace {

bool is_power_of_two(std::uint64_t v) { return v != 0 && (v & (v - 1)) == 0; }

unsigned log2_u32(std::uint32_t v) {
  unsigned bits = 0;
  while ((1u << bits) < v) ++bits;
  return bits;
}

std::vector<PhysicalNode> sorted_members(std::vector<PhysicalNode> nodes) {
  std::sort(nodes.begin(), nodes.end(),
            [](const PhysicalNode& a, const PhysicalNode& b) { return a.id < b.id; });
  return nodes;
}

// Smooth weighted round-robin over the member list. Interleaves nodes along
// the partition index order, which keeps clockwise successors on distinct
// physical nodes and gives per-node counts within one of the weighted share.
std::vector<NodeId> canonical_owners(const std::vector<PhysicalNode>& members,
                                     std::uint32_t partitions) {
  std::vector<std::int64_t> current(members.size(), 0);
  std::int64_t total = 0;
  for (const PhysicalNode& n : members) total += n.capacity_weight;
  std::vector<NodeId> owners;
  owners.reserve(partitions);
  for (std::uint32_t p = 0; p < partitions; ++p) {
    std::size_t best = 0;
    for (std::size_t i = 0; i < members.size(); ++i) {
      current[i] += members[i].capacity_weight;
      if (current[i] > current[best]) best = i;
    }
    current[best] -= total;
    owners.push_back(members[best].id);
  }
  return owners;
}

std::uint32_t vnode_count(const PhysicalNode& node, const RingConfig& config) {
  return node.capacity_weight * config.vnodes_per_unit_capacity;
}

}  // namespace

void RingConfig::validate() const {
  if (hash_space_bits < 16) throw Error("hash space must be at least 16 bits");
  if (partition_count < 1 || !is_power_of_two(partition_count)) {
    throw Error("partition count must be a power of two >= 1");
  }
  if (partition_count > (1u << 20)) throw Error("partition count too large");
  if (log2_u32(partition_count) > hash_space_bits) {
    throw Error("partition count exceeds hash space");
  }
  if (vnodes_per_unit_capacity < 1) {
    throw Error("vnodes per unit capacity must be >= 1");
  }
}

RingDigest ring_digest(std::string_view bytes) {
  RingDigest digest{};
  unsigned int len = 0;
  EVP_Digest(bytes.data(), bytes.size(), digest.data(), &len, EVP_sha1(), nullptr);
  return digest;
}

std::string ring_key(std::string_view bucket, std::string_view key) {
  std::string out;
  out.reserve(bucket.size() + 1 + key.size());
  out.append(bucket);
  out.push_back('\0');
  out.append(key);
  return out;
}

std::uint32_t partition_of_digest(const RingDigest& digest,
                                  const RingConfig& config) {
  unsigned k = log2_u32(config.partition_count);
  if (k == 0) return 0;
  std::uint64_t top = 0;
  for (int i = 0; i < 8; ++i) top = (top << 8) | digest[i];
  return static_cast<std::uint32_t>(top >> (64 - k));
}

bool RingState::has_member(const NodeId& id) const {
  return std::any_of(members_.begin(), members_.end(),
                     [&](const PhysicalNode& n) { return n.id == id; });
}

std::map<NodeId, std::uint32_t> RingState::partition_counts() const {
  std::map<NodeId, std::uint32_t> counts;
  for (const PhysicalNode& n : members_) counts[n.id] = 0;
  for (const NodeId& owner : owner_) ++counts[owner];
  return counts;
}

std::vector<std::uint32_t> RingState::partitions_of(const NodeId& id) const {
  std::vector<std::uint32_t> out;
  for (std::uint32_t p = 0; p < owner_.size(); ++p) {
    if (owner_[p] == id) out.push_back(p);
  }
  return out;
}

std::map<std::uint32_t, std::uint32_t> RingState::vnode_counts(const NodeId& id) const {
  std::map<std::uint32_t, std::uint32_t> counts;
  for (std::uint32_t p = 0; p < owner_.size(); ++p) {
    if (owner_[p] == id) ++counts[vnode_[p]];
  }
  return counts;
}

void RingState::dump(std::ostream& out) const {
  for (std::uint32_t p = 0; p < owner_.size(); ++p) {
    out << p << '\t' << vnode_[p] << '\t' << owner_[p] << '\n';
  }
}

void RingState::deal_vnodes() {
  vnode_.assign(owner_.size(), 0);
  std::map<NodeId, std::uint32_t> dealt;
  std::map<NodeId, std::uint32_t> counts;
  for (const PhysicalNode& n : members_) counts[n.id] = vnode_count(n, config_);
  for (std::uint32_t p = 0; p < owner_.size(); ++p) {
    std::uint32_t& next = dealt[owner_[p]];
    vnode_[p] = next % counts[owner_[p]];
    ++next;
  }
}

RingState build_ring(std::vector<PhysicalNode> nodes, RingConfig config) {
  config.validate();
  if (nodes.empty()) throw EmptyNodeSet();
  for (const PhysicalNode& n : nodes) {
    if (n.capacity_weight < 1) throw Error("capacity weight must be >= 1");
  }
  std::vector<PhysicalNode> members = sorted_members(std::move(nodes));
  for (std::size_t i = 1; i < members.size(); ++i) {
    if (members[i].id == members[i - 1].id) throw DuplicateNodeId(members[i].id);
  }
  RingState ring;
  ring.config_ = config;
  ring.members_ = std::move(members);
  ring.owner_ = canonical_owners(ring.members_, config.partition_count);
  ring.deal_vnodes();
  return ring;
}

std::uint32_t lookup_partition(std::string_view key, const RingState& ring) {
  return partition_of_digest(ring_digest(key), ring.config());
}

PreferenceList preference_list_for_partition(std::uint32_t partition,
                                             const RingState& ring,
                                             std::size_t replicas) {
  if (replicas < 1) throw Error("replicas must be >= 1");
  PreferenceList out;
  std::uint32_t count = ring.partition_count();
  for (std::uint32_t step = 0; step < count && out.nodes.size() < replicas; ++step) {
    const NodeId& owner = ring.owner_of((partition + step) % count);
    if (std::find(out.nodes.begin(), out.nodes.end(), owner) == out.nodes.end()) {
      out.nodes.push_back(owner);
    }
  }
  out.shortfall = out.nodes.size() < replicas;
  return out;
}

PreferenceList preference_list(std::string_view key, const RingState& ring,
                               std::size_t replicas) {
  return preference_list_for_partition(lookup_partition(key, ring), ring, replicas);
}

RingChange add_node(const RingState& ring, PhysicalNode node) {
  if (ring.has_member(node.id)) throw DuplicateNodeId(node.id);
  if (node.capacity_weight < 1) throw Error("capacity weight must be >= 1");

  RingChange change;
  change.ring = ring;
  change.ring.members_.push_back(node);
  change.ring.members_ = sorted_members(std::move(change.ring.members_));
  change.ring.epoch_ = ring.epoch_ + 1;

  // The newcomer claims exactly the partitions the canonical layout of the
  // new member set would give it; nothing moves between surviving nodes, so
  // a node re-added after a removal reclaims its original partitions.
  std::vector<NodeId> canonical =
      canonical_owners(change.ring.members_, ring.partition_count());
  for (std::uint32_t p = 0; p < canonical.size(); ++p) {
    if (canonical[p] == node.id && change.ring.owner_[p] != node.id) {
      change.ring.owner_[p] = node.id;
      change.moved.insert(p);
    }
  }
  change.ring.deal_vnodes();
  return change;
}

RingChange remove_node(const RingState& ring, const NodeId& id) {
  if (!ring.has_member(id)) throw UnknownNode(id);
  if (ring.members().size() <= 1) throw LastNode();

  RingChange change;
  change.ring = ring;
  change.ring.epoch_ = ring.epoch_ + 1;
  change.ring.members_.erase(
      std::remove_if(change.ring.members_.begin(), change.ring.members_.end(),
                     [&](const PhysicalNode& n) { return n.id == id; }),
      change.ring.members_.end());

  std::uint32_t count = ring.partition_count();
  for (std::uint32_t p = 0; p < count; ++p) {
    if (ring.owner_of(p) != id) continue;
    change.moved.insert(p);
    NodeId heir = change.ring.members_.front().id;
    for (std::uint32_t step = 1; step < count; ++step) {
      const NodeId& candidate = ring.owner_of((p + step) % count);
      if (candidate != id) {
        heir = candidate;
        break;
      }
    }
    change.ring.owner_[p] = heir;
  }
  change.ring.deal_vnodes();
  return change;
}

std::uint64_t modulo_shard(std::uint64_t primary_key, std::uint64_t shard_count) {
  if (shard_count == 0) throw ZeroShards();
  return primary_key % shard_count;
}

}  // namespace polystore
