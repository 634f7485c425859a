// Copyright polystore contributors. Licensed under the terms of the Apache 2.0
// license. See LICENSE in the project root.

#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "polystore/vclock.hpp"

namespace polystore {

// The replicated unit: opaque value bytes plus the clock that produced them.
// Tombstones carry an empty payload and take part in sibling resolution like
// ordinary versions; a tombstone dominating all siblings makes the key absent.
struct VersionedValue {
  std::string value;
  VectorClock clock;
  bool tombstone = false;

  static VersionedValue deletion(VectorClock clock) {
    return VersionedValue{std::string(), std::move(clock), true};
  }

  bool operator==(const VersionedValue& other) const {
    return value == other.value && clock == other.clock &&
           tombstone == other.tombstone;
  }
};

// Drops every version dominated by another and returns the surviving
// antichain sorted by canonical clock encoding. Versions with identical
// clocks collapse to one survivor (ties broken by tombstone flag, then value).
std::vector<VersionedValue> resolve_siblings(std::vector<VersionedValue> versions);

enum class PutStatus { Ok, StaleWrite };

struct ChainPutResult {
  PutStatus status = PutStatus::Ok;
  VectorClock clock;  // clock of the stored version on Ok
};

// Multi-version history of one key, newest last, pruned to retention_limit.
class VersionChain {
 public:
  explicit VersionChain(std::size_t retention_limit = kDefaultRetention)
      : retention_limit_(retention_limit) {}

  // Writer declares the clock it read. The write succeeds only when that
  // clock still dominates-or-equals every live sibling; otherwise the writer
  // must re-read. On success the new version's clock is the expected clock
  // incremented at writer_node.
  ChainPutResult put(const VectorClock& expected_clock, std::string value,
                     const NodeId& writer_node, bool tombstone = false);

  // Merges a replicated version into the chain without the stale check:
  // keeps it unless dominated by an existing version, drops existing
  // versions it dominates. Returns true when the chain changed.
  bool absorb(const VersionedValue& version);

  // Live concurrent versions (the antichain the next read returns).
  std::vector<VersionedValue> siblings() const;

  // Pointwise max over sibling clocks; a write with this clock as the
  // expected clock supersedes all current siblings.
  VectorClock context() const;

  bool empty() const { return versions_.empty(); }
  std::size_t size() const { return versions_.size(); }
  const std::vector<VersionedValue>& versions() const { return versions_; }
  std::size_t retention_limit() const { return retention_limit_; }

  std::string serialize() const;
  static VersionChain deserialize(std::string_view bytes,
                                  std::size_t retention_limit = kDefaultRetention);

  bool operator==(const VersionChain& other) const {
    return versions_ == other.versions_;
  }

  static constexpr std::size_t kDefaultRetention = 10;

 private:
  void prune();

  std::vector<VersionedValue> versions_;
  std::size_t retention_limit_;
};

// Single-counter alternative: one clock per data block.
struct OptimisticLock {
  std::uint64_t version = 0;
};

struct OptimisticPutResult {
  PutStatus status = PutStatus::Ok;
  std::uint64_t version = 0;
};

inline OptimisticPutResult optimistic_put(OptimisticLock& lock,
                                          std::uint64_t expected_version) {
  if (expected_version != lock.version) {
    return {PutStatus::StaleWrite, lock.version};
  }
  ++lock.version;
  return {PutStatus::Ok, lock.version};
}

}  // namespace polystore
