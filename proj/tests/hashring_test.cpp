// Copyright polystore contributors. Licensed under the terms of the Apache 2.0
// license. See LICENSE in the project root.

#include "polystore/hashring.hpp"

#include <algorithm>
#include <map>
#include <random>
#include <set>
#include <sstream>
#include <vector>

#include "doctest.h"
#include "polystore/errors.hpp"

using namespace polystore;

namespace {

std::vector<PhysicalNode> equal_nodes(int count) {
  std::vector<PhysicalNode> nodes;
  for (int i = 0; i < count; ++i) {
    nodes.push_back({"n" + std::string(1, static_cast<char>('a' + i)), 1});
  }
  return nodes;
}

std::vector<std::uint32_t> sorted_counts(const RingState& ring) {
  std::vector<std::uint32_t> counts;
  for (const auto& [node, count] : ring.partition_counts()) counts.push_back(count);
  std::sort(counts.begin(), counts.end(), std::greater<>());
  return counts;
}

std::vector<std::string> sample_keys(int count, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::vector<std::string> keys;
  for (int i = 0; i < count; ++i) {
    keys.push_back("key-" + std::to_string(rng()));
  }
  return keys;
}

}  // namespace

TEST_CASE("64 partitions over 3 equal nodes split 22/21/21") {
  RingState ring = build_ring(equal_nodes(3));
  auto counts = ring.partition_counts();
  CHECK(counts["na"] == 22);
  CHECK(counts["nb"] == 21);
  CHECK(counts["nc"] == 21);
}

TEST_CASE("single node owns all partitions") {
  RingState ring = build_ring(equal_nodes(1));
  CHECK(ring.partition_counts()["na"] == 64);
}

TEST_CASE("22 partitions deal onto 3 vnodes as 8/7/7") {
  RingState ring = build_ring(equal_nodes(3));
  REQUIRE(ring.partition_counts()["na"] == 22);
  auto vnodes = ring.vnode_counts("na");
  REQUIRE(vnodes.size() == 3);
  std::vector<std::uint32_t> counts;
  for (const auto& [vnode, count] : vnodes) counts.push_back(count);
  std::sort(counts.begin(), counts.end(), std::greater<>());
  CHECK(counts == std::vector<std::uint32_t>{8, 7, 7});
}

TEST_CASE("build_ring rejects empty and duplicate input") {
  CHECK_THROWS_AS(build_ring({}), EmptyNodeSet);
  CHECK_THROWS_AS(build_ring({{"x", 1}, {"x", 1}}), DuplicateNodeId);
}

TEST_CASE("build_ring is deterministic and input-order independent") {
  auto nodes = equal_nodes(5);
  RingState a = build_ring(nodes);
  std::reverse(nodes.begin(), nodes.end());
  RingState b = build_ring(nodes);
  CHECK(a.same_assignment(b));
  for (std::uint32_t p = 0; p < a.partition_count(); ++p) {
    CHECK(a.vnode_of(p) == b.vnode_of(p));
  }
}

TEST_CASE("balance within one partition for equal weights") {
  for (std::uint32_t partitions : {8u, 64u, 256u}) {
    RingConfig config;
    config.partition_count = partitions;
    for (int n = 1; n <= 16; ++n) {
      RingState ring = build_ring(equal_nodes(n), config);
      auto counts = sorted_counts(ring);
      CHECK(counts.front() - counts.back() <= 1);
    }
  }
}

TEST_CASE("capacity weights scale ownership") {
  RingState ring = build_ring({{"big", 3}, {"small", 1}});
  auto counts = ring.partition_counts();
  CHECK(counts["big"] == 48);
  CHECK(counts["small"] == 16);
  // Vnode count follows weight.
  CHECK(ring.vnode_counts("big").size() == 9);
  CHECK(ring.vnode_counts("small").size() == 3);
}

TEST_CASE("lookup is deterministic and in range") {
  RingState ring = build_ring(equal_nodes(3));
  for (const std::string& key : sample_keys(100, 3)) {
    std::uint32_t p = lookup_partition(key, ring);
    CHECK(p == lookup_partition(key, ring));
    CHECK(p < ring.partition_count());
  }
}

TEST_CASE("a digest exactly on a partition boundary belongs to that partition") {
  RingConfig config;
  RingDigest digest{};  // all zero: the start of partition 0
  CHECK(partition_of_digest(digest, config) == 0);
  // Start boundary of partition 5 of 64: top six bits = 5.
  digest[0] = static_cast<std::uint8_t>(5u << 2);
  CHECK(partition_of_digest(digest, config) == 5);
  // One below the boundary still lands in partition 4.
  RingDigest below{};
  below[0] = static_cast<std::uint8_t>(5u << 2) - 1;
  for (std::size_t i = 1; i < below.size(); ++i) below[i] = 0xff;
  CHECK(partition_of_digest(below, config) == 4);
}

TEST_CASE("10000 random keys spread within 40 percent of fair share") {
  RingState ring = build_ring(equal_nodes(3));
  std::map<std::uint32_t, int> histogram;
  for (const std::string& key : sample_keys(10000, 5)) {
    ++histogram[lookup_partition(key, ring)];
  }
  double fair = 10000.0 / 64.0;
  for (std::uint32_t p = 0; p < 64; ++p) {
    CHECK(histogram[p] >= fair * 0.6);
    CHECK(histogram[p] <= fair * 1.4);
  }
}

TEST_CASE("preference list starts at the owner and walks distinct successors") {
  RingState ring = build_ring({{"A", 1}, {"B", 1}, {"D", 1}});
  // Any key owned by D must replicate next onto A: the interleaved layout
  // places A immediately clockwise of every D partition.
  bool saw_d_primary = false;
  for (const std::string& key : sample_keys(200, 7)) {
    std::uint32_t p = lookup_partition(key, ring);
    if (ring.owner_of(p) != "D") continue;
    saw_d_primary = true;
    PreferenceList prefs = preference_list(key, ring, 2);
    REQUIRE(prefs.nodes.size() == 2);
    CHECK(prefs.nodes[0] == "D");
    CHECK(prefs.nodes[1] == "A");
    CHECK_FALSE(prefs.shortfall);
  }
  CHECK(saw_d_primary);
}

TEST_CASE("replicas=1 returns the primary owner only") {
  RingState ring = build_ring(equal_nodes(3));
  PreferenceList prefs = preference_list("some-key", ring, 1);
  REQUIRE(prefs.nodes.size() == 1);
  CHECK(prefs.nodes[0] == ring.owner_of(lookup_partition("some-key", ring)));
}

TEST_CASE("asking five replicas of three nodes flags the shortfall") {
  RingState ring = build_ring(equal_nodes(3));
  PreferenceList prefs = preference_list("k", ring, 5);
  CHECK(prefs.nodes.size() == 3);
  CHECK(prefs.shortfall);
  std::set<NodeId> distinct(prefs.nodes.begin(), prefs.nodes.end());
  CHECK(distinct.size() == prefs.nodes.size());
}

TEST_CASE("preference lists never repeat a physical node") {
  RingState ring = build_ring(equal_nodes(5));
  for (const std::string& key : sample_keys(300, 11)) {
    for (std::size_t replicas : {1u, 2u, 3u, 5u}) {
      PreferenceList prefs = preference_list(key, ring, replicas);
      std::set<NodeId> distinct(prefs.nodes.begin(), prefs.nodes.end());
      CHECK(distinct.size() == prefs.nodes.size());
    }
  }
}

TEST_CASE("adding a node moves partitions only onto it") {
  RingState ring = build_ring({{"A", 1}, {"B", 1}});
  auto [after, moved] = add_node(ring, {"D", 1});
  CHECK(after.epoch() == ring.epoch() + 1);
  CHECK_FALSE(moved.empty());
  for (std::uint32_t p = 0; p < ring.partition_count(); ++p) {
    if (moved.count(p)) {
      CHECK(after.owner_of(p) == "D");
      CHECK(ring.owner_of(p) != "D");
    } else {
      CHECK(after.owner_of(p) == ring.owner_of(p));
    }
  }
  CHECK_THROWS_AS(add_node(after, {"D", 1}), DuplicateNodeId);
}

TEST_CASE("adding to a one-node ring moves half the partitions") {
  RingState ring = build_ring({{"A", 1}});
  auto [after, moved] = add_node(ring, {"B", 1});
  // Brute-force ownership diff froze this count: the canonical two-node
  // layout hands every other partition to the newcomer.
  CHECK(moved.size() == 32);
  auto counts = after.partition_counts();
  CHECK(counts["A"] == 32);
  CHECK(counts["B"] == 32);
}

TEST_CASE("single join keeps equal-weight balance within one") {
  for (int n = 1; n <= 15; ++n) {
    RingState ring = build_ring(equal_nodes(n));
    auto [after, moved] = add_node(ring, {"zz", 1});
    auto counts = sorted_counts(after);
    CHECK(counts.front() - counts.back() <= 1);
  }
}

TEST_CASE("removing a node moves exactly its partitions to successors") {
  RingState ring = build_ring({{"A", 1}, {"B", 1}, {"C", 1}});
  auto owned_by_c = ring.partitions_of("C");
  auto [after, moved] = remove_node(ring, "C");
  CHECK(after.epoch() == ring.epoch() + 1);
  CHECK(std::vector<std::uint32_t>(moved.begin(), moved.end()) == owned_by_c);
  for (std::uint32_t p = 0; p < ring.partition_count(); ++p) {
    if (ring.owner_of(p) != "C") {
      CHECK(after.owner_of(p) == ring.owner_of(p));
    } else {
      // Clockwise successor's physical node inherits.
      std::uint32_t q = p;
      do {
        q = (q + 1) % ring.partition_count();
      } while (ring.owner_of(q) == "C");
      CHECK(after.owner_of(p) == ring.owner_of(q));
    }
  }
}

TEST_CASE("remove then re-add restores the original ownership") {
  RingState ring = build_ring(equal_nodes(4));
  auto [without, moved_out] = remove_node(ring, "nc");
  auto [restored, moved_in] = add_node(without, {"nc", 1});
  CHECK(restored.same_assignment(ring));
  CHECK(moved_in == moved_out);
  CHECK(restored.epoch() == ring.epoch() + 2);
}

TEST_CASE("remove errors") {
  RingState ring = build_ring(equal_nodes(2));
  CHECK_THROWS_AS(remove_node(ring, "nope"), UnknownNode);
  auto [only, moved] = remove_node(ring, "nb");
  CHECK_THROWS_AS(remove_node(only, "na"), LastNode);
}

TEST_CASE("minimal movement: key ownership diff equals moved partitions") {
  auto keys = sample_keys(1000, 13);
  for (int n = 2; n <= 8; ++n) {
    RingState ring = build_ring(equal_nodes(n));

    auto owner_of_key = [](const RingState& r, const std::string& key) {
      return r.owner_of(lookup_partition(key, r));
    };

    {
      auto [joined, moved] = add_node(ring, {"new", 1});
      for (const std::string& key : keys) {
        std::uint32_t p = lookup_partition(key, ring);
        bool changed = owner_of_key(ring, key) != owner_of_key(joined, key);
        CHECK(changed == (moved.count(p) > 0));
      }
      auto [left, moved_back] = remove_node(joined, ring.members()[0].id);
      for (const std::string& key : keys) {
        std::uint32_t p = lookup_partition(key, joined);
        bool changed = owner_of_key(joined, key) != owner_of_key(left, key);
        CHECK(changed == (moved_back.count(p) > 0));
      }
    }
  }
}

TEST_CASE("modulo sharding arithmetic") {
  CHECK(modulo_shard(23, 10) == 3);
  CHECK(modulo_shard(10, 10) == 0);
  CHECK_THROWS_AS(modulo_shard(1, 0), ZeroShards);
  std::map<std::uint64_t, int> histogram;
  for (std::uint64_t key = 0; key < 10000; ++key) ++histogram[modulo_shard(key, 10)];
  for (int shard = 0; shard < 10; ++shard) CHECK(histogram[shard] == 1000);
}

TEST_CASE("modulo resharding churns more than half the keys") {
  int moved = 0;
  for (std::uint64_t key = 0; key < 10000; ++key) {
    if (modulo_shard(key, 10) != modulo_shard(key, 11)) ++moved;
  }
  CHECK(moved > 5000);
}

TEST_CASE("ring dump emits one line per partition") {
  RingState ring = build_ring(equal_nodes(3));
  std::ostringstream out;
  ring.dump(out);
  std::istringstream in(out.str());
  std::string line;
  std::uint32_t lines = 0;
  while (std::getline(in, line)) {
    std::istringstream fields(line);
    std::uint32_t partition, vnode;
    std::string node;
    fields >> partition >> vnode >> node;
    CHECK(partition == lines);
    CHECK(node == ring.owner_of(partition));
    CHECK(vnode == ring.vnode_of(partition));
    ++lines;
  }
  CHECK(lines == 64);
}
