// Copyright polystore contributors. Licensed under the terms of the Apache 2.0
// license. See LICENSE in the project root.

#include "polystore/version.hpp"

#include <algorithm>
#include <cstring>
#include <tuple>

#include "polystore/errors.hpp"

namespace polystore {

namespace {

bool canonical_less(const VersionedValue& a, const VersionedValue& b) {
  return std::tie(a.clock, a.tombstone, a.value) <
         std::tie(b.clock, b.tombstone, b.value);
}

void append_u32(std::string& out, std::uint32_t v) {
  for (int i = 0; i < 4; ++i) out.push_back(static_cast<char>((v >> (8 * i)) & 0xff));
}

std::uint32_t read_u32(std::string_view bytes, std::size_t& pos) {
  if (pos + 4 > bytes.size()) throw Error("truncated version chain");
  std::uint32_t v = 0;
  for (int i = 0; i < 4; ++i) {
    v |= static_cast<std::uint32_t>(static_cast<unsigned char>(bytes[pos + i])) << (8 * i);
  }
  pos += 4;
  return v;
}

std::string_view read_blob(std::string_view bytes, std::size_t& pos) {
  std::uint32_t len = read_u32(bytes, pos);
  if (pos + len > bytes.size()) throw Error("truncated version chain");
  std::string_view out = bytes.substr(pos, len);
  pos += len;
  return out;
}

}  // namespace

std::vector<VersionedValue> resolve_siblings(std::vector<VersionedValue> versions) {
  if (versions.empty()) throw EmptyInput("resolve_siblings on empty input");
  std::sort(versions.begin(), versions.end(), canonical_less);
  versions.erase(std::unique(versions.begin(), versions.end(),
                             [](const VersionedValue& a, const VersionedValue& b) {
                               return a.clock == b.clock;
                             }),
                 versions.end());
  std::vector<VersionedValue> out;
  for (std::size_t i = 0; i < versions.size(); ++i) {
    bool dominated = false;
    for (std::size_t j = 0; j < versions.size() && !dominated; ++j) {
      if (i != j && vc_compare(versions[i].clock, versions[j].clock) == ClockOrder::Before) {
        dominated = true;
      }
    }
    if (!dominated) out.push_back(versions[i]);
  }
  return out;
}

ChainPutResult VersionChain::put(const VectorClock& expected_clock,
                                 std::string value, const NodeId& writer_node,
                                 bool tombstone) {
  for (const VersionedValue& sibling : siblings()) {
    if (!vc_dominates_or_equals(expected_clock, sibling.clock)) {
      return {PutStatus::StaleWrite, context()};
    }
  }
  VersionedValue next{tombstone ? std::string() : std::move(value),
                      vc_increment(expected_clock, writer_node), tombstone};
  VectorClock stored = next.clock;
  versions_.push_back(std::move(next));
  prune();
  return {PutStatus::Ok, std::move(stored)};
}

bool VersionChain::absorb(const VersionedValue& version) {
  for (const VersionedValue& existing : versions_) {
    ClockOrder o = vc_compare(version.clock, existing.clock);
    if (o == ClockOrder::Equal || o == ClockOrder::Before) return false;
  }
  versions_.push_back(version);
  prune();
  return true;
}

std::vector<VersionedValue> VersionChain::siblings() const {
  if (versions_.empty()) return {};
  return resolve_siblings(versions_);
}

VectorClock VersionChain::context() const {
  VectorClock out;
  for (const VersionedValue& v : versions_) out = vc_merge(out, v.clock);
  return out;
}

void VersionChain::prune() {
  if (versions_.size() <= retention_limit_) return;
  // Live siblings are never dropped; the remaining budget keeps the newest
  // dominated history. A sibling fan-out wider than the limit is kept whole
  // so no acknowledged head is ever lost.
  std::vector<VersionedValue> live = siblings();
  std::size_t budget =
      retention_limit_ > live.size() ? retention_limit_ - live.size() : 0;
  std::vector<VersionedValue> kept;
  for (auto it = versions_.rbegin(); it != versions_.rend(); ++it) {
    bool is_live = std::find(live.begin(), live.end(), *it) != live.end();
    if (is_live) {
      kept.push_back(*it);
    } else if (budget > 0) {
      kept.push_back(*it);
      --budget;
    }
  }
  std::reverse(kept.begin(), kept.end());
  versions_ = std::move(kept);
}

std::string VersionChain::serialize() const {
  std::string out;
  append_u32(out, static_cast<std::uint32_t>(versions_.size()));
  for (const VersionedValue& v : versions_) {
    std::string clock = v.clock.encode();
    append_u32(out, static_cast<std::uint32_t>(clock.size()));
    out += clock;
    append_u32(out, static_cast<std::uint32_t>(v.value.size()));
    out += v.value;
    out.push_back(v.tombstone ? 1 : 0);
  }
  return out;
}

VersionChain VersionChain::deserialize(std::string_view bytes,
                                       std::size_t retention_limit) {
  VersionChain chain(retention_limit);
  std::size_t pos = 0;
  std::uint32_t count = read_u32(bytes, pos);
  for (std::uint32_t i = 0; i < count; ++i) {
    VersionedValue v;
    v.clock = VectorClock::parse(read_blob(bytes, pos));
    v.value = std::string(read_blob(bytes, pos));
    if (pos >= bytes.size()) throw Error("truncated version chain");
    v.tombstone = bytes[pos++] != 0;
    chain.versions_.push_back(std::move(v));
  }
  return chain;
}

}  // namespace polystore
