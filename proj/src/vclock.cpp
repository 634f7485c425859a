// Copyright polystore contributors. Licensed under the terms of the Apache 2.0
// license. See LICENSE in the project root.

#include "polystore/vclock.hpp"

#include <charconv>

#include "polystore/errors.hpp"

namespace polystore {

std::string VectorClock::encode() const {
  std::string out;
  for (const auto& [node, counter] : entries_) {
    if (!out.empty()) out.push_back(',');
    out += node;
    out.push_back(':');
    out += std::to_string(counter);
  }
  return out;
}

VectorClock VectorClock::parse(std::string_view text) {
  VectorClock out;
  std::size_t pos = 0;
  while (pos < text.size()) {
    std::size_t comma = text.find(',', pos);
    std::string_view item = text.substr(
        pos, comma == std::string_view::npos ? std::string_view::npos : comma - pos);
    std::size_t colon = item.rfind(':');
    if (colon == std::string_view::npos) {
      throw Error("malformed clock entry: " + std::string(item));
    }
    std::uint64_t counter = 0;
    const char* first = item.data() + colon + 1;
    const char* last = item.data() + item.size();
    auto [ptr, ec] = std::from_chars(first, last, counter);
    if (ec != std::errc() || ptr != last) {
      throw Error("malformed clock counter: " + std::string(item));
    }
    out.set(std::string(item.substr(0, colon)), counter);
    if (comma == std::string_view::npos) break;
    pos = comma + 1;
  }
  return out;
}

ClockOrder vc_compare(const VectorClock& a, const VectorClock& b) {
  bool a_exceeds = false;  // some counter of a > b
  bool b_exceeds = false;
  for (const auto& [node, counter] : a.entries()) {
    if (counter > b.counter_for(node)) a_exceeds = true;
  }
  for (const auto& [node, counter] : b.entries()) {
    if (counter > a.counter_for(node)) b_exceeds = true;
  }
  if (a_exceeds && b_exceeds) return ClockOrder::Concurrent;
  if (a_exceeds) return ClockOrder::After;
  if (b_exceeds) return ClockOrder::Before;
  return ClockOrder::Equal;
}

}  // namespace polystore
