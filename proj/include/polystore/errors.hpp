// Copyright polystore contributors. Licensed under the terms of the Apache 2.0
// license. See LICENSE in the project root.

#pragma once

#include <stdexcept>
#include <string>

namespace polystore {

// Configuration and usage errors are thrown; data-path outcomes such as
// StaleWrite or QuorumUnreachable are returned as statuses (see repl_types.hpp).
struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct EmptyNodeSet : Error {
  EmptyNodeSet() : Error("ring requires at least one node") {}
};

struct DuplicateNodeId : Error {
  explicit DuplicateNodeId(const std::string& id)
      : Error("duplicate node id: " + id) {}
};

struct UnknownNode : Error {
  explicit UnknownNode(const std::string& id) : Error("unknown node: " + id) {}
};

struct LastNode : Error {
  LastNode() : Error("cannot remove the last node of a ring") {}
};

struct ZeroShards : Error {
  ZeroShards() : Error("shard count must be >= 1") {}
};

struct EmptyInput : Error {
  explicit EmptyInput(const std::string& what) : Error(what) {}
};

struct IoFailure : Error {
  explicit IoFailure(const std::string& what) : Error(what) {}
};

struct CorruptInterior : Error {
  explicit CorruptInterior(const std::string& what) : Error(what) {}
};

struct UnknownTarget : Error {
  explicit UnknownTarget(const std::string& id)
      : Error("unknown fault target: " + id) {}
};

struct LivelockGuard : Error {
  explicit LivelockGuard(const std::string& what) : Error(what) {}
};

struct UnknownCollection : Error {
  explicit UnknownCollection(const std::string& name)
      : Error("unknown collection: " + name) {}
};

struct DuplicateId : Error {
  explicit DuplicateId(const std::string& id)
      : Error("duplicate id: " + id) {}
};

struct DuplicateName : Error {
  explicit DuplicateName(const std::string& name)
      : Error("duplicate name: " + name) {}
};

struct UnknownKeyspace : Error {
  explicit UnknownKeyspace(const std::string& name)
      : Error("unknown keyspace: " + name) {}
};

struct UnknownTable : Error {
  explicit UnknownTable(const std::string& name)
      : Error("unknown table: " + name) {}
};

struct IndexRequired : Error {
  explicit IndexRequired(const std::string& what) : Error(what) {}
};

struct DanglingEndpoint : Error {
  explicit DanglingEndpoint(const std::string& id)
      : Error("relation endpoint does not exist: " + id) {}
};

struct ScenarioError : Error {
  explicit ScenarioError(const std::string& what) : Error(what) {}
};

}  // namespace polystore
