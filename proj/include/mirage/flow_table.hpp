#pragma once

#include <map>
#include <optional>
#include <vector>

#include "mirage/common.hpp"

namespace mirage {

enum class Direction : std::uint8_t { Forward, Reverse };

struct MatchKey {
  FlowId flow = 0;
  Direction dir = Direction::Forward;
  std::uint32_t index = 0;  // 0 matches any packet of the flow (common rule)

  friend auto operator<=>(const MatchKey&, const MatchKey&) = default;
};

struct FlowTableEntry {
  NodeId sw = kNoNode;
  MatchKey match;
  NodeId next_hop = kNoNode;
  SimTime installed_at = 0;
  SimTime hard_timeout = 0;  // 0: none
  SimTime idle_timeout = 0;  // 0: none
  SimTime last_used = 0;
  std::uint64_t generation = 0;

  bool per_packet() const { return match.index != 0; }
  /// Earliest time the entry stops matching, or nullopt if it never expires.
  std::optional<SimTime> deadline() const;
  bool expired(SimTime now) const;
};

/// One switch's table. Lookups prefer a per-packet entry over the common
/// entry; a per-packet entry is removed on its single use.
class FlowTable {
 public:
  /// Installs `e`, replacing any entry with the same match. Returns the
  /// generation stamped on the entry.
  std::uint64_t install(FlowTableEntry e);

  /// Removes every entry whose deadline is <= now; returns them.
  std::vector<FlowTableEntry> expire(SimTime now);

  /// Matches (flow, dir, index) at `now`. Expired entries are purged first
  /// and never match. A hit refreshes the idle timer.
  std::optional<FlowTableEntry> lookup(FlowId flow, Direction dir, std::uint32_t index, SimTime now);

  bool has_common(FlowId flow, Direction dir, SimTime now) const;
  const FlowTableEntry* find(const MatchKey& k) const;
  bool remove(const MatchKey& k);
  std::size_t size() const { return entries_.size(); }
  std::vector<FlowTableEntry> entries() const;

 private:
  std::map<MatchKey, FlowTableEntry> entries_;
  std::uint64_t next_generation_ = 1;
};

}  // namespace mirage
