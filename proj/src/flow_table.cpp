#include "mirage/flow_table.hpp"

#include <algorithm>

namespace mirage {

std::optional<SimTime> FlowTableEntry::deadline() const {
  std::optional<SimTime> d;
  if (hard_timeout > 0) d = installed_at + hard_timeout;
  if (idle_timeout > 0) {
    const SimTime idle = last_used + idle_timeout;
    d = d ? std::min(*d, idle) : idle;
  }
  return d;
}

bool FlowTableEntry::expired(SimTime now) const {
  auto d = deadline();
  return d && now >= *d;
}

std::uint64_t FlowTable::install(FlowTableEntry e) {
  e.generation = next_generation_++;
  e.last_used = e.installed_at;
  entries_[e.match] = e;
  return e.generation;
}

std::vector<FlowTableEntry> FlowTable::expire(SimTime now) {
  std::vector<FlowTableEntry> out;
  for (auto it = entries_.begin(); it != entries_.end();) {
    if (it->second.expired(now)) {
      out.push_back(it->second);
      it = entries_.erase(it);
    } else {
      ++it;
    }
  }
  return out;
}

std::optional<FlowTableEntry> FlowTable::lookup(FlowId flow, Direction dir, std::uint32_t index,
                                                SimTime now) {
  auto try_key = [&](MatchKey k) -> std::optional<FlowTableEntry> {
    auto it = entries_.find(k);
    if (it == entries_.end()) return std::nullopt;
    if (it->second.expired(now)) {
      entries_.erase(it);
      return std::nullopt;
    }
    FlowTableEntry hit = it->second;
    if (hit.per_packet()) {
      entries_.erase(it);
    } else {
      it->second.last_used = now;
      hit.last_used = now;
    }
    return hit;
  };
  if (index != 0)
    if (auto e = try_key({flow, dir, index})) return e;
  return try_key({flow, dir, 0});
}

bool FlowTable::has_common(FlowId flow, Direction dir, SimTime now) const {
  auto it = entries_.find({flow, dir, 0});
  return it != entries_.end() && !it->second.expired(now);
}

const FlowTableEntry* FlowTable::find(const MatchKey& k) const {
  auto it = entries_.find(k);
  return it == entries_.end() ? nullptr : &it->second;
}

bool FlowTable::remove(const MatchKey& k) { return entries_.erase(k) > 0; }

std::vector<FlowTableEntry> FlowTable::entries() const {
  std::vector<FlowTableEntry> out;
  out.reserve(entries_.size());
  for (const auto& [_, e] : entries_) out.push_back(e);
  return out;
}

}  // namespace mirage
