#pragma once

#include <deque>

#include "mirage/common.hpp"

namespace mirage {

/// Service time of one size-1 packet on a link of `capacity` packets/ms.
SimTime service_time_us(double capacity_pkt_per_ms);

/// FIFO output queue of one link direction. A packet is served after every
/// packet already queued, then propagates for `latency`.
class LinkQueue {
 public:
  LinkQueue(SimTime service_us, SimTime latency_us, int queue_limit)
      : service_(service_us), latency_(latency_us), limit_(queue_limit) {}

  struct Outcome {
    bool dropped = false;
    SimTime start = 0;     // service begins
    SimTime depart = 0;    // last bit leaves
    SimTime delivery = 0;  // arrival at the far end
  };

  /// Enqueues at `now` (non-decreasing across calls). Drops when `queue_limit`
  /// packets are already waiting or in service.
  Outcome transmit(SimTime now, int size = 1);

  /// Packets queued or in service at `now`.
  int occupancy(SimTime now);

  SimTime service_us() const { return service_; }
  SimTime latency_us() const { return latency_; }
  int queue_limit() const { return limit_; }
  std::uint64_t drops() const { return drops_; }

 private:
  SimTime service_, latency_;
  int limit_;
  SimTime busy_until_ = 0;
  std::deque<SimTime> departures_;
  std::uint64_t drops_ = 0;
};

}  // namespace mirage
