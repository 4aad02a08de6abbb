#include "mirage/link_queue.hpp"

#include <algorithm>
#include <cmath>

namespace mirage {

SimTime service_time_us(double capacity_pkt_per_ms) {
  if (!(capacity_pkt_per_ms > 0)) throw ValidationError("link capacity must be > 0");
  return std::max<SimTime>(1, std::llround(1000.0 / capacity_pkt_per_ms));
}

int LinkQueue::occupancy(SimTime now) {
  while (!departures_.empty() && departures_.front() <= now) departures_.pop_front();
  return static_cast<int>(departures_.size());
}

LinkQueue::Outcome LinkQueue::transmit(SimTime now, int size) {
  Outcome o;
  if (occupancy(now) >= limit_) {
    o.dropped = true;
    ++drops_;
    return o;
  }
  o.start = std::max(now, busy_until_);
  o.depart = o.start + service_ * std::max(1, size);
  o.delivery = o.depart + latency_;
  busy_until_ = o.depart;
  departures_.push_back(o.depart);
  return o;
}

}  // namespace mirage
