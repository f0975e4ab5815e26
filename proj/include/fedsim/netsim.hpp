// Deterministic connectivity primitives: seeded per-(client, round)
// availability, latency + bandwidth transmission delays, and a discrete
// event queue ordered by (time, seq) so equal-time events replay in
// insertion order.
#pragma once

#include <cstdint>
#include <optional>
#include <queue>

#include "fedsim/rng.hpp"

namespace fedsim {

enum class Direction { kUplink, kDownlink };

struct LinkModel {
    double uplink_bps = 1e6;    // bytes per second
    double downlink_bps = 1e6;  // bytes per second
    double base_latency_s = 0.05;
};

// base latency + bytes / bandwidth for the chosen direction.
double transmit_time(std::size_t bytes, const LinkModel& link, Direction dir);

struct AvailabilityModel {
    double p_available = 0.5;
};

// Bernoulli(p) from a seed derived of (master, client, round); independent
// across rounds and clients, reproducible across runs.
bool sample_available(std::size_t client_id, std::uint64_t round, const AvailabilityModel& model,
                      std::uint64_t master_seed);

enum class EventKind : std::uint8_t {
    kTrainDone,
    kUploadArrive,
    kDownloadArrive,
    kRoundTick,
};

struct Event {
    double time = 0.0;
    std::uint64_t seq = 0;  // unique, breaks time ties deterministically
    EventKind kind = EventKind::kTrainDone;
    std::size_t client_id = 0;
    std::uint64_t payload = 0;
};

class EventQueue {
public:
    // Sequence numbers are assigned in push order.
    void push(double time, EventKind kind, std::size_t client_id, std::uint64_t payload = 0);

    // Minimum (time, seq) event, or nullopt when drained.
    std::optional<Event> pop();

    bool empty() const { return heap_.empty(); }
    std::size_t size() const { return heap_.size(); }

private:
    struct Later {
        bool operator()(const Event& a, const Event& b) const {
            if (a.time != b.time) return a.time > b.time;
            return a.seq > b.seq;
        }
    };
    std::priority_queue<Event, std::vector<Event>, Later> heap_;
    std::uint64_t next_seq_ = 0;
};

}  // namespace fedsim
