#include "fedsim/netsim.hpp"

#include <cmath>

#include "fedsim/errors.hpp"

namespace fedsim {

double transmit_time(std::size_t bytes, const LinkModel& link, Direction dir) {
    const double bandwidth = dir == Direction::kUplink ? link.uplink_bps : link.downlink_bps;
    if (bandwidth <= 0.0) throw ConfigError("bandwidth", "must be positive");
    if (link.base_latency_s < 0.0) throw ConfigError("base_latency_s", "must be nonnegative");
    return link.base_latency_s + static_cast<double>(bytes) / bandwidth;
}

bool sample_available(std::size_t client_id, std::uint64_t round, const AvailabilityModel& model,
                      std::uint64_t master_seed) {
    if (model.p_available < 0.0 || model.p_available > 1.0)
        throw ConfigError("p_available", "must be in [0,1]");
    Rng rng(derive_seed(master_seed, {0xAA11u, static_cast<std::uint64_t>(client_id), round}));
    return rng.bernoulli(model.p_available);
}

void EventQueue::push(double time, EventKind kind, std::size_t client_id, std::uint64_t payload) {
    if (!std::isfinite(time) || time < 0.0) throw ProtocolError("event time must be finite");
    heap_.push(Event{time, next_seq_++, kind, client_id, payload});
}

std::optional<Event> EventQueue::pop() {
    if (heap_.empty()) return std::nullopt;
    Event e = heap_.top();
    heap_.pop();
    return e;
}

}  // namespace fedsim
