// Server-side model composition: sample-weighted FedAvg, staleness-weighted
// asynchronous application, and the shared/personal partition discipline.
// All functions are pure; the engine owns server state.
#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "fedsim/params.hpp"

namespace fedsim {

struct ClientUpdate {
    std::size_t client_id = 0;
    // Global version the client trained from; staleness is measured
    // against it.
    std::uint64_t base_round = 0;
    ParamVector delta;
    std::size_t num_samples = 1;
    std::size_t wire_bytes = 0;
};

struct AsyncConfig {
    double decay = 0.9;        // recency factor, in (0,1]
    double server_rate = 1.0;  // step applied to each accepted update
    std::optional<std::uint64_t> max_staleness;
};

// Sum of (n_i / sum n) * delta_i over the shared partition. Updates are
// reduced in client_id order regardless of arrival order, so permutations
// of the input produce bit-identical output.
ParamVector fedavg(const std::vector<ClientUpdate>& updates);

// global + rate * agg_delta.
ParamVector apply(const ParamVector& global, const ParamVector& agg_delta, double rate);

// decay^s by iterated multiplication (exact for the small s the simulator
// produces; avoids pow's libm variance).
double staleness_weight(std::uint64_t s, double decay);

struct AsyncApplyResult {
    ParamVector global;
    double weight = 0.0;  // server_rate excluded; decay^s, or 0 when rejected
    std::uint64_t staleness = 0;
    bool applied = false;
};

// One stale update folded into the global model:
// global + server_rate * decay^s * restrict(delta, shared), where
// s = server_version - base_round. Updates staler than cfg.max_staleness
// are rejected (weight 0, global returned unchanged).
AsyncApplyResult async_apply(const ParamVector& global, const ClientUpdate& update,
                             std::uint64_t server_version, const AsyncConfig& cfg);

}  // namespace fedsim
