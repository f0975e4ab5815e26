#include "fedsim/aggregation.hpp"

#include <algorithm>
#include <numeric>

namespace fedsim {

ParamVector fedavg(const std::vector<ClientUpdate>& updates) {
    if (updates.empty()) throw ProtocolError("fedavg over zero updates");
    for (const auto& u : updates) {
        if (u.num_samples == 0) throw ProtocolError("client update with zero samples");
        require_same_layout(u.delta, updates.front().delta);
    }

    std::vector<std::size_t> order(updates.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        if (updates[a].client_id != updates[b].client_id)
            return updates[a].client_id < updates[b].client_id;
        return a < b;  // stable for duplicate ids
    });

    double total = 0.0;
    for (const auto& u : updates) total += static_cast<double>(u.num_samples);

    ParamVector sum(updates.front().delta.layout());
    for (std::size_t i : order) {
        const double w = static_cast<double>(updates[i].num_samples) / total;
        sum = axpy(w, updates[i].delta, sum);
    }
    return restrict_to(sum, Partition::kShared);
}

ParamVector apply(const ParamVector& global, const ParamVector& agg_delta, double rate) {
    return axpy(rate, agg_delta, global);
}

double staleness_weight(std::uint64_t s, double decay) {
    double w = 1.0;
    for (std::uint64_t i = 0; i < s; ++i) w *= decay;
    return w;
}

AsyncApplyResult async_apply(const ParamVector& global, const ClientUpdate& update,
                             std::uint64_t server_version, const AsyncConfig& cfg) {
    if (update.base_round > server_version)
        throw ProtocolError("update trained from a future global version");
    require_same_layout(global, update.delta);

    AsyncApplyResult result;
    result.staleness = server_version - update.base_round;
    if (cfg.max_staleness && result.staleness > *cfg.max_staleness) {
        result.global = global;
        return result;
    }
    result.weight = staleness_weight(result.staleness, cfg.decay);
    result.applied = true;
    result.global = axpy(cfg.server_rate * result.weight,
                         restrict_to(update.delta, Partition::kShared), global);
    return result;
}

}  // namespace fedsim
