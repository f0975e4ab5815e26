// Experiment orchestration: synchronous federated rounds, asynchronous
// event-driven federation, and a centralized baseline trained on the pooled
// shards. All three share one seeded data-preparation path so their
// held-out evaluation sets are identical and results are comparable.
#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "fedsim/aggregation.hpp"
#include "fedsim/data.hpp"
#include "fedsim/learner.hpp"
#include "fedsim/netsim.hpp"
#include "fedsim/privacy.hpp"

namespace fedsim {

enum class Mode { kSync, kAsync, kCentralized };

struct DatasetSpec {
    enum class Kind { kSyntheticBlobs, kSyntheticLinear, kCsv };
    Kind kind = Kind::kSyntheticBlobs;
    std::size_t samples = 1000;
    std::size_t features = 16;
    std::size_t classes = 3;
    double separation = 3.0;  // blob center spacing
    double noise_std = 0.05;  // linear target noise
    std::string path;         // csv
    std::string label_column;
};

struct CompressionConfig {
    std::optional<double> topk;                // fraction in (0,1]
    std::optional<std::uint32_t> quantize_bits;
    bool error_feedback = false;
};

struct PaillierConfig {
    bool enabled = false;
    unsigned key_bits = 2048;
    std::uint64_t fixed_point_scale = std::uint64_t{1} << 16;
};

struct PrivacyConfig {
    DpConfig dp;
    PaillierConfig paillier;
};

struct PersonalizationConfig {
    bool enabled = false;
    std::size_t head_layers = 1;  // trailing layers kept client-local
};

struct AsyncRunConfig {
    double decay = 0.9;
    double server_rate = 1.0;
    std::optional<std::uint64_t> max_staleness;
    std::optional<std::uint64_t> max_updates;  // default rounds*clients
    std::optional<double> max_sim_time;
};

struct NetworkConfig {
    LinkModel link;
    AvailabilityModel availability;
    double train_seconds_per_sample_epoch = 1e-4;
};

struct FederationConfig {
    DatasetSpec dataset;
    Task task = Task::kClassification;
    PartitionScheme scheme = PartitionScheme::kIid;
    double dirichlet_alpha = 0.5;
    std::size_t classes_per_client = 2;

    std::vector<std::size_t> hidden = {32, 16};
    Activation activation = Activation::kRelu;
    OptimizerConfig optimizer;

    std::size_t clients = 10;
    std::size_t rounds = 20;
    std::size_t local_epochs = 3;
    std::size_t batch_size = 32;
    Mode mode = Mode::kSync;

    PersonalizationConfig personalization;
    CompressionConfig compression;
    PrivacyConfig privacy;
    AsyncRunConfig async_cfg;
    NetworkConfig network;

    double eval_fraction = 0.2;
    std::uint64_t seed = 1;
};

struct MetricsRecord {
    std::uint64_t index = 0;  // round (sync/centralized) or applied update
    double sim_time_s = 0.0;
    double loss = 0.0;   // mean eval loss (cross-entropy or squared error)
    double score = 0.0;  // accuracy for classification, MSE for regression
    std::optional<double> personal_accuracy;  // mean per-client local-test accuracy
    std::size_t participants = 0;
    std::uint64_t uplink_bytes = 0;    // cumulative
    std::uint64_t downlink_bytes = 0;  // cumulative
    double mean_staleness = 0.0;
    double mean_weight = 0.0;
};

struct RunResult {
    Mode mode = Mode::kSync;
    Task task = Task::kClassification;
    std::vector<MetricsRecord> records;
    ParamVector final_global;

    std::uint64_t uplink_bytes = 0;
    std::uint64_t downlink_bytes = 0;
    double sim_time_s = 0.0;

    // Conservation ledger: generated == delivered + queued, and rejected
    // counts delivered updates discarded by the staleness cutoff.
    std::size_t updates_generated = 0;
    std::size_t updates_delivered = 0;
    std::size_t updates_queued = 0;    // still undelivered at end
    std::size_t updates_rejected = 0;  // delivered but past max_staleness

    std::size_t decrypt_calls = 0;  // keyholder audit

    // Hash of the held-out evaluation rows; compare() refuses runs whose
    // fingerprints differ.
    std::uint64_t eval_fingerprint = 0;

    double final_score() const { return records.empty() ? 0.0 : records.back().score; }
    double final_loss() const { return records.empty() ? 0.0 : records.back().loss; }
};

// Raised when a run finishes without a single delivered update; carries the
// partial metrics log for reporting.
class StalledRun : public StalledRunError {
public:
    explicit StalledRun(RunResult partial)
        : StalledRunError("no client update was ever delivered"),
          partial_(std::move(partial)) {}

    const RunResult& partial() const { return partial_; }

private:
    RunResult partial_;
};

// Observability hooks for tests; every field optional.
struct RunHooks {
    // Forces availability for (client, round/attempt); return nullopt to
    // fall through to seeded sampling.
    std::function<std::optional<bool>(std::size_t client, std::uint64_t round)> availability;
    // Fires when an update is folded into the global model.
    std::function<void(std::size_t client, std::uint64_t generated_at, std::uint64_t applied_at,
                       std::uint64_t staleness, double weight)>
        on_apply;
    // Fires with every server-side decoded update (wire audit).
    std::function<void(std::size_t client, const ParamVector& decoded)> on_upload_decoded;
};

RunResult run_sync(const FederationConfig& cfg, std::size_t threads = 1,
                   const RunHooks* hooks = nullptr);
RunResult run_async(const FederationConfig& cfg, const RunHooks* hooks = nullptr);
RunResult run_centralized(const FederationConfig& cfg);

// Dispatch on cfg.mode. threads affects wall-clock only, never results;
// async and centralized runs are single-threaded by construction.
RunResult run(const FederationConfig& cfg, std::size_t threads = 1,
              const RunHooks* hooks = nullptr);

struct CompareSummary {
    double score_delta = 0.0;  // a - b, final
    double loss_delta = 0.0;
    std::optional<double> uplink_ratio;  // a/b, absent when b moved no bytes
    std::optional<double> time_to_threshold_a;
    std::optional<double> time_to_threshold_b;
    std::optional<double> time_ratio;  // a/b when both reached the threshold
};

// Final-metric deltas and communication/time ratios for two runs over the
// same evaluation set.
CompareSummary compare(const RunResult& a, const RunResult& b, double score_threshold);

}  // namespace fedsim
