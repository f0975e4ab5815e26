#include "fedsim/engine.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>
#include <thread>

#include "fedsim/compression.hpp"
#include "fedsim/metrics.hpp"
#include "fedsim/wire.hpp"

namespace fedsim {
namespace {

// Purpose tags for derived seed streams.
constexpr std::uint64_t kTagData = 0xDA7Au;
constexpr std::uint64_t kTagEvalSplit = 0xE7A1u;
constexpr std::uint64_t kTagLocalSplit = 0x10CAu;
constexpr std::uint64_t kTagPartition = 0x9A27u;
constexpr std::uint64_t kTagModelInit = 0x91D1u;
constexpr std::uint64_t kTagTrain = 0x7124u;
constexpr std::uint64_t kTagDpNoise = 0xD901u;
constexpr std::uint64_t kTagEncrypt = 0xE0C1u;
constexpr std::uint64_t kTagKeygen = 0x6E45u;

struct PreparedData {
    Dataset pool;      // training rows, eval split removed
    Dataset eval_set;  // shared held-out set
    std::vector<std::vector<std::size_t>> client_train;  // indices into pool
    std::vector<Dataset> client_test;                    // per-client local test
    std::vector<std::size_t> pooled_train;               // client parts, in client order
    std::uint64_t fingerprint = 0;
};

Dataset build_raw_dataset(const FederationConfig& cfg) {
    const std::uint64_t dseed = derive_seed(cfg.seed, {kTagData});
    switch (cfg.dataset.kind) {
        case DatasetSpec::Kind::kSyntheticBlobs:
            return synth_blobs(dseed, cfg.dataset.samples, cfg.dataset.features,
                               cfg.dataset.classes, cfg.dataset.separation);
        case DatasetSpec::Kind::kSyntheticLinear:
            return synth_linear(dseed, cfg.dataset.samples, cfg.dataset.features,
                                cfg.dataset.noise_std);
        case DatasetSpec::Kind::kCsv:
            return load_csv(cfg.dataset.path, cfg.dataset.label_column, cfg.task);
    }
    throw ConfigError("dataset.kind", "unrecognized");
}

PreparedData prepare_data(const FederationConfig& cfg) {
    Dataset raw = build_raw_dataset(cfg);
    if (raw.task != cfg.task) throw ConfigError("task", "does not match the dataset kind");
    const Dataset full = normalize_minmax(raw);
    if (full.num_rows < 2) throw ConfigError("dataset.samples", "too few rows to split");

    std::vector<std::size_t> idx(full.num_rows);
    std::iota(idx.begin(), idx.end(), std::size_t{0});
    Rng split_rng(derive_seed(cfg.seed, {kTagEvalSplit}));
    split_rng.shuffle(idx);

    auto eval_n = static_cast<std::size_t>(
        std::floor(cfg.eval_fraction * static_cast<double>(full.num_rows)));
    eval_n = std::clamp<std::size_t>(eval_n, 1, full.num_rows - 1);

    std::vector<std::size_t> eval_idx(idx.begin(), idx.begin() + static_cast<std::ptrdiff_t>(eval_n));
    std::vector<std::size_t> pool_idx(idx.begin() + static_cast<std::ptrdiff_t>(eval_n), idx.end());
    std::sort(eval_idx.begin(), eval_idx.end());
    std::sort(pool_idx.begin(), pool_idx.end());

    PreparedData d;
    d.eval_set = full.subset(eval_idx);
    d.pool = full.subset(pool_idx);

    d.fingerprint = derive_seed(0x5EEDu, {full.num_rows, full.num_features, eval_n});
    for (std::size_t i : eval_idx) d.fingerprint = derive_seed(d.fingerprint, i);

    PartitionConfig pc;
    pc.scheme = cfg.scheme;
    pc.num_clients = cfg.clients;
    pc.alpha = cfg.dirichlet_alpha;
    pc.classes_per_client = cfg.classes_per_client;
    pc.seed = derive_seed(cfg.seed, {kTagPartition});
    auto shards = partition(d.pool, pc);

    for (std::size_t i = 0; i < cfg.clients; ++i) {
        auto shard = shards[i];
        Rng rng(derive_seed(cfg.seed, {kTagLocalSplit, i}));
        rng.shuffle(shard);
        std::size_t test_n = shard.size() / 5;
        if (test_n >= shard.size()) test_n = shard.size() - 1;  // keep one training row
        std::vector<std::size_t> test_part(shard.begin(),
                                           shard.begin() + static_cast<std::ptrdiff_t>(test_n));
        std::vector<std::size_t> train_part(shard.begin() + static_cast<std::ptrdiff_t>(test_n),
                                            shard.end());
        std::sort(test_part.begin(), test_part.end());
        std::sort(train_part.begin(), train_part.end());
        d.client_test.push_back(d.pool.subset(test_part));
        d.client_train.push_back(std::move(train_part));
    }
    for (const auto& part : d.client_train)
        d.pooled_train.insert(d.pooled_train.end(), part.begin(), part.end());
    return d;
}

MlpSpec model_spec(const FederationConfig& cfg, const PreparedData& d) {
    MlpSpec spec;
    spec.input_dim = d.pool.num_features;
    spec.hidden = cfg.hidden;
    spec.output_dim = cfg.task == Task::kClassification ? d.pool.class_count : 1;
    spec.activation = cfg.activation;
    spec.task = cfg.task;
    spec.personal_head_layers =
        cfg.personalization.enabled ? cfg.personalization.head_layers : 0;
    return spec;
}

struct PaillierContext {
    PaillierKeyPair keys;
    FixedPointCodec codec;
};

struct Packet {
    std::size_t bytes = 0;
    ParamVector decoded;  // what the server reconstructs (non-encrypted paths)
    std::vector<Ciphertext> coords;  // encrypted path, deltas pre-scaled by n_i
    bool encrypted = false;
};

// One queued or in-flight client update with its transport form.
struct PendingUpdate {
    ClientUpdate update;
    Packet packet;
};

// Client-side encoding pipeline: restrict to shared, carry the error
// feedback residual, clip, sparsify, noise the kept coordinates, then
// quantize or encrypt for transport. `residual` is updated in place.
Packet encode_update(const ParamVector& raw_delta, std::size_t client, std::uint64_t session,
                     std::size_t num_samples, const FederationConfig& cfg,
                     const PaillierContext* paillier, ParamVector* residual) {
    const LayoutPtr layout = raw_delta.layout();
    ParamVector working =
        cfg.personalization.enabled ? restrict_to(raw_delta, Partition::kShared) : raw_delta;
    if (residual) working = axpy(1.0, *residual, working);
    if (cfg.privacy.dp.enabled) working = clip_to_norm(working, cfg.privacy.dp.clip_norm);

    std::optional<SparseUpdate> sparse;
    if (cfg.compression.topk) {
        sparse = topk(working, *cfg.compression.topk);
        if (residual) *residual = subtract(working, densify(*sparse, layout));
    } else if (residual) {
        *residual = ParamVector(layout);
    }

    if (cfg.privacy.dp.enabled && cfg.privacy.dp.sigma > 0.0) {
        Rng rng(derive_seed(cfg.seed, {kTagDpNoise, client, session}));
        const double sd = cfg.privacy.dp.sigma * cfg.privacy.dp.clip_norm;
        if (sparse) {
            for (double& v : sparse->values) v += sd * rng.normal();
        } else {
            for (double& v : working.values()) v += sd * rng.normal();
        }
    }

    Packet p;
    if (paillier) {
        ParamVector vals = sparse ? densify(*sparse, layout) : working;
        if (cfg.compression.quantize_bits)
            vals = dequantize(quantize(vals, *cfg.compression.quantize_bits), layout);
        Rng rng(derive_seed(cfg.seed, {kTagEncrypt, client, session}));
        p.encrypted = true;
        p.coords.reserve(vals.dim());
        std::vector<std::vector<std::uint8_t>> cipher_bytes;
        cipher_bytes.reserve(vals.dim());
        const double n_scale = static_cast<double>(num_samples);
        for (std::size_t i = 0; i < vals.dim(); ++i) {
            const mpz_class m = fp_encode(vals[i] * n_scale, paillier->codec, cfg.clients);
            Ciphertext c = paillier_encrypt(paillier->keys.pk, m, rng);
            cipher_bytes.push_back(mpz_to_bytes(c));
            p.coords.push_back(std::move(c));
        }
        p.bytes = encoded_size_encrypted(cipher_bytes);
        return p;
    }

    if (sparse) {
        const auto wire = serialize_sparse(*sparse);
        p.bytes = wire.size();
        p.decoded = densify(deserialize(wire).sparse, layout);
    } else if (cfg.compression.quantize_bits) {
        const auto wire = serialize_quantized(quantize(working, *cfg.compression.quantize_bits));
        p.bytes = wire.size();
        p.decoded = dequantize(deserialize(wire).quantized, layout);
    } else {
        // Lossless path: values travel at full precision, byte accounting
        // uses the dense wire size they would occupy.
        p.bytes = encoded_size_dense(working.dim());
        p.decoded = working;
    }
    return p;
}

// Shared scaffolding for one experiment.
struct Experiment {
    const FederationConfig& cfg;
    PreparedData data;
    MlpSpec spec;
    ParamVector global;
    std::optional<PaillierContext> paillier;
    std::optional<KeyHolder> keyholder;

    explicit Experiment(const FederationConfig& c) : cfg(c), data(prepare_data(c)) {
        spec = model_spec(c, data);
        global = init_model(spec, derive_seed(c.seed, {kTagModelInit}));
        if (c.privacy.paillier.enabled) {
            PaillierContext ctx;
            ctx.keys =
                paillier_keygen(c.privacy.paillier.key_bits, derive_seed(c.seed, {kTagKeygen}));
            ctx.codec = FixedPointCodec{ctx.keys.pk.n, c.privacy.paillier.fixed_point_scale};
            keyholder.emplace(ctx.keys);
            paillier = std::move(ctx);
        }
    }

    double train_seconds(std::size_t client) const {
        return cfg.network.train_seconds_per_sample_epoch *
               static_cast<double>(data.client_train[client].size()) *
               static_cast<double>(cfg.local_epochs);
    }

    // Global shared segments combined with the client's personal head.
    ParamVector merged_for_client(const ParamVector& client_local) const {
        ParamVector merged = global;
        overlay(merged, client_local, Partition::kPersonal);
        return merged;
    }

    MetricsRecord evaluate_global(std::uint64_t index, double sim_time,
                                  const std::vector<ParamVector>* client_locals) const {
        MetricsRecord rec;
        rec.index = index;
        rec.sim_time_s = sim_time;
        const EvalResult ev = evaluate(global, spec, data.eval_set);
        rec.loss = ev.mean_loss;
        if (cfg.task == Task::kClassification) {
            rec.score = ev.confusion->accuracy();
        } else {
            rec.score = ev.mean_loss;  // mean squared error
        }
        if (client_locals && cfg.task == Task::kClassification) {
            double acc_sum = 0.0;
            std::size_t counted = 0;
            for (std::size_t i = 0; i < cfg.clients; ++i) {
                if (data.client_test[i].num_rows == 0) continue;
                const ParamVector model = merged_for_client((*client_locals)[i]);
                acc_sum += evaluate(model, spec, data.client_test[i]).confusion->accuracy();
                ++counted;
            }
            if (counted > 0) rec.personal_accuracy = acc_sum / static_cast<double>(counted);
        }
        return rec;
    }
};

bool client_available(const FederationConfig& cfg, const RunHooks* hooks, std::size_t client,
                      std::uint64_t round) {
    if (hooks && hooks->availability) {
        if (auto forced = hooks->availability(client, round)) return *forced;
    }
    return sample_available(client, round, cfg.network.availability, cfg.seed);
}

struct RunningMean {
    double sum = 0.0;
    std::size_t n = 0;
    void add(double v) {
        sum += v;
        ++n;
    }
    double mean() const { return n == 0 ? 0.0 : sum / static_cast<double>(n); }
};

}  // namespace

RunResult run_sync(const FederationConfig& cfg, std::size_t threads, const RunHooks* hooks) {
    Experiment ex(cfg);
    const LayoutPtr layout = ex.global.layout();

    std::vector<ParamVector> local(cfg.clients, ex.global);
    std::vector<std::uint64_t> held_version(cfg.clients, 0);
    std::vector<ParamVector> residual;
    if (cfg.compression.error_feedback) residual.assign(cfg.clients, ParamVector(layout));
    std::vector<std::vector<PendingUpdate>> offline_queue(cfg.clients);

    RunResult result;
    result.mode = Mode::kSync;
    result.task = cfg.task;
    result.eval_fingerprint = ex.data.fingerprint;
    std::uint64_t server_version = 0;
    double sim_time = 0.0;
    RunningMean staleness_mean, weight_mean;
    const std::size_t dense_download_bytes = encoded_size_dense(layout->dim());

    struct TaskOut {
        ParamVector new_params;
        ParamVector new_residual;
        Packet packet;
        ClientUpdate update;
        bool downloaded = false;
        double train_time = 0.0;
    };

    for (std::uint64_t round = 1; round <= cfg.rounds; ++round) {
        std::vector<bool> avail(cfg.clients);
        for (std::size_t i = 0; i < cfg.clients; ++i)
            avail[i] = client_available(cfg, hooks, i, round);

        std::vector<TaskOut> outs(cfg.clients);
        auto run_client = [&](std::size_t i) {
            TaskOut out;
            out.downloaded = avail[i] && held_version[i] < server_version;
            ParamVector start = out.downloaded ? ex.merged_for_client(local[i]) : local[i];
            ParamVector res_copy;
            ParamVector* res_ptr = nullptr;
            if (cfg.compression.error_feedback) {
                res_copy = residual[i];
                res_ptr = &res_copy;
            }
            auto trained = local_train(start, ex.spec, ex.data.pool, ex.data.client_train[i],
                                       cfg.local_epochs, cfg.batch_size, cfg.optimizer,
                                       derive_seed(cfg.seed, {kTagTrain, i, round}));
            out.packet = encode_update(trained.delta, i, round, trained.num_samples, cfg,
                                       ex.paillier ? &*ex.paillier : nullptr, res_ptr);
            out.new_params = std::move(trained.new_params);
            if (res_ptr) out.new_residual = std::move(res_copy);
            out.train_time = ex.train_seconds(i);
            out.update = ClientUpdate{i, round, out.packet.encrypted ? ParamVector(layout)
                                                                      : out.packet.decoded,
                                      trained.num_samples, out.packet.bytes};
            return out;
        };

        const std::size_t workers = std::max<std::size_t>(1, std::min(threads, cfg.clients));
        if (workers <= 1) {
            for (std::size_t i = 0; i < cfg.clients; ++i) outs[i] = run_client(i);
        } else {
            std::vector<std::thread> pool;
            pool.reserve(workers);
            for (std::size_t w = 0; w < workers; ++w) {
                pool.emplace_back([&, w] {
                    for (std::size_t i = w; i < cfg.clients; i += workers) outs[i] = run_client(i);
                });
            }
            for (auto& t : pool) t.join();
        }

        // Commit phase, strictly in client order.
        double round_span = 0.0;
        std::vector<PendingUpdate> delivered;
        std::size_t participants = 0;
        for (std::size_t i = 0; i < cfg.clients; ++i) {
            TaskOut& out = outs[i];
            double t_i = 0.0;
            if (out.downloaded) {
                t_i += transmit_time(dense_download_bytes, cfg.network.link,
                                     Direction::kDownlink);
                result.downlink_bytes += dense_download_bytes;
                held_version[i] = server_version;
            }
            local[i] = std::move(out.new_params);
            if (cfg.compression.error_feedback) residual[i] = std::move(out.new_residual);
            t_i += out.train_time;
            ++result.updates_generated;

            if (avail[i]) {
                ++participants;
                for (auto& queued : offline_queue[i]) {
                    t_i += transmit_time(queued.packet.bytes, cfg.network.link,
                                         Direction::kUplink);
                    result.uplink_bytes += queued.packet.bytes;
                    ++result.updates_delivered;
                    delivered.push_back(std::move(queued));
                }
                offline_queue[i].clear();
                t_i += transmit_time(out.packet.bytes, cfg.network.link, Direction::kUplink);
                result.uplink_bytes += out.packet.bytes;
                ++result.updates_delivered;
                delivered.push_back(PendingUpdate{std::move(out.update), std::move(out.packet)});
            } else {
                offline_queue[i].push_back(
                    PendingUpdate{std::move(out.update), std::move(out.packet)});
            }
            round_span = std::max(round_span, t_i);
        }
        sim_time += round_span;

        if (!delivered.empty()) {
            ParamVector agg(layout);
            if (ex.paillier) {
                std::vector<EncryptedUpdate> enc;
                enc.reserve(delivered.size());
                for (auto& d : delivered)
                    enc.push_back(EncryptedUpdate{d.update.client_id, d.update.num_samples,
                                                  std::move(d.packet.coords)});
                agg = restrict_to(
                    secure_aggregate(enc, *ex.keyholder, ex.paillier->codec, layout),
                    Partition::kShared);
            } else {
                std::vector<ClientUpdate> updates;
                updates.reserve(delivered.size());
                for (auto& d : delivered) {
                    if (hooks && hooks->on_upload_decoded)
                        hooks->on_upload_decoded(d.update.client_id, d.update.delta);
                    updates.push_back(std::move(d.update));
                }
                agg = fedavg(updates);
            }
            ex.global = apply(ex.global, agg, 1.0);
            server_version += 1;
            for (const auto& d : delivered) {
                const std::uint64_t s = round - d.update.base_round;
                staleness_mean.add(static_cast<double>(s));
                weight_mean.add(1.0);
                if (hooks && hooks->on_apply)
                    hooks->on_apply(d.update.client_id, d.update.base_round, round, s, 1.0);
            }
        }

        MetricsRecord rec = ex.evaluate_global(round, sim_time, &local);
        rec.participants = participants;
        rec.uplink_bytes = result.uplink_bytes;
        rec.downlink_bytes = result.downlink_bytes;
        rec.mean_staleness = staleness_mean.mean();
        rec.mean_weight = weight_mean.mean();
        result.records.push_back(rec);
    }

    for (const auto& q : offline_queue) result.updates_queued += q.size();
    result.sim_time_s = sim_time;
    result.final_global = ex.global;
    if (ex.keyholder) result.decrypt_calls = ex.keyholder->decrypt_calls();
    if (result.updates_delivered == 0) throw StalledRun(std::move(result));
    return result;
}

RunResult run_async(const FederationConfig& cfg, const RunHooks* hooks) {
    if (cfg.privacy.paillier.enabled)
        throw ConfigError("privacy.paillier.enabled",
                          "asynchronous mode cannot aggregate encrypted updates one by one "
                          "without decrypting individual contributions");
    Experiment ex(cfg);
    const LayoutPtr layout = ex.global.layout();

    std::vector<ParamVector> local(cfg.clients, ex.global);
    std::vector<std::uint64_t> held_version(cfg.clients, 0);
    std::vector<std::uint64_t> session(cfg.clients, 0);
    std::vector<std::uint64_t> attempts(cfg.clients, 0);
    std::vector<ParamVector> residual;
    if (cfg.compression.error_feedback) residual.assign(cfg.clients, ParamVector(layout));
    std::vector<std::vector<PendingUpdate>> offline_queue(cfg.clients);
    std::vector<std::size_t> uploads_in_flight(cfg.clients, 0);
    std::vector<bool> contributed(cfg.clients, false);

    RunResult result;
    result.mode = Mode::kAsync;
    result.task = cfg.task;
    result.eval_fingerprint = ex.data.fingerprint;

    const std::uint64_t max_updates =
        cfg.async_cfg.max_updates.value_or(static_cast<std::uint64_t>(cfg.rounds) * cfg.clients);
    // Offline clients keep training and queuing; this cap bounds total work
    // so a permanently disconnected fleet still terminates (and stalls).
    const std::uint64_t generation_cap = max_updates * 8;
    const std::size_t dense_download_bytes = encoded_size_dense(layout->dim());
    AsyncConfig acfg{cfg.async_cfg.decay, cfg.async_cfg.server_rate, cfg.async_cfg.max_staleness};

    EventQueue queue;
    std::map<std::uint64_t, PendingUpdate> in_flight;
    struct PendingDownload {
        ParamVector snapshot;
        std::uint64_t version;
    };
    std::map<std::uint64_t, PendingDownload> downloads;
    std::uint64_t next_token = 0;

    std::uint64_t server_version = 0;
    std::uint64_t applied = 0;
    double now = 0.0;
    RunningMean staleness_mean, weight_mean;
    std::size_t participants = 0;

    std::uint64_t sessions_started = 0;
    auto start_training = [&](std::size_t i, double at) {
        if (sessions_started >= generation_cap) return;  // client idles out
        ++sessions_started;
        session[i] += 1;
        queue.push(at + ex.train_seconds(i), EventKind::kTrainDone, i);
    };
    for (std::size_t i = 0; i < cfg.clients; ++i) start_training(i, 0.0);

    while (applied < max_updates) {
        auto ev = queue.pop();
        if (!ev) break;
        if (cfg.async_cfg.max_sim_time && ev->time > *cfg.async_cfg.max_sim_time) break;
        now = ev->time;

        switch (ev->kind) {
            case EventKind::kTrainDone: {
                const std::size_t i = ev->client_id;
                ParamVector* res_ptr =
                    cfg.compression.error_feedback ? &residual[i] : nullptr;
                auto trained = local_train(local[i], ex.spec, ex.data.pool,
                                           ex.data.client_train[i], cfg.local_epochs,
                                           cfg.batch_size, cfg.optimizer,
                                           derive_seed(cfg.seed, {kTagTrain, i, session[i]}));
                Packet packet = encode_update(trained.delta, i, session[i],
                                              trained.num_samples, cfg, nullptr, res_ptr);
                local[i] = std::move(trained.new_params);
                ++result.updates_generated;
                ClientUpdate update{i, held_version[i], packet.decoded, trained.num_samples,
                                    packet.bytes};
                offline_queue[i].push_back(PendingUpdate{std::move(update), std::move(packet)});

                attempts[i] += 1;
                if (client_available(cfg, hooks, i, attempts[i])) {
                    double depart = now;
                    for (auto& pending : offline_queue[i]) {
                        depart += transmit_time(pending.packet.bytes, cfg.network.link,
                                                Direction::kUplink);
                        const std::uint64_t token = next_token++;
                        in_flight.emplace(token, std::move(pending));
                        queue.push(depart, EventKind::kUploadArrive, i, token);
                        ++uploads_in_flight[i];
                    }
                    offline_queue[i].clear();
                } else {
                    // Offline: keep training from the local chain.
                    start_training(i, now);
                }
                break;
            }
            case EventKind::kUploadArrive: {
                const std::size_t i = ev->client_id;
                auto node = in_flight.extract(ev->payload);
                if (node.empty()) throw ProtocolError("upload token unknown");
                PendingUpdate pending = std::move(node.mapped());
                ++result.updates_delivered;
                result.uplink_bytes += pending.packet.bytes;
                if (hooks && hooks->on_upload_decoded)
                    hooks->on_upload_decoded(i, pending.update.delta);

                auto applied_result =
                    async_apply(ex.global, pending.update, server_version, acfg);
                if (applied_result.applied) {
                    ex.global = std::move(applied_result.global);
                    server_version += 1;
                    applied += 1;
                    if (!contributed[i]) {
                        contributed[i] = true;
                        ++participants;
                    }
                    staleness_mean.add(static_cast<double>(applied_result.staleness));
                    weight_mean.add(applied_result.weight);
                    if (hooks && hooks->on_apply)
                        hooks->on_apply(i, pending.update.base_round, server_version,
                                        applied_result.staleness, applied_result.weight);

                    MetricsRecord rec = ex.evaluate_global(applied, now, &local);
                    rec.participants = participants;
                    rec.uplink_bytes = result.uplink_bytes;
                    rec.downlink_bytes = result.downlink_bytes;
                    rec.mean_staleness = staleness_mean.mean();
                    rec.mean_weight = weight_mean.mean();
                    result.records.push_back(rec);
                } else {
                    ++result.updates_rejected;
                }

                if (--uploads_in_flight[i] == 0) {
                    const std::uint64_t token = next_token++;
                    downloads.emplace(token, PendingDownload{ex.global, server_version});
                    queue.push(now + transmit_time(dense_download_bytes, cfg.network.link,
                                                   Direction::kDownlink),
                               EventKind::kDownloadArrive, i, token);
                }
                break;
            }
            case EventKind::kDownloadArrive: {
                const std::size_t i = ev->client_id;
                auto node = downloads.extract(ev->payload);
                if (node.empty()) throw ProtocolError("download token unknown");
                result.downlink_bytes += dense_download_bytes;
                ParamVector merged = std::move(node.mapped().snapshot);
                overlay(merged, local[i], Partition::kPersonal);
                local[i] = std::move(merged);
                held_version[i] = node.mapped().version;
                start_training(i, now);
                break;
            }
            case EventKind::kRoundTick:
                break;
        }
    }

    for (const auto& q : offline_queue) result.updates_queued += q.size();
    result.updates_queued += in_flight.size();
    result.sim_time_s = now;
    result.final_global = ex.global;
    if (applied == 0) throw StalledRun(std::move(result));
    return result;
}

RunResult run_centralized(const FederationConfig& cfg) {
    Experiment ex(cfg);
    RunResult result;
    result.mode = Mode::kCentralized;
    result.task = cfg.task;
    result.eval_fingerprint = ex.data.fingerprint;

    double sim_time = 0.0;
    const double round_seconds = cfg.network.train_seconds_per_sample_epoch *
                                 static_cast<double>(ex.data.pooled_train.size()) *
                                 static_cast<double>(cfg.local_epochs);
    for (std::uint64_t round = 1; round <= cfg.rounds; ++round) {
        auto trained = local_train(ex.global, ex.spec, ex.data.pool, ex.data.pooled_train,
                                   cfg.local_epochs, cfg.batch_size, cfg.optimizer,
                                   derive_seed(cfg.seed, {kTagTrain, std::uint64_t{0}, round}));
        ex.global = std::move(trained.new_params);
        sim_time += round_seconds;

        MetricsRecord rec = ex.evaluate_global(round, sim_time, nullptr);
        rec.participants = 1;
        result.records.push_back(rec);
    }
    result.sim_time_s = sim_time;
    result.final_global = ex.global;
    return result;
}

RunResult run(const FederationConfig& cfg, std::size_t threads, const RunHooks* hooks) {
    switch (cfg.mode) {
        case Mode::kSync:
            return run_sync(cfg, threads, hooks);
        case Mode::kAsync:
            return run_async(cfg, hooks);
        case Mode::kCentralized:
            return run_centralized(cfg);
    }
    throw ConfigError("mode", "unrecognized");
}

CompareSummary compare(const RunResult& a, const RunResult& b, double score_threshold) {
    if (a.eval_fingerprint != b.eval_fingerprint)
        throw ProtocolError("runs were evaluated on different held-out sets");

    CompareSummary s;
    s.score_delta = a.final_score() - b.final_score();
    s.loss_delta = a.final_loss() - b.final_loss();
    if (b.uplink_bytes > 0)
        s.uplink_ratio =
            static_cast<double>(a.uplink_bytes) / static_cast<double>(b.uplink_bytes);

    // For classification the threshold is a floor on accuracy; for
    // regression a ceiling on MSE.
    auto time_to = [&](const RunResult& r) -> std::optional<double> {
        for (const auto& rec : r.records) {
            const bool reached = r.task == Task::kClassification ? rec.score >= score_threshold
                                                                 : rec.score <= score_threshold;
            if (reached) return rec.sim_time_s;
        }
        return std::nullopt;
    };
    s.time_to_threshold_a = time_to(a);
    s.time_to_threshold_b = time_to(b);
    if (s.time_to_threshold_a && s.time_to_threshold_b && *s.time_to_threshold_b > 0.0)
        s.time_ratio = *s.time_to_threshold_a / *s.time_to_threshold_b;
    return s;
}

}  // namespace fedsim
