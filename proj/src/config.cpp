#include "fedsim/config.hpp"

#include <fstream>
#include <set>

namespace fedsim {
namespace {

using nlohmann::json;

// Tracks consumed keys so anything left over is rejected by name.
class Section {
public:
    Section(const json& obj, std::string prefix) : obj_(obj), prefix_(std::move(prefix)) {
        if (!obj_.is_object()) throw ConfigError(path(""), "must be a JSON object");
    }

    std::string path(const std::string& key) const {
        if (prefix_.empty()) return key;
        return key.empty() ? prefix_ : prefix_ + "." + key;
    }

    const json* find(const std::string& key) {
        used_.insert(key);
        auto it = obj_.find(key);
        if (it == obj_.end() || it->is_null()) return nullptr;
        return &*it;
    }

    bool get_bool(const std::string& key, bool def) {
        const json* v = find(key);
        if (!v) return def;
        if (!v->is_boolean()) throw ConfigError(path(key), "must be true or false");
        return v->get<bool>();
    }

    std::uint64_t get_u64(const std::string& key, std::uint64_t def, std::uint64_t min,
                          std::uint64_t max = UINT64_MAX) {
        const json* v = find(key);
        if (!v) return def;
        if (!v->is_number_integer() && !v->is_number_unsigned())
            throw ConfigError(path(key), "must be an integer");
        if (v->is_number_integer() && v->get<std::int64_t>() < 0)
            throw ConfigError(path(key), "must be nonnegative");
        const auto x = v->get<std::uint64_t>();
        if (x < min || x > max) {
            throw ConfigError(path(key), "must be in [" + std::to_string(min) + ", " +
                                             (max == UINT64_MAX ? "inf" : std::to_string(max)) +
                                             "]");
        }
        return x;
    }

    double get_double(const std::string& key, double def, double min, double max,
                      const std::string& bound_text) {
        const json* v = find(key);
        if (!v) return def;
        if (!v->is_number()) throw ConfigError(path(key), "must be a number");
        const double x = v->get<double>();
        if (!(x >= min && x <= max)) throw ConfigError(path(key), "must be in " + bound_text);
        return x;
    }

    std::string get_choice(const std::string& key, const std::string& def,
                           const std::set<std::string>& allowed) {
        const json* v = find(key);
        if (!v) return def;
        if (!v->is_string()) throw ConfigError(path(key), "must be a string");
        const auto s = v->get<std::string>();
        if (!allowed.count(s)) {
            std::string options;
            for (const auto& a : allowed) options += (options.empty() ? "" : ", ") + a;
            throw ConfigError(path(key), "must be one of: " + options);
        }
        return s;
    }

    std::string get_string(const std::string& key, const std::string& def) {
        const json* v = find(key);
        if (!v) return def;
        if (!v->is_string()) throw ConfigError(path(key), "must be a string");
        return v->get<std::string>();
    }

    // Nested object section; missing objects behave as empty (all defaults).
    Section sub(const std::string& key) {
        const json* v = find(key);
        static const json empty = json::object();
        return Section(v ? *v : empty, path(key));
    }

    void finish() {
        for (const auto& item : obj_.items()) {
            if (!used_.count(item.key())) throw ConfigError(path(item.key()), "unknown key");
        }
    }

private:
    const json& obj_;
    std::string prefix_;
    std::set<std::string> used_;
};

}  // namespace

FederationConfig parse_config(const json& doc) {
    FederationConfig cfg;
    Section root(doc, "");

    cfg.seed = root.get_u64("seed", 1, 0);
    const auto mode = root.get_choice("mode", "sync", {"sync", "async", "centralized"});
    cfg.mode = mode == "sync" ? Mode::kSync : mode == "async" ? Mode::kAsync : Mode::kCentralized;
    cfg.clients = root.get_u64("clients", 10, 1, 100000);
    cfg.rounds = root.get_u64("rounds", 20, 1, 1000000);
    cfg.local_epochs = root.get_u64("local_epochs", 3, 0, 100000);
    cfg.batch_size = root.get_u64("batch_size", 32, 1, 1u << 20);
    cfg.eval_fraction = root.get_double("eval_fraction", 0.2, 1e-9, 0.999999, "(0, 1)");

    {
        Section ds = root.sub("dataset");
        const auto kind = ds.get_choice("kind", "synthetic_blobs",
                                        {"synthetic_blobs", "synthetic_linear", "csv"});
        cfg.dataset.kind = kind == "synthetic_blobs" ? DatasetSpec::Kind::kSyntheticBlobs
                           : kind == "synthetic_linear" ? DatasetSpec::Kind::kSyntheticLinear
                                                        : DatasetSpec::Kind::kCsv;
        cfg.dataset.samples = ds.get_u64("samples", 1000, 2, 10000000);
        cfg.dataset.features = ds.get_u64("features", 16, 1, 100000);
        cfg.dataset.classes = ds.get_u64("classes", 3, 2, 10000);
        cfg.dataset.separation =
            ds.get_double("separation", 3.0, 0.0, 1e9, "[0, 1e9]");
        cfg.dataset.noise_std = ds.get_double("noise_std", 0.05, 0.0, 1e9, "[0, 1e9]");
        cfg.dataset.path = ds.get_string("path", "");
        cfg.dataset.label_column = ds.get_string("label_column", "");
        ds.finish();
        if (cfg.dataset.kind == DatasetSpec::Kind::kCsv && cfg.dataset.path.empty())
            throw ConfigError("dataset.path", "required for csv datasets");
        if (cfg.dataset.kind == DatasetSpec::Kind::kCsv && cfg.dataset.label_column.empty())
            throw ConfigError("dataset.label_column", "required for csv datasets");
    }

    const std::string default_task =
        cfg.dataset.kind == DatasetSpec::Kind::kSyntheticLinear ? "regression"
                                                                : "classification";
    const auto task = root.get_choice("task", default_task, {"classification", "regression"});
    cfg.task = task == "classification" ? Task::kClassification : Task::kRegression;
    if (cfg.dataset.kind == DatasetSpec::Kind::kSyntheticBlobs && cfg.task != Task::kClassification)
        throw ConfigError("task", "synthetic_blobs produces a classification dataset");
    if (cfg.dataset.kind == DatasetSpec::Kind::kSyntheticLinear && cfg.task != Task::kRegression)
        throw ConfigError("task", "synthetic_linear produces a regression dataset");

    {
        Section part = root.sub("partition");
        const auto scheme =
            part.get_choice("scheme", "iid", {"iid", "dirichlet", "label_skew"});
        cfg.scheme = scheme == "iid"         ? PartitionScheme::kIid
                     : scheme == "dirichlet" ? PartitionScheme::kDirichlet
                                             : PartitionScheme::kLabelSkew;
        cfg.dirichlet_alpha = part.get_double("alpha", 0.5, 1e-9, 1e9, "(0, 1e9]");
        cfg.classes_per_client = part.get_u64("classes_per_client", 2, 1, 10000);
        part.finish();
    }

    {
        Section model = root.sub("model");
        if (const json* v = model.find("hidden")) {
            if (!v->is_array()) throw ConfigError("model.hidden", "must be an array of widths");
            cfg.hidden.clear();
            for (const auto& h : *v) {
                if (!h.is_number_integer() && !h.is_number_unsigned())
                    throw ConfigError("model.hidden", "widths must be integers");
                const auto w = h.get<std::int64_t>();
                if (w < 1) throw ConfigError("model.hidden", "widths must be positive");
                cfg.hidden.push_back(static_cast<std::size_t>(w));
            }
        }
        const auto act = model.get_choice("activation", "relu", {"relu", "tanh"});
        cfg.activation = act == "relu" ? Activation::kRelu : Activation::kTanh;
        model.finish();
    }

    {
        Section opt = root.sub("optimizer");
        const auto kind = opt.get_choice("kind", "sgd", {"sgd", "adam"});
        cfg.optimizer.kind = kind == "sgd" ? OptimizerKind::kSgd : OptimizerKind::kAdam;
        cfg.optimizer.learning_rate =
            opt.get_double("learning_rate", 0.01, 1e-12, 1e6, "(0, 1e6]");
        cfg.optimizer.beta1 = opt.get_double("beta1", 0.9, 0.0, 0.999999999, "[0, 1)");
        cfg.optimizer.beta2 = opt.get_double("beta2", 0.999, 0.0, 0.999999999, "[0, 1)");
        cfg.optimizer.epsilon = opt.get_double("epsilon", 1e-8, 1e-300, 1.0, "(0, 1]");
        opt.finish();
    }

    {
        Section pers = root.sub("personalization");
        cfg.personalization.enabled = pers.get_bool("enabled", false);
        cfg.personalization.head_layers = pers.get_u64("head_layers", 1, 1, 1000);
        pers.finish();
        if (cfg.personalization.enabled &&
            cfg.personalization.head_layers > cfg.hidden.size() + 1)
            throw ConfigError("personalization.head_layers",
                              "exceeds the model's layer count");
    }

    {
        Section comp = root.sub("compression");
        if (const json* v = comp.find("topk")) {
            if (!v->is_number()) throw ConfigError("compression.topk", "must be a number");
            const double k = v->get<double>();
            if (!(k > 0.0 && k <= 1.0))
                throw ConfigError("compression.topk", "must be in (0, 1]");
            cfg.compression.topk = k;
        }
        if (const json* v = comp.find("quantize_bits")) {
            if (!v->is_number_integer() && !v->is_number_unsigned())
                throw ConfigError("compression.quantize_bits", "must be an integer");
            const auto b = v->get<std::int64_t>();
            if (b < 1 || b > 16)
                throw ConfigError("compression.quantize_bits", "must be in [1, 16]");
            cfg.compression.quantize_bits = static_cast<std::uint32_t>(b);
        }
        cfg.compression.error_feedback = comp.get_bool("error_feedback", false);
        comp.finish();
        if (cfg.compression.topk && cfg.compression.quantize_bits)
            throw ConfigError("compression.quantize_bits",
                              "the wire format carries one encoding per update; "
                              "combine with compression.topk is not supported");
    }

    {
        Section priv = root.sub("privacy");
        {
            Section dp = priv.sub("dp");
            cfg.privacy.dp.enabled = dp.get_bool("enabled", false);
            cfg.privacy.dp.sigma = dp.get_double("sigma", 0.1, 0.0, 1e9, "[0, 1e9]");
            cfg.privacy.dp.clip_norm =
                dp.get_double("clip_norm", 1.0, 1e-12, 1e9, "(0, 1e9]");
            dp.finish();
        }
        {
            Section pl = priv.sub("paillier");
            cfg.privacy.paillier.enabled = pl.get_bool("enabled", false);
            cfg.privacy.paillier.key_bits =
                static_cast<unsigned>(pl.get_u64("key_bits", 2048, 64, 8192));
            cfg.privacy.paillier.fixed_point_scale =
                pl.get_u64("fixed_point_scale", std::uint64_t{1} << 16, 2);
            pl.finish();
            if (cfg.privacy.paillier.key_bits % 2 != 0)
                throw ConfigError("privacy.paillier.key_bits", "must be even");
        }
        priv.finish();
        if (cfg.privacy.paillier.enabled && cfg.mode == Mode::kAsync)
            throw ConfigError("privacy.paillier.enabled",
                              "asynchronous aggregation would decrypt individual updates; "
                              "use sync mode");
    }

    {
        Section as = root.sub("async");
        cfg.async_cfg.decay = as.get_double("decay", 0.9, 1e-12, 1.0, "(0, 1]");
        cfg.async_cfg.server_rate =
            as.get_double("server_rate", 1.0, 1e-12, 1e6, "(0, 1e6]");
        if (as.find("max_staleness"))
            cfg.async_cfg.max_staleness = as.get_u64("max_staleness", 0, 0);
        if (as.find("max_updates"))
            cfg.async_cfg.max_updates = as.get_u64("max_updates", 1, 1);
        if (const json* v = as.find("max_sim_time")) {
            if (!v->is_number()) throw ConfigError("async.max_sim_time", "must be a number");
            const double t = v->get<double>();
            if (t <= 0.0) throw ConfigError("async.max_sim_time", "must be positive");
            cfg.async_cfg.max_sim_time = t;
        }
        as.finish();
    }

    {
        Section net = root.sub("network");
        cfg.network.link.uplink_bps =
            net.get_double("uplink_bps", 1e6, 1e-9, 1e15, "(0, 1e15]");
        cfg.network.link.downlink_bps =
            net.get_double("downlink_bps", 1e6, 1e-9, 1e15, "(0, 1e15]");
        cfg.network.link.base_latency_s =
            net.get_double("base_latency_s", 0.05, 0.0, 1e6, "[0, 1e6]");
        cfg.network.availability.p_available =
            net.get_double("p_available", 0.5, 0.0, 1.0, "[0, 1]");
        cfg.network.train_seconds_per_sample_epoch = net.get_double(
            "train_seconds_per_sample_epoch", 1e-4, 0.0, 1e6, "[0, 1e6]");
        net.finish();
    }

    root.finish();
    return cfg;
}

FederationConfig load_config_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("config", "cannot open " + path);
    json doc;
    try {
        in >> doc;
    } catch (const json::parse_error& e) {
        throw ConfigError("config", std::string("invalid JSON: ") + e.what());
    }
    return parse_config(doc);
}

nlohmann::json resolved_config(const FederationConfig& cfg) {
    json doc;
    doc["seed"] = cfg.seed;
    doc["mode"] = cfg.mode == Mode::kSync    ? "sync"
                  : cfg.mode == Mode::kAsync ? "async"
                                             : "centralized";
    doc["task"] = cfg.task == Task::kClassification ? "classification" : "regression";
    doc["clients"] = cfg.clients;
    doc["rounds"] = cfg.rounds;
    doc["local_epochs"] = cfg.local_epochs;
    doc["batch_size"] = cfg.batch_size;
    doc["eval_fraction"] = cfg.eval_fraction;

    json& ds = doc["dataset"];
    ds["kind"] = cfg.dataset.kind == DatasetSpec::Kind::kSyntheticBlobs ? "synthetic_blobs"
                 : cfg.dataset.kind == DatasetSpec::Kind::kSyntheticLinear
                     ? "synthetic_linear"
                     : "csv";
    ds["samples"] = cfg.dataset.samples;
    ds["features"] = cfg.dataset.features;
    ds["classes"] = cfg.dataset.classes;
    ds["separation"] = cfg.dataset.separation;
    ds["noise_std"] = cfg.dataset.noise_std;
    ds["path"] = cfg.dataset.path;
    ds["label_column"] = cfg.dataset.label_column;

    json& part = doc["partition"];
    part["scheme"] = cfg.scheme == PartitionScheme::kIid         ? "iid"
                     : cfg.scheme == PartitionScheme::kDirichlet ? "dirichlet"
                                                                 : "label_skew";
    part["alpha"] = cfg.dirichlet_alpha;
    part["classes_per_client"] = cfg.classes_per_client;

    json& model = doc["model"];
    model["hidden"] = cfg.hidden;
    model["activation"] = cfg.activation == Activation::kRelu ? "relu" : "tanh";

    json& opt = doc["optimizer"];
    opt["kind"] = cfg.optimizer.kind == OptimizerKind::kSgd ? "sgd" : "adam";
    opt["learning_rate"] = cfg.optimizer.learning_rate;
    opt["beta1"] = cfg.optimizer.beta1;
    opt["beta2"] = cfg.optimizer.beta2;
    opt["epsilon"] = cfg.optimizer.epsilon;

    json& pers = doc["personalization"];
    pers["enabled"] = cfg.personalization.enabled;
    pers["head_layers"] = cfg.personalization.head_layers;

    json& comp = doc["compression"];
    comp["topk"] = cfg.compression.topk ? json(*cfg.compression.topk) : json(nullptr);
    comp["quantize_bits"] =
        cfg.compression.quantize_bits ? json(*cfg.compression.quantize_bits) : json(nullptr);
    comp["error_feedback"] = cfg.compression.error_feedback;

    json& dp = doc["privacy"]["dp"];
    dp["enabled"] = cfg.privacy.dp.enabled;
    dp["sigma"] = cfg.privacy.dp.sigma;
    dp["clip_norm"] = cfg.privacy.dp.clip_norm;
    json& pl = doc["privacy"]["paillier"];
    pl["enabled"] = cfg.privacy.paillier.enabled;
    pl["key_bits"] = cfg.privacy.paillier.key_bits;
    pl["fixed_point_scale"] = cfg.privacy.paillier.fixed_point_scale;

    json& as = doc["async"];
    as["decay"] = cfg.async_cfg.decay;
    as["server_rate"] = cfg.async_cfg.server_rate;
    as["max_staleness"] =
        cfg.async_cfg.max_staleness ? json(*cfg.async_cfg.max_staleness) : json(nullptr);
    as["max_updates"] =
        cfg.async_cfg.max_updates ? json(*cfg.async_cfg.max_updates) : json(nullptr);
    as["max_sim_time"] =
        cfg.async_cfg.max_sim_time ? json(*cfg.async_cfg.max_sim_time) : json(nullptr);

    json& net = doc["network"];
    net["uplink_bps"] = cfg.network.link.uplink_bps;
    net["downlink_bps"] = cfg.network.link.downlink_bps;
    net["base_latency_s"] = cfg.network.link.base_latency_s;
    net["p_available"] = cfg.network.availability.p_available;
    net["train_seconds_per_sample_epoch"] = cfg.network.train_seconds_per_sample_epoch;

    return doc;
}

void set_by_dotted_path(nlohmann::json& doc, const std::string& path,
                        const nlohmann::json& value) {
    if (path.empty()) throw ConfigError(path, "empty sweep key");
    json* node = &doc;
    std::size_t start = 0;
    while (true) {
        const std::size_t dot = path.find('.', start);
        const std::string key = path.substr(start, dot - start);
        if (!node->is_object() || !node->contains(key))
            throw ConfigError(path, "unknown key");
        node = &(*node)[key];
        if (dot == std::string::npos) break;
        start = dot + 1;
    }
    *node = value;
}

}  // namespace fedsim
