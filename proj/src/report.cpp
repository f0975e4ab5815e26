#include "fedsim/report.hpp"

#include <cstdio>
#include <fstream>

#include "fedsim/rng.hpp"

namespace fedsim {

using nlohmann::json;

const char* mode_name(Mode mode) {
    switch (mode) {
        case Mode::kSync:
            return "sync";
        case Mode::kAsync:
            return "async";
        case Mode::kCentralized:
            return "centralized";
    }
    return "unknown";
}

std::string run_id_for(const json& resolved) {
    const std::string dump = resolved.dump();
    std::uint64_t h = 0x52554E49Du;
    for (unsigned char c : dump) h = derive_seed(h, c);
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
    return buf;
}

std::string metrics_to_jsonl(const RunResult& result) {
    std::string out;
    const char* score_key = result.task == Task::kClassification ? "accuracy" : "mse";
    for (const auto& rec : result.records) {
        json line;
        line["index"] = rec.index;
        line["sim_time_s"] = rec.sim_time_s;
        line["loss"] = rec.loss;
        line[score_key] = rec.score;
        if (rec.personal_accuracy) line["personal_accuracy"] = *rec.personal_accuracy;
        line["participants"] = rec.participants;
        line["uplink_bytes"] = rec.uplink_bytes;
        line["downlink_bytes"] = rec.downlink_bytes;
        line["mean_staleness"] = rec.mean_staleness;
        line["mean_weight"] = rec.mean_weight;
        out += line.dump();
        out += '\n';
    }
    return out;
}

std::string summary_csv_row(const std::string& run_id, const RunResult& result) {
    // json serialization gives shortest-roundtrip doubles, deterministic.
    auto num = [](double v) { return json(v).dump(); };
    std::string row = run_id;
    row += ',';
    row += mode_name(result.mode);
    row += ',';
    row += num(result.final_score());
    row += ',';
    row += num(result.final_loss());
    row += ',';
    row += std::to_string(result.uplink_bytes);
    row += ',';
    row += std::to_string(result.downlink_bytes);
    row += ',';
    row += num(result.sim_time_s);
    row += ',';
    row += std::to_string(result.records.size());
    row += '\n';
    return row;
}

json make_manifest(const json& resolved_cfg, const std::string& run_id, double wall_seconds) {
    json m;
    m["run_id"] = run_id;
    m["config"] = resolved_cfg;
    m["artifacts"]["metrics_jsonl"] = "metrics.jsonl";
    m["artifacts"]["summary_csv"] = "summary.csv";
    m["wall_seconds"] = wall_seconds;
    m["tool_version"] = "0.1.0";
    return m;
}

void write_text_file(const std::string& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw ProtocolError("cannot write " + path);
    out << content;
}

}  // namespace fedsim
