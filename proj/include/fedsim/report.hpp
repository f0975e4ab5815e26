// Machine-readable run reports: a JSONL metrics log (one record per line),
// a one-row CSV summary, and a manifest whose config echo is itself a
// loadable config. Formatting is deterministic so identical runs produce
// byte-identical files.
#pragma once

#include <json.hpp>

#include <string>

#include "fedsim/engine.hpp"

namespace fedsim {

const char* mode_name(Mode mode);

// Stable id derived from the resolved config document.
std::string run_id_for(const nlohmann::json& resolved);

std::string metrics_to_jsonl(const RunResult& result);

inline constexpr const char* kSummaryCsvHeader =
    "run_id,mode,final_accuracy,final_loss,uplink_bytes,downlink_bytes,sim_time_s,"
    "rounds_or_events\n";

std::string summary_csv_row(const std::string& run_id, const RunResult& result);

nlohmann::json make_manifest(const nlohmann::json& resolved_cfg, const std::string& run_id,
                             double wall_seconds);

void write_text_file(const std::string& path, const std::string& content);

}  // namespace fedsim
