// Command-line front end: validate configs, execute single runs, and sweep
// one dotted config key over a value list. Exit codes: 0 success, 1 config
// error, 2 runtime error (including stalled runs, whose partial logs are
// still written).
#include <CLI11.hpp>

#include <chrono>
#include <filesystem>
#include <iostream>
#include <string>
#include <vector>

#include "fedsim/config.hpp"
#include "fedsim/engine.hpp"
#include "fedsim/report.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

void write_outputs(const fs::path& dir, const json& resolved, const fedsim::RunResult& result,
                   double wall_seconds) {
    fs::create_directories(dir);
    const std::string id = fedsim::run_id_for(resolved);
    fedsim::write_text_file((dir / "metrics.jsonl").string(),
                            fedsim::metrics_to_jsonl(result));
    fedsim::write_text_file((dir / "summary.csv").string(),
                            std::string(fedsim::kSummaryCsvHeader) +
                                fedsim::summary_csv_row(id, result));
    fedsim::write_text_file((dir / "manifest.json").string(),
                            fedsim::make_manifest(resolved, id, wall_seconds).dump(2) + "\n");
}

// Runs one resolved config document; returns the exit code.
int execute(const json& resolved, const fs::path& out_dir, std::size_t threads,
            fedsim::RunResult* result_out = nullptr) {
    const fedsim::FederationConfig cfg = fedsim::parse_config(resolved);
    const auto t0 = std::chrono::steady_clock::now();
    auto wall = [&] {
        return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    };
    try {
        fedsim::RunResult result = fedsim::run(cfg, threads);
        write_outputs(out_dir, resolved, result, wall());
        if (result_out) *result_out = std::move(result);
        return 0;
    } catch (const fedsim::StalledRun& e) {
        write_outputs(out_dir, resolved, e.partial(), wall());
        std::cerr << "runtime error: " << e.what() << " (partial log written)\n";
        return 2;
    }
}

std::string sanitize_token(std::string s) {
    for (char& c : s) {
        if (c == '/' || c == '\\' || c == ' ' || c == '"') c = '_';
    }
    return s;
}

json parse_value_token(const std::string& token) {
    try {
        return json::parse(token);
    } catch (const json::parse_error&) {
        return json(token);  // bare string value
    }
}

int do_sweep(const std::string& config_path, const std::string& param,
             const std::vector<std::string>& values, const fs::path& out_dir,
             std::size_t threads) {
    const json resolved = fedsim::resolved_config(fedsim::load_config_file(config_path));

    std::string summary = "param,value,";
    summary += fedsim::kSummaryCsvHeader;
    for (const auto& token : values) {
        json doc = resolved;
        fedsim::set_by_dotted_path(doc, param, parse_value_token(token));
        const json sub_resolved = fedsim::resolved_config(fedsim::parse_config(doc));
        const fs::path sub_dir =
            out_dir / (sanitize_token(param) + "=" + sanitize_token(token));
        fedsim::RunResult result;
        const int code = execute(sub_resolved, sub_dir, threads, &result);
        if (code != 0) return code;
        summary += param + "," + token + "," +
                   fedsim::summary_csv_row(fedsim::run_id_for(sub_resolved), result);
    }
    fs::create_directories(out_dir);
    fedsim::write_text_file((out_dir / "sweep_summary.csv").string(), summary);
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"deterministic federated learning protocol simulator"};
    app.require_subcommand(1);

    std::string config_path;
    std::string out_dir = "out";
    std::string param;
    std::vector<std::string> values;
    std::size_t threads = 1;

    auto* cmd_run = app.add_subcommand("run", "execute one experiment");
    cmd_run->add_option("--config", config_path, "config JSON path")->required();
    cmd_run->add_option("--out", out_dir, "output directory");
    cmd_run->add_option("--threads", threads, "worker threads for client training");

    auto* cmd_sweep = app.add_subcommand("sweep", "run one config key over several values");
    cmd_sweep->add_option("--config", config_path, "config JSON path")->required();
    cmd_sweep->add_option("--param", param, "dotted config key, e.g. compression.topk")
        ->required();
    cmd_sweep->add_option("--values", values, "values to assign")->required()->expected(-1);
    cmd_sweep->add_option("--out", out_dir, "output directory");
    cmd_sweep->add_option("--threads", threads, "worker threads for client training");

    auto* cmd_validate = app.add_subcommand("validate", "check a config and print it resolved");
    cmd_validate->add_option("--config", config_path, "config JSON path")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 1;
    }

    try {
        if (cmd_validate->parsed()) {
            const json resolved = fedsim::resolved_config(fedsim::load_config_file(config_path));
            std::cout << resolved.dump(2) << "\n";
            return 0;
        }
        if (cmd_run->parsed()) {
            const json resolved = fedsim::resolved_config(fedsim::load_config_file(config_path));
            return execute(resolved, out_dir, threads);
        }
        return do_sweep(config_path, param, values, out_dir, threads);
    } catch (const fedsim::ConfigError& e) {
        std::cerr << "config error at '" << e.key() << "': " << e.what() << "\n";
        return 1;
    } catch (const std::exception& e) {
        std::cerr << "runtime error: " << e.what() << "\n";
        return 2;
    }
}
