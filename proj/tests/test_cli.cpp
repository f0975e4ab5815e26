#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <json.hpp>
#include <sys/wait.h>
#include <unistd.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

struct CliResult {
    int code = -1;
    std::string out;
    std::string err;
};

fs::path scratch_root() {
    static const fs::path root = [] {
        fs::path p = fs::temp_directory_path() /
                     ("fedsim_cli_" + std::to_string(static_cast<long>(::getpid())));
        fs::create_directories(p);
        return p;
    }();
    return root;
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    REQUIRE_MESSAGE(in.good(), "cannot read " << p.string());
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

void spit(const fs::path& p, const std::string& s) {
    std::ofstream out(p, std::ios::binary);
    out << s;
}

CliResult cli(const std::string& args) {
    static int counter = 0;
    const fs::path out_file = scratch_root() / ("stdout_" + std::to_string(counter) + ".txt");
    const fs::path err_file = scratch_root() / ("stderr_" + std::to_string(counter) + ".txt");
    ++counter;
    const std::string cmd = std::string("\"") + FEDSIM_CLI_PATH + "\" " + args + " > \"" +
                            out_file.string() + "\" 2> \"" + err_file.string() + "\"";
    const int raw = std::system(cmd.c_str());
    CliResult r;
    r.code = WIFEXITED(raw) ? WEXITSTATUS(raw) : -1;
    r.out = slurp(out_file);
    r.err = slurp(err_file);
    return r;
}

json base_config() {
    json cfg;
    cfg["seed"] = 9;
    cfg["clients"] = 3;
    cfg["rounds"] = 4;
    cfg["local_epochs"] = 1;
    cfg["dataset"] = {{"kind", "synthetic_blobs"},
                      {"samples", 200},
                      {"features", 5},
                      {"classes", 3}};
    cfg["model"] = {{"hidden", json::array()}};
    cfg["optimizer"] = {{"learning_rate", 0.1}};
    cfg["network"] = {{"p_available", 1.0}};
    return cfg;
}

fs::path write_config(const json& cfg, const std::string& name) {
    const fs::path p = scratch_root() / name;
    spit(p, cfg.dump(2) + "\n");
    return p;
}

std::vector<std::string> lines_of(const std::string& text) {
    std::vector<std::string> lines;
    std::string cur;
    for (char c : text) {
        if (c == '\n') {
            lines.push_back(cur);
            cur.clear();
        } else {
            cur += c;
        }
    }
    if (!cur.empty()) lines.push_back(cur);
    return lines;
}

std::vector<std::string> split_csv(const std::string& line) {
    std::vector<std::string> cells;
    std::string cur;
    for (char c : line) {
        if (c == ',') {
            cells.push_back(cur);
            cur.clear();
        } else {
            cur += c;
        }
    }
    cells.push_back(cur);
    return cells;
}

}  // namespace

TEST_CASE("run writes metrics, summary, and manifest") {
    const fs::path cfg_path = write_config(base_config(), "run_basic.json");
    const fs::path out = scratch_root() / "run_basic_out";
    const CliResult r =
        cli("run --config \"" + cfg_path.string() + "\" --out \"" + out.string() + "\"");
    REQUIRE_MESSAGE(r.code == 0, r.err);

    const auto metric_lines = lines_of(slurp(out / "metrics.jsonl"));
    REQUIRE(metric_lines.size() == 4);
    for (std::size_t i = 0; i < metric_lines.size(); ++i) {
        const json line = json::parse(metric_lines[i]);
        CHECK(line["index"] == i + 1);
        CHECK(line.contains("accuracy"));
        CHECK(line.contains("loss"));
        CHECK(line["participants"] == 3);
    }

    const auto summary_lines = lines_of(slurp(out / "summary.csv"));
    REQUIRE(summary_lines.size() == 2);
    CHECK(summary_lines[0] ==
          "run_id,mode,final_accuracy,final_loss,uplink_bytes,downlink_bytes,sim_time_s,"
          "rounds_or_events");
    const auto cells = split_csv(summary_lines[1]);
    REQUIRE(cells.size() == 8);
    CHECK(cells[1] == "sync");
    CHECK(cells[7] == "4");

    const json manifest = json::parse(slurp(out / "manifest.json"));
    CHECK(manifest["run_id"] == cells[0]);
    CHECK(manifest["config"]["rounds"] == 4);
    CHECK(manifest["artifacts"]["metrics_jsonl"] == "metrics.jsonl");
    // The config echo is itself a valid config.
    const fs::path echo = write_config(manifest["config"], "run_basic_echo.json");
    CHECK(cli("validate --config \"" + echo.string() + "\"").code == 0);
}

TEST_CASE("reruns and thread counts leave the metrics log byte-identical") {
    const fs::path cfg_path = write_config(base_config(), "rerun.json");
    const fs::path out1 = scratch_root() / "rerun_1";
    const fs::path out2 = scratch_root() / "rerun_2";
    const fs::path out3 = scratch_root() / "rerun_threads";
    REQUIRE(cli("run --config \"" + cfg_path.string() + "\" --out \"" + out1.string() + "\"")
                .code == 0);
    REQUIRE(cli("run --config \"" + cfg_path.string() + "\" --out \"" + out2.string() + "\"")
                .code == 0);
    REQUIRE(cli("run --config \"" + cfg_path.string() + "\" --out \"" + out3.string() +
                "\" --threads 4")
                .code == 0);

    const std::string m1 = slurp(out1 / "metrics.jsonl");
    CHECK(m1 == slurp(out2 / "metrics.jsonl"));
    CHECK(m1 == slurp(out3 / "metrics.jsonl"));
    CHECK(slurp(out1 / "summary.csv") == slurp(out2 / "summary.csv"));
    CHECK(slurp(out1 / "summary.csv") == slurp(out3 / "summary.csv"));
}

TEST_CASE("config errors exit 1 and name the offending key") {
    SUBCASE("rounds below range") {
        json cfg = base_config();
        cfg["rounds"] = 0;
        const CliResult r = cli("run --config \"" +
                                write_config(cfg, "bad_rounds.json").string() + "\" --out \"" +
                                (scratch_root() / "bad_rounds_out").string() + "\"");
        CHECK(r.code == 1);
        CHECK(r.err.find("config error at 'rounds'") != std::string::npos);
    }
    SUBCASE("decay outside its interval") {
        json cfg = base_config();
        cfg["async"] = {{"decay", 1.5}};
        const CliResult r = cli("validate --config \"" +
                                write_config(cfg, "bad_decay.json").string() + "\"");
        CHECK(r.code == 1);
        CHECK(r.err.find("async.decay") != std::string::npos);
        CHECK(r.err.find("(0, 1]") != std::string::npos);
    }
    SUBCASE("unknown key") {
        json cfg = base_config();
        cfg["roundz"] = 3;
        const CliResult r = cli("validate --config \"" +
                                write_config(cfg, "bad_key.json").string() + "\"");
        CHECK(r.code == 1);
        CHECK(r.err.find("roundz") != std::string::npos);
    }
    SUBCASE("missing config file") {
        const CliResult r =
            cli("validate --config \"" + (scratch_root() / "nope.json").string() + "\"");
        CHECK(r.code == 1);
        CHECK(r.err.find("config error") != std::string::npos);
    }
}

TEST_CASE("validate resolves defaults and is a fixed point") {
    json cfg;
    cfg["seed"] = 5;
    const fs::path cfg_path = write_config(cfg, "minimal.json");
    const CliResult r = cli("validate --config \"" + cfg_path.string() + "\"");
    REQUIRE_MESSAGE(r.code == 0, r.err);

    const json resolved = json::parse(r.out);
    CHECK(resolved["seed"] == 5);
    CHECK(resolved["clients"] == 10);
    CHECK(resolved["rounds"] == 20);
    CHECK(resolved["local_epochs"] == 3);
    CHECK(resolved["batch_size"] == 32);
    CHECK(resolved["mode"] == "sync");
    CHECK(resolved["eval_fraction"] == 0.2);
    CHECK(resolved["async"]["decay"] == 0.9);
    CHECK(resolved["async"]["server_rate"] == 1.0);
    CHECK(resolved["optimizer"]["kind"] == "sgd");
    CHECK(resolved["optimizer"]["learning_rate"] == 0.01);
    CHECK(resolved["network"]["p_available"] == 0.5);

    // Resolving the resolved document changes nothing.
    const fs::path again = scratch_root() / "minimal_resolved.json";
    spit(again, r.out);
    const CliResult r2 = cli("validate --config \"" + again.string() + "\"");
    REQUIRE(r2.code == 0);
    CHECK(r2.out == r.out);
}

TEST_CASE("sweeping the sparsity fraction orders uplink bytes") {
    json cfg = base_config();
    cfg["rounds"] = 3;
    const fs::path cfg_path = write_config(cfg, "sweep.json");
    const fs::path out = scratch_root() / "sweep_out";
    const CliResult r = cli("sweep --config \"" + cfg_path.string() +
                            "\" --param compression.topk --values 0.1 0.5 1.0 --out \"" +
                            out.string() + "\"");
    REQUIRE_MESSAGE(r.code == 0, r.err);

    const auto lines = lines_of(slurp(out / "sweep_summary.csv"));
    REQUIRE(lines.size() == 4);
    CHECK(lines[0] ==
          "param,value,run_id,mode,final_accuracy,final_loss,uplink_bytes,downlink_bytes,"
          "sim_time_s,rounds_or_events");
    std::vector<unsigned long long> uplink;
    for (std::size_t i = 1; i < lines.size(); ++i) {
        const auto cells = split_csv(lines[i]);
        REQUIRE(cells.size() == 10);
        CHECK(cells[0] == "compression.topk");
        uplink.push_back(std::stoull(cells[6]));
    }
    CHECK(uplink[0] < uplink[1]);
    CHECK(uplink[1] < uplink[2]);

    // Each setting also leaves its own full run directory behind.
    for (const char* v : {"0.1", "0.5", "1.0"}) {
        const fs::path sub = out / (std::string("compression.topk=") + v);
        CHECK(fs::exists(sub / "metrics.jsonl"));
        CHECK(fs::exists(sub / "manifest.json"));
    }
}

TEST_CASE("a run that never delivers exits 2 but still writes partial logs") {
    json cfg = base_config();
    cfg["network"]["p_available"] = 0.0;
    const fs::path cfg_path = write_config(cfg, "stalled.json");
    const fs::path out = scratch_root() / "stalled_out";
    const CliResult r =
        cli("run --config \"" + cfg_path.string() + "\" --out \"" + out.string() + "\"");
    CHECK(r.code == 2);
    CHECK(r.err.find("partial") != std::string::npos);

    const auto metric_lines = lines_of(slurp(out / "metrics.jsonl"));
    CHECK(metric_lines.size() == 4);
    for (const auto& text : metric_lines) {
        const json line = json::parse(text);
        CHECK(line["participants"] == 0);
        CHECK(line["uplink_bytes"] == 0);
    }
    const auto summary_lines = lines_of(slurp(out / "summary.csv"));
    REQUIRE(summary_lines.size() == 2);
    CHECK(split_csv(summary_lines[1])[4] == "0");  // uplink_bytes
}
