#include <doctest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include <json.hpp>

namespace fs = std::filesystem;

namespace {

// Binary under test; the ctest environment points this at the build output.
std::string binary() {
    const char* env = std::getenv("LOCORANK_BIN");
    REQUIRE_MESSAGE(env != nullptr, "set LOCORANK_BIN to the locorank executable");
    return env;
}

struct RunOutput {
    int exit_code = -1;
    std::string stdout_text;
};

RunOutput run(const std::string& args) {
    fs::path capture = fs::temp_directory_path() / "locorank_cli_capture.txt";
    std::string cmd = binary() + " " + args + " > " + capture.string() + " 2>/dev/null";
    int rc = std::system(cmd.c_str());
    RunOutput out;
    out.exit_code = WIFEXITED(rc) ? WEXITSTATUS(rc) : -1;
    std::ifstream in(capture);
    std::stringstream buf;
    buf << in.rdbuf();
    out.stdout_text = buf.str();
    return out;
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::stringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

// One tiny cohort shared by every test in this file.
const fs::path& cohort_dir() {
    static fs::path dir = [] {
        fs::path d = fs::temp_directory_path() / "locorank_cli_cohort";
        fs::remove_all(d);
        RunOutput out = run("synth --out-dir " + d.string() +
                            " --impaired 3 --non-impaired 3 --trials-per-block 2 --blocks 1 "
                            "--sample-rate 18 --seed 99");
        REQUIRE(out.exit_code == 0);
        return d;
    }();
    return dir;
}

}  // namespace

TEST_CASE("help and version exit cleanly") {
    CHECK(run("--help").exit_code == 0);
    CHECK(run("run --help").exit_code == 0);
    RunOutput v = run("--version");
    CHECK(v.exit_code == 0);
    CHECK(v.stdout_text.find("0.1.0") != std::string::npos);
}

TEST_CASE("usage errors exit with 2") {
    CHECK(run("").exit_code == 2);
    CHECK(run("frobnicate").exit_code == 2);
    CHECK(run("run --scenario nope --sessions x --questionnaires y").exit_code == 2);
}

TEST_CASE("synth writes sessions, questionnaires, and a manifest") {
    const fs::path& dir = cohort_dir();
    CHECK(fs::exists(dir / "questionnaires.jsonl"));
    CHECK(fs::exists(dir / "manifest.json"));
    std::size_t sessions = 0;
    for (const auto& e : fs::directory_iterator(dir / "sessions")) {
        CHECK(e.path().extension() == ".jsonl");
        ++sessions;
    }
    CHECK(sessions == 6);
    auto manifest = nlohmann::json::parse(slurp(dir / "manifest.json"));
    CHECK(manifest["seed"] == 99);
    CHECK(manifest["command"].get<std::string>().find("synth") == 0);
}

TEST_CASE("validate accepts clean input and flags garbage") {
    const fs::path& dir = cohort_dir();
    RunOutput ok = run("validate " + (dir / "sessions").string() + " --questionnaires " +
                       (dir / "questionnaires.jsonl").string());
    CHECK(ok.exit_code == 0);
    auto report = nlohmann::json::parse(ok.stdout_text);
    CHECK(report["ok"] == true);
    CHECK(report["files"].size() == 7);  // 6 sessions + questionnaires

    fs::path bad = fs::temp_directory_path() / "locorank_cli_bad.jsonl";
    std::ofstream(bad) << "{\"not\": \"a trial\"}\n";
    RunOutput flagged = run("validate " + bad.string());
    CHECK(flagged.exit_code == 1);
    auto bad_report = nlohmann::json::parse(flagged.stdout_text);
    CHECK(bad_report["ok"] == false);
    CHECK(bad_report["files"][0]["issues"].size() == 1);
    fs::remove(bad);
}

TEST_CASE("features prints a csv with a row per trial") {
    RunOutput out = run("features --sessions " + (cohort_dir() / "sessions").string());
    CHECK(out.exit_code == 0);
    CHECK(out.stdout_text.rfind("participant_id,group,technique", 0) == 0);
    std::size_t lines = 0;
    for (char c : out.stdout_text)
        if (c == '\n') ++lines;
    CHECK(lines == 1 + 6 * 12);
}

TEST_CASE("dataset builds the requested scenario") {
    fs::path out = fs::temp_directory_path() / "locorank_cli_dataset";
    fs::remove_all(out);
    RunOutput r = run("dataset --scenario qs --sessions " + (cohort_dir() / "sessions").string() +
                      " --questionnaires " + (cohort_dir() / "questionnaires.jsonl").string() +
                      " --out-dir " + out.string());
    CHECK(r.exit_code == 0);
    auto manifest = nlohmann::json::parse(slurp(out / "dataset.json"));
    CHECK(manifest["scenario"] == "qs");
    CHECK(manifest["calibration"].is_null());
    CHECK(manifest["feature_names"].size() == 38);
    CHECK(manifest.contains("instance_keys"));
    CHECK(manifest.contains("exclusions"));
    fs::remove_all(out);
}

TEST_CASE("run emits the artifact set and identical bytes on a re-run") {
    const fs::path& dir = cohort_dir();
    fs::path out1 = fs::temp_directory_path() / "locorank_cli_run1";
    fs::path out2 = fs::temp_directory_path() / "locorank_cli_run2";
    fs::remove_all(out1);
    fs::remove_all(out2);
    std::string base = "run --scenario cs --calibration ChickenAcceleration --sessions " +
                       (dir / "sessions").string() + " --questionnaires " +
                       (dir / "questionnaires.jsonl").string() +
                       " --no-grid --eval-folds 3 --rank-folds 3 ";
    RunOutput a = run(base + "--threads 2 --out-dir " + out1.string());
    CHECK(a.exit_code == 0);
    CHECK(a.stdout_text.find("scenario") != std::string::npos);
    CHECK(a.stdout_text.find("rank") != std::string::npos);

    RunOutput b = run(base + "--threads 1 --out-dir " + out2.string());
    CHECK(b.exit_code == 0);
    for (const char* name : {"manifest.json", "features.csv", "dataset.csv", "dataset.json",
                             "ranking.json", "report.json", "report.txt"}) {
        CHECK(slurp(out1 / name) == slurp(out2 / name));
        CHECK(!slurp(out1 / name).empty());
    }
    auto manifest = nlohmann::json::parse(slurp(out1 / "manifest.json"));
    CHECK(manifest["input_digests"].size() == 7);
    CHECK(manifest["command"].get<std::string>().find("--threads") == std::string::npos);

    fs::path report = out1 / "report.json";
    RunOutput rendered = run("report --in " + report.string());
    CHECK(rendered.exit_code == 0);
    CHECK(rendered.stdout_text == slurp(out1 / "report.txt"));
    fs::remove_all(out1);
    fs::remove_all(out2);
}

TEST_CASE("rank emits per-participant lists as json") {
    const fs::path& dir = cohort_dir();
    RunOutput out = run("rank --scenario qs --sessions " + (dir / "sessions").string() +
                        " --questionnaires " + (dir / "questionnaires.jsonl").string() +
                        " --rank-folds 3");
    CHECK(out.exit_code == 0);
    auto j = nlohmann::json::parse(out.stdout_text);
    CHECK(j["scenario"] == "qs");
    CHECK(j["list_size"] == 6);
    REQUIRE(j["participants"].size() == 6);
    const auto& first = j["participants"][0];
    CHECK(first["techniques"].size() == 6);
    CHECK(first["techniques"][0].contains("predicted_rank"));
    CHECK(j.contains("rank_accuracy"));
    CHECK(j.contains("mape"));
}

TEST_CASE("missing input files exit with a pipeline error") {
    RunOutput out = run("run --scenario qs --sessions /nonexistent --questionnaires /nope");
    CHECK(out.exit_code == 2);
}

TEST_CASE("malformed sessions exit with a validation error") {
    fs::path bad = fs::temp_directory_path() / "locorank_cli_invalid.jsonl";
    std::ofstream(bad) << "{}\n";
    RunOutput out = run("run --scenario qs --sessions " + bad.string() + " --questionnaires " +
                        (cohort_dir() / "questionnaires.jsonl").string());
    CHECK(out.exit_code == 1);
    fs::remove(bad);
}

TEST_CASE("config file values reach the run") {
    const fs::path& dir = cohort_dir();
    fs::path cfg = fs::temp_directory_path() / "locorank_cli_cfg.json";
    std::ofstream(cfg) << R"({"seed": 123, "rank_folds": 3, "eval_folds": 3})";
    fs::path out = fs::temp_directory_path() / "locorank_cli_cfgrun";
    fs::remove_all(out);
    RunOutput r = run("run --scenario qs --sessions " + (dir / "sessions").string() +
                      " --questionnaires " + (dir / "questionnaires.jsonl").string() +
                      " --config " + cfg.string() + " --no-grid --out-dir " + out.string());
    CHECK(r.exit_code == 0);
    auto manifest = nlohmann::json::parse(slurp(out / "manifest.json"));
    CHECK(manifest["seed"] == 123);
    CHECK(manifest["input_digests"].size() == 8);  // config file is an input too
    fs::remove_all(out);
    fs::remove(cfg);

    std::ofstream(cfg) << R"({"unknown_option": true})";
    RunOutput bad = run("run --scenario qs --sessions " + (dir / "sessions").string() +
                        " --questionnaires " + (dir / "questionnaires.jsonl").string() +
                        " --config " + cfg.string());
    CHECK(bad.exit_code == 2);
    fs::remove(cfg);
}
