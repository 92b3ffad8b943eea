#include "cli.hpp"

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "locorank/dataset.hpp"
#include "locorank/errors.hpp"
#include "locorank/evaluation.hpp"
#include "locorank/learners.hpp"
#include "locorank/metrics.hpp"
#include "locorank/pipeline.hpp"
#include "locorank/questionnaire.hpp"
#include "locorank/session.hpp"
#include "locorank/synth.hpp"
#include "locorank/util.hpp"

namespace fs = std::filesystem;

namespace locorank {

namespace {

std::vector<std::string> session_files(const std::string& path) {
    std::vector<std::string> files;
    if (fs::is_directory(path)) {
        for (const auto& entry : fs::directory_iterator(path))
            if (entry.is_regular_file() && entry.path().extension() == ".jsonl")
                files.push_back(entry.path().generic_string());
        std::sort(files.begin(), files.end());
    } else {
        files.push_back(path);
    }
    return files;
}

void write_or_print(const std::string& out, const std::string& text) {
    if (out.empty()) {
        std::cout << text;
        return;
    }
    std::ofstream f(out, std::ios::binary);
    if (!f) throw Error("cannot write " + out);
    f << text;
}

struct ValidateArgs {
    std::vector<std::string> paths;
    std::string questionnaires;
};

int cmd_validate(const ValidateArgs& args) {
    nlohmann::json files = nlohmann::json::array();
    bool ok = true;
    for (const std::string& root : args.paths) {
        for (const std::string& file : session_files(root)) {
            ParseReport report;
            nlohmann::json issues = nlohmann::json::array();
            try {
                parse_session_log(file, &report);
            } catch (const Error& e) {
                report.issues.push_back(ParseIssue{0, "", e.what()});
            }
            for (const ParseIssue& issue : report.issues)
                issues.push_back(nlohmann::json{{"line", issue.line},
                                                {"field", issue.field},
                                                {"message", issue.message}});
            ok = ok && report.issues.empty();
            files.push_back(nlohmann::json{{"path", file},
                                           {"lines", report.lines},
                                           {"trials", report.trials},
                                           {"issues", std::move(issues)}});
        }
    }
    if (!args.questionnaires.empty()) {
        nlohmann::json issues = nlohmann::json::array();
        std::size_t responses = 0;
        try {
            responses = parse_questionnaires(args.questionnaires).responses.size();
        } catch (const MalformedRecord& e) {
            issues.push_back(nlohmann::json{
                {"line", e.line()}, {"field", e.field()}, {"message", e.what()}});
        } catch (const InvariantViolation& e) {
            issues.push_back(nlohmann::json{
                {"line", e.line()}, {"field", e.field()}, {"message", e.what()}});
        } catch (const Error& e) {
            issues.push_back(nlohmann::json{{"line", 0}, {"field", ""}, {"message", e.what()}});
        }
        ok = ok && issues.empty();
        files.push_back(nlohmann::json{{"path", args.questionnaires},
                                       {"responses", responses},
                                       {"issues", std::move(issues)}});
    }
    nlohmann::json out = {{"ok", ok}, {"files", std::move(files)}};
    std::cout << out.dump(2) << '\n';
    return ok ? 0 : 1;
}

struct FeatureArgs {
    std::string sessions;
    std::string out;
    SubmovementParams submovement;
};

int cmd_features(const FeatureArgs& args) {
    std::vector<SessionLog> sessions = load_sessions(args.sessions);
    write_or_print(args.out, metrics_csv(sessions, args.submovement));
    return 0;
}

struct DatasetArgs {
    std::string scenario = "qs";
    std::string calibration = "ChickenAcceleration";
    std::string sessions;
    std::string questionnaires;
    std::string out_dir = ".";
};

int cmd_dataset(const DatasetArgs& args) {
    Scenario scenario = scenario_from_name(args.scenario);
    auto tech = technique_from_name(args.calibration);
    if (!tech) throw ConfigInvalid("unknown calibration technique '" + args.calibration + "'");
    std::vector<SessionLog> sessions = load_sessions(args.sessions);
    QuestionnaireSet questionnaires = parse_questionnaires(args.questionnaires);
    Dataset ds;
    switch (scenario) {
        case Scenario::QS: ds = build_qs(sessions, questionnaires); break;
        case Scenario::CS: ds = build_cs(sessions, questionnaires, *tech); break;
        case Scenario::QCS: ds = build_qcs(sessions, questionnaires, *tech); break;
    }
    fs::create_directories(args.out_dir);
    fs::path dir(args.out_dir);
    write_dataset_csv(ds, (dir / "dataset.csv").string(), (dir / "dataset.json").string());
    return 0;
}

struct RunArgs {
    std::string scenario;
    std::string calibration = "ChickenAcceleration";
    std::string learner;
    std::string config_file;
    std::string sessions;
    std::string questionnaires;
    std::string out_dir = "out";
    std::uint64_t seed = 42;
    int threads = 0;
    int eval_folds = -1;
    int rank_folds = -1;
    int grid_folds = -1;
    bool no_grid = false;
    bool no_rfe = false;
    bool no_eval = false;
    bool no_rank = false;
    bool learner_given = false;
    bool seed_given = false;
};

RunConfig assemble_config(const RunArgs& args, Scenario scenario, TechniqueId calibration) {
    RunConfig config = make_run_config(scenario);
    if (!args.config_file.empty()) apply_config_file(config, args.config_file);
    config.scenario = scenario;
    config.calibration = calibration;
    if (args.learner_given) config.learner = learner_from_name(args.learner);
    if (args.seed_given) config.seed = args.seed;
    config.threads = args.threads;
    if (args.no_grid) config.run_grid = false;
    if (args.no_rfe) config.use_rfe = false;
    if (args.no_eval) config.do_eval = false;
    if (args.no_rank) config.do_rank = false;
    if (args.eval_folds > 0) config.eval_folds = args.eval_folds;
    if (args.rank_folds > 0) config.rank_folds = args.rank_folds;
    if (args.grid_folds > 0) config.grid_folds = args.grid_folds;
    return config;
}

std::vector<std::pair<std::string, std::string>> collect_input_digests(const RunArgs& args) {
    std::vector<std::pair<std::string, std::string>> digests;
    for (const std::string& file : session_files(args.sessions))
        digests.emplace_back(file, file_digest(file));
    digests.emplace_back(args.questionnaires, file_digest(args.questionnaires));
    if (!args.config_file.empty())
        digests.emplace_back(args.config_file, file_digest(args.config_file));
    return digests;
}

std::string canonical_command(const std::string& sub, const RunConfig& config) {
    std::string cmd = sub + " --scenario " + scenario_name(config.scenario);
    if (config.scenario != Scenario::QS)
        cmd += " --calibration " + technique_name(config.calibration);
    cmd += " --learner " + learner_name(config.learner);
    cmd += " --seed " + std::to_string(config.seed);
    return cmd;
}

int cmd_run(const RunArgs& args) {
    Scenario scenario = scenario_from_name(args.scenario);
    bool all = args.calibration == "all" && scenario != Scenario::QS;
    std::vector<TechniqueId> calibrations;
    if (all) {
        calibrations.assign(kAllTechniques.begin(), kAllTechniques.end());
    } else {
        auto tech = technique_from_name(args.calibration == "all" ? "ChickenAcceleration"
                                                                  : args.calibration);
        if (!tech)
            throw ConfigInvalid("unknown calibration technique '" + args.calibration + "'");
        calibrations.push_back(*tech);
    }

    std::vector<SessionLog> sessions = load_sessions(args.sessions);
    QuestionnaireSet questionnaires = parse_questionnaires(args.questionnaires);
    std::vector<std::pair<std::string, std::string>> inputs = collect_input_digests(args);

    for (TechniqueId calibration : calibrations) {
        RunConfig config = assemble_config(args, scenario, calibration);
        RunArtifacts artifacts = run_pipeline(sessions, questionnaires, config);
        fs::path dir(args.out_dir);
        if (all) dir /= technique_name(calibration);
        write_run_outputs(artifacts, config, sessions, dir.string(),
                          canonical_command("run", config), inputs);
        if (all) std::cout << "== " << technique_name(calibration) << " ==\n";
        std::cout << render_report_text(evaluation_report_json(artifacts, config));
        if (all) std::cout << '\n';
    }
    return 0;
}

nlohmann::json ranking_json(const RunArtifacts& artifacts, const RunConfig& config) {
    nlohmann::json participants = nlohmann::json::array();
    for (const RankedList& list : artifacts.ranking.participants) {
        nlohmann::json techniques = nlohmann::json::array();
        for (const RankedTechnique& rt : list.techniques)
            techniques.push_back(nlohmann::json{{"technique", technique_name(rt.technique)},
                                                {"predicted_time", rt.predicted_time},
                                                {"actual_time", rt.actual_time},
                                                {"predicted_rank", rt.predicted_rank},
                                                {"actual_rank", rt.actual_rank}});
        participants.push_back(nlohmann::json{{"participant_id", list.participant_id},
                                              {"impaired", list.impaired},
                                              {"complete", list.complete},
                                              {"techniques", std::move(techniques)}});
    }
    auto slice = [](const RankSlice& s, bool accuracy) {
        return nlohmann::json{{"by_rank", accuracy ? s.accuracy_by_rank : s.mape_by_rank},
                              {"overall", accuracy ? s.overall_accuracy : s.overall_mape},
                              {"participants", s.participants}};
    };
    const RankReport& r = artifacts.report;
    nlohmann::json j;
    j["scenario"] = scenario_name(config.scenario);
    if (config.scenario == Scenario::QS)
        j["calibration"] = nullptr;
    else
        j["calibration"] = technique_name(config.calibration);
    j["list_size"] = artifacts.ranking.list_size;
    j["participants"] = std::move(participants);
    j["rank_accuracy"] = {{"by_rank", r.all.accuracy_by_rank},
                          {"by_group",
                           {{"impaired", slice(r.impaired, true)},
                            {"non_impaired", slice(r.non_impaired, true)}}},
                          {"overall", r.all.overall_accuracy}};
    j["mape"] = {{"by_rank", r.all.mape_by_rank},
                 {"by_group",
                  {{"impaired", slice(r.impaired, false)},
                   {"non_impaired", slice(r.non_impaired, false)}}},
                 {"overall", r.all.overall_mape}};
    return j;
}

struct RankArgs {
    RunArgs run;
    std::string out;
};

int cmd_rank(const RankArgs& args) {
    Scenario scenario = scenario_from_name(args.run.scenario);
    auto tech = technique_from_name(args.run.calibration);
    if (!tech)
        throw ConfigInvalid("unknown calibration technique '" + args.run.calibration + "'");
    RunConfig config = assemble_config(args.run, scenario, *tech);
    config.do_eval = false;
    config.run_grid = false;
    config.do_rank = true;
    std::vector<SessionLog> sessions = load_sessions(args.run.sessions);
    QuestionnaireSet questionnaires = parse_questionnaires(args.run.questionnaires);
    RunArtifacts artifacts = run_pipeline(sessions, questionnaires, config);
    write_or_print(args.out, ranking_json(artifacts, config).dump(2) + "\n");
    return 0;
}

struct SynthArgs {
    std::string out_dir;
    CohortConfig config;
    std::string demands_file;
    std::string emit_demands;
};

int cmd_synth(const SynthArgs& args) {
    DemandTable demands =
        args.demands_file.empty() ? default_demands() : load_demands(args.demands_file);
    if (!args.emit_demands.empty()) write_demands(demands, args.emit_demands);
    SynthCohort cohort = generate_cohort(args.config, demands);
    write_cohort(cohort, args.out_dir);

    nlohmann::json manifest;
    std::string cmd = "synth --impaired " + std::to_string(args.config.n_impaired) +
                      " --non-impaired " + std::to_string(args.config.n_non_impaired) +
                      " --noise-sigma " + format_double(args.config.noise_sigma) +
                      " --sample-rate " + format_double(args.config.sample_rate) + " --seed " +
                      std::to_string(args.config.seed);
    manifest["command"] = cmd;
    nlohmann::json inputs = nlohmann::json::array();
    if (!args.demands_file.empty())
        inputs.push_back(nlohmann::json{{"path", args.demands_file},
                                        {"digest", file_digest(args.demands_file)}});
    manifest["input_digests"] = std::move(inputs);
    nlohmann::json cohort_cfg = {{"n_impaired", args.config.n_impaired},
                                 {"n_non_impaired", args.config.n_non_impaired},
                                 {"trials_per_block", args.config.trials_per_block},
                                 {"blocks", args.config.blocks},
                                 {"noise_sigma", args.config.noise_sigma},
                                 {"sample_rate", args.config.sample_rate},
                                 {"seed", args.config.seed}};
    manifest["config_digest"] = text_digest(cohort_cfg.dump());
    manifest["seed"] = args.config.seed;
    manifest["tool_version"] = kToolVersion;
    nlohmann::json outputs = nlohmann::json::array();
    for (const SessionLog& session : cohort.sessions)
        outputs.push_back("sessions/" + session.participant_id + ".jsonl");
    outputs.push_back("questionnaires.jsonl");
    manifest["output_paths"] = std::move(outputs);
    manifest["notes"] = nlohmann::json::array();
    std::ofstream out(fs::path(args.out_dir) / "manifest.json", std::ios::binary);
    if (!out) throw Error("cannot write synth manifest");
    out << manifest.dump(2) << '\n';
    return 0;
}

int cmd_report(const std::string& in) {
    std::ifstream f(in);
    if (!f) throw Error("cannot open report: " + in);
    std::ostringstream buf;
    buf << f.rdbuf();
    std::cout << render_report_text(buf.str());
    return 0;
}

}  // namespace

int run_cli(int argc, char** argv) {
    CLI::App app{"ability-based ranking of VR locomotion techniques", "locorank"};
    app.set_version_flag("--version", std::string("locorank ") + kToolVersion);
    app.require_subcommand(1);

    ValidateArgs validate_args;
    CLI::App* validate = app.add_subcommand("validate", "check session logs for violations");
    validate->add_option("paths", validate_args.paths, "session files or directories")
        ->required();
    validate->add_option("--questionnaires", validate_args.questionnaires,
                         "questionnaire file to check too");

    FeatureArgs feature_args;
    CLI::App* features = app.add_subcommand("features", "extract per-trial metrics as CSV");
    features->add_option("--sessions", feature_args.sessions, "session file or directory")
        ->required();
    features->add_option("--out", feature_args.out, "output file (default stdout)");
    features->add_option("--peak-fraction", feature_args.submovement.peak_fraction,
                         "submovement peak fraction");
    features->add_option("--min-dip-samples", feature_args.submovement.min_dip_samples,
                         "submovement minimum dip length");

    DatasetArgs dataset_args;
    CLI::App* dataset = app.add_subcommand("dataset", "build a modeling dataset");
    dataset->add_option("--scenario", dataset_args.scenario, "qs, cs, or qcs")
        ->required()
        ->check(CLI::IsMember({"qs", "cs", "qcs"}));
    dataset->add_option("--calibration", dataset_args.calibration,
                        "calibration technique (cs/qcs)");
    dataset->add_option("--sessions", dataset_args.sessions, "session file or directory")
        ->required();
    dataset->add_option("--questionnaires", dataset_args.questionnaires, "questionnaire file")
        ->required();
    dataset->add_option("--out-dir", dataset_args.out_dir, "output directory");

    auto add_run_options = [](CLI::App* cmd, RunArgs& args, bool calibration_all) {
        cmd->add_option("--scenario", args.scenario, "qs, cs, or qcs")
            ->required()
            ->check(CLI::IsMember({"qs", "cs", "qcs"}));
        cmd->add_option("--calibration", args.calibration,
                        calibration_all ? "calibration technique, or 'all'"
                                        : "calibration technique");
        cmd->add_option("--learner", args.learner, "enet or forest")
            ->check(CLI::IsMember({"enet", "forest"}));
        cmd->add_option("--config", args.config_file, "JSON config overrides");
        cmd->add_option("--sessions", args.sessions, "session file or directory")->required();
        cmd->add_option("--questionnaires", args.questionnaires, "questionnaire file")
            ->required();
        cmd->add_option("--seed", args.seed, "run seed");
        cmd->add_option("--threads", args.threads, "worker bound; never changes results");
        cmd->add_option("--eval-folds", args.eval_folds, "evaluation fold count");
        cmd->add_option("--rank-folds", args.rank_folds, "ranking fold count");
        cmd->add_option("--grid-folds", args.grid_folds, "grid search fold count");
        cmd->add_flag("--no-grid", args.no_grid, "skip hyperparameter search");
        cmd->add_flag("--no-rfe", args.no_rfe, "skip feature selection");
    };

    RunArgs run_args;
    CLI::App* run = app.add_subcommand("run", "full pipeline: dataset, selection, CV, ranking");
    add_run_options(run, run_args, true);
    run->add_option("--out-dir", run_args.out_dir, "output directory");
    run->add_flag("--no-eval", run_args.no_eval, "skip the evaluation CV");
    run->add_flag("--no-rank", run_args.no_rank, "skip ranking");

    RankArgs rank_args;
    CLI::App* rank = app.add_subcommand("rank", "per-participant ranked technique lists");
    add_run_options(rank, rank_args.run, false);
    rank->add_option("--out", rank_args.out, "output file (default stdout)");

    SynthArgs synth_args;
    CLI::App* synth = app.add_subcommand("synth", "generate a synthetic cohort");
    synth->add_option("--out-dir", synth_args.out_dir, "output directory")->required();
    synth->add_option("--impaired", synth_args.config.n_impaired, "impaired participants");
    synth->add_option("--non-impaired", synth_args.config.n_non_impaired,
                      "non-impaired participants");
    synth->add_option("--trials-per-block", synth_args.config.trials_per_block,
                      "trials per block (1..6)");
    synth->add_option("--blocks", synth_args.config.blocks, "blocks per technique (1..2)");
    synth->add_option("--noise-sigma", synth_args.config.noise_sigma,
                      "lognormal sigma on trial times");
    synth->add_option("--sample-rate", synth_args.config.sample_rate, "telemetry Hz");
    synth->add_option("--seed", synth_args.config.seed, "cohort seed");
    synth->add_option("--demands", synth_args.demands_file, "demand table JSON");
    synth->add_option("--emit-demands", synth_args.emit_demands,
                      "write the demand table in use to this path");

    std::string report_in;
    CLI::App* report = app.add_subcommand("report", "render a report.json as text");
    report->add_option("--in", report_in, "report.json path")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        int code = app.exit(e);
        return code == 0 ? 0 : 2;
    }

    run_args.learner_given = run->count("--learner") > 0;
    run_args.seed_given = run->count("--seed") > 0;
    rank_args.run.learner_given = rank->count("--learner") > 0;
    rank_args.run.seed_given = rank->count("--seed") > 0;

    try {
        if (*validate) return cmd_validate(validate_args);
        if (*features) return cmd_features(feature_args);
        if (*dataset) return cmd_dataset(dataset_args);
        if (*run) return cmd_run(run_args);
        if (*rank) return cmd_rank(rank_args);
        if (*synth) return cmd_synth(synth_args);
        if (*report) return cmd_report(report_in);
    } catch (const MalformedRecord& e) {
        std::cerr << "validation error: " << e.what() << '\n';
        return 1;
    } catch (const InvariantViolation& e) {
        std::cerr << "validation error: " << e.what() << '\n';
        return 1;
    } catch (const DuplicateTrialKey& e) {
        std::cerr << "validation error: " << e.what() << '\n';
        return 1;
    } catch (const Error& e) {
        std::cerr << "pipeline error: " << e.what() << '\n';
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "internal error: " << e.what() << '\n';
        return 2;
    }
    return 2;
}

}  // namespace locorank
