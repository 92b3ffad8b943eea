#include "locorank/pipeline.hpp"

#include <algorithm>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>

#include <json.hpp>

#include "locorank/errors.hpp"
#include "locorank/folds.hpp"
#include "locorank/metrics.hpp"
#include "locorank/rng.hpp"
#include "locorank/util.hpp"

namespace locorank {

namespace {

// Stage tags; every stage mixes its own tag into the run seed so stages stay
// independent when one of them is toggled off.
constexpr std::uint64_t kSeedSelect = 0x73656c65ULL;
constexpr std::uint64_t kSeedGrid = 0x67726964ULL;
constexpr std::uint64_t kSeedEval = 0x6576616cULL;
constexpr std::uint64_t kSeedRank = 0x72616e6bULL;

std::size_t participant_count(const Dataset& ds) {
    std::set<std::string> pids(ds.groups.begin(), ds.groups.end());
    return pids.size();
}

void expect_keys(const nlohmann::json& obj, const std::string& where,
                 std::initializer_list<const char*> known) {
    for (auto it = obj.begin(); it != obj.end(); ++it) {
        bool ok = false;
        for (const char* k : known)
            if (it.key() == k) ok = true;
        if (!ok) throw ConfigInvalid("unknown config key '" + where + it.key() + "'");
    }
}

nlohmann::json config_json(const RunConfig& c) {
    nlohmann::json j;
    j["scenario"] = scenario_name(c.scenario);
    j["calibration"] = technique_name(c.calibration);
    j["learner"] = learner_name(c.learner);
    j["seed"] = c.seed;
    j["use_rfe"] = c.use_rfe;
    j["run_grid"] = c.run_grid;
    j["do_eval"] = c.do_eval;
    j["do_rank"] = c.do_rank;
    j["eval_folds"] = c.eval_folds;
    j["rank_folds"] = c.rank_folds;
    j["grid_folds"] = c.grid_folds;
    j["enet"] = {{"lambda", c.enet.lambda},
                 {"alpha", c.enet.alpha},
                 {"tol", c.enet.tol},
                 {"max_iter", c.enet.max_iter}};
    j["forest"] = {{"n_trees", c.forest.n_trees},
                   {"mtry", c.forest.mtry},
                   {"min_leaf", c.forest.min_leaf},
                   {"max_depth", c.forest.max_depth},
                   {"bootstrap", c.forest.bootstrap},
                   {"seed", c.forest.seed}};
    j["enet_grid"] = {{"lambdas", c.enet_grid.lambdas}, {"alphas", c.enet_grid.alphas}};
    j["forest_grid"] = {{"n_trees", c.forest_grid.n_trees},
                        {"mtrys", c.forest_grid.mtrys},
                        {"min_leafs", c.forest_grid.min_leafs}};
    j["rfe"] = {{"subset_sizes", c.rfe.subset_sizes},
                {"step", c.rfe.step},
                {"cv_folds", c.rfe.cv_folds},
                {"cap_top_k", c.rfe.cap_top_k}};
    j["submovement"] = {{"peak_fraction", c.submovement.peak_fraction},
                        {"min_dip_samples", c.submovement.min_dip_samples}};
    return j;
}

nlohmann::json rank_slice_json(const RankSlice& slice) {
    return nlohmann::json{{"by_rank", slice.accuracy_by_rank},
                          {"overall", slice.overall_accuracy},
                          {"participants", slice.participants}};
}

nlohmann::json mape_slice_json(const RankSlice& slice) {
    return nlohmann::json{{"by_rank", slice.mape_by_rank},
                          {"overall", slice.overall_mape},
                          {"participants", slice.participants}};
}

void write_text(const std::filesystem::path& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error("cannot write " + path.string());
    out << text;
}

std::string fixed3(double v) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.3f", v);
    return buf;
}

}  // namespace

RunConfig make_run_config(Scenario scenario) {
    RunConfig config;
    config.scenario = scenario;
    config.learner = scenario == Scenario::QS ? LearnerKind::ElasticNet
                                              : LearnerKind::RandomForest;
    return config;
}

void apply_config_file(RunConfig& config, const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigInvalid("cannot open config file: " + path);
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(in);
    } catch (const nlohmann::json::exception& e) {
        throw ConfigInvalid("config file is not valid JSON: " + std::string(e.what()));
    }
    if (!j.is_object()) throw ConfigInvalid("config file must hold a JSON object");
    expect_keys(j, "",
                {"scenario", "calibration", "learner", "seed", "threads", "use_rfe", "run_grid",
                 "do_eval", "do_rank", "eval_folds", "rank_folds", "grid_folds", "enet",
                 "forest", "enet_grid", "forest_grid", "rfe", "submovement"});
    try {
        if (j.contains("scenario")) config.scenario = scenario_from_name(j["scenario"]);
        if (j.contains("calibration")) {
            auto tech = technique_from_name(j["calibration"]);
            if (!tech)
                throw ConfigInvalid("unknown calibration technique '" +
                                    j["calibration"].get<std::string>() + "'");
            config.calibration = *tech;
        }
        if (j.contains("learner")) config.learner = learner_from_name(j["learner"]);
        if (j.contains("seed")) config.seed = j["seed"].get<std::uint64_t>();
        if (j.contains("threads")) config.threads = j["threads"].get<int>();
        if (j.contains("use_rfe")) config.use_rfe = j["use_rfe"].get<bool>();
        if (j.contains("run_grid")) config.run_grid = j["run_grid"].get<bool>();
        if (j.contains("do_eval")) config.do_eval = j["do_eval"].get<bool>();
        if (j.contains("do_rank")) config.do_rank = j["do_rank"].get<bool>();
        if (j.contains("eval_folds")) config.eval_folds = j["eval_folds"].get<int>();
        if (j.contains("rank_folds")) config.rank_folds = j["rank_folds"].get<int>();
        if (j.contains("grid_folds")) config.grid_folds = j["grid_folds"].get<int>();
        if (j.contains("enet")) {
            const nlohmann::json& e = j["enet"];
            expect_keys(e, "enet.", {"lambda", "alpha", "tol", "max_iter"});
            if (e.contains("lambda")) config.enet.lambda = e["lambda"].get<double>();
            if (e.contains("alpha")) config.enet.alpha = e["alpha"].get<double>();
            if (e.contains("tol")) config.enet.tol = e["tol"].get<double>();
            if (e.contains("max_iter")) config.enet.max_iter = e["max_iter"].get<int>();
        }
        if (j.contains("forest")) {
            const nlohmann::json& f = j["forest"];
            expect_keys(f, "forest.",
                        {"n_trees", "mtry", "min_leaf", "max_depth", "bootstrap", "seed"});
            if (f.contains("n_trees")) config.forest.n_trees = f["n_trees"].get<int>();
            if (f.contains("mtry")) config.forest.mtry = f["mtry"].get<int>();
            if (f.contains("min_leaf")) config.forest.min_leaf = f["min_leaf"].get<int>();
            if (f.contains("max_depth")) config.forest.max_depth = f["max_depth"].get<int>();
            if (f.contains("bootstrap")) config.forest.bootstrap = f["bootstrap"].get<bool>();
            if (f.contains("seed")) config.forest.seed = f["seed"].get<std::uint64_t>();
        }
        if (j.contains("enet_grid")) {
            const nlohmann::json& g = j["enet_grid"];
            expect_keys(g, "enet_grid.", {"lambdas", "alphas"});
            if (g.contains("lambdas"))
                config.enet_grid.lambdas = g["lambdas"].get<std::vector<double>>();
            if (g.contains("alphas"))
                config.enet_grid.alphas = g["alphas"].get<std::vector<double>>();
        }
        if (j.contains("forest_grid")) {
            const nlohmann::json& g = j["forest_grid"];
            expect_keys(g, "forest_grid.", {"n_trees", "mtrys", "min_leafs"});
            if (g.contains("n_trees"))
                config.forest_grid.n_trees = g["n_trees"].get<std::vector<int>>();
            if (g.contains("mtrys"))
                config.forest_grid.mtrys = g["mtrys"].get<std::vector<int>>();
            if (g.contains("min_leafs"))
                config.forest_grid.min_leafs = g["min_leafs"].get<std::vector<int>>();
        }
        if (j.contains("rfe")) {
            const nlohmann::json& r = j["rfe"];
            expect_keys(r, "rfe.", {"subset_sizes", "step", "cv_folds", "cap_top_k"});
            if (r.contains("subset_sizes"))
                config.rfe.subset_sizes = r["subset_sizes"].get<std::vector<std::size_t>>();
            if (r.contains("step")) config.rfe.step = r["step"].get<double>();
            if (r.contains("cv_folds")) config.rfe.cv_folds = r["cv_folds"].get<int>();
            if (r.contains("cap_top_k"))
                config.rfe.cap_top_k = r["cap_top_k"].get<std::size_t>();
        }
        if (j.contains("submovement")) {
            const nlohmann::json& s = j["submovement"];
            expect_keys(s, "submovement.", {"peak_fraction", "min_dip_samples"});
            if (s.contains("peak_fraction"))
                config.submovement.peak_fraction = s["peak_fraction"].get<double>();
            if (s.contains("min_dip_samples"))
                config.submovement.min_dip_samples = s["min_dip_samples"].get<int>();
        }
    } catch (const nlohmann::json::exception& e) {
        throw ConfigInvalid("config field has the wrong type: " + std::string(e.what()));
    }

    if (config.enet.lambda < 0.0) throw ConfigInvalid("enet.lambda must be >= 0");
    if (config.enet.alpha < 0.0 || config.enet.alpha > 1.0)
        throw ConfigInvalid("enet.alpha must be in [0, 1]");
    if (config.forest.n_trees < 1) throw ConfigInvalid("forest.n_trees must be >= 1");
    if (config.eval_folds < 2 || config.rank_folds < 2 || config.grid_folds < 2)
        throw ConfigInvalid("fold counts must be >= 2");
    if (config.threads < 0) throw ConfigInvalid("threads must be >= 0");
}

std::string config_digest(const RunConfig& config) {
    return hex64(fnv1a(config_json(config).dump()));
}

RunArtifacts run_pipeline(const std::vector<SessionLog>& sessions,
                          const QuestionnaireSet& questionnaires, const RunConfig& config) {
    RunArtifacts artifacts;
    switch (config.scenario) {
        case Scenario::QS:
            artifacts.dataset = build_qs(sessions, questionnaires);
            break;
        case Scenario::CS:
            artifacts.dataset = build_cs(sessions, questionnaires, config.calibration,
                                         config.submovement);
            break;
        case Scenario::QCS:
            artifacts.dataset = build_qcs(sessions, questionnaires, config.calibration,
                                          config.submovement);
            break;
    }
    const Dataset& ds = artifacts.dataset;
    std::size_t n_pids = participant_count(ds);
    if (n_pids < 2) throw ConfigInvalid("pipeline needs at least 2 participants after exclusions");

    if (config.use_rfe) {
        RfeParams rfe = config.rfe;
        rfe.seed = mix_key(config.seed, kSeedSelect);
        artifacts.selection = run_rfe(ds, rfe);
    }

    CvConfig chosen;
    chosen.kind = config.learner;
    chosen.enet = config.enet;
    chosen.forest = config.forest;
    chosen.use_rfe = config.use_rfe;
    chosen.rfe = config.rfe;
    chosen.threads = config.threads;

    if (config.run_grid) {
        int grid_folds = std::min<int>(config.grid_folds, static_cast<int>(n_pids));
        artifacts.grid = grid_search(ds, config.learner, config.enet_grid, config.forest_grid,
                                     config.enet, config.forest, grid_folds,
                                     mix_key(config.seed, kSeedGrid), config.use_rfe,
                                     config.rfe, config.threads);
        artifacts.has_grid = true;
        const GridCell& best = artifacts.grid.cells[artifacts.grid.best];
        if (config.learner == LearnerKind::ElasticNet)
            chosen.enet = best.enet_params;
        else
            chosen.forest = best.forest_params;
    }

    if (config.do_eval) {
        artifacts.effective_eval_folds = std::min<int>(config.eval_folds,
                                                       static_cast<int>(n_pids));
        CvConfig cv = chosen;
        cv.folds = artifacts.effective_eval_folds;
        cv.seed = mix_key(config.seed, kSeedEval);
        artifacts.evaluation = cross_validate(ds, cv);
        artifacts.has_eval = true;
    }

    if (config.do_rank) {
        artifacts.effective_rank_folds = std::min<int>(config.rank_folds,
                                                       static_cast<int>(n_pids));
        CvConfig cv = chosen;
        cv.folds = artifacts.effective_rank_folds;
        cv.seed = mix_key(config.seed, kSeedRank);
        artifacts.ranking = rank_techniques(ds, cv);
        artifacts.report = rank_report(artifacts.ranking);
        artifacts.has_rank = true;
    }

    artifacts.chosen = chosen;
    return artifacts;
}

std::string evaluation_report_json(const RunArtifacts& artifacts, const RunConfig& config) {
    nlohmann::json j;
    j["scenario"] = scenario_name(config.scenario);
    if (config.scenario == Scenario::QS)
        j["calibration"] = nullptr;
    else
        j["calibration"] = technique_name(config.calibration);

    nlohmann::json per_fold = nlohmann::json::array();
    const CvResult* cv = artifacts.has_eval ? &artifacts.evaluation
                        : artifacts.has_rank ? &artifacts.ranking.cv
                                             : nullptr;
    if (cv != nullptr) {
        for (const FoldScore& fold : cv->folds)
            per_fold.push_back(nlohmann::json{{"r2", fold.r2}, {"rmse", fold.rmse}});
        j["mean_r2"] = cv->mean_r2;
        j["mean_rmse"] = cv->mean_rmse;
    } else {
        j["mean_r2"] = nullptr;
        j["mean_rmse"] = nullptr;
    }
    j["per_fold"] = std::move(per_fold);

    if (artifacts.has_rank) {
        const RankReport& r = artifacts.report;
        j["rank_accuracy"] = {
            {"by_rank", r.all.accuracy_by_rank},
            {"by_group",
             {{"impaired", rank_slice_json(r.impaired)},
              {"non_impaired", rank_slice_json(r.non_impaired)}}},
            {"overall", r.all.overall_accuracy}};
        j["mape"] = {{"by_rank", r.all.mape_by_rank},
                     {"by_group",
                      {{"impaired", mape_slice_json(r.impaired)},
                       {"non_impaired", mape_slice_json(r.non_impaired)}}},
                     {"overall", r.all.overall_mape}};
    } else {
        j["rank_accuracy"] = nullptr;
        j["mape"] = nullptr;
    }
    return j.dump(2) + "\n";
}

std::string render_report_text(const std::string& report_json) {
    nlohmann::json j = nlohmann::json::parse(report_json);
    std::ostringstream out;
    out << "scenario     " << j["scenario"].get<std::string>() << '\n';
    out << "calibration  "
        << (j["calibration"].is_null() ? std::string("-")
                                       : j["calibration"].get<std::string>())
        << '\n';
    if (!j["mean_r2"].is_null()) {
        out << "folds        " << j["per_fold"].size() << '\n';
        out << "mean R2      " << fixed3(j["mean_r2"].get<double>()) << '\n';
        out << "mean RMSE    " << fixed3(j["mean_rmse"].get<double>()) << " s\n";
    }
    if (!j["rank_accuracy"].is_null()) {
        out << '\n';
        out << "rank  accuracy  mape%\n";
        const auto& acc = j["rank_accuracy"]["by_rank"];
        const auto& mape = j["mape"]["by_rank"];
        for (std::size_t r = 0; r < acc.size(); ++r)
            out << "   " << (r + 1) << "     " << fixed3(acc[r].get<double>()) << "  "
                << fixed3(mape[r].get<double>()) << '\n';
        out << "overall accuracy " << fixed3(j["rank_accuracy"]["overall"].get<double>())
            << ", mape " << fixed3(j["mape"]["overall"].get<double>()) << "%\n";
        for (const char* group : {"impaired", "non_impaired"}) {
            const auto& ga = j["rank_accuracy"]["by_group"][group];
            const auto& gm = j["mape"]["by_group"][group];
            out << group << " (" << ga["participants"].get<std::size_t>()
                << "): accuracy " << fixed3(ga["overall"].get<double>()) << ", mape "
                << fixed3(gm["overall"].get<double>()) << "%\n";
        }
    }
    return out.str();
}

std::string selection_report_json(const RfeResult& selection) {
    nlohmann::json j;
    j["ordering"] = selection.ordering;
    nlohmann::json scores = nlohmann::json::array();
    for (std::size_t i = 0; i < selection.sizes.size(); ++i)
        scores.push_back(nlohmann::json{{"size", selection.sizes[i]},
                                        {"r2", selection.cv_scores_by_size[i]}});
    j["cv_scores_by_size"] = std::move(scores);
    std::vector<std::string> selected;
    for (std::size_t i = 0; i < selection.selected_size; ++i)
        selected.push_back(selection.ordering[i]);
    j["selected"] = std::move(selected);
    j["capped"] = selection.capped;
    return j.dump(2) + "\n";
}

std::string file_digest(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error("cannot open for digest: " + path);
    std::ostringstream buf;
    buf << in.rdbuf();
    return hex64(fnv1a(buf.str()));
}

std::string text_digest(const std::string& text) { return hex64(fnv1a(text)); }

void write_run_outputs(const RunArtifacts& artifacts, const RunConfig& config,
                       const std::vector<SessionLog>& sessions, const std::string& out_dir,
                       const std::string& command,
                       const std::vector<std::pair<std::string, std::string>>& input_digests) {
    namespace fs = std::filesystem;
    fs::path dir(out_dir);
    fs::create_directories(dir);

    write_text(dir / "features.csv", metrics_csv(sessions, config.submovement));
    write_dataset_csv(artifacts.dataset, (dir / "dataset.csv").string(),
                      (dir / "dataset.json").string());
    write_text(dir / "ranking.json", selection_report_json(artifacts.selection));
    std::string report = evaluation_report_json(artifacts, config);
    write_text(dir / "report.json", report);
    write_text(dir / "report.txt", render_report_text(report));

    nlohmann::json manifest;
    manifest["command"] = command;
    nlohmann::json inputs = nlohmann::json::array();
    for (const auto& [path, digest] : input_digests)
        inputs.push_back(nlohmann::json{{"path", path}, {"digest", digest}});
    manifest["input_digests"] = std::move(inputs);
    manifest["config_digest"] = config_digest(config);
    manifest["seed"] = config.seed;
    manifest["tool_version"] = kToolVersion;
    manifest["output_paths"] = {"features.csv", "dataset.csv",    "dataset.json",
                                "ranking.json", "report.json",    "report.txt"};
    nlohmann::json notes = nlohmann::json::array();
    if (artifacts.has_eval && artifacts.effective_eval_folds < config.eval_folds)
        notes.push_back("eval_folds clamped to " +
                        std::to_string(artifacts.effective_eval_folds));
    if (artifacts.has_rank && artifacts.effective_rank_folds < config.rank_folds)
        notes.push_back("rank_folds clamped to " +
                        std::to_string(artifacts.effective_rank_folds));
    manifest["notes"] = std::move(notes);
    write_text(dir / "manifest.json", manifest.dump(2) + "\n");
}

}  // namespace locorank
