#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <set>
#include <string>

#include <json.hpp>

#include "locorank/dataset.hpp"
#include "locorank/errors.hpp"
#include "locorank/evaluation.hpp"
#include "locorank/pipeline.hpp"
#include "locorank/synth.hpp"

using namespace locorank;

namespace {

CohortConfig small_config(double sigma = 0.1, std::uint64_t seed = 5) {
    CohortConfig c;
    c.n_impaired = 3;
    c.n_non_impaired = 3;
    c.trials_per_block = 2;
    c.blocks = 1;
    c.noise_sigma = sigma;
    c.sample_rate = 18.0;
    c.seed = seed;
    return c;
}

}  // namespace

TEST_CASE("cohort generation is deterministic and seed-sensitive") {
    CohortConfig config = small_config();
    SynthCohort a = generate_cohort(config, default_demands());
    SynthCohort b = generate_cohort(config, default_demands());
    REQUIRE(a.sessions.size() == b.sessions.size());
    for (std::size_t i = 0; i < a.sessions.size(); ++i) CHECK(a.sessions[i] == b.sessions[i]);
    CHECK(serialize_questionnaires(a.questionnaires) ==
          serialize_questionnaires(b.questionnaires));

    config.seed = 6;
    SynthCohort c = generate_cohort(config, default_demands());
    CHECK_FALSE(a.sessions[0] == c.sessions[0]);
}

TEST_CASE("participant streams do not depend on cohort size") {
    CohortConfig small = small_config();
    CohortConfig bigger = small;
    bigger.n_non_impaired = 5;  // extends the roster, impaired indices unchanged
    SynthCohort a = generate_cohort(small, default_demands());
    SynthCohort b = generate_cohort(bigger, default_demands());
    for (std::size_t i = 0; i < a.sessions.size(); ++i) CHECK(a.sessions[i] == b.sessions[i]);
}

TEST_CASE("cohort structure matches the config") {
    CohortConfig config = small_config();
    SynthCohort cohort = generate_cohort(config, default_demands());
    REQUIRE(cohort.sessions.size() == 6);
    REQUIRE(cohort.profiles.size() == 6);
    CHECK(cohort.questionnaires.responses.size() == 6);

    for (std::size_t i = 0; i < cohort.sessions.size(); ++i) {
        const SessionLog& s = cohort.sessions[i];
        CHECK(s.group == (i < 3 ? Group::Impaired : Group::NonImpaired));
        CHECK(s.trials.size() == 6 * 1 * 2);
        std::set<std::string> keys;
        for (const TrialTelemetry& t : s.trials) {
            CHECK(t.trial_time > 0.0);
            CHECK(t.trial_time <= 30.0);
            if (!t.hit) CHECK(t.trial_time == 30.0);
            CHECK(keys.insert(t.key()).second);
            CHECK(!t.headset.empty());
            CHECK(!t.dominant_controller().empty());
        }
        for (double axis : cohort.profiles[i].axes) {
            CHECK(axis >= 0.1);
            CHECK(axis <= 1.0);
            if (i >= 3) CHECK(axis >= 0.8);
        }
    }
}

TEST_CASE("generated cohorts survive the strict parser byte for byte") {
    SynthCohort cohort = generate_cohort(small_config(), default_demands());
    std::string text = serialize_session_log(cohort.sessions[0]);
    SessionLog back = parse_session_log_text(text);
    CHECK(back == cohort.sessions[0]);
    QuestionnaireSet qs =
        parse_questionnaires_text(serialize_questionnaires(cohort.questionnaires));
    CHECK(qs.responses.size() == cohort.questionnaires.responses.size());
}

TEST_CASE("ground truth time scales with demand and clamps at the cap") {
    const DemandTable& demands = default_demands();
    AbilityProfile fit;
    fit.axes = {1, 1, 1, 1, 1};
    AbilityProfile weak;
    weak.axes = {0.1, 0.1, 0.1, 0.1, 0.1};
    for (const TechniqueDemand& d : demands) {
        CHECK(ground_truth_time(fit, d) == doctest::Approx(d.base_time));
        CHECK(ground_truth_time(weak, d) > d.base_time);
    }
    TechniqueDemand extreme;
    extreme.base_time = 29.0;
    extreme.weights = {1.0, 1.0, 1.0, 0.5, 0.5};
    CHECK(ground_truth_time(weak, extreme) == 30.0);
}

TEST_CASE("every profile ranks the default techniques in the same time order") {
    const DemandTable& demands = default_demands();
    for (int rep = 0; rep < 50; ++rep) {
        AbilityProfile p;
        for (std::size_t k = 0; k < kAbilityAxes; ++k)
            p.axes[k] = 0.1 + 0.9 * ((rep * 7 + k * 13) % 10) / 10.0;
        double prev = 0.0;
        for (TechniqueId tech : {TechniqueId::Teleport, TechniqueId::AstralBody,
                                 TechniqueId::SlidingLooking, TechniqueId::ChickenAcceleration,
                                 TechniqueId::ThrowTeleport, TechniqueId::GrabAndPull}) {
            double t = ground_truth_time(p, demands[static_cast<std::size_t>(tech)]);
            CHECK(t > prev);
            prev = t;
        }
    }
}

TEST_CASE("demand tables validate and round-trip") {
    namespace fs = std::filesystem;
    fs::path file = fs::temp_directory_path() / "locorank_demands_test.json";
    write_demands(default_demands(), file.string());
    DemandTable back = load_demands(file.string());
    for (std::size_t i = 0; i < back.size(); ++i) {
        CHECK(back[i].base_time == default_demands()[i].base_time);
        CHECK(back[i].weights == default_demands()[i].weights);
    }
    std::ofstream(file) << "{\"techniques\": {\"Teleport\": {\"base_time\": -1, "
                           "\"weights\": {}}}}";
    CHECK_THROWS_AS(load_demands(file.string()), ConfigInvalid);
    fs::remove(file);
}

TEST_CASE("averaging trials into technique means raises the forest's R2") {
    CohortConfig config = small_config(0.3, 8);
    config.n_impaired = 5;
    config.n_non_impaired = 5;
    SynthCohort cohort = generate_cohort(config, default_demands());
    Dataset raw = build_cs(cohort.sessions, cohort.questionnaires,
                           TechniqueId::ChickenAcceleration);

    // Same features, noise-averaged target: per participant and technique
    // every trial's target becomes the mean of its cell.
    Dataset averaged = raw;
    for (std::size_t i = 0; i < raw.rows(); ++i) {
        double sum = 0.0;
        int n = 0;
        for (std::size_t j = 0; j < raw.rows(); ++j) {
            if (raw.groups[j] != raw.groups[i]) continue;
            if (raw.row_technique[j] != raw.row_technique[i]) continue;
            sum += raw.y[static_cast<Eigen::Index>(j)];
            ++n;
        }
        averaged.y[static_cast<Eigen::Index>(i)] = sum / n;
    }

    CvConfig cv;
    cv.kind = LearnerKind::RandomForest;
    cv.forest.n_trees = 60;
    cv.folds = 5;
    cv.use_rfe = false;
    cv.seed = 3;
    double r2_raw = cross_validate(raw, cv).mean_r2;
    double r2_avg = cross_validate(averaged, cv).mean_r2;
    CHECK(r2_avg >= r2_raw);
}

TEST_CASE("run config defaults follow the scenario") {
    RunConfig qs = make_run_config(Scenario::QS);
    CHECK(qs.learner == LearnerKind::ElasticNet);
    RunConfig cs = make_run_config(Scenario::CS);
    CHECK(cs.learner == LearnerKind::RandomForest);
    CHECK(cs.eval_folds == 25);
}

TEST_CASE("config files override defaults and reject unknown keys") {
    namespace fs = std::filesystem;
    fs::path file = fs::temp_directory_path() / "locorank_config_test.json";
    std::ofstream(file) << R"({"seed": 7, "eval_folds": 4, "enet": {"lambda": 0.5},
                              "forest": {"n_trees": 99}, "rfe": {"cap_top_k": 10}})";
    RunConfig config = make_run_config(Scenario::QS);
    apply_config_file(config, file.string());
    CHECK(config.seed == 7);
    CHECK(config.eval_folds == 4);
    CHECK(config.enet.lambda == 0.5);
    CHECK(config.forest.n_trees == 99);
    CHECK(config.rfe.cap_top_k == 10);

    std::ofstream(file) << R"({"no_such_key": 1})";
    CHECK_THROWS_AS(apply_config_file(config, file.string()), ConfigInvalid);
    std::ofstream(file) << R"({"enet": {"lambda": -2}})";
    CHECK_THROWS_AS(apply_config_file(config, file.string()), ConfigInvalid);
    std::ofstream(file) << "not json";
    CHECK_THROWS_AS(apply_config_file(config, file.string()), ConfigInvalid);
    fs::remove(file);
}

TEST_CASE("config digest ignores thread count but tracks semantics") {
    RunConfig a = make_run_config(Scenario::CS);
    RunConfig b = a;
    b.threads = 8;
    CHECK(config_digest(a) == config_digest(b));
    b.seed = 43;
    CHECK(config_digest(a) != config_digest(b));
}

TEST_CASE("run_pipeline produces coherent artifacts for each scenario") {
    CohortConfig cc = small_config(0.1, 12);
    SynthCohort cohort = generate_cohort(cc, default_demands());

    RunConfig config = make_run_config(Scenario::QS);
    config.run_grid = false;
    config.eval_folds = 3;
    config.rank_folds = 3;
    config.rfe.cv_folds = 3;
    RunArtifacts artifacts = run_pipeline(cohort.sessions, cohort.questionnaires, config);

    CHECK(artifacts.dataset.rows() == 36);
    CHECK(artifacts.has_eval);
    CHECK(artifacts.has_rank);
    CHECK(artifacts.effective_eval_folds == 3);
    CHECK(artifacts.ranking.participants.size() == 6);
    CHECK(artifacts.selection.selected_units.size() >= 1);

    std::string report = evaluation_report_json(artifacts, config);
    auto j = nlohmann::json::parse(report);
    CHECK(j["scenario"] == "qs");
    CHECK(j["calibration"].is_null());
    CHECK(j["per_fold"].size() == 3);
    CHECK(j["rank_accuracy"]["by_rank"].size() == 6);
    CHECK(j["mape"]["by_group"]["impaired"]["participants"] == 3);
    CHECK(j.contains("mean_r2"));
    CHECK(j.contains("mean_rmse"));

    std::string text = render_report_text(report);
    CHECK(text.find("scenario") != std::string::npos);
    CHECK(text.find("qs") != std::string::npos);
    CHECK(text.find("rank") != std::string::npos);
}

TEST_CASE("pipeline run is reproducible and thread-count independent") {
    CohortConfig cc = small_config(0.15, 13);
    SynthCohort cohort = generate_cohort(cc, default_demands());

    RunConfig config = make_run_config(Scenario::CS);
    config.run_grid = false;
    config.eval_folds = 3;
    config.rank_folds = 3;
    config.rfe.cv_folds = 3;
    config.forest.n_trees = 40;
    config.threads = 1;
    RunArtifacts a = run_pipeline(cohort.sessions, cohort.questionnaires, config);
    config.threads = 4;
    RunArtifacts b = run_pipeline(cohort.sessions, cohort.questionnaires, config);

    CHECK(evaluation_report_json(a, config) == evaluation_report_json(b, config));
    CHECK((a.evaluation.predictions - b.evaluation.predictions).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("write_run_outputs emits the full artifact set byte-identically") {
    namespace fs = std::filesystem;
    CohortConfig cc = small_config(0.1, 14);
    SynthCohort cohort = generate_cohort(cc, default_demands());
    RunConfig config = make_run_config(Scenario::CS);
    config.run_grid = false;
    config.do_eval = false;
    config.rank_folds = 3;
    config.rfe.cv_folds = 3;
    config.forest.n_trees = 30;
    RunArtifacts artifacts = run_pipeline(cohort.sessions, cohort.questionnaires, config);

    fs::path base = fs::temp_directory_path() / "locorank_outputs_test";
    fs::remove_all(base);
    auto emit = [&](const std::string& sub) {
        std::string dir = (base / sub).string();
        write_run_outputs(artifacts, config, cohort.sessions, dir, "run --scenario cs", {});
        return dir;
    };
    std::string d1 = emit("one"), d2 = emit("two");

    for (const char* name : {"manifest.json", "features.csv", "dataset.csv", "dataset.json",
                             "ranking.json", "report.json", "report.txt"}) {
        fs::path f1 = fs::path(d1) / name, f2 = fs::path(d2) / name;
        REQUIRE(fs::exists(f1));
        std::ifstream a(f1, std::ios::binary), b(f2, std::ios::binary);
        std::string sa((std::istreambuf_iterator<char>(a)), std::istreambuf_iterator<char>());
        std::string sb((std::istreambuf_iterator<char>(b)), std::istreambuf_iterator<char>());
        CHECK(sa == sb);
        CHECK(!sa.empty());
    }
    auto manifest = nlohmann::json::parse(std::ifstream((fs::path(d1) / "manifest.json")));
    CHECK(manifest["seed"] == config.seed);
    CHECK(manifest["command"] == "run --scenario cs");
    CHECK(manifest["tool_version"] == "0.1.0");
    CHECK(manifest["output_paths"].size() == 6);
    fs::remove_all(base);
}

TEST_CASE("grid search picks a cell and records failures without dying") {
    CohortConfig cc = small_config(0.1, 15);
    SynthCohort cohort = generate_cohort(cc, default_demands());
    Dataset ds = build_qs(cohort.sessions, cohort.questionnaires);

    EnetGrid grid;
    grid.lambdas = {0.001, 0.1};
    grid.alphas = {0.5};
    RfeParams rfe;
    rfe.cv_folds = 3;
    GridResult result = grid_search(ds, LearnerKind::ElasticNet, grid, {}, {}, {}, 3, 1,
                                    false, rfe, 2);
    CHECK(result.cells.size() == 2);
    CHECK(result.best < result.cells.size());
    CHECK_FALSE(result.cells[result.best].failed);
    for (const GridCell& cell : result.cells) CHECK(cell.fold_r2.size() == 3);
}
