#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "locorank/dataset.hpp"
#include "locorank/evaluation.hpp"
#include "locorank/learners.hpp"
#include "locorank/selection.hpp"
#include "locorank/session.hpp"
#include "locorank/synth.hpp"

namespace locorank {

struct RunConfig {
    Scenario scenario = Scenario::QS;
    TechniqueId calibration = TechniqueId::ChickenAcceleration;
    LearnerKind learner = LearnerKind::ElasticNet;

    std::uint64_t seed = 42;
    int threads = 0;  // 0 = all hardware threads

    bool use_rfe = true;
    bool run_grid = true;
    bool do_eval = true;
    bool do_rank = true;

    int eval_folds = 25;  // clamped to the participant count, noted in the manifest
    int rank_folds = 10;
    int grid_folds = 5;

    ElasticNetParams enet;
    ForestParams forest;
    EnetGrid enet_grid;
    ForestGrid forest_grid;
    RfeParams rfe;
    SubmovementParams submovement;
};

// Scenario-appropriate defaults: elastic net for QS, random forest for the
// calibration scenarios.
RunConfig make_run_config(Scenario scenario);

// JSON override file; unknown keys are rejected.
void apply_config_file(RunConfig& config, const std::string& path);

std::string config_digest(const RunConfig& config);

struct RunArtifacts {
    Dataset dataset;
    RfeResult selection;
    bool has_grid = false;
    GridResult grid;
    bool has_eval = false;
    CvResult evaluation;
    bool has_rank = false;
    RankingOutcome ranking;
    RankReport report;
    CvConfig chosen;  // hyperparameters the evaluation and ranking used
    int effective_eval_folds = 0;
    int effective_rank_folds = 0;
};

// Dataset build, whole-data feature selection, optional grid search, grouped
// CV evaluation, and ranking, in that order. Each stage draws its seed from
// the run seed and a fixed stage tag.
RunArtifacts run_pipeline(const std::vector<SessionLog>& sessions,
                          const QuestionnaireSet& questionnaires, const RunConfig& config);

std::string evaluation_report_json(const RunArtifacts& artifacts, const RunConfig& config);
std::string render_report_text(const std::string& report_json);
std::string selection_report_json(const RfeResult& selection);

// FNV-1a over the file bytes, as a hex string.
std::string file_digest(const std::string& path);
std::string text_digest(const std::string& text);

// Writes manifest.json, features.csv, dataset.csv (+ dataset.json sidecar),
// ranking.json, report.json, and report.txt under out_dir.
void write_run_outputs(const RunArtifacts& artifacts, const RunConfig& config,
                       const std::vector<SessionLog>& sessions, const std::string& out_dir,
                       const std::string& command,
                       const std::vector<std::pair<std::string, std::string>>& input_digests);

}  // namespace locorank
