#pragma once

#include <map>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "locorank/metrics.hpp"
#include "locorank/questionnaire.hpp"
#include "locorank/session.hpp"

namespace locorank {

enum class Scenario { QS, CS, QCS };

const std::string& scenario_name(Scenario s);
Scenario scenario_from_name(const std::string& name);

// A feature unit groups the columns that enter and leave feature selection
// together: a one-hot encoded categorical is one unit spanning several
// columns, everything else is a single-column unit.
struct FeatureUnit {
    std::string name;
    std::vector<std::size_t> columns;
};

struct InstanceKey {
    std::string participant_id;
    TechniqueId technique = TechniqueId::AstralBody;
    int block = 0;        // 0 for questionnaire-level instances
    int trial_index = 0;  // 0 for questionnaire-level instances
};

struct Dataset {
    Scenario scenario = Scenario::QS;
    TechniqueId calibration = TechniqueId::ChickenAcceleration;  // CS and QCS only

    std::vector<std::string> feature_names;
    std::vector<FeatureUnit> units;
    std::vector<bool> binary_column;

    Eigen::MatrixXd X;
    Eigen::VectorXd y;  // trial time in seconds

    std::vector<std::string> groups;  // participant id per row
    std::vector<InstanceKey> instance_keys;
    std::vector<TechniqueId> row_technique;
    std::vector<bool> row_impaired;

    std::vector<std::string> exclusions;  // participants dropped, with reasons

    std::size_t rows() const { return static_cast<std::size_t>(X.rows()); }
    std::size_t cols() const { return static_cast<std::size_t>(X.cols()); }
    Dataset subset(const std::vector<std::size_t>& row_indices) const;
    Dataset select_columns(const std::vector<std::size_t>& col_indices) const;
};

// Questionnaire scenario: one instance per participant and technique, target
// is that participant's mean trial time under the technique.
Dataset build_qs(const std::vector<SessionLog>& sessions, const QuestionnaireSet& questionnaires);

// Calibration scenario: one instance per non-calibration trial, predictors
// are the participant's mean calibration metrics plus the post-task ratings
// for the calibration technique.
Dataset build_cs(const std::vector<SessionLog>& sessions, const QuestionnaireSet& questionnaires,
                 TechniqueId calibration, const SubmovementParams& params = {});

// Union scenario: questionnaire block first, then the calibration block.
Dataset build_qcs(const std::vector<SessionLog>& sessions, const QuestionnaireSet& questionnaires,
                  TechniqueId calibration, const SubmovementParams& params = {});

struct Standardization {
    Eigen::VectorXd mean;
    Eigen::VectorXd scale;           // 1 for binary and zero-variance columns
    std::vector<bool> passthrough;   // binary columns left untouched
    std::vector<bool> zero_variance;

    Eigen::MatrixXd apply(const Eigen::MatrixXd& X) const;
    Eigen::VectorXd apply_row(const Eigen::VectorXd& x) const;
};

// Column-wise z-scoring fit on X. Binary columns pass through unchanged;
// zero-variance columns pass through untouched and are flagged.
Standardization fit_standardization(const Eigen::MatrixXd& X,
                                    const std::vector<bool>& binary_column);

// CSV with feature columns then "target", plus a sidecar manifest describing
// the build.
void write_dataset_csv(const Dataset& ds, const std::string& csv_path,
                       const std::string& manifest_path);

// Reads back a CSV written by write_dataset_csv. The manifest restores
// scenario, calibration, units, and instance keys.
Dataset read_dataset_csv(const std::string& csv_path, const std::string& manifest_path);

}  // namespace locorank
