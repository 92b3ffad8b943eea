#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "locorank/dataset.hpp"
#include "locorank/folds.hpp"
#include "locorank/learners.hpp"
#include "locorank/selection.hpp"

namespace locorank {

// R^2 = 1 - SSE/SST. A zero-variance truth vector scores 0 by definition;
// callers that care can detect it via the flag in FoldScore.
double r2_score(const Eigen::VectorXd& actual, const Eigen::VectorXd& predicted);
double rmse(const Eigen::VectorXd& actual, const Eigen::VectorXd& predicted);
// Percent; requires all actual values > 0.
double mape(const Eigen::VectorXd& actual, const Eigen::VectorXd& predicted);

struct CvConfig {
    LearnerKind kind = LearnerKind::ElasticNet;
    ElasticNetParams enet;
    ForestParams forest;
    bool use_rfe = true;
    RfeParams rfe;
    int folds = 25;
    std::uint64_t seed = 42;
    int threads = 1;
};

struct FoldScore {
    double r2 = 0.0;
    double rmse = 0.0;
    std::size_t test_rows = 0;
    std::size_t selected_units = 0;    // 0 when RFE is off
    bool zero_variance_target = false;
};

struct CvResult {
    std::vector<FoldScore> folds;
    double mean_r2 = 0.0;
    double mean_rmse = 0.0;
    // Exactly one hold-out prediction per dataset row.
    Eigen::VectorXd predictions;
};

// Grouped k-fold evaluation. Standardization and feature selection are fit
// on each training fold alone; held-out rows only ever meet a finished model.
CvResult cross_validate(const Dataset& ds, const CvConfig& config);

struct RankedTechnique {
    TechniqueId technique = TechniqueId::AstralBody;
    double predicted_time = 0.0;
    double actual_time = 0.0;
    int predicted_rank = 0;  // 1 = fastest predicted
    int actual_rank = 0;
};

struct RankedList {
    std::string participant_id;
    bool impaired = false;
    std::vector<RankedTechnique> techniques;  // ascending by technique id
    bool complete = true;  // false when some technique had no instances
    std::vector<TechniqueId> predicted_order() const;
    std::vector<TechniqueId> actual_order() const;
};

struct RankingOutcome {
    std::vector<RankedList> participants;
    CvResult cv;
    std::size_t list_size = 0;  // techniques per complete list
};

// Grouped k-fold CV (default 10) gives each instance one hold-out
// prediction; per participant and technique, predicted time is the mean of
// those predictions and actual time the mean of observed times. Ranks are
// ascending by time, ties broken by technique name.
RankingOutcome rank_techniques(const Dataset& ds, const CvConfig& config);

// Fills predicted_rank and actual_rank from the stored times (1 = fastest,
// exact ties go to the technique whose name sorts first).
void assign_ranks(RankedList& list);

struct RankSlice {
    std::vector<double> accuracy_by_rank;  // fraction in [0,1] per rank
    std::vector<double> mape_by_rank;      // percent per rank
    double overall_accuracy = 0.0;         // unweighted mean over ranks
    double overall_mape = 0.0;
    std::size_t participants = 0;
};

struct RankReport {
    RankSlice all;
    RankSlice impaired;
    RankSlice non_impaired;
};

// Accuracy at rank r = fraction of participants whose predicted rank-r
// technique is their actual rank-r technique. MAPE at rank r pairs the
// predicted time of the predicted rank-r technique with the actual time of
// the actual rank-r technique.
RankReport rank_report(const RankingOutcome& outcome);

}  // namespace locorank
