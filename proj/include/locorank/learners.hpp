#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "locorank/dataset.hpp"
#include "locorank/selection.hpp"

namespace locorank {

// ---- elastic net -----------------------------------------------------------

struct ElasticNetParams {
    double lambda = 0.01;
    double alpha = 0.5;   // 1 = lasso, 0 = ridge
    double tol = 1e-7;    // max coefficient change per sweep
    int max_iter = 10000;
};

struct ElasticNetFit {
    Eigen::VectorXd coefficients;
    double intercept = 0.0;
    std::vector<double> objective_path;  // objective after each sweep
    bool converged = false;
    int sweeps = 0;
};

// Cyclic coordinate descent on
//   (1/2n) * ||y - X b - b0||^2 + lambda * (alpha * ||b||_1 + (1-alpha)/2 * ||b||^2).
// X is used as given; standardize beforehand if the penalty should treat
// columns symmetrically.
ElasticNetFit fit_elastic_net(const Eigen::MatrixXd& X, const Eigen::VectorXd& y,
                              const ElasticNetParams& params);

double elastic_net_objective(const Eigen::MatrixXd& X, const Eigen::VectorXd& y,
                             const Eigen::VectorXd& beta, double intercept, double lambda,
                             double alpha);

// ---- random forest ---------------------------------------------------------

struct ForestParams {
    int n_trees = 500;
    int mtry = 0;       // 0 picks ceil(p / 3)
    int min_leaf = 5;
    int max_depth = 0;  // 0 means unlimited
    bool bootstrap = true;
    std::uint64_t seed = 42;
    int threads = 1;    // affects wall time only, never the fitted trees
};

struct TreeNode {
    int feature = -1;  // -1 marks a leaf
    double threshold = 0.0;
    double value = 0.0;
    int left = -1;
    int right = -1;
};

struct Tree {
    std::vector<TreeNode> nodes;
    double predict(const double* x) const;
};

struct ForestFit {
    std::vector<Tree> trees;
    // Per-tree sampling bookkeeping; kept in memory for inspection and
    // dropped when a model is serialized.
    std::vector<std::vector<int>> bootstrap_rows;  // draw order
    std::vector<std::vector<int>> oob_rows;        // ascending

    double predict(const double* x) const;
    Eigen::VectorXd predict_matrix(const Eigen::MatrixXd& X) const;
};

// Variance-reduction CART regression forest. Tree t draws its bootstrap and
// feature subsamples from an RNG keyed on (seed, t), so results depend only
// on the inputs and the seed, not on thread count or scheduling.
ForestFit fit_random_forest(const Eigen::MatrixXd& X, const Eigen::VectorXd& y,
                            const ForestParams& params);

// Stable digest over the full tree structure, for determinism checks.
std::string forest_digest(const ForestFit& fit);

// ---- unified model ---------------------------------------------------------

enum class LearnerKind { ElasticNet, RandomForest };

const std::string& learner_name(LearnerKind kind);
LearnerKind learner_from_name(const std::string& name);

// A fitted model plus everything needed to apply it to raw feature rows.
struct Model {
    LearnerKind kind = LearnerKind::ElasticNet;
    std::vector<std::string> feature_names;
    Standardization standardization;

    ElasticNetParams enet_params;
    ElasticNetFit enet;

    ForestParams forest_params;
    ForestFit forest;

    std::uint64_t seed = 0;
    std::string training_digest;  // digest of the dataset the model saw

    Eigen::VectorXd predict(const Eigen::MatrixXd& X_raw) const;
};

Model fit_model(const Eigen::MatrixXd& X_raw, const Eigen::VectorXd& y,
                const std::vector<std::string>& feature_names,
                const std::vector<bool>& binary_column, LearnerKind kind,
                const ElasticNetParams& enet_params, const ForestParams& forest_params);

void save_model(const Model& model, const std::string& path);
Model load_model(const std::string& path);

// ---- hyperparameter search ---------------------------------------------------

// Ten lambdas spaced evenly in log10 from 1e-4 to 10.
std::vector<double> default_lambda_grid();

struct EnetGrid {
    std::vector<double> lambdas = default_lambda_grid();
    std::vector<double> alphas = {0.1, 0.5, 0.9};
};

struct ForestGrid {
    std::vector<int> n_trees = {200, 500};
    std::vector<int> mtrys = {0};  // 0 keeps the ceil(p/3) default
    std::vector<int> min_leafs = {2, 5};
};

struct GridCell {
    ElasticNetParams enet_params;
    ForestParams forest_params;
    std::vector<double> fold_r2;
    double mean_r2 = 0.0;
    bool failed = false;
    std::string failure;
};

struct GridResult {
    LearnerKind kind = LearnerKind::ElasticNet;
    std::vector<GridCell> cells;  // in evaluation order
    std::size_t best = 0;
};

// Grouped-CV grid search. Feature selection runs once per fold and is shared
// across cells. Ties on mean holdout R^2 go to the smaller model: larger
// lambda for the elastic net, fewer trees then larger leaves for the forest.
// A cell that fails on any fold stays in the table, marked and never chosen.
GridResult grid_search(const Dataset& ds, LearnerKind kind, const EnetGrid& enet_grid,
                       const ForestGrid& forest_grid, const ElasticNetParams& enet_base,
                       const ForestParams& forest_base, int folds, std::uint64_t seed,
                       bool use_rfe, const RfeParams& rfe, int threads);

}  // namespace locorank
