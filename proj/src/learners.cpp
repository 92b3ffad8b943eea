#include "locorank/learners.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>

#include <json.hpp>

#include "locorank/errors.hpp"
#include "locorank/folds.hpp"
#include "locorank/rng.hpp"
#include "gather.hpp"

namespace locorank {

namespace {

const std::string kEnetName = "enet";
const std::string kForestName = "forest";

double holdout_r2(const Eigen::VectorXd& actual, const Eigen::VectorXd& predicted) {
    double mean = actual.mean();
    double sst = (actual.array() - mean).square().sum();
    if (sst == 0.0) return 0.0;
    return 1.0 - (actual - predicted).squaredNorm() / sst;
}

}  // namespace

std::vector<double> default_lambda_grid() {
    std::vector<double> lambdas;
    lambdas.reserve(10);
    for (int i = 0; i < 10; ++i)
        lambdas.push_back(std::pow(10.0, -4.0 + 5.0 * i / 9.0));
    return lambdas;
}

const std::string& learner_name(LearnerKind kind) {
    return kind == LearnerKind::ElasticNet ? kEnetName : kForestName;
}

LearnerKind learner_from_name(const std::string& name) {
    if (name == kEnetName) return LearnerKind::ElasticNet;
    if (name == kForestName) return LearnerKind::RandomForest;
    throw ConfigInvalid("unknown learner '" + name + "' (expected enet or forest)");
}

Model fit_model(const Eigen::MatrixXd& X_raw, const Eigen::VectorXd& y,
                const std::vector<std::string>& feature_names,
                const std::vector<bool>& binary_column, LearnerKind kind,
                const ElasticNetParams& enet_params, const ForestParams& forest_params) {
    if (static_cast<std::size_t>(X_raw.cols()) != feature_names.size())
        throw SchemaMismatch("feature name count does not match matrix width");
    Model m;
    m.kind = kind;
    m.feature_names = feature_names;
    m.standardization = fit_standardization(X_raw, binary_column);
    Eigen::MatrixXd Xs = m.standardization.apply(X_raw);
    if (kind == LearnerKind::ElasticNet) {
        m.enet_params = enet_params;
        m.enet = fit_elastic_net(Xs, y, enet_params);
    } else {
        m.forest_params = forest_params;
        m.forest = fit_random_forest(Xs, y, forest_params);
        m.seed = forest_params.seed;
    }
    return m;
}

Eigen::VectorXd Model::predict(const Eigen::MatrixXd& X_raw) const {
    if (static_cast<std::size_t>(X_raw.cols()) != feature_names.size())
        throw SchemaMismatch("prediction input has " + std::to_string(X_raw.cols()) +
                             " columns, model expects " + std::to_string(feature_names.size()));
    Eigen::MatrixXd Xs = standardization.apply(X_raw);
    if (kind == LearnerKind::ElasticNet)
        return (Xs * enet.coefficients).array() + enet.intercept;
    return forest.predict_matrix(Xs);
}

void save_model(const Model& model, const std::string& path) {
    nlohmann::json j;
    j["kind"] = learner_name(model.kind);
    if (model.kind == LearnerKind::ElasticNet) {
        j["hyperparameters"] = {{"lambda", model.enet_params.lambda},
                                {"alpha", model.enet_params.alpha},
                                {"tol", model.enet_params.tol},
                                {"max_iter", model.enet_params.max_iter}};
        std::vector<double> coefs(model.enet.coefficients.data(),
                                  model.enet.coefficients.data() + model.enet.coefficients.size());
        j["coefficients"] = {{"intercept", model.enet.intercept}, {"values", coefs}};
    } else {
        j["hyperparameters"] = {{"n_trees", model.forest_params.n_trees},
                                {"mtry", model.forest_params.mtry},
                                {"min_leaf", model.forest_params.min_leaf},
                                {"max_depth", model.forest_params.max_depth},
                                {"bootstrap", model.forest_params.bootstrap}};
        nlohmann::json trees = nlohmann::json::array();
        for (const Tree& tree : model.forest.trees) {
            nlohmann::json nodes = nlohmann::json::array();
            for (const TreeNode& n : tree.nodes)
                nodes.push_back(nlohmann::json{{"f", n.feature},
                                               {"t", n.threshold},
                                               {"v", n.value},
                                               {"l", n.left},
                                               {"r", n.right}});
            trees.push_back(std::move(nodes));
        }
        j["trees"] = std::move(trees);
    }
    j["feature_names"] = model.feature_names;
    const Standardization& s = model.standardization;
    j["standardization"] = {
        {"mean", std::vector<double>(s.mean.data(), s.mean.data() + s.mean.size())},
        {"scale", std::vector<double>(s.scale.data(), s.scale.data() + s.scale.size())},
        {"passthrough", s.passthrough},
        {"zero_variance", s.zero_variance}};
    j["seed"] = model.seed;
    j["training_digest"] = model.training_digest;
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error("cannot write model: " + path);
    out << j.dump(2) << '\n';
}

Model load_model(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw Error("cannot open model: " + path);
    nlohmann::json j = nlohmann::json::parse(in);
    Model m;
    m.kind = learner_from_name(j.at("kind").get<std::string>());
    m.feature_names = j.at("feature_names").get<std::vector<std::string>>();
    const nlohmann::json& st = j.at("standardization");
    auto mean = st.at("mean").get<std::vector<double>>();
    auto scale = st.at("scale").get<std::vector<double>>();
    m.standardization.mean = Eigen::Map<Eigen::VectorXd>(mean.data(),
                                                         static_cast<Eigen::Index>(mean.size()));
    m.standardization.scale = Eigen::Map<Eigen::VectorXd>(scale.data(),
                                                          static_cast<Eigen::Index>(scale.size()));
    m.standardization.passthrough = st.at("passthrough").get<std::vector<bool>>();
    m.standardization.zero_variance = st.at("zero_variance").get<std::vector<bool>>();
    const nlohmann::json& hp = j.at("hyperparameters");
    if (m.kind == LearnerKind::ElasticNet) {
        m.enet_params.lambda = hp.at("lambda").get<double>();
        m.enet_params.alpha = hp.at("alpha").get<double>();
        m.enet_params.tol = hp.at("tol").get<double>();
        m.enet_params.max_iter = hp.at("max_iter").get<int>();
        auto coefs = j.at("coefficients").at("values").get<std::vector<double>>();
        m.enet.coefficients =
            Eigen::Map<Eigen::VectorXd>(coefs.data(), static_cast<Eigen::Index>(coefs.size()));
        m.enet.intercept = j.at("coefficients").at("intercept").get<double>();
    } else {
        m.forest_params.n_trees = hp.at("n_trees").get<int>();
        m.forest_params.mtry = hp.at("mtry").get<int>();
        m.forest_params.min_leaf = hp.at("min_leaf").get<int>();
        m.forest_params.max_depth = hp.at("max_depth").get<int>();
        m.forest_params.bootstrap = hp.at("bootstrap").get<bool>();
        for (const nlohmann::json& nodes : j.at("trees")) {
            Tree tree;
            for (const nlohmann::json& n : nodes)
                tree.nodes.push_back(TreeNode{n.at("f").get<int>(), n.at("t").get<double>(),
                                              n.at("v").get<double>(), n.at("l").get<int>(),
                                              n.at("r").get<int>()});
            m.forest.trees.push_back(std::move(tree));
        }
    }
    m.seed = j.at("seed").get<std::uint64_t>();
    m.training_digest = j.at("training_digest").get<std::string>();
    return m;
}

namespace {

struct FoldData {
    Eigen::MatrixXd Xtr;
    Eigen::VectorXd ytr;
    Eigen::MatrixXd Xte;
    Eigen::VectorXd yte;
    std::vector<std::string> names;
    std::vector<bool> binary;
};

// True when a is the smaller model under the tie rule.
bool smaller_cell(const GridCell& a, const GridCell& b, LearnerKind kind) {
    if (kind == LearnerKind::ElasticNet) {
        if (a.enet_params.lambda != b.enet_params.lambda)
            return a.enet_params.lambda > b.enet_params.lambda;
        return a.enet_params.alpha < b.enet_params.alpha;
    }
    if (a.forest_params.n_trees != b.forest_params.n_trees)
        return a.forest_params.n_trees < b.forest_params.n_trees;
    if (a.forest_params.min_leaf != b.forest_params.min_leaf)
        return a.forest_params.min_leaf > b.forest_params.min_leaf;
    return a.forest_params.mtry < b.forest_params.mtry;
}

}  // namespace

GridResult grid_search(const Dataset& ds, LearnerKind kind, const EnetGrid& enet_grid,
                       const ForestGrid& forest_grid, const ElasticNetParams& enet_base,
                       const ForestParams& forest_base, int folds, std::uint64_t seed,
                       bool use_rfe, const RfeParams& rfe, int threads) {
    GridResult result;
    result.kind = kind;

    std::vector<Fold> plan = group_kfold(ds.groups, folds, mix_key(seed, 0x67726964));
    std::vector<FoldData> fold_data;
    fold_data.reserve(plan.size());
    for (std::size_t f = 0; f < plan.size(); ++f) {
        const Fold& fold = plan[f];
        std::vector<std::size_t> cols;
        if (use_rfe) {
            RfeParams fold_rfe = rfe;
            fold_rfe.seed = mix_key(seed, 0x100 + f);
            cols = run_rfe_on_rows(ds, fold.train_rows, fold_rfe).selected_columns;
        } else {
            cols.resize(ds.cols());
            for (std::size_t c = 0; c < cols.size(); ++c) cols[c] = c;
        }
        FoldData data;
        data.Xtr = gather_cols(gather_rows(ds.X, fold.train_rows), cols);
        data.ytr = gather(ds.y, fold.train_rows);
        data.Xte = gather_cols(gather_rows(ds.X, fold.test_rows), cols);
        data.yte = gather(ds.y, fold.test_rows);
        for (std::size_t c : cols) {
            data.names.push_back(ds.feature_names[c]);
            data.binary.push_back(ds.binary_column[c]);
        }
        fold_data.push_back(std::move(data));
    }

    std::vector<GridCell> cells;
    if (kind == LearnerKind::ElasticNet) {
        if (enet_grid.lambdas.empty() || enet_grid.alphas.empty())
            throw ConfigInvalid("elastic net grid must be non-empty");
        for (double lambda : enet_grid.lambdas) {
            for (double alpha : enet_grid.alphas) {
                GridCell cell;
                cell.enet_params = enet_base;
                cell.enet_params.lambda = lambda;
                cell.enet_params.alpha = alpha;
                cell.forest_params = forest_base;
                cells.push_back(std::move(cell));
            }
        }
    } else {
        if (forest_grid.n_trees.empty() || forest_grid.mtrys.empty() ||
            forest_grid.min_leafs.empty())
            throw ConfigInvalid("forest grid must be non-empty");
        for (int n_trees : forest_grid.n_trees) {
            for (int mtry : forest_grid.mtrys) {
                for (int min_leaf : forest_grid.min_leafs) {
                    GridCell cell;
                    cell.enet_params = enet_base;
                    cell.forest_params = forest_base;
                    cell.forest_params.n_trees = n_trees;
                    cell.forest_params.mtry = mtry;
                    cell.forest_params.min_leaf = min_leaf;
                    cell.forest_params.threads = threads;
                    cells.push_back(std::move(cell));
                }
            }
        }
    }

    for (GridCell& cell : cells) {
        try {
            double sum = 0.0;
            for (const FoldData& data : fold_data) {
                Model m = fit_model(data.Xtr, data.ytr, data.names, data.binary, kind,
                                    cell.enet_params, cell.forest_params);
                double r2 = holdout_r2(data.yte, m.predict(data.Xte));
                cell.fold_r2.push_back(r2);
                sum += r2;
            }
            cell.mean_r2 = sum / static_cast<double>(fold_data.size());
        } catch (const std::exception& e) {
            cell.failed = true;
            cell.failure = e.what();
            cell.fold_r2.clear();
            cell.mean_r2 = -std::numeric_limits<double>::infinity();
        }
    }

    result.cells = std::move(cells);
    bool found = false;
    for (std::size_t i = 0; i < result.cells.size(); ++i) {
        const GridCell& cell = result.cells[i];
        if (cell.failed) continue;
        if (!found) {
            result.best = i;
            found = true;
            continue;
        }
        const GridCell& incumbent = result.cells[result.best];
        if (cell.mean_r2 > incumbent.mean_r2 ||
            (cell.mean_r2 == incumbent.mean_r2 && smaller_cell(cell, incumbent, kind)))
            result.best = i;
    }
    if (!found) throw Error("every grid cell failed during grid search");
    return result;
}

}  // namespace locorank
