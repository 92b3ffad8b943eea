#include "locorank/selection.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <set>

#include <json.hpp>

#include "locorank/errors.hpp"
#include "locorank/folds.hpp"
#include "locorank/rng.hpp"
#include "gather.hpp"

namespace locorank {

LinearFit fit_least_squares(const Eigen::MatrixXd& X, const Eigen::VectorXd& y) {
    if (X.rows() != y.size()) throw Error("least squares: X and y row counts differ");
    if (X.rows() == 0) throw Error("least squares on an empty matrix");
    LinearFit fit;
    Eigen::Index p = X.cols();
    if (p == 0) {
        fit.coefficients = Eigen::VectorXd();
        fit.intercept = y.mean();
        return fit;
    }
    Eigen::RowVectorXd mu = X.colwise().mean();
    Eigen::MatrixXd Xc = X.rowwise() - mu;
    double ybar = y.mean();
    Eigen::VectorXd yc = y.array() - ybar;

    Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(Xc);
    if (qr.rank() < p) {
        fit.ridge_fallback = true;
        double lambda = 1e-6 * static_cast<double>(X.rows());
        Eigen::MatrixXd gram = Xc.transpose() * Xc;
        gram.diagonal().array() += lambda;
        fit.coefficients = gram.ldlt().solve(Xc.transpose() * yc);
    } else {
        fit.coefficients = qr.solve(yc);
    }
    fit.intercept = ybar - mu.dot(fit.coefficients);
    return fit;
}

std::vector<std::string> cap_top_k(const std::vector<std::string>& ranked, std::size_t k) {
    if (ranked.size() <= k) return ranked;
    return std::vector<std::string>(ranked.begin(), ranked.begin() + static_cast<std::ptrdiff_t>(k));
}

namespace {

double holdout_r2(const Eigen::VectorXd& actual, const Eigen::VectorXd& predicted) {
    double mean = actual.mean();
    double sst = (actual.array() - mean).square().sum();
    if (sst == 0.0) return 0.0;
    double sse = (actual - predicted).squaredNorm();
    return 1.0 - sse / sst;
}

std::vector<std::size_t> unit_columns(const std::vector<FeatureUnit>& units,
                                      const std::vector<std::size_t>& unit_ids) {
    std::vector<std::size_t> cols;
    for (std::size_t u : unit_ids)
        cols.insert(cols.end(), units[u].columns.begin(), units[u].columns.end());
    std::sort(cols.begin(), cols.end());
    return cols;
}

}  // namespace

RfeResult run_rfe_on_rows(const Dataset& ds, const std::vector<std::size_t>& rows,
                          const RfeParams& params) {
    Dataset sub = ds.subset(rows);
    std::size_t u = sub.units.size();
    if (u == 0) throw Error("feature selection on a dataset with no feature units");

    Standardization stats = fit_standardization(sub.X, sub.binary_column);
    Eigen::MatrixXd Xs = stats.apply(sub.X);

    RfeResult result;
    std::vector<std::size_t> active(u);
    for (std::size_t i = 0; i < u; ++i) active[i] = i;
    std::vector<std::size_t> eliminated;

    while (active.size() > 1) {
        std::vector<std::size_t> cols = unit_columns(sub.units, active);
        LinearFit fit = fit_least_squares(gather_cols(Xs, cols), sub.y);
        result.ridge_fallback = result.ridge_fallback || fit.ridge_fallback;

        std::vector<double> importance(active.size(), 0.0);
        for (std::size_t ai = 0; ai < active.size(); ++ai) {
            for (std::size_t col : sub.units[active[ai]].columns) {
                auto pos = std::lower_bound(cols.begin(), cols.end(), col) - cols.begin();
                importance[ai] = std::max(importance[ai],
                                          std::abs(fit.coefficients(static_cast<Eigen::Index>(pos))));
            }
        }

        std::size_t n_drop = 1;
        if (params.step > 0.0)
            n_drop = std::max<std::size_t>(
                1, static_cast<std::size_t>(std::floor(params.step *
                                                       static_cast<double>(active.size()))));
        n_drop = std::min(n_drop, active.size() - 1);

        std::vector<std::size_t> order(active.size());
        for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
        std::stable_sort(order.begin(), order.end(),
                         [&](std::size_t a, std::size_t b) { return importance[a] < importance[b]; });
        std::set<std::size_t> dropping(order.begin(),
                                       order.begin() + static_cast<std::ptrdiff_t>(n_drop));
        std::vector<std::size_t> survivors;
        for (std::size_t ai = 0; ai < active.size(); ++ai) {
            if (dropping.count(ai))
                eliminated.push_back(active[ai]);
            else
                survivors.push_back(active[ai]);
        }
        active = std::move(survivors);
    }

    result.ordering_units = active;  // the lone survivor
    for (auto it = eliminated.rbegin(); it != eliminated.rend(); ++it)
        result.ordering_units.push_back(*it);
    for (std::size_t unit : result.ordering_units)
        result.ordering.push_back(sub.units[unit].name);

    if (params.subset_sizes.empty()) {
        for (std::size_t s = 1; s <= std::min<std::size_t>(u, 25); ++s) result.sizes.push_back(s);
        if (u > 25) result.sizes.push_back(u);
    } else {
        result.sizes = params.subset_sizes;
        std::sort(result.sizes.begin(), result.sizes.end());
        result.sizes.erase(std::unique(result.sizes.begin(), result.sizes.end()),
                           result.sizes.end());
        for (std::size_t s : result.sizes)
            if (s < 1 || s > u)
                throw ConfigInvalid("subset size " + std::to_string(s) +
                                    " outside [1, " + std::to_string(u) + "]");
    }

    std::set<std::string> pid_set(sub.groups.begin(), sub.groups.end());
    int k = std::min<int>(params.cv_folds, static_cast<int>(pid_set.size()));
    std::size_t best_size = u;
    if (k >= 2) {
        std::vector<Fold> folds = group_kfold(sub.groups, k, mix_key(params.seed, 0x72666531));
        double best_score = -std::numeric_limits<double>::infinity();
        for (std::size_t s : result.sizes) {
            std::vector<std::size_t> ordered_prefix(result.ordering_units.begin(),
                                                    result.ordering_units.begin() +
                                                        static_cast<std::ptrdiff_t>(s));
            std::vector<std::size_t> cols = unit_columns(sub.units, ordered_prefix);
            double score_sum = 0.0;
            for (const Fold& fold : folds) {
                check_no_group_overlap(sub.groups, fold.train_rows, fold.test_rows);
                Eigen::MatrixXd Xtr = gather_cols(gather_rows(Xs, fold.train_rows), cols);
                LinearFit fit = fit_least_squares(Xtr, gather(sub.y, fold.train_rows));
                result.ridge_fallback = result.ridge_fallback || fit.ridge_fallback;
                Eigen::MatrixXd Xte = gather_cols(gather_rows(Xs, fold.test_rows), cols);
                Eigen::VectorXd pred =
                    (Xte * fit.coefficients).array() + fit.intercept;
                score_sum += holdout_r2(gather(sub.y, fold.test_rows), pred);
            }
            double score = score_sum / static_cast<double>(folds.size());
            result.cv_scores_by_size.push_back(score);
            if (score > best_score) {
                best_score = score;
                best_size = s;
            }
        }
    } else {
        result.cv_scores_by_size.assign(result.sizes.size(), 0.0);
    }

    std::size_t cap = params.cap_top_k == 0 ? u : params.cap_top_k;
    result.selected_size = std::min(best_size, cap);
    result.capped = best_size > result.selected_size;
    result.selected_units.assign(result.ordering_units.begin(),
                                 result.ordering_units.begin() +
                                     static_cast<std::ptrdiff_t>(result.selected_size));
    result.selected_columns = unit_columns(sub.units, result.selected_units);
    return result;
}

RfeResult run_rfe(const Dataset& ds, const RfeParams& params) {
    std::vector<std::size_t> rows(ds.rows());
    for (std::size_t i = 0; i < rows.size(); ++i) rows[i] = i;
    return run_rfe_on_rows(ds, rows, params);
}

void save_rfe_report(const RfeResult& result, const std::string& path) {
    nlohmann::json j;
    j["ordering"] = result.ordering;
    nlohmann::json scores = nlohmann::json::array();
    for (std::size_t i = 0; i < result.sizes.size(); ++i)
        scores.push_back(nlohmann::json{{"size", result.sizes[i]},
                                        {"r2", result.cv_scores_by_size[i]}});
    j["cv_scores_by_size"] = std::move(scores);
    std::vector<std::string> selected;
    for (std::size_t i = 0; i < result.selected_size; ++i) selected.push_back(result.ordering[i]);
    j["selected"] = std::move(selected);
    j["capped"] = result.capped;
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error("cannot write selection report: " + path);
    out << j.dump(2) << '\n';
}

}  // namespace locorank
