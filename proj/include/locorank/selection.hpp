#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "locorank/dataset.hpp"

namespace locorank {

struct LinearFit {
    Eigen::VectorXd coefficients;
    double intercept = 0.0;
    bool ridge_fallback = false;  // normal equations were rank deficient
};

// Ordinary least squares on centered data via column-pivoted QR. Falls back
// to ridge with lambda = 1e-6 when X is rank deficient, and says so.
LinearFit fit_least_squares(const Eigen::MatrixXd& X, const Eigen::VectorXd& y);

struct RfeParams {
    std::vector<std::size_t> subset_sizes;  // empty picks {1..min(u,25)} plus u
    double step = 0.0;  // fraction of surviving units dropped per round; <=0 drops one
    int cv_folds = 5;
    std::uint64_t seed = 0;
    std::size_t cap_top_k = 20;  // hard cap on selected units
};

struct RfeResult {
    // Units from strongest to weakest: survivors of the elimination first,
    // then the eliminated units in reverse order of removal.
    std::vector<std::string> ordering;
    std::vector<std::size_t> ordering_units;      // indices into ds.units
    std::vector<std::size_t> sizes;               // evaluated subset sizes
    std::vector<double> cv_scores_by_size;        // mean CV R^2 per size
    std::size_t selected_size = 0;                // chosen unit count
    std::vector<std::size_t> selected_units;      // indices into ds.units
    std::vector<std::size_t> selected_columns;    // union of their columns, ascending
    bool capped = false;                          // cap_top_k truncated the choice
    bool ridge_fallback = false;                  // any internal fit needed the fallback
};

// Recursive feature elimination over feature units. Each round fits least
// squares on standardized columns and drops the unit whose largest absolute
// coefficient is smallest; candidate subset sizes are scored by grouped CV.
// Ties on CV score go to the smaller subset.
RfeResult run_rfe(const Dataset& ds, const RfeParams& params);

// Same procedure restricted to a subset of rows (a training fold).
RfeResult run_rfe_on_rows(const Dataset& ds, const std::vector<std::size_t>& rows,
                          const RfeParams& params);

void save_rfe_report(const RfeResult& result, const std::string& path);

}  // namespace locorank
