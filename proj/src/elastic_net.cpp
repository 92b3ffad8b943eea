#include <cmath>

#include "locorank/errors.hpp"
#include "locorank/learners.hpp"

namespace locorank {

namespace {

double soft_threshold(double z, double gamma) {
    if (z > gamma) return z - gamma;
    if (z < -gamma) return z + gamma;
    return 0.0;
}

}  // namespace

double elastic_net_objective(const Eigen::MatrixXd& X, const Eigen::VectorXd& y,
                             const Eigen::VectorXd& beta, double intercept, double lambda,
                             double alpha) {
    Eigen::VectorXd r = y - X * beta;
    r.array() -= intercept;
    double n = static_cast<double>(X.rows());
    double loss = r.squaredNorm() / (2.0 * n);
    double penalty = lambda * (alpha * beta.lpNorm<1>() + (1.0 - alpha) / 2.0 * beta.squaredNorm());
    return loss + penalty;
}

ElasticNetFit fit_elastic_net(const Eigen::MatrixXd& X, const Eigen::VectorXd& y,
                              const ElasticNetParams& params) {
    if (X.rows() != y.size()) throw Error("elastic net: X and y row counts differ");
    if (X.rows() < 2) throw Error("elastic net needs at least 2 rows");
    if (!X.allFinite() || !y.allFinite()) throw NonFiniteInput("elastic net inputs must be finite");
    if (params.lambda < 0.0 || params.alpha < 0.0 || params.alpha > 1.0)
        throw ConfigInvalid("elastic net requires lambda >= 0 and alpha in [0, 1]");

    Eigen::Index n = X.rows();
    Eigen::Index p = X.cols();
    double nd = static_cast<double>(n);

    Eigen::VectorXd col_sq(p);
    for (Eigen::Index j = 0; j < p; ++j) col_sq(j) = X.col(j).squaredNorm() / nd;

    ElasticNetFit fit;
    fit.coefficients = Eigen::VectorXd::Zero(p);
    fit.intercept = y.mean();
    Eigen::VectorXd residual = y.array() - fit.intercept;

    double l1 = params.lambda * params.alpha;
    double l2 = params.lambda * (1.0 - params.alpha);

    for (int sweep = 0; sweep < params.max_iter; ++sweep) {
        double max_change = 0.0;
        for (Eigen::Index j = 0; j < p; ++j) {
            double old = fit.coefficients(j);
            double z = X.col(j).dot(residual) / nd + col_sq(j) * old;
            double denom = col_sq(j) + l2;
            double updated = denom > 0.0 ? soft_threshold(z, l1) / denom : 0.0;
            if (updated != old) {
                residual -= X.col(j) * (updated - old);
                fit.coefficients(j) = updated;
                max_change = std::max(max_change, std::abs(updated - old));
            }
        }
        double intercept_shift = residual.mean();
        if (intercept_shift != 0.0) {
            fit.intercept += intercept_shift;
            residual.array() -= intercept_shift;
            max_change = std::max(max_change, std::abs(intercept_shift));
        }
        fit.sweeps = sweep + 1;
        fit.objective_path.push_back(
            residual.squaredNorm() / (2.0 * nd) +
            params.lambda * (params.alpha * fit.coefficients.lpNorm<1>() +
                             (1.0 - params.alpha) / 2.0 * fit.coefficients.squaredNorm()));
        if (max_change < params.tol) {
            fit.converged = true;
            break;
        }
    }
    return fit;
}

}  // namespace locorank
