#pragma once

#include <vector>

#include <Eigen/Dense>

namespace locorank {

inline Eigen::MatrixXd gather_cols(const Eigen::MatrixXd& X,
                                   const std::vector<std::size_t>& cols) {
    Eigen::MatrixXd out(X.rows(), static_cast<Eigen::Index>(cols.size()));
    for (std::size_t i = 0; i < cols.size(); ++i)
        out.col(static_cast<Eigen::Index>(i)) = X.col(static_cast<Eigen::Index>(cols[i]));
    return out;
}

inline Eigen::MatrixXd gather_rows(const Eigen::MatrixXd& X,
                                   const std::vector<std::size_t>& rows) {
    Eigen::MatrixXd out(static_cast<Eigen::Index>(rows.size()), X.cols());
    for (std::size_t i = 0; i < rows.size(); ++i)
        out.row(static_cast<Eigen::Index>(i)) = X.row(static_cast<Eigen::Index>(rows[i]));
    return out;
}

inline Eigen::VectorXd gather(const Eigen::VectorXd& v, const std::vector<std::size_t>& rows) {
    Eigen::VectorXd out(static_cast<Eigen::Index>(rows.size()));
    for (std::size_t i = 0; i < rows.size(); ++i)
        out(static_cast<Eigen::Index>(i)) = v(static_cast<Eigen::Index>(rows[i]));
    return out;
}

}  // namespace locorank
