#include <algorithm>
#include <cmath>
#include <numeric>

#include "locorank/errors.hpp"
#include "locorank/learners.hpp"
#include "locorank/rng.hpp"
#include "locorank/util.hpp"

namespace locorank {

namespace {

struct TreeBuilder {
    const Eigen::MatrixXd& X;
    const Eigen::VectorXd& y;
    int mtry;
    int min_leaf;
    int max_depth;
    Rng rng;
    std::vector<TreeNode> nodes;
    std::vector<int> pool;                          // feature indices, reshuffled per node
    std::vector<std::pair<double, int>> sorted;     // (value, row) scratch

    TreeBuilder(const Eigen::MatrixXd& x, const Eigen::VectorXd& targets, int mtry_, int min_leaf_,
                int max_depth_, std::uint64_t key)
        : X(x), y(targets), mtry(mtry_), min_leaf(min_leaf_), max_depth(max_depth_), rng(key) {
        pool.resize(static_cast<std::size_t>(X.cols()));
    }

    int leaf(const std::vector<int>& rows) {
        double sum = 0.0;
        for (int r : rows) sum += y(r);
        TreeNode node;
        node.value = sum / static_cast<double>(rows.size());
        nodes.push_back(node);
        return static_cast<int>(nodes.size() - 1);
    }

    int build(const std::vector<int>& rows, int depth) {
        std::size_t n = rows.size();
        bool pure = true;
        for (std::size_t i = 1; i < n && pure; ++i) pure = y(rows[i]) == y(rows[0]);
        if (pure || n < 2 * static_cast<std::size_t>(min_leaf) ||
            (max_depth > 0 && depth >= max_depth))
            return leaf(rows);

        std::iota(pool.begin(), pool.end(), 0);
        int m = std::min<int>(mtry, static_cast<int>(pool.size()));
        for (int i = 0; i < m; ++i)
            std::swap(pool[static_cast<std::size_t>(i)],
                      pool[static_cast<std::size_t>(i) +
                           rng.below(pool.size() - static_cast<std::size_t>(i))]);
        // Ascending feature order makes the tie rule (lowest feature index,
        // smallest threshold) fall out of plain iteration.
        std::sort(pool.begin(), pool.begin() + m);

        double total = 0.0, total_sq = 0.0;
        for (int r : rows) {
            total += y(r);
            total_sq += y(r) * y(r);
        }
        double parent_sse = total_sq - total * total / static_cast<double>(n);

        double best_gain = 0.0;
        int best_feature = -1;
        double best_threshold = 0.0;
        std::size_t best_split = 0;

        for (int fi = 0; fi < m; ++fi) {
            int f = pool[static_cast<std::size_t>(fi)];
            sorted.clear();
            for (int r : rows) sorted.emplace_back(X(r, f), r);
            std::sort(sorted.begin(), sorted.end());

            double left_sum = 0.0, left_sq = 0.0;
            for (std::size_t i = 1; i < n; ++i) {
                double yv = y(sorted[i - 1].second);
                left_sum += yv;
                left_sq += yv * yv;
                if (sorted[i - 1].first == sorted[i].first) continue;
                if (i < static_cast<std::size_t>(min_leaf) ||
                    n - i < static_cast<std::size_t>(min_leaf))
                    continue;
                double li = static_cast<double>(i);
                double ri = static_cast<double>(n - i);
                double right_sum = total - left_sum;
                double right_sq = total_sq - left_sq;
                double sse = (left_sq - left_sum * left_sum / li) +
                             (right_sq - right_sum * right_sum / ri);
                double gain = parent_sse - sse;
                if (gain > best_gain) {
                    double lo = sorted[i - 1].first;
                    double hi = sorted[i].first;
                    double mid = lo + (hi - lo) / 2.0;
                    if (mid >= hi) mid = lo;  // keep <= routing consistent with the partition
                    best_gain = gain;
                    best_feature = f;
                    best_threshold = mid;
                    best_split = i;
                }
            }
        }
        if (best_feature < 0) return leaf(rows);

        sorted.clear();
        for (int r : rows) sorted.emplace_back(X(r, best_feature), r);
        std::sort(sorted.begin(), sorted.end());
        std::vector<int> left_rows, right_rows;
        left_rows.reserve(best_split);
        right_rows.reserve(n - best_split);
        for (std::size_t i = 0; i < n; ++i)
            (i < best_split ? left_rows : right_rows).push_back(sorted[i].second);

        int index = static_cast<int>(nodes.size());
        nodes.push_back(TreeNode{best_feature, best_threshold, 0.0, -1, -1});
        int left = build(left_rows, depth + 1);
        int right = build(right_rows, depth + 1);
        nodes[static_cast<std::size_t>(index)].left = left;
        nodes[static_cast<std::size_t>(index)].right = right;
        return index;
    }
};

}  // namespace

double Tree::predict(const double* x) const {
    int i = 0;
    while (nodes[static_cast<std::size_t>(i)].feature >= 0) {
        const TreeNode& node = nodes[static_cast<std::size_t>(i)];
        i = x[node.feature] <= node.threshold ? node.left : node.right;
    }
    return nodes[static_cast<std::size_t>(i)].value;
}

double ForestFit::predict(const double* x) const {
    double sum = 0.0;
    for (const Tree& t : trees) sum += t.predict(x);
    return sum / static_cast<double>(trees.size());
}

Eigen::VectorXd ForestFit::predict_matrix(const Eigen::MatrixXd& X) const {
    Eigen::VectorXd out(X.rows());
    std::vector<double> row(static_cast<std::size_t>(X.cols()));
    for (Eigen::Index r = 0; r < X.rows(); ++r) {
        for (Eigen::Index c = 0; c < X.cols(); ++c) row[static_cast<std::size_t>(c)] = X(r, c);
        out(r) = predict(row.data());
    }
    return out;
}

ForestFit fit_random_forest(const Eigen::MatrixXd& X, const Eigen::VectorXd& y,
                            const ForestParams& params) {
    if (X.rows() != y.size()) throw Error("random forest: X and y row counts differ");
    if (X.rows() < 2) throw Error("random forest needs at least 2 rows");
    if (!X.allFinite() || !y.allFinite())
        throw NonFiniteInput("random forest inputs must be finite");
    if (params.n_trees < 1) throw ConfigInvalid("random forest needs n_trees >= 1");
    if (params.min_leaf < 1) throw ConfigInvalid("random forest needs min_leaf >= 1");

    int n = static_cast<int>(X.rows());
    int p = static_cast<int>(X.cols());
    int mtry = params.mtry > 0 ? std::min(params.mtry, p)
                               : static_cast<int>((p + 2) / 3);

    ForestFit fit;
    fit.trees.resize(static_cast<std::size_t>(params.n_trees));
    fit.bootstrap_rows.resize(static_cast<std::size_t>(params.n_trees));
    fit.oob_rows.resize(static_cast<std::size_t>(params.n_trees));

    parallel_for(static_cast<std::size_t>(params.n_trees), params.threads, [&](std::size_t t) {
        TreeBuilder builder(X, y, mtry, params.min_leaf, params.max_depth,
                            mix_key(params.seed, t));
        std::vector<int> rows;
        rows.reserve(static_cast<std::size_t>(n));
        if (params.bootstrap) {
            std::vector<bool> in_bag(static_cast<std::size_t>(n), false);
            for (int i = 0; i < n; ++i) {
                int r = static_cast<int>(builder.rng.below(static_cast<std::uint64_t>(n)));
                rows.push_back(r);
                in_bag[static_cast<std::size_t>(r)] = true;
            }
            for (int i = 0; i < n; ++i)
                if (!in_bag[static_cast<std::size_t>(i)]) fit.oob_rows[t].push_back(i);
        } else {
            for (int i = 0; i < n; ++i) rows.push_back(i);
        }
        fit.bootstrap_rows[t] = rows;
        builder.build(rows, 0);
        fit.trees[t].nodes = std::move(builder.nodes);
    });
    return fit;
}

std::string forest_digest(const ForestFit& fit) {
    std::uint64_t h = kFnvBasis;
    std::string scratch;
    for (const Tree& tree : fit.trees) {
        scratch = "T";
        scratch += std::to_string(tree.nodes.size());
        h = fnv1a(scratch, h);
        for (const TreeNode& node : tree.nodes) {
            scratch = std::to_string(node.feature);
            scratch += ':';
            scratch += format_double(node.threshold);
            scratch += ':';
            scratch += format_double(node.value);
            scratch += ':';
            scratch += std::to_string(node.left);
            scratch += ':';
            scratch += std::to_string(node.right);
            scratch += ';';
            h = fnv1a(scratch, h);
        }
    }
    return hex64(h);
}

}  // namespace locorank
