#include "locorank/folds.hpp"

#include <algorithm>
#include <atomic>
#include <map>
#include <set>

#include "locorank/errors.hpp"
#include "locorank/rng.hpp"

namespace locorank {

namespace {

std::atomic<std::uint64_t> g_leakage_checks{0};
std::atomic<std::uint64_t> g_leakage_violations{0};

}  // namespace

std::vector<Fold> group_kfold(const std::vector<std::string>& groups, int k, std::uint64_t seed) {
    if (k < 1) throw ConfigInvalid("fold count must be >= 1");
    std::vector<std::string> ids(groups.begin(), groups.end());
    std::sort(ids.begin(), ids.end());
    ids.erase(std::unique(ids.begin(), ids.end()), ids.end());
    if (static_cast<std::size_t>(k) > ids.size())
        throw TooManyFolds(static_cast<std::size_t>(k), ids.size());

    Rng rng(mix_key(seed, 0x666f6c64));  // "fold"
    for (std::size_t i = ids.size(); i > 1; --i)
        std::swap(ids[i - 1], ids[rng.below(i)]);

    std::map<std::string, int> fold_of;
    for (std::size_t i = 0; i < ids.size(); ++i)
        fold_of[ids[i]] = static_cast<int>(i % static_cast<std::size_t>(k));

    std::vector<Fold> folds(static_cast<std::size_t>(k));
    for (std::size_t row = 0; row < groups.size(); ++row) {
        int f = fold_of.at(groups[row]);
        for (int g = 0; g < k; ++g) {
            if (g == f)
                folds[static_cast<std::size_t>(g)].test_rows.push_back(row);
            else
                folds[static_cast<std::size_t>(g)].train_rows.push_back(row);
        }
    }
    for (const Fold& f : folds)
        check_no_group_overlap(groups, f.train_rows, f.test_rows);
    return folds;
}

void check_no_group_overlap(const std::vector<std::string>& groups,
                            const std::vector<std::size_t>& train_rows,
                            const std::vector<std::size_t>& test_rows) {
    g_leakage_checks.fetch_add(1, std::memory_order_relaxed);
    std::set<std::string> train_ids;
    for (std::size_t r : train_rows) train_ids.insert(groups[r]);
    for (std::size_t r : test_rows) {
        if (train_ids.count(groups[r])) {
            g_leakage_violations.fetch_add(1, std::memory_order_relaxed);
            throw LeakageDetected("participant " + groups[r] +
                                  " appears in both train and test rows");
        }
    }
}

LeakageStats leakage_stats() {
    return {g_leakage_checks.load(std::memory_order_relaxed),
            g_leakage_violations.load(std::memory_order_relaxed)};
}

void reset_leakage_stats() {
    g_leakage_checks.store(0, std::memory_order_relaxed);
    g_leakage_violations.store(0, std::memory_order_relaxed);
}

}  // namespace locorank
