#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace locorank {

struct Fold {
    std::vector<std::size_t> train_rows;
    std::vector<std::size_t> test_rows;
};

// Splits rows into k folds so that all rows of a participant land in the same
// fold and fold participant counts differ by at most one. Deterministic for a
// given seed. Throws TooManyFolds when k exceeds the participant count.
std::vector<Fold> group_kfold(const std::vector<std::string>& groups, int k, std::uint64_t seed);

// Asserts that no participant appears on both sides of a split. Throws
// LeakageDetected on violation. Every call is tallied so test harnesses can
// report how many splits were checked.
void check_no_group_overlap(const std::vector<std::string>& groups,
                            const std::vector<std::size_t>& train_rows,
                            const std::vector<std::size_t>& test_rows);

struct LeakageStats {
    std::uint64_t checks = 0;
    std::uint64_t violations = 0;
};

LeakageStats leakage_stats();
void reset_leakage_stats();

}  // namespace locorank
