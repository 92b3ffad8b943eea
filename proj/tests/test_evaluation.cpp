#include <doctest.h>

#include <cmath>
#include <random>
#include <vector>

#include "locorank/dataset.hpp"
#include "locorank/errors.hpp"
#include "locorank/evaluation.hpp"
#include "locorank/folds.hpp"
#include "locorank/synth.hpp"

#include "builders.hpp"
#include "oracles.hpp"

using namespace locorank;

namespace {

Eigen::VectorXd vec(std::initializer_list<double> values) {
    Eigen::VectorXd v(static_cast<Eigen::Index>(values.size()));
    Eigen::Index i = 0;
    for (double x : values) v[i++] = x;
    return v;
}

RankedList list_for(const std::string& pid, bool impaired,
                    const std::vector<double>& actual, const std::vector<double>& predicted) {
    RankedList list;
    list.participant_id = pid;
    list.impaired = impaired;
    for (std::size_t i = 0; i < actual.size(); ++i) {
        RankedTechnique rt;
        rt.technique = kAllTechniques[i];
        rt.actual_time = actual[i];
        rt.predicted_time = predicted[i];
        list.techniques.push_back(rt);
    }
    assign_ranks(list);
    return list;
}

Dataset cs_dataset(double sigma, int impaired = 4, int non_impaired = 4) {
    CohortConfig config;
    config.n_impaired = impaired;
    config.n_non_impaired = non_impaired;
    config.trials_per_block = 2;
    config.blocks = 1;
    config.noise_sigma = sigma;
    config.sample_rate = 18.0;
    config.seed = 77;
    SynthCohort cohort = generate_cohort(config, default_demands());
    return build_cs(cohort.sessions, cohort.questionnaires, TechniqueId::ChickenAcceleration);
}

}  // namespace

TEST_CASE("score helpers match the references") {
    Eigen::VectorXd a = vec({3.0, 5.0, 7.0, 9.0});
    Eigen::VectorXd p = vec({2.5, 5.5, 6.5, 9.5});
    std::vector<double> av(a.data(), a.data() + 4), pv(p.data(), p.data() + 4);
    CHECK(r2_score(a, p) == doctest::Approx(oracles::r2(av, pv)));
    CHECK(rmse(a, p) == doctest::Approx(0.5));
    // MAPE: mean of |err|/actual in percent
    double expected = 100.0 * (0.5 / 3 + 0.5 / 5 + 0.5 / 7 + 0.5 / 9) / 4;
    CHECK(mape(a, p) == doctest::Approx(expected));
}

TEST_CASE("score helper edge cases") {
    CHECK(r2_score(vec({2, 2, 2}), vec({1, 2, 3})) == 0.0);  // zero-variance truth
    CHECK_THROWS_AS(r2_score(vec({1}), vec({1, 2})), LengthMismatch);
    CHECK_THROWS_AS(r2_score(vec({}), vec({})), EmptySeries);
    CHECK_THROWS_AS(mape(vec({0.0, 1.0}), vec({1.0, 1.0})), NonFiniteInput);
}

TEST_CASE("cross_validate predicts every row exactly once") {
    Dataset ds = cs_dataset(0.1);
    CvConfig config;
    config.kind = LearnerKind::RandomForest;
    config.forest.n_trees = 30;
    config.folds = 4;
    config.use_rfe = false;
    config.threads = 2;

    reset_leakage_stats();
    CvResult result = cross_validate(ds, config);
    CHECK(result.folds.size() == 4);
    REQUIRE(result.predictions.size() == static_cast<Eigen::Index>(ds.rows()));
    for (Eigen::Index i = 0; i < result.predictions.size(); ++i)
        CHECK(std::isfinite(result.predictions[i]));
    std::size_t rows_seen = 0;
    for (const FoldScore& f : result.folds) rows_seen += f.test_rows;
    CHECK(rows_seen == ds.rows());
    CHECK(leakage_stats().checks >= 4);
    CHECK(leakage_stats().violations == 0);
    CHECK(result.mean_r2 > 0.0);
}

TEST_CASE("cross_validate with rfe reports per-fold subset sizes") {
    Dataset ds = cs_dataset(0.1);
    CvConfig config;
    config.kind = LearnerKind::RandomForest;
    config.forest.n_trees = 20;
    config.folds = 3;
    config.use_rfe = true;
    config.rfe.cv_folds = 3;
    CvResult result = cross_validate(ds, config);
    for (const FoldScore& f : result.folds) CHECK(f.selected_units >= 1);
}

TEST_CASE("rank assignment sorts by time with name tie-breaks") {
    RankedList list = list_for("P1", false, {5.0, 3.0, 3.0, 8.0, 1.0, 9.0},
                               {2.0, 2.0, 2.0, 4.0, 1.0, 5.0});
    // actual: Teleport(1.0) first; tie 3.0 between ChickenAcceleration and
    // GrabAndPull resolves in enum (= name) order.
    CHECK(list.techniques[4].actual_rank == 1);  // Teleport
    CHECK(list.techniques[1].actual_rank == 2);  // ChickenAcceleration
    CHECK(list.techniques[2].actual_rank == 3);  // GrabAndPull
    CHECK(list.techniques[0].actual_rank == 4);  // AstralBody 5.0
    // predicted: three-way tie at 2.0 keeps enum order
    CHECK(list.techniques[4].predicted_rank == 1);
    CHECK(list.techniques[0].predicted_rank == 2);
    CHECK(list.techniques[1].predicted_rank == 3);
    CHECK(list.techniques[2].predicted_rank == 4);

    std::vector<TechniqueId> pred_order = list.predicted_order();
    CHECK(pred_order.front() == TechniqueId::Teleport);
    CHECK(pred_order.size() == 6);
}

TEST_CASE("rank report: perfect, reversed, and shifted predictions") {
    std::vector<double> times = {4.0, 6.0, 8.0, 10.0, 12.0, 14.0};
    std::vector<double> reversed(times.rbegin(), times.rend());
    std::vector<double> shifted = times;
    for (double& t : shifted) t += 100.0;

    RankingOutcome outcome;
    outcome.list_size = 6;
    for (int p = 0; p < 4; ++p)
        outcome.participants.push_back(
            list_for("P" + std::to_string(p), p < 2, times, times));

    RankReport perfect = rank_report(outcome);
    for (double acc : perfect.all.accuracy_by_rank) CHECK(acc == doctest::Approx(1.0));
    CHECK(perfect.all.overall_accuracy == doctest::Approx(1.0));
    CHECK(perfect.all.overall_mape == doctest::Approx(0.0));
    CHECK(perfect.impaired.participants == 2);
    CHECK(perfect.non_impaired.participants == 2);

    RankingOutcome rev;
    rev.list_size = 6;
    for (int p = 0; p < 4; ++p)
        rev.participants.push_back(list_for("P" + std::to_string(p), false, times, reversed));
    RankReport reversed_report = rank_report(rev);
    for (double acc : reversed_report.all.accuracy_by_rank) CHECK(acc == doctest::Approx(0.0));

    RankingOutcome shift;
    shift.list_size = 6;
    for (int p = 0; p < 4; ++p)
        shift.participants.push_back(list_for("P" + std::to_string(p), false, times, shifted));
    RankReport shift_report = rank_report(shift);
    for (double acc : shift_report.all.accuracy_by_rank) CHECK(acc == doctest::Approx(1.0));
}

TEST_CASE("rank report mape pairs predicted and actual times rank by rank") {
    // One participant: predicted order swaps the two fastest techniques.
    RankedList list =
        list_for("P1", true, {10.0, 20.0, 30.0, 40.0, 50.0, 60.0},
                 {22.0, 11.0, 33.0, 44.0, 55.0, 66.0});
    RankingOutcome outcome;
    outcome.list_size = 6;
    outcome.participants.push_back(list);
    RankReport report = rank_report(outcome);
    // rank 1: predicted pick has predicted time 11; actual rank-1 time is 10.
    CHECK(report.all.mape_by_rank[0] == doctest::Approx(100.0 * 1.0 / 10.0));
    CHECK(report.all.mape_by_rank[1] == doctest::Approx(100.0 * 2.0 / 20.0));
    CHECK(report.all.accuracy_by_rank[0] == doctest::Approx(0.0));
    CHECK(report.all.accuracy_by_rank[2] == doctest::Approx(1.0));
    CHECK(report.non_impaired.participants == 0);
    for (double m : report.non_impaired.mape_by_rank) CHECK(m == 0.0);
}

TEST_CASE("rank_techniques aggregates trials per participant and technique") {
    Dataset ds = cs_dataset(0.05);
    CvConfig config;
    config.kind = LearnerKind::RandomForest;
    config.forest.n_trees = 40;
    config.folds = 4;
    config.use_rfe = false;
    RankingOutcome outcome = rank_techniques(ds, config);

    CHECK(outcome.list_size == 5);  // calibration technique is not ranked
    CHECK(outcome.participants.size() == 8);
    for (const RankedList& list : outcome.participants) {
        CHECK(list.complete);
        REQUIRE(list.techniques.size() == 5);
        std::vector<int> ranks;
        double mean_tech_time = 0.0;
        for (const RankedTechnique& rt : list.techniques) {
            CHECK(rt.technique != TechniqueId::ChickenAcceleration);
            ranks.push_back(rt.predicted_rank);
            mean_tech_time += rt.actual_time;
        }
        std::sort(ranks.begin(), ranks.end());
        CHECK(ranks == std::vector<int>{1, 2, 3, 4, 5});

        // actual_time is the mean of that participant's observed trial times
        for (const RankedTechnique& rt : list.techniques) {
            double sum = 0.0;
            int n = 0;
            for (std::size_t row = 0; row < ds.rows(); ++row) {
                if (ds.groups[row] != list.participant_id) continue;
                if (ds.row_technique[row] != rt.technique) continue;
                sum += ds.y[static_cast<Eigen::Index>(row)];
                ++n;
            }
            REQUIRE(n > 0);
            CHECK(rt.actual_time == doctest::Approx(sum / n));
        }
    }
}

TEST_CASE("ranking is invariant to a constant shift in the target") {
    Dataset ds = cs_dataset(0.1, 3, 3);
    Dataset shifted = ds;
    shifted.y.array() += 50.0;

    SUBCASE("elastic net predictions move with the target") {
        CvConfig config;
        config.folds = 3;
        config.use_rfe = false;
        RankingOutcome base = rank_techniques(ds, config);
        RankingOutcome moved = rank_techniques(shifted, config);
        REQUIRE(base.participants.size() == moved.participants.size());
        for (std::size_t p = 0; p < base.participants.size(); ++p) {
            const auto& a = base.participants[p];
            const auto& b = moved.participants[p];
            REQUIRE(a.techniques.size() == b.techniques.size());
            for (std::size_t i = 0; i < a.techniques.size(); ++i) {
                CHECK(a.techniques[i].predicted_rank == b.techniques[i].predicted_rank);
                CHECK(a.techniques[i].actual_rank == b.techniques[i].actual_rank);
                CHECK(b.techniques[i].predicted_time ==
                      doctest::Approx(a.techniques[i].predicted_time + 50.0).epsilon(1e-6));
            }
        }
    }

    // Leaf means shift with the target, but the impurity sums round
    // differently, so the odd split (and prediction) drifts a little. Ranks
    // must hold; times only approximately.
    SUBCASE("forest ranks survive the shift") {
        CvConfig config;
        config.kind = LearnerKind::RandomForest;
        config.forest.n_trees = 30;
        config.folds = 3;
        config.use_rfe = false;
        RankingOutcome base = rank_techniques(ds, config);
        RankingOutcome moved = rank_techniques(shifted, config);
        REQUIRE(base.participants.size() == moved.participants.size());
        for (std::size_t p = 0; p < base.participants.size(); ++p) {
            const auto& a = base.participants[p];
            const auto& b = moved.participants[p];
            REQUIRE(a.techniques.size() == b.techniques.size());
            for (std::size_t i = 0; i < a.techniques.size(); ++i) {
                CHECK(a.techniques[i].predicted_rank == b.techniques[i].predicted_rank);
                CHECK(a.techniques[i].actual_rank == b.techniques[i].actual_rank);
                CHECK(std::abs(b.techniques[i].predicted_time -
                               a.techniques[i].predicted_time - 50.0) < 0.5);
            }
        }
    }
}

TEST_CASE("fold too small is rejected") {
    Dataset ds = cs_dataset(0.1, 1, 1);
    CvConfig config;
    config.folds = 2;
    config.use_rfe = false;
    // 2 participants over 2 folds leaves 1 participant (10 rows) per training
    // fold; that is allowed. A training fold shrinks below 2 rows only in
    // contrived setups, so build one directly.
    Dataset tiny = ds.subset({0, 10});
    CHECK_THROWS_AS(cross_validate(tiny, config), FoldTooSmall);
}
