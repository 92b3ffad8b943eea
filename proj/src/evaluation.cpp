#include "locorank/evaluation.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>

#include "locorank/errors.hpp"
#include "locorank/rng.hpp"
#include "gather.hpp"

namespace locorank {

double r2_score(const Eigen::VectorXd& actual, const Eigen::VectorXd& predicted) {
    if (actual.size() != predicted.size())
        throw LengthMismatch(static_cast<std::size_t>(actual.size()),
                             static_cast<std::size_t>(predicted.size()));
    if (actual.size() == 0) throw EmptySeries("r2_score");
    double mean = actual.mean();
    double sst = (actual.array() - mean).square().sum();
    if (sst == 0.0) return 0.0;
    return 1.0 - (actual - predicted).squaredNorm() / sst;
}

double rmse(const Eigen::VectorXd& actual, const Eigen::VectorXd& predicted) {
    if (actual.size() != predicted.size())
        throw LengthMismatch(static_cast<std::size_t>(actual.size()),
                             static_cast<std::size_t>(predicted.size()));
    if (actual.size() == 0) throw EmptySeries("rmse");
    return std::sqrt((actual - predicted).squaredNorm() / static_cast<double>(actual.size()));
}

double mape(const Eigen::VectorXd& actual, const Eigen::VectorXd& predicted) {
    if (actual.size() != predicted.size())
        throw LengthMismatch(static_cast<std::size_t>(actual.size()),
                             static_cast<std::size_t>(predicted.size()));
    if (actual.size() == 0) throw EmptySeries("mape");
    double sum = 0.0;
    for (Eigen::Index i = 0; i < actual.size(); ++i) {
        if (!(actual[i] > 0.0)) throw NonFiniteInput("mape (actual values must be > 0)");
        sum += std::abs(actual[i] - predicted[i]) / actual[i];
    }
    return 100.0 * sum / static_cast<double>(actual.size());
}

CvResult cross_validate(const Dataset& ds, const CvConfig& config) {
    std::vector<Fold> plan = group_kfold(ds.groups, config.folds, config.seed);

    CvResult result;
    result.predictions = Eigen::VectorXd::Constant(static_cast<Eigen::Index>(ds.rows()),
                                                   std::numeric_limits<double>::quiet_NaN());
    double sum_r2 = 0.0;
    double sum_rmse = 0.0;

    for (std::size_t f = 0; f < plan.size(); ++f) {
        const Fold& fold = plan[f];
        check_no_group_overlap(ds.groups, fold.train_rows, fold.test_rows);
        if (fold.train_rows.size() < 2) throw FoldTooSmall(f);

        std::vector<std::size_t> cols;
        std::size_t selected_units = 0;
        if (config.use_rfe) {
            RfeParams fold_rfe = config.rfe;
            fold_rfe.seed = mix_key(config.seed, 0x52464500ULL + f);
            RfeResult sel = run_rfe_on_rows(ds, fold.train_rows, fold_rfe);
            cols = sel.selected_columns;
            selected_units = sel.selected_units.size();
        } else {
            cols.resize(ds.cols());
            for (std::size_t c = 0; c < cols.size(); ++c) cols[c] = c;
        }

        Eigen::MatrixXd Xtr = gather_cols(gather_rows(ds.X, fold.train_rows), cols);
        Eigen::VectorXd ytr = gather(ds.y, fold.train_rows);
        Eigen::MatrixXd Xte = gather_cols(gather_rows(ds.X, fold.test_rows), cols);
        Eigen::VectorXd yte = gather(ds.y, fold.test_rows);
        std::vector<std::string> names;
        std::vector<bool> binary;
        for (std::size_t c : cols) {
            names.push_back(ds.feature_names[c]);
            binary.push_back(ds.binary_column[c]);
        }

        ForestParams forest = config.forest;
        forest.seed = mix_key(config.seed, 0x464f5200ULL + f);
        forest.threads = config.threads;
        Model model = fit_model(Xtr, ytr, names, binary, config.kind, config.enet, forest);
        Eigen::VectorXd pred = model.predict(Xte);

        FoldScore score;
        score.test_rows = fold.test_rows.size();
        score.selected_units = selected_units;
        double mean = yte.mean();
        score.zero_variance_target = (yte.array() - mean).square().sum() == 0.0;
        score.r2 = r2_score(yte, pred);
        score.rmse = rmse(yte, pred);
        sum_r2 += score.r2;
        sum_rmse += score.rmse;
        result.folds.push_back(score);

        for (std::size_t i = 0; i < fold.test_rows.size(); ++i)
            result.predictions[static_cast<Eigen::Index>(fold.test_rows[i])] =
                pred[static_cast<Eigen::Index>(i)];
    }

    result.mean_r2 = sum_r2 / static_cast<double>(plan.size());
    result.mean_rmse = sum_rmse / static_cast<double>(plan.size());
    return result;
}

std::vector<TechniqueId> RankedList::predicted_order() const {
    std::vector<TechniqueId> order(techniques.size());
    for (const RankedTechnique& rt : techniques)
        order[static_cast<std::size_t>(rt.predicted_rank - 1)] = rt.technique;
    return order;
}

std::vector<TechniqueId> RankedList::actual_order() const {
    std::vector<TechniqueId> order(techniques.size());
    for (const RankedTechnique& rt : techniques)
        order[static_cast<std::size_t>(rt.actual_rank - 1)] = rt.technique;
    return order;
}

namespace {

// Assigns 1-based ranks ascending by time; exact ties go to the technique
// whose name sorts first (enum order matches name order).
void assign_ranks(std::vector<RankedTechnique>& list, bool predicted) {
    std::vector<std::size_t> idx(list.size());
    for (std::size_t i = 0; i < idx.size(); ++i) idx[i] = i;
    std::stable_sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) {
        double ta = predicted ? list[a].predicted_time : list[a].actual_time;
        double tb = predicted ? list[b].predicted_time : list[b].actual_time;
        if (ta != tb) return ta < tb;
        return list[a].technique < list[b].technique;
    });
    for (std::size_t r = 0; r < idx.size(); ++r) {
        if (predicted)
            list[idx[r]].predicted_rank = static_cast<int>(r + 1);
        else
            list[idx[r]].actual_rank = static_cast<int>(r + 1);
    }
}

}  // namespace

RankingOutcome rank_techniques(const Dataset& ds, const CvConfig& config) {
    RankingOutcome outcome;
    outcome.cv = cross_validate(ds, config);
    outcome.list_size =
        ds.scenario == Scenario::QS ? static_cast<std::size_t>(kTechniqueCount)
                                     : static_cast<std::size_t>(kTechniqueCount - 1);

    // Participants in order of first appearance.
    std::vector<std::string> pids;
    std::map<std::string, std::size_t> pid_index;
    for (const std::string& pid : ds.groups) {
        if (pid_index.emplace(pid, pids.size()).second) pids.push_back(pid);
    }

    struct Cell {
        double pred_sum = 0.0;
        double actual_sum = 0.0;
        std::size_t n = 0;
    };
    std::vector<std::array<Cell, kTechniqueCount>> cells(pids.size());
    std::vector<bool> impaired(pids.size(), false);
    for (std::size_t row = 0; row < ds.rows(); ++row) {
        std::size_t p = pid_index.at(ds.groups[row]);
        Cell& cell = cells[p][static_cast<std::size_t>(ds.row_technique[row])];
        cell.pred_sum += outcome.cv.predictions[static_cast<Eigen::Index>(row)];
        cell.actual_sum += ds.y[static_cast<Eigen::Index>(row)];
        cell.n += 1;
        impaired[p] = ds.row_impaired[row];
    }

    for (std::size_t p = 0; p < pids.size(); ++p) {
        RankedList list;
        list.participant_id = pids[p];
        list.impaired = impaired[p];
        for (TechniqueId tech : kAllTechniques) {
            if (ds.scenario != Scenario::QS && tech == ds.calibration) continue;
            const Cell& cell = cells[p][static_cast<std::size_t>(tech)];
            if (cell.n == 0) {
                list.complete = false;
                continue;
            }
            RankedTechnique rt;
            rt.technique = tech;
            rt.predicted_time = cell.pred_sum / static_cast<double>(cell.n);
            rt.actual_time = cell.actual_sum / static_cast<double>(cell.n);
            list.techniques.push_back(rt);
        }
        assign_ranks(list);
        outcome.participants.push_back(std::move(list));
    }
    return outcome;
}

void assign_ranks(RankedList& list) {
    assign_ranks(list.techniques, true);
    assign_ranks(list.techniques, false);
}

namespace {

RankSlice slice_report(const std::vector<const RankedList*>& lists, std::size_t list_size) {
    RankSlice slice;
    slice.participants = lists.size();
    slice.accuracy_by_rank.assign(list_size, 0.0);
    slice.mape_by_rank.assign(list_size, 0.0);
    for (std::size_t r = 1; r <= list_size; ++r) {
        std::size_t counted = 0;
        std::size_t hits = 0;
        double ape_sum = 0.0;
        for (const RankedList* list : lists) {
            if (list->techniques.size() < r) continue;
            const RankedTechnique* pred_r = nullptr;
            const RankedTechnique* actual_r = nullptr;
            for (const RankedTechnique& rt : list->techniques) {
                if (rt.predicted_rank == static_cast<int>(r)) pred_r = &rt;
                if (rt.actual_rank == static_cast<int>(r)) actual_r = &rt;
            }
            ++counted;
            if (pred_r->technique == actual_r->technique) ++hits;
            ape_sum += std::abs(pred_r->predicted_time - actual_r->actual_time) /
                       actual_r->actual_time;
        }
        if (counted > 0) {
            slice.accuracy_by_rank[r - 1] = static_cast<double>(hits) /
                                            static_cast<double>(counted);
            slice.mape_by_rank[r - 1] = 100.0 * ape_sum / static_cast<double>(counted);
        }
    }
    if (list_size > 0) {
        double acc = 0.0;
        double mp = 0.0;
        for (std::size_t r = 0; r < list_size; ++r) {
            acc += slice.accuracy_by_rank[r];
            mp += slice.mape_by_rank[r];
        }
        slice.overall_accuracy = acc / static_cast<double>(list_size);
        slice.overall_mape = mp / static_cast<double>(list_size);
    }
    return slice;
}

}  // namespace

RankReport rank_report(const RankingOutcome& outcome) {
    std::vector<const RankedList*> all;
    std::vector<const RankedList*> impaired;
    std::vector<const RankedList*> non_impaired;
    for (const RankedList& list : outcome.participants) {
        all.push_back(&list);
        (list.impaired ? impaired : non_impaired).push_back(&list);
    }
    RankReport report;
    report.all = slice_report(all, outcome.list_size);
    report.impaired = slice_report(impaired, outcome.list_size);
    report.non_impaired = slice_report(non_impaired, outcome.list_size);
    return report;
}

}  // namespace locorank
