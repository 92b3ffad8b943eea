// Release gate: one self-contained check per shipping requirement, one
// PASS/FAIL line each, nonzero exit if anything fails. Tolerances are pinned
// here, not in a config, so a regression cannot hide behind a loosened knob.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <random>
#include <set>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "builders.hpp"
#include "locorank/dataset.hpp"
#include "locorank/errors.hpp"
#include "locorank/evaluation.hpp"
#include "locorank/folds.hpp"
#include "locorank/learners.hpp"
#include "locorank/metrics.hpp"
#include "locorank/pipeline.hpp"
#include "locorank/questionnaire.hpp"
#include "locorank/session.hpp"
#include "locorank/synth.hpp"
#include "oracles.hpp"

using namespace locorank;

namespace {

int g_failures = 0;

void report(int number, const std::string& text, bool ok) {
    std::printf("[%s] %d. %s\n", ok ? "PASS" : "FAIL", number, text.c_str());
    if (!ok) ++g_failures;
}

double seconds_since(std::chrono::steady_clock::time_point start) {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
}

bool close_rel(double got, double want, double tol) {
    return std::abs(got - want) <= tol * std::max({1.0, std::abs(got), std::abs(want)});
}

double norm3(const Vec3& v) { return std::sqrt(v.x * v.x + v.y * v.y + v.z * v.z); }

// ---- 1: metric extraction vs the independent references --------------------

struct DeviceColumns {
    std::vector<Vec3> pos, rot, vel, angvel, acc, angacc;
    std::vector<double> speeds;
};

DeviceColumns device_columns(const std::vector<DeviceSample>& samples) {
    DeviceColumns c;
    for (const DeviceSample& s : samples) {
        c.pos.push_back(s.position);
        c.rot.push_back(s.rotation_euler);
        c.vel.push_back(s.velocity);
        c.angvel.push_back(s.angular_velocity);
        c.acc.push_back(s.acceleration);
        c.angacc.push_back(s.angular_acceleration);
        c.speeds.push_back(norm3(s.velocity));
    }
    return c;
}

std::vector<double> norms(const std::vector<Vec3>& v) {
    std::vector<double> out;
    for (const Vec3& x : v) out.push_back(norm3(x));
    return out;
}

// All 33 reference values for one trial, assembled only from oracles.hpp.
std::array<double, kMetricCount> reference_metrics(const TrialTelemetry& t) {
    std::array<double, kMetricCount> r{};
    const std::vector<ControllerSample>& dom = t.dominant_controller();
    std::vector<DeviceSample> dom_base;
    for (const ControllerSample& c : dom) dom_base.push_back(c.base);

    auto device_block = [&](std::size_t at, const DeviceColumns& c) {
        r[at + 0] = oracles::path_length(c.pos);
        r[at + 1] = oracles::max_pairwise(c.pos);
        std::vector<Vec3> unwrapped = oracles::unwrap_euler(c.rot);
        r[at + 2] = oracles::path_length(unwrapped);
        r[at + 3] = oracles::max_pairwise(unwrapped);
        r[at + 4] = oracles::mean(norms(c.vel));
        r[at + 5] = oracles::mean(norms(c.acc));
        r[at + 6] = oracles::mean(norms(c.angvel));
        r[at + 7] = oracles::mean(norms(c.angacc));
        r[at + 8] = oracles::submovements(c.speeds, 0.10, 3);
    };
    device_block(0, device_columns(t.headset));
    device_block(9, device_columns(dom_base));

    oracles::AlignedPair pair = oracles::align(t.headset, dom_base, 0.010);
    double pair_sum = 0.0, pair_max = 0.0;
    for (std::size_t i = 0; i < pair.a.size(); ++i) {
        double d = oracles::dist(pair.a[i], pair.b[i]);
        pair_sum += d;
        pair_max = std::max(pair_max, d);
    }
    r[18] = pair_sum;
    r[19] = pair_max;

    std::vector<Vec3> stick;
    std::vector<double> trig, grip;
    std::vector<bool> b_trig, b_grip, b_prim, b_sec, b_ptouch, b_stouch;
    for (const ControllerSample& c : dom) {
        stick.push_back(Vec3{c.thumbstick_x, c.thumbstick_y, 0.0});
        trig.push_back(c.trigger_pressure);
        grip.push_back(c.grip_pressure);
        b_trig.push_back(c.buttons.trigger);
        b_grip.push_back(c.buttons.grip);
        b_prim.push_back(c.buttons.primary);
        b_sec.push_back(c.buttons.secondary);
        b_ptouch.push_back(c.buttons.primary_touched);
        b_stouch.push_back(c.buttons.secondary_touched);
    }
    r[20] = oracles::path_length(stick);
    r[21] = oracles::max_pairwise(stick);
    r[22] = oracles::mean(trig);
    r[23] = oracles::mean(grip);
    r[24] = oracles::rising_edges(b_trig);
    r[25] = oracles::rising_edges(b_grip);
    r[26] = oracles::rising_edges(b_prim);
    r[27] = oracles::rising_edges(b_sec);
    r[28] = oracles::rising_edges(b_ptouch);
    r[29] = oracles::rising_edges(b_stouch);

    DeviceColumns hmd = device_columns(t.headset);
    r[30] = oracles::reentries(hmd.pos, t.target_pos, t.target_radius);
    std::vector<double> dev = oracles::axis_deviations(hmd.pos, t.start_pos, t.target_pos);
    r[31] = oracles::sign_changes(dev);
    r[32] = dev.size() >= 2 ? oracles::sample_std(dev) : 0.0;
    return r;
}

bool is_count_metric(std::size_t i) {
    return i == 8 || i == 17 || (i >= 24 && i <= 31);
}

void criterion_metrics() {
    auto start = std::chrono::steady_clock::now();
    const int kTrials = 1000;
    const double kTol = 1e-9;
    std::mt19937_64 gen(8711);
    int bad = 0;
    for (int n = 0; n < kTrials && bad == 0; ++n) {
        TrialTelemetry t = builders::random_trial(gen);
        TrialMetrics got = extract_trial_metrics(t);
        std::array<double, kMetricCount> want = reference_metrics(t);
        for (std::size_t i = 0; i < kMetricCount; ++i) {
            bool ok = is_count_metric(i) ? got[i] == want[i] : close_rel(got[i], want[i], kTol);
            if (!ok) {
                std::printf("    metric %s: got %.17g want %.17g (trial %d)\n",
                            metric_names()[i].c_str(), got[i], want[i], n);
                ++bad;
            }
        }
    }
    double elapsed = seconds_since(start);
    char line[160];
    std::snprintf(line, sizeof(line),
                  "all 33 metrics match references on %d random trials "
                  "(rel tol 1e-9, counts exact) in %.1f s (budget 60 s)",
                  kTrials, elapsed);
    report(1, line, bad == 0 && elapsed < 60.0);
}

// ---- 2: questionnaire scoring ----------------------------------------------

void criterion_quickdash() {
    bool ok = true;

    QuickDash all_low, all_high, one_missing, two_missing;
    for (std::size_t i = 0; i < kQuickDashItems; ++i) {
        all_low.items[i] = 1;
        all_high.items[i] = 5;
        one_missing.items[i] = 3;
        two_missing.items[i] = 3;
    }
    one_missing.items[4].reset();
    two_missing.items[4].reset();
    two_missing.items[9].reset();

    ok = ok && quickdash_score(all_low) == 0.0;
    ok = ok && quickdash_score(all_high) == 100.0;
    ok = ok && std::abs(quickdash_score(one_missing) - 50.0) < 1e-12;
    try {
        quickdash_score(two_missing);
        ok = false;
    } catch (const TooManyMissing&) {
    }

    std::mt19937_64 gen(424242);
    std::uniform_int_distribution<int> item(1, 5);
    std::uniform_int_distribution<int> missing_count(0, 3);
    std::uniform_int_distribution<std::size_t> slot(0, kQuickDashItems - 1);
    const int kCases = 10000;
    for (int n = 0; n < kCases && ok; ++n) {
        QuickDash q;
        std::vector<std::optional<int>> raw(kQuickDashItems);
        for (std::size_t i = 0; i < kQuickDashItems; ++i) {
            q.items[i] = item(gen);
            raw[i] = q.items[i];
        }
        int holes = missing_count(gen);
        for (int h = 0; h < holes; ++h) {
            std::size_t s = slot(gen);
            q.items[s].reset();
            raw[s].reset();
        }
        std::optional<double> want = oracles::quickdash(raw);
        if (want) {
            ok = quickdash_score(q) == *want;  // same arithmetic, so exactly equal
        } else {
            try {
                quickdash_score(q);
                ok = false;
            } catch (const TooManyMissing&) {
            }
        }
    }
    report(2, "quickdash endpoints, missing-item rule, and 10000 random scores match exactly", ok);
}

// ---- 3: elastic net vs closed-form solutions --------------------------------

void criterion_elastic_net() {
    const double kTol = 1e-6;
    bool ok = true;
    std::mt19937_64 gen(515151);
    std::uniform_int_distribution<int> rows_dist(30, 60);
    std::uniform_int_distribution<int> cols_dist(3, 6);
    for (int rep = 0; rep < 20 && ok; ++rep) {
        builders::LinearProblem p =
            builders::linear_problem(gen, rows_dist(gen), cols_dist(gen), 0.05);

        ElasticNetParams unpenalized;
        unpenalized.lambda = 0.0;
        ElasticNetFit fit = fit_elastic_net(p.X, p.y, unpenalized);
        oracles::LinearFit ols = oracles::ols(p.X, p.y);
        ok = ok && fit.converged;
        ok = ok && std::abs(fit.intercept - ols.intercept) < kTol;
        for (int j = 0; j < p.X.cols(); ++j)
            ok = ok && std::abs(fit.coefficients[j] - ols.beta[j]) < kTol;

        for (double lambda : {0.01, 0.5}) {
            ElasticNetParams ridge_params;
            ridge_params.lambda = lambda;
            ridge_params.alpha = 0.0;
            ElasticNetFit rfit = fit_elastic_net(p.X, p.y, ridge_params);
            oracles::LinearFit ridge = oracles::ridge(p.X, p.y, lambda);
            ok = ok && std::abs(rfit.intercept - ridge.intercept) < kTol;
            for (int j = 0; j < p.X.cols(); ++j)
                ok = ok && std::abs(rfit.coefficients[j] - ridge.beta[j]) < kTol;
        }

        ElasticNetParams mixed;
        mixed.lambda = 0.2;
        mixed.alpha = 0.7;
        ElasticNetFit mfit = fit_elastic_net(p.X, p.y, mixed);
        for (std::size_t s = 1; s < mfit.objective_path.size(); ++s)
            ok = ok && mfit.objective_path[s] <= mfit.objective_path[s - 1] + 1e-12;
    }
    report(3,
           "elastic net matches least squares at lambda=0 and closed-form ridge at alpha=0 "
           "(20 systems, tol 1e-6); objective never increases",
           ok);
}

// ---- 4: forest determinism across thread counts -----------------------------

void criterion_forest_determinism() {
    std::mt19937_64 gen(616161);
    builders::LinearProblem p = builders::linear_problem(gen, 500, 8, 0.1);

    std::vector<std::string> digests;
    Eigen::VectorXd first_pred;
    bool ok = true;
    for (int threads : {1, 2, 8}) {
        ForestParams params;
        params.n_trees = 500;
        params.seed = 42;
        params.threads = threads;
        ForestFit fit = fit_random_forest(p.X, p.y, params);
        digests.push_back(forest_digest(fit));
        Eigen::VectorXd pred = fit.predict_matrix(p.X.topRows(25));
        if (threads == 1)
            first_pred = pred;
        else
            ok = ok && pred == first_pred;
    }
    ok = ok && digests[0] == digests[1] && digests[1] == digests[2];
    report(4, "500-tree forest digest and predictions identical across 1/2/8 threads", ok);
}

// ---- 5: no participant crosses a train/test split ---------------------------

void criterion_no_leakage() {
    reset_leakage_stats();

    CohortConfig cohort;
    cohort.n_impaired = 4;
    cohort.n_non_impaired = 4;
    cohort.trials_per_block = 2;
    cohort.blocks = 1;
    cohort.noise_sigma = 0.1;
    cohort.sample_rate = 18.0;
    cohort.seed = 7;
    SynthCohort synth = generate_cohort(cohort, default_demands());

    bool ok = true;
    for (Scenario scenario : {Scenario::QS, Scenario::CS}) {
        RunConfig config = make_run_config(scenario);
        config.use_rfe = true;
        config.run_grid = true;
        config.eval_folds = 4;
        config.rank_folds = 4;
        config.grid_folds = 3;
        config.forest.n_trees = 80;
        config.forest_grid.n_trees = {40, 80};
        config.enet_grid.lambdas = {0.001, 0.1};
        config.enet_grid.alphas = {0.1, 0.9};
        config.threads = 0;
        RunArtifacts artifacts = run_pipeline(synth.sessions, synth.questionnaires, config);
        ok = ok && !artifacts.selection.ordering.empty();
        ok = ok && artifacts.has_eval && artifacts.has_rank && artifacts.has_grid;
    }

    LeakageStats stats = leakage_stats();
    char line[160];
    std::snprintf(line, sizeof(line),
                  "no participant overlaps a train/test split: %llu splits checked, "
                  "%llu violations (grid + rfe + cv + ranking, two scenarios)",
                  static_cast<unsigned long long>(stats.checks),
                  static_cast<unsigned long long>(stats.violations));
    report(5, line, ok && stats.checks > 0 && stats.violations == 0);
}

// ---- 6 and 7: synthetic cohort recovery and dataset shapes -------------------

RankReport rank_synthetic(double noise_sigma, double* elapsed_s) {
    auto start = std::chrono::steady_clock::now();
    CohortConfig cohort;  // full-size defaults: 20+20, 6 trials x 2 blocks, 72 Hz, seed 42
    cohort.noise_sigma = noise_sigma;
    SynthCohort synth = generate_cohort(cohort, default_demands());

    RunConfig config = make_run_config(Scenario::CS);
    config.calibration = TechniqueId::ChickenAcceleration;
    config.run_grid = false;
    config.do_eval = false;
    config.threads = 0;
    RunArtifacts artifacts = run_pipeline(synth.sessions, synth.questionnaires, config);
    *elapsed_s = seconds_since(start);
    return artifacts.report;
}

void criterion_recovery_and_shapes() {
    auto start = std::chrono::steady_clock::now();

    double t_clean = 0.0;
    RankReport clean = rank_synthetic(0.0, &t_clean);
    bool clean_ok = clean.all.participants == 40;
    for (double a : clean.all.accuracy_by_rank) clean_ok = clean_ok && a == 1.0;
    clean_ok = clean_ok && clean.all.overall_mape < 1.0;

    double t_noisy = 0.0;
    RankReport noisy = rank_synthetic(0.15, &t_noisy);
    bool noisy_ok = noisy.all.participants == 40;
    noisy_ok = noisy_ok && !noisy.all.accuracy_by_rank.empty();
    noisy_ok = noisy_ok && noisy.all.accuracy_by_rank[0] >= 0.85;
    noisy_ok = noisy_ok && noisy.all.overall_mape <= 12.0;

    double elapsed = seconds_since(start);
    char line[220];
    std::snprintf(line, sizeof(line),
                  "noise-free cohort recovers every rank (accuracy 1.0, mape %.3f%% < 1%%); "
                  "sigma 0.15 rank-1 accuracy %.3f >= 0.85, mape %.3f%% <= 12%%; %.0f s "
                  "(budget 300 s)",
                  clean.all.overall_mape, noisy.all.accuracy_by_rank.empty()
                                              ? 0.0
                                              : noisy.all.accuracy_by_rank[0],
                  noisy.all.overall_mape, elapsed);
    report(6, line, clean_ok && noisy_ok && elapsed < 300.0);

    // Shapes on a fresh full-size cohort: every participant contributes one
    // row per technique in QS and one per non-calibration trial in CS.
    CohortConfig cohort;
    cohort.noise_sigma = 0.15;
    SynthCohort synth = generate_cohort(cohort, default_demands());
    std::size_t participants = synth.sessions.size();

    Dataset qs = build_qs(synth.sessions, synth.questionnaires);
    Dataset cs = build_cs(synth.sessions, synth.questionnaires, TechniqueId::ChickenAcceleration);
    std::set<std::string> qs_groups(qs.groups.begin(), qs.groups.end());
    std::set<std::string> cs_groups(cs.groups.begin(), cs.groups.end());

    bool shapes_ok = participants == 40;
    shapes_ok = shapes_ok && qs.rows() == participants * 6;
    shapes_ok = shapes_ok && cs.rows() == participants * 60;
    shapes_ok = shapes_ok && qs_groups.size() == participants;
    shapes_ok = shapes_ok && cs_groups.size() == participants;
    shapes_ok = shapes_ok && qs.exclusions.empty() && cs.exclusions.empty();
    char line7[160];
    std::snprintf(line7, sizeof(line7),
                  "dataset shapes: qs %zu rows == %zu participants x 6, cs %zu rows == "
                  "%zu x 60",
                  qs.rows(), participants, cs.rows(), participants);
    report(7, line7, shapes_ok);
}

// ---- 8: rank bookkeeping algebra --------------------------------------------

RankedList make_list(const std::string& pid, bool impaired, const std::vector<double>& actual,
                     const std::vector<double>& predicted) {
    RankedList list;
    list.participant_id = pid;
    list.impaired = impaired;
    for (int t = 0; t < kTechniqueCount; ++t) {
        RankedTechnique rt;
        rt.technique = kAllTechniques[t];
        rt.actual_time = actual[t];
        rt.predicted_time = predicted[t];
        list.techniques.push_back(rt);
    }
    assign_ranks(list);
    return list;
}

void criterion_rank_bookkeeping() {
    bool ok = true;
    std::vector<double> times = {4.0, 5.5, 7.0, 8.5, 10.0, 12.5};

    RankingOutcome identity;
    identity.list_size = 6;
    for (int p = 0; p < 10; ++p) {
        std::vector<double> rotated = times;
        std::rotate(rotated.begin(), rotated.begin() + p % 6, rotated.end());
        identity.participants.push_back(
            make_list("P" + std::to_string(p), p % 2 == 0, rotated, rotated));
    }
    RankReport perfect = rank_report(identity);
    for (double a : perfect.all.accuracy_by_rank) ok = ok && a == 1.0;
    ok = ok && perfect.all.overall_accuracy == 1.0 && perfect.all.overall_mape == 0.0;
    ok = ok && perfect.impaired.participants == 5 && perfect.non_impaired.participants == 5;

    RankingOutcome reversed;
    reversed.list_size = 6;
    for (int p = 0; p < 10; ++p) {
        std::vector<double> flipped;
        for (double t : times) flipped.push_back(20.0 - t);  // reverses the order, stays > 0
        reversed.participants.push_back(make_list("P" + std::to_string(p), false, times, flipped));
    }
    RankReport worst = rank_report(reversed);
    for (double a : worst.all.accuracy_by_rank) ok = ok && a == 0.0;
    ok = ok && worst.all.overall_accuracy == 0.0;

    std::mt19937_64 gen(717171);
    std::uniform_real_distribution<double> u(1.0, 20.0);
    std::uniform_int_distribution<int> coarse(1, 4);  // small grid forces ties
    const int kFuzz = 1000;
    for (int n = 0; n < kFuzz && ok; ++n) {
        std::vector<double> actual, predicted;
        bool tie_prone = n % 3 == 0;
        for (int t = 0; t < kTechniqueCount; ++t) {
            actual.push_back(tie_prone ? coarse(gen) : u(gen));
            predicted.push_back(tie_prone ? coarse(gen) : u(gen));
        }
        RankedList list = make_list("F", false, actual, predicted);

        std::set<int> pred_ranks, act_ranks;
        for (const RankedTechnique& rt : list.techniques) {
            pred_ranks.insert(rt.predicted_rank);
            act_ranks.insert(rt.actual_rank);
        }
        ok = ok && pred_ranks.size() == 6 && *pred_ranks.begin() == 1 && *pred_ranks.rbegin() == 6;
        ok = ok && act_ranks.size() == 6 && *act_ranks.begin() == 1 && *act_ranks.rbegin() == 6;

        std::vector<RankedTechnique> by_pred = list.techniques;
        std::sort(by_pred.begin(), by_pred.end(),
                  [](const RankedTechnique& a, const RankedTechnique& b) {
                      return a.predicted_rank < b.predicted_rank;
                  });
        for (std::size_t i = 1; i < by_pred.size(); ++i) {
            ok = ok && by_pred[i - 1].predicted_time <= by_pred[i].predicted_time;
            if (by_pred[i - 1].predicted_time == by_pred[i].predicted_time)
                ok = ok && technique_name(by_pred[i - 1].technique) <
                               technique_name(by_pred[i].technique);
        }

        // Shifting every time by a constant must not change any rank.
        std::vector<double> actual_c = actual, predicted_c = predicted;
        for (double& v : actual_c) v += 37.25;
        for (double& v : predicted_c) v += 37.25;
        RankedList shifted = make_list("F", false, actual_c, predicted_c);
        for (int t = 0; t < kTechniqueCount; ++t) {
            ok = ok && shifted.techniques[t].predicted_rank == list.techniques[t].predicted_rank;
            ok = ok && shifted.techniques[t].actual_rank == list.techniques[t].actual_rank;
        }
    }
    report(8,
           "ranking: identity lists score 1.0 at every rank, reversed lists 0.0, ranks are "
           "shift-invariant permutations (1000 fuzz cases)",
           ok);
}

}  // namespace

int main() {
    criterion_metrics();
    criterion_quickdash();
    criterion_elastic_net();
    criterion_forest_determinism();
    criterion_no_leakage();
    criterion_recovery_and_shapes();
    criterion_rank_bookkeeping();
    std::printf("%s\n", g_failures == 0 ? "acceptance: all criteria passed"
                                        : "acceptance: FAILURES present");
    return g_failures == 0 ? 0 : 1;
}
