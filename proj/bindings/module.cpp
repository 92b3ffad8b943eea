#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <algorithm>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

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
#include "locorank/util.hpp"

namespace py = pybind11;

namespace {

using namespace locorank;

Eigen::MatrixXd to_matrix(const std::vector<std::vector<double>>& rows) {
    if (rows.empty()) return Eigen::MatrixXd(0, 0);
    Eigen::MatrixXd X(static_cast<Eigen::Index>(rows.size()),
                      static_cast<Eigen::Index>(rows.front().size()));
    for (Eigen::Index i = 0; i < X.rows(); ++i) {
        if (rows[static_cast<std::size_t>(i)].size() != static_cast<std::size_t>(X.cols()))
            throw SchemaMismatch("ragged feature matrix");
        for (Eigen::Index j = 0; j < X.cols(); ++j)
            X(i, j) = rows[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)];
    }
    return X;
}

Eigen::VectorXd to_vector(const std::vector<double>& values) {
    return Eigen::Map<const Eigen::VectorXd>(values.data(),
                                             static_cast<Eigen::Index>(values.size()));
}

std::vector<double> from_vector(const Eigen::VectorXd& v) {
    return std::vector<double>(v.data(), v.data() + v.size());
}

py::dict dataset_to_dict(const Dataset& ds) {
    py::dict d;
    d["scenario"] = scenario_name(ds.scenario);
    if (ds.scenario == Scenario::QS)
        d["calibration"] = py::none();
    else
        d["calibration"] = technique_name(ds.calibration);
    d["feature_names"] = ds.feature_names;
    d["binary_column"] = ds.binary_column;
    std::vector<std::vector<double>> X(ds.rows(), std::vector<double>(ds.cols()));
    for (std::size_t i = 0; i < ds.rows(); ++i)
        for (std::size_t j = 0; j < ds.cols(); ++j)
            X[i][j] = ds.X(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j));
    d["X"] = std::move(X);
    d["y"] = from_vector(ds.y);
    d["groups"] = ds.groups;
    py::list keys;
    for (const InstanceKey& key : ds.instance_keys) {
        py::dict k;
        k["participant_id"] = key.participant_id;
        k["technique"] = technique_name(key.technique);
        k["block"] = key.block;
        k["trial_index"] = key.trial_index;
        keys.append(std::move(k));
    }
    d["instance_keys"] = std::move(keys);
    d["exclusions"] = ds.exclusions;
    return d;
}

Dataset build_dataset(const std::string& sessions_path, const std::string& questionnaires_path,
                      const std::string& scenario_str, const std::string& calibration_str) {
    Scenario scenario = scenario_from_name(scenario_str);
    auto calibration = technique_from_name(calibration_str);
    if (!calibration)
        throw ConfigInvalid("unknown calibration technique '" + calibration_str + "'");
    std::vector<SessionLog> sessions = load_sessions(sessions_path);
    QuestionnaireSet questionnaires = parse_questionnaires(questionnaires_path);
    switch (scenario) {
        case Scenario::CS: return build_cs(sessions, questionnaires, *calibration);
        case Scenario::QCS: return build_qcs(sessions, questionnaires, *calibration);
        case Scenario::QS:
        default: return build_qs(sessions, questionnaires);
    }
}

RunConfig make_config(const std::string& scenario_str, const std::string& calibration_str,
                      const std::string& learner_str, std::uint64_t seed, int threads) {
    RunConfig config = make_run_config(scenario_from_name(scenario_str));
    auto calibration = technique_from_name(calibration_str);
    if (!calibration)
        throw ConfigInvalid("unknown calibration technique '" + calibration_str + "'");
    config.calibration = *calibration;
    if (!learner_str.empty()) config.learner = learner_from_name(learner_str);
    config.seed = seed;
    config.threads = threads;
    return config;
}

}  // namespace

PYBIND11_MODULE(_locorank, m) {
    m.doc() = "ability-based ranking of VR locomotion techniques";

    py::register_exception<Error>(m, "LocorankError");

    m.def("version", [] { return std::string(kToolVersion); });

    m.def("metric_names", [] {
        const auto& names = metric_names();
        return std::vector<std::string>(names.begin(), names.end());
    });

    m.def(
        "validate_session_text",
        [](const std::string& text) {
            ParseReport report;
            parse_session_log_text(text, &report);
            py::list issues;
            for (const ParseIssue& issue : report.issues) {
                py::dict d;
                d["line"] = issue.line;
                d["field"] = issue.field;
                d["message"] = issue.message;
                issues.append(std::move(d));
            }
            py::dict d;
            d["ok"] = report.ok();
            d["lines"] = report.lines;
            d["trials"] = report.trials;
            d["issues"] = std::move(issues);
            return d;
        },
        py::arg("text"), "Parse one session log from memory and report per-line issues.");

    m.def(
        "metrics_csv",
        [](const std::string& sessions_path, double peak_fraction, int min_dip_samples) {
            SubmovementParams params;
            params.peak_fraction = peak_fraction;
            params.min_dip_samples = min_dip_samples;
            return metrics_csv(load_sessions(sessions_path), params);
        },
        py::arg("sessions_path"), py::arg("peak_fraction") = 0.10,
        py::arg("min_dip_samples") = 3, "Per-trial metric table as CSV text.");

    m.def(
        "quickdash_score",
        [](const std::vector<std::optional<int>>& items) {
            if (items.size() != kQuickDashItems)
                throw SchemaMismatch("expected 11 items");
            QuickDash q;
            for (std::size_t i = 0; i < kQuickDashItems; ++i) q.items[i] = items[i];
            return quickdash_score(q);
        },
        py::arg("items"), "Score 11 items (1..5, None = skipped).");

    m.def(
        "build_dataset",
        [](const std::string& sessions_path, const std::string& questionnaires_path,
           const std::string& scenario, const std::string& calibration) {
            return dataset_to_dict(
                build_dataset(sessions_path, questionnaires_path, scenario, calibration));
        },
        py::arg("sessions_path"), py::arg("questionnaires_path"), py::arg("scenario"),
        py::arg("calibration") = "ChickenAcceleration",
        "Assemble the qs/cs/qcs feature matrix from raw inputs.");

    m.def(
        "fit_elastic_net",
        [](const std::vector<std::vector<double>>& X, const std::vector<double>& y,
           double lambda, double alpha) {
            ElasticNetParams params;
            params.lambda = lambda;
            params.alpha = alpha;
            ElasticNetFit fit = fit_elastic_net(to_matrix(X), to_vector(y), params);
            py::dict d;
            d["intercept"] = fit.intercept;
            d["coefficients"] = from_vector(fit.coefficients);
            d["converged"] = fit.converged;
            d["sweeps"] = fit.sweeps;
            return d;
        },
        py::arg("X"), py::arg("y"), py::arg("lambda"), py::arg("alpha") = 0.5,
        "Coordinate-descent elastic net on an already-standardized matrix.");

    m.def(
        "forest_fit_predict",
        [](const std::vector<std::vector<double>>& X_train, const std::vector<double>& y_train,
           const std::vector<std::vector<double>>& X_test, int n_trees, std::uint64_t seed,
           int threads) {
            ForestParams params;
            params.n_trees = n_trees;
            params.seed = seed;
            params.threads = threads;
            ForestFit forest = fit_random_forest(to_matrix(X_train), to_vector(y_train),
                                                 params);
            py::dict d;
            d["predictions"] = from_vector(forest.predict_matrix(to_matrix(X_test)));
            d["digest"] = forest_digest(forest);
            return d;
        },
        py::arg("X_train"), py::arg("y_train"), py::arg("X_test"), py::arg("n_trees") = 500,
        py::arg("seed") = 42, py::arg("threads") = 0,
        "Fit a regression forest and predict; digest is thread-count independent.");

    m.def(
        "group_kfold",
        [](const std::vector<std::string>& groups, int k, std::uint64_t seed) {
            std::vector<Fold> plan = group_kfold(groups, k, seed);
            py::list folds;
            for (const Fold& fold : plan) {
                py::dict d;
                d["train"] = fold.train_rows;
                d["test"] = fold.test_rows;
                folds.append(std::move(d));
            }
            return folds;
        },
        py::arg("groups"), py::arg("k"), py::arg("seed") = 42,
        "Participant-grouped fold assignment; no group straddles the split.");

    m.def(
        "run",
        [](const std::string& sessions_path, const std::string& questionnaires_path,
           const std::string& scenario, const std::string& calibration,
           const std::string& learner, std::uint64_t seed, int threads,
           const std::string& out_dir) {
            RunConfig config = make_config(scenario, calibration, learner, seed, threads);
            std::vector<SessionLog> sessions = load_sessions(sessions_path);
            QuestionnaireSet questionnaires = parse_questionnaires(questionnaires_path);
            RunArtifacts artifacts = run_pipeline(sessions, questionnaires, config);
            if (!out_dir.empty()) {
                std::vector<std::pair<std::string, std::string>> inputs;
                namespace fs = std::filesystem;
                if (fs::is_directory(sessions_path)) {
                    std::vector<std::string> files;
                    for (const auto& entry : fs::directory_iterator(sessions_path))
                        if (entry.is_regular_file() && entry.path().extension() == ".jsonl")
                            files.push_back(entry.path().generic_string());
                    std::sort(files.begin(), files.end());
                    for (const std::string& file : files)
                        inputs.emplace_back(file, file_digest(file));
                } else {
                    inputs.emplace_back(sessions_path, file_digest(sessions_path));
                }
                inputs.emplace_back(questionnaires_path, file_digest(questionnaires_path));
                std::string command = "run --scenario " + scenario;
                if (config.scenario != Scenario::QS)
                    command += " --calibration " + technique_name(config.calibration);
                command += " --learner " + learner_name(config.learner) + " --seed " +
                           std::to_string(config.seed);
                write_run_outputs(artifacts, config, sessions, out_dir, command, inputs);
            }
            return evaluation_report_json(artifacts, config);
        },
        py::arg("sessions_path"), py::arg("questionnaires_path"), py::arg("scenario"),
        py::arg("calibration") = "ChickenAcceleration", py::arg("learner") = "",
        py::arg("seed") = 42, py::arg("threads") = 0, py::arg("out_dir") = "",
        "Full pipeline; returns the evaluation report as JSON text.");

    m.def(
        "synth_cohort",
        [](const std::string& out_dir, int impaired, int non_impaired, int trials_per_block,
           int blocks, double noise_sigma, double sample_rate, std::uint64_t seed) {
            CohortConfig config;
            config.n_impaired = impaired;
            config.n_non_impaired = non_impaired;
            config.trials_per_block = trials_per_block;
            config.blocks = blocks;
            config.noise_sigma = noise_sigma;
            config.sample_rate = sample_rate;
            config.seed = seed;
            SynthCohort cohort = generate_cohort(config, default_demands());
            write_cohort(cohort, out_dir);
            return cohort.sessions.size();
        },
        py::arg("out_dir"), py::arg("impaired") = 20, py::arg("non_impaired") = 20,
        py::arg("trials_per_block") = 6, py::arg("blocks") = 2, py::arg("noise_sigma") = 0.15,
        py::arg("sample_rate") = 72.0, py::arg("seed") = 42,
        "Write a synthetic cohort (sessions/ + questionnaires.jsonl); returns session count.");

    m.def("render_report", &render_report_text, py::arg("report_json"),
          "Render a report.json payload as the plain-text table.");
}
