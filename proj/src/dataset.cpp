#include "locorank/dataset.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "locorank/errors.hpp"
#include "locorank/util.hpp"

namespace locorank {

using nlohmann::json;

namespace {

const std::array<std::string, 3> kScenarioNames = {"qs", "cs", "qcs"};

constexpr const char* kPredTechPrefix = "pred_tech_";
constexpr const char* kCalibTechPrefix = "calib_tech_";
constexpr const char* kGroupColumn = "group_impaired";

std::vector<std::string> questionnaire_feature_names() {
    std::vector<std::string> names;
    for (const std::string& n : quickdash_item_names()) names.push_back(n);
    names.push_back("scoreQD");
    for (const std::string& n : triq_item_names()) names.push_back(n);
    return names;
}

// Missing QuickDASH items are imputed with the mean of the answered items,
// which leaves the score unchanged.
std::vector<double> questionnaire_feature_values(const QuestionnaireResponse& r) {
    double score = quickdash_score(r.quickdash);  // throws TooManyMissing first
    double sum = 0.0;
    int answered = 0;
    for (const auto& item : r.quickdash.items) {
        if (!item) continue;
        sum += *item;
        ++answered;
    }
    double impute = sum / answered;
    std::vector<double> values;
    values.reserve(31);
    for (const auto& item : r.quickdash.items)
        values.push_back(item ? static_cast<double>(*item) : impute);
    values.push_back(score);
    for (bool b : r.triq) values.push_back(b ? 1.0 : 0.0);
    return values;
}

std::vector<std::string> calibration_feature_names() {
    std::vector<std::string> names;
    for (const std::string& n : metric_names()) names.push_back("calib_" + n);
    names.push_back("calib_mean_trial_time");
    names.push_back("calib_hit_rate");
    names.push_back("calib_mean_obstacles_hit");
    names.push_back("pt_presence");
    names.push_back("pt_discomfort");
    for (const std::string& n : tlx_item_names()) names.push_back("pt_tlx_" + n);
    return names;
}

struct CalibrationBlock {
    std::vector<double> values;  // aligned to calibration_feature_names()
};

CalibrationBlock calibration_block(const SessionLog& session, const QuestionnaireResponse& resp,
                                   TechniqueId calibration, const SubmovementParams& params) {
    std::vector<const TrialTelemetry*> calib;
    for (const TrialTelemetry& t : session.trials)
        if (t.technique == calibration) calib.push_back(&t);
    if (calib.empty())
        throw MissingCalibrationTrials(session.participant_id, technique_name(calibration));
    auto pt_it = resp.post_task.find(calibration);
    if (pt_it == resp.post_task.end())
        throw MissingQuestionnaire(session.participant_id,
                                   "lacks post-task responses for " +
                                       technique_name(calibration));

    CalibrationBlock block;
    std::array<double, kMetricCount> sums{};
    double time_sum = 0.0;
    double hit_sum = 0.0;
    double obstacle_sum = 0.0;
    for (const TrialTelemetry* t : calib) {
        TrialMetrics m = extract_trial_metrics(*t, params);
        for (std::size_t i = 0; i < kMetricCount; ++i) sums[i] += m[i];
        time_sum += t->trial_time;
        hit_sum += t->hit ? 1.0 : 0.0;
        obstacle_sum += t->obstacles_hit;
    }
    double n = static_cast<double>(calib.size());
    for (std::size_t i = 0; i < kMetricCount; ++i) block.values.push_back(sums[i] / n);
    block.values.push_back(time_sum / n);
    block.values.push_back(hit_sum / n);
    block.values.push_back(obstacle_sum / n);
    const PostTask& pt = pt_it->second;
    block.values.push_back(pt.presence);
    block.values.push_back(pt.discomfort);
    for (double v : pt.tlx) block.values.push_back(v);
    return block;
}

void append_one_hot(std::vector<double>& row, TechniqueId id) {
    for (std::size_t i = 0; i < kTechniqueCount; ++i)
        row.push_back(i == static_cast<std::size_t>(id) ? 1.0 : 0.0);
}

// Units and binary flags are a pure function of the column names, so the CSV
// sidecar manifest does not need to carry them.
void derive_schema(Dataset& ds) {
    ds.units.clear();
    ds.binary_column.assign(ds.feature_names.size(), false);
    FeatureUnit pred{std::string(kPredTechPrefix), {}};
    pred.name.pop_back();  // "pred_tech"
    FeatureUnit calib{std::string(kCalibTechPrefix), {}};
    calib.name.pop_back();
    for (std::size_t i = 0; i < ds.feature_names.size(); ++i) {
        const std::string& name = ds.feature_names[i];
        if (name.rfind(kPredTechPrefix, 0) == 0) {
            pred.columns.push_back(i);
            ds.binary_column[i] = true;
        } else if (name.rfind(kCalibTechPrefix, 0) == 0) {
            calib.columns.push_back(i);
            ds.binary_column[i] = true;
        } else {
            ds.units.push_back({name, {i}});
            if (name.rfind("triq_", 0) == 0 || name == kGroupColumn) ds.binary_column[i] = true;
        }
    }
    if (!calib.columns.empty()) ds.units.push_back(std::move(calib));
    if (!pred.columns.empty()) ds.units.push_back(std::move(pred));
}

void finish(Dataset& ds, const std::vector<std::vector<double>>& rows,
            const std::vector<double>& targets) {
    derive_schema(ds);
    ds.X.resize(static_cast<Eigen::Index>(rows.size()),
                static_cast<Eigen::Index>(ds.feature_names.size()));
    ds.y.resize(static_cast<Eigen::Index>(targets.size()));
    for (std::size_t r = 0; r < rows.size(); ++r) {
        if (rows[r].size() != ds.feature_names.size())
            throw Error("internal: dataset row width mismatch");
        for (std::size_t c = 0; c < rows[r].size(); ++c)
            ds.X(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) = rows[r][c];
        ds.y(static_cast<Eigen::Index>(r)) = targets[r];
    }
}

const QuestionnaireResponse& require_response(const QuestionnaireSet& questionnaires,
                                              const std::string& participant_id) {
    const QuestionnaireResponse* r = questionnaires.find(participant_id);
    if (!r) throw MissingQuestionnaire(participant_id);
    return *r;
}

}  // namespace

const std::string& scenario_name(Scenario s) {
    return kScenarioNames[static_cast<std::size_t>(s)];
}

Scenario scenario_from_name(const std::string& name) {
    for (std::size_t i = 0; i < kScenarioNames.size(); ++i)
        if (kScenarioNames[i] == name) return static_cast<Scenario>(i);
    throw ConfigInvalid("unknown scenario '" + name + "' (expected qs, cs, or qcs)");
}

Dataset Dataset::subset(const std::vector<std::size_t>& row_indices) const {
    Dataset out;
    out.scenario = scenario;
    out.calibration = calibration;
    out.feature_names = feature_names;
    out.units = units;
    out.binary_column = binary_column;
    out.exclusions = exclusions;
    out.X.resize(static_cast<Eigen::Index>(row_indices.size()), X.cols());
    out.y.resize(static_cast<Eigen::Index>(row_indices.size()));
    for (std::size_t i = 0; i < row_indices.size(); ++i) {
        out.X.row(static_cast<Eigen::Index>(i)) = X.row(static_cast<Eigen::Index>(row_indices[i]));
        out.y(static_cast<Eigen::Index>(i)) = y(static_cast<Eigen::Index>(row_indices[i]));
        out.groups.push_back(groups[row_indices[i]]);
        out.instance_keys.push_back(instance_keys[row_indices[i]]);
        out.row_technique.push_back(row_technique[row_indices[i]]);
        out.row_impaired.push_back(row_impaired[row_indices[i]]);
    }
    return out;
}

Dataset Dataset::select_columns(const std::vector<std::size_t>& col_indices) const {
    Dataset out;
    out.scenario = scenario;
    out.calibration = calibration;
    out.exclusions = exclusions;
    out.groups = groups;
    out.instance_keys = instance_keys;
    out.row_technique = row_technique;
    out.row_impaired = row_impaired;
    out.y = y;
    out.X.resize(X.rows(), static_cast<Eigen::Index>(col_indices.size()));
    std::vector<std::ptrdiff_t> remap(feature_names.size(), -1);
    for (std::size_t i = 0; i < col_indices.size(); ++i) {
        out.X.col(static_cast<Eigen::Index>(i)) = X.col(static_cast<Eigen::Index>(col_indices[i]));
        out.feature_names.push_back(feature_names[col_indices[i]]);
        out.binary_column.push_back(binary_column[col_indices[i]]);
        remap[col_indices[i]] = static_cast<std::ptrdiff_t>(i);
    }
    for (const FeatureUnit& unit : units) {
        FeatureUnit kept{unit.name, {}};
        for (std::size_t c : unit.columns)
            if (remap[c] >= 0) kept.columns.push_back(static_cast<std::size_t>(remap[c]));
        if (!kept.columns.empty()) out.units.push_back(std::move(kept));
    }
    return out;
}

Dataset build_qs(const std::vector<SessionLog>& sessions, const QuestionnaireSet& questionnaires) {
    Dataset ds;
    ds.scenario = Scenario::QS;
    ds.feature_names = questionnaire_feature_names();
    for (const TechniqueId t : kAllTechniques)
        ds.feature_names.push_back(kPredTechPrefix + technique_name(t));
    ds.feature_names.push_back(kGroupColumn);

    std::vector<std::vector<double>> rows;
    std::vector<double> targets;
    for (const SessionLog& session : sessions) {
        std::vector<double> qblock;
        try {
            const QuestionnaireResponse& resp =
                require_response(questionnaires, session.participant_id);
            qblock = questionnaire_feature_values(resp);
        } catch (const MissingQuestionnaire& e) {
            ds.exclusions.push_back(session.participant_id + ": " + e.what());
            continue;
        } catch (const TooManyMissing& e) {
            ds.exclusions.push_back(session.participant_id + ": " + e.what());
            continue;
        }
        for (const TechniqueId tech : kAllTechniques) {
            double sum = 0.0;
            int n = 0;
            for (const TrialTelemetry& t : session.trials) {
                if (t.technique != tech) continue;
                sum += t.trial_time;
                ++n;
            }
            if (n == 0) continue;
            std::vector<double> row = qblock;
            append_one_hot(row, tech);
            row.push_back(session.group == Group::Impaired ? 1.0 : 0.0);
            rows.push_back(std::move(row));
            targets.push_back(sum / n);
            ds.groups.push_back(session.participant_id);
            ds.instance_keys.push_back({session.participant_id, tech, 0, 0});
            ds.row_technique.push_back(tech);
            ds.row_impaired.push_back(session.group == Group::Impaired);
        }
    }
    finish(ds, rows, targets);
    return ds;
}

namespace {

Dataset build_calibration_scenario(const std::vector<SessionLog>& sessions,
                                   const QuestionnaireSet& questionnaires,
                                   TechniqueId calibration, const SubmovementParams& params,
                                   bool with_questionnaire) {
    Dataset ds;
    ds.scenario = with_questionnaire ? Scenario::QCS : Scenario::CS;
    ds.calibration = calibration;
    if (with_questionnaire) ds.feature_names = questionnaire_feature_names();
    for (const std::string& n : calibration_feature_names()) ds.feature_names.push_back(n);
    for (const TechniqueId t : kAllTechniques)
        ds.feature_names.push_back(kCalibTechPrefix + technique_name(t));
    for (const TechniqueId t : kAllTechniques)
        ds.feature_names.push_back(kPredTechPrefix + technique_name(t));
    ds.feature_names.push_back(kGroupColumn);

    std::vector<std::vector<double>> rows;
    std::vector<double> targets;
    for (const SessionLog& session : sessions) {
        std::vector<double> qblock;
        CalibrationBlock calib;
        // A participant that cannot produce a complete feature block leaves
        // the dataset, not the run.
        try {
            const QuestionnaireResponse& resp =
                require_response(questionnaires, session.participant_id);
            if (with_questionnaire) qblock = questionnaire_feature_values(resp);
            calib = calibration_block(session, resp, calibration, params);
        } catch (const MissingQuestionnaire& e) {
            ds.exclusions.push_back(session.participant_id + ": " + e.what());
            continue;
        } catch (const TooManyMissing& e) {
            ds.exclusions.push_back(session.participant_id + ": " + e.what());
            continue;
        } catch (const MissingCalibrationTrials& e) {
            ds.exclusions.push_back(session.participant_id + ": " + e.what());
            continue;
        }
        for (const TrialTelemetry& t : session.trials) {
            if (t.technique == calibration) continue;
            std::vector<double> row = qblock;
            row.insert(row.end(), calib.values.begin(), calib.values.end());
            append_one_hot(row, calibration);
            append_one_hot(row, t.technique);
            row.push_back(session.group == Group::Impaired ? 1.0 : 0.0);
            rows.push_back(std::move(row));
            targets.push_back(t.trial_time);
            ds.groups.push_back(session.participant_id);
            ds.instance_keys.push_back(
                {session.participant_id, t.technique, t.block, t.trial_index});
            ds.row_technique.push_back(t.technique);
            ds.row_impaired.push_back(session.group == Group::Impaired);
        }
    }
    finish(ds, rows, targets);
    return ds;
}

}  // namespace

Dataset build_cs(const std::vector<SessionLog>& sessions, const QuestionnaireSet& questionnaires,
                 TechniqueId calibration, const SubmovementParams& params) {
    return build_calibration_scenario(sessions, questionnaires, calibration, params, false);
}

Dataset build_qcs(const std::vector<SessionLog>& sessions, const QuestionnaireSet& questionnaires,
                  TechniqueId calibration, const SubmovementParams& params) {
    return build_calibration_scenario(sessions, questionnaires, calibration, params, true);
}

Eigen::MatrixXd Standardization::apply(const Eigen::MatrixXd& X) const {
    Eigen::MatrixXd out = X;
    for (Eigen::Index c = 0; c < out.cols(); ++c)
        out.col(c) = (out.col(c).array() - mean(c)) / scale(c);
    return out;
}

Eigen::VectorXd Standardization::apply_row(const Eigen::VectorXd& x) const {
    return (x.array() - mean.array()) / scale.array();
}

Standardization fit_standardization(const Eigen::MatrixXd& X,
                                    const std::vector<bool>& binary_column) {
    Standardization s;
    Eigen::Index p = X.cols();
    s.mean = Eigen::VectorXd::Zero(p);
    s.scale = Eigen::VectorXd::Ones(p);
    s.passthrough.assign(static_cast<std::size_t>(p), false);
    s.zero_variance.assign(static_cast<std::size_t>(p), false);
    double n = static_cast<double>(X.rows());
    for (Eigen::Index c = 0; c < p; ++c) {
        if (binary_column[static_cast<std::size_t>(c)]) {
            s.passthrough[static_cast<std::size_t>(c)] = true;
            continue;
        }
        double mean = X.col(c).mean();
        double var = (X.col(c).array() - mean).square().sum() / n;
        double sigma = std::sqrt(var);
        if (sigma < 1e-12 * std::max(1.0, std::abs(mean))) {
            s.zero_variance[static_cast<std::size_t>(c)] = true;
            continue;  // left untouched: mean 0, scale 1
        }
        s.mean(c) = mean;
        s.scale(c) = sigma;
    }
    return s;
}

void write_dataset_csv(const Dataset& ds, const std::string& csv_path,
                       const std::string& manifest_path) {
    std::string csv;
    for (std::size_t i = 0; i < ds.feature_names.size(); ++i) {
        if (i) csv += ',';
        csv += ds.feature_names[i];
    }
    csv += ",target\n";
    for (Eigen::Index r = 0; r < ds.X.rows(); ++r) {
        for (Eigen::Index c = 0; c < ds.X.cols(); ++c) {
            if (c) csv += ',';
            csv += format_double(ds.X(r, c));
        }
        csv += ',';
        csv += format_double(ds.y(r));
        csv += '\n';
    }
    std::ofstream out(csv_path, std::ios::binary);
    if (!out) throw Error("cannot write dataset: " + csv_path);
    out << csv;

    json manifest;
    manifest["scenario"] = scenario_name(ds.scenario);
    if (ds.scenario == Scenario::QS)
        manifest["calibration"] = nullptr;
    else
        manifest["calibration"] = technique_name(ds.calibration);
    manifest["feature_names"] = ds.feature_names;
    json keys = json::array();
    for (const InstanceKey& k : ds.instance_keys)
        keys.push_back(json{{"participant_id", k.participant_id},
                            {"technique", technique_name(k.technique)},
                            {"block", k.block},
                            {"trial_index", k.trial_index}});
    manifest["instance_keys"] = std::move(keys);
    manifest["exclusions"] = ds.exclusions;
    std::ofstream mout(manifest_path, std::ios::binary);
    if (!mout) throw Error("cannot write dataset manifest: " + manifest_path);
    mout << manifest.dump(2) << '\n';
}

Dataset read_dataset_csv(const std::string& csv_path, const std::string& manifest_path) {
    std::ifstream min(manifest_path);
    if (!min) throw Error("cannot open dataset manifest: " + manifest_path);
    json manifest = json::parse(min);

    Dataset ds;
    ds.scenario = scenario_from_name(manifest.at("scenario").get<std::string>());
    if (!manifest.at("calibration").is_null()) {
        auto tech = technique_from_name(manifest.at("calibration").get<std::string>());
        if (!tech) throw SchemaMismatch("manifest names an unknown calibration technique");
        ds.calibration = *tech;
    }
    ds.feature_names = manifest.at("feature_names").get<std::vector<std::string>>();
    for (const json& k : manifest.at("instance_keys")) {
        auto tech = technique_from_name(k.at("technique").get<std::string>());
        if (!tech) throw SchemaMismatch("manifest names an unknown technique");
        ds.instance_keys.push_back({k.at("participant_id").get<std::string>(), *tech,
                                    k.at("block").get<int>(), k.at("trial_index").get<int>()});
        ds.groups.push_back(ds.instance_keys.back().participant_id);
        ds.row_technique.push_back(*tech);
    }
    ds.exclusions = manifest.at("exclusions").get<std::vector<std::string>>();
    derive_schema(ds);

    std::ifstream in(csv_path);
    if (!in) throw Error("cannot open dataset: " + csv_path);
    std::string header;
    if (!std::getline(in, header)) throw SchemaMismatch("dataset CSV is empty");
    std::vector<std::string> cols;
    std::stringstream hs(header);
    std::string cell;
    while (std::getline(hs, cell, ',')) cols.push_back(cell);
    if (cols.size() != ds.feature_names.size() + 1 || cols.back() != "target")
        throw SchemaMismatch("dataset CSV header does not match its manifest");
    for (std::size_t i = 0; i < ds.feature_names.size(); ++i)
        if (cols[i] != ds.feature_names[i])
            throw SchemaMismatch("dataset CSV column '" + cols[i] + "' does not match manifest");

    std::vector<std::vector<double>> rows;
    std::vector<double> targets;
    std::string line;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        std::stringstream ls(line);
        std::vector<double> row;
        while (std::getline(ls, cell, ',')) row.push_back(std::stod(cell));
        if (row.size() != cols.size()) throw SchemaMismatch("dataset CSV row width mismatch");
        targets.push_back(row.back());
        row.pop_back();
        rows.push_back(std::move(row));
    }
    if (rows.size() != ds.instance_keys.size())
        throw SchemaMismatch("dataset CSV row count does not match its manifest");

    ds.X.resize(static_cast<Eigen::Index>(rows.size()),
                static_cast<Eigen::Index>(ds.feature_names.size()));
    ds.y.resize(static_cast<Eigen::Index>(targets.size()));
    for (std::size_t r = 0; r < rows.size(); ++r) {
        for (std::size_t c = 0; c < rows[r].size(); ++c)
            ds.X(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) = rows[r][c];
        ds.y(static_cast<Eigen::Index>(r)) = targets[r];
    }

    auto group_col = std::find(ds.feature_names.begin(), ds.feature_names.end(), kGroupColumn);
    if (group_col == ds.feature_names.end())
        throw SchemaMismatch("dataset CSV lacks the group column");
    Eigen::Index gc = static_cast<Eigen::Index>(group_col - ds.feature_names.begin());
    for (Eigen::Index r = 0; r < ds.X.rows(); ++r) ds.row_impaired.push_back(ds.X(r, gc) == 1.0);
    return ds;
}

}  // namespace locorank
