#include "locorank/questionnaire.hpp"

#include <fstream>
#include <set>
#include <sstream>

#include <json.hpp>

#include "locorank/errors.hpp"

namespace locorank {

using nlohmann::json;

namespace {

const std::array<std::string, kQuickDashItems> kQuickDashNames = {
    "OpenJarQD",      "HeavyChoresQD", "CarryBagQD",
    "WashBackQD",     "UseKnifeQD",    "RecreationalActivitiesQD",
    "SocialActivitiesQD", "WorkLimitationQD", "PainQD",
    "TinglingQD",     "SleepDifficultyQD",
};

const std::array<std::string, kTriqItems> kTriqNames = {
    "triq_slow_movements",
    "triq_low_strength",
    "triq_tremor",
    "triq_poor_coordination",
    "triq_rapid_fatigue",
    "triq_difficulty_gripping",
    "triq_difficulty_holding",
    "triq_lack_of_sensation",
    "triq_difficulty_controlling_direction",
    "triq_difficulty_controlling_distance",
    "triq_limited_range_of_motion",
    "triq_pain",
    "triq_poor_precision_fingers",
    "triq_poor_finger_isolation",
    "triq_limited_wrist_motion",
    "triq_difficulty_moving_quickly",
    "triq_difficulty_timing",
    "triq_difficulty_balancing_seated",
    "triq_limited_lower_body_mobility",
};

const std::array<std::string, kTlxItems> kTlxNames = {
    "mental_demand", "physical_demand", "effort", "performance", "frustration",
};

}  // namespace

const std::array<std::string, kQuickDashItems>& quickdash_item_names() { return kQuickDashNames; }
const std::array<std::string, kTriqItems>& triq_item_names() { return kTriqNames; }
const std::array<std::string, kTlxItems>& tlx_item_names() { return kTlxNames; }

double quickdash_score(const QuickDash& q) {
    int answered = 0;
    int sum = 0;
    for (const auto& item : q.items) {
        if (!item) continue;
        if (*item < 1 || *item > 5) throw Error("quickdash response out of 1..5");
        ++answered;
        sum += *item;
    }
    std::size_t missing = kQuickDashItems - static_cast<std::size_t>(answered);
    if (missing > 1) throw TooManyMissing(missing);
    return (static_cast<double>(sum) / answered - 1.0) * 25.0;
}

const QuestionnaireResponse* QuestionnaireSet::find(const std::string& participant_id) const {
    for (const QuestionnaireResponse& r : responses)
        if (r.participant_id == participant_id) return &r;
    return nullptr;
}

namespace {

QuestionnaireResponse decode_response(std::size_t line, const json& j) {
    auto fail = [line](const std::string& field, const std::string& msg) -> const json& {
        throw MalformedRecord(line, field, msg);
    };
    auto require = [&](const json& obj, const std::string& field) -> const json& {
        auto it = obj.find(field);
        if (it == obj.end()) return fail(field, "missing field");
        return *it;
    };

    if (!j.is_object()) fail("", "expected a JSON object");
    QuestionnaireResponse r;
    const json& pid = require(j, "participant_id");
    if (!pid.is_string()) fail("participant_id", "expected a string");
    r.participant_id = pid.get<std::string>();
    if (r.participant_id.empty()) throw InvariantViolation(line, "participant_id", "empty");

    const json& qd = require(j, "quickdash");
    if (!qd.is_array() || qd.size() != kQuickDashItems)
        fail("quickdash", "expected an array of 11 entries");
    for (std::size_t i = 0; i < kQuickDashItems; ++i) {
        if (qd[i].is_null()) continue;
        if (!qd[i].is_number_integer()) fail("quickdash", "entries must be integers or null");
        int v = qd[i].get<int>();
        if (v < 1 || v > 5) throw InvariantViolation(line, "quickdash", "responses must be in 1..5");
        r.quickdash.items[i] = v;
    }

    const json& triq = require(j, "triq");
    if (!triq.is_array() || triq.size() != kTriqItems)
        fail("triq", "expected an array of 19 booleans");
    for (std::size_t i = 0; i < kTriqItems; ++i) {
        if (!triq[i].is_boolean()) fail("triq", "entries must be booleans");
        r.triq[i] = triq[i].get<bool>();
    }

    const json& post = require(j, "post_task");
    if (!post.is_object()) fail("post_task", "expected an object keyed by technique");
    for (auto it = post.begin(); it != post.end(); ++it) {
        auto tech = technique_from_name(it.key());
        if (!tech) throw InvariantViolation(line, "post_task", "unknown technique '" + it.key() + "'");
        const json& entry = it.value();
        if (!entry.is_object()) fail("post_task", "entries must be objects");
        PostTask pt;
        const json& presence = require(entry, "presence");
        if (!presence.is_number_integer()) fail("post_task.presence", "expected an integer");
        pt.presence = presence.get<double>();
        const json& discomfort = require(entry, "discomfort");
        if (!discomfort.is_number_integer()) fail("post_task.discomfort", "expected an integer");
        pt.discomfort = discomfort.get<double>();
        const json& tlx = require(entry, "tlx");
        if (!tlx.is_array() || tlx.size() != kTlxItems)
            fail("post_task.tlx", "expected an array of 5 integers");
        for (std::size_t i = 0; i < kTlxItems; ++i) {
            if (!tlx[i].is_number_integer()) fail("post_task.tlx", "entries must be integers");
            pt.tlx[i] = tlx[i].get<double>();
        }
        r.post_task[*tech] = pt;
    }
    return r;
}

QuestionnaireSet parse_stream(std::istream& in) {
    QuestionnaireSet set;
    std::set<std::string> seen;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
        json j;
        try {
            j = json::parse(line);
        } catch (const json::parse_error& e) {
            throw MalformedRecord(line_no, "", e.what());
        }
        QuestionnaireResponse r = decode_response(line_no, j);
        if (!seen.insert(r.participant_id).second)
            throw InvariantViolation(line_no, "participant_id",
                                     "duplicate participant '" + r.participant_id + "'");
        set.responses.push_back(std::move(r));
    }
    return set;
}

}  // namespace

QuestionnaireSet parse_questionnaires(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw Error("cannot open questionnaire file: " + path);
    return parse_stream(in);
}

QuestionnaireSet parse_questionnaires_text(const std::string& text) {
    std::istringstream in(text);
    return parse_stream(in);
}

std::string serialize_questionnaires(const QuestionnaireSet& set) {
    std::string out;
    for (const QuestionnaireResponse& r : set.responses) {
        json j;
        j["participant_id"] = r.participant_id;
        json qd = json::array();
        for (const auto& item : r.quickdash.items) {
            if (item)
                qd.push_back(*item);
            else
                qd.push_back(nullptr);
        }
        j["quickdash"] = std::move(qd);
        json triq = json::array();
        for (bool b : r.triq) triq.push_back(b);
        j["triq"] = std::move(triq);
        json post = json::object();
        for (const auto& [tech, pt] : r.post_task) {
            json entry;
            entry["presence"] = static_cast<int>(pt.presence);
            entry["discomfort"] = static_cast<int>(pt.discomfort);
            json tlx = json::array();
            for (double v : pt.tlx) tlx.push_back(static_cast<int>(v));
            entry["tlx"] = std::move(tlx);
            post[technique_name(tech)] = std::move(entry);
        }
        j["post_task"] = std::move(post);
        out += j.dump();
        out += '\n';
    }
    return out;
}

void write_questionnaires(const QuestionnaireSet& set, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error("cannot write questionnaire file: " + path);
    out << serialize_questionnaires(set);
}

}  // namespace locorank
