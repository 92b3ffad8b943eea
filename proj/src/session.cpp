#include "locorank/session.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

#include <json.hpp>

namespace locorank {

using nlohmann::json;

namespace {

const std::array<std::string, 6> kTechniqueNames = {
    "AstralBody", "ChickenAcceleration", "GrabAndPull",
    "SlidingLooking", "Teleport", "ThrowTeleport",
};
const std::string kGroupImpaired = "impaired";
const std::string kGroupNonImpaired = "non_impaired";
const std::string kHandLeft = "left";
const std::string kHandRight = "right";

constexpr double kTrialTimeCap = 30.0;

}  // namespace

const std::string& technique_name(TechniqueId id) {
    return kTechniqueNames[static_cast<std::size_t>(id)];
}

std::optional<TechniqueId> technique_from_name(const std::string& name) {
    for (std::size_t i = 0; i < kTechniqueNames.size(); ++i)
        if (kTechniqueNames[i] == name) return static_cast<TechniqueId>(i);
    return std::nullopt;
}

const std::string& group_name(Group g) {
    return g == Group::Impaired ? kGroupImpaired : kGroupNonImpaired;
}

const std::string& hand_name(Hand h) { return h == Hand::Left ? kHandLeft : kHandRight; }

std::string TrialTelemetry::key() const {
    return participant_id + "|" + technique_name(technique) + "|" + std::to_string(block) + "|" +
           std::to_string(trial_index);
}

namespace {

// ---- decoding helpers ----------------------------------------------------

struct LineContext {
    std::size_t line;
};

[[noreturn]] void fail(const LineContext& ctx, const std::string& field, const std::string& msg) {
    throw MalformedRecord(ctx.line, field, msg);
}

[[noreturn]] void violate(const LineContext& ctx, const std::string& field,
                          const std::string& msg) {
    throw InvariantViolation(ctx.line, field, msg);
}

double finite_number(const LineContext& ctx, const json& j, const std::string& field) {
    if (!j.is_number()) fail(ctx, field, "expected a number");
    double v = j.get<double>();
    if (!std::isfinite(v)) violate(ctx, field, "non-finite value");
    return v;
}

Vec3 decode_vec3(const LineContext& ctx, const json& j, const std::string& field) {
    if (!j.is_array() || j.size() != 3) fail(ctx, field, "expected an array of 3 numbers");
    return Vec3{finite_number(ctx, j[0], field), finite_number(ctx, j[1], field),
                finite_number(ctx, j[2], field)};
}

const json& require(const LineContext& ctx, const json& obj, const std::string& field) {
    auto it = obj.find(field);
    if (it == obj.end()) fail(ctx, field, "missing field");
    return *it;
}

DeviceSample decode_device(const LineContext& ctx, const json& j, double t,
                           const std::string& prefix) {
    DeviceSample s;
    s.t = t;
    s.position = decode_vec3(ctx, require(ctx, j, "pos"), prefix + ".pos");
    s.rotation_euler = decode_vec3(ctx, require(ctx, j, "rot"), prefix + ".rot");
    s.velocity = decode_vec3(ctx, require(ctx, j, "vel"), prefix + ".vel");
    s.angular_velocity = decode_vec3(ctx, require(ctx, j, "angvel"), prefix + ".angvel");
    s.acceleration = decode_vec3(ctx, require(ctx, j, "acc"), prefix + ".acc");
    s.angular_acceleration = decode_vec3(ctx, require(ctx, j, "angacc"), prefix + ".angacc");
    return s;
}

double unit_range(const LineContext& ctx, const json& j, const std::string& field, double lo,
                  double hi) {
    double v = finite_number(ctx, j, field);
    if (v < lo || v > hi) violate(ctx, field, "out of [" + std::to_string(lo) + ", " +
                                                  std::to_string(hi) + "]");
    return v;
}

ControllerSample decode_controller(const LineContext& ctx, const json& j, double t,
                                   const std::string& prefix) {
    ControllerSample s;
    s.base = decode_device(ctx, j, t, prefix);
    const json& thumb = require(ctx, j, "thumb");
    if (!thumb.is_array() || thumb.size() != 2) fail(ctx, prefix + ".thumb", "expected [x, y]");
    s.thumbstick_x = unit_range(ctx, thumb[0], prefix + ".thumb", -1.0, 1.0);
    s.thumbstick_y = unit_range(ctx, thumb[1], prefix + ".thumb", -1.0, 1.0);
    s.trigger_pressure = unit_range(ctx, require(ctx, j, "trigger"), prefix + ".trigger", 0.0, 1.0);
    s.grip_pressure = unit_range(ctx, require(ctx, j, "grip"), prefix + ".grip", 0.0, 1.0);
    const json& btn = require(ctx, j, "btn");
    if (!btn.is_object()) fail(ctx, prefix + ".btn", "expected an object");
    auto flag = [&](const char* name) -> bool {
        const json& b = require(ctx, btn, name);
        if (!b.is_boolean()) fail(ctx, prefix + ".btn." + name, "expected a boolean");
        return b.get<bool>();
    };
    s.buttons.trigger = flag("trigger");
    s.buttons.grip = flag("grip");
    s.buttons.primary = flag("primary");
    s.buttons.secondary = flag("secondary");
    s.buttons.primary_touched = flag("ptouch");
    s.buttons.secondary_touched = flag("stouch");
    return s;
}

void check_monotone(const LineContext& ctx, const std::vector<double>& ts,
                    const std::string& field) {
    for (std::size_t i = 0; i < ts.size(); ++i) {
        if (ts[i] < 0.0) violate(ctx, field, "t < 0");
        if (i > 0 && ts[i] <= ts[i - 1]) violate(ctx, field, "timestamps not strictly increasing");
    }
}

TrialTelemetry decode_trial(const LineContext& ctx, const json& j) {
    if (!j.is_object()) fail(ctx, "", "expected a JSON object");
    TrialTelemetry t;

    const json& pid = require(ctx, j, "participant_id");
    if (!pid.is_string()) fail(ctx, "participant_id", "expected a string");
    t.participant_id = pid.get<std::string>();
    if (t.participant_id.empty()) violate(ctx, "participant_id", "empty");

    const json& grp = require(ctx, j, "group");
    if (!grp.is_string()) fail(ctx, "group", "expected a string");
    if (grp == kGroupImpaired) t.group = Group::Impaired;
    else if (grp == kGroupNonImpaired) t.group = Group::NonImpaired;
    else violate(ctx, "group", "must be 'impaired' or 'non_impaired'");

    const json& hand = require(ctx, j, "dominant_hand");
    if (!hand.is_string()) fail(ctx, "dominant_hand", "expected a string");
    if (hand == kHandLeft) t.dominant_hand = Hand::Left;
    else if (hand == kHandRight) t.dominant_hand = Hand::Right;
    else violate(ctx, "dominant_hand", "must be 'left' or 'right'");

    const json& tech = require(ctx, j, "technique");
    if (!tech.is_string()) fail(ctx, "technique", "expected a string");
    auto id = technique_from_name(tech.get<std::string>());
    if (!id) violate(ctx, "technique", "unknown technique '" + tech.get<std::string>() + "'");
    t.technique = *id;

    const json& block = require(ctx, j, "block");
    if (!block.is_number_integer()) fail(ctx, "block", "expected an integer");
    t.block = block.get<int>();
    if (t.block != 1 && t.block != 2) violate(ctx, "block", "must be 1 or 2");

    const json& idx = require(ctx, j, "trial_index");
    if (!idx.is_number_integer()) fail(ctx, "trial_index", "expected an integer");
    t.trial_index = idx.get<int>();
    if (t.trial_index < 1 || t.trial_index > 6) violate(ctx, "trial_index", "must be in 1..6");

    t.start_pos = decode_vec3(ctx, require(ctx, j, "start"), "start");
    t.target_pos = decode_vec3(ctx, require(ctx, j, "target"), "target");
    t.target_radius = finite_number(ctx, require(ctx, j, "target_radius"), "target_radius");
    if (t.target_radius <= 0.0) violate(ctx, "target_radius", "must be > 0");

    t.trial_time = finite_number(ctx, require(ctx, j, "trial_time_s"), "trial_time_s");
    if (t.trial_time <= 0.0 || t.trial_time > kTrialTimeCap)
        violate(ctx, "trial_time_s", "must be in (0, 30]");

    const json& hit = require(ctx, j, "hit");
    if (!hit.is_boolean()) fail(ctx, "hit", "expected a boolean");
    t.hit = hit.get<bool>();
    if (!t.hit && t.trial_time != kTrialTimeCap)
        violate(ctx, "trial_time_s", "timeout trials must report exactly 30 s");

    const json& obst = require(ctx, j, "obstacles_hit");
    if (!obst.is_number_integer()) fail(ctx, "obstacles_hit", "expected an integer");
    t.obstacles_hit = obst.get<int>();
    if (t.obstacles_hit < 0) violate(ctx, "obstacles_hit", "must be >= 0");

    const json& samples = require(ctx, j, "samples");
    if (!samples.is_array()) fail(ctx, "samples", "expected an array");
    for (const json& s : samples) {
        if (!s.is_object()) fail(ctx, "samples", "expected sample objects");
        double ts = finite_number(ctx, require(ctx, s, "t"), "samples.t");
        auto hmd = s.find("hmd");
        if (hmd != s.end() && !hmd->is_null())
            t.headset.push_back(decode_device(ctx, *hmd, ts, "hmd"));
        auto lctl = s.find("lctl");
        if (lctl != s.end() && !lctl->is_null())
            t.left.push_back(decode_controller(ctx, *lctl, ts, "lctl"));
        auto rctl = s.find("rctl");
        if (rctl != s.end() && !rctl->is_null())
            t.right.push_back(decode_controller(ctx, *rctl, ts, "rctl"));
    }
    if (t.headset.empty()) violate(ctx, "samples", "headset sequence is empty");

    auto times = [](const auto& seq) {
        std::vector<double> ts;
        ts.reserve(seq.size());
        for (const auto& s : seq) {
            if constexpr (std::is_same_v<std::decay_t<decltype(s)>, DeviceSample>)
                ts.push_back(s.t);
            else
                ts.push_back(s.base.t);
        }
        return ts;
    };
    check_monotone(ctx, times(t.headset), "samples.t (hmd)");
    check_monotone(ctx, times(t.left), "samples.t (lctl)");
    check_monotone(ctx, times(t.right), "samples.t (rctl)");
    return t;
}

SessionLog parse_lines(std::istream& in, ParseReport* report) {
    SessionLog log;
    bool have_header = false;
    std::set<std::string> keys;
    std::string line;
    std::size_t line_no = 0;
    ParseReport local;
    ParseReport& rep = report ? *report : local;

    while (std::getline(in, line)) {
        ++line_no;
        if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
        rep.lines += 1;
        LineContext ctx{line_no};
        try {
            json j;
            try {
                j = json::parse(line);
            } catch (const json::parse_error& e) {
                fail(ctx, "", e.what());
            }
            TrialTelemetry t = decode_trial(ctx, j);
            if (!have_header) {
                log.participant_id = t.participant_id;
                log.group = t.group;
                log.dominant_hand = t.dominant_hand;
                have_header = true;
            } else if (t.participant_id != log.participant_id) {
                violate(ctx, "participant_id", "file mixes participants ('" + t.participant_id +
                                                   "' vs '" + log.participant_id + "')");
            } else if (t.group != log.group || t.dominant_hand != log.dominant_hand) {
                violate(ctx, "group", "participant header fields differ between lines");
            }
            if (!keys.insert(t.key()).second) throw DuplicateTrialKey(line_no, t.key());
            if (keys.size() > 72) violate(ctx, "", "more than 72 trials for one participant");
            log.trials.push_back(std::move(t));
            rep.trials += 1;
        } catch (const MalformedRecord& e) {
            if (!report) throw;
            rep.issues.push_back({e.line(), e.field(), e.what()});
        } catch (const InvariantViolation& e) {
            if (!report) throw;
            rep.issues.push_back({e.line(), e.field(), e.what()});
        } catch (const DuplicateTrialKey& e) {
            if (!report) throw;
            rep.issues.push_back({e.line(), "", e.what()});
        }
    }
    return log;
}

json encode_device(const DeviceSample& s) {
    auto vec = [](const Vec3& v) { return json::array({v.x, v.y, v.z}); };
    return json{{"pos", vec(s.position)},     {"rot", vec(s.rotation_euler)},
                {"vel", vec(s.velocity)},     {"angvel", vec(s.angular_velocity)},
                {"acc", vec(s.acceleration)}, {"angacc", vec(s.angular_acceleration)}};
}

json encode_controller(const ControllerSample& s) {
    json j = encode_device(s.base);
    j["thumb"] = json::array({s.thumbstick_x, s.thumbstick_y});
    j["trigger"] = s.trigger_pressure;
    j["grip"] = s.grip_pressure;
    j["btn"] = json{{"trigger", s.buttons.trigger},
                    {"grip", s.buttons.grip},
                    {"primary", s.buttons.primary},
                    {"secondary", s.buttons.secondary},
                    {"ptouch", s.buttons.primary_touched},
                    {"stouch", s.buttons.secondary_touched}};
    return j;
}

json encode_trial(const TrialTelemetry& t) {
    json j;
    j["participant_id"] = t.participant_id;
    j["group"] = group_name(t.group);
    j["dominant_hand"] = hand_name(t.dominant_hand);
    j["technique"] = technique_name(t.technique);
    j["block"] = t.block;
    j["trial_index"] = t.trial_index;
    j["start"] = json::array({t.start_pos.x, t.start_pos.y, t.start_pos.z});
    j["target"] = json::array({t.target_pos.x, t.target_pos.y, t.target_pos.z});
    j["target_radius"] = t.target_radius;
    j["trial_time_s"] = t.trial_time;
    j["hit"] = t.hit;
    j["obstacles_hit"] = t.obstacles_hit;

    // Merge the three device sequences back into per-timestamp rows. Devices
    // missing at a timestamp serialize as null so arbitrary in-memory logs
    // survive a round trip.
    json samples = json::array();
    std::size_t ih = 0, il = 0, ir = 0;
    while (ih < t.headset.size() || il < t.left.size() || ir < t.right.size()) {
        double ts = std::numeric_limits<double>::infinity();
        if (ih < t.headset.size()) ts = std::min(ts, t.headset[ih].t);
        if (il < t.left.size()) ts = std::min(ts, t.left[il].base.t);
        if (ir < t.right.size()) ts = std::min(ts, t.right[ir].base.t);
        json row;
        row["t"] = ts;
        if (ih < t.headset.size() && t.headset[ih].t == ts)
            row["hmd"] = encode_device(t.headset[ih++]);
        else
            row["hmd"] = nullptr;
        if (il < t.left.size() && t.left[il].base.t == ts)
            row["lctl"] = encode_controller(t.left[il++]);
        else
            row["lctl"] = nullptr;
        if (ir < t.right.size() && t.right[ir].base.t == ts)
            row["rctl"] = encode_controller(t.right[ir++]);
        else
            row["rctl"] = nullptr;
        samples.push_back(std::move(row));
    }
    j["samples"] = std::move(samples);
    return j;
}

}  // namespace

SessionLog parse_session_log(const std::string& path, ParseReport* report) {
    std::ifstream in(path);
    if (!in) throw Error("cannot open session log: " + path);
    return parse_lines(in, report);
}

SessionLog parse_session_log_text(const std::string& text, ParseReport* report) {
    std::istringstream in(text);
    return parse_lines(in, report);
}

std::string serialize_session_log(const SessionLog& log) {
    std::string out;
    for (const TrialTelemetry& t : log.trials) {
        out += encode_trial(t).dump();
        out += '\n';
    }
    return out;
}

void write_session_log(const SessionLog& log, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error("cannot write session log: " + path);
    out << serialize_session_log(log);
}

std::vector<SessionLog> load_sessions(const std::string& path) {
    namespace fs = std::filesystem;
    std::vector<std::string> files;
    if (fs::is_directory(path)) {
        for (const auto& entry : fs::directory_iterator(path))
            if (entry.is_regular_file() && entry.path().extension() == ".jsonl")
                files.push_back(entry.path().string());
        std::sort(files.begin(), files.end());
    } else {
        files.push_back(path);
    }
    std::vector<SessionLog> sessions;
    sessions.reserve(files.size());
    for (const auto& f : files) sessions.push_back(parse_session_log(f));
    return sessions;
}

PressCounts press_counts(const std::vector<ControllerSample>& samples) {
    PressCounts c;
    ButtonState prev;  // all false: a first sample held down is a rising edge
    for (const ControllerSample& s : samples) {
        const ButtonState& b = s.buttons;
        c.trigger += (b.trigger && !prev.trigger) ? 1 : 0;
        c.grip += (b.grip && !prev.grip) ? 1 : 0;
        c.primary += (b.primary && !prev.primary) ? 1 : 0;
        c.secondary += (b.secondary && !prev.secondary) ? 1 : 0;
        c.primary_touch += (b.primary_touched && !prev.primary_touched) ? 1 : 0;
        c.secondary_touch += (b.secondary_touched && !prev.secondary_touched) ? 1 : 0;
        prev = b;
    }
    return c;
}

}  // namespace locorank
