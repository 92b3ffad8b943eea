#include "locorank/synth.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>

#include <json.hpp>

#include "locorank/errors.hpp"
#include "locorank/rng.hpp"

namespace locorank {

namespace {

constexpr double kPi = 3.14159265358979323846;
constexpr double kTwoPi = 2.0 * kPi;
constexpr double kTimeCap = 30.0;

const std::array<std::string, kAbilityAxes> kAxisNames = {
    "fine_motor", "gross_motor", "head_mobility", "stamina", "pain_free",
};

// Weight magnitudes are kept small so every technique's time range stays
// disjoint from its neighbors' across all profiles: the technique order is
// then the base-time order for everyone, and a learner only has to place a
// participant inside a narrow per-technique band.
DemandTable make_default_demands() {
    DemandTable table{};
    auto set = [&table](TechniqueId t, double base, std::array<double, kAbilityAxes> w) {
        table[static_cast<std::size_t>(t)] = TechniqueDemand{w, base};
    };
    // Axis order: fine, gross, head, stamina, pain.
    set(TechniqueId::Teleport, 4.0, {0.020, 0.005, 0.000, 0.000, 0.005});
    set(TechniqueId::AstralBody, 5.0, {0.020, 0.005, 0.000, 0.000, 0.005});
    set(TechniqueId::SlidingLooking, 6.0, {0.010, 0.010, 0.035, 0.000, 0.005});
    set(TechniqueId::ChickenAcceleration, 7.0, {0.010, 0.010, 0.040, 0.000, 0.000});
    set(TechniqueId::ThrowTeleport, 8.5, {0.010, 0.055, 0.000, 0.035, 0.000});
    set(TechniqueId::GrabAndPull, 10.0, {0.000, 0.060, 0.000, 0.040, 0.000});
    return table;
}

void validate_demands(const DemandTable& demands) {
    for (int t = 0; t < kTechniqueCount; ++t) {
        const TechniqueDemand& d = demands[static_cast<std::size_t>(t)];
        if (!(d.base_time > 0.0) || d.base_time >= kTimeCap)
            throw ConfigInvalid("base_time for " +
                                technique_name(static_cast<TechniqueId>(t)) +
                                " must be in (0, 30)");
        double sum = 0.0;
        for (double w : d.weights) {
            if (w < 0.0)
                throw ConfigInvalid("demand weights must be >= 0");
            sum += w;
        }
        if (sum > 4.0) throw ConfigInvalid("demand weights must sum to <= 4");
    }
}

double wrap180(double degrees) {
    double r = std::fmod(degrees + 180.0, 360.0);
    if (r < 0.0) r += 360.0;
    return r - 180.0;
}

double clamp01(double x) { return std::min(1.0, std::max(0.0, x)); }

int clamp_int(double x, int lo, int hi) {
    int v = static_cast<int>(std::lround(x));
    return std::min(hi, std::max(lo, v));
}

// Row mixes over (fine, gross, head, stamina, pain) deficits; rows sum to 1.
constexpr double kQuickDashMix[kQuickDashItems][kAbilityAxes] = {
    {0.6, 0.2, 0.0, 0.0, 0.2},  // OpenJarQD
    {0.0, 0.6, 0.0, 0.3, 0.1},  // HeavyChoresQD
    {0.0, 0.5, 0.0, 0.4, 0.1},  // CarryBagQD
    {0.0, 0.4, 0.3, 0.0, 0.3},  // WashBackQD
    {0.7, 0.1, 0.0, 0.0, 0.2},  // UseKnifeQD
    {0.2, 0.4, 0.0, 0.3, 0.1},  // RecreationalActivitiesQD
    {0.0, 0.2, 0.0, 0.5, 0.3},  // SocialActivitiesQD
    {0.3, 0.3, 0.0, 0.2, 0.2},  // WorkLimitationQD
    {0.0, 0.0, 0.0, 0.0, 1.0},  // PainQD
    {0.5, 0.0, 0.0, 0.0, 0.5},  // TinglingQD
    {0.0, 0.0, 0.0, 0.4, 0.6},  // SleepDifficultyQD
};

// Primary deficit axis per TRIQ item, in triq_item_names() order.
constexpr std::size_t kTriqAxis[kTriqItems] = {
    1,  // slow_movements -> gross
    1,  // low_strength -> gross
    0,  // tremor -> fine
    0,  // poor_coordination -> fine
    3,  // rapid_fatigue -> stamina
    0,  // difficulty_gripping -> fine
    1,  // difficulty_holding -> gross
    0,  // lack_of_sensation -> fine
    1,  // difficulty_controlling_direction -> gross
    1,  // difficulty_controlling_distance -> gross
    2,  // limited_range_of_motion -> head
    4,  // pain -> pain
    0,  // poor_precision_fingers -> fine
    0,  // poor_finger_isolation -> fine
    0,  // limited_wrist_motion -> fine
    1,  // difficulty_moving_quickly -> gross
    0,  // difficulty_timing -> fine
    1,  // difficulty_balancing_seated -> gross
    1,  // limited_lower_body_mobility -> gross
};

double deficit(const AbilityProfile& p, std::size_t axis) { return 1.0 - p.axes[axis]; }

QuestionnaireResponse make_questionnaire(const std::string& pid, const AbilityProfile& profile,
                                         const DemandTable& demands, Rng& rng) {
    QuestionnaireResponse q;
    q.participant_id = pid;
    for (std::size_t i = 0; i < kQuickDashItems; ++i) {
        double mix = 0.0;
        for (std::size_t k = 0; k < kAbilityAxes; ++k)
            mix += kQuickDashMix[i][k] * deficit(profile, k);
        double raw = 1.0 + 4.0 * mix + 0.3 * rng.normal();
        q.quickdash.items[i] = clamp_int(raw, 1, 5);
    }
    bool drop_one = rng.bernoulli(0.08);
    std::size_t drop_idx = rng.below(kQuickDashItems);
    if (drop_one) q.quickdash.items[drop_idx] = std::nullopt;

    for (std::size_t j = 0; j < kTriqItems; ++j) {
        double mix = 0.85 * deficit(profile, kTriqAxis[j]) + 0.15 * deficit(profile, 4);
        double threshold = (j % 2 == 0) ? 0.35 : 0.55;
        q.triq[j] = mix > threshold;
    }

    for (TechniqueId tech : kAllTechniques) {
        const TechniqueDemand& d = demands[static_cast<std::size_t>(tech)];
        double load = 0.0;
        double wsum = 0.0;
        for (std::size_t k = 0; k < kAbilityAxes; ++k) {
            load += d.weights[k] * deficit(profile, k);
            wsum += d.weights[k];
        }
        double effort = wsum > 0.0 ? clamp01(load / wsum) : 0.0;
        double intensity = d.base_time / 10.0;
        PostTask pt;
        pt.presence = clamp_int(rng.uniform(6.2, 7.2) - 2.5 * effort - 0.5 * intensity, 1, 7);
        pt.discomfort = clamp_int(1.0 + 6.0 * effort + rng.uniform(0.0, 1.5), 1, 10);
        const std::array<double, kTlxItems> item_load = {0.8, 1.0, 1.0, 0.6, 0.9};
        for (std::size_t k = 0; k < kTlxItems; ++k) {
            double raw = 15.0 + 55.0 * effort * item_load[k] + 15.0 * intensity +
                         rng.uniform(0.0, 10.0);
            pt.tlx[k] = 5.0 * clamp_int(raw / 5.0, 0, 20);
        }
        q.post_task[tech] = pt;
    }
    return q;
}

struct Curve {
    std::vector<double> t;
    std::vector<Vec3> position;
    std::vector<Vec3> euler;  // unwrapped while differentiating
};

// Central-difference velocity/acceleration (one-sided at the ends), then the
// Euler angles are wrapped into [-180, 180) for storage.
std::vector<DeviceSample> finish_device(const Curve& c) {
    std::size_t n = c.t.size();
    auto diff = [&](const std::vector<Vec3>& v) {
        std::vector<Vec3> out(n);
        for (std::size_t i = 0; i < n; ++i) {
            std::size_t lo = i == 0 ? 0 : i - 1;
            std::size_t hi = i + 1 == n ? n - 1 : i + 1;
            double dt = c.t[hi] - c.t[lo];
            out[i] = Vec3{(v[hi].x - v[lo].x) / dt, (v[hi].y - v[lo].y) / dt,
                          (v[hi].z - v[lo].z) / dt};
        }
        return out;
    };
    std::vector<Vec3> vel = diff(c.position);
    std::vector<Vec3> acc = diff(vel);
    std::vector<Vec3> ang_vel = diff(c.euler);
    std::vector<Vec3> ang_acc = diff(ang_vel);

    std::vector<DeviceSample> out(n);
    for (std::size_t i = 0; i < n; ++i) {
        out[i].t = c.t[i];
        out[i].position = c.position[i];
        out[i].rotation_euler = Vec3{wrap180(c.euler[i].x), wrap180(c.euler[i].y),
                                     wrap180(c.euler[i].z)};
        out[i].velocity = vel[i];
        out[i].angular_velocity = ang_vel[i];
        out[i].acceleration = acc[i];
        out[i].angular_acceleration = ang_acc[i];
    }
    return out;
}

struct TrialSketch {
    double angle = 0.0;
    double dist = 10.0;
    double noise_mult = 1.0;
    double f_jit = 2.5;
    double ph[8] = {};       // hmd jitter xyz, bob, yaw, pitch, roll, wobble
    int lateral_k = 1;
    double f_wobble = 1.3;
    double dom_ph[3] = {};
    double nd_ph[3] = {};
    double gesture_ph = 0.0;
    double primary_u = 1.0;
    double primary_at = 0.5;
    double secondary_u = 1.0;
    double secondary_at = 0.5;
    bool obstacle_a = false;
    bool obstacle_b = false;
};

TrialSketch draw_sketch(Rng& rng, const AbilityProfile& profile, double noise_sigma) {
    TrialSketch s;
    s.angle = rng.uniform(-kPi / 6.0, kPi / 6.0);
    s.dist = rng.uniform(8.0, 12.0);
    s.noise_mult = rng.lognormal(noise_sigma);
    s.f_jit = rng.uniform(2.0, 3.5);
    for (double& p : s.ph) p = rng.uniform(0.0, kTwoPi);
    s.lateral_k = rng.uniform_int(1, 2);
    s.f_wobble = rng.uniform(1.0, 1.6);
    for (double& p : s.dom_ph) p = rng.uniform(0.0, kTwoPi);
    for (double& p : s.nd_ph) p = rng.uniform(0.0, kTwoPi);
    s.gesture_ph = rng.uniform(0.0, kTwoPi);
    s.primary_u = rng.uniform01();
    s.primary_at = rng.uniform(0.1, 0.8);
    s.secondary_u = rng.uniform01();
    s.secondary_at = rng.uniform(0.1, 0.8);
    s.obstacle_a = rng.bernoulli(0.05 + 0.35 * deficit(profile, 1));
    s.obstacle_b = rng.bernoulli(0.30 * deficit(profile, 0));
    return s;
}

TrialTelemetry make_trial(const std::string& pid, Group group, Hand hand,
                          const AbilityProfile& profile, TechniqueId tech, int block,
                          int trial_index, const TechniqueDemand& demand, double sample_rate,
                          double noise_sigma, Rng& rng) {
    TrialSketch sk = draw_sketch(rng, profile, noise_sigma);

    double mu = ground_truth_time(profile, demand);
    double T = mu * sk.noise_mult;
    bool hit = true;
    if (T > kTimeCap) {
        T = kTimeCap;
        hit = false;
    }

    TrialTelemetry trial;
    trial.participant_id = pid;
    trial.group = group;
    trial.dominant_hand = hand;
    trial.technique = tech;
    trial.block = block;
    trial.trial_index = trial_index;
    trial.start_pos = Vec3{0.0, 0.0, 0.0};
    trial.target_pos = Vec3{sk.dist * std::sin(sk.angle), 0.0, sk.dist * std::cos(sk.angle)};
    trial.target_radius = 0.5;
    trial.trial_time = T;
    trial.hit = hit;
    trial.obstacles_hit = (sk.obstacle_a ? 1 : 0) + (sk.obstacle_b ? 1 : 0);

    double dt = 1.0 / sample_rate;
    std::size_t n = std::max<std::size_t>(2, static_cast<std::size_t>(std::floor(T / dt)) + 1);

    Vec3 fwd{std::sin(sk.angle), 0.0, std::cos(sk.angle)};
    Vec3 perp{std::cos(sk.angle), 0.0, -std::sin(sk.angle)};
    double heading_deg = sk.angle * 180.0 / kPi;

    bool looking_driven = tech == TechniqueId::SlidingLooking ||
                          tech == TechniqueId::ChickenAcceleration;
    bool stick_driven = looking_driven;
    bool grip_driven = tech == TechniqueId::GrabAndPull;
    bool trigger_driven = !stick_driven && !grip_driven;

    double lat_amp = 0.2 + 0.6 * deficit(profile, 1);
    double wobble_amp = 0.05 + 0.25 * deficit(profile, 0);
    double hmd_jit = 0.004 + 0.02 * deficit(profile, 0);
    double ctl_jit = 0.01 + 0.05 * deficit(profile, 0);
    double head_height = 1.55 + 0.2 * profile.axes[1];
    double yaw_amp = (4.0 + 30.0 * profile.axes[2]) * (looking_driven ? 1.6 : 1.0);
    double side = hand == Hand::Right ? 1.0 : -1.0;

    int actions = trigger_driven ? 3 + clamp_int(3.0 * deficit(profile, 1), 0, 3)
                                 : 4 + clamp_int(3.0 * deficit(profile, 1), 0, 3);
    double pull_freq = 0.8 + 0.4 * profile.axes[1];
    double stick_peak = 0.9 - 0.25 * deficit(profile, 3);
    double squeeze = 0.95 - 0.2 * deficit(profile, 3);

    auto pulse = [&](double tau) {
        double best = 0.0;
        for (int j = 0; j < actions; ++j) {
            double c = T * (j + 0.5) / actions;
            double z = (tau - c) / 0.06;
            best = std::max(best, std::exp(-0.5 * z * z));
        }
        return best;
    };

    Curve hmd, dom, nd;
    std::vector<ControllerSample> dom_samples(n), nd_samples(n);
    for (std::size_t i = 0; i < n; ++i) {
        double tau = static_cast<double>(i) * dt;
        double u = std::min(1.0, tau / T);
        double s = u * u * (3.0 - 2.0 * u);
        double lat = lat_amp * std::sin(kPi * sk.lateral_k * u) +
                     wobble_amp * std::sin(kTwoPi * sk.f_wobble * tau + sk.ph[7]);

        Vec3 ground{trial.target_pos.x * s + perp.x * lat, 0.0,
                    trial.target_pos.z * s + perp.z * lat};

        Vec3 hpos{ground.x + hmd_jit * std::sin(kTwoPi * sk.f_jit * tau + sk.ph[0]),
                  head_height + 0.03 * std::sin(kTwoPi * 0.4 * tau + sk.ph[3]) +
                      hmd_jit * std::sin(kTwoPi * sk.f_jit * tau + sk.ph[1]),
                  ground.z + hmd_jit * std::sin(kTwoPi * sk.f_jit * tau + sk.ph[2])};
        Vec3 heuler{-5.0 + 4.0 * std::sin(kTwoPi * 0.5 * tau + sk.ph[5]),
                    heading_deg + yaw_amp * std::sin(kTwoPi * 0.8 * tau + sk.ph[4]),
                    2.0 * std::sin(kTwoPi * 0.7 * tau + sk.ph[6])};
        hmd.t.push_back(tau);
        hmd.position.push_back(hpos);
        hmd.euler.push_back(heuler);

        double gesture = 0.0;
        if (grip_driven) gesture = 0.35 * std::sin(kTwoPi * pull_freq * tau + sk.gesture_ph);
        if (tech == TechniqueId::ThrowTeleport) gesture = 0.4 * pulse(tau);

        Vec3 dpos{hpos.x + perp.x * 0.25 * side + fwd.x * (0.35 + gesture) +
                      ctl_jit * std::sin(kTwoPi * sk.f_jit * 1.3 * tau + sk.dom_ph[0]),
                  hpos.y - 0.45 + ctl_jit * std::sin(kTwoPi * sk.f_jit * 1.3 * tau + sk.dom_ph[1]),
                  hpos.z + perp.z * 0.25 * side + fwd.z * (0.35 + gesture) +
                      ctl_jit * std::sin(kTwoPi * sk.f_jit * 1.3 * tau + sk.dom_ph[2])};
        Vec3 deuler{-30.0 + 6.0 * std::sin(kTwoPi * 1.1 * tau + sk.dom_ph[0]),
                    heading_deg + 8.0 * std::sin(kTwoPi * 0.9 * tau + sk.dom_ph[1]),
                    3.0 * std::sin(kTwoPi * 1.3 * tau + sk.dom_ph[2])};
        dom.t.push_back(tau);
        dom.position.push_back(dpos);
        dom.euler.push_back(deuler);

        Vec3 npos{hpos.x - perp.x * 0.25 * side + fwd.x * 0.2 +
                      0.01 * std::sin(kTwoPi * sk.f_jit * tau + sk.nd_ph[0]),
                  hpos.y - 0.5 + 0.01 * std::sin(kTwoPi * sk.f_jit * tau + sk.nd_ph[1]),
                  hpos.z - perp.z * 0.25 * side + fwd.z * 0.2 +
                      0.01 * std::sin(kTwoPi * sk.f_jit * tau + sk.nd_ph[2])};
        Vec3 neuler{-25.0 + 3.0 * std::sin(kTwoPi * 0.8 * tau + sk.nd_ph[0]),
                    heading_deg + 4.0 * std::sin(kTwoPi * 0.6 * tau + sk.nd_ph[1]),
                    2.0 * std::sin(kTwoPi * 0.9 * tau + sk.nd_ph[2])};
        nd.t.push_back(tau);
        nd.position.push_back(npos);
        nd.euler.push_back(neuler);

        ControllerSample& cs = dom_samples[i];
        double p = pulse(tau);
        cs.trigger_pressure = trigger_driven ? std::min(1.0, squeeze * p) : 0.0;
        cs.grip_pressure = grip_driven ? std::min(1.0, squeeze * p) : 0.0;
        if (stick_driven) {
            cs.thumbstick_y = stick_peak * 4.0 * u * (1.0 - u);
            cs.thumbstick_x = 0.3 * std::sin(kTwoPi * 0.5 * tau + sk.gesture_ph);
        } else {
            cs.thumbstick_x = 0.2 * std::sin(kTwoPi * 0.6 * tau + sk.gesture_ph);
            cs.thumbstick_y = 0.15 * std::sin(kTwoPi * 0.45 * tau + sk.gesture_ph + 1.0);
        }
        cs.buttons.trigger = cs.trigger_pressure > 0.5;
        cs.buttons.grip = cs.grip_pressure > 0.5;
        double tp = sk.primary_at * T;
        double ts = sk.secondary_at * T;
        bool primary_used = sk.primary_u < 0.3;
        bool secondary_used = sk.secondary_u < 0.15;
        cs.buttons.primary = primary_used && tau >= tp && tau <= tp + 0.15;
        cs.buttons.secondary = secondary_used && tau >= ts && tau <= ts + 0.15;
        cs.buttons.primary_touched =
            stick_driven || (primary_used && tau >= tp - 0.25 && tau <= tp + 0.4);
        cs.buttons.secondary_touched = secondary_used && tau >= ts - 0.25 && tau <= ts + 0.4;
    }

    trial.headset = finish_device(hmd);
    std::vector<DeviceSample> dom_base = finish_device(dom);
    std::vector<DeviceSample> nd_base = finish_device(nd);
    for (std::size_t i = 0; i < n; ++i) {
        dom_samples[i].base = dom_base[i];
        nd_samples[i].base = nd_base[i];
    }
    if (hand == Hand::Right) {
        trial.right = std::move(dom_samples);
        trial.left = std::move(nd_samples);
    } else {
        trial.left = std::move(dom_samples);
        trial.right = std::move(nd_samples);
    }
    return trial;
}

std::string participant_id(int index, int total) {
    int width = total >= 100 ? 3 : 2;
    std::string digits = std::to_string(index + 1);
    while (static_cast<int>(digits.size()) < width) digits.insert(digits.begin(), '0');
    return "P" + digits;
}

}  // namespace

const std::array<std::string, kAbilityAxes>& ability_axis_names() { return kAxisNames; }

const DemandTable& default_demands() {
    static const DemandTable table = make_default_demands();
    return table;
}

double ground_truth_time(const AbilityProfile& profile, const TechniqueDemand& demand) {
    double load = 0.0;
    for (std::size_t k = 0; k < kAbilityAxes; ++k)
        load += demand.weights[k] * (1.0 - profile.axes[k]);
    double mu = demand.base_time * (1.0 + load);
    if (mu > kTimeCap) mu = kTimeCap;
    if (mu <= 0.0) mu = 1e-3;
    return mu;
}

DemandTable load_demands(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigInvalid("cannot open demand table: " + path);
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(in);
    } catch (const nlohmann::json::exception& e) {
        throw ConfigInvalid("demand table is not valid JSON: " + std::string(e.what()));
    }
    if (!j.is_object() || !j.contains("techniques") || !j["techniques"].is_object())
        throw ConfigInvalid("demand table must have a 'techniques' object");
    DemandTable table{};
    const nlohmann::json& techs = j["techniques"];
    for (TechniqueId tech : kAllTechniques) {
        const std::string& name = technique_name(tech);
        if (!techs.contains(name))
            throw ConfigInvalid("demand table is missing technique " + name);
        const nlohmann::json& entry = techs.at(name);
        TechniqueDemand& d = table[static_cast<std::size_t>(tech)];
        if (!entry.contains("base_time") || !entry["base_time"].is_number())
            throw ConfigInvalid("technique " + name + " needs a numeric base_time");
        d.base_time = entry["base_time"].get<double>();
        if (!entry.contains("weights") || !entry["weights"].is_object())
            throw ConfigInvalid("technique " + name + " needs a weights object");
        for (std::size_t k = 0; k < kAbilityAxes; ++k) {
            const std::string& axis = kAxisNames[k];
            if (!entry["weights"].contains(axis) || !entry["weights"][axis].is_number())
                throw ConfigInvalid("technique " + name + " weights need numeric " + axis);
            d.weights[k] = entry["weights"][axis].get<double>();
        }
    }
    validate_demands(table);
    return table;
}

void write_demands(const DemandTable& demands, const std::string& path) {
    nlohmann::json techs = nlohmann::json::object();
    for (TechniqueId tech : kAllTechniques) {
        const TechniqueDemand& d = demands[static_cast<std::size_t>(tech)];
        nlohmann::json weights = nlohmann::json::object();
        for (std::size_t k = 0; k < kAbilityAxes; ++k) weights[kAxisNames[k]] = d.weights[k];
        techs[technique_name(tech)] = {{"base_time", d.base_time}, {"weights", weights}};
    }
    nlohmann::json j = {{"techniques", techs}};
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error("cannot write demand table: " + path);
    out << j.dump(2) << '\n';
}

SynthCohort generate_cohort(const CohortConfig& config, const DemandTable& demands) {
    if (config.n_impaired < 0 || config.n_non_impaired < 0 ||
        config.n_impaired + config.n_non_impaired < 1)
        throw ConfigInvalid("cohort needs at least one participant");
    if (config.trials_per_block < 1 || config.trials_per_block > 6)
        throw ConfigInvalid("trials_per_block must be in 1..6");
    if (config.blocks < 1 || config.blocks > 2) throw ConfigInvalid("blocks must be 1 or 2");
    if (config.noise_sigma < 0.0) throw ConfigInvalid("noise_sigma must be >= 0");
    if (!(config.sample_rate > 0.0)) throw ConfigInvalid("sample_rate must be > 0");
    validate_demands(demands);

    int total = config.n_impaired + config.n_non_impaired;
    SynthCohort cohort;
    cohort.sessions.reserve(static_cast<std::size_t>(total));
    cohort.profiles.reserve(static_cast<std::size_t>(total));

    for (int i = 0; i < total; ++i) {
        bool impaired = i < config.n_impaired;
        std::string pid = participant_id(i, total);
        Rng rng(mix_key(config.seed, static_cast<std::uint64_t>(i)));

        AbilityProfile profile;
        for (std::size_t k = 0; k < kAbilityAxes; ++k)
            profile.axes[k] = impaired ? rng.uniform(0.1, 0.9) : rng.uniform(0.8, 1.0);
        Hand hand = rng.bernoulli(0.15) ? Hand::Left : Hand::Right;

        cohort.questionnaires.responses.push_back(
            make_questionnaire(pid, profile, demands, rng));

        SessionLog session;
        session.participant_id = pid;
        session.group = impaired ? Group::Impaired : Group::NonImpaired;
        session.dominant_hand = hand;
        for (TechniqueId tech : kAllTechniques) {
            const TechniqueDemand& demand = demands[static_cast<std::size_t>(tech)];
            for (int block = 1; block <= config.blocks; ++block) {
                for (int trial = 1; trial <= config.trials_per_block; ++trial) {
                    session.trials.push_back(make_trial(pid, session.group, hand, profile,
                                                        tech, block, trial, demand,
                                                        config.sample_rate,
                                                        config.noise_sigma, rng));
                }
            }
        }
        cohort.sessions.push_back(std::move(session));
        cohort.profiles.push_back(profile);
    }
    return cohort;
}

void write_cohort(const SynthCohort& cohort, const std::string& out_dir) {
    namespace fs = std::filesystem;
    fs::create_directories(fs::path(out_dir) / "sessions");
    for (const SessionLog& session : cohort.sessions) {
        fs::path path = fs::path(out_dir) / "sessions" / (session.participant_id + ".jsonl");
        write_session_log(session, path.string());
    }
    fs::path qpath = fs::path(out_dir) / "questionnaires.jsonl";
    write_questionnaires(cohort.questionnaires, qpath.string());
}

}  // namespace locorank
