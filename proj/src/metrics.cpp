#include "locorank/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <map>
#include <sstream>

#include "locorank/errors.hpp"
#include "locorank/util.hpp"

namespace locorank {

namespace {

double norm3(const Vec3& v) { return std::sqrt(v.x * v.x + v.y * v.y + v.z * v.z); }

double dist3(const Vec3& a, const Vec3& b) {
    return norm3(Vec3{a.x - b.x, a.y - b.y, a.z - b.z});
}

// Per-axis unwrap: successive differences are folded into (-180, 180] and
// re-accumulated, so a 359 -> 1 step reads as +2 degrees, not -358.
std::vector<Vec3> unwrap_euler(const std::vector<Vec3>& angles) {
    std::vector<Vec3> out;
    out.reserve(angles.size());
    Vec3 prev_raw{}, prev_unwrapped{};
    for (std::size_t i = 0; i < angles.size(); ++i) {
        if (i == 0) {
            out.push_back(angles[0]);
        } else {
            auto step = [](double raw_delta) {
                double d = std::fmod(raw_delta, 360.0);
                if (d > 180.0) d -= 360.0;
                if (d <= -180.0) d += 360.0;
                return d;
            };
            Vec3 u{prev_unwrapped.x + step(angles[i].x - prev_raw.x),
                   prev_unwrapped.y + step(angles[i].y - prev_raw.y),
                   prev_unwrapped.z + step(angles[i].z - prev_raw.z)};
            out.push_back(u);
        }
        prev_raw = angles[i];
        prev_unwrapped = out.back();
    }
    return out;
}

const std::array<std::string, kMetricCount> kMetricNames = {
    "hmd_variability",
    "hmd_extent",
    "hmd_angular_variability",
    "hmd_angular_extent",
    "hmd_mean_velocity",
    "hmd_mean_acceleration",
    "hmd_mean_angular_velocity",
    "hmd_mean_angular_acceleration",
    "hmd_submovement_count",
    "dom_variability",
    "dom_extent",
    "dom_angular_variability",
    "dom_angular_extent",
    "dom_mean_velocity",
    "dom_mean_acceleration",
    "dom_mean_angular_velocity",
    "dom_mean_angular_acceleration",
    "dom_submovement_count",
    "pair_hmd_dom_variability",
    "pair_hmd_dom_extent",
    "thumbstick_variability",
    "thumbstick_extent",
    "mean_trigger_pressure",
    "mean_grip_pressure",
    "trigger_press_count",
    "grip_press_count",
    "primary_press_count",
    "secondary_press_count",
    "primary_touch_count",
    "secondary_touch_count",
    "target_reentry_count",
    "axis_crossed_count",
    "movement_variability",
};

}  // namespace

const std::array<std::string, kMetricCount>& metric_names() { return kMetricNames; }

std::size_t metric_index(const std::string& name) {
    for (std::size_t i = 0; i < kMetricNames.size(); ++i)
        if (kMetricNames[i] == name) return i;
    throw Error("unknown metric name: " + name);
}

double path_length(const std::vector<Vec3>& positions) {
    double total = 0.0;
    for (std::size_t i = 1; i < positions.size(); ++i)
        total += dist3(positions[i], positions[i - 1]);
    return total;
}

double max_pairwise_distance(const std::vector<Vec3>& positions) {
    double best = 0.0;
    for (std::size_t i = 0; i + 1 < positions.size(); ++i)
        for (std::size_t j = i + 1; j < positions.size(); ++j)
            best = std::max(best, dist3(positions[i], positions[j]));
    return best;
}

PairSeriesMetrics pair_series_metrics(const std::vector<Vec3>& a, const std::vector<Vec3>& b) {
    if (a.size() != b.size())
        throw LengthMismatch("pair series lengths differ: " + std::to_string(a.size()) + " vs " +
                             std::to_string(b.size()));
    PairSeriesMetrics m;
    for (std::size_t i = 0; i < a.size(); ++i) {
        double d = dist3(a[i], b[i]);
        m.variability += d;
        m.extent = std::max(m.extent, d);
    }
    return m;
}

AlignedPositions align_series(const std::vector<DeviceSample>& a,
                              const std::vector<DeviceSample>& b, double max_skew) {
    AlignedPositions out;
    std::size_t j = 0;
    for (const DeviceSample& sa : a) {
        while (j + 1 < b.size() &&
               std::abs(b[j + 1].t - sa.t) < std::abs(b[j].t - sa.t))
            ++j;
        if (j < b.size() && std::abs(b[j].t - sa.t) <= max_skew) {
            out.a.push_back(sa.position);
            out.b.push_back(b[j].position);
        }
    }
    return out;
}

int submovement_count(const std::vector<double>& t, const std::vector<double>& speeds,
                      const SubmovementParams& params) {
    if (t.size() != speeds.size())
        throw LengthMismatch("submovement series lengths differ: " + std::to_string(t.size()) +
                             " vs " + std::to_string(speeds.size()));
    if (speeds.empty()) return 0;
    double peak = *std::max_element(speeds.begin(), speeds.end());
    if (peak <= 0.0) return 0;
    double threshold = params.peak_fraction * peak;

    int count = 0;
    std::size_t i = 0;
    bool in_run = false;
    while (i < speeds.size()) {
        if (speeds[i] >= threshold) {
            if (!in_run) {
                ++count;
                in_run = true;
            }
            ++i;
        } else {
            std::size_t dip_start = i;
            while (i < speeds.size() && speeds[i] < threshold) ++i;
            std::size_t dip_len = i - dip_start;
            bool at_boundary = dip_start == 0 || i == speeds.size();
            // Interior dips shorter than min_dip_samples do not end the run.
            if (at_boundary || dip_len >= static_cast<std::size_t>(params.min_dip_samples))
                in_run = false;
        }
    }
    return count;
}

double mean_channel(const std::vector<double>& values) {
    if (values.empty()) throw EmptySeries("mean over an empty series");
    double sum = 0.0;
    for (double v : values) sum += v;
    return sum / static_cast<double>(values.size());
}

std::vector<double> task_axis_deviations(const std::vector<Vec3>& positions, const Vec3& start,
                                         const Vec3& target) {
    double dx = target.x - start.x;
    double dz = target.z - start.z;
    double len = std::hypot(dx, dz);
    if (len < 1e-9) throw DegenerateAxis("start and target coincide in the ground plane");
    std::vector<double> out;
    out.reserve(positions.size());
    for (const Vec3& p : positions)
        out.push_back((dx * (p.z - start.z) - dz * (p.x - start.x)) / len);
    return out;
}

double movement_variability(const std::vector<double>& deviations) {
    if (deviations.size() < 2)
        throw InsufficientSamples("movement variability needs at least 2 samples");
    double mean = 0.0;
    for (double d : deviations) mean += d;
    mean /= static_cast<double>(deviations.size());
    double ss = 0.0;
    for (double d : deviations) ss += (d - mean) * (d - mean);
    return std::sqrt(ss / static_cast<double>(deviations.size() - 1));
}

int target_reentry_count(const std::vector<Vec3>& positions, const Vec3& target, double radius) {
    int entries = 0;
    bool inside = false;
    for (const Vec3& p : positions) {
        bool now = std::hypot(p.x - target.x, p.z - target.z) <= radius;
        if (now && !inside) ++entries;
        inside = now;
    }
    return entries > 1 ? entries - 1 : 0;
}

int axis_crossed_count(const std::vector<double>& deviations) {
    int count = 0;
    int prev = 0;
    for (double d : deviations) {
        int s = d > 0.0 ? 1 : (d < 0.0 ? -1 : 0);
        if (s == 0) continue;
        if (prev != 0 && s != prev) ++count;
        prev = s;
    }
    return count;
}

namespace {

struct DeviceSeries {
    std::vector<double> t;
    std::vector<Vec3> positions;
    std::vector<Vec3> euler;
    std::vector<double> speed;
    std::vector<double> accel;
    std::vector<double> ang_speed;
    std::vector<double> ang_accel;
};

DeviceSeries collect(const std::vector<DeviceSample>& samples) {
    DeviceSeries s;
    s.t.reserve(samples.size());
    s.positions.reserve(samples.size());
    s.euler.reserve(samples.size());
    for (const DeviceSample& d : samples) {
        s.t.push_back(d.t);
        s.positions.push_back(d.position);
        s.euler.push_back(d.rotation_euler);
        s.speed.push_back(norm3(d.velocity));
        s.accel.push_back(norm3(d.acceleration));
        s.ang_speed.push_back(norm3(d.angular_velocity));
        s.ang_accel.push_back(norm3(d.angular_acceleration));
    }
    return s;
}

void fill_device_block(TrialMetrics& m, std::size_t base, const DeviceSeries& s,
                       const SubmovementParams& params) {
    std::vector<Vec3> unwrapped = unwrap_euler(s.euler);
    m[base + 0] = path_length(s.positions);
    m[base + 1] = max_pairwise_distance(s.positions);
    m[base + 2] = path_length(unwrapped);
    m[base + 3] = max_pairwise_distance(unwrapped);
    m[base + 4] = mean_channel(s.speed);
    m[base + 5] = mean_channel(s.accel);
    m[base + 6] = mean_channel(s.ang_speed);
    m[base + 7] = mean_channel(s.ang_accel);
    m[base + 8] = submovement_count(s.t, s.speed, params);
}

}  // namespace

TrialMetrics extract_trial_metrics(const TrialTelemetry& trial, const SubmovementParams& params) {
    const std::vector<ControllerSample>& dom = trial.dominant_controller();
    if (dom.empty())
        throw MissingDominantController("trial " + trial.key() + " has no " +
                                        hand_name(trial.dominant_hand) + "-hand samples");
    if (trial.headset.empty()) throw EmptySeries("trial " + trial.key() + " has no headset samples");

    TrialMetrics m;
    DeviceSeries hmd = collect(trial.headset);
    fill_device_block(m, 0, hmd, params);

    std::vector<DeviceSample> dom_base;
    dom_base.reserve(dom.size());
    for (const ControllerSample& c : dom) dom_base.push_back(c.base);
    fill_device_block(m, 9, collect(dom_base), params);

    AlignedPositions aligned = align_series(trial.headset, dom_base);
    PairSeriesMetrics pair = pair_series_metrics(aligned.a, aligned.b);
    m[18] = pair.variability;
    m[19] = pair.extent;

    std::vector<Vec3> stick;
    std::vector<double> trigger, grip;
    stick.reserve(dom.size());
    for (const ControllerSample& c : dom) {
        stick.push_back(Vec3{c.thumbstick_x, c.thumbstick_y, 0.0});
        trigger.push_back(c.trigger_pressure);
        grip.push_back(c.grip_pressure);
    }
    m[20] = path_length(stick);
    m[21] = max_pairwise_distance(stick);
    m[22] = mean_channel(trigger);
    m[23] = mean_channel(grip);

    PressCounts presses = press_counts(dom);
    m[24] = presses.trigger;
    m[25] = presses.grip;
    m[26] = presses.primary;
    m[27] = presses.secondary;
    m[28] = presses.primary_touch;
    m[29] = presses.secondary_touch;

    m[30] = target_reentry_count(hmd.positions, trial.target_pos, trial.target_radius);
    std::vector<double> deviations =
        task_axis_deviations(hmd.positions, trial.start_pos, trial.target_pos);
    m[31] = axis_crossed_count(deviations);
    m[32] = deviations.size() >= 2 ? movement_variability(deviations) : 0.0;
    return m;
}

std::string metrics_csv(const std::vector<SessionLog>& sessions, const SubmovementParams& params) {
    std::string out = "participant_id,group,technique,block,trial_index,trial_time_s,hit,obstacles_hit";
    for (const std::string& name : kMetricNames) {
        out += ',';
        out += name;
    }
    out += '\n';
    for (const SessionLog& session : sessions) {
        for (const TrialTelemetry& trial : session.trials) {
            TrialMetrics m = extract_trial_metrics(trial, params);
            out += trial.participant_id;
            out += ',';
            out += group_name(trial.group);
            out += ',';
            out += technique_name(trial.technique);
            out += ',';
            out += std::to_string(trial.block);
            out += ',';
            out += std::to_string(trial.trial_index);
            out += ',';
            out += format_double(trial.trial_time);
            out += ',';
            out += trial.hit ? "true" : "false";
            out += ',';
            out += std::to_string(trial.obstacles_hit);
            for (std::size_t i = 0; i < kMetricCount; ++i) {
                out += ',';
                out += format_double(m[i]);
            }
            out += '\n';
        }
    }
    return out;
}

}  // namespace locorank
