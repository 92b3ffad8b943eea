#ifndef LOCORANK_SESSION_HPP
#define LOCORANK_SESSION_HPP

#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "locorank/errors.hpp"

namespace locorank {

struct Vec3 {
    double x = 0.0;
    double y = 0.0;
    double z = 0.0;

    bool operator==(const Vec3&) const = default;
};

enum class TechniqueId : int {
    AstralBody = 0,
    ChickenAcceleration,
    GrabAndPull,
    SlidingLooking,
    Teleport,
    ThrowTeleport,
};
inline constexpr int kTechniqueCount = 6;
inline constexpr std::array<TechniqueId, 6> kAllTechniques = {
    TechniqueId::AstralBody,    TechniqueId::ChickenAcceleration, TechniqueId::GrabAndPull,
    TechniqueId::SlidingLooking, TechniqueId::Teleport,           TechniqueId::ThrowTeleport,
};

const std::string& technique_name(TechniqueId id);
std::optional<TechniqueId> technique_from_name(const std::string& name);

enum class Group { Impaired, NonImpaired };
enum class Hand { Left, Right };

const std::string& group_name(Group g);
const std::string& hand_name(Hand h);

/// One time-stamped pose/kinematics sample for a tracked device.
/// Positions in meters, rotations in degrees (Euler), velocities m/s,
/// angular velocities deg/s, accelerations m/s^2, angular deg/s^2.
struct DeviceSample {
    double t = 0.0;  // seconds since trial start
    Vec3 position;
    Vec3 rotation_euler;
    Vec3 velocity;
    Vec3 angular_velocity;
    Vec3 acceleration;
    Vec3 angular_acceleration;

    bool operator==(const DeviceSample&) const = default;
};

struct ButtonState {
    bool trigger = false;
    bool grip = false;
    bool primary = false;
    bool secondary = false;
    bool primary_touched = false;
    bool secondary_touched = false;

    bool operator==(const ButtonState&) const = default;
};

struct ControllerSample {
    DeviceSample base;
    double thumbstick_x = 0.0;  // [-1, 1]
    double thumbstick_y = 0.0;  // [-1, 1]
    double trigger_pressure = 0.0;  // [0, 1]
    double grip_pressure = 0.0;     // [0, 1]
    ButtonState buttons;

    bool operator==(const ControllerSample&) const = default;
};

/// One start-to-target navigation segment with its full telemetry.
struct TrialTelemetry {
    std::string participant_id;
    Group group = Group::NonImpaired;
    Hand dominant_hand = Hand::Right;
    TechniqueId technique = TechniqueId::Teleport;
    int block = 1;        // {1, 2}
    int trial_index = 1;  // 1..6
    Vec3 start_pos;
    Vec3 target_pos;
    double target_radius = 0.0;  // meters
    std::vector<DeviceSample> headset;
    std::vector<ControllerSample> left;
    std::vector<ControllerSample> right;
    double trial_time = 0.0;  // seconds, (0, 30]
    bool hit = true;
    int obstacles_hit = 0;

    const std::vector<ControllerSample>& controller(Hand h) const {
        return h == Hand::Left ? left : right;
    }
    const std::vector<ControllerSample>& dominant_controller() const {
        return controller(dominant_hand);
    }
    std::string key() const;

    bool operator==(const TrialTelemetry&) const = default;
};

/// One participant's parsed session: all trials across techniques and blocks.
struct SessionLog {
    std::string participant_id;
    Group group = Group::NonImpaired;
    Hand dominant_hand = Hand::Right;
    std::vector<TrialTelemetry> trials;

    bool operator==(const SessionLog&) const = default;
};

struct ParseIssue {
    std::size_t line = 0;
    std::string field;
    std::string message;
};

/// Collects per-line problems when the caller wants a full report instead of
/// fail-fast behavior. One input line yields either a trial or >= 1 issues.
struct ParseReport {
    std::size_t lines = 0;
    std::size_t trials = 0;
    std::vector<ParseIssue> issues;
    bool ok() const { return issues.empty(); }
};

/// Parses one session-log file (UTF-8, one JSON trial object per line).
/// With report == nullptr the first problem throws (MalformedRecord,
/// InvariantViolation, or DuplicateTrialKey); with a report, bad lines are
/// recorded and skipped so that lines == trials + distinct failed lines.
SessionLog parse_session_log(const std::string& path, ParseReport* report = nullptr);

/// Same, from an in-memory buffer (used by round-trip tests and bindings).
SessionLog parse_session_log_text(const std::string& text, ParseReport* report = nullptr);

std::string serialize_session_log(const SessionLog& log);
void write_session_log(const SessionLog& log, const std::string& path);

/// Loads every *.jsonl session file in a directory (sorted by filename), or a
/// single file if `path` is not a directory.
std::vector<SessionLog> load_sessions(const std::string& path);

struct PressCounts {
    int trigger = 0;
    int grip = 0;
    int primary = 0;
    int secondary = 0;
    int primary_touch = 0;
    int secondary_touch = 0;

    bool operator==(const PressCounts&) const = default;
};

/// Rising-edge counts for the six button channels; a first sample already
/// held down counts as one press.
PressCounts press_counts(const std::vector<ControllerSample>& samples);

}  // namespace locorank

#endif
