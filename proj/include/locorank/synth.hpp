#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include "locorank/questionnaire.hpp"
#include "locorank/session.hpp"

namespace locorank {

inline constexpr std::size_t kAbilityAxes = 5;

// Axis order: fine_motor, gross_motor, head_mobility, stamina, pain_free.
const std::array<std::string, kAbilityAxes>& ability_axis_names();

struct AbilityProfile {
    std::array<double, kAbilityAxes> axes{};  // each in [0,1], 1 = unimpaired
};

struct TechniqueDemand {
    std::array<double, kAbilityAxes> weights{};  // all >= 0, sum <= 4
    double base_time = 0.0;                      // seconds, in (0, 30)
};

using DemandTable = std::array<TechniqueDemand, kTechniqueCount>;

// Defaults give each technique a distinct base time and load the axes its
// control mechanism stresses; magnitudes are small enough that technique
// order is the same for every profile. Values are tuning knobs, not
// measurements.
const DemandTable& default_demands();
DemandTable load_demands(const std::string& path);
void write_demands(const DemandTable& demands, const std::string& path);

// base_time * (1 + sum_k w_k * (1 - profile_k)), clamped to (0, 30].
double ground_truth_time(const AbilityProfile& profile, const TechniqueDemand& demand);

struct CohortConfig {
    int n_impaired = 20;
    int n_non_impaired = 20;
    int trials_per_block = 6;
    int blocks = 2;
    double noise_sigma = 0.15;  // lognormal sigma on trial times
    double sample_rate = 72.0;  // telemetry Hz
    std::uint64_t seed = 42;
};

struct SynthCohort {
    std::vector<SessionLog> sessions;       // one per participant
    QuestionnaireSet questionnaires;
    std::vector<AbilityProfile> profiles;   // aligned to sessions
};

// Deterministic synthetic cohort: group-dependent ability profiles, trial
// times from ground_truth_time with multiplicative lognormal noise (clamped
// at 30 s with hit=false), device streams as jittered straight paths, and
// questionnaires derived from the profile. Per-participant RNG streams are
// keyed on (seed, participant index), so generation order never matters.
SynthCohort generate_cohort(const CohortConfig& config, const DemandTable& demands);

// Writes <out_dir>/sessions/P##.jsonl and <out_dir>/questionnaires.jsonl.
void write_cohort(const SynthCohort& cohort, const std::string& out_dir);

}  // namespace locorank
