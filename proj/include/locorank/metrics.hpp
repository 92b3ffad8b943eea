#pragma once

#include <array>
#include <string>
#include <vector>

#include "locorank/session.hpp"

namespace locorank {

// Engineered per-trial interaction metrics. Names are stable identifiers:
// they become dataset column names and appear in artifacts, so changing one
// is a format break.
inline constexpr std::size_t kMetricCount = 33;

const std::array<std::string, kMetricCount>& metric_names();
std::size_t metric_index(const std::string& name);

struct SubmovementParams {
    double peak_fraction = 0.10;  // dips must fall below this fraction of the run peak
    int min_dip_samples = 3;      // shorter dips merge the neighbouring runs
};

// Total length of the polyline through the given positions.
double path_length(const std::vector<Vec3>& positions);

// Largest Euclidean distance between any two positions.
double max_pairwise_distance(const std::vector<Vec3>& positions);

// Speed-profile segmentation: count of maximal runs where speed stays at or
// above peak_fraction times the series peak. Runs separated by dips shorter
// than min_dip_samples merge into one. Timestamps must be increasing; they
// carry no weight beyond validation.
int submovement_count(const std::vector<double>& t, const std::vector<double>& speeds,
                      const SubmovementParams& params = {});

// Arithmetic mean of a scalar channel.
double mean_channel(const std::vector<double>& values);

// Signed lateral deviations from the start->target axis, measured in the
// ground plane (x, z). The sign marks a consistent side of the axis; only
// magnitudes and sign changes feed the metrics.
std::vector<double> task_axis_deviations(const std::vector<Vec3>& positions, const Vec3& start,
                                         const Vec3& target);

// Sample standard deviation (n - 1 denominator) of lateral deviations.
double movement_variability(const std::vector<double>& deviations);

// Number of re-entries into the target sphere: entries minus the first.
int target_reentry_count(const std::vector<Vec3>& positions, const Vec3& target, double radius);

// Strict sign changes in the deviation sequence. Zeros inherit the preceding
// sign; an all-zero or single-signed sequence crosses zero times.
int axis_crossed_count(const std::vector<double>& deviations);

struct PairSeriesMetrics {
    double variability = 0.0;  // summed distance between the paired positions
    double extent = 0.0;       // max distance between the paired positions
};

// Metrics over two index-aligned position series. Throws LengthMismatch when
// sizes differ; align_series prepares unaligned device streams.
PairSeriesMetrics pair_series_metrics(const std::vector<Vec3>& a, const std::vector<Vec3>& b);

struct AlignedPositions {
    std::vector<Vec3> a;
    std::vector<Vec3> b;
};

// Pairs each sample of a with the nearest-in-time sample of b; pairs further
// apart than max_skew seconds are dropped.
AlignedPositions align_series(const std::vector<DeviceSample>& a,
                              const std::vector<DeviceSample>& b, double max_skew = 0.010);

struct TrialMetrics {
    std::array<double, kMetricCount> values{};

    double& operator[](std::size_t i) { return values[i]; }
    double operator[](std::size_t i) const { return values[i]; }
    double at(const std::string& name) const { return values[metric_index(name)]; }
};

// All 33 metrics for one trial. The dominant controller drives the dom_*
// block; throws MissingDominantController when that stream is empty.
TrialMetrics extract_trial_metrics(const TrialTelemetry& trial,
                                   const SubmovementParams& params = {});

// One CSV row per trial: participant_id, group, technique, block,
// trial_index, trial_time_s, hit, obstacles_hit, then the 33 metrics.
std::string metrics_csv(const std::vector<SessionLog>& sessions,
                        const SubmovementParams& params = {});

}  // namespace locorank
