#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "uavplan/allocation.hpp"
#include "uavplan/baselines.hpp"
#include "uavplan/deployment.hpp"
#include "uavplan/fleet.hpp"
#include "uavplan/params.hpp"

namespace uavplan {

/// One pipeline run's metrics. Path loss is stored linear and reported in
/// dB by the writers.
struct MetricsRow {
    std::uint64_t seed = 0;
    std::string scheme;
    int n_users = 0;
    double phi = 0.0;
    std::string environment;
    int l_planned = 0;  // fleet-sizing output
    int l_final = 0;    // after coverage escalation
    double avg_pathloss = 0.0;          // linear
    double sum_rate_bps = 0.0;
    std::vector<double> per_uav_rate_bps;
    double served_fraction = 0.0;
    double qos_shortfall_bps = 0.0;     // summed over users
    std::vector<std::pair<double, double>> outage_curve;  // (bit/s/Hz, probability)
    int alg1_iterations = 0;
    int alg2_iterations = 0;
    double alg1_time_s = 0.0;
    double alg2_time_s = 0.0;
    bool feasible = false;   // feasibility_check passed
    bool failed = false;     // stage failure; reason below
    std::string status;      // "ok" or failure reason
};

struct MetricsReport {
    std::vector<MetricsRow> rows;
    std::string to_csv() const;
    static MetricsReport from_csv(const std::string& text);
};

/// Fraction of users whose spectral efficiency falls below each threshold.
std::vector<std::pair<double, double>> outage_curve(const std::vector<double>& rates_bps,
                                                    double bandwidth_hz,
                                                    const std::vector<double>& thresholds);

struct PipelineOptions {
    bool run_allocation = true;           // deployment-only runs skip algorithm 2
    std::vector<double> outage_thresholds = {0.05, 0.1, 0.2, 0.4, 0.8, 1.6};
};

struct PipelineResult {
    MetricsRow row;
    std::optional<DeploymentPlan> plan;
    std::optional<RadioAllocation> allocation;
    ScaState sca;
    std::vector<double> alg1_trace;  // avg path loss per iteration
};

/// scenario -> fleet sizing -> deployment (or baseline stage) -> resource
/// allocation (or baseline stage) -> metrics. Deterministic per
/// (config, scheme, seed); stage failures come back as failed rows.
PipelineResult run_pipeline(const SystemParams& params, const EnvironmentParams& env,
                            Scheme scheme, std::uint64_t seed, const PipelineOptions& opt = {});

enum class SweepAxis { Users, Phi, Environment, SchemeAxis };

SweepAxis sweep_axis_from_string(const std::string& name);

/// Cross product of axis values and seeds; cells run concurrently. Failed
/// cells stay in the report with their reason.
MetricsReport sweep(const SystemParams& params, const EnvironmentParams& env, Scheme scheme,
                    SweepAxis axis, const std::vector<std::string>& values,
                    const std::vector<std::uint64_t>& seeds, const PipelineOptions& opt = {});

/// Aggregated mean and standard error of a column over non-failed rows.
struct CellStats {
    double mean = 0.0;
    double stderr_ = 0.0;
    int count = 0;
    int failures = 0;
};
CellStats aggregate_sum_rate(const MetricsReport& report, const std::string& scheme);
CellStats aggregate_pathloss(const MetricsReport& report, const std::string& scheme);

}  // namespace uavplan
