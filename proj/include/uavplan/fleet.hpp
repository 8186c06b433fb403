#pragma once

#include <cstdint>
#include <string>

#include "uavplan/params.hpp"

namespace uavplan {

struct FleetPlan {
    double spectral_efficiency = 0.0;  // bit/s/Hz, capacity estimate
    double r_max = 0.0;                // bit/s, full-band per-user ceiling
    int c_max = 0;                     // users each UAV can support
    int n_uavs = 0;                    // active fleet size L
    std::string method;                // proposed | vtc_baseline
};

/// Capacity of one UAV under LoS-dominant placement: Monte-Carlo spectral
/// efficiency -> full-band rate ceiling -> floor(R_max / qos). Throws
/// ConfigError when the QoS rate exceeds the ceiling (c_max would be 0).
FleetPlan compute_capacity(const SystemParams& params, const EnvironmentParams& env,
                           std::uint64_t seed);

/// ceil(lambda N / C_max), clamped to the inventory when one is set.
/// Raises ConfigError when the inventory cannot cover the demand.
int compute_num_uavs(const SystemParams& params, int c_max);

/// QoS-blind sizing from the earlier design: ceil(lambda N / K).
int compute_num_uavs_vtc(const SystemParams& params);

/// Full proposed plan: capacity estimate plus fleet size.
FleetPlan plan_fleet(const SystemParams& params, const EnvironmentParams& env,
                     std::uint64_t seed);

}  // namespace uavplan
