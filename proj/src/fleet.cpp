#include "uavplan/fleet.hpp"

#include <cmath>

#include "uavplan/kernels.hpp"

namespace uavplan {

FleetPlan compute_capacity(const SystemParams& params, const EnvironmentParams& env,
                           std::uint64_t seed) {
    FleetPlan plan;
    plan.method = "proposed";
    plan.spectral_efficiency =
        ergodic_spectral_efficiency(params, env, params.lambda_draws, seed);
    plan.r_max = params.bandwidth_hz * plan.spectral_efficiency;
    if (params.c_max_override > 0) {
        plan.c_max = params.c_max_override;
        return plan;
    }
    const double qos = params.qos_rate_bps;
    if (qos <= 0.0) {
        plan.c_max = params.n_subcarriers;  // no QoS floor: subcarriers are the limit
        return plan;
    }
    plan.c_max = static_cast<int>(std::floor(plan.r_max / qos));
    if (plan.c_max < 1)
        throw ConfigError("QoS rate exceeds the per-user capacity estimate (c_max = 0)");
    return plan;
}

int compute_num_uavs(const SystemParams& params, int c_max) {
    const int L =
        static_cast<int>(std::ceil(params.serve_fraction * params.n_users / c_max - 1e-12));
    const int l_final = std::max(1, L);
    if (params.inventory > 0 && l_final > params.inventory)
        throw ConfigError("fleet sizing needs " + std::to_string(l_final) +
                          " UAVs but the inventory is " + std::to_string(params.inventory));
    return l_final;
}

int compute_num_uavs_vtc(const SystemParams& params) {
    return std::max(1, static_cast<int>(std::ceil(
                           params.serve_fraction * params.n_users / params.n_subcarriers - 1e-12)));
}

FleetPlan plan_fleet(const SystemParams& params, const EnvironmentParams& env,
                     std::uint64_t seed) {
    FleetPlan plan = compute_capacity(params, env, seed);
    plan.n_uavs = compute_num_uavs(params, plan.c_max);
    return plan;
}

}  // namespace uavplan
