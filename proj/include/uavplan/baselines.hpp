#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "uavplan/channel.hpp"
#include "uavplan/deployment.hpp"
#include "uavplan/scenario.hpp"

namespace uavplan {

/// Reference schemes. Each replaces exactly one pipeline stage; everything
/// else runs the proposed machinery.
enum class Scheme {
    Proposed,
    Kmeans,
    Kmedoid,
    Meanshift,
    RandomDeployment,
    RandomAssociation,
    EqualPower,
    RandomPower,
    RandomSubcarrier,
    VtcSizing,
};

Scheme scheme_from_string(const std::string& tag);
std::string scheme_name(Scheme s);

/// 2D Lloyd clustering; centroid altitude is the lowest one whose coverage
/// cone at threshold phi contains the whole cluster, clamped to bounds.
std::vector<UavPosition> kmeans_placement(const Scenario& scenario, int n_uavs,
                                          std::uint64_t seed);

/// PAM-style swap descent; medoids sit on user positions.
std::vector<UavPosition> kmedoid_placement(const Scenario& scenario, int n_uavs,
                                           std::uint64_t seed);

/// Flat-kernel mean shift; modes merged within bandwidth/2. When the mode
/// count differs from the requested fleet, most-populated modes win and
/// the largest cluster is split to pad.
std::vector<UavPosition> meanshift_placement(const Scenario& scenario, int n_uavs,
                                             double bandwidth, std::uint64_t seed);

/// Uniform positions at mid altitude.
std::vector<UavPosition> random_deployment(const Scenario& scenario, int n_uavs,
                                           std::uint64_t seed);

/// Random association onto the coverage-feasible set: shuffled users draw
/// a random allowed UAV with spare capacity. Returns an empty plan
/// (converged = false) when even the relaxed mask cannot serve the quota.
DeploymentPlan random_association(const Scenario& scenario,
                                  const std::vector<UavPosition>& uavs,
                                  const SystemParams& params, std::uint64_t seed);

/// Per-(subcarrier, UAV) power weights summing to one per UAV.
std::vector<double> random_power_weights(int n_subcarriers, int n_uavs, std::uint64_t seed);

/// Collision-free random subcarrier assignment honoring the association.
std::vector<double> random_subcarrier_assignment(const Scenario& scenario,
                                                 const DeploymentPlan& plan,
                                                 std::uint64_t seed);

}  // namespace uavplan
