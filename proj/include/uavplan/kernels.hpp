#pragma once

#include <cstdint>
#include <vector>

#include "uavplan/channel.hpp"
#include "uavplan/scenario.hpp"

namespace uavplan {

// Data-parallel kernels. Each has a serial reference implementation that
// the parallel version must match exactly; the bench target compares their
// throughput. Per-element arithmetic is identical, so results are bitwise
// equal regardless of thread count.

/// Effective gain for every (user, subcarrier, uav) triple.
GainTensor gain_tensor_serial(const Scenario& sc, const std::vector<UavPosition>& uavs);
GainTensor gain_tensor(const Scenario& sc, const std::vector<UavPosition>& uavs);

/// Per-user achievable rates for a full allocation (powers/assign flattened
/// like GainTensor).
std::vector<double> user_rates_serial(const Scenario& sc, const GainTensor& gains,
                                      const std::vector<double>& powers,
                                      const std::vector<double>& assign,
                                      const std::vector<int>& serving_uav);
std::vector<double> user_rates(const Scenario& sc, const GainTensor& gains,
                               const std::vector<double>& powers,
                               const std::vector<double>& assign,
                               const std::vector<int>& serving_uav);

/// Ergodic spectral efficiency (bit/s/Hz) under LoS-dominant placement:
/// UAV pinned at the area center at minimum altitude, users dropped over
/// the area (jittered-stratified grid, uniform marginals), fresh fading
/// each draw, full transmit power. Deterministic in (seed, n_draws) and
/// thread count.
double ergodic_spectral_efficiency_serial(const SystemParams& params,
                                          const EnvironmentParams& env, int n_draws,
                                          std::uint64_t seed);
double ergodic_spectral_efficiency(const SystemParams& params, const EnvironmentParams& env,
                                   int n_draws, std::uint64_t seed);

}  // namespace uavplan
