#pragma once

#include <complex>
#include <cstdint>
#include <string>
#include <vector>

#include "uavplan/params.hpp"
#include "uavplan/rng.hpp"

namespace uavplan {

struct Point2 {
    double x = 0.0;
    double y = 0.0;
};

/// One random drop: user positions plus the small-scale fading field.
/// Fading coefficients are a pure function of (fading_seed, user,
/// subcarrier, uav, antenna), so the tensor never has to be materialized
/// up front and any fleet size can be served from the same scenario.
/// Snapshots therefore serialize positions plus the seed and dimensions.
struct Scenario {
    std::vector<Point2> user_positions;
    std::uint64_t fading_seed = 0;
    EnvironmentParams environment;
    SystemParams params;

    /// Circularly-symmetric complex Gaussian, unit variance per entry.
    std::vector<std::complex<double>> fading(int user, int subcarrier, int uav) const;

    /// Materializes the N x K x L x U tensor (flattened, antenna fastest).
    std::vector<std::complex<double>> fading_tensor(int n_uavs) const;

    std::string to_json() const;
};

/// Users i.i.d. uniform over the area rectangle; fading seeded from the
/// same seed. Identical (params, env, seed) gives a bit-identical scenario.
Scenario generate_scenario(const SystemParams& params, const EnvironmentParams& env,
                           std::uint64_t seed);

}  // namespace uavplan
