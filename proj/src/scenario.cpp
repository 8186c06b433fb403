#include "uavplan/scenario.hpp"

#include <nlohmann/json.hpp>

namespace uavplan {

namespace {
constexpr double kInvSqrt2 = 0.70710678118654752440;
}

std::vector<std::complex<double>> Scenario::fading(int user, int subcarrier, int uav) const {
    const int u_ant = params.n_antennas;
    // One stream per (n, k, l) triple; antenna coefficients drawn in order.
    const std::uint64_t stream =
        (static_cast<std::uint64_t>(user) << 40) ^
        (static_cast<std::uint64_t>(subcarrier) << 20) ^
        static_cast<std::uint64_t>(uav);
    Rng rng(fading_seed, stream);
    std::vector<std::complex<double>> h(u_ant);
    for (int a = 0; a < u_ant; ++a) {
        const double re = rng.gaussian() * kInvSqrt2;
        const double im = rng.gaussian() * kInvSqrt2;
        h[a] = {re, im};
    }
    return h;
}

std::vector<std::complex<double>> Scenario::fading_tensor(int n_uavs) const {
    const int n = params.n_users, k = params.n_subcarriers, u = params.n_antennas;
    std::vector<std::complex<double>> t;
    t.reserve(static_cast<std::size_t>(n) * k * n_uavs * u);
    for (int in = 0; in < n; ++in)
        for (int ik = 0; ik < k; ++ik)
            for (int il = 0; il < n_uavs; ++il) {
                auto h = fading(in, ik, il);
                t.insert(t.end(), h.begin(), h.end());
            }
    return t;
}

Scenario generate_scenario(const SystemParams& params, const EnvironmentParams& env,
                           std::uint64_t seed) {
    Scenario s;
    s.params = params;
    s.params.rng_seed = seed;
    s.environment = env;
    Rng rng(seed, /*stream=*/0);
    s.user_positions.resize(params.n_users);
    for (auto& p : s.user_positions) {
        p.x = rng.uniform(params.x_min, params.x_max);
        p.y = rng.uniform(params.y_min, params.y_max);
    }
    s.fading_seed = mix_seed(seed, /*stream=*/1);
    return s;
}

std::string Scenario::to_json() const {
    nlohmann::json j;
    j["environment"] = environment.name;
    j["seed"] = params.rng_seed;
    j["fading_seed"] = fading_seed;
    j["fading_dims"] = {params.n_users, params.n_subcarriers, params.n_antennas};
    auto& pos = j["user_positions"] = nlohmann::json::array();
    for (const auto& p : user_positions) pos.push_back({p.x, p.y});
    return j.dump(2);
}

}  // namespace uavplan
