#include "uavplan/kernels.hpp"

#include <cmath>

namespace uavplan {

namespace {

double gain_entry(const Scenario& sc, const std::vector<UavPosition>& uavs, int n, int k, int l) {
    const double pl = path_loss(uavs[l], sc.user_positions[n], sc.environment, sc.params);
    const auto h = sc.fading(n, k, l);
    return effective_gain(h, pl, sc.params.mrt_gain);
}

// One spectral-efficiency sample. Position comes from a jittered grid cell
// (uniform over the area marginally), fading is a fresh U-vector.
double lambda_sample(const SystemParams& p, const EnvironmentParams& env, std::uint64_t seed,
                     int draw, int grid, double noise_w) {
    Rng rng(seed, static_cast<std::uint64_t>(draw) + 2);
    double ux, uy;
    if (draw < grid * grid) {
        const int cx = draw % grid, cy = draw / grid;
        ux = p.x_min + (cx + rng.uniform01()) / grid * (p.x_max - p.x_min);
        uy = p.y_min + (cy + rng.uniform01()) / grid * (p.y_max - p.y_min);
    } else {
        ux = rng.uniform(p.x_min, p.x_max);
        uy = rng.uniform(p.y_min, p.y_max);
    }
    const UavPosition uav{(p.x_min + p.x_max) / 2.0, (p.y_min + p.y_max) / 2.0, p.h_min};
    const double pl = path_loss_los(uav, Point2{ux, uy}, env, p);
    double norm2 = 0.0;
    for (int a = 0; a < p.n_antennas; ++a) {
        const double re = rng.gaussian(), im = rng.gaussian();
        norm2 += 0.5 * (re * re + im * im);
    }
    const double g = (p.mrt_gain == MrtGain::NormSquared ? norm2 : norm2 * norm2) / pl;
    return std::log2(1.0 + p.max_power_w * g / noise_w);
}

}  // namespace

GainTensor gain_tensor_serial(const Scenario& sc, const std::vector<UavPosition>& uavs) {
    GainTensor t;
    t.n_users = sc.params.n_users;
    t.n_subcarriers = sc.params.n_subcarriers;
    t.n_uavs = static_cast<int>(uavs.size());
    t.g.resize(static_cast<std::size_t>(t.n_users) * t.n_subcarriers * t.n_uavs);
    for (int n = 0; n < t.n_users; ++n)
        for (int k = 0; k < t.n_subcarriers; ++k)
            for (int l = 0; l < t.n_uavs; ++l)
                t.g[(static_cast<std::size_t>(n) * t.n_subcarriers + k) * t.n_uavs + l] =
                    gain_entry(sc, uavs, n, k, l);
    return t;
}

GainTensor gain_tensor(const Scenario& sc, const std::vector<UavPosition>& uavs) {
    GainTensor t;
    t.n_users = sc.params.n_users;
    t.n_subcarriers = sc.params.n_subcarriers;
    t.n_uavs = static_cast<int>(uavs.size());
    const std::size_t total = static_cast<std::size_t>(t.n_users) * t.n_subcarriers * t.n_uavs;
    t.g.resize(total);
#pragma omp parallel for schedule(static)
    for (long long i = 0; i < static_cast<long long>(total); ++i) {
        const int l = static_cast<int>(i % t.n_uavs);
        const int k = static_cast<int>((i / t.n_uavs) % t.n_subcarriers);
        const int n = static_cast<int>(i / (static_cast<std::size_t>(t.n_uavs) * t.n_subcarriers));
        t.g[i] = gain_entry(sc, uavs, n, k, l);
    }
    return t;
}

std::vector<double> user_rates_serial(const Scenario& sc, const GainTensor& gains,
                                      const std::vector<double>& powers,
                                      const std::vector<double>& assign,
                                      const std::vector<int>& serving_uav) {
    const double bw = sc.params.subcarrier_bandwidth();
    const double noise = sc.params.noise_power_w();
    std::vector<double> rates(gains.n_users, 0.0);
    for (int n = 0; n < gains.n_users; ++n) {
        const int l = serving_uav[n];
        if (l >= 0) rates[n] = user_rate(n, l, powers, assign, gains, noise, bw);
    }
    return rates;
}

std::vector<double> user_rates(const Scenario& sc, const GainTensor& gains,
                               const std::vector<double>& powers,
                               const std::vector<double>& assign,
                               const std::vector<int>& serving_uav) {
    const double bw = sc.params.subcarrier_bandwidth();
    const double noise = sc.params.noise_power_w();
    std::vector<double> rates(gains.n_users, 0.0);
#pragma omp parallel for schedule(static)
    for (int n = 0; n < gains.n_users; ++n) {
        const int l = serving_uav[n];
        if (l >= 0) rates[n] = user_rate(n, l, powers, assign, gains, noise, bw);
    }
    return rates;
}

double ergodic_spectral_efficiency_serial(const SystemParams& params,
                                          const EnvironmentParams& env, int n_draws,
                                          std::uint64_t seed) {
    const int grid = static_cast<int>(std::floor(std::sqrt(static_cast<double>(n_draws))));
    const double noise = params.noise_power_w();
    std::vector<double> samples(n_draws);
    for (int i = 0; i < n_draws; ++i)
        samples[i] = lambda_sample(params, env, seed, i, grid, noise);
    double sum = 0.0;
    for (double v : samples) sum += v;
    return sum / n_draws;
}

double ergodic_spectral_efficiency(const SystemParams& params, const EnvironmentParams& env,
                                   int n_draws, std::uint64_t seed) {
    const int grid = static_cast<int>(std::floor(std::sqrt(static_cast<double>(n_draws))));
    const double noise = params.noise_power_w();
    std::vector<double> samples(n_draws);
#pragma omp parallel for schedule(static)
    for (int i = 0; i < n_draws; ++i)
        samples[i] = lambda_sample(params, env, seed, i, grid, noise);
    // Summed in index order so the mean is thread-count independent.
    double sum = 0.0;
    for (double v : samples) sum += v;
    return sum / n_draws;
}

}  // namespace uavplan
