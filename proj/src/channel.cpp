#include "uavplan/channel.hpp"

#include <cmath>
#include <stdexcept>

namespace uavplan {

namespace {
constexpr double kPi = 3.14159265358979323846;
constexpr double kRadToDeg = 180.0 / kPi;
}

double distance_3d(const UavPosition& uav, const Point2& user) {
    const double dx = uav.x - user.x;
    const double dy = uav.y - user.y;
    return std::sqrt(dx * dx + dy * dy + uav.h * uav.h);
}

double elevation_angle_deg(const UavPosition& uav, const Point2& user) {
    const double d = distance_3d(uav, user);
    if (d <= 0.0) throw std::domain_error("elevation angle undefined for coincident points");
    return kRadToDeg * std::asin(uav.h / d);
}

double los_probability(double theta_deg, const EnvironmentParams& env) {
    return 1.0 / (1.0 + env.b1 * std::exp(-env.b2 * (theta_deg - env.b1)));
}

double inverse_los_probability(double phi, const EnvironmentParams& env) {
    if (phi <= 0.0 || phi >= 1.0)
        throw std::domain_error("los threshold must be in (0, 1)");
    return env.b1 + std::log(phi * env.b1 / (1.0 - phi)) / env.b2;
}

std::pair<double, double> xi_linear(const EnvironmentParams& env, const SystemParams& params) {
    if (params.xi_scale == XiScale::Db)
        return {std::pow(10.0, env.xi_los / 10.0), std::pow(10.0, env.xi_nlos / 10.0)};
    return {env.xi_los, env.xi_nlos};
}

double reference_loss(double distance_m, const SystemParams& params) {
    return std::pow(4.0 * kPi * params.carrier_freq_hz * distance_m / params.speed_of_light,
                    params.pathloss_exponent);
}

double path_loss(const UavPosition& uav, const Point2& user, const EnvironmentParams& env,
                 const SystemParams& params) {
    const double d = distance_3d(uav, user);
    if (d <= 0.0) throw std::domain_error("path loss undefined at zero distance");
    const double plos = los_probability(kRadToDeg * std::asin(uav.h / d), env);
    const auto [xl, xn] = xi_linear(env, params);
    return reference_loss(d, params) * (plos * xl + (1.0 - plos) * xn);
}

double path_loss_los(const UavPosition& uav, const Point2& user, const EnvironmentParams& env,
                     const SystemParams& params) {
    const double d = distance_3d(uav, user);
    if (d <= 0.0) throw std::domain_error("path loss undefined at zero distance");
    return reference_loss(d, params) * xi_linear(env, params).first;
}

double effective_gain(std::span<const std::complex<double>> fading, double pathloss,
                      MrtGain mode) {
    if (pathloss <= 0.0) throw std::domain_error("path loss must be positive");
    double norm2 = 0.0;
    for (const auto& c : fading) norm2 += std::norm(c);
    return (mode == MrtGain::NormSquared ? norm2 : norm2 * norm2) / pathloss;
}

double interference(int n, int k, int l, std::span<const double> powers,
                    std::span<const double> assign, const GainTensor& gains) {
    const int L = gains.n_uavs;
    const int N = gains.n_users;
    double phi = 0.0;
    for (int l2 = 0; l2 < L; ++l2) {
        if (l2 == l) continue;
        double p_tot = 0.0;
        for (int n2 = 0; n2 < N; ++n2) {
            if (n2 == n) continue;
            const std::size_t idx = (static_cast<std::size_t>(n2) * gains.n_subcarriers + k) * L + l2;
            if (assign.empty() || assign[idx] > 0.0) p_tot += powers[idx];
        }
        phi += p_tot * gains.at(n, k, l2);
    }
    return phi;
}

double sinr(int n, int k, int l, std::span<const double> powers, std::span<const double> assign,
            const GainTensor& gains, double noise_w) {
    const std::size_t idx = (static_cast<std::size_t>(n) * gains.n_subcarriers + k) * gains.n_uavs + l;
    const double p = (assign.empty() || assign[idx] > 0.0) ? powers[idx] : 0.0;
    if (p <= 0.0) return 0.0;
    return p * gains.at(n, k, l) / (interference(n, k, l, powers, assign, gains) + noise_w);
}

double user_rate(int n, int l, std::span<const double> powers, std::span<const double> assign,
                 const GainTensor& gains, double noise_w, double subcarrier_bw) {
    double sum = 0.0;
    for (int k = 0; k < gains.n_subcarriers; ++k)
        sum += std::log2(1.0 + sinr(n, k, l, powers, assign, gains, noise_w));
    return subcarrier_bw * sum;
}

}  // namespace uavplan
