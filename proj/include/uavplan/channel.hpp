#pragma once

#include <complex>
#include <span>
#include <vector>

#include "uavplan/params.hpp"
#include "uavplan/scenario.hpp"

namespace uavplan {

/// 3D UAV position; h is height above the ground plane.
struct UavPosition {
    double x = 0.0;
    double y = 0.0;
    double h = 0.0;
};

/// Per-link channel summary.
struct LinkGain {
    double plos = 0.0;           // LoS probability
    double pathloss = 0.0;       // linear, >= 0 dB at reference distance
    double effective_gain = 0.0; // MRT gain over path loss
};

double distance_3d(const UavPosition& uav, const Point2& user);

/// Elevation angle in degrees, (0, 90]. Throws std::domain_error for
/// coincident points.
double elevation_angle_deg(const UavPosition& uav, const Point2& user);

/// Logistic LoS probability; strictly increasing in the elevation angle.
double los_probability(double theta_deg, const EnvironmentParams& env);

/// Angle at which los_probability equals phi. phi must lie in (0, 1).
double inverse_los_probability(double phi, const EnvironmentParams& env);

/// Excess attenuation factors as linear multipliers, honoring xi_scale.
std::pair<double, double> xi_linear(const EnvironmentParams& env, const SystemParams& params);

/// Free-space-style reference loss (4 pi f d / c)^alpha.
double reference_loss(double distance_m, const SystemParams& params);

/// Probabilistic air-to-ground path loss: the reference loss times the
/// LoS/NLoS attenuation mixture.
double path_loss(const UavPosition& uav, const Point2& user, const EnvironmentParams& env,
                 const SystemParams& params);

/// Path loss with the LoS probability forced to 1 (LoS-dominant placement
/// assumption used by capacity estimation).
double path_loss_los(const UavPosition& uav, const Point2& user, const EnvironmentParams& env,
                     const SystemParams& params);

/// MRT effective gain |h^H h|^2 / PL (default) or ||h||^2 / PL (norm2 mode).
double effective_gain(std::span<const std::complex<double>> fading, double pathloss,
                      MrtGain mode);

/// Effective gains for every (user, subcarrier, uav) triple, flattened
/// with uav fastest: g[(n*K + k)*L + l]. Positions enter through the path
/// loss; fading comes from the scenario's deterministic field.
struct GainTensor {
    int n_users = 0, n_subcarriers = 0, n_uavs = 0;
    std::vector<double> g;
    double at(int n, int k, int l) const {
        return g[(static_cast<std::size_t>(n) * n_subcarriers + k) * n_uavs + l];
    }
};

/// Aggregate interference at user n on subcarrier k when served by uav l:
/// powers radiated by every other UAV on that subcarrier, weighted by the
/// cross gain into user n. P and A are flattened like GainTensor.
double interference(int n, int k, int l, std::span<const double> powers,
                    std::span<const double> assign, const GainTensor& gains);

double sinr(int n, int k, int l, std::span<const double> powers, std::span<const double> assign,
            const GainTensor& gains, double noise_w);

/// Achievable rate of user n served by uav l, bit/s. Subcarriers the user
/// does not hold contribute nothing.
double user_rate(int n, int l, std::span<const double> powers, std::span<const double> assign,
                 const GainTensor& gains, double noise_w, double subcarrier_bw);

}  // namespace uavplan
