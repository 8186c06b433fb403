#pragma once

#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

namespace uavplan {

/// Raised on malformed config files or parameter bundles that violate an
/// invariant. The message names the offending key.
struct ConfigError : std::runtime_error {
    explicit ConfigError(const std::string& msg) : std::runtime_error(msg) {}
};

/// Air-to-ground LoS-probability and excess-attenuation constants for one
/// environment class. The attenuation factors are linear multipliers by
/// default; see SystemParams::xi_scale.
struct EnvironmentParams {
    std::string name = "urban";
    double b1 = 9.61;        // LoS logistic offset, degrees
    double b2 = 0.16;        // LoS logistic slope, 1/degree
    double xi_los = 1.0;     // excess attenuation, LoS links
    double xi_nlos = 20.0;   // excess attenuation, NLoS links

    void validate() const;
};

/// Environment presets: suburban, urban, dense-urban, high-rise.
EnvironmentParams environment_preset(const std::string& name);

enum class BandwidthMode { PerSubcarrierTotalDivK, LiteralB };
enum class NoiseMode { PsdTimesBandwidth, LiteralFcSigma };
enum class XiScale { Linear, Db };
enum class MrtGain { NormFourth, NormSquared };

/// Every scalar knob of the planner. Defaults reproduce the reference
/// operating point (20 MHz / 8 subcarriers / 900 MHz / 0.2 W, 1 km x 1 km
/// area, 1 Mbps per-user QoS).
struct SystemParams {
    int n_users = 30;            // N
    int n_subcarriers = 8;       // K
    int n_antennas = 12;         // U
    double bandwidth_hz = 20e6;  // B, total downlink bandwidth
    double carrier_freq_hz = 900e6;
    double pathloss_exponent = 4.0;
    double speed_of_light = 299792458.0;
    double noise_psd_dbm_hz = -170.0;
    double max_power_w = 0.2;    // per-UAV transmit budget
    double qos_rate_bps = 1e6;   // uniform per-user rate floor
    std::vector<double> qos_rate_per_user;  // optional per-user override
    double serve_fraction = 1.0;  // lambda
    double los_threshold = 0.75;  // phi
    double x_min = 0.0, x_max = 1000.0;
    double y_min = 0.0, y_max = 1000.0;
    double h_min = 21.0, h_max = 100.0;
    double min_separation_m = 50.0;  // d_o
    int c_min = 1;                   // serving lower bound, per UAV
    int c_max_override = 0;          // 0 = auto (capacity-derived)
    int inventory = 0;               // UAV inventory cap M, 0 = unbounded
    double penalty_weight = 10.0;    // mu, binarity penalty
    double qos_weight = 20.0;        // elastic QoS shortfall weight
    double tol_pathloss = 1e-3;      // eps1, relative
    double tol_rate = 1e-3;          // eps2, relative
    double solver_tol = 1e-6;
    int max_iter_placement = 50;
    int max_iter_allocation = 30;
    int lambda_draws = 10000;        // Monte-Carlo draws for spectral efficiency
    double mean_shift_bandwidth = 0.0;  // 0 = area width / 4
    std::uint64_t rng_seed = 1;

    BandwidthMode bandwidth_mode = BandwidthMode::PerSubcarrierTotalDivK;
    NoiseMode noise_mode = NoiseMode::PsdTimesBandwidth;
    XiScale xi_scale = XiScale::Linear;
    MrtGain mrt_gain = MrtGain::NormFourth;

    void validate() const;

    /// Bandwidth entering the per-subcarrier rate formula.
    double subcarrier_bandwidth() const {
        return bandwidth_mode == BandwidthMode::LiteralB ? bandwidth_hz
                                                         : bandwidth_hz / n_subcarriers;
    }

    /// Noise power at the receiver, watts.
    double noise_power_w() const {
        const double psd_w = std::pow(10.0, (noise_psd_dbm_hz - 30.0) / 10.0);
        if (noise_mode == NoiseMode::LiteralFcSigma) return carrier_freq_hz * psd_w;
        return psd_w * subcarrier_bandwidth();
    }

    double qos_rate(int user) const {
        if (!qos_rate_per_user.empty()) return qos_rate_per_user.at(user);
        return qos_rate_bps;
    }

    int min_served() const {
        return static_cast<int>(std::ceil(serve_fraction * n_users - 1e-12));
    }
};

/// Parses the flat key/value config format; unknown keys are an error,
/// missing keys keep their defaults. Returns {params, environment}.
std::pair<SystemParams, EnvironmentParams> load_config(const std::string& path);

/// Same parser over an in-memory string (used by tests).
std::pair<SystemParams, EnvironmentParams> parse_config(const std::string& text);

/// Writes a config that load_config reads back identically.
std::string dump_config(const SystemParams& p, const EnvironmentParams& env);

}  // namespace uavplan
