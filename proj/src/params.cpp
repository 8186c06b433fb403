#include "uavplan/params.hpp"

#include <algorithm>
#include <cctype>
#include <fstream>
#include <map>
#include <sstream>

namespace uavplan {

void EnvironmentParams::validate() const {
    if (b1 <= 0.0) throw ConfigError("environment.b1 must be positive");
    if (b2 <= 0.0) throw ConfigError("environment.b2 must be positive");
    if (xi_los < 1.0) throw ConfigError("environment.xi_los must be >= 1");
    if (xi_nlos < xi_los) throw ConfigError("environment.xi_nlos must be >= xi_los");
}

EnvironmentParams environment_preset(const std::string& name) {
    if (name == "suburban") return {"suburban", 4.88, 0.43, 1.0, 21.0};
    if (name == "urban") return {"urban", 9.61, 0.16, 1.0, 20.0};
    if (name == "dense-urban") return {"dense-urban", 12.08, 0.11, 1.6, 23.0};
    if (name == "high-rise") return {"high-rise", 27.23, 0.08, 2.3, 34.0};
    throw ConfigError("unknown environment '" + name + "'");
}

void SystemParams::validate() const {
    if (n_users < 1) throw ConfigError("n_users must be >= 1");
    if (n_subcarriers < 1) throw ConfigError("n_subcarriers must be >= 1");
    if (n_antennas < 1) throw ConfigError("n_antennas must be >= 1");
    if (bandwidth_hz <= 0.0) throw ConfigError("bandwidth_hz must be positive");
    if (carrier_freq_hz <= 0.0) throw ConfigError("carrier_freq_hz must be positive");
    if (max_power_w <= 0.0) throw ConfigError("max_power_w must be positive");
    if (x_min >= x_max) throw ConfigError("area bounds inverted: x_min >= x_max");
    if (y_min >= y_max) throw ConfigError("area bounds inverted: y_min >= y_max");
    if (h_min <= 0.0 || h_min >= h_max) throw ConfigError("altitude bounds inverted");
    if (serve_fraction <= 0.0 || serve_fraction > 1.0)
        throw ConfigError("serve_fraction must be in (0, 1]");
    if (los_threshold <= 0.0 || los_threshold >= 1.0)
        throw ConfigError("los_threshold must be in (0, 1)");
    if (qos_rate_bps < 0.0) throw ConfigError("qos_rate_bps must be >= 0");
    if (!qos_rate_per_user.empty() &&
        static_cast<int>(qos_rate_per_user.size()) != n_users)
        throw ConfigError("qos_rate_per_user length must equal n_users");
    if (c_min < 0) throw ConfigError("c_min must be >= 0");
    if (min_separation_m < 0.0) throw ConfigError("min_separation_m must be >= 0");
    if (penalty_weight < 0.0) throw ConfigError("penalty_weight must be >= 0");
    if (qos_weight < 0.0) throw ConfigError("qos_weight must be >= 0");
    if (lambda_draws < 1) throw ConfigError("lambda_draws must be >= 1");
}

namespace {

std::string trim(const std::string& s) {
    std::size_t a = s.find_first_not_of(" \t\r\n");
    if (a == std::string::npos) return "";
    std::size_t b = s.find_last_not_of(" \t\r\n");
    return s.substr(a, b - a + 1);
}

double to_double(const std::string& key, const std::string& v) {
    try {
        std::size_t pos = 0;
        double x = std::stod(v, &pos);
        if (pos != v.size()) throw std::invalid_argument(v);
        return x;
    } catch (const std::exception&) {
        throw ConfigError("key '" + key + "': cannot parse number '" + v + "'");
    }
}

int to_int(const std::string& key, const std::string& v) {
    const double x = to_double(key, v);
    if (x != std::floor(x)) throw ConfigError("key '" + key + "': expected integer, got '" + v + "'");
    return static_cast<int>(x);
}

}  // namespace

std::pair<SystemParams, EnvironmentParams> parse_config(const std::string& text) {
    SystemParams p;
    EnvironmentParams env = environment_preset("urban");
    bool in_env_table = false;

    std::istringstream in(text);
    std::string raw;
    int lineno = 0;
    while (std::getline(in, raw)) {
        ++lineno;
        std::string line = raw;
        if (auto h = line.find('#'); h != std::string::npos) line.erase(h);
        line = trim(line);
        if (line.empty()) continue;

        if (line.front() == '[') {
            if (line != "[environment]")
                throw ConfigError("line " + std::to_string(lineno) + ": unknown table " + line);
            in_env_table = true;
            continue;
        }
        auto eq = line.find('=');
        if (eq == std::string::npos)
            throw ConfigError("line " + std::to_string(lineno) + ": expected key = value");
        const std::string key = trim(line.substr(0, eq));
        const std::string val = trim(line.substr(eq + 1));

        if (in_env_table) {
            if (key == "name") env.name = val;
            else if (key == "b1") env.b1 = to_double(key, val);
            else if (key == "b2") env.b2 = to_double(key, val);
            else if (key == "xi_los") env.xi_los = to_double(key, val);
            else if (key == "xi_nlos") env.xi_nlos = to_double(key, val);
            else throw ConfigError("unknown environment key '" + key + "'");
            continue;
        }

        if (key == "environment") env = environment_preset(val);
        else if (key == "n_users") p.n_users = to_int(key, val);
        else if (key == "n_subcarriers") p.n_subcarriers = to_int(key, val);
        else if (key == "n_antennas") p.n_antennas = to_int(key, val);
        else if (key == "bandwidth_hz") p.bandwidth_hz = to_double(key, val);
        else if (key == "carrier_freq_hz") p.carrier_freq_hz = to_double(key, val);
        else if (key == "pathloss_exponent") p.pathloss_exponent = to_double(key, val);
        else if (key == "noise_psd_dbm_hz") p.noise_psd_dbm_hz = to_double(key, val);
        else if (key == "max_power_w") p.max_power_w = to_double(key, val);
        else if (key == "qos_rate_bps") p.qos_rate_bps = to_double(key, val);
        else if (key == "qos_rate_per_user") {
            p.qos_rate_per_user.clear();
            std::istringstream vs(val);
            std::string tok;
            while (std::getline(vs, tok, ',')) p.qos_rate_per_user.push_back(to_double(key, trim(tok)));
        }
        else if (key == "serve_fraction") p.serve_fraction = to_double(key, val);
        else if (key == "los_threshold") p.los_threshold = to_double(key, val);
        else if (key == "x_min") p.x_min = to_double(key, val);
        else if (key == "x_max") p.x_max = to_double(key, val);
        else if (key == "y_min") p.y_min = to_double(key, val);
        else if (key == "y_max") p.y_max = to_double(key, val);
        else if (key == "h_min") p.h_min = to_double(key, val);
        else if (key == "h_max") p.h_max = to_double(key, val);
        else if (key == "min_separation_m") p.min_separation_m = to_double(key, val);
        else if (key == "c_min") p.c_min = (val == "auto") ? 1 : to_int(key, val);
        else if (key == "c_max") p.c_max_override = (val == "auto") ? 0 : to_int(key, val);
        else if (key == "inventory") p.inventory = to_int(key, val);
        else if (key == "penalty_weight") p.penalty_weight = to_double(key, val);
        else if (key == "qos_weight") p.qos_weight = to_double(key, val);
        else if (key == "tol_pathloss") p.tol_pathloss = to_double(key, val);
        else if (key == "tol_rate") p.tol_rate = to_double(key, val);
        else if (key == "solver_tol") p.solver_tol = to_double(key, val);
        else if (key == "max_iter_placement") p.max_iter_placement = to_int(key, val);
        else if (key == "max_iter_allocation") p.max_iter_allocation = to_int(key, val);
        else if (key == "lambda_draws") p.lambda_draws = to_int(key, val);
        else if (key == "mean_shift_bandwidth") p.mean_shift_bandwidth = to_double(key, val);
        else if (key == "seed") p.rng_seed = static_cast<std::uint64_t>(to_double(key, val));
        else if (key == "bandwidth_mode") {
            if (val == "per_subcarrier_total_div_k") p.bandwidth_mode = BandwidthMode::PerSubcarrierTotalDivK;
            else if (val == "literal_B") p.bandwidth_mode = BandwidthMode::LiteralB;
            else throw ConfigError("bandwidth_mode: unknown value '" + val + "'");
        }
        else if (key == "noise_mode") {
            if (val == "psd_times_bw") p.noise_mode = NoiseMode::PsdTimesBandwidth;
            else if (val == "literal_fc_sigma") p.noise_mode = NoiseMode::LiteralFcSigma;
            else throw ConfigError("noise_mode: unknown value '" + val + "'");
        }
        else if (key == "xi_scale") {
            if (val == "linear") p.xi_scale = XiScale::Linear;
            else if (val == "db") p.xi_scale = XiScale::Db;
            else throw ConfigError("xi_scale: unknown value '" + val + "'");
        }
        else if (key == "mrt_gain") {
            if (val == "norm4") p.mrt_gain = MrtGain::NormFourth;
            else if (val == "norm2") p.mrt_gain = MrtGain::NormSquared;
            else throw ConfigError("mrt_gain: unknown value '" + val + "'");
        }
        else throw ConfigError("unknown key '" + key + "'");
    }

    p.validate();
    env.validate();
    return {p, env};
}

std::pair<SystemParams, EnvironmentParams> load_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config file '" + path + "'");
    std::ostringstream ss;
    ss << in.rdbuf();
    return parse_config(ss.str());
}

std::string dump_config(const SystemParams& p, const EnvironmentParams& env) {
    std::ostringstream out;
    out.precision(17);
    out << "n_users = " << p.n_users << "\n"
        << "n_subcarriers = " << p.n_subcarriers << "\n"
        << "n_antennas = " << p.n_antennas << "\n"
        << "bandwidth_hz = " << p.bandwidth_hz << "\n"
        << "carrier_freq_hz = " << p.carrier_freq_hz << "\n"
        << "pathloss_exponent = " << p.pathloss_exponent << "\n"
        << "noise_psd_dbm_hz = " << p.noise_psd_dbm_hz << "\n"
        << "max_power_w = " << p.max_power_w << "\n"
        << "qos_rate_bps = " << p.qos_rate_bps << "\n";
    if (!p.qos_rate_per_user.empty()) {
        out << "qos_rate_per_user = ";
        for (std::size_t i = 0; i < p.qos_rate_per_user.size(); ++i)
            out << (i ? "," : "") << p.qos_rate_per_user[i];
        out << "\n";
    }
    out << "serve_fraction = " << p.serve_fraction << "\n"
        << "los_threshold = " << p.los_threshold << "\n"
        << "x_min = " << p.x_min << "\nx_max = " << p.x_max << "\n"
        << "y_min = " << p.y_min << "\ny_max = " << p.y_max << "\n"
        << "h_min = " << p.h_min << "\nh_max = " << p.h_max << "\n"
        << "min_separation_m = " << p.min_separation_m << "\n"
        << "c_min = " << p.c_min << "\n"
        << "c_max = " << (p.c_max_override ? std::to_string(p.c_max_override) : "auto") << "\n"
        << "inventory = " << p.inventory << "\n"
        << "penalty_weight = " << p.penalty_weight << "\n"
        << "qos_weight = " << p.qos_weight << "\n"
        << "tol_pathloss = " << p.tol_pathloss << "\n"
        << "tol_rate = " << p.tol_rate << "\n"
        << "solver_tol = " << p.solver_tol << "\n"
        << "max_iter_placement = " << p.max_iter_placement << "\n"
        << "max_iter_allocation = " << p.max_iter_allocation << "\n"
        << "lambda_draws = " << p.lambda_draws << "\n"
        << "mean_shift_bandwidth = " << p.mean_shift_bandwidth << "\n"
        << "seed = " << p.rng_seed << "\n"
        << "bandwidth_mode = "
        << (p.bandwidth_mode == BandwidthMode::LiteralB ? "literal_B" : "per_subcarrier_total_div_k") << "\n"
        << "noise_mode = "
        << (p.noise_mode == NoiseMode::LiteralFcSigma ? "literal_fc_sigma" : "psd_times_bw") << "\n"
        << "xi_scale = " << (p.xi_scale == XiScale::Db ? "db" : "linear") << "\n"
        << "mrt_gain = " << (p.mrt_gain == MrtGain::NormSquared ? "norm2" : "norm4") << "\n"
        << "[environment]\n"
        << "name = " << env.name << "\n"
        << "b1 = " << env.b1 << "\n"
        << "b2 = " << env.b2 << "\n"
        << "xi_los = " << env.xi_los << "\n"
        << "xi_nlos = " << env.xi_nlos << "\n";
    return out.str();
}

}  // namespace uavplan
