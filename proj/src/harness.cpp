#include "uavplan/harness.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <sstream>
#include <stdexcept>

#include "uavplan/kernels.hpp"

namespace uavplan {

namespace {

double now_minus(const std::chrono::steady_clock::time_point& t0) {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

std::string join_pairs(const std::vector<std::pair<double, double>>& v) {
    std::ostringstream out;
    out.precision(10);
    for (std::size_t i = 0; i < v.size(); ++i)
        out << (i ? ";" : "") << v[i].first << ":" << v[i].second;
    return out.str();
}

std::string join_list(const std::vector<double>& v) {
    std::ostringstream out;
    out.precision(10);
    for (std::size_t i = 0; i < v.size(); ++i) out << (i ? ";" : "") << v[i];
    return out.str();
}

}  // namespace

std::vector<std::pair<double, double>> outage_curve(const std::vector<double>& rates_bps,
                                                    double bandwidth_hz,
                                                    const std::vector<double>& thresholds) {
    if (rates_bps.empty()) throw std::invalid_argument("outage curve needs at least one rate");
    std::vector<std::pair<double, double>> curve;
    curve.reserve(thresholds.size());
    for (double th : thresholds) {
        int below = 0;
        for (double r : rates_bps)
            if (r / bandwidth_hz < th) ++below;
        curve.emplace_back(th, static_cast<double>(below) / rates_bps.size());
    }
    return curve;
}

PipelineResult run_pipeline(const SystemParams& params, const EnvironmentParams& env,
                            Scheme scheme, std::uint64_t seed, const PipelineOptions& opt) {
    PipelineResult res;
    MetricsRow& row = res.row;
    row.seed = seed;
    row.scheme = scheme_name(scheme);
    row.n_users = params.n_users;
    row.phi = params.los_threshold;
    row.environment = env.name;
    row.status = "ok";

    try {
        Scenario scenario = generate_scenario(params, env, seed);

        // Fleet sizing.
        FleetPlan fleet;
        if (scheme == Scheme::VtcSizing) {
            fleet = compute_capacity(params, env, seed);
            fleet.n_uavs = compute_num_uavs_vtc(params);
            fleet.method = "vtc_baseline";
        } else {
            fleet = plan_fleet(params, env, seed);
        }
        row.l_planned = fleet.n_uavs;

        SystemParams run_params = params;
        if (params.c_max_override == 0) run_params.c_max_override = fleet.c_max;

        // Deployment stage.
        const auto t1 = std::chrono::steady_clock::now();
        DeploymentPlan plan;
        switch (scheme) {
            case Scheme::Kmeans:
                plan = deploy_with_fixed_positions(
                    scenario, kmeans_placement(scenario, fleet.n_uavs, seed), run_params);
                break;
            case Scheme::Kmedoid:
                plan = deploy_with_fixed_positions(
                    scenario, kmedoid_placement(scenario, fleet.n_uavs, seed), run_params);
                break;
            case Scheme::Meanshift:
                plan = deploy_with_fixed_positions(
                    scenario,
                    meanshift_placement(scenario, fleet.n_uavs, params.mean_shift_bandwidth, seed),
                    run_params);
                break;
            case Scheme::RandomDeployment:
                plan = deploy_with_fixed_positions(
                    scenario, random_deployment(scenario, fleet.n_uavs, seed), run_params);
                break;
            case Scheme::RandomAssociation: {
                DeploymentPlan optimal = run_algorithm1(scenario, fleet.n_uavs, run_params);
                if (!optimal.converged || optimal.association.empty())
                    throw std::runtime_error("deployment failed");
                plan = random_association(scenario, optimal.uavs, run_params, seed);
                break;
            }
            default:
                plan = run_algorithm1(scenario, fleet.n_uavs, run_params);
                break;
        }
        row.alg1_time_s = now_minus(t1);
        row.alg1_iterations = plan.iterations;
        if (!plan.converged || plan.association.empty()) {
            row.failed = true;
            row.status = "deployment_infeasible";
            return res;
        }
        res.alg1_trace = plan.trace;
        row.l_final = plan.n_uavs;
        row.avg_pathloss = plan.avg_pathloss;
        int served = 0;
        for (int v : plan.serving_uav)
            if (v >= 0) ++served;
        row.served_fraction = static_cast<double>(served) / params.n_users;

        res.plan = plan;
        if (!opt.run_allocation) return res;

        // Resource allocation stage.
        const auto t2 = std::chrono::steady_clock::now();
        GainTensor gains = gain_tensor(scenario, plan.uavs);
        Algorithm2Options a2;
        switch (scheme) {
            case Scheme::EqualPower:
                a2.power_mode = PowerMode::EqualPower;
                break;
            case Scheme::RandomPower:
                a2.power_mode = PowerMode::RandomPower;
                a2.power_weights = random_power_weights(params.n_subcarriers, plan.n_uavs, seed);
                break;
            case Scheme::RandomSubcarrier:
                a2.power_mode = PowerMode::FixedAssign;
                a2.fixed_assign = random_subcarrier_assignment(scenario, plan, seed);
                break;
            default:
                break;
        }
        auto [relaxed, sca] = run_algorithm2(scenario, plan, run_params, a2);
        res.sca = sca;
        row.alg2_iterations = sca.iterations;
        if (!sca.message.empty() && !sca.converged && sca.objective_history.empty()) {
            row.failed = true;
            row.status = "allocation_failed: " + sca.message;
            return res;
        }

        RadioAllocation final_alloc =
            (a2.power_mode == PowerMode::FixedAssign)
                ? relaxed  // assignment was already binary
                : round_and_repair(relaxed, scenario, plan, gains);
        row.alg2_time_s = now_minus(t2);

        const auto rates = allocation_rates(final_alloc, scenario, plan, gains);
        row.sum_rate_bps = 0.0;
        for (double r : rates) row.sum_rate_bps += r;
        row.per_uav_rate_bps.assign(plan.n_uavs, 0.0);
        for (int n = 0; n < params.n_users; ++n)
            if (plan.serving_uav[n] >= 0) row.per_uav_rate_bps[plan.serving_uav[n]] += rates[n];
        for (double s : final_alloc.qos_shortfall_bps) row.qos_shortfall_bps += s;

        std::vector<double> served_rates;
        for (int n = 0; n < params.n_users; ++n)
            if (plan.serving_uav[n] >= 0) served_rates.push_back(rates[n]);
        if (!served_rates.empty())
            row.outage_curve =
                outage_curve(served_rates, params.bandwidth_hz, opt.outage_thresholds);

        row.feasible = feasibility_check(final_alloc, plan, scenario, gains).all_pass() &&
                       final_alloc.qos_feasible;
        if (!final_alloc.qos_feasible) row.status = "qos_shortfall";
        res.allocation = std::move(final_alloc);
    } catch (const std::exception& e) {
        row.failed = true;
        row.status = e.what();
    }
    return res;
}

SweepAxis sweep_axis_from_string(const std::string& name) {
    if (name == "N" || name == "n_users") return SweepAxis::Users;
    if (name == "phi") return SweepAxis::Phi;
    if (name == "environment") return SweepAxis::Environment;
    if (name == "scheme") return SweepAxis::SchemeAxis;
    throw std::invalid_argument("unknown sweep axis '" + name + "'");
}

MetricsReport sweep(const SystemParams& params, const EnvironmentParams& env, Scheme scheme,
                    SweepAxis axis, const std::vector<std::string>& values,
                    const std::vector<std::uint64_t>& seeds, const PipelineOptions& opt) {
    struct Cell {
        SystemParams p;
        EnvironmentParams e;
        Scheme s;
        std::uint64_t seed;
    };
    std::vector<Cell> cells;
    for (const auto& value : values) {
        SystemParams p = params;
        EnvironmentParams e = env;
        Scheme s = scheme;
        switch (axis) {
            case SweepAxis::Users: p.n_users = std::stoi(value); break;
            case SweepAxis::Phi: p.los_threshold = std::stod(value); break;
            case SweepAxis::Environment: e = environment_preset(value); break;
            case SweepAxis::SchemeAxis: s = scheme_from_string(value); break;
        }
        p.validate();
        for (auto seed : seeds) cells.push_back({p, e, s, seed});
    }

    MetricsReport report;
    report.rows.resize(cells.size());
#pragma omp parallel for schedule(dynamic)
    for (long long i = 0; i < static_cast<long long>(cells.size()); ++i) {
        const auto& cell = cells[i];
        report.rows[i] = run_pipeline(cell.p, cell.e, cell.s, cell.seed, opt).row;
    }
    return report;
}

std::string MetricsReport::to_csv() const {
    std::ostringstream out;
    out.precision(12);
    out << "seed,scheme,N,phi,environment,L_planned,L,avg_pathloss_db,sum_rate_bps,"
           "per_uav_rate_bps,served_fraction,qos_shortfall_bps,outage_curve,"
           "alg1_iterations,alg2_iterations,alg1_time_s,alg2_time_s,feasible,failed,status\n";
    for (const auto& r : rows) {
        out << r.seed << ',' << r.scheme << ',' << r.n_users << ',' << r.phi << ','
            << r.environment << ',' << r.l_planned << ',' << r.l_final << ','
            << (r.avg_pathloss > 0 ? 10.0 * std::log10(r.avg_pathloss) : 0.0) << ','
            << r.sum_rate_bps << ',' << join_list(r.per_uav_rate_bps) << ','
            << r.served_fraction << ',' << r.qos_shortfall_bps << ','
            << join_pairs(r.outage_curve) << ',' << r.alg1_iterations << ','
            << r.alg2_iterations << ',' << r.alg1_time_s << ',' << r.alg2_time_s << ','
            << (r.feasible ? 1 : 0) << ',' << (r.failed ? 1 : 0) << ',' << r.status << '\n';
    }
    return out.str();
}

MetricsReport MetricsReport::from_csv(const std::string& text) {
    MetricsReport rep;
    std::istringstream in(text);
    std::string line;
    std::getline(in, line);  // header
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        std::vector<std::string> f;
        std::string tok;
        std::istringstream ls(line);
        while (std::getline(ls, tok, ',')) f.push_back(tok);
        if (f.size() < 20) continue;
        MetricsRow r;
        r.seed = std::stoull(f[0]);
        r.scheme = f[1];
        r.n_users = std::stoi(f[2]);
        r.phi = std::stod(f[3]);
        r.environment = f[4];
        r.l_planned = std::stoi(f[5]);
        r.l_final = std::stoi(f[6]);
        const double db = std::stod(f[7]);
        r.avg_pathloss = db != 0.0 ? std::pow(10.0, db / 10.0) : 0.0;
        r.sum_rate_bps = std::stod(f[8]);
        if (!f[9].empty()) {
            std::istringstream ps(f[9]);
            std::string p;
            while (std::getline(ps, p, ';')) r.per_uav_rate_bps.push_back(std::stod(p));
        }
        r.served_fraction = std::stod(f[10]);
        r.qos_shortfall_bps = std::stod(f[11]);
        if (!f[12].empty()) {
            std::istringstream ps(f[12]);
            std::string p;
            while (std::getline(ps, p, ';')) {
                const auto colon = p.find(':');
                r.outage_curve.emplace_back(std::stod(p.substr(0, colon)),
                                            std::stod(p.substr(colon + 1)));
            }
        }
        r.alg1_iterations = std::stoi(f[13]);
        r.alg2_iterations = std::stoi(f[14]);
        r.alg1_time_s = std::stod(f[15]);
        r.alg2_time_s = std::stod(f[16]);
        r.feasible = f[17] == "1";
        r.failed = f[18] == "1";
        r.status = f[19];
        rep.rows.push_back(std::move(r));
    }
    return rep;
}

namespace {
CellStats aggregate(const MetricsReport& report, const std::string& scheme, bool pathloss) {
    CellStats st;
    std::vector<double> vals;
    for (const auto& r : report.rows) {
        if (r.scheme != scheme) continue;
        if (r.failed) {
            ++st.failures;
            continue;
        }
        vals.push_back(pathloss ? r.avg_pathloss : r.sum_rate_bps);
    }
    st.count = static_cast<int>(vals.size());
    if (vals.empty()) return st;
    for (double v : vals) st.mean += v;
    st.mean /= vals.size();
    double var = 0.0;
    for (double v : vals) var += (v - st.mean) * (v - st.mean);
    if (vals.size() > 1) st.stderr_ = std::sqrt(var / (vals.size() - 1) / vals.size());
    return st;
}
}  // namespace

CellStats aggregate_sum_rate(const MetricsReport& report, const std::string& scheme) {
    return aggregate(report, scheme, false);
}
CellStats aggregate_pathloss(const MetricsReport& report, const std::string& scheme) {
    return aggregate(report, scheme, true);
}

}  // namespace uavplan
