#include "uavplan/deployment.hpp"

#include <algorithm>
#include <cmath>
#include <nlohmann/json.hpp>

#include "clustering.hpp"

namespace uavplan {

namespace {

constexpr double kPi = 3.14159265358979323846;
constexpr double kDegToRad = kPi / 180.0;

double theta_phi_deg(double phi, const EnvironmentParams& env) {
    return std::min(inverse_los_probability(phi, env), 90.0);
}

// Cone slope: horizontal reach per unit altitude. +inf when the threshold
// angle is nonpositive (every elevation qualifies). The default comes from
// squaring the distance bound d <= h / sin(theta); the literal variant
// keeps the unsquared coefficient 1 - 1/sin(theta).
double cone_slope(double phi, const EnvironmentParams& env, bool literal_xi = false) {
    const double theta = theta_phi_deg(phi, env);
    if (theta <= 0.0) return std::numeric_limits<double>::infinity();
    const double s = std::sin(theta * kDegToRad);
    if (literal_xi) {
        const double coef = 1.0 / s - 1.0;
        return coef > 0.0 ? std::sqrt(coef) : 0.0;
    }
    return 1.0 / std::tan(theta * kDegToRad);
}

}  // namespace

std::vector<int> DeploymentPlan::cluster(int l) const {
    std::vector<int> members;
    for (int n = 0; n < static_cast<int>(serving_uav.size()); ++n)
        if (serving_uav[n] == l) members.push_back(n);
    return members;
}

double coverage_limit(double altitude, double phi, const EnvironmentParams& env) {
    const double theta = theta_phi_deg(phi, env);
    if (theta <= 0.0) return std::numeric_limits<double>::infinity();
    return altitude / std::sin(theta * kDegToRad);
}

AssignmentProblem build_association_problem(const Scenario& scenario,
                                            const std::vector<UavPosition>& uavs, double phi,
                                            int c_max) {
    const int n = scenario.params.n_users;
    const int l_count = static_cast<int>(uavs.size());
    AssignmentProblem pb;
    pb.n_users = n;
    pb.n_uavs = l_count;
    pb.cost.resize(static_cast<std::size_t>(n) * l_count);
    pb.allowed.resize(static_cast<std::size_t>(n) * l_count);
    pb.cap_lo.assign(l_count, scenario.params.c_min);
    pb.cap_hi.assign(l_count, c_max);
    pb.min_total = scenario.params.min_served();
    for (int i = 0; i < n; ++i)
        for (int l = 0; l < l_count; ++l) {
            const double d = distance_3d(uavs[l], scenario.user_positions[i]);
            pb.cost[static_cast<std::size_t>(i) * l_count + l] = d * d;
            pb.allowed[static_cast<std::size_t>(i) * l_count + l] =
                d <= coverage_limit(uavs[l].h, phi, scenario.environment);
        }
    return pb;
}

Lemma1Matrices build_lemma1_matrices(const std::vector<Point2>& cluster, double xi) {
    Lemma1Matrices m;
    const int q = static_cast<int>(cluster.size());
    m.h_o_diag = 2.0 * q;
    m.xi = xi;
    double sx = 0.0, sy = 0.0, s2 = 0.0;
    m.f_n.reserve(q);
    m.kappa_n.reserve(q);
    for (const auto& v : cluster) {
        sx += v.x;
        sy += v.y;
        s2 += v.x * v.x + v.y * v.y;
        m.f_n.emplace_back(-2.0 * v.x, -2.0 * v.y, 0.0);
        m.kappa_n.push_back(v.x * v.x + v.y * v.y);
    }
    m.f_o = Eigen::Vector3d(-2.0 * sx, -2.0 * sy, 0.0);
    m.kappa_o = s2;
    return m;
}

namespace {

// Strictly interior start for the placement program (km units). Moves the
// warm point inside the box and lifts or shifts it until every coverage
// cone holds with positive slack.
bool make_interior(Eigen::Vector3d& w, const std::vector<Point2>& cluster_km, double slope,
                   const SystemParams& p) {
    const double eps = 1e-9;
    const double xmin = p.x_min / 1000.0 + eps, xmax = p.x_max / 1000.0 - eps;
    const double ymin = p.y_min / 1000.0 + eps, ymax = p.y_max / 1000.0 - eps;
    const double hmin = p.h_min / 1000.0 + eps, hmax = p.h_max / 1000.0 - eps;
    w[0] = std::clamp(w[0], xmin, xmax);
    w[1] = std::clamp(w[1], ymin, ymax);
    w[2] = std::clamp(w[2], hmin, hmax);
    if (!std::isfinite(slope)) return true;

    for (int tries = 0; tries < 64; ++tries) {
        double worst = 0.0;
        int worst_n = -1;
        for (int i = 0; i < static_cast<int>(cluster_km.size()); ++i) {
            const double dx = w[0] - cluster_km[i].x, dy = w[1] - cluster_km[i].y;
            const double need = std::sqrt(dx * dx + dy * dy) / std::max(slope, 1e-12);
            if (need > worst) {
                worst = need;
                worst_n = i;
            }
        }
        if (worst * 1.0000001 < hmax) {
            w[2] = std::clamp(std::max(worst * 1.0000001 + 1e-9, hmin), hmin, hmax);
            double slack = 1.0;
            for (const auto& v : cluster_km) {
                const double dx = w[0] - v.x, dy = w[1] - v.y;
                slack = std::min(slack, slope * w[2] - std::sqrt(dx * dx + dy * dy));
            }
            if (slack > 0.0) return true;
        }
        if (worst_n < 0) return true;
        // Pull 10% toward the tightest user.
        w[0] = std::clamp(w[0] + 0.1 * (cluster_km[worst_n].x - w[0]), xmin, xmax);
        w[1] = std::clamp(w[1] + 0.1 * (cluster_km[worst_n].y - w[1]), ymin, ymax);
    }
    return false;
}

}  // namespace

PlacementResult solve_placement(const std::vector<Point2>& cluster, const SystemParams& params,
                                double phi, const EnvironmentParams& env,
                                const std::vector<UavPosition>& other_uavs,
                                const UavPosition& warm_start, bool literal_xi) {
    PlacementResult out;
    if (cluster.empty()) {
        out.message = "empty cluster";
        return out;
    }
    const double slope = cone_slope(phi, env, literal_xi);

    std::vector<Point2> cluster_km(cluster.size());
    for (std::size_t i = 0; i < cluster.size(); ++i)
        cluster_km[i] = {cluster[i].x / 1000.0, cluster[i].y / 1000.0};
    // Coverage enters as second-order cones below; the Lemma 1 form only
    // supplies the quadratic objective, so xi is irrelevant here.
    const Lemma1Matrices lem = build_lemma1_matrices(cluster_km, 0.0);

    ConvexProgram prog;
    prog.resize(4);  // x, y, h, epigraph t
    prog.objective << 0, 0, 0, 1;
    prog.lower[0] = params.x_min / 1000.0;
    prog.upper[0] = params.x_max / 1000.0;
    prog.lower[1] = params.y_min / 1000.0;
    prog.upper[1] = params.y_max / 1000.0;
    prog.lower[2] = params.h_min / 1000.0;
    prog.upper[2] = params.h_max / 1000.0;

    QuadConstraint epi;
    epi.q_upper = {{0, 0, lem.h_o_diag}, {1, 1, lem.h_o_diag}, {2, 2, lem.h_o_diag}};
    epi.linear.add(0, lem.f_o[0]);
    epi.linear.add(1, lem.f_o[1]);
    epi.linear.add(2, lem.f_o[2]);
    epi.linear.add(3, -1.0);
    epi.linear.constant = lem.kappa_o;
    prog.quads.push_back(epi);

    if (std::isfinite(slope)) {
        for (const auto& v : cluster_km) {
            SocConstraint cone;
            AffineExpr rx, ry;
            rx.add(0, 1.0);
            rx.constant = -v.x;
            ry.add(1, 1.0);
            ry.constant = -v.y;
            cone.rows = {rx, ry};
            cone.radius.add(2, slope);
            prog.socs.push_back(std::move(cone));
        }
    }

    const double d_o = params.min_separation_m / 1000.0;
    auto separation_gap = [&](const Eigen::Vector3d& w) {
        double worst = std::numeric_limits<double>::infinity();
        int worst_l = -1;
        for (int l = 0; l < static_cast<int>(other_uavs.size()); ++l) {
            const Eigen::Vector3d o(other_uavs[l].x / 1000.0, other_uavs[l].y / 1000.0,
                                    other_uavs[l].h / 1000.0);
            const double d = (w - o).norm();
            if (d < worst) {
                worst = d;
                worst_l = l;
            }
        }
        return std::make_pair(worst, worst_l);
    };

    Eigen::Vector3d w(warm_start.x / 1000.0, warm_start.y / 1000.0, warm_start.h / 1000.0);
    if (!make_interior(w, cluster_km, slope, params)) {
        out.message = "cluster spread exceeds the coverage cone at every altitude";
        return out;
    }

    BarrierOptions bopt;
    bopt.tol = 1e-8;
    auto run = [&](const Eigen::Vector3d& start) {
        prog.start.head<3>() = start;
        prog.start[3] =
            lem.objective_at(start) * 1.1 + 1e-6;  // strict epigraph slack
        return solve_convex(prog, bopt);
    };

    SolveReport rep = run(w);
    if (rep.status == SolveStatus::Infeasible) {
        out.message = rep.message;
        return out;
    }

    // Separation against the fixed neighbours: linearized half-space cuts.
    bool repaired = false;
    for (int round = 0; round < 3 && !other_uavs.empty(); ++round) {
        Eigen::Vector3d cur = rep.x.head<3>();
        auto [gap, who] = separation_gap(cur);
        if (who < 0 || gap >= d_o - 1e-9) break;
        const Eigen::Vector3d o(other_uavs[who].x / 1000.0, other_uavs[who].y / 1000.0,
                                other_uavs[who].h / 1000.0);
        Eigen::Vector3d dir = cur - o;
        if (dir.norm() < 1e-12) dir = Eigen::Vector3d(1e-6, 0, 1e-6);
        dir.normalize();
        AffineExpr cut;  // d_o - dir'(W - o) <= 0
        cut.add(0, -dir[0]);
        cut.add(1, -dir[1]);
        cut.add(2, -dir[2]);
        cut.constant = d_o + dir.dot(o);
        prog.affine_le.push_back(cut);

        Eigen::Vector3d pushed = o + dir * (d_o * 1.05);
        if (!make_interior(pushed, cluster_km, slope, params) ||
            d_o + dir.dot(o) - dir.dot(pushed) >= 0.0) {
            repaired = true;
            break;
        }
        rep = run(pushed);
        if (rep.status == SolveStatus::Infeasible) {
            repaired = true;
            break;
        }
    }

    Eigen::Vector3d final_w = rep.x.head<3>();
    if (!other_uavs.empty()) {
        auto [gap, who] = separation_gap(final_w);
        if (who >= 0 && gap < d_o - 1e-9) {
            // Push apart along the connecting segment, then restore the box
            // and cones as far as possible.
            const Eigen::Vector3d o(other_uavs[who].x / 1000.0, other_uavs[who].y / 1000.0,
                                    other_uavs[who].h / 1000.0);
            Eigen::Vector3d dir = final_w - o;
            if (dir.norm() < 1e-12) dir = Eigen::Vector3d(1, 0, 0);
            dir.normalize();
            final_w = o + dir * (d_o * (1.0 + 1e-9));
            make_interior(final_w, cluster_km, slope, params);
            repaired = true;
        }
        auto [gap2, who2] = separation_gap(final_w);
        out.separation_violated = who2 >= 0 && gap2 < d_o - 1e-6;
        (void)repaired;
    }

    out.feasible = true;
    out.position = {final_w[0] * 1000.0, final_w[1] * 1000.0, final_w[2] * 1000.0};
    out.objective = 0.0;
    for (const auto& v : cluster) {
        const double dx = out.position.x - v.x, dy = out.position.y - v.y;
        out.objective += dx * dx + dy * dy + out.position.h * out.position.h;
    }
    return out;
}

double average_pathloss(const Scenario& scenario, const std::vector<UavPosition>& uavs,
                        const std::vector<int>& serving_uav) {
    double total = 0.0;
    int count = 0;
    for (int n = 0; n < static_cast<int>(serving_uav.size()); ++n) {
        const int l = serving_uav[n];
        if (l < 0) continue;
        total += path_loss(uavs[l], scenario.user_positions[n], scenario.environment,
                           scenario.params);
        ++count;
    }
    return count ? total / count : 0.0;
}

namespace {

struct AssociationOutcome {
    bool ok = false;
    AssignmentResult assignment;
};

// Association with the escalation ladder applied in place: altitude lift,
// then phi relaxation in 0.05 steps down to 0.55.
AssociationOutcome associate_with_ladder(const Scenario& sc, std::vector<UavPosition>& uavs,
                                         double& phi, int c_max, int* phi_relaxations) {
    AssociationOutcome out;
    bool lifted = false;
    while (true) {
        AssignmentProblem pb = build_association_problem(sc, uavs, phi, c_max);
        out.assignment = solve_assignment(pb);
        if (out.assignment.feasible) {
            out.ok = true;
            return out;
        }
        if (!lifted) {
            for (auto& w : uavs) w.h = sc.params.h_max;
            lifted = true;
            continue;
        }
        if (phi - 0.05 >= 0.55 - 1e-9) {
            phi -= 0.05;
            if (phi_relaxations) ++(*phi_relaxations);
            continue;
        }
        return out;
    }
}

}  // namespace

DeploymentPlan run_algorithm1(const Scenario& scenario, int n_uavs, const SystemParams& params,
                              const Algorithm1Options& opt) {
    const int n = scenario.params.n_users;
    const int c_max_cfg = params.c_max_override > 0
                              ? params.c_max_override
                              : std::max(params.c_min,
                                         static_cast<int>(std::ceil(
                                             params.serve_fraction * n / std::max(1, n_uavs))));
    DeploymentPlan plan;
    plan.phi_effective = params.los_threshold;

    int l_count = std::max(1, n_uavs);
    const int l_cap = params.inventory > 0 ? params.inventory : n;

    std::vector<UavPosition> uavs;
    AssignmentResult assignment;
    double phi = params.los_threshold;

    for (int attempt = 0;; ++attempt) {
        phi = params.los_threshold;
        uavs.resize(l_count);
        if (attempt == 0) {
            Rng rng(scenario.params.rng_seed, 3);
            for (auto& w : uavs) {
                w.x = rng.uniform(params.x_min, params.x_max);
                w.y = rng.uniform(params.y_min, params.y_max);
                w.h = 0.5 * (params.h_min + params.h_max);
            }
        } else {
            // Fleet grew: warm restart from k-means centroids at max altitude
            // so coverage-driven growth terminates.
            auto km = detail::lloyd_kmeans(scenario.user_positions, l_count,
                                           scenario.params.rng_seed + attempt);
            for (int l = 0; l < l_count; ++l)
                uavs[l] = {km.centroids[l].x, km.centroids[l].y, params.h_max};
        }

        const int c_max = std::max(
            c_max_cfg, static_cast<int>(std::ceil(static_cast<double>(scenario.params.min_served()) /
                                                  l_count)));
        auto outcome = associate_with_ladder(scenario, uavs, phi, c_max, &plan.phi_relaxations);
        if (outcome.ok) {
            assignment = std::move(outcome.assignment);
            break;
        }
        if (l_count >= l_cap) {
            plan.n_uavs = l_count;
            plan.converged = false;
            plan.trace.clear();
            return plan;  // hard failure: caller inspects converged/empty association
        }
        ++l_count;
        ++plan.fleet_increments;
    }

    const int c_max = std::max(
        c_max_cfg,
        static_cast<int>(std::ceil(static_cast<double>(scenario.params.min_served()) / l_count)));

    std::vector<int> serving(n, -1);
    auto refresh_serving = [&](const AssignmentResult& as) {
        for (int i = 0; i < n; ++i) serving[i] = as.serving_uav(i);
    };
    refresh_serving(assignment);

    double prev_pl = average_pathloss(scenario, uavs, serving);
    plan.trace.push_back(prev_pl);
    bool converged = false;

    std::vector<UavPosition> best_uavs = uavs;
    AssignmentResult best_assignment = assignment;
    std::vector<int> best_serving = serving;

    for (int iter = 1; iter <= params.max_iter_placement; ++iter) {
        // Placement sweep with the current association.
        std::vector<UavPosition> next_uavs = uavs;
        bool any_sep_flag = false;
        for (int l = 0; l < l_count; ++l) {
            std::vector<Point2> cluster;
            for (int i = 0; i < n; ++i)
                if (serving[i] == l) cluster.push_back(scenario.user_positions[i]);
            if (cluster.empty()) continue;
            std::vector<UavPosition> others;
            for (int l2 = 0; l2 < l_count; ++l2)
                if (l2 != l) others.push_back(next_uavs[l2]);
            PlacementResult pr = solve_placement(cluster, params, phi, scenario.environment,
                                                 others, next_uavs[l], opt.literal_xi);
            if (!pr.feasible) continue;  // keep the previous position
            // Block descent: only adopt improving positions.
            double old_obj = 0.0;
            for (const auto& v : cluster) {
                const double dx = next_uavs[l].x - v.x, dy = next_uavs[l].y - v.y;
                old_obj += dx * dx + dy * dy + next_uavs[l].h * next_uavs[l].h;
            }
            if (pr.objective <= old_obj + 1e-9 * (1.0 + old_obj)) {
                next_uavs[l] = pr.position;
                any_sep_flag = any_sep_flag || pr.separation_violated;
            }
        }

        // Re-association at the new positions.
        double phi_iter = phi;
        auto outcome =
            associate_with_ladder(scenario, next_uavs, phi_iter, c_max, &plan.phi_relaxations);
        if (!outcome.ok) break;  // keep the previous accepted state
        phi = phi_iter;

        std::vector<int> next_serving(n, -1);
        for (int i = 0; i < n; ++i) next_serving[i] = outcome.assignment.serving_uav(i);
        const double pl = average_pathloss(scenario, next_uavs, next_serving);

        plan.iterations = iter;
        if (pl <= prev_pl) {
            uavs = next_uavs;
            assignment = std::move(outcome.assignment);
            serving = next_serving;
            plan.trace.push_back(pl);
            plan.separation_violated = plan.separation_violated || any_sep_flag;
            best_uavs = uavs;
            best_assignment = assignment;
            best_serving = serving;
            if (prev_pl - pl <= params.tol_pathloss * std::max(prev_pl, 1e-300)) {
                converged = true;
                prev_pl = pl;
                break;
            }
            prev_pl = pl;
        } else {
            // Improvement stalled; the previous iterate stands.
            converged = true;
            break;
        }
    }

    plan.uavs = best_uavs;
    plan.n_uavs = l_count;
    plan.association = best_assignment.j;
    plan.serving_uav = best_serving;
    plan.served_count.assign(l_count, 0);
    for (int i = 0; i < n; ++i)
        if (best_serving[i] >= 0) ++plan.served_count[best_serving[i]];
    plan.avg_pathloss = prev_pl;
    plan.phi_effective = phi;
    plan.converged = converged;
    return plan;
}

DeploymentPlan deploy_with_fixed_positions(const Scenario& scenario,
                                           const std::vector<UavPosition>& uav_positions,
                                           const SystemParams& params) {
    const int n = scenario.params.n_users;
    const int l_count = static_cast<int>(uav_positions.size());
    DeploymentPlan plan;
    plan.n_uavs = l_count;
    plan.uavs = uav_positions;
    const int c_max_cfg =
        params.c_max_override > 0
            ? params.c_max_override
            : std::max(params.c_min, static_cast<int>(std::ceil(params.serve_fraction * n /
                                                                std::max(1, l_count))));
    const int c_max = std::max(
        c_max_cfg,
        static_cast<int>(std::ceil(static_cast<double>(scenario.params.min_served()) / l_count)));
    double phi = params.los_threshold;
    auto outcome = associate_with_ladder(scenario, plan.uavs, phi, c_max, &plan.phi_relaxations);
    plan.phi_effective = phi;
    if (!outcome.ok) {
        plan.converged = false;
        return plan;
    }
    plan.association = outcome.assignment.j;
    plan.serving_uav.assign(n, -1);
    for (int i = 0; i < n; ++i) plan.serving_uav[i] = outcome.assignment.serving_uav(i);
    plan.served_count.assign(l_count, 0);
    for (int i = 0; i < n; ++i)
        if (plan.serving_uav[i] >= 0) ++plan.served_count[plan.serving_uav[i]];
    plan.avg_pathloss = average_pathloss(scenario, plan.uavs, plan.serving_uav);
    plan.trace = {plan.avg_pathloss};
    plan.iterations = 1;
    plan.converged = true;
    for (int a = 0; a < l_count && !plan.separation_violated; ++a)
        for (int b = a + 1; b < l_count; ++b) {
            const double dx = plan.uavs[a].x - plan.uavs[b].x;
            const double dy = plan.uavs[a].y - plan.uavs[b].y;
            const double dh = plan.uavs[a].h - plan.uavs[b].h;
            if (std::sqrt(dx * dx + dy * dy + dh * dh) < params.min_separation_m - 1e-6) {
                plan.separation_violated = true;
                break;
            }
        }
    return plan;
}

std::string DeploymentPlan::to_json() const {
    nlohmann::json j;
    auto& pos = j["uavs"] = nlohmann::json::array();
    for (const auto& w : uavs) pos.push_back({w.x, w.y, w.h});
    auto& assoc = j["association"] = nlohmann::json::array();
    for (int n = 0; n < static_cast<int>(serving_uav.size()); ++n)
        if (serving_uav[n] >= 0) assoc.push_back({n, serving_uav[n]});
    j["avg_pathloss"] = avg_pathloss;
    j["trace"] = trace;
    j["phi_effective"] = phi_effective;
    j["phi_relaxations"] = phi_relaxations;
    j["fleet_increments"] = fleet_increments;
    j["separation_violated"] = separation_violated;
    j["iterations"] = iterations;
    j["converged"] = converged;
    return j.dump(2);
}

}  // namespace uavplan
