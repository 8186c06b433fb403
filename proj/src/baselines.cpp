#include "uavplan/baselines.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <stdexcept>

#include "clustering.hpp"

namespace uavplan {

namespace {

constexpr double kDegToRad = 3.14159265358979323846 / 180.0;

double dist2(const Point2& a, const Point2& b) {
    const double dx = a.x - b.x, dy = a.y - b.y;
    return dx * dx + dy * dy;
}

// Minimum altitude whose coverage cone at phi holds the whole cluster.
double cluster_altitude(const std::vector<Point2>& users, const std::vector<int>& labels,
                        int cluster, const Point2& center, double phi, const Scenario& sc) {
    const double theta = std::min(inverse_los_probability(phi, sc.environment), 90.0);
    double h = sc.params.h_min;
    if (theta > 0.0) {
        double dmax = 0.0;
        for (std::size_t i = 0; i < users.size(); ++i)
            if (labels[i] == cluster) dmax = std::max(dmax, std::sqrt(dist2(users[i], center)));
        h = std::max(h, dmax * std::tan(theta * kDegToRad));
    }
    return std::clamp(h, sc.params.h_min, sc.params.h_max);
}

std::vector<UavPosition> lift_centroids(const Scenario& sc, const std::vector<Point2>& centers,
                                        const std::vector<int>& labels) {
    std::vector<UavPosition> uavs(centers.size());
    for (std::size_t c = 0; c < centers.size(); ++c) {
        const double h = cluster_altitude(sc.user_positions, labels, static_cast<int>(c),
                                          centers[c], sc.params.los_threshold, sc);
        uavs[c] = {centers[c].x, centers[c].y, h};
    }
    return uavs;
}

}  // namespace

Scheme scheme_from_string(const std::string& tag) {
    if (tag == "proposed") return Scheme::Proposed;
    if (tag == "kmeans") return Scheme::Kmeans;
    if (tag == "kmedoid") return Scheme::Kmedoid;
    if (tag == "meanshift") return Scheme::Meanshift;
    if (tag == "random_deployment") return Scheme::RandomDeployment;
    if (tag == "random_association") return Scheme::RandomAssociation;
    if (tag == "equal_power") return Scheme::EqualPower;
    if (tag == "random_power") return Scheme::RandomPower;
    if (tag == "random_subcarrier") return Scheme::RandomSubcarrier;
    if (tag == "vtc_sizing") return Scheme::VtcSizing;
    throw std::invalid_argument("unknown scheme '" + tag + "'");
}

std::string scheme_name(Scheme s) {
    switch (s) {
        case Scheme::Proposed: return "proposed";
        case Scheme::Kmeans: return "kmeans";
        case Scheme::Kmedoid: return "kmedoid";
        case Scheme::Meanshift: return "meanshift";
        case Scheme::RandomDeployment: return "random_deployment";
        case Scheme::RandomAssociation: return "random_association";
        case Scheme::EqualPower: return "equal_power";
        case Scheme::RandomPower: return "random_power";
        case Scheme::RandomSubcarrier: return "random_subcarrier";
        case Scheme::VtcSizing: return "vtc_sizing";
    }
    return "?";
}

std::vector<UavPosition> kmeans_placement(const Scenario& scenario, int n_uavs,
                                          std::uint64_t seed) {
    auto km = detail::lloyd_kmeans(scenario.user_positions, n_uavs, seed);
    return lift_centroids(scenario, km.centroids, km.labels);
}

std::vector<UavPosition> kmedoid_placement(const Scenario& scenario, int n_uavs,
                                           std::uint64_t seed) {
    const auto& pts = scenario.user_positions;
    const int n = static_cast<int>(pts.size());
    auto km = detail::lloyd_kmeans(pts, n_uavs, seed);

    // Snap centroids to the nearest user, then PAM swap descent.
    std::vector<int> medoids(n_uavs);
    for (int c = 0; c < n_uavs; ++c) {
        int best = 0;
        double bd = std::numeric_limits<double>::infinity();
        for (int i = 0; i < n; ++i) {
            const double d = dist2(pts[i], km.centroids[c]);
            if (d < bd) {
                bd = d;
                best = i;
            }
        }
        medoids[c] = best;
    }
    auto total_cost = [&](const std::vector<int>& med) {
        double tot = 0.0;
        for (int i = 0; i < n; ++i) {
            double bd = std::numeric_limits<double>::infinity();
            for (int m : med) bd = std::min(bd, dist2(pts[i], pts[m]));
            tot += bd;
        }
        return tot;
    };
    double cost = total_cost(medoids);
    bool improved = true;
    int sweeps = 0;
    while (improved && sweeps++ < 50) {
        improved = false;
        for (int c = 0; c < n_uavs; ++c)
            for (int i = 0; i < n; ++i) {
                if (std::find(medoids.begin(), medoids.end(), i) != medoids.end()) continue;
                std::vector<int> cand = medoids;
                cand[c] = i;
                const double cc = total_cost(cand);
                if (cc + 1e-12 < cost) {
                    cost = cc;
                    medoids = cand;
                    improved = true;
                }
            }
    }
    std::vector<int> labels(n);
    for (int i = 0; i < n; ++i) {
        int best = 0;
        double bd = std::numeric_limits<double>::infinity();
        for (int c = 0; c < n_uavs; ++c) {
            const double d = dist2(pts[i], pts[medoids[c]]);
            if (d < bd) {
                bd = d;
                best = c;
            }
        }
        labels[i] = best;
    }
    std::vector<Point2> centers(n_uavs);
    for (int c = 0; c < n_uavs; ++c) centers[c] = pts[medoids[c]];
    return lift_centroids(scenario, centers, labels);
}

std::vector<UavPosition> meanshift_placement(const Scenario& scenario, int n_uavs,
                                             double bandwidth, std::uint64_t seed) {
    const auto& pts = scenario.user_positions;
    const int n = static_cast<int>(pts.size());
    if (bandwidth <= 0.0)
        bandwidth = (scenario.params.x_max - scenario.params.x_min) / 4.0;

    // Flat-kernel shifts from every user until stationary.
    std::vector<Point2> modes(pts);
    for (int it = 0; it < 200; ++it) {
        double shift = 0.0;
        for (int i = 0; i < n; ++i) {
            double sx = 0.0, sy = 0.0;
            int cnt = 0;
            for (int j = 0; j < n; ++j)
                if (dist2(modes[i], pts[j]) <= bandwidth * bandwidth) {
                    sx += pts[j].x;
                    sy += pts[j].y;
                    ++cnt;
                }
            if (cnt == 0) continue;
            Point2 next{sx / cnt, sy / cnt};
            shift = std::max(shift, std::sqrt(dist2(next, modes[i])));
            modes[i] = next;
        }
        if (shift <= 1e-6) break;
    }
    // Merge modes within bandwidth/2.
    std::vector<Point2> merged;
    std::vector<int> population;
    std::vector<int> mode_of(n, -1);
    for (int i = 0; i < n; ++i) {
        int hit = -1;
        for (std::size_t m = 0; m < merged.size(); ++m)
            if (dist2(modes[i], merged[m]) <= (bandwidth / 2.0) * (bandwidth / 2.0)) {
                hit = static_cast<int>(m);
                break;
            }
        if (hit < 0) {
            merged.push_back(modes[i]);
            population.push_back(1);
            mode_of[i] = static_cast<int>(merged.size()) - 1;
        } else {
            ++population[hit];
            mode_of[i] = hit;
        }
    }
    // Keep the most populated modes; pad by splitting the largest cluster.
    std::vector<int> order(merged.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = static_cast<int>(i);
    std::stable_sort(order.begin(), order.end(),
                     [&](int a, int b) { return population[a] > population[b]; });
    std::vector<Point2> centers;
    for (int i = 0; i < std::min<int>(n_uavs, static_cast<int>(order.size())); ++i)
        centers.push_back(merged[order[i]]);
    Rng rng(seed, 23);
    while (static_cast<int>(centers.size()) < n_uavs) {
        // Split the most populated mode by running 2-means on its members.
        const int big = order.empty() ? 0 : order[0];
        std::vector<Point2> members;
        for (int i = 0; i < n; ++i)
            if (mode_of[i] == big) members.push_back(pts[i]);
        if (members.size() < 2) {
            centers.push_back({rng.uniform(scenario.params.x_min, scenario.params.x_max),
                               rng.uniform(scenario.params.y_min, scenario.params.y_max)});
            continue;
        }
        auto two = detail::lloyd_kmeans(members, 2, seed + centers.size());
        centers.push_back(two.centroids[1]);
    }
    // Label users by nearest kept center for the altitude rule.
    std::vector<int> labels(n);
    for (int i = 0; i < n; ++i) {
        int best = 0;
        double bd = std::numeric_limits<double>::infinity();
        for (std::size_t c = 0; c < centers.size(); ++c) {
            const double d = dist2(pts[i], centers[c]);
            if (d < bd) {
                bd = d;
                best = static_cast<int>(c);
            }
        }
        labels[i] = best;
    }
    return lift_centroids(scenario, centers, labels);
}

std::vector<UavPosition> random_deployment(const Scenario& scenario, int n_uavs,
                                           std::uint64_t seed) {
    Rng rng(seed, 29);
    std::vector<UavPosition> uavs(n_uavs);
    for (auto& w : uavs) {
        w.x = rng.uniform(scenario.params.x_min, scenario.params.x_max);
        w.y = rng.uniform(scenario.params.y_min, scenario.params.y_max);
        w.h = 0.5 * (scenario.params.h_min + scenario.params.h_max);
    }
    return uavs;
}

DeploymentPlan random_association(const Scenario& scenario,
                                  const std::vector<UavPosition>& uavs,
                                  const SystemParams& params, std::uint64_t seed) {
    const int n = scenario.params.n_users;
    const int l_count = static_cast<int>(uavs.size());
    const int c_max =
        params.c_max_override > 0
            ? std::max(params.c_max_override,
                       static_cast<int>(std::ceil(static_cast<double>(params.min_served()) /
                                                  std::max(1, l_count))))
            : std::max({params.c_min,
                        static_cast<int>(std::ceil(params.serve_fraction * n /
                                                   std::max(1, l_count))),
                        static_cast<int>(std::ceil(static_cast<double>(params.min_served()) /
                                                   std::max(1, l_count)))});

    DeploymentPlan plan;
    plan.n_uavs = l_count;
    plan.uavs = uavs;
    plan.serving_uav.assign(n, -1);
    plan.association.assign(static_cast<std::size_t>(n) * l_count, 0);
    plan.served_count.assign(l_count, 0);

    double phi = params.los_threshold;
    Rng rng(seed, 31);
    while (true) {
        // Projection onto the feasible set: shuffled users draw among
        // allowed UAVs with remaining capacity.
        std::vector<int> order(n);
        for (int i = 0; i < n; ++i) order[i] = i;
        for (int i = n - 1; i > 0; --i) std::swap(order[i], order[rng.below(i + 1)]);
        std::vector<int> load(l_count, 0);
        std::vector<int> serving(n, -1);
        for (int u : order) {
            std::vector<int> options;
            for (int l = 0; l < l_count; ++l) {
                if (load[l] >= c_max) continue;
                const double d = distance_3d(uavs[l], scenario.user_positions[u]);
                if (d <= coverage_limit(uavs[l].h, phi, scenario.environment))
                    options.push_back(l);
            }
            if (options.empty()) continue;
            const int pick = options[rng.below(options.size())];
            serving[u] = pick;
            ++load[pick];
        }
        int total = 0;
        for (int u = 0; u < n; ++u)
            if (serving[u] >= 0) ++total;
        if (total >= params.min_served()) {
            for (int u = 0; u < n; ++u) {
                plan.serving_uav[u] = serving[u];
                if (serving[u] >= 0) {
                    plan.association[static_cast<std::size_t>(u) * l_count + serving[u]] = 1;
                    ++plan.served_count[serving[u]];
                }
            }
            plan.phi_effective = phi;
            plan.avg_pathloss = average_pathloss(scenario, plan.uavs, plan.serving_uav);
            plan.trace = {plan.avg_pathloss};
            plan.converged = true;
            plan.iterations = 1;
            return plan;
        }
        if (phi - 0.05 >= 0.55 - 1e-9) {
            phi -= 0.05;
            ++plan.phi_relaxations;
            continue;
        }
        plan.converged = false;  // quota unreachable even at the floor
        return plan;
    }
}

std::vector<double> random_power_weights(int n_subcarriers, int n_uavs, std::uint64_t seed) {
    Rng rng(seed, 37);
    std::vector<double> w(static_cast<std::size_t>(n_subcarriers) * n_uavs);
    for (int l = 0; l < n_uavs; ++l) {
        double sum = 0.0;
        for (int k = 0; k < n_subcarriers; ++k) {
            const double v = -std::log(std::max(rng.uniform01(), 1e-300));
            w[static_cast<std::size_t>(k) * n_uavs + l] = v;
            sum += v;
        }
        for (int k = 0; k < n_subcarriers; ++k)
            w[static_cast<std::size_t>(k) * n_uavs + l] /= sum;  // simplex projection
    }
    return w;
}

std::vector<double> random_subcarrier_assignment(const Scenario& scenario,
                                                 const DeploymentPlan& plan,
                                                 std::uint64_t seed) {
    const int n = scenario.params.n_users;
    const int k_count = scenario.params.n_subcarriers;
    const int l_count = plan.n_uavs;
    std::vector<double> a(static_cast<std::size_t>(n) * k_count * l_count, 0.0);
    Rng rng(seed, 41);
    for (int l = 0; l < l_count; ++l) {
        std::vector<int> members;
        for (int u = 0; u < n; ++u)
            if (plan.serving_uav[u] == l) members.push_back(u);
        if (members.empty()) continue;
        // Every member gets at least one subcarrier when K allows;
        // leftovers are drawn uniformly. No collisions by construction.
        std::vector<int> ks(k_count);
        for (int k = 0; k < k_count; ++k) ks[k] = k;
        for (int k = k_count - 1; k > 0; --k) std::swap(ks[k], ks[rng.below(k + 1)]);
        for (int k = 0; k < k_count; ++k) {
            const int user = (k < static_cast<int>(members.size()))
                                 ? members[k]
                                 : members[rng.below(members.size())];
            a[(static_cast<std::size_t>(user) * k_count + ks[k]) * l_count + l] = 1.0;
        }
    }
    return a;
}

}  // namespace uavplan
