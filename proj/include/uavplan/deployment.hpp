#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "uavplan/assignment.hpp"
#include "uavplan/channel.hpp"
#include "uavplan/convex.hpp"
#include "uavplan/scenario.hpp"

namespace uavplan {

/// Outcome of the alternating association / placement loop.
struct DeploymentPlan {
    std::vector<UavPosition> uavs;
    std::vector<char> association;  // N x L binary, row-major
    std::vector<int> serving_uav;   // -1 for unserved users
    std::vector<int> served_count;  // per UAV
    double avg_pathloss = 0.0;      // linear, mean over served links
    std::vector<double> trace;      // avg path loss per outer iteration
    double phi_effective = 0.0;     // LoS threshold after escalation
    int n_uavs = 0;
    int phi_relaxations = 0;
    int fleet_increments = 0;
    bool separation_violated = false;  // post-repair pairwise distance short
    int iterations = 0;
    bool converged = false;

    bool assigned(int n, int l) const {
        return association[static_cast<std::size_t>(n) * n_uavs + l];
    }
    std::vector<int> cluster(int l) const;
    std::string to_json() const;
};

/// Max 3D link distance keeping the LoS probability at or above phi.
double coverage_limit(double altitude, double phi, const EnvironmentParams& env);

/// Association instance for fixed UAV positions: squared 3D distances,
/// coverage mask from each UAV's cone, capacity bounds from params.
AssignmentProblem build_association_problem(const Scenario& scenario,
                                            const std::vector<UavPosition>& uavs, double phi,
                                            int c_max);

/// Quadratic-form data of the per-cluster placement problem.
struct Lemma1Matrices {
    double h_o_diag = 0.0;             // H_o = h_o_diag * I3 (= 2 Q^l)
    Eigen::Vector3d f_o;               // objective linear term
    double kappa_o = 0.0;              // objective constant
    std::vector<Eigen::Vector3d> f_n;  // per-user constraint linear terms
    std::vector<double> kappa_n;
    double xi = 0.0;                   // altitude coefficient in H_n = diag(2,2,xi)

    double objective_at(const Eigen::Vector3d& w) const {
        return 0.5 * h_o_diag * w.squaredNorm() + f_o.dot(w) + kappa_o;
    }
    double constraint_at(int n, const Eigen::Vector3d& w) const {
        const double quad = w[0] * w[0] + w[1] * w[1] + 0.5 * xi * w[2] * w[2];
        return quad + f_n[n].dot(w) + kappa_n[n];
    }
};

/// Expands the sum-of-squared-distances objective and per-user coverage
/// constraints into the quadratic form above. xi = 1 - 1/sin^2(theta_phi)
/// by default (squared-cone reading); pass literal_xi for the unsquared
/// variant.
Lemma1Matrices build_lemma1_matrices(const std::vector<Point2>& cluster, double xi);

struct PlacementResult {
    bool feasible = false;
    UavPosition position;
    double objective = 0.0;  // sum of squared 3D distances, m^2
    bool separation_violated = false;
    std::string message;
};

/// Per-cluster 3D placement: minimize the summed squared distances subject
/// to the coverage cone of every served user, the area/altitude box, and
/// minimum separation against the fixed other UAVs (linearized cuts plus a
/// push-apart repair when the cuts cannot hold).
PlacementResult solve_placement(const std::vector<Point2>& cluster, const SystemParams& params,
                                double phi, const EnvironmentParams& env,
                                const std::vector<UavPosition>& other_uavs,
                                const UavPosition& warm_start, bool literal_xi = false);

struct Algorithm1Options {
    bool literal_xi = false;  // use the unsquared cone coefficient
};

/// Alternating association / placement descent on the average path loss.
/// Infeasible association escalates: lift altitudes, then relax phi in
/// 0.05 steps down to 0.55, then grow the fleet (restarting from k-means
/// style warm centroids).
DeploymentPlan run_algorithm1(const Scenario& scenario, int n_uavs, const SystemParams& params,
                              const Algorithm1Options& opt = {});

/// Same loop but with one stage replaced by a baseline: fixed UAV
/// positions (no placement updates) or a given association (no
/// re-association). Used by the reference schemes.
DeploymentPlan deploy_with_fixed_positions(const Scenario& scenario,
                                           const std::vector<UavPosition>& uavs,
                                           const SystemParams& params);

double average_pathloss(const Scenario& scenario, const std::vector<UavPosition>& uavs,
                        const std::vector<int>& serving_uav);

}  // namespace uavplan
