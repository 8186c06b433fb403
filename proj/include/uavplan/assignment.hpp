#pragma once

#include <vector>

namespace uavplan {

/// User-to-UAV association instance. Costs are squared 3D distances (m^2);
/// `allowed` is the coverage mask; column (UAV) loads must land in
/// [cap_lo, cap_hi]; at least min_total users must be served in total.
struct AssignmentProblem {
    int n_users = 0;
    int n_uavs = 0;
    std::vector<double> cost;   // n_users x n_uavs, row-major
    std::vector<char> allowed;  // same layout
    std::vector<int> cap_lo;
    std::vector<int> cap_hi;
    int min_total = 0;

    double cost_at(int n, int l) const { return cost[static_cast<std::size_t>(n) * n_uavs + l]; }
    bool allowed_at(int n, int l) const { return allowed[static_cast<std::size_t>(n) * n_uavs + l]; }
};

struct AssignmentResult {
    bool feasible = false;
    double objective = 0.0;
    std::vector<char> j;  // n_users x n_uavs binary, row-major
    bool assigned(int n, int l) const { return j[static_cast<std::size_t>(n) * n_uavs + l]; }
    int n_users = 0, n_uavs = 0;
    int serving_uav(int n) const {
        for (int l = 0; l < n_uavs; ++l)
            if (assigned(n, l)) return l;
        return -1;
    }
};

/// Exact integral optimum of the association problem. The constraint
/// matrix is a transportation structure, so min-cost flow with lower
/// bounds attains the ILP optimum; serving more than
/// max(min_total, sum cap_lo) users never pays because costs are
/// nonnegative. Infeasibility means the coverage mask plus capacities
/// cannot serve min_total users.
AssignmentResult solve_assignment(const AssignmentProblem& problem);

}  // namespace uavplan
