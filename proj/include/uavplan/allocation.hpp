#pragma once

#include <optional>
#include <string>
#include <vector>

#include "uavplan/channel.hpp"
#include "uavplan/convex.hpp"
#include "uavplan/deployment.hpp"
#include "uavplan/scenario.hpp"

namespace uavplan {

/// Which degree of freedom the allocation stage optimizes. EqualPower ties
/// p = (P_max / K) a; RandomPower ties p to given per-subcarrier weights;
/// FixedAssign pins A and optimizes powers only.
enum class PowerMode { Optimized, EqualPower, RandomPower, FixedAssign };

/// Joint subcarrier / power solution. Tensors are N x K x L, flattened
/// with UAV fastest; entries for unassociated (n, l) pairs are zero.
/// s is the auxiliary log-domain interference ln(Phi + sigma^2).
struct RadioAllocation {
    int n_users = 0, n_subcarriers = 0, n_uavs = 0;
    std::vector<double> assign;   // A, in [0,1] relaxed / {0,1} rounded
    std::vector<double> power_w;  // P, watts
    std::vector<double> eta_bps;  // N x L auxiliary rate lower bounds
    std::vector<double> s_log;    // N x K x L slacks
    std::vector<double> qos_shortfall_bps;  // per user, 0 when QoS met
    double penalty_mu = 0.0;
    std::string mode;  // relaxed | rounded | bnb_exact | initial
    bool qos_feasible = true;
    std::vector<int> binding_users;        // positive shortfall after convergence
    std::vector<int> users_without_subcarrier;  // flagged by init when Q > K

    std::size_t idx(int n, int k, int l) const {
        return (static_cast<std::size_t>(n) * n_subcarriers + k) * n_uavs + l;
    }
    std::string to_json() const;
};

struct ScaState {
    int iterations = 0;
    std::vector<double> s_o;               // linearization point (log domain)
    std::vector<double> a_o;               // penalty linearization point
    std::vector<double> objective_history; // eta + mu*penalty - W*shortfall, scaled
    std::vector<double> eta_history;       // sum eta, bit/s
    bool converged = false;
    double wall_time_s = 0.0;
    std::string message;
};

struct Algorithm2Options {
    PowerMode power_mode = PowerMode::Optimized;
    std::vector<double> power_weights;  // K x L weights for RandomPower
    std::vector<double> fixed_assign;   // N x K x L binary for FixedAssign
    std::vector<double> warm_power_w;   // optional start powers for FixedAssign
    bool use_bnb = false;               // exact mixed-binary comparison path
    int max_iterations = 0;             // 0 = params.max_iter_allocation
};

/// Round-robin subcarriers and equal power over each UAV's cluster. The
/// result satisfies every hard constraint by construction; users left
/// without a subcarrier (cluster larger than K) are flagged.
RadioAllocation init_feasible(const Scenario& scenario, const DeploymentPlan& plan,
                              const GainTensor& gains);

/// One convexified subproblem around the linearization point, in scaled
/// units (powers / P_max, rates / subcarrier bandwidth). Variables per
/// served user: assignments, powers (mode dependent), slacks, eta, and an
/// elastic QoS shortfall.
struct ScaSubproblem {
    ConvexProgram program;
    std::vector<int> served;      // global user ids, in variable order
    std::vector<int> serving_uav; // per served user
    std::vector<int> a_var, p_var, s_var;  // served-user-major, K per user; -1 if absent
    std::vector<int> eta_var, tau_var;     // per served user
    std::vector<int> binary_indices;       // all a vars (for the BnB path)
    int a_index(int su, int k) const { return a_var[static_cast<std::size_t>(su) * k_count + k]; }
    int p_index(int su, int k) const { return p_var[static_cast<std::size_t>(su) * k_count + k]; }
    int s_index(int su, int k) const { return s_var[static_cast<std::size_t>(su) * k_count + k]; }
    int k_count = 0;
};

ScaSubproblem build_sca_subproblem(const ScaState& state, const Scenario& scenario,
                                   const DeploymentPlan& plan, const GainTensor& gains,
                                   const Algorithm2Options& opt, const SystemParams& params);

/// SCA loop: solve the subproblem, move the linearization point to the
/// solution, stop when the summed rate bound settles. QoS is elastic with
/// weight params.qos_weight; users whose shortfall stays positive are
/// reported as binding and the allocation is marked QoS-infeasible.
std::pair<RadioAllocation, ScaState> run_algorithm2(const Scenario& scenario,
                                                    const DeploymentPlan& plan,
                                                    const SystemParams& params,
                                                    const Algorithm2Options& opt = {});

/// Threshold-rounds the relaxed assignment (argmax per subcarrier, 0.5
/// floor), reassigns one subcarrier from the richest cluster mate to any
/// served user left empty-handed, then re-solves powers with A fixed.
RadioAllocation round_and_repair(const RadioAllocation& relaxed, const Scenario& scenario,
                                 const DeploymentPlan& plan, const GainTensor& gains);

/// Per-constraint-family verdicts with normalized violation magnitudes.
struct FeasibilityReport {
    struct Entry {
        std::string family;
        double max_violation = 0.0;
        bool pass = true;
    };
    std::vector<Entry> entries;
    bool all_pass(double tol = 1e-6) const {
        for (const auto& e : entries)
            if (e.max_violation > tol) return false;
        return true;
    }
    double worst() const {
        double w = 0.0;
        for (const auto& e : entries) w = std::max(w, e.max_violation);
        return w;
    }
};

/// Checks Eq. (2)-(4) and (11b)-(11g) against the true nonlinear rates.
FeasibilityReport feasibility_check(const RadioAllocation& alloc, const DeploymentPlan& plan,
                                    const Scenario& scenario, const GainTensor& gains);

/// True per-user rates of an allocation (bit/s).
std::vector<double> allocation_rates(const RadioAllocation& alloc, const Scenario& scenario,
                                     const DeploymentPlan& plan, const GainTensor& gains);

}  // namespace uavplan
