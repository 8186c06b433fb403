#pragma once

#include <Eigen/Dense>
#include <functional>
#include <limits>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace uavplan {

/// Sparse affine expression: sum(coef_i * x_idx_i) + constant.
struct AffineExpr {
    std::vector<std::pair<int, double>> terms;
    double constant = 0.0;

    void add(int idx, double coef) {
        if (coef != 0.0) terms.emplace_back(idx, coef);
    }
    double value(const Eigen::VectorXd& x) const {
        double v = constant;
        for (auto [i, c] : terms) v += c * x[i];
        return v;
    }
};

/// 0.5 x'Qx + q'x + r <= 0 with Q positive semidefinite (upper triangle
/// given as triplets, mirrored internally).
struct QuadConstraint {
    std::vector<std::tuple<int, int, double>> q_upper;
    AffineExpr linear;  // q'x + r
};

/// sum_i log(pos_i(x)) >= rhs(x); every pos_i must be strictly positive.
struct LogSumConstraint {
    std::vector<AffineExpr> positives;
    AffineExpr rhs;
};

/// || rows(x) ||_2 <= radius(x); radius must start strictly positive.
struct SocConstraint {
    std::vector<AffineExpr> rows;
    AffineExpr radius;
};

/// Convex program with a linear objective. Nonlinear objectives enter via
/// an epigraph variable. Callers that maximize negate the objective.
struct ConvexProgram {
    int n_vars = 0;
    Eigen::VectorXd objective;  // minimize objective' x
    std::vector<AffineExpr> affine_le;  // expr <= 0
    std::vector<QuadConstraint> quads;
    std::vector<LogSumConstraint> logsums;
    std::vector<SocConstraint> socs;
    Eigen::VectorXd lower, upper;  // +-inf where absent
    Eigen::VectorXd start;         // strictly feasible
    bool trivially_infeasible = false;  // set when substitution violates a row

    void resize(int n) {
        n_vars = n;
        objective = Eigen::VectorXd::Zero(n);
        lower = Eigen::VectorXd::Constant(n, -std::numeric_limits<double>::infinity());
        upper = Eigen::VectorXd::Constant(n, std::numeric_limits<double>::infinity());
        start = Eigen::VectorXd::Zero(n);
    }

    /// Largest constraint violation at x (0 when feasible). Log-sum
    /// domains count as violated when any argument is nonpositive.
    double max_violation(const Eigen::VectorXd& x) const;

    /// Substitutes fixed variables out of the program. `mapping[i]` gives
    /// the new index of old variable i, or -1 if fixed. The dropped
    /// objective contribution is returned through `objective_shift`.
    ConvexProgram fix_variables(const std::map<int, double>& fixes, std::vector<int>& mapping,
                                double& objective_shift) const;
};

enum class SolveStatus { Optimal, MaxIter, Infeasible };

struct SolveReport {
    SolveStatus status = SolveStatus::Infeasible;
    double objective = 0.0;
    Eigen::VectorXd x;
    double kkt_residual = 0.0;  // duality-gap bound at exit
    int iterations = 0;         // Newton steps in total
    double wall_time_s = 0.0;
    std::vector<double> stage_objectives;  // objective after each centering
    std::string message;
};

struct BarrierOptions {
    double tol = 1e-6;            // target duality gap
    double initial_weight = 1.0;  // barrier weight, reduced by `reduction`
    double reduction = 0.1;
    double newton_tol = 1e-8;     // decrement^2 / 2 threshold
    int max_newton = 400;
};

/// Logarithmic-barrier path following. Requires prog.start strictly
/// feasible; returns Optimal when the duality-gap bound drops below tol.
SolveReport solve_convex(const ConvexProgram& prog, const BarrierOptions& opt = {});

struct BnbOptions {
    int max_nodes = 20000;
    double integrality_tol = 1e-5;
    BarrierOptions barrier;
};

/// Produces a strictly feasible start for a node's reduced program, given
/// the binary fixes in original indices. Empty result = node infeasible.
using NodeStartFn = std::function<std::optional<Eigen::VectorXd>(const std::map<int, double>&)>;

/// Extends a branching decision with its logical implications (e.g.
/// fixing one winner of an at-most-one group forces the rest to zero, so
/// child nodes keep a strict interior).
using PropagateFn = std::function<void(std::map<int, double>&)>;

/// Exact mixed-binary minimum by best-first branch and bound over the
/// barrier relaxation. Binary variables must carry [0,1] bounds.
SolveReport solve_binary_bnb(const ConvexProgram& prog, const std::vector<int>& binary_idx,
                             const NodeStartFn& node_start, const BnbOptions& opt = {},
                             const PropagateFn& propagate = {});

}  // namespace uavplan
