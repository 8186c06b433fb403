#include "uavplan/convex.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <queue>

namespace uavplan {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

// Dense barrier evaluation workspace. Gradients of individual constraint
// rows are accumulated sparsely; rank-one Hessian updates only touch the
// nonzero pattern of each row.
struct BarrierEval {
    double value = 0.0;
    Eigen::VectorXd grad;
    Eigen::MatrixXd hess;
    bool in_domain = true;

    explicit BarrierEval(int n) : grad(Eigen::VectorXd::Zero(n)), hess(Eigen::MatrixXd::Zero(n, n)) {}

    void rank_one(const AffineExpr& a, double w) {
        for (auto [i, ci] : a.terms)
            for (auto [j, cj] : a.terms) hess(i, j) += w * ci * cj;
    }
    void rank_one_dense(const Eigen::VectorXd& v, double w) { hess.noalias() += w * v * v.transpose(); }
    void add_grad(const AffineExpr& a, double w) {
        for (auto [i, c] : a.terms) grad[i] += w * c;
    }
};

void scatter(const AffineExpr& a, Eigen::VectorXd& dense, double w) {
    for (auto [i, c] : a.terms) dense[i] += w * c;
}

// Total barrier degree: controls the duality-gap bound m / t.
double barrier_degree(const ConvexProgram& p) {
    double m = 0.0;
    m += static_cast<double>(p.affine_le.size());
    m += static_cast<double>(p.quads.size());
    for (const auto& ls : p.logsums) m += 1.0 + static_cast<double>(ls.positives.size());
    m += 2.0 * static_cast<double>(p.socs.size());
    for (int i = 0; i < p.n_vars; ++i) {
        if (std::isfinite(p.lower[i])) m += 1.0;
        if (std::isfinite(p.upper[i])) m += 1.0;
    }
    return std::max(m, 1.0);
}

// Barrier function of all constraints (without the objective term).
bool eval_barrier(const ConvexProgram& p, const Eigen::VectorXd& x, BarrierEval* out,
                  bool need_derivatives) {
    double total = 0.0;

    for (const auto& a : p.affine_le) {
        const double slack = -a.value(x);
        if (slack <= 0.0) return false;
        total -= std::log(slack);
        if (need_derivatives) {
            out->add_grad(a, 1.0 / slack);
            out->rank_one(a, 1.0 / (slack * slack));
        }
    }

    for (const auto& qc : p.quads) {
        double g = qc.linear.value(x);
        Eigen::VectorXd qx;
        if (need_derivatives) qx = Eigen::VectorXd::Zero(p.n_vars);
        for (auto [i, j, v] : qc.q_upper) {
            g += (i == j ? 0.5 * v * x[i] * x[i] : v * x[i] * x[j]);
            if (need_derivatives) {
                qx[i] += v * x[j];
                if (i != j) qx[j] += v * x[i];
            }
        }
        const double slack = -g;
        if (slack <= 0.0) return false;
        total -= std::log(slack);
        if (need_derivatives) {
            Eigen::VectorXd gg = qx;
            scatter(qc.linear, gg, 1.0);
            out->grad += gg / slack;
            out->rank_one_dense(gg, 1.0 / (slack * slack));
            for (auto [i, j, v] : qc.q_upper) {
                out->hess(i, j) += v / slack;
                if (i != j) out->hess(j, i) += v / slack;
            }
        }
    }

    for (const auto& ls : p.logsums) {
        double f = -ls.rhs.value(x);
        Eigen::VectorXd df;
        if (need_derivatives) {
            df = Eigen::VectorXd::Zero(p.n_vars);
            scatter(ls.rhs, df, -1.0);
        }
        for (const auto& u : ls.positives) {
            const double uv = u.value(x);
            if (uv <= 0.0) return false;
            f += std::log(uv);
            total -= std::log(uv);
            if (need_derivatives) {
                scatter(u, df, 1.0 / uv);
                out->add_grad(u, -1.0 / uv);       // from -log(u)
                out->rank_one(u, 1.0 / (uv * uv)); // idem
            }
        }
        if (f <= 0.0) return false;
        total -= std::log(f);
        if (need_derivatives) {
            out->grad -= df / f;
            out->rank_one_dense(df, 1.0 / (f * f));
            // -hess(f)/f where hess(f) = -sum a a'/u^2
            for (const auto& u : ls.positives) {
                const double uv = u.value(x);
                out->rank_one(u, 1.0 / (f * uv * uv));
            }
        }
    }

    for (const auto& soc : p.socs) {
        const double r = soc.radius.value(x);
        if (r <= 0.0) return false;
        double nrm2 = 0.0;
        for (const auto& row : soc.rows) {
            const double v = row.value(x);
            nrm2 += v * v;
        }
        const double c = r * r - nrm2;
        if (c <= 0.0) return false;
        total -= std::log(c);
        if (need_derivatives) {
            Eigen::VectorXd dc = Eigen::VectorXd::Zero(p.n_vars);
            scatter(soc.radius, dc, 2.0 * r);
            for (const auto& row : soc.rows) scatter(row, dc, -2.0 * row.value(x));
            out->grad -= dc / c;
            out->rank_one_dense(dc, 1.0 / (c * c));
            // -hess(c)/c with hess(c) = 2 dr dr' - 2 sum a a'
            out->rank_one(soc.radius, -2.0 / c);
            for (const auto& row : soc.rows) out->rank_one(row, 2.0 / c);
        }
    }

    for (int i = 0; i < p.n_vars; ++i) {
        if (std::isfinite(p.lower[i])) {
            const double s = x[i] - p.lower[i];
            if (s <= 0.0) return false;
            total -= std::log(s);
            if (need_derivatives) {
                out->grad[i] -= 1.0 / s;
                out->hess(i, i) += 1.0 / (s * s);
            }
        }
        if (std::isfinite(p.upper[i])) {
            const double s = p.upper[i] - x[i];
            if (s <= 0.0) return false;
            total -= std::log(s);
            if (need_derivatives) {
                out->grad[i] += 1.0 / s;
                out->hess(i, i) += 1.0 / (s * s);
            }
        }
    }

    if (out) out->value = total;
    return true;
}

// Barrier value only; +inf outside the domain.
double barrier_value_or_inf(const ConvexProgram& p, const Eigen::VectorXd& x) {
    BarrierEval tmp(0);
    if (!eval_barrier(p, x, &tmp, false)) return kInf;
    return tmp.value;
}

}  // namespace

double ConvexProgram::max_violation(const Eigen::VectorXd& x) const {
    double worst = 0.0;
    for (const auto& a : affine_le) worst = std::max(worst, a.value(x));
    for (const auto& qc : quads) {
        double g = qc.linear.value(x);
        for (auto [i, j, v] : qc.q_upper) g += (i == j ? 0.5 * v * x[i] * x[i] : v * x[i] * x[j]);
        worst = std::max(worst, g);
    }
    for (const auto& ls : logsums) {
        double f = -ls.rhs.value(x);
        for (const auto& u : ls.positives) {
            const double uv = u.value(x);
            if (uv <= 0.0) return kInf;
            f += std::log(uv);
        }
        worst = std::max(worst, -f);
    }
    for (const auto& soc : socs) {
        double nrm2 = 0.0;
        for (const auto& row : soc.rows) {
            const double v = row.value(x);
            nrm2 += v * v;
        }
        worst = std::max(worst, std::sqrt(nrm2) - soc.radius.value(x));
    }
    for (int i = 0; i < n_vars; ++i) {
        if (std::isfinite(lower[i])) worst = std::max(worst, lower[i] - x[i]);
        if (std::isfinite(upper[i])) worst = std::max(worst, x[i] - upper[i]);
    }
    return worst;
}

SolveReport solve_convex(const ConvexProgram& prog, const BarrierOptions& opt) {
    const auto t_start = std::chrono::steady_clock::now();
    SolveReport rep;
    rep.x = prog.start;

    if (prog.trivially_infeasible) {
        rep.status = SolveStatus::Infeasible;
        rep.message = "constant constraint violated";
        return rep;
    }
    BarrierEval probe(0);
    if (!eval_barrier(prog, rep.x, &probe, false)) {
        rep.status = SolveStatus::Infeasible;
        rep.message = "start point is not strictly feasible";
        return rep;
    }

    const double m = barrier_degree(prog);
    double t = std::max(1.0, 1.0 / opt.initial_weight);
    const double t_mult = 1.0 / opt.reduction;
    Eigen::VectorXd x = rep.x;
    int newton_total = 0;

    while (true) {
        // Centering for the current t.
        for (int inner = 0;; ++inner) {
            if (newton_total >= opt.max_newton) {
                rep.status = SolveStatus::MaxIter;
                rep.message = "newton budget exhausted";
                goto done;
            }
            BarrierEval eval(prog.n_vars);
            if (!eval_barrier(prog, x, &eval, true)) {
                rep.status = SolveStatus::MaxIter;
                rep.message = "iterate left the domain";
                goto done;
            }
            Eigen::VectorXd g = t * prog.objective + eval.grad;
            Eigen::MatrixXd H = eval.hess;
            const double ridge = 1e-12 * (1.0 + H.diagonal().cwiseAbs().maxCoeff());
            H.diagonal().array() += ridge;
            Eigen::LDLT<Eigen::MatrixXd> ldlt(H);
            Eigen::VectorXd dx = ldlt.solve(-g);
            ++newton_total;
            const double decrement2 = -g.dot(dx);
            if (!(decrement2 > 0.0)) break;  // numerically converged
            if (0.5 * decrement2 <= opt.newton_tol) break;

            // Backtracking line search on t*f0 + barrier.
            const double f_cur = t * prog.objective.dot(x) + eval.value;
            const double slope = g.dot(dx);
            double step = 1.0;
            bool moved = false;
            for (int ls = 0; ls < 60; ++ls) {
                Eigen::VectorXd xn = x + step * dx;
                const double bar = barrier_value_or_inf(prog, xn);
                if (std::isfinite(bar)) {
                    const double fn = t * prog.objective.dot(xn) + bar;
                    if (fn <= f_cur + 0.25 * step * slope) {
                        x = xn;
                        moved = true;
                        break;
                    }
                }
                step *= 0.5;
            }
            if (!moved) {
                rep.status = SolveStatus::MaxIter;
                rep.message = "line search failed to make progress";
                goto done;
            }
        }
        rep.stage_objectives.push_back(prog.objective.dot(x));
        if (m / t <= opt.tol) {
            rep.status = SolveStatus::Optimal;
            break;
        }
        t *= t_mult;
    }

done:
    rep.x = x;
    rep.objective = prog.objective.dot(x);
    rep.kkt_residual = m / t;
    rep.iterations = newton_total;
    rep.wall_time_s =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t_start).count();
    return rep;
}

ConvexProgram ConvexProgram::fix_variables(const std::map<int, double>& fixes,
                                           std::vector<int>& mapping,
                                           double& objective_shift) const {
    mapping.assign(n_vars, -1);
    int kept = 0;
    for (int i = 0; i < n_vars; ++i)
        if (!fixes.count(i)) mapping[i] = kept++;

    ConvexProgram out;
    out.resize(kept);
    objective_shift = 0.0;
    for (int i = 0; i < n_vars; ++i) {
        if (mapping[i] >= 0) {
            out.objective[mapping[i]] = objective[i];
            out.lower[mapping[i]] = lower[i];
            out.upper[mapping[i]] = upper[i];
            out.start[mapping[i]] = start[i];
        } else {
            objective_shift += objective[i] * fixes.at(i);
        }
    }

    auto reduce = [&](const AffineExpr& a) {
        AffineExpr r;
        r.constant = a.constant;
        for (auto [i, c] : a.terms) {
            if (mapping[i] >= 0) r.add(mapping[i], c);
            else r.constant += c * fixes.at(i);
        }
        return r;
    };

    // Rows whose variables are all fixed degenerate to constants: drop
    // them when satisfied, flag the program when violated.
    for (const auto& a : affine_le) {
        AffineExpr r = reduce(a);
        if (r.terms.empty()) {
            if (r.constant > 1e-9) out.trivially_infeasible = true;
            continue;
        }
        out.affine_le.push_back(std::move(r));
    }
    for (const auto& qc : quads) {
        QuadConstraint r;
        r.linear = reduce(qc.linear);
        for (auto [i, j, v] : qc.q_upper) {
            const bool fi = mapping[i] < 0, fj = mapping[j] < 0;
            if (!fi && !fj) r.q_upper.emplace_back(mapping[i], mapping[j], v);
            else if (fi && fj)
                r.linear.constant += (i == j ? 0.5 : 1.0) * v * fixes.at(i) * fixes.at(j);
            else if (fi) r.linear.add(mapping[j], v * fixes.at(i));
            else r.linear.add(mapping[i], v * fixes.at(j));
        }
        if (r.q_upper.empty() && r.linear.terms.empty()) {
            if (r.linear.constant > 1e-9) out.trivially_infeasible = true;
            continue;
        }
        out.quads.push_back(std::move(r));
    }
    for (const auto& ls : logsums) {
        LogSumConstraint r;
        r.rhs = reduce(ls.rhs);
        for (const auto& u : ls.positives) r.positives.push_back(reduce(u));
        out.logsums.push_back(std::move(r));
    }
    for (const auto& soc : socs) {
        SocConstraint r;
        r.radius = reduce(soc.radius);
        for (const auto& row : soc.rows) r.rows.push_back(reduce(row));
        out.socs.push_back(std::move(r));
    }
    return out;
}

SolveReport solve_binary_bnb(const ConvexProgram& prog, const std::vector<int>& binary_idx,
                             const NodeStartFn& node_start, const BnbOptions& opt,
                             const PropagateFn& propagate) {
    const auto t_start = std::chrono::steady_clock::now();

    struct Node {
        double bound;
        std::map<int, double> fixes;
        bool operator>(const Node& o) const { return bound > o.bound; }
    };

    SolveReport best;
    best.status = SolveStatus::Infeasible;
    best.objective = kInf;
    int explored = 0;
    bool budget_hit = false;

    auto solve_node = [&](const std::map<int, double>& fixes) -> std::optional<SolveReport> {
        std::vector<int> mapping;
        double shift = 0.0;
        ConvexProgram reduced = prog.fix_variables(fixes, mapping, shift);
        if (reduced.trivially_infeasible) return std::nullopt;
        auto start = node_start(fixes);
        if (!start) return std::nullopt;
        for (int i = 0; i < prog.n_vars; ++i)
            if (mapping[i] >= 0) reduced.start[mapping[i]] = (*start)[i];
        SolveReport r = solve_convex(reduced, opt.barrier);
        if (r.status == SolveStatus::Infeasible) return std::nullopt;
        // Lift the solution back to the full space.
        Eigen::VectorXd full(prog.n_vars);
        for (int i = 0; i < prog.n_vars; ++i)
            full[i] = mapping[i] >= 0 ? r.x[mapping[i]] : fixes.at(i);
        r.x = full;
        r.objective += shift;
        return r;
    };

    std::priority_queue<Node, std::vector<Node>, std::greater<>> open;
    if (auto root = solve_node({})) {
        open.push({root->objective, {}});

        while (!open.empty()) {
            if (explored >= opt.max_nodes) {
                budget_hit = true;
                break;
            }
            Node node = open.top();
            open.pop();
            if (node.bound >= best.objective - 1e-12) continue;
            auto solved = solve_node(node.fixes);
            ++explored;
            if (!solved) continue;
            if (solved->objective >= best.objective - 1e-12) continue;

            // Pick the most fractional binary.
            int branch = -1;
            double worst_frac = opt.integrality_tol;
            for (int idx : binary_idx) {
                if (node.fixes.count(idx)) continue;
                const double v = solved->x[idx];
                const double frac = std::min(v, 1.0 - v);
                if (frac > worst_frac) {
                    worst_frac = frac;
                    branch = idx;
                }
            }
            if (branch < 0) {
                // Integral within tolerance: incumbent.
                if (solved->objective < best.objective) {
                    best = *solved;
                    best.status = SolveStatus::Optimal;
                }
                continue;
            }
            for (double v : {std::round(solved->x[branch]), 1.0 - std::round(solved->x[branch])}) {
                Node child = node;
                child.fixes[branch] = v;
                if (propagate) propagate(child.fixes);
                child.bound = solved->objective;
                open.push(std::move(child));
            }
        }
    }

    if (budget_hit && best.status == SolveStatus::Optimal) {
        best.status = SolveStatus::MaxIter;
        best.message = "node budget exceeded; best incumbent returned";
    } else if (best.status != SolveStatus::Optimal && best.message.empty()) {
        best.message = budget_hit ? "node budget exceeded before any incumbent"
                                  : "no integral feasible point found";
        if (budget_hit) best.status = SolveStatus::MaxIter;
    }
    best.iterations = explored;
    best.wall_time_s =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t_start).count();
    return best;
}

}  // namespace uavplan
