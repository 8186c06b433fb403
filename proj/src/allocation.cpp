#include "uavplan/allocation.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <nlohmann/json.hpp>

#include "uavplan/kernels.hpp"

namespace uavplan {

namespace {

constexpr double kLn2 = 0.69314718055994530942;

// Shared precomputed context for one allocation run. Everything internal
// works in scaled units: powers / P_max, rates / subcarrier bandwidth,
// interference / noise power.
struct Ctx {
    const Scenario& sc;
    const DeploymentPlan& plan;
    const GainTensor& gains;
    const SystemParams& params;
    Algorithm2Options opt;

    int n, k_count, l_count;
    double bsc, sigma2, pmax;
    std::vector<int> served;        // global ids
    std::vector<int> su_of;         // global id -> served index or -1
    std::vector<std::vector<int>> members;  // per uav, served indices
    std::vector<double> ghat;       // N x K x L
    std::vector<double> r0p;        // per served user, scaled QoS

    std::size_t t_idx(int nn, int kk, int ll) const {
        return (static_cast<std::size_t>(nn) * k_count + kk) * l_count + ll;
    }
    double gh(int nn, int kk, int ll) const { return ghat[t_idx(nn, kk, ll)]; }
};

Ctx make_ctx(const Scenario& sc, const DeploymentPlan& plan, const GainTensor& gains,
             const SystemParams& params, const Algorithm2Options& opt) {
    Ctx c{sc, plan, gains, params, opt,
          sc.params.n_users, sc.params.n_subcarriers, plan.n_uavs,
          params.subcarrier_bandwidth(), params.noise_power_w(), params.max_power_w,
          {}, {}, {}, {}, {}};
    c.su_of.assign(c.n, -1);
    c.members.resize(c.l_count);
    for (int nn = 0; nn < c.n; ++nn) {
        const int l = plan.serving_uav.empty() ? -1 : plan.serving_uav[nn];
        if (l < 0) continue;
        c.su_of[nn] = static_cast<int>(c.served.size());
        c.members[l].push_back(static_cast<int>(c.served.size()));
        c.served.push_back(nn);
    }
    c.ghat.resize(static_cast<std::size_t>(c.n) * c.k_count * c.l_count);
    for (int nn = 0; nn < c.n; ++nn)
        for (int kk = 0; kk < c.k_count; ++kk)
            for (int ll = 0; ll < c.l_count; ++ll)
                c.ghat[c.t_idx(nn, kk, ll)] =
                    gains.at(nn, kk, ll) * c.pmax / c.sigma2;
    c.r0p.resize(c.served.size());
    for (std::size_t i = 0; i < c.served.size(); ++i)
        c.r0p[i] = params.qos_rate(c.served[i]) / c.bsc;
    return c;
}

// Raw transmit power of served user `su` on subcarrier k (power / P_max)
// as an affine expression in the subproblem variables.
AffineExpr raw_power(const Ctx& c, const ScaSubproblem& sub, int su, int k) {
    AffineExpr e;
    const int l = sub.serving_uav[su];
    switch (c.opt.power_mode) {
        case PowerMode::Optimized:
            e.add(sub.p_index(su, k), 1.0);
            break;
        case PowerMode::EqualPower:
            e.add(sub.a_index(su, k), 1.0 / c.k_count);
            break;
        case PowerMode::RandomPower:
            e.add(sub.a_index(su, k),
                  c.opt.power_weights[static_cast<std::size_t>(k) * c.l_count + l]);
            break;
        case PowerMode::FixedAssign:
            if (sub.p_index(su, k) >= 0) e.add(sub.p_index(su, k), 1.0);
            break;
    }
    return e;
}

// 1 + scaled interference (+ own signal when with_own).
AffineExpr link_expr(const Ctx& c, const ScaSubproblem& sub, int su, int k, bool with_own) {
    const int n = sub.served[su];
    const int l = sub.serving_uav[su];
    AffineExpr e;
    e.constant = 1.0;
    for (int su2 = 0; su2 < static_cast<int>(sub.served.size()); ++su2) {
        const int l2 = sub.serving_uav[su2];
        if (l2 == l) continue;
        AffineExpr rp = raw_power(c, sub, su2, k);
        const double cross = c.gh(n, k, l2);
        for (auto [i, v] : rp.terms) e.add(i, v * cross);
        e.constant += rp.constant * cross;
    }
    if (with_own) {
        AffineExpr rp = raw_power(c, sub, su, k);
        const double own = c.gh(n, k, l);
        for (auto [i, v] : rp.terms) e.add(i, v * own);
        e.constant += rp.constant * own;
    }
    return e;
}

}  // namespace

ScaSubproblem build_sca_subproblem(const ScaState& state, const Scenario& scenario,
                                   const DeploymentPlan& plan, const GainTensor& gains,
                                   const Algorithm2Options& opt, const SystemParams& params) {
    Ctx c = make_ctx(scenario, plan, gains, params, opt);
    ScaSubproblem sub;
    sub.k_count = c.k_count;
    sub.served = c.served;
    for (int su = 0; su < static_cast<int>(c.served.size()); ++su)
        sub.serving_uav.push_back(plan.serving_uav[c.served[su]]);

    const int s_count = static_cast<int>(c.served.size());
    const bool has_a = opt.power_mode != PowerMode::FixedAssign;
    const bool has_p =
        opt.power_mode == PowerMode::Optimized || opt.power_mode == PowerMode::FixedAssign;

    sub.a_var.assign(static_cast<std::size_t>(s_count) * c.k_count, -1);
    sub.p_var.assign(static_cast<std::size_t>(s_count) * c.k_count, -1);
    sub.s_var.assign(static_cast<std::size_t>(s_count) * c.k_count, -1);
    sub.eta_var.assign(s_count, -1);
    sub.tau_var.assign(s_count, -1);

    int nv = 0;
    for (int su = 0; su < s_count; ++su) {
        const int n = c.served[su];
        for (int k = 0; k < c.k_count; ++k) {
            const std::size_t sk = static_cast<std::size_t>(su) * c.k_count + k;
            if (has_a) sub.a_var[sk] = nv++;
            if (opt.power_mode == PowerMode::Optimized) sub.p_var[sk] = nv++;
            if (opt.power_mode == PowerMode::FixedAssign &&
                opt.fixed_assign[c.t_idx(n, k, sub.serving_uav[su])] > 0.5)
                sub.p_var[sk] = nv++;
            sub.s_var[sk] = nv++;
        }
        sub.eta_var[su] = nv++;
        sub.tau_var[su] = nv++;
    }

    ConvexProgram& pr = sub.program;
    pr.resize(nv);

    const double mu = params.penalty_weight;
    const double w_qos = params.qos_weight;

    for (int su = 0; su < s_count; ++su) {
        const int n = c.served[su];
        const int l = sub.serving_uav[su];
        for (int k = 0; k < c.k_count; ++k) {
            const std::size_t sk = static_cast<std::size_t>(su) * c.k_count + k;
            if (sub.a_var[sk] >= 0) {
                pr.lower[sub.a_var[sk]] = 0.0;
                pr.upper[sub.a_var[sk]] = 1.0;  // coupled to J = 1
                pr.objective[sub.a_var[sk]] -= 2.0 * mu * state.a_o[c.t_idx(n, k, l)];
                if (has_a) sub.binary_indices.push_back(sub.a_var[sk]);
            }
            if (sub.p_var[sk] >= 0) {
                pr.lower[sub.p_var[sk]] = 0.0;
                pr.upper[sub.p_var[sk]] = 1.0;
                if (opt.power_mode == PowerMode::Optimized) {
                    AffineExpr couple;  // p - a <= 0
                    couple.add(sub.p_var[sk], 1.0);
                    couple.add(sub.a_var[sk], -1.0);
                    pr.affine_le.push_back(couple);
                }
            }
        }
        pr.lower[sub.eta_var[su]] = 0.0;
        pr.objective[sub.eta_var[su]] = -1.0;
        pr.lower[sub.tau_var[su]] = 0.0;
        pr.objective[sub.tau_var[su]] = w_qos;

        if (c.r0p[su] > 0.0) {
            AffineExpr qos;  // r0' - tau - eta <= 0
            qos.constant = c.r0p[su];
            qos.add(sub.tau_var[su], -1.0);
            qos.add(sub.eta_var[su], -1.0);
            pr.affine_le.push_back(qos);
        }

        LogSumConstraint rate;
        for (int k = 0; k < c.k_count; ++k) {
            const std::size_t sk = static_cast<std::size_t>(su) * c.k_count + k;
            rate.positives.push_back(link_expr(c, sub, su, k, true));
            rate.rhs.add(sub.s_var[sk], 1.0);

            // Linearized slack bound: 1 + Phi' <= e^{so}(s - so + 1).
            const double so = state.s_o[c.t_idx(n, k, l)];
            const double eso = std::exp(so);
            AffineExpr lin = link_expr(c, sub, su, k, false);
            lin.add(sub.s_var[sk], -eso);
            lin.constant += eso * (so - 1.0);
            pr.affine_le.push_back(std::move(lin));
        }
        rate.rhs.add(sub.eta_var[su], kLn2);
        pr.logsums.push_back(std::move(rate));
    }

    // One user per subcarrier per UAV.
    if (has_a)
        for (int l = 0; l < c.l_count; ++l)
            for (int k = 0; k < c.k_count; ++k) {
                if (c.members[l].empty()) continue;
                AffineExpr row;
                row.constant = -1.0;
                for (int su : c.members[l])
                    row.add(sub.a_index(su, k), 1.0);
                pr.affine_le.push_back(std::move(row));
            }

    // Per-UAV power budget (only when powers are free variables).
    if (has_p)
        for (int l = 0; l < c.l_count; ++l) {
            if (c.members[l].empty()) continue;
            AffineExpr row;
            row.constant = -1.0;
            bool any = false;
            for (int su : c.members[l])
                for (int k = 0; k < c.k_count; ++k)
                    if (sub.p_index(su, k) >= 0) {
                        row.add(sub.p_index(su, k), 1.0);
                        any = true;
                    }
            if (any) pr.affine_le.push_back(std::move(row));
        }

    return sub;
}

namespace {

// Full-layout tensors of one SCA iterate (scaled units).
struct Iterate {
    std::vector<double> a;     // N x K x L
    std::vector<double> praw;  // N x K x L, power / P_max
    std::vector<double> s;     // N x K x L, ln(1 + Phi')
    std::vector<double> eta;   // N x L, rate / bsc
    std::vector<double> tau;   // N
};

Iterate zero_iterate(const Ctx& c) {
    Iterate it;
    const std::size_t t = static_cast<std::size_t>(c.n) * c.k_count * c.l_count;
    it.a.assign(t, 0.0);
    it.praw.assign(t, 0.0);
    it.s.assign(t, 0.0);
    it.eta.assign(static_cast<std::size_t>(c.n) * c.l_count, 0.0);
    it.tau.assign(c.n, 0.0);
    return it;
}

double scaled_interference(const Ctx& c, const Iterate& it, int n, int k, int l) {
    double phi = 0.0;
    for (int l2 = 0; l2 < c.l_count; ++l2) {
        if (l2 == l) continue;
        double ptot = 0.0;
        for (int su : c.members[l2]) {
            const int m = c.served[su];
            ptot += it.praw[c.t_idx(m, k, l2)];
        }
        phi += ptot * c.gh(n, k, l2);
    }
    return phi;
}

// Strictly interior start for a subproblem, built from a hint iterate and
// honoring any binary fixes (already propagated).
std::optional<Eigen::VectorXd> interior_start(const Ctx& c, const ScaSubproblem& sub,
                                              const std::vector<double>& s_o,
                                              const Iterate& hint,
                                              const std::map<int, double>& fixes) {
    const int s_count = static_cast<int>(sub.served.size());
    Eigen::VectorXd x = Eigen::VectorXd::Zero(sub.program.n_vars);
    Iterate work = hint;

    auto fixed_val = [&](int var) -> std::optional<double> {
        auto itf = fixes.find(var);
        if (itf == fixes.end()) return std::nullopt;
        return itf->second;
    };

    // Assignments: clamp into the open box, respect fixes, keep every
    // (uav, subcarrier) column strictly below 1.
    for (int su = 0; su < s_count; ++su) {
        const int n = sub.served[su];
        const int l = sub.serving_uav[su];
        for (int k = 0; k < c.k_count; ++k) {
            const int av = sub.a_index(su, k);
            if (av < 0) continue;
            double v = std::clamp(work.a[c.t_idx(n, k, l)], 1e-4, 1.0 - 1e-2);
            if (auto f = fixed_val(av)) v = *f;
            work.a[c.t_idx(n, k, l)] = v;
            x[av] = v;
        }
    }
    for (int l = 0; l < c.l_count; ++l)
        for (int k = 0; k < c.k_count; ++k) {
            double sum = 0.0, free_sum = 0.0;
            for (int su : c.members[l]) {
                const int av = sub.a_index(su, k);
                if (av < 0) continue;
                const double v = work.a[c.t_idx(sub.served[su], k, l)];
                sum += v;
                if (!fixed_val(av)) free_sum += v;
            }
            if (sum > 1.0 - 1e-3 && free_sum > 0.0) {
                const double target = std::max(1e-6, 1.0 - 1e-3 - (sum - free_sum));
                const double scale = target / free_sum;
                if (scale >= 1.0) continue;
                if (sum - free_sum > 1.0 - 1e-9) return std::nullopt;  // fixes alone overflow
                for (int su : c.members[l]) {
                    const int av = sub.a_index(su, k);
                    if (av < 0 || fixed_val(av)) continue;
                    auto& v = work.a[c.t_idx(sub.served[su], k, l)];
                    v *= scale;
                    x[av] = v;
                }
            }
        }

    // Powers tied to assignments where applicable.
    for (int su = 0; su < s_count; ++su) {
        const int n = sub.served[su];
        const int l = sub.serving_uav[su];
        for (int k = 0; k < c.k_count; ++k) {
            const auto ti = c.t_idx(n, k, l);
            const int pv = sub.p_index(su, k);
            switch (c.opt.power_mode) {
                case PowerMode::EqualPower:
                    work.praw[ti] = work.a[ti] / c.k_count;
                    break;
                case PowerMode::RandomPower:
                    work.praw[ti] =
                        work.a[ti] *
                        c.opt.power_weights[static_cast<std::size_t>(k) * c.l_count + l];
                    break;
                case PowerMode::Optimized: {
                    double v = std::clamp(work.praw[ti], 1e-7, 1.0);
                    v = std::min(v, 0.9 * work.a[ti]);
                    v = std::max(v, 1e-9);
                    if (auto f = fixed_val(pv)) v = *f;
                    work.praw[ti] = v;
                    break;
                }
                case PowerMode::FixedAssign:
                    work.praw[ti] = pv >= 0 ? std::clamp(work.praw[ti], 1e-7, 0.999) : 0.0;
                    break;
            }
            if (pv >= 0) x[pv] = work.praw[ti];
        }
    }
    // Per-UAV budget with slack.
    if (c.opt.power_mode == PowerMode::Optimized || c.opt.power_mode == PowerMode::FixedAssign)
        for (int l = 0; l < c.l_count; ++l) {
            double sum = 0.0;
            for (int su : c.members[l])
                for (int k = 0; k < c.k_count; ++k)
                    sum += work.praw[c.t_idx(sub.served[su], k, l)];
            if (sum > 1.0 - 1e-3) {
                const double scale = (1.0 - 1e-3) / sum;
                for (int su : c.members[l])
                    for (int k = 0; k < c.k_count; ++k) {
                        const auto ti = c.t_idx(sub.served[su], k, l);
                        const int pv = sub.p_index(su, k);
                        if (pv < 0) continue;
                        if (fixed_val(pv)) continue;
                        work.praw[ti] *= scale;
                        x[pv] = work.praw[ti];
                    }
            }
        }

    // Slacks above their linearized floor, then eta/tau under the rate.
    for (int su = 0; su < s_count; ++su) {
        const int n = sub.served[su];
        const int l = sub.serving_uav[su];
        double log_lhs = 0.0, s_sum = 0.0;
        for (int k = 0; k < c.k_count; ++k) {
            const auto ti = c.t_idx(n, k, l);
            const double phi = scaled_interference(c, work, n, k, l);
            const double so = s_o[ti];
            const double floor_s = so - 1.0 + (1.0 + phi) * std::exp(-so);
            double sv = std::max(work.s[ti], floor_s + 1e-7);
            work.s[ti] = sv;
            x[sub.s_index(su, k)] = sv;
            const double own = c.gh(n, k, l) * work.praw[ti];
            log_lhs += std::log(1.0 + phi + own);
            s_sum += sv;
        }
        const double slack = log_lhs - s_sum;
        double eta = std::min(std::max(work.eta[static_cast<std::size_t>(n) * c.l_count + l], 1e-12),
                              slack > 0 ? 0.45 * slack / kLn2 : 1e-12);
        eta = std::max(eta, 1e-12);
        work.eta[static_cast<std::size_t>(n) * c.l_count + l] = eta;
        x[sub.eta_var[su]] = eta;
        const double tau = std::max({work.tau[n], c.r0p[su] - eta + 1e-6, 1e-9});
        work.tau[n] = tau;
        x[sub.tau_var[su]] = tau;
    }

    return x;
}

Iterate extract(const Ctx& c, const ScaSubproblem& sub, const Eigen::VectorXd& x) {
    Iterate it = zero_iterate(c);
    for (int su = 0; su < static_cast<int>(sub.served.size()); ++su) {
        const int n = sub.served[su];
        const int l = sub.serving_uav[su];
        for (int k = 0; k < c.k_count; ++k) {
            const auto ti = c.t_idx(n, k, l);
            const int av = sub.a_index(su, k);
            if (av >= 0) it.a[ti] = x[av];
            else if (c.opt.power_mode == PowerMode::FixedAssign)
                it.a[ti] = c.opt.fixed_assign[ti];
            switch (c.opt.power_mode) {
                case PowerMode::Optimized:
                case PowerMode::FixedAssign: {
                    const int pv = sub.p_index(su, k);
                    it.praw[ti] = pv >= 0 ? x[pv] : 0.0;
                    break;
                }
                case PowerMode::EqualPower:
                    it.praw[ti] = it.a[ti] / c.k_count;
                    break;
                case PowerMode::RandomPower:
                    it.praw[ti] =
                        it.a[ti] * c.opt.power_weights[static_cast<std::size_t>(k) * c.l_count + l];
                    break;
            }
            it.s[ti] = x[sub.s_index(su, k)];
        }
        it.eta[static_cast<std::size_t>(n) * c.l_count + l] = x[sub.eta_var[su]];
        it.tau[n] = x[sub.tau_var[su]];
    }
    return it;
}

// Monotone surrogate: sum eta + mu * true quadratic penalty - W * shortfall.
double true_objective(const Ctx& c, const Iterate& it) {
    double eta_sum = 0.0, pen = 0.0, tau_sum = 0.0;
    for (double v : it.eta) eta_sum += v;
    for (int su = 0; su < static_cast<int>(c.served.size()); ++su) {
        const int n = c.served[su];
        const int l = c.plan.serving_uav[n];
        for (int k = 0; k < c.k_count; ++k) {
            const double a = it.a[c.t_idx(n, k, l)];
            pen += a * a - a;
        }
        tau_sum += it.tau[n];
    }
    return eta_sum + c.params.penalty_weight * pen - c.params.qos_weight * tau_sum;
}

struct ScaRunResult {
    Iterate final;
    ScaState state;
    bool solver_ok = true;
    std::string message;
};

ScaRunResult run_sca(const Ctx& c, const Iterate& init, const std::vector<double>& s_o_init,
                     int max_iter) {
    const auto t0 = std::chrono::steady_clock::now();
    ScaRunResult out;
    out.state.s_o = s_o_init;
    out.state.a_o = init.a;
    Iterate cur = init;
    double eta_old = -1.0;

    for (int iter = 0; iter < max_iter; ++iter) {
        ScaState view;
        view.s_o = out.state.s_o;
        view.a_o = out.state.a_o;
        ScaSubproblem sub =
            build_sca_subproblem(view, c.sc, c.plan, c.gains, c.opt, c.params);

        auto start = interior_start(c, sub, out.state.s_o, cur, {});
        if (!start) {
            out.solver_ok = false;
            out.message = "no interior start";
            break;
        }
        sub.program.start = *start;

        SolveReport rep;
        if (c.opt.use_bnb) {
            BnbOptions bopt;
            bopt.barrier.tol = 1e-7;
            auto node_start = [&](const std::map<int, double>& fixes) {
                return interior_start(c, sub, out.state.s_o, cur, fixes);
            };
            // var -> (served index, subcarrier) for assignment variables.
            std::map<int, std::pair<int, int>> a_owner;
            for (int su = 0; su < static_cast<int>(sub.served.size()); ++su)
                for (int k = 0; k < c.k_count; ++k)
                    if (sub.a_index(su, k) >= 0) a_owner[sub.a_index(su, k)] = {su, k};
            auto propagate = [&, a_owner](std::map<int, double>& fixes) {
                // Fixing a winner forces cluster mates off the subcarrier;
                // a switched-off assignment zeroes its power variable.
                std::vector<std::pair<int, double>> pending(fixes.begin(), fixes.end());
                while (!pending.empty()) {
                    auto [var, val] = pending.back();
                    pending.pop_back();
                    auto it = a_owner.find(var);
                    if (it == a_owner.end()) continue;
                    const auto [su, k] = it->second;
                    if (val > 0.5) {
                        for (int su2 : c.members[sub.serving_uav[su]])
                            if (su2 != su && !fixes.count(sub.a_index(su2, k))) {
                                fixes[sub.a_index(su2, k)] = 0.0;
                                pending.push_back({sub.a_index(su2, k), 0.0});
                            }
                    } else if (sub.p_index(su, k) >= 0 && !fixes.count(sub.p_index(su, k))) {
                        fixes[sub.p_index(su, k)] = 0.0;
                    }
                }
            };
            rep = solve_binary_bnb(sub.program, sub.binary_indices, node_start, bopt, propagate);
        } else {
            BarrierOptions bopt;
            bopt.tol = 1e-7;
            rep = solve_convex(sub.program, bopt);
        }
        if (rep.status == SolveStatus::Infeasible || rep.x.size() != sub.program.n_vars) {
            out.solver_ok = false;
            out.message = rep.message.empty() ? "subproblem solve failed" : rep.message;
            break;
        }

        cur = extract(c, sub, rep.x);
        out.state.iterations = iter + 1;
        out.state.objective_history.push_back(true_objective(c, cur));
        double eta_sum = 0.0;
        for (double v : cur.eta) eta_sum += v;
        out.state.eta_history.push_back(eta_sum * c.bsc);
        out.state.s_o = cur.s;
        out.state.a_o = cur.a;

        if (eta_old >= 0.0 &&
            std::abs(eta_sum - eta_old) <= c.params.tol_rate * std::max(eta_old, 1e-9)) {
            out.state.converged = true;
            break;
        }
        eta_old = eta_sum;
    }

    out.final = cur;
    out.state.wall_time_s =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    return out;
}

RadioAllocation to_allocation(const Ctx& c, const Iterate& it, const std::string& mode) {
    RadioAllocation al;
    al.n_users = c.n;
    al.n_subcarriers = c.k_count;
    al.n_uavs = c.l_count;
    const std::size_t t = it.a.size();
    al.assign = it.a;
    al.power_w.resize(t);
    for (std::size_t i = 0; i < t; ++i) al.power_w[i] = it.praw[i] * c.pmax;
    al.eta_bps.resize(it.eta.size());
    for (std::size_t i = 0; i < it.eta.size(); ++i) al.eta_bps[i] = it.eta[i] * c.bsc;
    al.s_log.resize(t);
    const double ln_sigma2 = std::log(c.sigma2);
    for (std::size_t i = 0; i < t; ++i) al.s_log[i] = it.s[i] + ln_sigma2;
    al.qos_shortfall_bps.resize(c.n, 0.0);
    for (int su = 0; su < static_cast<int>(c.served.size()); ++su) {
        const int n = c.served[su];
        al.qos_shortfall_bps[n] = it.tau[n] * c.bsc;
        const double r0 = c.params.qos_rate(n);
        if (r0 > 0.0 && al.qos_shortfall_bps[n] > 1e-6 * std::max(r0, 1.0)) {
            al.binding_users.push_back(n);
            al.qos_feasible = false;
        }
    }
    al.penalty_mu = c.params.penalty_weight;
    al.mode = mode;
    return al;
}

Iterate from_allocation(const Ctx& c, const RadioAllocation& al) {
    Iterate it = zero_iterate(c);
    it.a = al.assign;
    for (std::size_t i = 0; i < al.power_w.size(); ++i) it.praw[i] = al.power_w[i] / c.pmax;
    const double ln_sigma2 = std::log(c.sigma2);
    for (std::size_t i = 0; i < al.s_log.size(); ++i) it.s[i] = al.s_log[i] - ln_sigma2;
    for (std::size_t i = 0; i < al.eta_bps.size(); ++i) it.eta[i] = al.eta_bps[i] / c.bsc;
    for (int n = 0; n < c.n; ++n) it.tau[n] = al.qos_shortfall_bps[n] / c.bsc;
    return it;
}

}  // namespace

RadioAllocation init_feasible(const Scenario& scenario, const DeploymentPlan& plan,
                              const GainTensor& gains) {
    Algorithm2Options opt;
    Ctx c = make_ctx(scenario, plan, gains, scenario.params, opt);
    Iterate it = zero_iterate(c);
    RadioAllocation al;

    std::vector<int> flagged;
    for (int l = 0; l < c.l_count; ++l) {
        const auto& mem = c.members[l];
        if (mem.empty()) continue;
        for (int k = 0; k < c.k_count; ++k) {
            const int su = mem[k % mem.size()];
            const int n = c.served[su];
            it.a[c.t_idx(n, k, l)] = 1.0;
            it.praw[c.t_idx(n, k, l)] = 1.0 / c.k_count;
        }
        if (static_cast<int>(mem.size()) > c.k_count)
            for (std::size_t j = c.k_count; j < mem.size(); ++j)
                flagged.push_back(c.served[mem[j]]);
    }
    // Slacks at the actual interference of this allocation.
    for (int su = 0; su < static_cast<int>(c.served.size()); ++su) {
        const int n = c.served[su];
        const int l = c.plan.serving_uav[n];
        for (int k = 0; k < c.k_count; ++k)
            it.s[c.t_idx(n, k, l)] = std::log(1.0 + scaled_interference(c, it, n, k, l));
    }
    al = to_allocation(c, it, "initial");
    al.users_without_subcarrier = flagged;
    // QoS is deferred to the SCA; the initial point only reports rates.
    al.qos_feasible = true;
    al.binding_users.clear();
    return al;
}

std::pair<RadioAllocation, ScaState> run_algorithm2(const Scenario& scenario,
                                                    const DeploymentPlan& plan,
                                                    const SystemParams& params,
                                                    const Algorithm2Options& opt) {
    GainTensor gains = gain_tensor(scenario, plan.uavs);
    Ctx c = make_ctx(scenario, plan, gains, params, opt);

    RadioAllocation init = init_feasible(scenario, plan, gains);
    Iterate it0 = from_allocation(c, init);
    if (opt.power_mode == PowerMode::FixedAssign) {
        // Start powers from the caller's warm point when given, otherwise
        // an equal split over the fixed assignment.
        it0.a = opt.fixed_assign;
        for (std::size_t i = 0; i < it0.a.size(); ++i) {
            if (it0.a[i] < 0.5) it0.praw[i] = 0.0;
            else if (!opt.warm_power_w.empty() && opt.warm_power_w[i] > 0.0)
                it0.praw[i] = std::min(opt.warm_power_w[i] / c.pmax, 1.0);
            else it0.praw[i] = 1.0 / c.k_count;
        }
        for (int su = 0; su < static_cast<int>(c.served.size()); ++su) {
            const int n = c.served[su];
            const int l = plan.serving_uav[n];
            for (int k = 0; k < c.k_count; ++k)
                it0.s[c.t_idx(n, k, l)] =
                    std::log(1.0 + scaled_interference(c, it0, n, k, l));
        }
    }

    const int max_iter = opt.max_iterations > 0 ? opt.max_iterations : params.max_iter_allocation;
    ScaRunResult run = run_sca(c, it0, it0.s, max_iter);

    RadioAllocation al = to_allocation(c, run.final, opt.use_bnb ? "bnb_exact" : "relaxed");
    al.users_without_subcarrier = init.users_without_subcarrier;
    run.state.message = run.message;
    if (!run.solver_ok) run.state.converged = false;
    return {al, run.state};
}

RadioAllocation round_and_repair(const RadioAllocation& relaxed, const Scenario& scenario,
                                 const DeploymentPlan& plan, const GainTensor& gains) {
    Algorithm2Options opt;
    Ctx c = make_ctx(scenario, plan, gains, scenario.params, opt);

    std::vector<double> rounded(relaxed.assign.size(), 0.0);
    for (int l = 0; l < c.l_count; ++l)
        for (int k = 0; k < c.k_count; ++k) {
            // argmax with the 0.5 floor; members iterate in ascending user
            // order, so ties go to the lowest index.
            int best = -1;
            double best_v = 0.5;
            for (int su : c.members[l]) {
                const double v = relaxed.assign[c.t_idx(c.served[su], k, l)];
                if (v > best_v) {
                    best_v = v;
                    best = su;
                }
            }
            if (best >= 0) rounded[c.t_idx(c.served[best], k, l)] = 1.0;
        }

    // Repair: a served user with QoS and no subcarrier first takes an idle
    // subcarrier, then one from the cluster's richest holder.
    for (int l = 0; l < c.l_count; ++l) {
        const auto& mem = c.members[l];
        auto count_of = [&](int su) {
            int cnt = 0;
            for (int k = 0; k < c.k_count; ++k)
                if (rounded[c.t_idx(c.served[su], k, l)] > 0.5) ++cnt;
            return cnt;
        };
        for (int su : mem) {
            const int n = c.served[su];
            if (scenario.params.qos_rate(n) <= 0.0 || count_of(su) > 0) continue;
            int free_k = -1;
            for (int k = 0; k < c.k_count && free_k < 0; ++k) {
                bool taken = false;
                for (int su2 : mem)
                    if (rounded[c.t_idx(c.served[su2], k, l)] > 0.5) taken = true;
                if (!taken) free_k = k;
            }
            if (free_k >= 0) {
                rounded[c.t_idx(n, free_k, l)] = 1.0;
                continue;
            }
            int rich = -1, rich_cnt = 1;
            for (int su2 : mem) {
                const int cnt = count_of(su2);
                if (cnt > rich_cnt) {
                    rich_cnt = cnt;
                    rich = su2;
                }
            }
            if (rich < 0) continue;
            for (int k = 0; k < c.k_count; ++k) {
                const auto ti = c.t_idx(c.served[rich], k, l);
                if (rounded[ti] > 0.5) {
                    rounded[ti] = 0.0;
                    rounded[c.t_idx(n, k, l)] = 1.0;
                    break;
                }
            }
        }
    }

    // Power re-solve with the assignment pinned, warm-started from the
    // relaxed powers.
    Algorithm2Options fixed;
    fixed.power_mode = PowerMode::FixedAssign;
    fixed.fixed_assign = rounded;
    fixed.warm_power_w = relaxed.power_w;
    fixed.max_iterations = 12;
    auto [al, state] = run_algorithm2(scenario, plan, scenario.params, fixed);
    al.mode = "rounded";
    al.assign = rounded;
    // Zero assignments carry exactly zero power.
    for (std::size_t i = 0; i < al.power_w.size(); ++i)
        if (rounded[i] < 0.5) al.power_w[i] = 0.0;
    return al;
}

std::vector<double> allocation_rates(const RadioAllocation& alloc, const Scenario& scenario,
                                     const DeploymentPlan& plan, const GainTensor& gains) {
    const double bw = scenario.params.subcarrier_bandwidth();
    const double noise = scenario.params.noise_power_w();
    std::vector<double> rates(alloc.n_users, 0.0);
    for (int n = 0; n < alloc.n_users; ++n) {
        const int l = plan.serving_uav[n];
        if (l >= 0) rates[n] = user_rate(n, l, alloc.power_w, alloc.assign, gains, noise, bw);
    }
    return rates;
}

FeasibilityReport feasibility_check(const RadioAllocation& alloc, const DeploymentPlan& plan,
                                    const Scenario& scenario, const GainTensor& gains) {
    const SystemParams& p = scenario.params;
    FeasibilityReport rep;
    auto push = [&](const std::string& name, double viol) {
        rep.entries.push_back({name, std::max(0.0, viol), viol <= 1e-6});
    };

    double v_couple = 0.0, v_budget = 0.0, v_carrier = 0.0, v_assoc = 0.0;
    for (int l = 0; l < alloc.n_uavs; ++l) {
        double budget = 0.0;
        for (int k = 0; k < alloc.n_subcarriers; ++k) {
            double col = 0.0;
            for (int n = 0; n < alloc.n_users; ++n) {
                const auto ti = alloc.idx(n, k, l);
                col += alloc.assign[ti];
                budget += alloc.power_w[ti];
                v_couple = std::max(
                    v_couple, (alloc.power_w[ti] - alloc.assign[ti] * p.max_power_w) / p.max_power_w);
                v_couple = std::max(v_couple, -alloc.power_w[ti] / p.max_power_w);
                const bool associated = plan.serving_uav[n] == l;
                if (!associated)
                    v_assoc = std::max(v_assoc, alloc.assign[ti]);
            }
            v_carrier = std::max(v_carrier, col - 1.0);
        }
        v_budget = std::max(v_budget, (budget - p.max_power_w) / p.max_power_w);
    }
    push("power_coupling_eq2", v_couple);
    push("subcarrier_unique_eq3", v_carrier);
    push("association_coupling_eq4", v_assoc);
    push("power_budget_eq11e", v_budget);

    // True-rate QoS for served users.
    double v_qos = 0.0;
    const auto rates = allocation_rates(alloc, scenario, plan, gains);
    for (int n = 0; n < alloc.n_users; ++n) {
        if (plan.serving_uav[n] < 0) continue;
        const double r0 = p.qos_rate(n);
        if (r0 > 0.0) v_qos = std::max(v_qos, (r0 - rates[n]) / r0);
    }
    push("qos_rate_eq11c", v_qos);

    double v_row = 0.0;
    for (int n = 0; n < alloc.n_users; ++n) {
        int cnt = 0;
        for (int l = 0; l < plan.n_uavs; ++l)
            if (plan.assigned(n, l)) ++cnt;
        v_row = std::max(v_row, static_cast<double>(cnt - 1));
    }
    push("single_association_eq11c2", v_row);

    double v_cap = 0.0;
    for (int l = 0; l < plan.n_uavs; ++l) {
        const int cnt = plan.served_count.empty() ? 0 : plan.served_count[l];
        v_cap = std::max(v_cap, static_cast<double>(p.c_min - cnt));
    }
    push("capacity_bounds_eq11d", v_cap);

    int total = 0;
    for (int n = 0; n < alloc.n_users; ++n)
        if (plan.serving_uav[n] >= 0) ++total;
    push("serve_fraction_eq11f", static_cast<double>(p.min_served() - total));

    double v_box = 0.0;
    const double scale = std::max({p.x_max - p.x_min, p.y_max - p.y_min, p.h_max - p.h_min});
    for (const auto& w : plan.uavs) {
        v_box = std::max({v_box, (p.x_min - w.x) / scale, (w.x - p.x_max) / scale,
                          (p.y_min - w.y) / scale, (w.y - p.y_max) / scale,
                          (p.h_min - w.h) / scale, (w.h - p.h_max) / scale});
    }
    push("position_bounds_eq11b", v_box);

    double v_sep = 0.0;
    for (std::size_t a = 0; a < plan.uavs.size(); ++a)
        for (std::size_t b = a + 1; b < plan.uavs.size(); ++b) {
            const double dx = plan.uavs[a].x - plan.uavs[b].x;
            const double dy = plan.uavs[a].y - plan.uavs[b].y;
            const double dh = plan.uavs[a].h - plan.uavs[b].h;
            const double d = std::sqrt(dx * dx + dy * dy + dh * dh);
            if (p.min_separation_m > 0.0)
                v_sep = std::max(v_sep, (p.min_separation_m - d) / p.min_separation_m);
        }
    push("separation_eq11g", v_sep);

    return rep;
}

std::string RadioAllocation::to_json() const {
    nlohmann::json j;
    j["mode"] = mode;
    j["penalty_mu"] = penalty_mu;
    j["qos_feasible"] = qos_feasible;
    j["binding_users"] = binding_users;
    auto& entries = j["entries"] = nlohmann::json::array();
    for (int n = 0; n < n_users; ++n)
        for (int k = 0; k < n_subcarriers; ++k)
            for (int l = 0; l < n_uavs; ++l) {
                const auto ti = idx(n, k, l);
                if (assign[ti] > 1e-9 || power_w[ti] > 0.0)
                    entries.push_back({{"user", n},
                                       {"subcarrier", k},
                                       {"uav", l},
                                       {"a", assign[ti]},
                                       {"p_w", power_w[ti]}});
            }
    j["qos_shortfall_bps"] = qos_shortfall_bps;
    return j.dump(2);
}

}  // namespace uavplan
