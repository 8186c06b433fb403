#include "uavplan/assignment.hpp"

#include <algorithm>
#include <limits>
#include <queue>
#include <stdexcept>

namespace uavplan {

namespace {

// Successive-shortest-path min-cost max-flow with Dijkstra over reduced
// costs. Instances here are tiny (a few hundred nodes), so no scaling.
class MinCostFlow {
public:
    explicit MinCostFlow(int n) : head_(n, -1), dist_(n), prev_edge_(n), potential_(n, 0.0) {}

    int add_edge(int u, int v, int cap, double cost) {
        const int id = static_cast<int>(to_.size());
        to_.push_back(v); next_.push_back(head_[u]); head_[u] = id;
        cap_.push_back(cap); cost_.push_back(cost); from_.push_back(u);
        to_.push_back(u); next_.push_back(head_[v]); head_[v] = id + 1;
        cap_.push_back(0); cost_.push_back(-cost); from_.push_back(v);
        return id;
    }

    int flow_on(int edge_id) const { return cap_[edge_id ^ 1]; }

    // Pushes up to `want` units from s to t; returns (flow, cost).
    std::pair<int, double> run(int s, int t, int want) {
        int flow = 0;
        double total = 0.0;
        while (flow < want) {
            if (!dijkstra(s, t)) break;
            for (int v = 0; v < static_cast<int>(potential_.size()); ++v)
                if (dist_[v] < kInf) potential_[v] += dist_[v];
            int push = want - flow;
            for (int e = prev_edge_[t]; e != -1; e = prev_edge_[from_[e]])
                push = std::min(push, cap_[e]);
            for (int e = prev_edge_[t]; e != -1; e = prev_edge_[from_[e]]) {
                cap_[e] -= push;
                cap_[e ^ 1] += push;
                total += push * cost_[e];
            }
            flow += push;
        }
        return {flow, total};
    }

private:
    static constexpr double kInf = std::numeric_limits<double>::infinity();

    bool dijkstra(int s, int t) {
        std::fill(dist_.begin(), dist_.end(), kInf);
        std::fill(prev_edge_.begin(), prev_edge_.end(), -1);
        using Item = std::pair<double, int>;  // (dist, node): node id breaks ties
        std::priority_queue<Item, std::vector<Item>, std::greater<>> pq;
        dist_[s] = 0.0;
        pq.emplace(0.0, s);
        while (!pq.empty()) {
            auto [d, u] = pq.top();
            pq.pop();
            if (d > dist_[u] + 1e-15) continue;
            for (int e = head_[u]; e != -1; e = next_[e]) {
                if (cap_[e] <= 0) continue;
                const int v = to_[e];
                const double nd = dist_[u] + cost_[e] + potential_[u] - potential_[v];
                if (nd < dist_[v] - 1e-15) {
                    dist_[v] = nd;
                    prev_edge_[v] = e;
                    pq.emplace(nd, v);
                }
            }
        }
        return dist_[t] < kInf;
    }

    std::vector<int> head_, next_, to_, from_, cap_;
    std::vector<double> cost_;
    std::vector<double> dist_;
    std::vector<int> prev_edge_;
    std::vector<double> potential_;
};

}  // namespace

AssignmentResult solve_assignment(const AssignmentProblem& pb) {
    const int N = pb.n_users, L = pb.n_uavs;
    if (static_cast<int>(pb.cap_lo.size()) != L || static_cast<int>(pb.cap_hi.size()) != L)
        throw std::invalid_argument("capacity vectors must have one entry per UAV");
    for (int l = 0; l < L; ++l)
        if (pb.cap_lo[l] > pb.cap_hi[l])
            throw std::invalid_argument("cap_lo exceeds cap_hi");

    int sum_lo = 0;
    for (int l = 0; l < L; ++l) sum_lo += pb.cap_lo[l];
    const int required = std::max(pb.min_total, sum_lo);

    AssignmentResult res;
    res.n_users = N;
    res.n_uavs = L;
    res.j.assign(static_cast<std::size_t>(N) * L, 0);
    if (required > N) return res;  // cannot serve more users than exist
    if (required == 0) {
        res.feasible = true;
        return res;
    }

    // Nodes: 0 = S, 1..N users, N+1..N+L uavs, N+L+1 = T, then SS, TT.
    const int S = 0, T = N + L + 1, SS = N + L + 2, TT = N + L + 3;
    MinCostFlow mcf(N + L + 4);

    for (int n = 0; n < N; ++n) mcf.add_edge(S, 1 + n, 1, 0.0);
    std::vector<int> link_edge(static_cast<std::size_t>(N) * L, -1);
    for (int n = 0; n < N; ++n)
        for (int l = 0; l < L; ++l)
            if (pb.allowed_at(n, l))
                link_edge[static_cast<std::size_t>(n) * L + l] =
                    mcf.add_edge(1 + n, 1 + N + l, 1, pb.cost_at(n, l));

    // Column lower bounds become mandatory flow via the excess reduction:
    // uav -> TT carries the lo units, T absorbs them from SS side.
    for (int l = 0; l < L; ++l) {
        mcf.add_edge(1 + N + l, T, pb.cap_hi[l] - pb.cap_lo[l], 0.0);
        if (pb.cap_lo[l] > 0) mcf.add_edge(1 + N + l, TT, pb.cap_lo[l], 0.0);
    }
    // Total demand `required` enters at S; whatever is not consumed by
    // column lower bounds leaves via T.
    mcf.add_edge(SS, S, required, 0.0);
    if (required - sum_lo > 0) mcf.add_edge(T, TT, required - sum_lo, 0.0);

    auto [flow, cost] = mcf.run(SS, TT, required);
    if (flow < required) return res;  // infeasible

    res.feasible = true;
    res.objective = cost;
    for (int n = 0; n < N; ++n)
        for (int l = 0; l < L; ++l) {
            const int e = link_edge[static_cast<std::size_t>(n) * L + l];
            if (e >= 0 && mcf.flow_on(e) > 0) res.j[static_cast<std::size_t>(n) * L + l] = 1;
        }
    return res;
}

}  // namespace uavplan
