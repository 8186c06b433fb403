#include "clustering.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace uavplan::detail {

namespace {
double dist2(const Point2& a, const Point2& b) {
    const double dx = a.x - b.x, dy = a.y - b.y;
    return dx * dx + dy * dy;
}
}  // namespace

KmeansResult lloyd_kmeans(const std::vector<Point2>& points, int k, std::uint64_t seed,
                          int max_iters, double tol) {
    const int n = static_cast<int>(points.size());
    KmeansResult res;
    res.labels.assign(n, 0);
    if (k <= 0) return res;
    Rng rng(seed, 17);

    // Sample k distinct start indices (or with repeats when k > n).
    std::vector<int> idx(n);
    for (int i = 0; i < n; ++i) idx[i] = i;
    for (int i = n - 1; i > 0; --i) std::swap(idx[i], idx[rng.below(i + 1)]);
    res.centroids.resize(k);
    for (int c = 0; c < k; ++c) res.centroids[c] = points[idx[c % n]];

    for (int it = 0; it < max_iters; ++it) {
        for (int i = 0; i < n; ++i) {
            int best = 0;
            double bd = std::numeric_limits<double>::infinity();
            for (int c = 0; c < k; ++c) {
                const double d = dist2(points[i], res.centroids[c]);
                if (d < bd) {
                    bd = d;
                    best = c;
                }
            }
            res.labels[i] = best;
        }
        double shift = 0.0;
        for (int c = 0; c < k; ++c) {
            double sx = 0.0, sy = 0.0;
            int cnt = 0;
            for (int i = 0; i < n; ++i)
                if (res.labels[i] == c) {
                    sx += points[i].x;
                    sy += points[i].y;
                    ++cnt;
                }
            Point2 next;
            if (cnt > 0) {
                next = {sx / cnt, sy / cnt};
            } else {
                // Re-seed at the point farthest from its own centroid.
                int far_i = 0;
                double far_d = -1.0;
                for (int i = 0; i < n; ++i) {
                    const double d = dist2(points[i], res.centroids[res.labels[i]]);
                    if (d > far_d) {
                        far_d = d;
                        far_i = i;
                    }
                }
                next = points[far_i];
            }
            shift = std::max(shift, std::sqrt(dist2(next, res.centroids[c])));
            res.centroids[c] = next;
        }
        if (shift <= tol) break;
    }
    // Final labels for the settled centroids.
    for (int i = 0; i < n; ++i) {
        int best = 0;
        double bd = std::numeric_limits<double>::infinity();
        for (int c = 0; c < k; ++c) {
            const double d = dist2(points[i], res.centroids[c]);
            if (d < bd) {
                bd = d;
                best = c;
            }
        }
        res.labels[i] = best;
    }
    return res;
}

}  // namespace uavplan::detail
