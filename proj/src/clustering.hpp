#pragma once

#include <vector>

#include "uavplan/rng.hpp"
#include "uavplan/scenario.hpp"

namespace uavplan::detail {

struct KmeansResult {
    std::vector<Point2> centroids;
    std::vector<int> labels;
};

// Lloyd iterations with seeded initial centers drawn from the points.
// Empty clusters are re-seeded at the point farthest from its centroid.
KmeansResult lloyd_kmeans(const std::vector<Point2>& points, int k, std::uint64_t seed,
                          int max_iters = 100, double tol = 1e-6);

}  // namespace uavplan::detail
