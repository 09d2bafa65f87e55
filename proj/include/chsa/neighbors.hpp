#pragma once

#include <chsa/error.hpp>
#include <chsa/parallel.hpp>
#include <chsa/pointcloud.hpp>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <vector>

namespace chsa {

/// The K nearest neighbours of one point, closest first.
struct NeighborSet {
    Eigen::Index owner = 0;
    std::vector<Eigen::Index> indices;
    std::vector<double> distances;

    Eigen::Index k() const noexcept { return static_cast<Eigen::Index>(indices.size()); }
};

/// Neighbours of point `i` by brute force. Ties are broken by the smaller index.
inline NeighborSet knn_one(const PointCloud& cloud, Eigen::Index i, Eigen::Index k)
{
    const auto p = cloud.size();
    if (k < 1)
        throw Error(ErrorCode::InvalidSpec, "K must be at least 1");
    if (k > p - 1)
        throw Error(ErrorCode::KTooLarge,
                    "K = " + std::to_string(k) + " exceeds p - 1 = " + std::to_string(p - 1));

    const auto& x = cloud.points();
    std::vector<double> sq(static_cast<std::size_t>(p));
    for (Eigen::Index j = 0; j < p; ++j)
        sq[static_cast<std::size_t>(j)] = (x.col(j) - x.col(i)).squaredNorm();

    std::vector<Eigen::Index> order;
    order.reserve(static_cast<std::size_t>(p - 1));
    for (Eigen::Index j = 0; j < p; ++j)
        if (j != i)
            order.push_back(j);

    auto closer = [&](Eigen::Index a, Eigen::Index b) {
        const double da = sq[static_cast<std::size_t>(a)];
        const double db = sq[static_cast<std::size_t>(b)];
        return da < db || (da == db && a < b);
    };
    std::partial_sort(order.begin(), order.begin() + k, order.end(), closer);

    NeighborSet ns;
    ns.owner = i;
    ns.indices.assign(order.begin(), order.begin() + k);
    ns.distances.reserve(static_cast<std::size_t>(k));
    for (auto j : ns.indices)
        ns.distances.push_back(std::sqrt(sq[static_cast<std::size_t>(j)]));
    return ns;
}

/// Exact K-nearest-neighbour sets for every point, O(D p^2).
inline std::vector<NeighborSet> knn_all(const PointCloud& cloud, Eigen::Index k, unsigned threads = 1)
{
    if (k > cloud.size() - 1)
        throw Error(ErrorCode::KTooLarge,
                    "K = " + std::to_string(k) + " exceeds p - 1 = " + std::to_string(cloud.size() - 1));
    std::vector<NeighborSet> out(static_cast<std::size_t>(cloud.size()));
    parallel_for(out.size(), threads, [&](std::size_t i) {
        out[i] = knn_one(cloud, static_cast<Eigen::Index>(i), k);
    });
    return out;
}

} // namespace chsa
