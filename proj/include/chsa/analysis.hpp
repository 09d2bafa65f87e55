#pragma once

#include <chsa/error.hpp>
#include <chsa/ipm.hpp>
#include <chsa/neighbors.hpp>
#include <chsa/parallel.hpp>
#include <chsa/pointcloud.hpp>
#include <chsa/qp.hpp>

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <set>
#include <vector>

namespace chsa {

enum class HullMethod { graham_2d, lp_oracle };

struct HullResult {
    std::set<Eigen::Index> vertex_indices;
    HullMethod method = HullMethod::graham_2d;
    /// Graham only: hull vertices in counter-clockwise order.
    std::vector<Eigen::Index> ccw_order;
};

namespace detail {

inline double cross(const Eigen::Vector2d& o, const Eigen::Vector2d& a, const Eigen::Vector2d& b)
{
    return (a.x() - o.x()) * (b.y() - o.y()) - (a.y() - o.y()) * (b.x() - o.x());
}

inline double segment_distance(const Eigen::Vector2d& p, const Eigen::Vector2d& a, const Eigen::Vector2d& b)
{
    const Eigen::Vector2d ab = b - a;
    const double len2 = ab.squaredNorm();
    const double t = len2 > 0.0 ? std::clamp((p - a).dot(ab) / len2, 0.0, 1.0) : 0.0;
    return (p - (a + t * ab)).norm();
}

inline void require_planar(const PointCloud& cloud)
{
    if (cloud.dim() != 2)
        throw Error(ErrorCode::WrongDimension, "planar hull needs D = 2, got D = " + std::to_string(cloud.dim()));
}

} // namespace detail

/// Exact planar hull by Graham's angular-sort scan. Points in the relative
/// interior of a hull edge are not vertices; of duplicated points one index is kept.
inline HullResult hull_2d(const PointCloud& cloud)
{
    detail::require_planar(cloud);
    const auto p = cloud.size();
    if (p < 3)
        throw Error(ErrorCode::InvalidCloud, "planar hull needs at least 3 points");
    auto pt = [&](Eigen::Index i) { return Eigen::Vector2d(cloud.point(i)); };

    Eigen::Index pivot = 0;
    for (Eigen::Index i = 1; i < p; ++i) {
        const auto a = pt(i);
        const auto b = pt(pivot);
        if (a.y() < b.y() || (a.y() == b.y() && a.x() < b.x()))
            pivot = i;
    }
    const Eigen::Vector2d origin = pt(pivot);

    std::vector<Eigen::Index> order;
    for (Eigen::Index i = 0; i < p; ++i)
        if (i != pivot && pt(i) != origin)
            order.push_back(i);
    std::sort(order.begin(), order.end(), [&](Eigen::Index a, Eigen::Index b) {
        const double c = detail::cross(origin, pt(a), pt(b));
        if (c != 0.0)
            return c > 0.0;
        const double da = (pt(a) - origin).squaredNorm();
        const double db = (pt(b) - origin).squaredNorm();
        return da != db ? da < db : a < b;
    });

    std::vector<Eigen::Index> stack{pivot};
    for (auto i : order) {
        while (stack.size() >= 2 &&
               detail::cross(pt(stack[stack.size() - 2]), pt(stack.back()), pt(i)) <= 0.0)
            stack.pop_back();
        stack.push_back(i);
    }

    HullResult out;
    out.method = HullMethod::graham_2d;
    out.ccw_order = stack;
    out.vertex_indices.insert(stack.begin(), stack.end());
    return out;
}

/// Distance from a point to the boundary of a convex polygon given in ccw order.
inline double distance_to_polygon_boundary(const Eigen::Vector2d& q, const std::vector<Eigen::Vector2d>& ccw)
{
    if (ccw.size() == 1)
        return (q - ccw.front()).norm();
    double best = std::numeric_limits<double>::infinity();
    for (std::size_t e = 0; e < ccw.size(); ++e)
        best = std::min(best, detail::segment_distance(q, ccw[e], ccw[(e + 1) % ccw.size()]));
    return best;
}

/// Distance from point i to the boundary of the hull of all points but i.
/// Small values mean i is a near-degenerate (almost collinear) boundary point.
inline double distance_to_hull_of_others_2d(const PointCloud& cloud, Eigen::Index i)
{
    detail::require_planar(cloud);
    Eigen::MatrixXd rest(2, cloud.size() - 1);
    for (Eigen::Index j = 0, c = 0; j < cloud.size(); ++j)
        if (j != i)
            rest.col(c++) = cloud.point(j);
    const auto q = Eigen::Vector2d(cloud.point(i));
    if (rest.cols() < 3)
        return detail::segment_distance(q, rest.col(0), rest.col(rest.cols() - 1));
    const PointCloud others(rest);
    const auto hull = hull_2d(others);
    std::vector<Eigen::Vector2d> poly;
    for (auto v : hull.ccw_order)
        poly.emplace_back(others.point(v));
    return distance_to_polygon_boundary(q, poly);
}

struct VertexOracleOptions {
    double residual_threshold = 1e-6;
    double regularization = 1e-12;
    SolverConfig solver{};
};

namespace detail {

struct SubsetProjection {
    double residual = 0.0;
    Eigen::VectorXd nearest; ///< closest point of the subset hull
};

inline SubsetProjection project_onto_subset(const PointCloud& cloud, Eigen::Index i,
                                            const std::vector<Eigen::Index>& subset, const VertexOracleOptions& opt)
{
    Eigen::MatrixXd G(cloud.dim(), static_cast<Eigen::Index>(subset.size()));
    for (std::size_t c = 0; c < subset.size(); ++c)
        G.col(static_cast<Eigen::Index>(c)) = cloud.point(subset[c]);
    const Eigen::VectorXd x = cloud.point(i);
    auto cfg = opt.solver;
    cfg.route = KktRoute::reduced;
    const auto sol = solve(simplex_projection_problem(x, G, opt.regularization), cfg);
    SubsetProjection out;
    out.nearest = G * sol.u;
    out.residual = (x - out.nearest).norm();
    return out;
}

} // namespace detail

/// True when no convex combination of the other points reconstructs point i.
/// Starts from the nearest neighbours: a residual below the threshold on any
/// subset certifies a non-vertex, and a hyperplane through the subset's
/// nearest point that strictly separates i from every other point certifies
/// a vertex. Otherwise the points violating that hyperplane join the subset.
inline bool lp_vertex_oracle(const PointCloud& cloud, Eigen::Index i, const VertexOracleOptions& opt = {})
{
    const auto p = cloud.size();
    if (i < 0 || i >= p)
        throw Error(ErrorCode::InvalidSpec, "point index out of range");
    const auto batch = 4 * (cloud.dim() + 1);
    auto subset = knn_one(cloud, i, std::min<Eigen::Index>(p - 1, batch)).indices;
    const Eigen::VectorXd x = cloud.point(i);
    while (true) {
        const auto proj = detail::project_onto_subset(cloud, i, subset, opt);
        if (proj.residual <= opt.residual_threshold)
            return false;
        if (static_cast<Eigen::Index>(subset.size()) == p - 1)
            return true;
        const Eigen::VectorXd d = x - proj.nearest;
        std::vector<char> in_subset(static_cast<std::size_t>(p), 0);
        for (auto j : subset)
            in_subset[static_cast<std::size_t>(j)] = 1;
        std::vector<std::pair<double, Eigen::Index>> violators;
        for (Eigen::Index j = 0; j < p; ++j) {
            if (j == i || in_subset[static_cast<std::size_t>(j)])
                continue;
            const double slack = d.dot(cloud.point(j) - x);
            if (slack >= 0.0)
                violators.emplace_back(-slack, j);
        }
        if (violators.empty())
            return true;
        std::sort(violators.begin(), violators.end());
        const auto take = std::min<std::size_t>(violators.size(), static_cast<std::size_t>(batch));
        for (std::size_t a = 0; a < take; ++a)
            subset.push_back(violators[a].second);
    }
}

inline HullResult lp_vertex_set(const PointCloud& cloud, unsigned threads = 1, const VertexOracleOptions& opt = {})
{
    std::vector<char> is_vertex(static_cast<std::size_t>(cloud.size()), 0);
    parallel_for(is_vertex.size(), threads, [&](std::size_t i) {
        is_vertex[i] = lp_vertex_oracle(cloud, static_cast<Eigen::Index>(i), opt) ? 1 : 0;
    });
    HullResult out;
    out.method = HullMethod::lp_oracle;
    for (std::size_t i = 0; i < is_vertex.size(); ++i)
        if (is_vertex[i])
            out.vertex_indices.insert(static_cast<Eigen::Index>(i));
    return out;
}

/// Distance from a point of the unit cube to its boundary, min_d min(t_d, 1 - t_d).
inline double cube_boundary_distance(const Eigen::Ref<const Eigen::VectorXd>& point)
{
    double best = std::numeric_limits<double>::infinity();
    for (Eigen::Index d = 0; d < point.size(); ++d) {
        const double t = point(d);
        if (!(t >= 0.0 && t <= 1.0))
            throw Error(ErrorCode::OutOfCube, "coordinate " + std::to_string(d) + " lies outside [0,1]");
        best = std::min({best, t, 1.0 - t});
    }
    return best;
}

struct Projection2d {
    Eigen::MatrixXd coords;              ///< 2 x p projected points
    Eigen::MatrixXd axes;                ///< D x 2 principal directions (zero column if unavailable)
    Eigen::VectorXd explained_fraction;  ///< variance share of every principal direction, descending
};

/// Projects centred data onto its two leading principal directions. Each
/// axis is oriented so its largest-magnitude loading is positive.
inline Projection2d pca_2d(const PointCloud& cloud)
{
    if (cloud.size() < 3)
        throw Error(ErrorCode::InvalidCloud, "PCA projection needs at least 3 points");
    const Eigen::VectorXd mean = cloud.points().rowwise().mean();
    const Eigen::MatrixXd centered = cloud.points().colwise() - mean;

    Eigen::BDCSVD<Eigen::MatrixXd> svd(centered.transpose(), Eigen::ComputeThinV);
    const Eigen::VectorXd sv = svd.singularValues();
    const Eigen::MatrixXd& v = svd.matrixV();

    Projection2d out;
    out.axes = Eigen::MatrixXd::Zero(cloud.dim(), 2);
    const double rank_tol = std::numeric_limits<double>::epsilon() * std::max<double>(cloud.size(), cloud.dim()) *
                            (sv.size() ? sv(0) : 0.0);
    for (Eigen::Index a = 0; a < std::min<Eigen::Index>(2, v.cols()); ++a) {
        if (sv(a) <= rank_tol)
            continue;
        Eigen::VectorXd axis = v.col(a);
        Eigen::Index lead = 0;
        axis.cwiseAbs().maxCoeff(&lead);
        if (axis(lead) < 0.0)
            axis = -axis;
        out.axes.col(a) = axis;
    }
    out.coords = out.axes.transpose() * centered;
    const double total = sv.squaredNorm();
    out.explained_fraction = total > 0.0 ? Eigen::VectorXd(sv.array().square() / total) : Eigen::VectorXd::Zero(sv.size());
    return out;
}

} // namespace chsa
