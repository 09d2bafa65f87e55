#pragma once

#include <chsa/error.hpp>
#include <chsa/io.hpp>
#include <chsa/neighbors.hpp>
#include <chsa/pointcloud.hpp>

#include <Eigen/Dense>

#include <optional>
#include <ostream>

namespace chsa {

/// Weights of the uniformity (gamma) and convexity (lambda) terms.
struct ChsaParams {
    double gamma = 1e-6;
    double lambda = 1e-3;

    void validate() const
    {
        if (!(gamma >= 0.0) || !(lambda >= 0.0))
            throw Error(ErrorCode::InvalidSpec, "gamma and lambda must be non-negative");
    }
};

/// Standard-form convex QP:
///
///     minimize  0.5 u'Qu + c'u   subject to  Au = b,  u >= 0.
///
/// Problems built by `assemble` use split variables u = (w+, w-) and keep the
/// K x K block M of Q = [[M, -M], [-M, M]] so the solver can use the structure.
struct QpProblem {
    Eigen::MatrixXd Q;
    Eigen::VectorXd c;
    Eigen::MatrixXd A;
    Eigen::VectorXd b;
    double constant_term = 0.0;
    std::optional<Eigen::MatrixXd> split_block;

    Eigen::Index n() const noexcept { return c.size(); }
    Eigen::Index m() const noexcept { return b.size(); }
    Eigen::Index k() const noexcept { return split_block ? split_block->rows() : 0; }

    /// 0.5 u'Qu + c'u + constant_term.
    double objective(const Eigen::VectorXd& u) const { return 0.5 * u.dot(Q * u) + c.dot(u) + constant_term; }
};

/// Builds the split-variable QP for reconstructing x from the columns of G:
///
///     gamma ||w||^2 + lambda ||w||_1 + ||x - G w||^2,  sum(w) = 1,
///
/// with M = 2(G'G + gamma I), c = [lambda 1 - 2G'x; lambda 1 + 2G'x] and
/// constant_term = ||x||^2.
inline QpProblem assemble(const Eigen::VectorXd& x, const Eigen::MatrixXd& G, const ChsaParams& params)
{
    params.validate();
    if (G.rows() != x.size())
        throw Error(ErrorCode::DimensionMismatch, "neighbour matrix has " + std::to_string(G.rows()) +
                                                      " rows, point has dimension " + std::to_string(x.size()));
    const auto k = G.cols();
    if (k < 1)
        throw Error(ErrorCode::DimensionMismatch, "at least one neighbour is required");

    Eigen::MatrixXd M = 2.0 * G.transpose() * G;
    M.diagonal().array() += 2.0 * params.gamma;
    const Eigen::VectorXd gx = 2.0 * G.transpose() * x;

    QpProblem qp;
    qp.Q.resize(2 * k, 2 * k);
    qp.Q.topLeftCorner(k, k) = M;
    qp.Q.topRightCorner(k, k) = -M;
    qp.Q.bottomLeftCorner(k, k) = -M;
    qp.Q.bottomRightCorner(k, k) = M;
    qp.c.resize(2 * k);
    qp.c.head(k) = Eigen::VectorXd::Constant(k, params.lambda) - gx;
    qp.c.tail(k) = Eigen::VectorXd::Constant(k, params.lambda) + gx;
    qp.A.resize(1, 2 * k);
    qp.A.leftCols(k).setOnes();
    qp.A.rightCols(k).setConstant(-1.0);
    qp.b = Eigen::VectorXd::Ones(1);
    qp.constant_term = x.squaredNorm();
    qp.split_block = std::move(M);
    return qp;
}

/// Neighbour coordinates as a D x K matrix, in neighbour order.
inline Eigen::MatrixXd neighbor_matrix(const PointCloud& cloud, const NeighborSet& neighbors)
{
    Eigen::MatrixXd G(cloud.dim(), neighbors.k());
    for (Eigen::Index j = 0; j < neighbors.k(); ++j)
        G.col(j) = cloud.point(neighbors.indices[static_cast<std::size_t>(j)]);
    return G;
}

inline QpProblem assemble(const PointCloud& cloud, const NeighborSet& neighbors, const ChsaParams& params)
{
    if (neighbors.owner < 0 || neighbors.owner >= cloud.size())
        throw Error(ErrorCode::DimensionMismatch, "neighbour set owner is not a point of the cloud");
    return assemble(Eigen::VectorXd(cloud.point(neighbors.owner)), neighbor_matrix(cloud, neighbors), params);
}

/// w_j = u_j - u_{K+j}.
inline Eigen::VectorXd recover_weights(const Eigen::VectorXd& u)
{
    if (u.size() % 2 != 0)
        throw Error(ErrorCode::DimensionMismatch, "split vector must have even length");
    const auto k = u.size() / 2;
    return u.head(k) - u.tail(k);
}

/// Simplex-constrained least squares, min ||x - G w||^2 + reg ||w||^2 over
/// w >= 0, sum(w) = 1, in plain (unsplit) variables.
inline QpProblem simplex_projection_problem(const Eigen::VectorXd& x, const Eigen::MatrixXd& G, double reg)
{
    if (G.rows() != x.size())
        throw Error(ErrorCode::DimensionMismatch, "neighbour matrix and point dimensions differ");
    QpProblem qp;
    qp.Q = 2.0 * G.transpose() * G;
    qp.Q.diagonal().array() += 2.0 * reg;
    qp.c = -2.0 * G.transpose() * x;
    qp.A = Eigen::MatrixXd::Ones(1, G.cols());
    qp.b = Eigen::VectorXd::Ones(1);
    qp.constant_term = x.squaredNorm();
    return qp;
}

/// Debug dump of (Q, c, A, b) as "block,row,col,value" records.
inline void write_problem_csv(std::ostream& out, const QpProblem& qp)
{
    out << "block,row,col,value\n";
    for (Eigen::Index i = 0; i < qp.Q.rows(); ++i)
        for (Eigen::Index j = 0; j < qp.Q.cols(); ++j)
            out << "Q," << i << ',' << j << ',' << io::format_double(qp.Q(i, j)) << '\n';
    for (Eigen::Index i = 0; i < qp.c.size(); ++i)
        out << "c," << i << ",0," << io::format_double(qp.c(i)) << '\n';
    for (Eigen::Index i = 0; i < qp.A.rows(); ++i)
        for (Eigen::Index j = 0; j < qp.A.cols(); ++j)
            out << "A," << i << ',' << j << ',' << io::format_double(qp.A(i, j)) << '\n';
    for (Eigen::Index i = 0; i < qp.b.size(); ++i)
        out << "b," << i << ",0," << io::format_double(qp.b(i)) << '\n';
}

} // namespace chsa
