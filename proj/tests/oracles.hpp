#pragma once

// Independent reference computations used only by the test suites.

#include <chsa/datagen.hpp>
#include <chsa/qp.hpp>

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <utility>
#include <vector>

namespace chsa::oracle {

/// Sorts every other point by (distance, index) using a full sort.
inline std::vector<Eigen::Index> brute_knn(const Eigen::MatrixXd& pts, Eigen::Index i, Eigen::Index k)
{
    std::vector<std::pair<double, Eigen::Index>> all;
    for (Eigen::Index j = 0; j < pts.cols(); ++j) {
        if (j == i)
            continue;
        double s = 0.0;
        for (Eigen::Index d = 0; d < pts.rows(); ++d)
            s += (pts(d, j) - pts(d, i)) * (pts(d, j) - pts(d, i));
        all.emplace_back(std::sqrt(s), j);
    }
    std::sort(all.begin(), all.end());
    std::vector<Eigen::Index> out;
    for (Eigen::Index a = 0; a < k; ++a)
        out.push_back(all[static_cast<std::size_t>(a)].second);
    return out;
}

/// gamma ||w||^2 + lambda 1'(w+ + w-) + ||x - G w||^2 with w = w+ - w-, evaluated term by term.
inline double direct_objective(const Eigen::VectorXd& x, const Eigen::MatrixXd& G, double gamma, double lambda,
                               const Eigen::VectorXd& wp, const Eigen::VectorXd& wm)
{
    double l2 = 0.0, l1 = 0.0;
    Eigen::VectorXd recon = Eigen::VectorXd::Zero(x.size());
    for (Eigen::Index j = 0; j < wp.size(); ++j) {
        const double w = wp(j) - wm(j);
        l2 += w * w;
        l1 += wp(j) + wm(j);
        for (Eigen::Index d = 0; d < x.size(); ++d)
            recon(d) += w * G(d, j);
    }
    double res = 0.0;
    for (Eigen::Index d = 0; d < x.size(); ++d)
        res += (x(d) - recon(d)) * (x(d) - recon(d));
    return gamma * l2 + lambda * l1 + res;
}

struct EnumerationResult {
    Eigen::VectorXd u;
    double objective = std::numeric_limits<double>::infinity();
};

/// Exhaustive active-set enumeration: for every subset of variables fixed at
/// zero, solve the equality-constrained QP on the rest by a minimum-norm
/// least-squares solve of its KKT system; keep the best feasible optimum.
inline EnumerationResult enumerate_active_sets(const QpProblem& qp)
{
    const auto n = qp.n();
    const auto m = qp.m();
    EnumerationResult best;
    for (unsigned long mask = 0; mask < (1ul << n); ++mask) {
        std::vector<Eigen::Index> free;
        for (Eigen::Index i = 0; i < n; ++i)
            if (mask & (1ul << i))
                free.push_back(i);
        const auto nf = static_cast<Eigen::Index>(free.size());
        if (nf == 0)
            continue;
        Eigen::MatrixXd kkt = Eigen::MatrixXd::Zero(nf + m, nf + m);
        Eigen::VectorXd rhs(nf + m);
        for (Eigen::Index a = 0; a < nf; ++a) {
            for (Eigen::Index b = 0; b < nf; ++b)
                kkt(a, b) = qp.Q(free[a], free[b]);
            for (Eigen::Index r = 0; r < m; ++r)
                kkt(a, nf + r) = kkt(nf + r, a) = qp.A(r, free[a]);
            rhs(a) = -qp.c(free[a]);
        }
        rhs.tail(m) = qp.b;
        const Eigen::VectorXd sol = kkt.completeOrthogonalDecomposition().solve(rhs);
        if ((kkt * sol - rhs).norm() > 1e-8 * (1.0 + rhs.norm()))
            continue;
        Eigen::VectorXd u = Eigen::VectorXd::Zero(n);
        bool feasible = true;
        for (Eigen::Index a = 0; a < nf; ++a) {
            if (sol(a) < -1e-12)
                feasible = false;
            u(free[a]) = std::max(0.0, sol(a));
        }
        if (!feasible || (qp.A * u - qp.b).norm() > 1e-10)
            continue;
        const double obj = 0.5 * u.dot(qp.Q * u) + qp.c.dot(u) + qp.constant_term;
        if (obj < best.objective) {
            best.objective = obj;
            best.u = u;
        }
    }
    return best;
}

/// Distance to the unit-cube boundary as the minimum over all 2D faces.
inline double cube_face_distance(const Eigen::VectorXd& p)
{
    double best = std::numeric_limits<double>::infinity();
    for (Eigen::Index d = 0; d < p.size(); ++d) {
        best = std::min(best, std::abs(p(d) - 0.0));
        best = std::min(best, std::abs(p(d) - 1.0));
    }
    return best;
}

/// Random CHSA instance: x and K neighbour columns in [0,1]^D.
struct Instance {
    Eigen::VectorXd x;
    Eigen::MatrixXd G;
    ChsaParams params;
};

inline Instance random_instance(SplitMix64& rng, Eigen::Index dim, Eigen::Index k, double gamma, double lambda)
{
    Instance inst;
    inst.x.resize(dim);
    inst.G.resize(dim, k);
    for (Eigen::Index d = 0; d < dim; ++d)
        inst.x(d) = rng.uniform();
    for (Eigen::Index j = 0; j < k; ++j)
        for (Eigen::Index d = 0; d < dim; ++d)
            inst.G(d, j) = rng.uniform();
    inst.params = {gamma, lambda};
    return inst;
}

/// Ranks with ties averaged.
inline std::vector<double> ranks(const std::vector<double>& v)
{
    std::vector<std::size_t> idx(v.size());
    std::iota(idx.begin(), idx.end(), 0);
    std::sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) { return v[a] < v[b]; });
    std::vector<double> r(v.size());
    for (std::size_t a = 0; a < idx.size();) {
        std::size_t b = a;
        while (b + 1 < idx.size() && v[idx[b + 1]] == v[idx[a]])
            ++b;
        for (std::size_t c = a; c <= b; ++c)
            r[idx[c]] = 0.5 * static_cast<double>(a + b);
        a = b + 1;
    }
    return r;
}

inline double spearman(const std::vector<double>& a, const std::vector<double>& b)
{
    const auto ra = ranks(a);
    const auto rb = ranks(b);
    const double n = static_cast<double>(ra.size());
    const double ma = std::accumulate(ra.begin(), ra.end(), 0.0) / n;
    const double mb = std::accumulate(rb.begin(), rb.end(), 0.0) / n;
    double sab = 0.0, saa = 0.0, sbb = 0.0;
    for (std::size_t i = 0; i < ra.size(); ++i) {
        sab += (ra[i] - ma) * (rb[i] - mb);
        saa += (ra[i] - ma) * (ra[i] - ma);
        sbb += (rb[i] - mb) * (rb[i] - mb);
    }
    return sab / std::sqrt(saa * sbb);
}

} // namespace chsa::oracle
