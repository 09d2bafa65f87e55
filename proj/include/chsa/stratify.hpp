#pragma once

#include <chsa/error.hpp>
#include <chsa/ipm.hpp>
#include <chsa/neighbors.hpp>
#include <chsa/parallel.hpp>
#include <chsa/pointcloud.hpp>
#include <chsa/qp.hpp>

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <limits>
#include <numeric>
#include <string>
#include <string_view>
#include <vector>

namespace chsa {

struct StratifyOptions {
    unsigned threads = 1;      ///< 0 uses every hardware thread
    double eps_neg = 1e-7;     ///< a weight below -eps_neg counts as negative
    std::uint64_t seed = 0;    ///< recorded for provenance only
    int strata = 4;            ///< number of equal-size norm-rank bands
};

/// Solved weight vector of one point plus diagnostics.
struct WeightRecord {
    Eigen::Index index = 0;
    std::vector<Eigen::Index> neighbor_indices;
    std::vector<double> weights;
    bool has_negative = false;
    double l2_norm = std::numeric_limits<double>::quiet_NaN();
    double residual = std::numeric_limits<double>::quiet_NaN(); ///< ||x_i - sum_j w_ij x_j||
    double sum_dev = std::numeric_limits<double>::quiet_NaN();  ///< |sum_j w_ij - 1|
    double objective = std::numeric_limits<double>::quiet_NaN();
    int iterations = 0;
    bool converged = false;
    bool polished = false;
    bool degenerate_possible = false; ///< gamma = 0: the minimiser may not be unique
    Eigen::Index rank = -1;
    int stratum = -1;
    std::string error; ///< non-empty when the solve failed outright

    bool unreliable() const noexcept { return !converged; }
};

struct StratificationReport {
    ChsaParams params;
    Eigen::Index k = 0;
    SolverConfig solver;
    StratifyOptions options;
    std::vector<WeightRecord> records;
    std::vector<Eigen::Index> ranking; ///< point indices by l2_norm descending
    std::vector<std::string> warnings;

    /// Indices of converged points carrying a negative weight, ascending.
    std::vector<Eigen::Index> flagged() const
    {
        std::vector<Eigen::Index> out;
        for (const auto& r : records)
            if (r.has_negative && r.converged)
                out.push_back(r.index);
        return out;
    }
};

inline constexpr std::array<std::string_view, 4> kQuartileLabels{"vertex-candidate", "near-boundary", "mid",
                                                                 "interior"};

inline std::string stratum_label(int stratum, int strata)
{
    if (stratum < 0)
        return "unranked";
    if (strata == 4)
        return std::string(kQuartileLabels[static_cast<std::size_t>(stratum)]);
    return "stratum-" + std::to_string(stratum);
}

/// Sorts points by l2_norm (descending, index ascending on ties; failed
/// solves last), stores the ranking and writes rank and stratum into each record.
inline std::vector<Eigen::Index> rank_by_norm(StratificationReport& report)
{
    const auto p = static_cast<Eigen::Index>(report.records.size());
    std::vector<Eigen::Index> order(static_cast<std::size_t>(p));
    std::iota(order.begin(), order.end(), Eigen::Index{0});
    auto key = [&](Eigen::Index i) {
        const double v = report.records[static_cast<std::size_t>(i)].l2_norm;
        return std::isnan(v) ? -std::numeric_limits<double>::infinity() : v;
    };
    std::stable_sort(order.begin(), order.end(), [&](Eigen::Index a, Eigen::Index b) { return key(a) > key(b); });

    const int strata = std::max(1, report.options.strata);
    for (Eigen::Index pos = 0; pos < p; ++pos) {
        auto& rec = report.records[static_cast<std::size_t>(order[static_cast<std::size_t>(pos)])];
        rec.rank = pos;
        rec.stratum = static_cast<int>(std::min<Eigen::Index>(strata - 1, pos * strata / p));
    }
    report.ranking = order;
    return order;
}

namespace detail {

inline WeightRecord solve_point(const PointCloud& cloud, const NeighborSet& ns, const ChsaParams& params,
                                const SolverConfig& solver, double eps_neg)
{
    WeightRecord rec;
    rec.index = ns.owner;
    rec.neighbor_indices = ns.indices;
    rec.degenerate_possible = params.gamma == 0.0;

    const Eigen::MatrixXd G = neighbor_matrix(cloud, ns);
    const Eigen::VectorXd x = cloud.point(ns.owner);
    SolverSolution sol;
    try {
        sol = solve(assemble(x, G, params), solver);
    } catch (const Error& e) {
        if (e.code() != ErrorCode::KktSingular)
            throw;
        rec.error = e.what();
        return rec;
    }

    const Eigen::VectorXd w = recover_weights(sol.u);
    rec.weights.assign(w.data(), w.data() + w.size());
    rec.has_negative = w.minCoeff() < -eps_neg;
    rec.l2_norm = w.norm();
    rec.residual = (x - G * w).norm();
    rec.sum_dev = std::abs(w.sum() - 1.0);
    rec.objective = sol.objective;
    rec.iterations = sol.iterations;
    rec.converged = sol.converged;
    rec.polished = sol.polished;
    return rec;
}

} // namespace detail

/// Runs the per-point weight problems over precomputed neighbour sets.
inline StratificationReport run_chsa(const PointCloud& cloud, const std::vector<NeighborSet>& neighbors,
                                     const ChsaParams& params, const SolverConfig& solver,
                                     const StratifyOptions& options = {})
{
    params.validate();
    solver.validate();
    if (neighbors.size() != static_cast<std::size_t>(cloud.size()))
        throw Error(ErrorCode::DimensionMismatch, "need one neighbour set per point");

    StratificationReport report;
    report.params = params;
    report.k = neighbors.empty() ? 0 : neighbors.front().k();
    report.solver = solver;
    report.options = options;
    if (!is_unit_scaled(cloud))
        report.warnings.emplace_back("cloud is not scaled to [0,1]; parameters may not transfer");

    report.records.resize(neighbors.size());
    parallel_for(neighbors.size(), options.threads, [&](std::size_t i) {
        report.records[i] = detail::solve_point(cloud, neighbors[i], params, solver, options.eps_neg);
    });

    std::size_t failed = 0;
    std::size_t unconverged = 0;
    for (const auto& r : report.records) {
        failed += !r.error.empty();
        unconverged += !r.converged;
    }
    if (unconverged > 0)
        report.warnings.push_back(std::to_string(unconverged) + " point(s) did not converge (" +
                                  std::to_string(failed) + " singular)");
    if (params.gamma == 0.0)
        report.warnings.emplace_back("gamma = 0: weight vectors may not be unique");

    rank_by_norm(report);
    return report;
}

/// Algorithm driver: K nearest neighbours, one QP per point, then ranking.
inline StratificationReport run_chsa(const PointCloud& cloud, Eigen::Index k, const ChsaParams& params,
                                     const SolverConfig& solver, const StratifyOptions& options = {})
{
    return run_chsa(cloud, knn_all(cloud, k, options.threads), params, solver, options);
}

struct SweepEntry {
    ChsaParams params;
    std::size_t flagged_count = 0;
    std::vector<Eigen::Index> flagged_indices;
    StratificationReport report;
};

/// One run per parameter pair over a shared neighbour table.
inline std::vector<SweepEntry> negativity_sweep(const PointCloud& cloud, Eigen::Index k,
                                                const std::vector<ChsaParams>& grid, const SolverConfig& solver,
                                                const StratifyOptions& options = {})
{
    if (grid.empty())
        throw Error(ErrorCode::InvalidSpec, "parameter sweep needs at least one (gamma, lambda) pair");
    const auto neighbors = knn_all(cloud, k, options.threads);
    std::vector<SweepEntry> out;
    out.reserve(grid.size());
    for (const auto& params : grid) {
        SweepEntry e;
        e.params = params;
        e.report = run_chsa(cloud, neighbors, params, solver, options);
        e.flagged_indices = e.report.flagged();
        e.flagged_count = e.flagged_indices.size();
        out.push_back(std::move(e));
    }
    return out;
}

} // namespace chsa
