#pragma once

#include <chsa/error.hpp>
#include <chsa/io.hpp>
#include <chsa/qp.hpp>

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <limits>
#include <ostream>
#include <vector>

namespace chsa {

/// How the Newton system is solved. All routes compute the same step.
enum class KktRoute {
    automatic,  ///< structured for split problems, reduced otherwise
    structured, ///< K x K system exploiting Q = [[M,-M],[-M,M]] and A = [1,-1]
    reduced,    ///< n x n system after eliminating dz
    full,       ///< unreduced (2n+m) x (2n+m) symmetric indefinite system
};

struct SolverConfig {
    double tol_gap = 1e-9;
    double tol_feas = 1e-8;
    int max_iters = 100;
    double step_fraction = 0.99;
    double centering_sigma = 0.1;
    double regularization = 1e-12;
    /// Multiplies the default starting point; any positive value is a valid start.
    double start_scale = 1.0;
    /// Re-solve on the identified active set and keep the result when it passes the KKT checks.
    bool polish = true;
    /// Extra iterations allowed after convergence while polishing keeps failing.
    int polish_iters = 12;
    KktRoute route = KktRoute::automatic;
    bool trace = false;

    void validate() const
    {
        if (!(step_fraction > 0.0 && step_fraction < 1.0))
            throw Error(ErrorCode::InvalidSpec, "step_fraction must lie in (0, 1)");
        if (!(tol_gap > 0.0) || !(tol_feas > 0.0))
            throw Error(ErrorCode::InvalidSpec, "tolerances must be positive");
        if (max_iters < 1)
            throw Error(ErrorCode::InvalidSpec, "max_iters must be at least 1");
        if (!(centering_sigma > 0.0 && centering_sigma < 1.0))
            throw Error(ErrorCode::InvalidSpec, "centering_sigma must lie in (0, 1)");
        if (!(start_scale > 0.0))
            throw Error(ErrorCode::InvalidSpec, "start_scale must be positive");
        if (!(regularization >= 0.0))
            throw Error(ErrorCode::InvalidSpec, "regularization must be non-negative");
    }
};

struct TraceRow {
    int iteration = 0;
    double mu = 0.0; ///< u'z / n
    double primal_residual = 0.0;
    double dual_residual = 0.0;
    double step = 0.0; ///< step length taken after this row (0 on the last row)
};

struct SolverSolution {
    Eigen::VectorXd u;
    Eigen::VectorXd y; ///< equality multipliers, one per row of A
    Eigen::VectorXd z; ///< multipliers of u >= 0
    int iterations = 0;
    bool converged = false;
    bool polished = false;
    double final_gap = 0.0; ///< u'z
    double primal_residual = 0.0;
    double dual_residual = 0.0;
    double objective = 0.0; ///< 0.5 u'Qu + c'u + constant_term
    std::vector<TraceRow> trace;
};

namespace detail {

struct Residuals {
    Eigen::VectorXd dual;   ///< Qu + c + A'y - z
    Eigen::VectorXd primal; ///< Au - b
    double gap = 0.0;
    double primal_norm = 0.0;
    double dual_norm = 0.0;
};

inline Eigen::VectorXd apply_q(const QpProblem& qp, const Eigen::VectorXd& u)
{
    if (!qp.split_block)
        return qp.Q * u;
    const auto k = qp.k();
    const Eigen::VectorXd ms = *qp.split_block * (u.head(k) - u.tail(k));
    Eigen::VectorXd out(2 * k);
    out.head(k) = ms;
    out.tail(k) = -ms;
    return out;
}

inline Residuals residuals(const QpProblem& qp, const Eigen::VectorXd& u, const Eigen::VectorXd& y,
                           const Eigen::VectorXd& z)
{
    Residuals r;
    r.dual = apply_q(qp, u) + qp.c + qp.A.transpose() * y - z;
    r.primal = qp.A * u - qp.b;
    r.gap = u.dot(z);
    r.primal_norm = r.primal.lpNorm<Eigen::Infinity>();
    r.dual_norm = r.dual.lpNorm<Eigen::Infinity>();
    return r;
}

struct Tolerances {
    double primal;
    double dual;
    double gap;
};

inline Tolerances tolerances(const QpProblem& qp, const SolverConfig& cfg)
{
    return {cfg.tol_feas * (1.0 + qp.b.lpNorm<Eigen::Infinity>()),
            cfg.tol_feas * (1.0 + qp.c.lpNorm<Eigen::Infinity>()),
            cfg.tol_gap * static_cast<double>(qp.n())};
}

inline bool satisfied(const Residuals& r, const Tolerances& tol)
{
    return r.primal_norm <= tol.primal && r.dual_norm <= tol.dual && r.gap <= tol.gap;
}

inline double merit(const Residuals& r, const Tolerances& tol)
{
    return std::max({r.primal_norm / tol.primal, r.dual_norm / tol.dual, r.gap / tol.gap});
}

struct Step {
    Eigen::VectorXd du, dy, dz;
};

[[noreturn]] inline void singular(const char* route)
{
    throw Error(ErrorCode::KktSingular, std::string("Newton system is singular (") + route + " route)");
}

// Solves (Q + D) du + A'dy = r, A du = -rp with D = diag(d).
inline void solve_reduced(const QpProblem& qp, const Eigen::VectorXd& d, const Eigen::VectorXd& r,
                          const Eigen::VectorXd& rp, double reg, Eigen::VectorXd& du, Eigen::VectorXd& dy)
{
    Eigen::MatrixXd h = qp.Q;
    h.diagonal() += d;
    h.diagonal().array() += reg;
    Eigen::LLT<Eigen::MatrixXd> llt(h);
    if (llt.info() != Eigen::Success)
        singular("reduced");
    const Eigen::MatrixXd hinv_at = llt.solve(qp.A.transpose());
    const Eigen::VectorXd hinv_r = llt.solve(r);
    Eigen::MatrixXd schur = qp.A * hinv_at;
    Eigen::LLT<Eigen::MatrixXd> schur_llt(schur);
    if (schur_llt.info() != Eigen::Success)
        singular("reduced");
    dy = schur_llt.solve(qp.A * hinv_r + rp);
    du = hinv_r - hinv_at * dy;
}

// Same system for split problems. With s = du+ - du-, t = du+ + du- the pair
// equations decouple into a K x K SPD system in s:
//   (2M + diag(2 d1 d2 / (d1 + d2))) s = g - 2 dy 1,   1's = -rp,
// and t follows componentwise.
inline void solve_structured(const QpProblem& qp, const Eigen::VectorXd& d, const Eigen::VectorXd& r,
                             const Eigen::VectorXd& rp, double reg, Eigen::VectorXd& du, Eigen::VectorXd& dy)
{
    const auto k = qp.k();
    const auto d1 = d.head(k).array();
    const auto d2 = d.tail(k).array();
    const auto r1 = r.head(k).array();
    const auto r2 = r.tail(k).array();
    const Eigen::ArrayXd dsum = d1 + d2;

    Eigen::MatrixXd p = 2.0 * *qp.split_block;
    p.diagonal().array() += 2.0 * d1 * d2 / dsum + reg;
    Eigen::LLT<Eigen::MatrixXd> llt(p);
    if (llt.info() != Eigen::Success)
        singular("structured");

    const Eigen::VectorXd g = (r1 - r2 - (d1 - d2) / dsum * (r1 + r2)).matrix();
    const Eigen::VectorXd pinv_g = llt.solve(g);
    const Eigen::VectorXd pinv_1 = llt.solve(Eigen::VectorXd::Ones(k));
    dy.resize(1);
    dy(0) = (pinv_g.sum() + rp(0)) / (2.0 * pinv_1.sum());
    const Eigen::ArrayXd s = (pinv_g - 2.0 * dy(0) * pinv_1).array();
    const Eigen::ArrayXd t = (2.0 * (r1 + r2) - (d1 - d2) * s) / dsum;
    du.resize(2 * k);
    du.head(k) = (0.5 * (t + s)).matrix();
    du.tail(k) = (0.5 * (t - s)).matrix();
}

// Unreduced symmetric form:
//   [ Q + reg   A'     -I        ] [du]   [ -rd     ]
//   [ A         -reg    0        ] [dy] = [ -rp     ]
//   [ -I        0      -diag(u/z)] [dz]   [ -rc / z ]
inline Step solve_full(const QpProblem& qp, const Eigen::VectorXd& u, const Eigen::VectorXd& z,
                       const Residuals& res, const Eigen::VectorXd& rc, double reg)
{
    const auto n = qp.n();
    const auto m = qp.m();
    const auto size = 2 * n + m;
    Eigen::MatrixXd kkt = Eigen::MatrixXd::Zero(size, size);
    kkt.topLeftCorner(n, n) = qp.Q;
    kkt.topLeftCorner(n, n).diagonal().array() += reg;
    kkt.block(0, n, n, m) = qp.A.transpose();
    kkt.block(n, 0, m, n) = qp.A;
    kkt.block(n, n, m, m).diagonal().setConstant(-reg);
    kkt.block(0, n + m, n, n).diagonal().setConstant(-1.0);
    kkt.block(n + m, 0, n, n).diagonal().setConstant(-1.0);
    kkt.block(n + m, n + m, n, n).diagonal() = -(u.array() / z.array()).matrix();

    Eigen::VectorXd rhs(size);
    rhs.head(n) = -res.dual;
    rhs.segment(n, m) = -res.primal;
    rhs.tail(n) = -(rc.array() / z.array()).matrix();

    Eigen::PartialPivLU<Eigen::MatrixXd> lu(kkt);
    if (!(lu.rcond() > std::numeric_limits<double>::epsilon() * 1e-4))
        singular("full");
    const Eigen::VectorXd sol = lu.solve(rhs);
    if (!sol.allFinite())
        singular("full");
    return {sol.head(n), sol.segment(n, m), sol.tail(n)};
}

inline Step newton_step(const QpProblem& qp, const Eigen::VectorXd& u, const Eigen::VectorXd& z,
                        const Residuals& res, double target, const SolverConfig& cfg)
{
    // complementarity row: Z du + U dz = target 1 - U Z 1
    const Eigen::VectorXd rc = (target - u.array() * z.array()).matrix();

    auto route = cfg.route;
    if (route == KktRoute::automatic)
        route = qp.split_block && qp.m() == 1 ? KktRoute::structured : KktRoute::reduced;
    if (route == KktRoute::structured && !qp.split_block)
        route = KktRoute::reduced;
    if (route == KktRoute::full)
        return solve_full(qp, u, z, res, rc, cfg.regularization);

    const Eigen::VectorXd d = (z.array() / u.array()).matrix();
    const Eigen::VectorXd r = -res.dual + (rc.array() / u.array()).matrix();
    Step step;
    if (route == KktRoute::structured)
        solve_structured(qp, d, r, res.primal, cfg.regularization, step.du, step.dy);
    else
        solve_reduced(qp, d, r, res.primal, cfg.regularization, step.du, step.dy);
    step.dz = ((rc.array() - z.array() * step.du.array()) / u.array()).matrix();
    if (!step.du.allFinite() || !step.dz.allFinite() || !step.dy.allFinite())
        singular("reduced");
    return step;
}

/// Largest alpha in (0, 1] with v + alpha dv >= (1 - fraction) v.
inline double max_step(const Eigen::VectorXd& v, const Eigen::VectorXd& dv, double fraction)
{
    double alpha = 1.0;
    for (Eigen::Index i = 0; i < v.size(); ++i)
        if (dv(i) < 0.0)
            alpha = std::min(alpha, -fraction * v(i) / dv(i));
    return alpha;
}

// Equality-constrained re-solve with u fixed at zero wherever u <= z. Ambiguous
// (weakly complementary) indices are corrected a few times: negative free
// values leave the free set, negative multipliers of fixed values join it.
inline bool polish(const QpProblem& qp, const Tolerances& tol, SolverSolution& sol, int max_corrections = 8)
{
    const auto n = qp.n();
    const auto m = qp.m();
    std::vector<char> is_free(static_cast<std::size_t>(n), 0);
    for (Eigen::Index i = 0; i < n; ++i)
        is_free[static_cast<std::size_t>(i)] = sol.u(i) > sol.z(i);

    for (int pass = 0; pass <= max_corrections; ++pass) {
        std::vector<Eigen::Index> free;
        for (Eigen::Index i = 0; i < n; ++i)
            if (is_free[static_cast<std::size_t>(i)])
                free.push_back(i);
        if (free.empty())
            return false;

        const auto nf = static_cast<Eigen::Index>(free.size());
        Eigen::MatrixXd kkt = Eigen::MatrixXd::Zero(nf + m, nf + m);
        Eigen::VectorXd rhs(nf + m);
        for (Eigen::Index a = 0; a < nf; ++a) {
            for (Eigen::Index b = 0; b < nf; ++b)
                kkt(a, b) = qp.Q(free[a], free[b]);
            for (Eigen::Index row = 0; row < m; ++row) {
                kkt(a, nf + row) = qp.A(row, free[a]);
                kkt(nf + row, a) = qp.A(row, free[a]);
            }
            rhs(a) = -qp.c(free[a]);
        }
        rhs.tail(m) = qp.b;

        Eigen::PartialPivLU<Eigen::MatrixXd> lu(kkt);
        const Eigen::VectorXd x = lu.solve(rhs);
        if (!x.allFinite() ||
            (kkt * x - rhs).lpNorm<Eigen::Infinity>() > 1e-9 * (1.0 + rhs.lpNorm<Eigen::Infinity>()))
            return false;

        Eigen::VectorXd u = Eigen::VectorXd::Zero(n);
        for (Eigen::Index a = 0; a < nf; ++a)
            u(free[a]) = x(a);
        Eigen::VectorXd y = x.tail(m);
        Eigen::VectorXd z = apply_q(qp, u) + qp.c + qp.A.transpose() * y;
        for (auto i : free)
            z(i) = 0.0;

        bool changed = false;
        for (Eigen::Index i = 0; i < n; ++i) {
            auto& f = is_free[static_cast<std::size_t>(i)];
            if (f && u(i) < -tol.primal) {
                f = 0;
                changed = true;
            } else if (!f && z(i) < -tol.dual) {
                f = 1;
                changed = true;
            }
        }
        if (changed)
            continue;

        u = u.cwiseMax(0.0);
        z = z.cwiseMax(0.0);
        const auto res = residuals(qp, u, y, z);
        if (!satisfied(res, tol))
            return false;
        sol.u = std::move(u);
        sol.y = std::move(y);
        sol.z = std::move(z);
        sol.final_gap = res.gap;
        sol.primal_residual = res.primal_norm;
        sol.dual_residual = res.dual_norm;
        sol.converged = true;
        sol.polished = true;
        return true;
    }
    return false;
}

} // namespace detail

namespace detail {

inline SolverSolution path_following(const QpProblem& qp, const SolverConfig& cfg)
{
    const auto n = qp.n();
    const auto m = qp.m();
    const auto tol = detail::tolerances(qp, cfg);
    const double start = cfg.start_scale * std::max(1.0, qp.c.lpNorm<Eigen::Infinity>()) / static_cast<double>(n);

    Eigen::VectorXd u = Eigen::VectorXd::Constant(n, start);
    Eigen::VectorXd z = Eigen::VectorXd::Constant(n, start);
    Eigen::VectorXd y = Eigen::VectorXd::Zero(m);

    SolverSolution sol;
    double best_merit = std::numeric_limits<double>::infinity();
    int iter = 0;
    int extra = 0;
    while (true) {
        const auto res = detail::residuals(qp, u, y, z);
        const double mu = res.gap / static_cast<double>(n);
        const bool done = detail::satisfied(res, tol);
        const double merit = detail::merit(res, tol);
        if (done || merit < best_merit) {
            best_merit = merit;
            sol.u = u;
            sol.y = y;
            sol.z = z;
            sol.final_gap = res.gap;
            sol.primal_residual = res.primal_norm;
            sol.dual_residual = res.dual_norm;
            sol.converged = done;
        }
        if (cfg.trace)
            sol.trace.push_back({iter, mu, res.primal_norm, res.dual_norm, 0.0});
        if (done) {
            // Past the stopping test, keep tightening until the active set is clean.
            if (!cfg.polish || detail::polish(qp, tol, sol) || extra == cfg.polish_iters)
                break;
            ++extra;
        }
        if (iter == cfg.max_iters) {
            if (cfg.polish)
                detail::polish(qp, tol, sol);
            break;
        }

        const auto step = detail::newton_step(qp, u, z, res, cfg.centering_sigma * mu, cfg);
        const double alpha = std::min(detail::max_step(u, step.du, cfg.step_fraction),
                                      detail::max_step(z, step.dz, cfg.step_fraction));
        u += alpha * step.du;
        y += alpha * step.dy;
        z += alpha * step.dz;
        if (cfg.trace)
            sol.trace.back().step = alpha;
        ++iter;
    }
    sol.iterations = iter;
    return sol;
}

} // namespace detail

/// Infeasible-start primal-dual path-following method with fixed centring and
/// the fraction-to-boundary step rule. Iteration limits are reported through
/// `converged`; only a singular Newton system throws.
///
/// The objective is first divided by a power of two near max(|Q|, |c|), so
/// the tolerances act relative to the objective scale and multiplying Q and c
/// by a positive constant leaves the iterates unchanged.
inline SolverSolution solve(const QpProblem& qp, const SolverConfig& cfg = {})
{
    cfg.validate();
    const auto n = qp.n();
    const auto m = qp.m();
    if (n == 0 || qp.Q.rows() != n || qp.Q.cols() != n || qp.A.rows() != m || qp.A.cols() != n ||
        qp.b.size() != m)
        throw Error(ErrorCode::DimensionMismatch, "inconsistent QP dimensions");

    const double size = std::max(qp.Q.cwiseAbs().maxCoeff(), qp.c.lpNorm<Eigen::Infinity>());
    const double scale = size > 0.0 && std::isfinite(size) ? std::ldexp(1.0, std::ilogb(size)) : 1.0;
    QpProblem normalized = qp;
    normalized.Q /= scale;
    normalized.c /= scale;
    normalized.constant_term /= scale;
    if (normalized.split_block)
        *normalized.split_block /= scale;

    auto sol = detail::path_following(normalized, cfg);
    sol.y *= scale;
    sol.z *= scale;
    sol.final_gap *= scale;
    sol.dual_residual *= scale;
    for (auto& row : sol.trace) {
        row.mu *= scale;
        row.dual_residual *= scale;
    }
    sol.objective = qp.objective(sol.u);
    return sol;
}

inline void write_trace_csv(std::ostream& out, const SolverSolution& sol)
{
    out << "iteration,mu,primal_residual,dual_residual,step\n";
    for (const auto& row : sol.trace)
        out << row.iteration << ',' << io::format_double(row.mu) << ',' << io::format_double(row.primal_residual)
            << ',' << io::format_double(row.dual_residual) << ',' << io::format_double(row.step) << '\n';
}

} // namespace chsa
