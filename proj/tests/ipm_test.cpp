#include "oracles.hpp"

#include <chsa/ipm.hpp>

#include <gtest/gtest.h>

#include <sstream>

namespace {

using chsa::KktRoute;
using chsa::SolverConfig;

TEST(Solve, SimplexProjectionOfOrigin)
{
    chsa::QpProblem qp;
    qp.Q = 2.0 * Eigen::MatrixXd::Identity(4, 4);
    qp.c = Eigen::VectorXd::Zero(4);
    qp.A = Eigen::MatrixXd::Ones(1, 4);
    qp.b = Eigen::VectorXd::Ones(1);
    const auto sol = chsa::solve(qp);
    ASSERT_TRUE(sol.converged);
    EXPECT_LE((sol.u - Eigen::VectorXd::Constant(4, 0.25)).lpNorm<Eigen::Infinity>(), 1e-8);
}

TEST(Solve, LinearProgramPicksCheapestVertex)
{
    chsa::QpProblem qp;
    qp.Q = Eigen::MatrixXd::Zero(3, 3);
    qp.c = Eigen::Vector3d(1.0, 2.0, 3.0);
    qp.A = Eigen::MatrixXd::Ones(1, 3);
    qp.b = Eigen::VectorXd::Ones(1);
    const auto sol = chsa::solve(qp);
    ASSERT_TRUE(sol.converged);
    EXPECT_LE((sol.u - Eigen::Vector3d(1.0, 0.0, 0.0)).lpNorm<Eigen::Infinity>(), 1e-8);
    EXPECT_NEAR(sol.objective, 1.0, 1e-8);
}

class Enumeration : public ::testing::TestWithParam<bool> {};

TEST_P(Enumeration, MatchesActiveSetOracle)
{
    SolverConfig cfg;
    cfg.polish = GetParam();
    chsa::SplitMix64 rng(31337);
    for (int t = 0; t < 50; ++t) {
        const auto k = 1 + static_cast<Eigen::Index>(rng.next() % 6);
        const auto dim = 1 + static_cast<Eigen::Index>(rng.next() % 5);
        const double gamma = std::pow(10.0, rng.uniform(-6.0, -1.0));
        const double lambda = std::pow(10.0, rng.uniform(-4.0, -1.0));
        const auto inst = chsa::oracle::random_instance(rng, dim, k, gamma, lambda);
        const auto qp = chsa::assemble(inst.x, inst.G, inst.params);
        const auto ref = chsa::oracle::enumerate_active_sets(qp);
        const auto sol = chsa::solve(qp, cfg);
        ASSERT_TRUE(sol.converged) << "instance " << t;
        EXPECT_NEAR(sol.objective, ref.objective, 1e-6 * std::max(1.0, std::abs(ref.objective))) << "instance " << t;
        const double dw = (chsa::recover_weights(sol.u) - chsa::recover_weights(ref.u)).norm();
        if (cfg.polish) {
            EXPECT_LE(dw, 1e-5) << "instance " << t;
        } else {
            // strong convexity: f(w) - f(w*) >= gamma ||w - w*||^2
            const double excess = std::max(0.0, sol.objective - ref.objective);
            EXPECT_LE(dw, std::sqrt(excess / gamma) + 1e-6) << "instance " << t;
        }
    }
}

INSTANTIATE_TEST_SUITE_P(Polish, Enumeration, ::testing::Values(true, false));

TEST(Solve, NewtonRoutesAgree)
{
    chsa::SplitMix64 rng(5);
    for (int t = 0; t < 15; ++t) {
        const auto inst = chsa::oracle::random_instance(rng, 6, 9, 1e-4, 1e-3);
        const auto qp = chsa::assemble(inst.x, inst.G, inst.params);
        std::vector<Eigen::VectorXd> weights;
        for (auto route : {KktRoute::structured, KktRoute::reduced, KktRoute::full}) {
            SolverConfig cfg;
            cfg.route = route;
            const auto sol = chsa::solve(qp, cfg);
            ASSERT_TRUE(sol.converged);
            weights.push_back(chsa::recover_weights(sol.u));
        }
        EXPECT_LE((weights[0] - weights[1]).lpNorm<Eigen::Infinity>(), 1e-7);
        EXPECT_LE((weights[0] - weights[2]).lpNorm<Eigen::Infinity>(), 1e-7);
    }
}

TEST(Solve, GapShrinksSteadily)
{
    chsa::SplitMix64 rng(8);
    for (int t = 0; t < 20; ++t) {
        const auto inst = chsa::oracle::random_instance(rng, 10, 30, 1e-6, 1e-3);
        SolverConfig cfg;
        cfg.trace = true;
        const auto sol = chsa::solve(chsa::assemble(inst.x, inst.G, inst.params), cfg);
        ASSERT_TRUE(sol.converged);
        const auto& tr = sol.trace;
        for (std::size_t i = 0; i + 20 < tr.size(); ++i)
            EXPECT_LE(tr[i + 20].mu, 0.1 * tr[i].mu) << "iteration " << i;
    }
}

TEST(Solve, StartingPointDoesNotChangeAnswer)
{
    chsa::SplitMix64 rng(12);
    for (int t = 0; t < 10; ++t) {
        const auto inst = chsa::oracle::random_instance(rng, 5, 12, 1e-5, 1e-3);
        const auto qp = chsa::assemble(inst.x, inst.G, inst.params);
        const auto base = chsa::recover_weights(chsa::solve(qp).u);
        for (double scale : {1e-3, 0.1, 10.0, 1e3}) {
            SolverConfig cfg;
            cfg.start_scale = scale;
            const auto sol = chsa::solve(qp, cfg);
            ASSERT_TRUE(sol.converged);
            EXPECT_LE((chsa::recover_weights(sol.u) - base).lpNorm<Eigen::Infinity>(), 1e-6);
        }
    }
}

TEST(Solve, RepeatedSolvesAreBitIdentical)
{
    chsa::SplitMix64 rng(3);
    const auto inst = chsa::oracle::random_instance(rng, 8, 20, 1e-6, 1e-3);
    const auto qp = chsa::assemble(inst.x, inst.G, inst.params);
    const auto a = chsa::solve(qp);
    const auto b = chsa::solve(qp);
    EXPECT_EQ(a.u, b.u);
    EXPECT_EQ(a.iterations, b.iterations);
}

TEST(Solve, SolutionSatisfiesKkt)
{
    chsa::SplitMix64 rng(21);
    for (int t = 0; t < 20; ++t) {
        const auto inst = chsa::oracle::random_instance(rng, 4, 15, 1e-6, 1e-3);
        const auto qp = chsa::assemble(inst.x, inst.G, inst.params);
        const auto sol = chsa::solve(qp);
        ASSERT_TRUE(sol.converged);
        EXPECT_GE(sol.u.minCoeff(), 0.0);
        EXPECT_GE(sol.z.minCoeff(), 0.0);
        EXPECT_NEAR(chsa::recover_weights(sol.u).sum(), 1.0, 1e-8);
        const Eigen::VectorXd dual = qp.Q * sol.u + qp.c + qp.A.transpose() * sol.y - sol.z;
        EXPECT_LE(dual.lpNorm<Eigen::Infinity>(), 1e-8 * (1.0 + qp.c.lpNorm<Eigen::Infinity>()));
        EXPECT_LE(sol.u.dot(sol.z), 1e-9 * static_cast<double>(qp.n()));
        // a weight cannot be carried on both halves at the optimum
        EXPECT_EQ(sol.u.head(15).cwiseProduct(sol.u.tail(15)).maxCoeff(), 0.0);
    }
}

TEST(Solve, TraceCsvHasOneRowPerIterate)
{
    chsa::SplitMix64 rng(6);
    const auto inst = chsa::oracle::random_instance(rng, 3, 4, 1e-6, 1e-3);
    SolverConfig cfg;
    cfg.trace = true;
    const auto sol = chsa::solve(chsa::assemble(inst.x, inst.G, inst.params), cfg);
    EXPECT_EQ(sol.trace.size(), static_cast<std::size_t>(sol.iterations) + 1);
    std::ostringstream out;
    chsa::write_trace_csv(out, sol);
    const auto text = out.str();
    EXPECT_EQ(text.rfind("iteration,mu,primal_residual,dual_residual,step\n", 0), 0u);
    EXPECT_EQ(std::count(text.begin(), text.end(), '\n'), static_cast<long>(sol.trace.size()) + 1);
}

TEST(Solve, IterationLimitIsReported)
{
    chsa::SplitMix64 rng(6);
    const auto inst = chsa::oracle::random_instance(rng, 3, 10, 1e-6, 1e-3);
    SolverConfig cfg;
    cfg.max_iters = 2;
    cfg.polish = false;
    const auto sol = chsa::solve(chsa::assemble(inst.x, inst.G, inst.params), cfg);
    EXPECT_FALSE(sol.converged);
    EXPECT_EQ(sol.iterations, 2);
}

TEST(SolverConfig, RejectsInvalidSettings)
{
    SolverConfig cfg;
    cfg.step_fraction = 1.0;
    EXPECT_THROW(cfg.validate(), chsa::Error);
    cfg = {};
    cfg.tol_gap = 0.0;
    EXPECT_THROW(cfg.validate(), chsa::Error);
    cfg = {};
    cfg.start_scale = -1.0;
    EXPECT_THROW(cfg.validate(), chsa::Error);
}

} // namespace
