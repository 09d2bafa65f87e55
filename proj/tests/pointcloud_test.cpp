#include <chsa/datagen.hpp>
#include <chsa/pointcloud.hpp>

#include <gtest/gtest.h>

#include <cmath>

namespace {

using chsa::PointCloud;

PointCloud random_cloud(std::uint64_t seed, int dim, int p, double lo, double hi)
{
    chsa::SplitMix64 rng(seed);
    Eigen::MatrixXd x(dim, p);
    for (int j = 0; j < p; ++j)
        for (int d = 0; d < dim; ++d)
            x(d, j) = rng.uniform(lo, hi);
    return PointCloud(x);
}

TEST(PointCloud, RejectsDegenerateShapes)
{
    EXPECT_THROW(PointCloud(Eigen::MatrixXd(2, 1)), chsa::Error);
    EXPECT_THROW(PointCloud(Eigen::MatrixXd(0, 3)), chsa::Error);
    EXPECT_THROW(PointCloud::from_rows({{0.0, 1.0}, {1.0}}), chsa::Error);
    Eigen::MatrixXd bad = Eigen::MatrixXd::Zero(2, 2);
    bad(0, 0) = std::nan("");
    EXPECT_THROW(PointCloud{bad}, chsa::Error);
}

TEST(ScaleUnit, EndpointsMapToZeroAndOne)
{
    const auto cloud = PointCloud::from_rows({{0.0, 10.0}, {1.0, 20.0}});
    const auto [scaled, rec] = chsa::scale_unit(cloud);
    EXPECT_EQ(scaled.points()(0, 0), 0.0);
    EXPECT_EQ(scaled.points()(1, 0), 0.0);
    EXPECT_EQ(scaled.points()(0, 1), 1.0);
    EXPECT_EQ(scaled.points()(1, 1), 1.0);
}

TEST(ScaleUnit, ZeroRangeDimensionMapsToZero)
{
    const auto cloud = PointCloud::from_rows({{5.0, 5.0}, {5.0, 7.0}});
    const auto [scaled, rec] = chsa::scale_unit(cloud);
    EXPECT_EQ(scaled.points()(0, 0), 0.0);
    EXPECT_EQ(scaled.points()(0, 1), 0.0);
    EXPECT_EQ(scaled.points()(1, 0), 0.0);
    EXPECT_EQ(scaled.points()(1, 1), 1.0);
    EXPECT_GT(rec.factor.minCoeff(), 0.0);
}

TEST(ScaleUnit, RandomCloudHitsExactBounds)
{
    for (std::uint64_t seed = 0; seed < 10; ++seed) {
        const auto cloud = random_cloud(seed, 4, 37, -3.0, 8.0);
        const auto scaled = chsa::scale_unit(cloud).first;
        for (Eigen::Index d = 0; d < 4; ++d) {
            // independent scan for the extremes
            double lo = 1e300, hi = -1e300;
            for (Eigen::Index j = 0; j < scaled.size(); ++j) {
                lo = std::min(lo, scaled.points()(d, j));
                hi = std::max(hi, scaled.points()(d, j));
            }
            EXPECT_EQ(lo, 0.0);
            EXPECT_EQ(hi, 1.0);
        }
    }
}

TEST(ScaleUnit, InverseRecoversOriginal)
{
    for (std::uint64_t seed = 0; seed < 10; ++seed) {
        const auto cloud = random_cloud(seed, 3, 25, -100.0, 1000.0);
        for (auto mode : {chsa::ScaleMode::per_dimension, chsa::ScaleMode::global}) {
            const auto [scaled, rec] = chsa::scale_unit(cloud, mode);
            const auto back = chsa::invert_scaling(scaled, rec);
            const double rel = (back.points() - cloud.points()).cwiseAbs().maxCoeff() /
                               cloud.points().cwiseAbs().maxCoeff();
            EXPECT_LE(rel, 1e-12);
        }
    }
}

TEST(ScaleUnit, GlobalModeUsesOneFactor)
{
    const auto cloud = PointCloud::from_rows({{0.0, 0.0}, {2.0, 1.0}});
    const auto [scaled, rec] = chsa::scale_unit(cloud, chsa::ScaleMode::global);
    EXPECT_DOUBLE_EQ(scaled.points()(0, 1), 1.0);
    EXPECT_DOUBLE_EQ(scaled.points()(1, 1), 0.5);
    EXPECT_DOUBLE_EQ(rec.alpha, 0.5);
}

TEST(ScaleUnit, UniformScaleThenUnitMatchesUnit)
{
    const auto cloud = random_cloud(3, 3, 20, 0.0, 1.0);
    const auto direct = chsa::scale_unit(cloud).first;
    for (double alpha : {0.1, 3.0, 1e4}) {
        const auto via = chsa::scale_unit(chsa::uniform_scale(cloud, alpha)).first;
        EXPECT_LE((via.points() - direct.points()).cwiseAbs().maxCoeff(), 1e-12);
    }
}

TEST(LogTransform, KnownValues)
{
    const auto one = chsa::log_transform(PointCloud::from_rows({{1.0, 1.0}, {M_E, M_E * M_E}}));
    EXPECT_EQ(one.points()(0, 0), 0.0);
    EXPECT_EQ(one.points()(1, 0), 0.0);
    EXPECT_NEAR(one.points()(0, 1), 1.0, 1e-15);
    EXPECT_NEAR(one.points()(1, 1), 2.0, 1e-15);
}

TEST(LogTransform, LogisticRangeLandsInExpectedInterval)
{
    chsa::GenSpec spec;
    spec.kind = chsa::GenKind::logistic_plane;
    spec.seed = 11;
    const auto logged = chsa::log_transform(chsa::gen(spec));
    // ln(1e-8) = -18.420680743952367
    EXPECT_GE(logged.points().minCoeff(), -18.421);
    EXPECT_LE(logged.points().maxCoeff(), 0.0);
    EXPECT_NEAR(logged.points().minCoeff(), -18.420680743952367, 1e-9);
}

TEST(LogTransform, RejectsNonPositive)
{
    try {
        chsa::log_transform(PointCloud::from_rows({{1.0, 0.0}, {2.0, 3.0}}));
        FAIL() << "expected NonPositiveCoordinate";
    } catch (const chsa::Error& e) {
        EXPECT_EQ(e.code(), chsa::ErrorCode::NonPositiveCoordinate);
    }
}

TEST(UniformScale, ScalesCoordinatesAndDistances)
{
    const auto cloud = PointCloud::from_rows({{1.0, 0.0}, {0.0, 3.0}, {2.0, 2.0}});
    EXPECT_EQ(chsa::uniform_scale(cloud, 1.0).points(), cloud.points());
    EXPECT_EQ(chsa::uniform_scale(cloud, 2.0).points()(0, 0), 2.0);
    const auto scaled = chsa::uniform_scale(cloud, 2.5);
    for (Eigen::Index i = 0; i < 3; ++i)
        for (Eigen::Index j = 0; j < 3; ++j)
            EXPECT_NEAR((scaled.point(i) - scaled.point(j)).norm(), 2.5 * (cloud.point(i) - cloud.point(j)).norm(),
                        1e-14);
}

TEST(UniformScale, RejectsNonPositiveAlpha)
{
    const auto cloud = PointCloud::from_rows({{1.0, 0.0}, {0.0, 3.0}});
    for (double alpha : {0.0, -1.0}) {
        try {
            chsa::uniform_scale(cloud, alpha);
            FAIL();
        } catch (const chsa::Error& e) {
            EXPECT_EQ(e.code(), chsa::ErrorCode::NonPositiveAlpha);
        }
    }
}

} // namespace
