#pragma once

#include <chsa/error.hpp>

#include <Eigen/Dense>

#include <cmath>
#include <cstddef>
#include <string>
#include <utility>
#include <vector>

namespace chsa {

/// A finite cloud of p points in R^D, stored column-wise (one column per point).
/// Immutable after construction; transforms return new clouds.
class PointCloud {
public:
    PointCloud() = default;

    explicit PointCloud(Eigen::MatrixXd points, std::vector<std::string> labels = {})
        : points_(std::move(points)), labels_(std::move(labels))
    {
        if (points_.rows() < 1)
            throw Error(ErrorCode::InvalidCloud, "dimension must be at least 1");
        if (points_.cols() < 2)
            throw Error(ErrorCode::InvalidCloud, "a cloud needs at least 2 points");
        if (!labels_.empty() && labels_.size() != static_cast<std::size_t>(points_.cols()))
            throw Error(ErrorCode::InvalidCloud, "label count does not match point count");
        if (!points_.allFinite())
            throw Error(ErrorCode::InvalidCloud, "non-finite coordinate");
    }

    /// Builds a cloud from row-major point lists (one inner vector per point).
    static PointCloud from_rows(const std::vector<std::vector<double>>& rows,
                                std::vector<std::string> labels = {})
    {
        if (rows.empty())
            throw Error(ErrorCode::InvalidCloud, "no points");
        const auto dim = rows.front().size();
        Eigen::MatrixXd m(static_cast<Eigen::Index>(dim), static_cast<Eigen::Index>(rows.size()));
        for (std::size_t j = 0; j < rows.size(); ++j) {
            if (rows[j].size() != dim)
                throw Error(ErrorCode::DimensionMismatch,
                            "point " + std::to_string(j) + " has " + std::to_string(rows[j].size()) +
                                " coordinates, expected " + std::to_string(dim));
            for (std::size_t d = 0; d < dim; ++d)
                m(static_cast<Eigen::Index>(d), static_cast<Eigen::Index>(j)) = rows[j][d];
        }
        return PointCloud(std::move(m), std::move(labels));
    }

    Eigen::Index dim() const noexcept { return points_.rows(); }
    Eigen::Index size() const noexcept { return points_.cols(); }

    const Eigen::MatrixXd& points() const noexcept { return points_; }
    auto point(Eigen::Index i) const { return points_.col(i); }

    bool has_labels() const noexcept { return !labels_.empty(); }
    const std::vector<std::string>& labels() const noexcept { return labels_; }
    std::string label(Eigen::Index i) const
    {
        return labels_.empty() ? std::string{} : labels_[static_cast<std::size_t>(i)];
    }

private:
    Eigen::MatrixXd points_;
    std::vector<std::string> labels_;
};

enum class ScaleMode { per_dimension, global };

/// Affine map used by scale_unit: scaled = (x - offset) / factor.
struct ScalingRecord {
    Eigen::VectorXd offset;
    Eigen::VectorXd factor;
    double alpha = 1.0; ///< uniform factor applied on top (1 for per-dimension scaling)
    ScaleMode mode = ScaleMode::per_dimension;
};

/// Maps every dimension affinely onto [0,1]. Zero-range dimensions map to 0.
inline std::pair<PointCloud, ScalingRecord> scale_unit(const PointCloud& cloud,
                                                       ScaleMode mode = ScaleMode::per_dimension)
{
    const auto& x = cloud.points();
    ScalingRecord rec;
    rec.mode = mode;
    rec.offset = x.rowwise().minCoeff();
    Eigen::VectorXd range = x.rowwise().maxCoeff() - rec.offset;
    if (mode == ScaleMode::per_dimension) {
        rec.factor = range.unaryExpr([](double r) { return r > 0.0 ? r : 1.0; });
    } else {
        const double g = range.maxCoeff();
        rec.factor = Eigen::VectorXd::Constant(x.rows(), g > 0.0 ? g : 1.0);
        rec.alpha = 1.0 / rec.factor(0);
    }
    Eigen::MatrixXd y = (x.colwise() - rec.offset).array().colwise() / rec.factor.array();
    return {PointCloud(std::move(y), cloud.labels()), std::move(rec)};
}

inline PointCloud invert_scaling(const PointCloud& scaled, const ScalingRecord& rec)
{
    if (scaled.dim() != rec.offset.size())
        throw Error(ErrorCode::DimensionMismatch, "scaling record dimension differs from cloud");
    Eigen::MatrixXd x = (scaled.points().array().colwise() * rec.factor.array()).matrix();
    x.colwise() += rec.offset;
    return PointCloud(std::move(x), scaled.labels());
}

/// Coordinate-wise natural logarithm; every coordinate must be strictly positive.
inline PointCloud log_transform(const PointCloud& cloud)
{
    const auto& x = cloud.points();
    for (Eigen::Index j = 0; j < x.cols(); ++j)
        for (Eigen::Index d = 0; d < x.rows(); ++d)
            if (!(x(d, j) > 0.0))
                throw Error(ErrorCode::NonPositiveCoordinate,
                            "point " + std::to_string(j) + " coordinate " + std::to_string(d) +
                                " is not strictly positive");
    return PointCloud(x.array().log().matrix(), cloud.labels());
}

inline PointCloud uniform_scale(const PointCloud& cloud, double alpha)
{
    if (!(alpha > 0.0) || !std::isfinite(alpha))
        throw Error(ErrorCode::NonPositiveAlpha, "alpha must be a positive finite number");
    return PointCloud(cloud.points() * alpha, cloud.labels());
}

/// True when every coordinate lies in [-tol, 1 + tol].
inline bool is_unit_scaled(const PointCloud& cloud, double tol = 1e-12)
{
    const auto& x = cloud.points();
    return x.minCoeff() >= -tol && x.maxCoeff() <= 1.0 + tol;
}

} // namespace chsa
