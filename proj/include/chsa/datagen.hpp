#pragma once

#include <chsa/error.hpp>
#include <chsa/pointcloud.hpp>

#include <json.hpp>

#include <cmath>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace chsa {

/// SplitMix64: output k is a fixed mix of (seed + k * 0x9e3779b97f4a7c15), so
/// a stream is fully determined by the seed and the number of draws.
class SplitMix64 {
public:
    explicit SplitMix64(std::uint64_t seed) noexcept : state_(seed) {}

    std::uint64_t next() noexcept
    {
        std::uint64_t z = (state_ += 0x9e3779b97f4a7c15ULL);
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
        return z ^ (z >> 31);
    }

    /// Uniform on [0, 1) with 53 random bits.
    double uniform() noexcept { return static_cast<double>(next() >> 11) * 0x1.0p-53; }

    /// Uniform on the open interval (0, 1).
    double open_uniform() noexcept { return (static_cast<double>(next() >> 11) + 0.5) * 0x1.0p-53; }

    double uniform(double lo, double hi) noexcept { return lo + (hi - lo) * uniform(); }

    double exponential() noexcept { return -std::log(open_uniform()); }

    double logistic(double location, double scale) noexcept
    {
        const double u = open_uniform();
        return location + scale * std::log(u / (1.0 - u));
    }

private:
    std::uint64_t state_;
};

enum class GenKind {
    square_with_boundary,
    corners_plus_cluster,
    offset_cluster_with_outlier,
    logistic_plane,
    cube_with_vertices,
    simplex_mixture,
};

inline constexpr std::pair<GenKind, std::string_view> kGenKindNames[] = {
    {GenKind::square_with_boundary, "square-with-boundary"},
    {GenKind::corners_plus_cluster, "corners-plus-cluster"},
    {GenKind::offset_cluster_with_outlier, "offset-cluster-with-outlier"},
    {GenKind::logistic_plane, "logistic-plane"},
    {GenKind::cube_with_vertices, "cube-with-vertices"},
    {GenKind::simplex_mixture, "simplex-mixture"},
};

inline std::string_view to_string(GenKind kind)
{
    for (const auto& [k, name] : kGenKindNames)
        if (k == kind)
            return name;
    return "unknown";
}

inline GenKind parse_gen_kind(std::string_view name)
{
    for (const auto& [k, n] : kGenKindNames)
        if (n == name)
            return k;
    throw Error(ErrorCode::UnknownKind, "unknown generator kind '" + std::string(name) + "'");
}

/// Generator description. Unset sizes take the per-kind defaults:
///   square-with-boundary          count 50 interior, extra 10 on the edges
///   corners-plus-cluster          4 corners, count 50 in a centred box
///   offset-cluster-with-outlier   origin, count 50 in a box around (1,1)
///   logistic-plane                count 50, rescaled into [range_min, 1]
///   cube-with-vertices            count 2000 in [0,1]^dim, then the 2^dim vertices
///   simplex-mixture               vertices random in [0,1]^dim, count mixtures
struct GenSpec {
    GenKind kind = GenKind::square_with_boundary;
    std::uint64_t seed = 0;
    std::optional<int> count;
    std::optional<int> extra;
    std::optional<int> dim;
    int num_vertices = 3;
    double cluster_half_width = 0.25;
    double logistic_location = 0.5;
    double logistic_scale = 0.1;
    double range_min = 1e-8;
};

struct SimplexMixtureSpec {
    Eigen::MatrixXd vertices; ///< D x N, one vertex per column
    int num_samples = 1000;
    std::uint64_t seed = 0;
};

struct SimplexMixture {
    PointCloud cloud;             ///< vertices first, then mixtures
    Eigen::MatrixXd abundances;   ///< N x p; column j holds the coefficients of point j
    std::vector<std::string> warnings;
};

/// Abundances uniform on the simplex via normalised exponentials.
inline Eigen::VectorXd sample_simplex(SplitMix64& rng, Eigen::Index n)
{
    Eigen::VectorXd a(n);
    for (Eigen::Index i = 0; i < n; ++i)
        a(i) = rng.exponential();
    return a / a.sum();
}

inline Eigen::MatrixXd random_vertices(SplitMix64& rng, Eigen::Index dim, Eigen::Index n)
{
    Eigen::MatrixXd v(dim, n);
    for (Eigen::Index j = 0; j < n; ++j)
        for (Eigen::Index d = 0; d < dim; ++d)
            v(d, j) = rng.uniform();
    return v;
}

inline SimplexMixture gen_simplex_mixture(const SimplexMixtureSpec& spec)
{
    const auto n = spec.vertices.cols();
    const auto dim = spec.vertices.rows();
    if (n < 2)
        throw Error(ErrorCode::InvalidSpec, "a simplex mixture needs at least 2 vertices");
    if (spec.num_samples < 1)
        throw Error(ErrorCode::InvalidSpec, "num_samples must be at least 1");

    SimplexMixture out;
    const Eigen::MatrixXd edges = spec.vertices.rightCols(n - 1).colwise() - spec.vertices.col(0);
    if (Eigen::FullPivLU<Eigen::MatrixXd>(edges).rank() < n - 1)
        out.warnings.emplace_back("DegenerateVertices: vertices are affinely dependent");

    const auto p = n + spec.num_samples;
    Eigen::MatrixXd pts(dim, p);
    out.abundances = Eigen::MatrixXd::Zero(n, p);
    std::vector<std::string> labels;
    labels.reserve(static_cast<std::size_t>(p));
    for (Eigen::Index j = 0; j < n; ++j) {
        pts.col(j) = spec.vertices.col(j);
        out.abundances(j, j) = 1.0;
        labels.emplace_back("vertex");
    }
    SplitMix64 rng(spec.seed);
    for (Eigen::Index s = 0; s < spec.num_samples; ++s) {
        const Eigen::VectorXd a = sample_simplex(rng, n);
        pts.col(n + s) = spec.vertices * a;
        out.abundances.col(n + s) = a;
        labels.emplace_back("mixture");
    }
    out.cloud = PointCloud(std::move(pts), std::move(labels));
    return out;
}

namespace detail {

inline int positive(std::optional<int> v, int fallback, const char* name)
{
    const int value = v.value_or(fallback);
    if (value < 1)
        throw Error(ErrorCode::InvalidSpec, std::string(name) + " must be at least 1");
    return value;
}

} // namespace detail

/// Simplex-mixture spec with seeded random vertices in [0,1]^dim. The vertex
/// draws come first in the stream, the abundance draws use seed + 1.
inline SimplexMixture gen_simplex_mixture(const GenSpec& spec)
{
    SplitMix64 rng(spec.seed);
    const int dim = detail::positive(spec.dim, 20, "dim");
    if (spec.num_vertices < 2)
        throw Error(ErrorCode::InvalidSpec, "num_vertices must be at least 2");
    SimplexMixtureSpec mix;
    mix.vertices = random_vertices(rng, dim, spec.num_vertices);
    mix.num_samples = detail::positive(spec.count, 1000, "count");
    mix.seed = spec.seed + 1;
    return gen_simplex_mixture(mix);
}

inline PointCloud gen(const GenSpec& spec)
{
    SplitMix64 rng(spec.seed);
    std::vector<std::vector<double>> pts;
    std::vector<std::string> labels;
    auto add = [&](std::vector<double> p, const char* label) {
        pts.push_back(std::move(p));
        labels.emplace_back(label);
    };

    switch (spec.kind) {
    case GenKind::square_with_boundary: {
        const int n = detail::positive(spec.count, 50, "count");
        const int extra = detail::positive(spec.extra, 10, "extra");
        for (int i = 0; i < n; ++i) {
            const double x = rng.uniform();
            add({x, rng.uniform()}, "interior");
        }
        for (int i = 0; i < extra; ++i) {
            const auto edge = rng.next() % 4;
            const double t = rng.uniform();
            switch (edge) {
            case 0: add({t, 0.0}, "boundary"); break;
            case 1: add({1.0, t}, "boundary"); break;
            case 2: add({t, 1.0}, "boundary"); break;
            default: add({0.0, t}, "boundary"); break;
            }
        }
        break;
    }
    case GenKind::corners_plus_cluster: {
        const int n = detail::positive(spec.count, 50, "count");
        for (double y : {0.0, 1.0})
            for (double x : {0.0, 1.0})
                add({x, y}, "corner");
        const double h = spec.cluster_half_width;
        for (int i = 0; i < n; ++i) {
            const double x = rng.uniform(0.5 - h, 0.5 + h);
            add({x, rng.uniform(0.5 - h, 0.5 + h)}, "cluster");
        }
        break;
    }
    case GenKind::offset_cluster_with_outlier: {
        const int n = detail::positive(spec.count, 50, "count");
        add({0.0, 0.0}, "outlier");
        const double h = spec.cluster_half_width;
        for (int i = 0; i < n; ++i) {
            const double x = rng.uniform(1.0 - h, 1.0 + h);
            add({x, rng.uniform(1.0 - h, 1.0 + h)}, "cluster");
        }
        break;
    }
    case GenKind::logistic_plane: {
        const int n = detail::positive(spec.count, 50, "count");
        const int dim = detail::positive(spec.dim, 2, "dim");
        if (!(spec.range_min > 0.0 && spec.range_min < 1.0))
            throw Error(ErrorCode::InvalidSpec, "range_min must lie in (0, 1)");
        Eigen::MatrixXd raw(dim, n);
        for (int j = 0; j < n; ++j)
            for (int d = 0; d < dim; ++d)
                raw(d, j) = rng.logistic(spec.logistic_location, spec.logistic_scale);
        // min-max rescale each coordinate into [range_min, 1]
        for (int d = 0; d < dim; ++d) {
            const double lo = raw.row(d).minCoeff();
            const double span = raw.row(d).maxCoeff() - lo;
            for (int j = 0; j < n; ++j)
                raw(d, j) = span > 0.0 ? spec.range_min + (1.0 - spec.range_min) * (raw(d, j) - lo) / span : 1.0;
        }
        return PointCloud(std::move(raw), std::vector<std::string>(static_cast<std::size_t>(n), "sample"));
    }
    case GenKind::cube_with_vertices: {
        const int n = detail::positive(spec.count, 2000, "count");
        const int dim = detail::positive(spec.dim, 3, "dim");
        if (dim > 16)
            throw Error(ErrorCode::InvalidSpec, "cube dimension above 16 is not supported");
        for (int i = 0; i < n; ++i) {
            std::vector<double> p(static_cast<std::size_t>(dim));
            for (auto& v : p)
                v = rng.uniform();
            add(std::move(p), "interior");
        }
        for (unsigned corner = 0; corner < (1u << dim); ++corner) {
            std::vector<double> p(static_cast<std::size_t>(dim));
            for (int d = 0; d < dim; ++d)
                p[static_cast<std::size_t>(d)] = (corner >> d) & 1u ? 1.0 : 0.0;
            add(std::move(p), "inserted-vertex");
        }
        break;
    }
    case GenKind::simplex_mixture:
        return gen_simplex_mixture(spec).cloud;
    }
    return PointCloud::from_rows(pts, std::move(labels));
}

/// Reads {"kind": ..., "seed": ..., optional size fields} into a GenSpec.
inline GenSpec gen_spec_from_json(const nlohmann::json& j)
{
    if (!j.is_object() || !j.contains("kind") || !j["kind"].is_string())
        throw Error(ErrorCode::InvalidSpec, "generator spec needs a string \"kind\"");
    GenSpec spec;
    spec.kind = parse_gen_kind(j["kind"].get<std::string>());
    try {
        spec.seed = j.value("seed", std::uint64_t{0});
        if (j.contains("count"))
            spec.count = j["count"].get<int>();
        if (j.contains("extra"))
            spec.extra = j["extra"].get<int>();
        if (j.contains("dim"))
            spec.dim = j["dim"].get<int>();
        spec.num_vertices = j.value("num_vertices", spec.num_vertices);
        spec.cluster_half_width = j.value("cluster_half_width", spec.cluster_half_width);
        spec.logistic_location = j.value("logistic_location", spec.logistic_location);
        spec.logistic_scale = j.value("logistic_scale", spec.logistic_scale);
        spec.range_min = j.value("range_min", spec.range_min);
    } catch (const nlohmann::json::exception& e) {
        throw Error(ErrorCode::InvalidSpec, std::string("bad generator field: ") + e.what());
    }
    return spec;
}

inline nlohmann::json gen_spec_to_json(const GenSpec& spec)
{
    nlohmann::json j{{"kind", to_string(spec.kind)}, {"seed", spec.seed}};
    if (spec.count)
        j["count"] = *spec.count;
    if (spec.extra)
        j["extra"] = *spec.extra;
    if (spec.dim)
        j["dim"] = *spec.dim;
    j["num_vertices"] = spec.num_vertices;
    j["cluster_half_width"] = spec.cluster_half_width;
    j["logistic_location"] = spec.logistic_location;
    j["logistic_scale"] = spec.logistic_scale;
    j["range_min"] = spec.range_min;
    return j;
}

} // namespace chsa
