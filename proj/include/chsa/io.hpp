#pragma once

#include <chsa/error.hpp>
#include <chsa/pointcloud.hpp>

#include <json.hpp>

#include <charconv>
#include <fstream>
#include <istream>
#include <optional>
#include <ostream>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

namespace chsa::io {

/// Shortest round-trip decimal form of a double.
inline std::string format_double(double v)
{
    char buf[32];
    auto res = std::to_chars(buf, buf + sizeof(buf), v);
    return std::string(buf, res.ptr);
}

namespace detail {

inline std::string_view trim(std::string_view s)
{
    while (!s.empty() && (s.front() == ' ' || s.front() == '\t'))
        s.remove_prefix(1);
    while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r'))
        s.remove_suffix(1);
    return s;
}

inline std::optional<double> parse_double(std::string_view s)
{
    s = trim(s);
    if (!s.empty() && s.front() == '+')
        s.remove_prefix(1);
    double v = 0.0;
    auto res = std::from_chars(s.data(), s.data() + s.size(), v);
    if (s.empty() || res.ec != std::errc{} || res.ptr != s.data() + s.size())
        return std::nullopt;
    return v;
}

inline std::vector<std::string> split_csv_line(std::string_view line)
{
    std::vector<std::string> out;
    std::size_t start = 0;
    while (true) {
        auto pos = line.find(',', start);
        out.emplace_back(trim(line.substr(start, pos == std::string_view::npos ? pos : pos - start)));
        if (pos == std::string_view::npos)
            break;
        start = pos + 1;
    }
    return out;
}

inline std::vector<std::vector<std::string>> read_csv_rows(std::istream& in)
{
    std::vector<std::vector<std::string>> rows;
    std::string line;
    while (std::getline(in, line)) {
        if (trim(line).empty() || trim(line).front() == '#')
            continue;
        rows.push_back(split_csv_line(line));
    }
    return rows;
}

inline std::ifstream open_input(const std::string& path)
{
    std::ifstream in(path);
    if (!in)
        throw Error(ErrorCode::Io, "cannot open '" + path + "'");
    return in;
}

} // namespace detail

/// Reads one point per row with D numeric columns. A first row whose leading
/// field is not numeric is a header; a non-numeric final column is a label.
inline PointCloud read_csv(std::istream& in)
{
    auto rows = detail::read_csv_rows(in);
    if (!rows.empty() && !detail::parse_double(rows.front().front()))
        rows.erase(rows.begin());
    if (rows.empty())
        throw Error(ErrorCode::Parse, "CSV input contains no points");

    const auto width = rows.front().size();
    const bool labelled = width > 1 && !detail::parse_double(rows.front().back());
    const auto dim = labelled ? width - 1 : width;

    std::vector<std::vector<double>> pts;
    std::vector<std::string> labels;
    pts.reserve(rows.size());
    for (std::size_t r = 0; r < rows.size(); ++r) {
        const auto& row = rows[r];
        if (row.size() != width)
            throw Error(ErrorCode::Parse, "row " + std::to_string(r) + " has " + std::to_string(row.size()) +
                                              " fields, expected " + std::to_string(width));
        std::vector<double> p(dim);
        for (std::size_t d = 0; d < dim; ++d) {
            auto v = detail::parse_double(row[d]);
            if (!v)
                throw Error(ErrorCode::Parse, "row " + std::to_string(r) + ": '" + row[d] + "' is not a number");
            p[d] = *v;
        }
        pts.push_back(std::move(p));
        if (labelled)
            labels.push_back(row.back());
    }
    return PointCloud::from_rows(pts, std::move(labels));
}

inline PointCloud read_csv_file(const std::string& path)
{
    auto in = detail::open_input(path);
    return read_csv(in);
}

/// Pixel-table CSV: columns (row, col, c1..cD). Each pixel becomes a point in R^D
/// labelled "r<row>c<col>".
inline PointCloud read_pixel_table(std::istream& in)
{
    auto rows = detail::read_csv_rows(in);
    if (!rows.empty() && !detail::parse_double(rows.front().front()))
        rows.erase(rows.begin());
    if (rows.empty())
        throw Error(ErrorCode::Parse, "pixel table contains no pixels");
    const auto width = rows.front().size();
    if (width < 3)
        throw Error(ErrorCode::Parse, "pixel table needs row, col and at least one channel");

    std::vector<std::vector<double>> pts;
    std::vector<std::string> labels;
    for (std::size_t r = 0; r < rows.size(); ++r) {
        const auto& row = rows[r];
        if (row.size() != width)
            throw Error(ErrorCode::Parse, "pixel row " + std::to_string(r) + " has wrong field count");
        std::vector<double> p;
        for (std::size_t c = 2; c < width; ++c) {
            auto v = detail::parse_double(row[c]);
            if (!v)
                throw Error(ErrorCode::Parse, "pixel row " + std::to_string(r) + ": bad channel value");
            p.push_back(*v);
        }
        pts.push_back(std::move(p));
        labels.push_back("r" + row[0] + "c" + row[1]);
    }
    return PointCloud::from_rows(pts, std::move(labels));
}

inline PointCloud read_pixel_table_file(const std::string& path)
{
    auto in = detail::open_input(path);
    return read_pixel_table(in);
}

/// JSON form: {"points": [[...], ...], "labels": [...]} with labels optional.
inline PointCloud from_json(const nlohmann::json& j)
{
    if (!j.is_object() || !j.contains("points") || !j["points"].is_array())
        throw Error(ErrorCode::Parse, "JSON cloud needs a \"points\" array");
    std::vector<std::vector<double>> pts;
    try {
        pts = j["points"].get<std::vector<std::vector<double>>>();
    } catch (const nlohmann::json::exception& e) {
        throw Error(ErrorCode::Parse, std::string("bad points array: ") + e.what());
    }
    std::vector<std::string> labels;
    if (j.contains("labels"))
        labels = j["labels"].get<std::vector<std::string>>();
    if (pts.empty())
        throw Error(ErrorCode::Parse, "JSON cloud contains no points");
    return PointCloud::from_rows(pts, std::move(labels));
}

inline nlohmann::json to_json(const PointCloud& cloud)
{
    nlohmann::json pts = nlohmann::json::array();
    for (Eigen::Index j = 0; j < cloud.size(); ++j) {
        nlohmann::json p = nlohmann::json::array();
        for (Eigen::Index d = 0; d < cloud.dim(); ++d)
            p.push_back(cloud.points()(d, j));
        pts.push_back(std::move(p));
    }
    nlohmann::json out{{"points", std::move(pts)}};
    if (cloud.has_labels())
        out["labels"] = cloud.labels();
    return out;
}

inline PointCloud read_json_file(const std::string& path)
{
    auto in = detail::open_input(path);
    nlohmann::json j;
    try {
        in >> j;
    } catch (const nlohmann::json::exception& e) {
        throw Error(ErrorCode::Parse, std::string("invalid JSON: ") + e.what());
    }
    return from_json(j);
}

/// Dispatches on extension: .json is JSON, anything else CSV.
inline PointCloud read_cloud_file(const std::string& path, bool pixel_table = false)
{
    if (pixel_table)
        return read_pixel_table_file(path);
    if (path.size() >= 5 && path.substr(path.size() - 5) == ".json")
        return read_json_file(path);
    return read_csv_file(path);
}

inline void write_csv(std::ostream& out, const PointCloud& cloud)
{
    for (Eigen::Index d = 0; d < cloud.dim(); ++d)
        out << (d ? "," : "") << 'x' << d;
    if (cloud.has_labels())
        out << ",label";
    out << '\n';
    for (Eigen::Index j = 0; j < cloud.size(); ++j) {
        for (Eigen::Index d = 0; d < cloud.dim(); ++d)
            out << (d ? "," : "") << format_double(cloud.points()(d, j));
        if (cloud.has_labels())
            out << ',' << cloud.label(j);
        out << '\n';
    }
}

inline void write_csv_file(const std::string& path, const PointCloud& cloud)
{
    std::ofstream out(path, std::ios::binary);
    if (!out)
        throw Error(ErrorCode::Io, "cannot write '" + path + "'");
    write_csv(out, cloud);
}

} // namespace chsa::io
