#pragma once

#include <chsa/analysis.hpp>
#include <chsa/io.hpp>
#include <chsa/stratify.hpp>

#include <algorithm>
#include <cstdio>
#include <ostream>
#include <string>
#include <vector>

namespace chsa::svg {

enum class ColorBy { negativity, norm_rank };

struct PlotOptions {
    ColorBy color_by = ColorBy::negativity;
    int width = 640;
    int height = 640;
    int margin = 48;
    double marker_radius = 3.5;
    std::string title;
};

/// Cyan for points with a negative weight, black otherwise.
inline std::vector<std::string> negativity_colors(const StratificationReport& report)
{
    std::vector<std::string> out;
    out.reserve(report.records.size());
    for (const auto& r : report.records)
        out.emplace_back(r.has_negative ? "#00ffff" : "#000000");
    return out;
}

/// Yellow (smallest norm) to red (largest norm) by rank position.
inline std::vector<std::string> rank_colors(const StratificationReport& report)
{
    const auto p = report.records.size();
    std::vector<std::string> out;
    out.reserve(p);
    for (const auto& r : report.records) {
        const double t = p > 1 && r.rank >= 0 ? static_cast<double>(r.rank) / static_cast<double>(p - 1) : 1.0;
        char buf[8];
        std::snprintf(buf, sizeof(buf), "#ff%02x00", static_cast<int>(std::lround(255.0 * t)));
        out.emplace_back(buf);
    }
    return out;
}

namespace detail {

inline std::string escape(const std::string& s)
{
    std::string out;
    for (char ch : s) {
        switch (ch) {
        case '&': out += "&amp;"; break;
        case '<': out += "&lt;"; break;
        case '>': out += "&gt;"; break;
        case '"': out += "&quot;"; break;
        default: out += ch;
        }
    }
    return out;
}

inline std::string num(double v)
{
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.3f", v);
    return buf;
}

} // namespace detail

/// SVG 1.1 scatter plot of 2 x p coordinates, one circle per point.
inline void write_scatter(std::ostream& out, const Eigen::MatrixXd& coords, const std::vector<std::string>& colors,
                          const PlotOptions& opt = {})
{
    const auto p = coords.cols();
    double xmin = coords.row(0).minCoeff(), xmax = coords.row(0).maxCoeff();
    double ymin = coords.row(1).minCoeff(), ymax = coords.row(1).maxCoeff();
    if (xmax - xmin <= 0.0) {
        xmin -= 0.5;
        xmax += 0.5;
    }
    if (ymax - ymin <= 0.0) {
        ymin -= 0.5;
        ymax += 0.5;
    }
    const double plot_w = opt.width - 2.0 * opt.margin;
    const double plot_h = opt.height - 2.0 * opt.margin;
    auto sx = [&](double x) { return opt.margin + (x - xmin) / (xmax - xmin) * plot_w; };
    auto sy = [&](double y) { return opt.height - opt.margin - (y - ymin) / (ymax - ymin) * plot_h; };

    out << "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n"
        << "<svg xmlns=\"http://www.w3.org/2000/svg\" version=\"1.1\" width=\"" << opt.width << "\" height=\""
        << opt.height << "\" viewBox=\"0 0 " << opt.width << ' ' << opt.height << "\">\n"
        << "<rect x=\"0\" y=\"0\" width=\"" << opt.width << "\" height=\"" << opt.height << "\" fill=\"#ffffff\"/>\n"
        << "<rect x=\"" << opt.margin << "\" y=\"" << opt.margin << "\" width=\"" << detail::num(plot_w)
        << "\" height=\"" << detail::num(plot_h) << "\" fill=\"none\" stroke=\"#888888\"/>\n";
    if (!opt.title.empty())
        out << "<text x=\"" << opt.width / 2 << "\" y=\"" << opt.margin / 2
            << "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"14\">" << detail::escape(opt.title)
            << "</text>\n";
    out << "<text x=\"" << opt.margin << "\" y=\"" << opt.height - opt.margin / 3
        << "\" font-family=\"sans-serif\" font-size=\"10\">" << detail::num(xmin) << " .. " << detail::num(xmax)
        << " x " << detail::num(ymin) << " .. " << detail::num(ymax) << "</text>\n";
    out << "<g stroke=\"#333333\" stroke-width=\"0.4\">\n";
    for (Eigen::Index j = 0; j < p; ++j) {
        const auto& color = colors.empty() ? std::string("#000000") : colors[static_cast<std::size_t>(j)];
        out << "<circle cx=\"" << detail::num(sx(coords(0, j))) << "\" cy=\"" << detail::num(sy(coords(1, j)))
            << "\" r=\"" << detail::num(opt.marker_radius) << "\" fill=\"" << color << "\"/>\n";
    }
    out << "</g>\n</svg>\n";
}

/// Plots a report: planar clouds directly, higher dimensions through pca_2d.
inline void write_report_plot(std::ostream& out, const PointCloud& cloud, const StratificationReport& report,
                              const PlotOptions& opt = {})
{
    Eigen::MatrixXd coords;
    if (cloud.dim() == 2) {
        coords = cloud.points();
    } else if (cloud.dim() == 1) {
        coords = Eigen::MatrixXd::Zero(2, cloud.size());
        coords.row(0) = cloud.points().row(0);
    } else {
        coords = pca_2d(cloud).coords;
    }
    const auto colors = opt.color_by == ColorBy::negativity ? negativity_colors(report) : rank_colors(report);
    write_scatter(out, coords, colors, opt);
}

} // namespace chsa::svg
