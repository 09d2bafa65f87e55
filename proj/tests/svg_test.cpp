#include <chsa/datagen.hpp>
#include <chsa/svg.hpp>

#include <gtest/gtest.h>

#include <sstream>

namespace {

std::size_t count(const std::string& hay, const std::string& needle)
{
    std::size_t n = 0;
    for (auto pos = hay.find(needle); pos != std::string::npos; pos = hay.find(needle, pos + 1))
        ++n;
    return n;
}

TEST(Svg, OneCirclePerPoint)
{
    chsa::GenSpec spec;
    spec.kind = chsa::GenKind::corners_plus_cluster;
    const auto cloud = chsa::gen(spec);
    const auto report = chsa::run_chsa(cloud, 8, {}, {});
    for (auto by : {chsa::svg::ColorBy::negativity, chsa::svg::ColorBy::norm_rank}) {
        std::ostringstream out;
        chsa::svg::PlotOptions opt;
        opt.color_by = by;
        opt.title = "a < b & c";
        chsa::svg::write_report_plot(out, cloud, report, opt);
        const auto s = out.str();
        EXPECT_EQ(count(s, "<circle"), static_cast<std::size_t>(cloud.size()));
        EXPECT_EQ(count(s, "<svg"), 1u);
        EXPECT_EQ(count(s, "</svg>"), 1u);
        EXPECT_NE(s.find("a &lt; b &amp; c"), std::string::npos);
    }
}

TEST(Svg, ColoursFollowReport)
{
    chsa::StratificationReport report;
    report.records.resize(3);
    report.records[1].has_negative = true;
    report.records[0].l2_norm = 3.0;
    report.records[1].l2_norm = 2.0;
    report.records[2].l2_norm = 1.0;
    chsa::rank_by_norm(report);
    EXPECT_EQ(chsa::svg::negativity_colors(report), (std::vector<std::string>{"#000000", "#00ffff", "#000000"}));
    EXPECT_EQ(chsa::svg::rank_colors(report), (std::vector<std::string>{"#ff0000", "#ff8000", "#ffff00"}));
}

TEST(Svg, HigherDimensionsGoThroughProjection)
{
    chsa::GenSpec spec;
    spec.kind = chsa::GenKind::cube_with_vertices;
    spec.count = 30;
    const auto cloud = chsa::gen(spec);
    const auto report = chsa::run_chsa(cloud, 6, {}, {});
    std::ostringstream out;
    chsa::svg::write_report_plot(out, cloud, report);
    EXPECT_EQ(count(out.str(), "<circle"), 38u);
}

} // namespace
