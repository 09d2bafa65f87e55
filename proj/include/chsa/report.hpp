#pragma once

#include <chsa/io.hpp>
#include <chsa/stratify.hpp>

#include <json.hpp>

#include <cmath>
#include <ostream>
#include <string>

namespace chsa::io {

inline constexpr int kReportSchema = 1;

inline std::string_view to_string(KktRoute route)
{
    switch (route) {
    case KktRoute::automatic: return "automatic";
    case KktRoute::structured: return "structured";
    case KktRoute::reduced: return "reduced";
    case KktRoute::full: return "full";
    }
    return "automatic";
}

inline nlohmann::ordered_json solver_to_json(const SolverConfig& s)
{
    return {{"tol_gap", s.tol_gap},
            {"tol_feas", s.tol_feas},
            {"max_iters", s.max_iters},
            {"step_fraction", s.step_fraction},
            {"centering_sigma", s.centering_sigma},
            {"regularization", s.regularization},
            {"start_scale", s.start_scale},
            {"polish", s.polish},
            {"polish_iters", s.polish_iters},
            {"route", to_string(s.route)}};
}

/// Report layout (schema 1): params, warnings, per-point records with sparse
/// neighbour_index -> weight maps (exact zeros omitted), and the norm ranking.
inline nlohmann::ordered_json report_to_json(const StratificationReport& report)
{
    using json = nlohmann::ordered_json;
    json params{{"k", report.k},
                {"gamma", report.params.gamma},
                {"lambda", report.params.lambda},
                {"eps_neg", report.options.eps_neg},
                {"seed", report.options.seed},
                {"strata", report.options.strata},
                {"solver", solver_to_json(report.solver)}};

    json records = json::array();
    for (const auto& r : report.records) {
        json weights = json::object();
        for (std::size_t j = 0; j < r.weights.size(); ++j)
            if (r.weights[j] != 0.0)
                weights[std::to_string(r.neighbor_indices[j])] = r.weights[j];
        json rec{{"index", r.index},
                 {"has_negative", r.has_negative},
                 {"l2_norm", r.l2_norm},
                 {"residual", r.residual},
                 {"sum_dev", r.sum_dev},
                 {"objective", r.objective},
                 {"iterations", r.iterations},
                 {"converged", r.converged},
                 {"polished", r.polished},
                 {"degenerate_possible", r.degenerate_possible},
                 {"rank", r.rank},
                 {"stratum", stratum_label(r.stratum, report.options.strata)},
                 {"weights", std::move(weights)}};
        if (!r.error.empty())
            rec["error"] = r.error;
        records.push_back(std::move(rec));
    }

    return json{{"schema", kReportSchema},
                {"params", std::move(params)},
                {"warnings", report.warnings},
                {"flagged", report.flagged()},
                {"records", std::move(records)},
                {"ranking", report.ranking}};
}

inline void write_report_csv(std::ostream& out, const StratificationReport& report)
{
    out << "index,has_negative,l2_norm,residual,rank,converged\n";
    for (const auto& r : report.records)
        out << r.index << ',' << (r.has_negative ? 1 : 0) << ',' << format_double(r.l2_norm) << ','
            << format_double(r.residual) << ',' << r.rank << ',' << (r.converged ? 1 : 0) << '\n';
}

} // namespace chsa::io
