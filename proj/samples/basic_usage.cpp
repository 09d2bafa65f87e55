// Flags the corners of a unit square among a central cluster and prints the
// norm ranking.
#include <chsa/chsa.hpp>

#include <iostream>

int main()
{
    chsa::GenSpec spec;
    spec.kind = chsa::GenKind::corners_plus_cluster;
    spec.seed = 7;
    const auto cloud = chsa::scale_unit(chsa::gen(spec)).first;

    chsa::ChsaParams params;
    params.gamma = 1e-6;
    params.lambda = 1e-3;
    const auto report = chsa::run_chsa(cloud, cloud.size() - 1, params, chsa::SolverConfig{});

    std::cout << "flagged:";
    for (auto i : report.flagged())
        std::cout << ' ' << i << " (" << cloud.label(i) << ')';
    std::cout << "\ntop 6 by norm:\n";
    for (std::size_t pos = 0; pos < 6; ++pos) {
        const auto& rec = report.records[static_cast<std::size_t>(report.ranking[pos])];
        std::cout << "  " << rec.index << "  norm " << rec.l2_norm << "  "
                  << chsa::stratum_label(rec.stratum, report.options.strata) << '\n';
    }
}
