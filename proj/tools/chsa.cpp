#include <chsa/chsa.hpp>

#include <CLI11.hpp>
#include <json.hpp>

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

namespace fs = std::filesystem;
using json = nlohmann::ordered_json;

namespace {

constexpr int kExitBadSpec = 2;
constexpr int kExitIo = 3;

// Thrown with the process exit code attached.
struct Failure {
    int code;
    std::string message;
};

struct RunConfig {
    std::optional<std::string> input_csv;
    std::optional<nlohmann::json> generator;
    bool pixel_table = false;
    long k = 0; // 0 selects p - 1
    double gamma = 1e-6;
    double lambda = 1e-3;
    double tol_gap = 1e-9;
    double tol_feas = 1e-8;
    double eps_neg = 1e-7;
    std::uint64_t seed = 0;
    unsigned threads = 1;
    std::string color_by = "negativity";
    std::vector<double> sweep_lambda;
    std::string oracle = "2d";
    std::string scale = "unit";
    bool log_transform = false;
    std::string out = "chsa_out";
};

template <class T>
void read_field(const nlohmann::json& j, const char* key, T& dst)
{
    if (j.contains(key))
        dst = j.at(key).get<T>();
}

RunConfig config_from_json(const nlohmann::json& j)
{
    RunConfig c;
    try {
        if (!j.is_object())
            throw Failure{kExitBadSpec, "run config must be a JSON object"};
        if (j.contains("input"))
            c.input_csv = j.at("input").get<std::string>();
        if (j.contains("generator"))
            c.generator = j.at("generator");
        read_field(j, "pixel_table", c.pixel_table);
        read_field(j, "k", c.k);
        read_field(j, "gamma", c.gamma);
        read_field(j, "lambda", c.lambda);
        read_field(j, "tol_gap", c.tol_gap);
        read_field(j, "tol_feas", c.tol_feas);
        read_field(j, "eps_neg", c.eps_neg);
        read_field(j, "seed", c.seed);
        read_field(j, "threads", c.threads);
        read_field(j, "color_by", c.color_by);
        read_field(j, "sweep_lambda", c.sweep_lambda);
        read_field(j, "oracle", c.oracle);
        read_field(j, "scale", c.scale);
        read_field(j, "log_transform", c.log_transform);
        read_field(j, "out", c.out);
    } catch (const nlohmann::json::exception& e) {
        throw Failure{kExitBadSpec, std::string("bad run config field: ") + e.what()};
    }
    return c;
}

json config_to_json(const RunConfig& c)
{
    json j;
    if (c.input_csv)
        j["input"] = *c.input_csv;
    if (c.generator)
        j["generator"] = json::parse(c.generator->dump());
    j["pixel_table"] = c.pixel_table;
    j["k"] = c.k;
    j["gamma"] = c.gamma;
    j["lambda"] = c.lambda;
    j["tol_gap"] = c.tol_gap;
    j["tol_feas"] = c.tol_feas;
    j["eps_neg"] = c.eps_neg;
    j["seed"] = c.seed;
    j["threads"] = c.threads;
    j["color_by"] = c.color_by;
    j["sweep_lambda"] = c.sweep_lambda;
    j["oracle"] = c.oracle;
    j["scale"] = c.scale;
    j["log_transform"] = c.log_transform;
    j["out"] = c.out;
    return j;
}

nlohmann::json load_json_file(const std::string& path, int code)
{
    std::ifstream in(path);
    if (!in)
        throw Failure{code, "cannot open '" + path + "'"};
    try {
        return nlohmann::json::parse(in);
    } catch (const nlohmann::json::exception& e) {
        throw Failure{code, "'" + path + "' is not valid JSON: " + e.what()};
    }
}

void validate(const RunConfig& c)
{
    if (c.input_csv.has_value() == c.generator.has_value())
        throw Failure{kExitBadSpec, "give exactly one input source (--input or --gen)"};
    if (c.k < 0)
        throw Failure{kExitBadSpec, "--k must be non-negative"};
    if (!(c.gamma >= 0.0) || !(c.lambda >= 0.0))
        throw Failure{kExitBadSpec, "--gamma and --lambda must be non-negative"};
    if (!(c.tol_gap > 0.0) || !(c.tol_feas > 0.0) || !(c.eps_neg > 0.0))
        throw Failure{kExitBadSpec, "tolerances must be positive"};
    for (double l : c.sweep_lambda)
        if (!(l >= 0.0))
            throw Failure{kExitBadSpec, "sweep values must be non-negative"};
    if (c.color_by != "negativity" && c.color_by != "norm-rank")
        throw Failure{kExitBadSpec, "--color-by must be negativity or norm-rank"};
    if (c.oracle != "2d" && c.oracle != "lp")
        throw Failure{kExitBadSpec, "--oracle must be 2d or lp"};
    if (c.scale != "unit" && c.scale != "global" && c.scale != "none")
        throw Failure{kExitBadSpec, "--scale must be unit, global or none"};
}

chsa::PointCloud load_cloud(RunConfig& c)
{
    if (c.generator) {
        try {
            auto spec = chsa::gen_spec_from_json(*c.generator);
            return chsa::gen(spec);
        } catch (const chsa::Error& e) {
            throw Failure{kExitBadSpec, e.what()};
        }
    }
    try {
        return chsa::io::read_cloud_file(*c.input_csv, c.pixel_table);
    } catch (const chsa::Error& e) {
        throw Failure{kExitIo, e.what()};
    }
}

chsa::PointCloud prepare(const RunConfig& c, chsa::PointCloud cloud)
{
    try {
        if (c.log_transform)
            cloud = chsa::log_transform(cloud);
    } catch (const chsa::Error& e) {
        throw Failure{kExitBadSpec, e.what()};
    }
    if (c.scale == "unit")
        cloud = chsa::scale_unit(cloud).first;
    else if (c.scale == "global")
        cloud = chsa::scale_unit(cloud, chsa::ScaleMode::global).first;
    return cloud;
}

chsa::SolverConfig solver_config(const RunConfig& c)
{
    chsa::SolverConfig s;
    s.tol_gap = c.tol_gap;
    s.tol_feas = c.tol_feas;
    return s;
}

chsa::StratifyOptions stratify_options(const RunConfig& c)
{
    chsa::StratifyOptions o;
    o.threads = c.threads;
    o.eps_neg = c.eps_neg;
    o.seed = c.seed;
    return o;
}

Eigen::Index resolve_k(const RunConfig& c, const chsa::PointCloud& cloud)
{
    const Eigen::Index k = c.k == 0 ? cloud.size() - 1 : c.k;
    if (k > cloud.size() - 1)
        throw Failure{kExitBadSpec, "--k " + std::to_string(k) + " exceeds p - 1 = " + std::to_string(cloud.size() - 1)};
    return k;
}

std::ofstream open_output(const fs::path& path)
{
    std::ofstream out(path, std::ios::binary);
    if (!out)
        throw Failure{kExitIo, "cannot write '" + path.string() + "'"};
    return out;
}

fs::path make_out_dir(const RunConfig& c)
{
    std::error_code ec;
    fs::create_directories(c.out, ec);
    if (ec)
        throw Failure{kExitIo, "cannot create output directory '" + c.out + "': " + ec.message()};
    open_output(fs::path(c.out) / "run_config.json") << config_to_json(c).dump(2) << '\n';
    return c.out;
}

void write_report_files(const fs::path& dir, const RunConfig& c, const chsa::PointCloud& cloud,
                        const chsa::StratificationReport& report, const std::string& title)
{
    std::error_code ec;
    fs::create_directories(dir, ec);
    if (ec)
        throw Failure{kExitIo, "cannot create '" + dir.string() + "': " + ec.message()};
    open_output(dir / "report.json") << chsa::io::report_to_json(report).dump(2) << '\n';
    auto csv = open_output(dir / "report.csv");
    chsa::io::write_report_csv(csv, report);
    chsa::svg::PlotOptions opt;
    opt.color_by = c.color_by == "norm-rank" ? chsa::svg::ColorBy::norm_rank : chsa::svg::ColorBy::negativity;
    opt.title = title;
    auto svg = open_output(dir / "plot.svg");
    chsa::svg::write_report_plot(svg, cloud, report, opt);
}

std::string join(const std::vector<Eigen::Index>& v)
{
    std::string s;
    for (std::size_t i = 0; i < v.size(); ++i)
        s += (i ? " " : "") + std::to_string(v[i]);
    return s;
}

int cmd_generate(const std::string& spec_path, const std::string& out_path, std::optional<std::uint64_t> seed)
{
    chsa::PointCloud cloud;
    try {
        auto spec = chsa::gen_spec_from_json(load_json_file(spec_path, kExitBadSpec));
        if (seed)
            spec.seed = *seed;
        cloud = chsa::gen(spec);
    } catch (const chsa::Error& e) {
        throw Failure{kExitBadSpec, e.what()};
    }
    if (out_path.empty() || out_path == "-") {
        chsa::io::write_csv(std::cout, cloud);
        return 0;
    }
    try {
        chsa::io::write_csv_file(out_path, cloud);
    } catch (const chsa::Error& e) {
        throw Failure{kExitIo, e.what()};
    }
    std::cerr << "wrote " << cloud.size() << " points to " << out_path << '\n';
    return 0;
}

int cmd_stratify(RunConfig c)
{
    validate(c);
    const auto cloud = prepare(c, load_cloud(c));
    const auto k = resolve_k(c, cloud);
    const auto out = make_out_dir(c);
    const auto solver = solver_config(c);
    const auto options = stratify_options(c);

    if (c.sweep_lambda.empty()) {
        const auto report = chsa::run_chsa(cloud, k, {c.gamma, c.lambda}, solver, options);
        write_report_files(out, c, cloud, report, "K=" + std::to_string(k));
        for (const auto& w : report.warnings)
            std::cerr << "warning: " << w << '\n';
        const auto flagged = report.flagged();
        std::cout << "points " << cloud.size() << ", K " << k << ", flagged " << flagged.size() << ": "
                  << join(flagged) << '\n';
        return 0;
    }

    std::vector<chsa::ChsaParams> grid;
    for (double l : c.sweep_lambda)
        grid.push_back({c.gamma, l});
    const auto sweep = chsa::negativity_sweep(cloud, k, grid, solver, options);
    auto counts = open_output(out / "sweep_counts.csv");
    counts << "gamma,lambda,flagged_count,flagged_indices\n";
    for (const auto& e : sweep) {
        const auto tag = chsa::io::format_double(e.params.lambda);
        write_report_files(out / ("lambda_" + tag), c, cloud, e.report, "lambda=" + tag);
        counts << chsa::io::format_double(e.params.gamma) << ',' << tag << ',' << e.flagged_count << ','
               << join(e.flagged_indices) << '\n';
        std::cout << "lambda " << tag << ": flagged " << e.flagged_count << '\n';
    }
    return 0;
}

int cmd_verify(RunConfig c)
{
    validate(c);
    const auto cloud = prepare(c, load_cloud(c));
    if (c.oracle == "2d" && cloud.dim() != 2)
        throw Failure{kExitBadSpec, "the 2d oracle needs planar data; use --oracle lp"};
    const auto k = resolve_k(c, cloud);
    const auto out = make_out_dir(c);

    const auto report = chsa::run_chsa(cloud, k, {c.gamma, c.lambda}, solver_config(c), stratify_options(c));
    const auto hull = c.oracle == "2d" ? chsa::hull_2d(cloud) : chsa::lp_vertex_set(cloud, c.threads);
    const auto flagged_vec = report.flagged();
    const std::set<Eigen::Index> flagged(flagged_vec.begin(), flagged_vec.end());

    std::vector<Eigen::Index> hits, false_pos, missed;
    std::set_intersection(flagged.begin(), flagged.end(), hull.vertex_indices.begin(), hull.vertex_indices.end(),
                          std::back_inserter(hits));
    std::set_difference(flagged.begin(), flagged.end(), hull.vertex_indices.begin(), hull.vertex_indices.end(),
                        std::back_inserter(false_pos));
    std::set_difference(hull.vertex_indices.begin(), hull.vertex_indices.end(), flagged.begin(), flagged.end(),
                        std::back_inserter(missed));
    const double precision =
        flagged.empty() ? (hull.vertex_indices.empty() ? 1.0 : 0.0)
                        : static_cast<double>(hits.size()) / static_cast<double>(flagged.size());
    const double recall = hull.vertex_indices.empty()
                              ? 1.0
                              : static_cast<double>(hits.size()) / static_cast<double>(hull.vertex_indices.size());

    const std::vector<Eigen::Index> vertices(hull.vertex_indices.begin(), hull.vertex_indices.end());
    json summary{{"oracle", c.oracle},
                 {"k", k},
                 {"precision", precision},
                 {"recall", recall},
                 {"flagged", flagged_vec},
                 {"hull_vertices", vertices},
                 {"false_positives", false_pos},
                 {"missed", missed}};
    open_output(out / "verify.json") << summary.dump(2) << '\n';
    write_report_files(out, c, cloud, report, "K=" + std::to_string(k));

    std::cout << "oracle " << c.oracle << ", K " << k << '\n'
              << "flagged " << flagged.size() << ", hull vertices " << vertices.size() << '\n'
              << "precision " << chsa::io::format_double(precision) << '\n'
              << "recall " << chsa::io::format_double(recall) << '\n';
    if (!false_pos.empty())
        std::cout << "false positives: " << join(false_pos) << '\n';
    if (!missed.empty())
        std::cout << "missed: " << join(missed) << '\n';
    return 0;
}

struct RunFlags {
    std::string config;
    std::string input;
    std::string gen;
    bool pixel_table = false;
    long k = 0;
    double gamma = 0, lambda = 0, tol_gap = 0, tol_feas = 0, eps_neg = 0;
    std::uint64_t seed = 0;
    unsigned threads = 1;
    std::string color_by, oracle, scale, out;
    std::vector<double> sweep;
    bool log_transform = false;
    std::vector<CLI::Option*> opts;
};

void add_run_flags(CLI::App* cmd, RunFlags& f, bool with_sweep)
{
    auto& o = f.opts;
    o.push_back(cmd->add_option("--config", f.config, "run config JSON; flags override its fields"));
    o.push_back(cmd->add_option("--input", f.input, "cloud file (CSV, or JSON by extension)"));
    o.push_back(cmd->add_option("--gen", f.gen, "generator spec JSON used as input"));
    o.push_back(cmd->add_flag("--pixel-table", f.pixel_table, "input CSV is a row,col,c1..cD pixel table"));
    o.push_back(cmd->add_option("--k", f.k, "neighbours per point, 0 for p - 1"));
    o.push_back(cmd->add_option("--gamma", f.gamma, "uniformity weight"));
    o.push_back(cmd->add_option("--lambda", f.lambda, "convexity weight"));
    o.push_back(cmd->add_option("--tol-gap", f.tol_gap, "complementarity tolerance"));
    o.push_back(cmd->add_option("--tol-feas", f.tol_feas, "feasibility tolerance"));
    o.push_back(cmd->add_option("--eps-neg", f.eps_neg, "negativity threshold"));
    o.push_back(cmd->add_option("--seed", f.seed, "seed (also overrides a generator seed)"));
    o.push_back(cmd->add_option("--threads", f.threads, "worker threads, 0 for all cores"));
    o.push_back(cmd->add_option("--color-by", f.color_by, "negativity or norm-rank"));
    o.push_back(with_sweep ? cmd->add_option("--sweep-lambda", f.sweep, "comma-separated lambda values")
                                 ->delimiter(',')
                           : nullptr);
    o.push_back(cmd->add_option("--oracle", f.oracle, "2d or lp"));
    o.push_back(cmd->add_option("--scale", f.scale, "unit, global or none"));
    o.push_back(cmd->add_flag("--log-transform", f.log_transform, "take logarithms before scaling"));
    o.push_back(cmd->add_option("--out", f.out, "output directory"));
}

RunConfig resolve(const RunFlags& f)
{
    RunConfig c = f.config.empty() ? RunConfig{} : config_from_json(load_json_file(f.config, kExitBadSpec));
    auto given = [&](const char* name) {
        for (auto* opt : f.opts)
            if (opt && opt->check_lname(name + 2))
                return opt->count() > 0;
        return false;
    };
    if (given("--input")) {
        c.input_csv = f.input;
        c.generator.reset();
    }
    if (given("--gen")) {
        c.generator = load_json_file(f.gen, kExitBadSpec);
        c.input_csv.reset();
    }
    if (given("--input") && given("--gen"))
        throw Failure{kExitBadSpec, "give exactly one input source (--input or --gen)"};
    if (given("--pixel-table"))
        c.pixel_table = f.pixel_table;
    if (given("--k"))
        c.k = f.k;
    if (given("--gamma"))
        c.gamma = f.gamma;
    if (given("--lambda"))
        c.lambda = f.lambda;
    if (given("--tol-gap"))
        c.tol_gap = f.tol_gap;
    if (given("--tol-feas"))
        c.tol_feas = f.tol_feas;
    if (given("--eps-neg"))
        c.eps_neg = f.eps_neg;
    if (given("--seed")) {
        c.seed = f.seed;
        if (c.generator)
            (*c.generator)["seed"] = f.seed;
    }
    if (given("--threads"))
        c.threads = f.threads;
    if (given("--color-by"))
        c.color_by = f.color_by;
    if (given("--sweep-lambda"))
        c.sweep_lambda = f.sweep;
    if (given("--oracle"))
        c.oracle = f.oracle;
    if (given("--scale"))
        c.scale = f.scale;
    if (given("--log-transform"))
        c.log_transform = f.log_transform;
    if (given("--out"))
        c.out = f.out;
    if (c.input_csv)
        c.input_csv = fs::absolute(*c.input_csv).lexically_normal().string();
    return c;
}

} // namespace

int main(int argc, char** argv)
{
    CLI::App app{"Convex hull stratification of point clouds"};
    app.require_subcommand(1);

    std::string spec_path, gen_out;
    std::uint64_t gen_seed = 0;
    auto* gen = app.add_subcommand("generate", "write a synthetic cloud described by a generator spec as CSV");
    gen->add_option("spec", spec_path, "generator spec JSON")->required();
    gen->add_option("--out", gen_out, "output CSV (default: standard output)");
    auto* gen_seed_opt = gen->add_option("--seed", gen_seed, "override the spec seed");

    RunFlags strat_flags, verify_flags;
    auto* strat = app.add_subcommand("stratify", "compute weights, negativity flags and the norm ranking");
    add_run_flags(strat, strat_flags, true);
    auto* verify = app.add_subcommand("verify", "compare flagged points with an exact vertex oracle");
    add_run_flags(verify, verify_flags, false);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e);
        return rc == 0 ? 0 : kExitBadSpec;
    }

    try {
        if (gen->parsed())
            return cmd_generate(spec_path, gen_out,
                                gen_seed_opt->count() ? std::optional<std::uint64_t>(gen_seed) : std::nullopt);
        if (strat->parsed())
            return cmd_stratify(resolve(strat_flags));
        return cmd_verify(resolve(verify_flags));
    } catch (const Failure& f) {
        std::cerr << "error: " << f.message << '\n';
        return f.code;
    } catch (const chsa::Error& e) {
        std::cerr << "error: " << to_string(e.code()) << ": " << e.what() << '\n';
        return kExitBadSpec;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
}
