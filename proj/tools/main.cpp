#include <chrono>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>
#include <json.hpp>

#include "sera/dataset.hpp"
#include "sera/evaluation.hpp"
#include "sera/io_util.hpp"
#include "sera/relevance.hpp"
#include "sera/sera_metric.hpp"

namespace {

using nlohmann::json;

unsigned env_threads() {
    const char* env = std::getenv("SERA_THREADS");
    if (!env || !*env) return 0;
    const long v = std::strtol(env, nullptr, 10);
    return v > 0 ? static_cast<unsigned>(v) : 0;
}

json read_json_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw sera::ParseError("cannot open JSON file: " + path);
    json j;
    try {
        in >> j;
    } catch (const json::exception& e) {
        throw sera::ParseError("invalid JSON in " + path + ": " + e.what());
    }
    return j;
}

std::optional<sera::ExtremeType> parse_type_flag(const std::string& flag) {
    if (flag.empty()) return std::nullopt;
    const auto type = sera::extreme_type_from_string(flag);
    if (!type) throw sera::InvalidInput("unknown extreme type: " + flag);
    return type;
}

int cmd_profile(const std::string& data, const std::string& target,
                const std::string& type_flag) {
    const sera::Dataset ds = sera::load_csv(data, target);
    const sera::RelevanceFunction phi =
        sera::build_relevance(ds.target, parse_type_flag(type_flag));
    std::cout << sera::to_json(sera::profile(ds, phi)).dump(2) << "\n";
    return 0;
}

int cmd_relevance(const std::string& data, const std::string& target, int points,
                  const std::string& out, const std::string& type_flag) {
    if (points < 2) throw sera::InvalidInput("--points must be >= 2");
    const sera::Dataset ds = sera::load_csv(data, target);
    const sera::RelevanceFunction phi =
        sera::build_relevance(ds.target, parse_type_flag(type_flag));

    const auto [lo_it, hi_it] = std::minmax_element(ds.target.begin(), ds.target.end());
    const double range = *hi_it - *lo_it;
    const double lo = *lo_it - 0.1 * range;
    const double hi = *hi_it + 0.1 * range;

    std::vector<double> ys(static_cast<std::size_t>(points));
    for (int i = 0; i < points; ++i)
        ys[static_cast<std::size_t>(i)] = lo + (hi - lo) * i / (points - 1);
    sera::write_relevance_csv(out, ys, sera::evaluate_relevance(phi, ys));
    std::cout << "wrote " << out << "\n";
    return 0;
}

int cmd_tune(const std::string& data, const std::string& target,
             const std::string& objective, const std::string& grid_path, int folds,
             std::uint64_t seed) {
    const sera::Dataset ds = sera::load_csv(data, target);
    const sera::RelevanceFunction phi = sera::build_relevance(ds.target);
    std::vector<sera::Hyperparams> grid = sera::table2_grid();
    if (!grid_path.empty()) grid = sera::grid_from_json(read_json_file(grid_path));
    const sera::ObjectiveKind kind = objective == "sera" ? sera::ObjectiveKind::Sera
                                                         : sera::ObjectiveKind::Mse;

    const sera::GridSearchResult result = sera::grid_search(
        ds, "gbrt", kind, grid, phi, seed, folds, {}, env_threads());

    json j = sera::to_json(result.best);
    json all = json::array();
    for (const sera::CvResult& r : result.all) all.push_back(sera::to_json(r));
    j["all"] = std::move(all);
    std::cout << j.dump(2) << "\n";
    return 0;
}

int cmd_experiment(const std::string& data, const std::string& target,
                   const std::string& config_path, std::uint64_t seed,
                   const std::string& out_dir, const std::string& type_flag) {
    const sera::Dataset ds = sera::load_csv(data, target);
    sera::ExperimentConfig config;
    if (!config_path.empty())
        sera::apply_config_json(config, read_json_file(config_path));
    config.seed = seed;
    config.max_workers = env_threads();
    if (const auto t = parse_type_flag(type_flag)) config.extreme_type_override = t;

    const sera::ExperimentRecord record =
        sera::run_experiment(ds, config, std::filesystem::path(data).stem().string(),
                             std::filesystem::path(out_dir));
    const json j = sera::to_json(record);
    sera::atomic_write_file(std::filesystem::path(out_dir) / "record.json",
                            j.dump(2) + "\n");
    std::cout << j.dump(2) << "\n";
    return 0;
}

int cmd_compare(const std::vector<std::string>& record_paths, const std::string& metric,
                double rope, int n_samples, std::uint64_t seed) {
    if (record_paths.size() < 2)
        throw sera::InvalidInput("compare: need at least 2 records");

    std::vector<double> z;
    for (const std::string& path : record_paths) {
        const json j = read_json_file(path);
        const json& s_scores = j.at("best").at("sera").at("cv_scores").at(metric);
        const json& m_scores = j.at("best").at("mse").at("cv_scores").at(metric);
        z.push_back(sera::compute_prior(s_scores.get<std::vector<double>>(),
                                        m_scores.get<std::vector<double>>()));
    }

    const sera::BayesPosterior posterior =
        sera::bayes_sign_test(z, rope, n_samples, seed);
    json j = sera::to_json(posterior);
    j["metric"] = metric;
    j["z"] = z;
    j["seed"] = seed;
    std::cout << j.dump(2) << "\n";
    return 0;
}

int cmd_deriv_check(const std::string& data, const std::string& target,
                    std::uint64_t seed, int grid_steps) {
    using clock = std::chrono::steady_clock;
    const sera::Dataset ds = sera::load_csv(data, target);
    const sera::RelevanceFunction phi = sera::build_relevance(ds.target);
    const std::vector<double> rel = sera::evaluate_relevance(phi, ds.target);
    const sera::RelevanceGrid grid{grid_steps};

    sera::Hyperparams params;
    params.nrounds = 50;
    params.max_depth = 3;
    params.eta = 0.1;
    const sera::Objective objective =
        sera::Objective::sera(sera::sera_weights(rel, grid));
    const sera::GbmModel model =
        sera::fit(ds.features, ds.target, objective, params, seed, ds.feature_names);
    const std::vector<double> preds = sera::predict(model, ds.features);

    const auto t0 = clock::now();
    const sera::SeraWeights weights = sera::sera_weights(rel, grid);
    const std::vector<double> g_closed = sera::sera_gradient(ds.target, preds, weights);
    const std::vector<double> h_closed = sera::sera_hessian(weights);
    const auto t1 = clock::now();
    const std::vector<double> g_direct =
        sera::sera_gradient_direct(ds.target, preds, rel, grid);
    const std::vector<double> h_direct = sera::sera_hessian_direct(rel, grid);
    const auto t2 = clock::now();

    double max_g = 0.0, mean_g = 0.0, max_h = 0.0, mean_h = 0.0;
    for (std::size_t i = 0; i < preds.size(); ++i) {
        const double dg = std::fabs(g_closed[i] - g_direct[i]);
        const double dh = std::fabs(h_closed[i] - h_direct[i]);
        max_g = std::max(max_g, dg);
        max_h = std::max(max_h, dh);
        mean_g += dg;
        mean_h += dh;
    }
    mean_g /= static_cast<double>(preds.size());
    mean_h /= static_cast<double>(preds.size());

    // Central finite differences of the trapezoidal loss on a row subsample.
    const double step = 1e-5;
    const std::size_t n_fd = std::min<std::size_t>(50, preds.size());
    std::vector<double> bumped(preds);
    double max_fd = 0.0;
    for (std::size_t i = 0; i < n_fd; ++i) {
        bumped[i] = preds[i] + step;
        const double up = sera::sera_trapezoid(ds.target, bumped, rel, grid);
        bumped[i] = preds[i] - step;
        const double dn = sera::sera_trapezoid(ds.target, bumped, rel, grid);
        bumped[i] = preds[i];
        const double fd = (up - dn) / (2.0 * step);
        max_fd = std::max(max_fd,
                          std::fabs(g_closed[i] - fd) / std::max(1.0, std::fabs(fd)));
    }

    const auto seconds = [](auto dt) {
        const double s = std::chrono::duration<double>(dt).count();
        return std::round(s * 1000.0) / 1000.0;
    };
    const json j = {{"n", preds.size()},
                    {"T", grid.steps},
                    {"max_abs_grad_diff", max_g},
                    {"mean_abs_grad_diff", mean_g},
                    {"max_abs_hess_diff", max_h},
                    {"mean_abs_hess_diff", mean_h},
                    {"fd_rows", n_fd},
                    {"max_rel_grad_vs_fd", max_fd},
                    {"time_closed_s", seconds(t1 - t0)},
                    {"time_direct_s", seconds(t2 - t1)}};
    std::cout << j.dump(2) << "\n";
    return 0;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"SERA loss for imbalanced regression: relevance functions, "
                 "SERA metrics and derivatives, Newton-boosted trees, and the "
                 "CV/Bayes evaluation protocol"};
    app.require_subcommand(1);

    std::string data, target, type_flag, out, grid_path, config_path;
    std::string objective = "sera";
    std::string metric = "sera";
    std::vector<std::string> record_paths;
    int points = 200, folds = 10, n_samples = 50000, grid_steps = 1000;
    double rope = 0.01;
    std::uint64_t seed = 0;

    auto* profile = app.add_subcommand("profile", "Dataset imbalance profile");
    profile->add_option("--data", data, "CSV file")->required();
    profile->add_option("--target", target, "target column")->required();
    profile->add_option("--type", type_flag, "override extreme type: low|high|both");

    auto* relevance = app.add_subcommand("relevance", "Export the relevance curve");
    relevance->add_option("--data", data)->required();
    relevance->add_option("--target", target)->required();
    relevance->add_option("--points", points, "grid points");
    relevance->add_option("--out", out, "output CSV")->required();
    relevance->add_option("--type", type_flag);

    auto* tune = app.add_subcommand("tune", "Grid-search one objective by CV");
    tune->add_option("--data", data)->required();
    tune->add_option("--target", target)->required();
    tune->add_option("--objective", objective)
        ->check(CLI::IsMember({"mse", "sera"}));
    tune->add_option("--grid", grid_path, "grid JSON file");
    tune->add_option("--folds", folds);
    tune->add_option("--seed", seed)->required();

    auto* experiment = app.add_subcommand("experiment", "Full evaluation protocol");
    experiment->add_option("--data", data)->required();
    experiment->add_option("--target", target)->required();
    experiment->add_option("--config", config_path, "config JSON file");
    experiment->add_option("--seed", seed)->required();
    experiment->add_option("--out", out, "output directory")->required();
    experiment->add_option("--type", type_flag);

    auto* compare = app.add_subcommand("compare", "Bayes sign test over records");
    compare->add_option("--records", record_paths, "experiment record JSONs")
        ->required()
        ->expected(-2);
    compare->add_option("--metric", metric)->check(CLI::IsMember({"mse", "sera"}));
    compare->add_option("--rope", rope);
    compare->add_option("--samples", n_samples);
    compare->add_option("--seed", seed)->required();

    auto* deriv = app.add_subcommand("deriv-check", "Derivative fidelity and timing");
    deriv->add_option("--data", data)->required();
    deriv->add_option("--target", target)->required();
    deriv->add_option("--seed", seed)->required();
    deriv->add_option("--steps", grid_steps, "relevance grid steps (T)");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        std::cerr << e.what() << "\n";
        return 2;
    }

    try {
        if (profile->parsed()) return cmd_profile(data, target, type_flag);
        if (relevance->parsed())
            return cmd_relevance(data, target, points, out, type_flag);
        if (tune->parsed())
            return cmd_tune(data, target, objective, grid_path, folds, seed);
        if (experiment->parsed())
            return cmd_experiment(data, target, config_path, seed, out, type_flag);
        if (compare->parsed())
            return cmd_compare(record_paths, metric, rope, n_samples, seed);
        if (deriv->parsed()) return cmd_deriv_check(data, target, seed, grid_steps);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
