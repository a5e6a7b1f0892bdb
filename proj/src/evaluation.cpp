#include "sera/evaluation.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <numeric>
#include <random>
#include <thread>

#include "sera/io_util.hpp"

namespace sera {

using nlohmann::json;

namespace {

double mean_of(std::span<const double> xs) {
    return std::accumulate(xs.begin(), xs.end(), 0.0) / static_cast<double>(xs.size());
}

double mse_of(std::span<const double> y, std::span<const double> y_hat) {
    double sum = 0.0;
    for (std::size_t i = 0; i < y.size(); ++i) {
        const double r = y_hat[i] - y[i];
        sum += r * r;
    }
    return sum / static_cast<double>(y.size());
}

std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t a, std::uint64_t b) {
    return splitmix64(splitmix64(seed ^ splitmix64(a + 1)) + b + 1);
}

// Deterministic samplers on top of mt19937_64 (the standard pins its output,
// so results are reproducible across library implementations).
double next_uniform(std::mt19937_64& rng) {
    return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

double next_normal(std::mt19937_64& rng) {
    double u1 = next_uniform(rng);
    while (u1 <= 0.0) u1 = next_uniform(rng);
    const double u2 = next_uniform(rng);
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * 3.141592653589793 * u2);
}

// Marsaglia-Tsang, with the alpha < 1 boost.
double next_gamma(std::mt19937_64& rng, double shape) {
    if (shape < 1.0) {
        double u = next_uniform(rng);
        while (u <= 0.0) u = next_uniform(rng);
        return next_gamma(rng, shape + 1.0) * std::pow(u, 1.0 / shape);
    }
    const double d = shape - 1.0 / 3.0;
    const double c = 1.0 / std::sqrt(9.0 * d);
    while (true) {
        const double x = next_normal(rng);
        const double t = 1.0 + c * x;
        if (t <= 0.0) continue;
        const double v = t * t * t;
        double u = next_uniform(rng);
        while (u <= 0.0) u = next_uniform(rng);
        if (std::log(u) < 0.5 * x * x + d - d * v + d * std::log(v)) return d * v;
    }
}

Objective make_objective(ObjectiveKind kind, std::span<const double> relevances,
                         const RelevanceGrid& metric_grid) {
    if (kind == ObjectiveKind::Mse) return Objective::mse();
    return Objective::sera(sera_weights(relevances, metric_grid));
}

} // namespace

DatasetProfile profile(const Dataset& dataset, const RelevanceFunction& phi) {
    DatasetProfile p;
    p.n_rows = dataset.n_rows();
    p.n_nominal = dataset.nominal_map.size();
    p.n_numeric = dataset.n_numeric_features;
    for (double y : dataset.target)
        if (phi(y) >= 1.0) ++p.n_rare;
    p.imbalance_ratio =
        p.n_rows == 0 ? 0.0
                      : 100.0 * static_cast<double>(p.n_rare) /
                            static_cast<double>(p.n_rows);
    p.extreme_type = phi.extreme_type();
    return p;
}

HoldoutSplit holdout_split(const Dataset& dataset, double train_fraction,
                           std::uint64_t seed) {
    const std::size_t n = dataset.n_rows();
    if (n < 5) throw InvalidInput("holdout_split: need at least 5 rows");
    if (!(train_fraction > 0.0 && train_fraction < 1.0))
        throw InvalidInput("holdout_split: train_fraction must be in (0,1)");

    std::vector<std::size_t> idx(n);
    std::iota(idx.begin(), idx.end(), std::size_t{0});
    std::mt19937_64 rng(seed);
    std::shuffle(idx.begin(), idx.end(), rng);

    const auto n_train = static_cast<std::size_t>(
        std::ceil(train_fraction * static_cast<double>(n)));
    HoldoutSplit split;
    split.train.assign(idx.begin(), idx.begin() + static_cast<std::ptrdiff_t>(n_train));
    split.test.assign(idx.begin() + static_cast<std::ptrdiff_t>(n_train), idx.end());
    return split;
}

std::vector<std::vector<std::size_t>> stratified_kfold(const Dataset& train, int k,
                                                       const RelevanceFunction& phi,
                                                       std::uint64_t seed) {
    const std::size_t n = train.n_rows();
    if (k < 2) throw InvalidInput("stratified_kfold: k must be >= 2");
    if (n < static_cast<std::size_t>(k))
        throw InvalidInput("stratified_kfold: fewer rows than folds");

    std::vector<std::size_t> idx(n);
    std::iota(idx.begin(), idx.end(), std::size_t{0});
    std::mt19937_64 rng(seed);
    std::shuffle(idx.begin(), idx.end(), rng);

    std::vector<double> rel(n);
    for (std::size_t i = 0; i < n; ++i) rel[i] = phi(train.target[i]);
    std::stable_sort(idx.begin(), idx.end(),
                     [&](std::size_t a, std::size_t b) { return rel[a] < rel[b]; });

    std::vector<std::vector<std::size_t>> folds(static_cast<std::size_t>(k));
    for (std::size_t i = 0; i < n; ++i)
        folds[i % static_cast<std::size_t>(k)].push_back(idx[i]);
    return folds;
}

GridSearchResult grid_search(const Dataset& train, const std::string& model_tag,
                             ObjectiveKind objective_kind,
                             std::span<const Hyperparams> grid,
                             const RelevanceFunction& phi, std::uint64_t seed,
                             int folds, const RelevanceGrid& metric_grid,
                             unsigned max_workers) {
    if (grid.empty()) throw InvalidInput("grid_search: empty hyperparameter grid");
    for (const Hyperparams& p : grid) p.validate();

    const auto fold_sets = stratified_kfold(train, folds, phi, seed);
    const std::size_t n = train.n_rows();
    std::vector<std::size_t> fold_of(n);
    for (std::size_t f = 0; f < fold_sets.size(); ++f)
        for (std::size_t row : fold_sets[f]) fold_of[row] = f;

    std::vector<double> rel(n);
    for (std::size_t i = 0; i < n; ++i) rel[i] = phi(train.target[i]);

    struct Cell {
        std::size_t workflow;
        std::size_t fold;
    };
    std::vector<Cell> cells;
    for (std::size_t w = 0; w < grid.size(); ++w)
        for (std::size_t f = 0; f < fold_sets.size(); ++f) cells.push_back({w, f});

    std::vector<double> cell_sera(cells.size(), 0.0);
    std::vector<double> cell_mse(cells.size(), 0.0);

    const auto run_cell = [&](const Cell& cell, std::size_t slot) {
        std::vector<std::size_t> fit_rows;
        fit_rows.reserve(n);
        for (std::size_t i = 0; i < n; ++i)
            if (fold_of[i] != cell.fold) fit_rows.push_back(i);
        const std::vector<std::size_t>& val_rows = fold_sets[cell.fold];

        const Dataset cell_train = select_rows(train, fit_rows);
        std::vector<double> fit_rel(fit_rows.size());
        for (std::size_t i = 0; i < fit_rows.size(); ++i) fit_rel[i] = rel[fit_rows[i]];

        const Objective objective = make_objective(objective_kind, fit_rel, metric_grid);
        const GbmModel model =
            fit(cell_train.features, cell_train.target, objective, grid[cell.workflow],
                derive_seed(seed, cell.workflow, cell.fold), cell_train.feature_names);

        const Dataset cell_val = select_rows(train, val_rows);
        const std::vector<double> preds = predict(model, cell_val.features);
        std::vector<double> val_rel(val_rows.size());
        for (std::size_t i = 0; i < val_rows.size(); ++i) val_rel[i] = rel[val_rows[i]];

        cell_mse[slot] = mse_of(cell_val.target, preds);
        cell_sera[slot] = sera_trapezoid(cell_val.target, preds, val_rel, metric_grid);
    };

    if (max_workers > 1 && cells.size() > 1) {
        std::atomic<std::size_t> next{0};
        const unsigned n_threads =
            std::min<unsigned>(max_workers, static_cast<unsigned>(cells.size()));
        std::vector<std::thread> pool;
        pool.reserve(n_threads);
        for (unsigned t = 0; t < n_threads; ++t)
            pool.emplace_back([&] {
                for (std::size_t i = next.fetch_add(1); i < cells.size();
                     i = next.fetch_add(1))
                    run_cell(cells[i], i);
            });
        for (std::thread& t : pool) t.join();
    } else {
        for (std::size_t i = 0; i < cells.size(); ++i) run_cell(cells[i], i);
    }

    GridSearchResult result;
    for (std::size_t w = 0; w < grid.size(); ++w) {
        CvResult r;
        r.workflow = {model_tag, objective_kind, grid[w]};
        for (std::size_t f = 0; f < fold_sets.size(); ++f) {
            r.fold_scores_sera.push_back(cell_sera[w * fold_sets.size() + f]);
            r.fold_scores_mse.push_back(cell_mse[w * fold_sets.size() + f]);
        }
        r.mean_sera = mean_of(r.fold_scores_sera);
        r.mean_mse = mean_of(r.fold_scores_mse);
        result.all.push_back(std::move(r));
    }

    const auto tie_key = [](const Hyperparams& p) {
        return std::make_tuple(p.nrounds, p.max_depth, p.eta);
    };
    std::size_t best = 0;
    for (std::size_t w = 1; w < result.all.size(); ++w) {
        const CvResult& cand = result.all[w];
        const CvResult& cur = result.all[best];
        if (cand.mean_sera < cur.mean_sera ||
            (cand.mean_sera == cur.mean_sera &&
             tie_key(cand.workflow.params) < tie_key(cur.workflow.params)))
            best = w;
    }
    result.best = result.all[best];
    return result;
}

double compute_prior(std::span<const double> fold_scores_sera_workflow,
                     std::span<const double> fold_scores_mse_workflow) {
    const std::size_t n = fold_scores_sera_workflow.size();
    if (n == 0 || n != fold_scores_mse_workflow.size())
        throw InvalidInput("compute_prior: fold score vectors must match and be non-empty");

    double sum = 0.0;
    for (std::size_t k = 0; k < n; ++k) {
        const double denom = fold_scores_mse_workflow[k];
        if (denom == 0.0)
            throw DegenerateScore("compute_prior: zero reference score in fold " +
                                  std::to_string(k + 1));
        sum += (fold_scores_sera_workflow[k] - denom) / denom;
    }
    return sum / static_cast<double>(n);
}

BayesPosterior bayes_sign_test(std::span<const double> z, double rope_radius,
                               int n_samples, std::uint64_t seed,
                               double prior_strength) {
    if (z.empty()) throw InvalidInput("bayes_sign_test: empty prior vector");
    if (n_samples < 10000)
        throw InvalidInput("bayes_sign_test: need at least 10^4 Monte Carlo draws");
    if (!(rope_radius >= 0.0)) throw InvalidInput("bayes_sign_test: negative ROPE");
    if (!(prior_strength > 0.0))
        throw InvalidInput("bayes_sign_test: prior strength must be positive");

    // Region of each observation; the pseudo-observation at 0 sits in the ROPE.
    enum Region { Left = 0, Rope = 1, Right = 2 };
    std::vector<int> region;
    region.reserve(z.size() + 1);
    region.push_back(Rope);
    for (double zi : z)
        region.push_back(zi < -rope_radius ? Left : (zi > rope_radius ? Right : Rope));

    std::mt19937_64 rng(seed);
    double acc[3] = {0.0, 0.0, 0.0};
    std::vector<double> w(region.size());
    for (int s = 0; s < n_samples; ++s) {
        double total = 0.0;
        w[0] = next_gamma(rng, prior_strength);
        total += w[0];
        for (std::size_t i = 1; i < w.size(); ++i) {
            w[i] = next_gamma(rng, 1.0);
            total += w[i];
        }
        double mass[3] = {0.0, 0.0, 0.0};
        for (std::size_t i = 0; i < w.size(); ++i)
            mass[static_cast<std::size_t>(region[i])] += w[i];
        for (int r = 0; r < 3; ++r) acc[r] += mass[r] / total;
    }

    BayesPosterior posterior;
    posterior.p_left = acc[0] / n_samples;
    posterior.p_rope = acc[1] / n_samples;
    posterior.p_right = acc[2] / n_samples;
    posterior.rope_radius = rope_radius;
    posterior.n_samples = n_samples;
    return posterior;
}

std::map<std::string, double> rank_models(const std::map<std::string, double>& scores,
                                          bool lower_is_better) {
    if (scores.size() < 2) throw InvalidInput("rank_models: need at least 2 models");

    std::vector<std::pair<double, std::string>> order;
    order.reserve(scores.size());
    for (const auto& [name, score] : scores)
        order.emplace_back(lower_is_better ? score : -score, name);
    std::sort(order.begin(), order.end());

    std::map<std::string, double> ranks;
    std::size_t i = 0;
    while (i < order.size()) {
        std::size_t j = i;
        while (j < order.size() && order[j].first == order[i].first) ++j;
        const double avg_rank = 0.5 * static_cast<double>(i + 1 + j); // mean of i+1..j
        for (std::size_t t = i; t < j; ++t) ranks[order[t].second] = avg_rank;
        i = j;
    }
    return ranks;
}

TurningPoint turning_point(std::span<const double> y, std::span<const double> yhat_sera,
                           std::span<const double> yhat_mse,
                           std::span<const double> relevances,
                           const RelevanceGrid& grid) {
    if (y.size() != yhat_sera.size() || y.size() != yhat_mse.size() ||
        y.size() != relevances.size())
        throw InvalidInput("turning_point: length mismatch");

    const auto restricted = [&](double cutoff, std::span<const double> yhat,
                                bool& any) {
        double sum = 0.0;
        any = false;
        for (std::size_t i = 0; i < y.size(); ++i) {
            if (relevances[i] >= cutoff) {
                any = true;
                const double r = yhat[i] - y[i];
                sum += relevances[i] * r * r;
            }
        }
        return sum;
    };

    TurningPoint result;
    for (int k = 0; k <= grid.steps; ++k) {
        const double t = grid.cutoff(k);
        bool any = false;
        const double s = restricted(t, yhat_sera, any);
        const double m = restricted(t, yhat_mse, any);
        if (!any) break; // no instances left at this or any larger cutoff
        if (s < m) {
            result.phi_t = t;
            result.holds_on_suffix = true;
            for (int k2 = k + 1; k2 <= grid.steps; ++k2) {
                const double t2 = grid.cutoff(k2);
                bool any2 = false;
                const double s2 = restricted(t2, yhat_sera, any2);
                const double m2 = restricted(t2, yhat_mse, any2);
                if (!any2) break;
                if (!(s2 < m2)) {
                    result.holds_on_suffix = false;
                    break;
                }
            }
            return result;
        }
    }
    return result;
}

std::vector<Hyperparams> table2_grid() {
    std::vector<Hyperparams> grid;
    for (int nrounds : {250, 500})
        for (int depth : {3, 5, 7})
            for (double eta : {1e-3, 1e-2, 1e-1}) {
                Hyperparams p;
                p.nrounds = nrounds;
                p.max_depth = depth;
                p.eta = eta;
                grid.push_back(p);
            }
    return grid;
}

ExperimentRecord run_experiment(const Dataset& dataset, const ExperimentConfig& config,
                                const std::string& dataset_name,
                                const std::optional<std::filesystem::path>& out_dir) {
    if (config.grid.empty()) throw InvalidInput("run_experiment: empty grid");
    const RelevanceGrid metric_grid{config.grid_steps};

    ExperimentRecord record;
    record.dataset_name = dataset_name;
    record.seed = config.seed;

    const RelevanceFunction phi_full =
        build_relevance(dataset.target, config.extreme_type_override);
    record.profile = profile(dataset, phi_full);

    const HoldoutSplit split =
        holdout_split(dataset, config.train_fraction, config.seed);
    const Dataset train = select_rows(dataset, split.train);
    const Dataset test = select_rows(dataset, split.test);
    record.test_rows = split.test;
    record.test_y = test.target;

    // Fit the relevance map on the training partition only; reuse for scoring.
    const RelevanceFunction phi_train =
        build_relevance(train.target, config.extreme_type_override);
    const std::vector<double> train_rel = evaluate_relevance(phi_train, train.target);
    const std::vector<double> test_rel = evaluate_relevance(phi_train, test.target);

    for (ObjectiveKind kind : {ObjectiveKind::Mse, ObjectiveKind::Sera}) {
        const auto salt = static_cast<std::uint64_t>(kind) + 17;
        GridSearchResult gs = grid_search(train, "gbrt", kind, config.grid, phi_train,
                                          derive_seed(config.seed, salt, 0),
                                          config.folds, metric_grid,
                                          config.max_workers);

        const Objective objective = make_objective(kind, train_rel, metric_grid);
        const GbmModel model =
            fit(train.features, train.target, objective, gs.best.workflow.params,
                derive_seed(config.seed, salt, 1), train.feature_names);
        ObjectiveOutcome outcome;
        outcome.best_cv = std::move(gs.best);
        outcome.all_cv = std::move(gs.all);
        outcome.test_predictions = predict(model, test.features);
        outcome.oos_mse = mse_of(test.target, outcome.test_predictions);
        outcome.oos_sera = sera_trapezoid(test.target, outcome.test_predictions,
                                          test_rel, metric_grid);
        outcome.curve =
            sera_curve(test.target, outcome.test_predictions, test_rel, metric_grid);
        (kind == ObjectiveKind::Mse ? record.mse : record.sera) = std::move(outcome);
    }

    record.turning =
        turning_point(test.target, record.sera.test_predictions,
                      record.mse.test_predictions, test_rel, metric_grid);

    if (out_dir) {
        std::filesystem::create_directories(*out_dir);
        for (auto* outcome : {&record.mse, &record.sera}) {
            const std::string tag =
                outcome == &record.mse ? std::string("mse") : std::string("sera");
            const auto pred_path = *out_dir / ("predictions_" + tag + ".csv");
            const auto curve_path = *out_dir / ("curve_" + tag + ".csv");
            write_predictions_csv(pred_path, record.test_rows, record.test_y,
                                  outcome->test_predictions);
            write_curve_csv(curve_path, outcome->curve);
            outcome->predictions_path = pred_path.string();
            outcome->curve_path = curve_path.string();
        }
    }
    return record;
}

json to_json(const DatasetProfile& profile) {
    return {{"n_rows", profile.n_rows},
            {"n_nominal", profile.n_nominal},
            {"n_numeric", profile.n_numeric},
            {"n_rare", profile.n_rare},
            {"ir", profile.imbalance_ratio},
            {"type", to_string(profile.extreme_type)}};
}

json to_json(const Hyperparams& params) {
    return {{"nrounds", params.nrounds},
            {"max_depth", params.max_depth},
            {"eta", params.eta},
            {"lambda", params.lambda},
            {"gamma", params.gamma},
            {"min_child_weight", params.min_child_weight}};
}

json to_json(const CvResult& result) {
    return {{"model", result.workflow.model_tag},
            {"objective", to_string(result.workflow.objective_kind)},
            {"params", to_json(result.workflow.params)},
            {"fold_scores_sera", result.fold_scores_sera},
            {"fold_scores_mse", result.fold_scores_mse},
            {"mean_sera", result.mean_sera},
            {"mean_mse", result.mean_mse}};
}

json to_json(const BayesPosterior& posterior) {
    return {{"p_left", posterior.p_left},
            {"p_rope", posterior.p_rope},
            {"p_right", posterior.p_right},
            {"rope", posterior.rope_radius},
            {"n_samples", posterior.n_samples}};
}

json to_json(const ExperimentRecord& record) {
    const auto cv_block = [](const ObjectiveOutcome& o) {
        return json{{"params", to_json(o.best_cv.workflow.params)},
                    {"cv_scores",
                     {{"sera", o.best_cv.fold_scores_sera},
                      {"mse", o.best_cv.fold_scores_mse},
                      {"mean_sera", o.best_cv.mean_sera},
                      {"mean_mse", o.best_cv.mean_mse}}}};
    };
    json j = {{"dataset", record.dataset_name},
              {"profile", to_json(record.profile)},
              {"best", {{"mse", cv_block(record.mse)}, {"sera", cv_block(record.sera)}}},
              {"oos",
               {{"mse", {{"mse", record.mse.oos_mse}, {"sera", record.mse.oos_sera}}},
                {"sera",
                 {{"mse", record.sera.oos_mse}, {"sera", record.sera.oos_sera}}}}},
              {"curves",
               {{"mse", record.mse.curve_path}, {"sera", record.sera.curve_path}}},
              {"predictions",
               {{"mse", record.mse.predictions_path},
                {"sera", record.sera.predictions_path}}},
              {"seed", record.seed}};
    if (record.turning.phi_t) {
        j["turning_point"] = *record.turning.phi_t;
        j["turning_point_holds_on_suffix"] = record.turning.holds_on_suffix;
    } else {
        j["turning_point"] = nullptr;
        j["turning_point_holds_on_suffix"] = nullptr;
    }
    return j;
}

Hyperparams hyperparams_from_json(const json& j) {
    Hyperparams p;
    p.nrounds = j.value("nrounds", p.nrounds);
    p.max_depth = j.value("max_depth", p.max_depth);
    p.eta = j.value("eta", p.eta);
    p.lambda = j.value("lambda", p.lambda);
    p.gamma = j.value("gamma", p.gamma);
    p.min_child_weight = j.value("min_child_weight", p.min_child_weight);
    p.validate();
    return p;
}

std::vector<Hyperparams> grid_from_json(const json& j) {
    const json& arr = j.is_array() ? j : j.at("grid");
    if (!arr.is_array() || arr.empty())
        throw ParseError("grid JSON must be a non-empty array of parameter objects");
    std::vector<Hyperparams> grid;
    for (const json& item : arr) grid.push_back(hyperparams_from_json(item));
    return grid;
}

void apply_config_json(ExperimentConfig& config, const json& j) {
    if (j.contains("grid")) config.grid = grid_from_json(j.at("grid"));
    config.folds = j.value("folds", config.folds);
    config.train_fraction = j.value("train_fraction", config.train_fraction);
    config.grid_steps = j.value("T", config.grid_steps);
    config.rope = j.value("rope", config.rope);
    if (j.contains("seed")) config.seed = j.at("seed").get<std::uint64_t>();
    if (j.contains("extreme_type_override") && !j.at("extreme_type_override").is_null()) {
        const auto name = j.at("extreme_type_override").get<std::string>();
        const auto type = extreme_type_from_string(name);
        if (!type) throw ParseError("unknown extreme type: " + name);
        config.extreme_type_override = type;
    }
}

} // namespace sera
