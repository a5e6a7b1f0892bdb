#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "sera/boosting.hpp"
#include "sera/dataset.hpp"
#include "sera/relevance.hpp"
#include "sera/sera_metric.hpp"

namespace sera {

struct DatasetProfile {
    std::size_t n_rows = 0;
    std::size_t n_nominal = 0;
    std::size_t n_numeric = 0;
    std::size_t n_rare = 0;        // instances with phi(y) = 1
    double imbalance_ratio = 0.0;  // n_rare / n_rows * 100
    ExtremeType extreme_type = ExtremeType::Both;
};

DatasetProfile profile(const Dataset& dataset, const RelevanceFunction& phi);

struct HoldoutSplit {
    std::vector<std::size_t> train;
    std::vector<std::size_t> test;
};

// Random disjoint partition by seeded shuffle; train gets ceil(fraction * n).
HoldoutSplit holdout_split(const Dataset& dataset, double train_fraction,
                           std::uint64_t seed);

// Sort rows by relevance (seeded shuffle breaks ties), deal round-robin.
std::vector<std::vector<std::size_t>> stratified_kfold(const Dataset& train, int k,
                                                       const RelevanceFunction& phi,
                                                       std::uint64_t seed);

struct Workflow {
    std::string model_tag;
    ObjectiveKind objective_kind = ObjectiveKind::Mse;
    Hyperparams params;
};

struct CvResult {
    Workflow workflow;
    std::vector<double> fold_scores_sera;
    std::vector<double> fold_scores_mse;
    double mean_sera = 0.0;
    double mean_mse = 0.0;
};

struct GridSearchResult {
    CvResult best;
    std::vector<CvResult> all;
};

// Lowest mean CV SERA wins; ties broken by (nrounds, max_depth, eta).
// Cells run independently (optionally on max_workers threads) with seeds
// derived from (seed, workflow index, fold index).
GridSearchResult grid_search(const Dataset& train, const std::string& model_tag,
                             ObjectiveKind objective_kind,
                             std::span<const Hyperparams> grid,
                             const RelevanceFunction& phi, std::uint64_t seed,
                             int folds = 10, const RelevanceGrid& metric_grid = {},
                             unsigned max_workers = 0);

// Mean per-fold normalized score difference; negative favors the first
// (SERA-optimized) workflow.
double compute_prior(std::span<const double> fold_scores_sera_workflow,
                     std::span<const double> fold_scores_mse_workflow);

struct BayesPosterior {
    double p_left = 0.0;
    double p_rope = 0.0;
    double p_right = 0.0;
    double rope_radius = 0.01;
    int n_samples = 0;
};

inline constexpr double kBayesPriorStrength = 0.25;

// Bayesian sign test with a Dirichlet-process prior: one pseudo-observation
// at zero with the given prior strength, Monte Carlo means of the per-draw
// region masses.
BayesPosterior bayes_sign_test(std::span<const double> z, double rope_radius,
                               int n_samples, std::uint64_t seed,
                               double prior_strength = kBayesPriorStrength);

// Dense ranks from 1; exact ties share the average rank.
std::map<std::string, double> rank_models(const std::map<std::string, double>& scores,
                                          bool lower_is_better = true);

struct TurningPoint {
    std::optional<double> phi_t;
    bool holds_on_suffix = false; // inequality holds at every later nonempty cutoff
};

// Smallest grid cutoff where the SERA-optimized model's restricted SERA is
// strictly below the standard model's.
TurningPoint turning_point(std::span<const double> y, std::span<const double> yhat_sera,
                           std::span<const double> yhat_mse,
                           std::span<const double> relevances,
                           const RelevanceGrid& grid = {});

std::vector<Hyperparams> table2_grid();

struct ExperimentConfig {
    std::vector<Hyperparams> grid = table2_grid();
    int folds = 10;
    double train_fraction = 0.8;
    int grid_steps = 1000; // T
    double rope = 0.01;
    std::uint64_t seed = 0;
    std::optional<ExtremeType> extreme_type_override;
    unsigned max_workers = 0;
};

struct ObjectiveOutcome {
    CvResult best_cv;
    std::vector<CvResult> all_cv;
    double oos_mse = 0.0;
    double oos_sera = 0.0;
    std::vector<double> test_predictions;
    SeraCurve curve;
    std::string predictions_path;
    std::string curve_path;
};

struct ExperimentRecord {
    std::string dataset_name;
    DatasetProfile profile;
    ObjectiveOutcome mse;
    ObjectiveOutcome sera;
    TurningPoint turning;
    std::vector<std::size_t> test_rows;
    std::vector<double> test_y;
    std::uint64_t seed = 0;
};

// Full protocol: profile, holdout, per-objective grid search, refit, OOS
// scoring, SERA curves, turning point. Writes prediction and curve CSVs
// when out_dir is given.
ExperimentRecord run_experiment(const Dataset& dataset, const ExperimentConfig& config,
                                const std::string& dataset_name = "dataset",
                                const std::optional<std::filesystem::path>& out_dir =
                                    std::nullopt);

nlohmann::json to_json(const DatasetProfile& profile);
nlohmann::json to_json(const Hyperparams& params);
nlohmann::json to_json(const CvResult& result);
nlohmann::json to_json(const BayesPosterior& posterior);
nlohmann::json to_json(const ExperimentRecord& record);

Hyperparams hyperparams_from_json(const nlohmann::json& j);
std::vector<Hyperparams> grid_from_json(const nlohmann::json& j);
void apply_config_json(ExperimentConfig& config, const nlohmann::json& j);

} // namespace sera
