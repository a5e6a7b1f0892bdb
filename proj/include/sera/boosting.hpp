#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "sera/matrix.hpp"
#include "sera/sera_metric.hpp"

namespace sera {

struct Hyperparams {
    int nrounds = 250;
    int max_depth = 3;
    double eta = 0.1;
    double lambda = 1.0;           // leaf L2 regularization
    double gamma = 0.0;            // split-gain threshold
    double min_child_weight = 1e-6; // minimum hessian sum per child

    void validate() const;
};

enum class ObjectiveKind { Mse, Sera };

std::string to_string(ObjectiveKind kind);

// Pluggable second-order objective. The SERA variant carries per-instance
// weights aligned with the training set.
struct Objective {
    ObjectiveKind kind = ObjectiveKind::Mse;
    SeraWeights weights;

    static Objective mse() { return {}; }
    static Objective sera(SeraWeights w) {
        return {ObjectiveKind::Sera, std::move(w)};
    }
};

struct TreeNode {
    int feature = -1; // -1 marks a leaf
    double threshold = 0.0;
    int left = -1;
    int right = -1;
    double value = 0.0;

    bool is_leaf() const { return feature < 0; }
};

struct RegressionTree {
    std::vector<TreeNode> nodes; // nodes[0] is the root

    double predict(std::span<const double> row) const;
};

struct GbmModel {
    double base_score = 0.0;
    double eta = 0.1;
    ObjectiveKind objective_kind = ObjectiveKind::Mse;
    std::vector<std::string> feature_names;
    std::vector<RegressionTree> trees;
};

// (g, h) per instance. MSE: g = yhat - y, h = 1. SERA: g = w*(yhat - y), h = w.
std::pair<std::vector<double>, std::vector<double>>
grad_hess(const Objective& objective, std::span<const double> y,
          std::span<const double> y_hat);

// Constant minimizing the objective: mean for MSE, weighted mean for SERA.
double base_score_for(const Objective& objective, std::span<const double> y);

// Newton boosting with exact greedy splits. Deterministic for fixed inputs;
// the seed is part of the contract but exact splitting uses no randomness.
GbmModel fit(const Matrix& features, std::span<const double> y,
             const Objective& objective, const Hyperparams& params,
             std::uint64_t seed, std::vector<std::string> feature_names = {});

std::vector<double> predict(const GbmModel& model, const Matrix& features);

} // namespace sera
