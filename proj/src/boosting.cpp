#include "sera/boosting.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

namespace sera {

std::string to_string(ObjectiveKind kind) {
    return kind == ObjectiveKind::Mse ? "mse" : "sera";
}

void Hyperparams::validate() const {
    if (nrounds < 1) throw InvalidInput("Hyperparams: nrounds must be >= 1");
    if (max_depth < 1) throw InvalidInput("Hyperparams: max_depth must be >= 1");
    if (!(eta > 0.0 && eta <= 1.0)) throw InvalidInput("Hyperparams: eta must be in (0,1]");
    if (!(lambda >= 0.0)) throw InvalidInput("Hyperparams: lambda must be >= 0");
    if (!(gamma >= 0.0)) throw InvalidInput("Hyperparams: gamma must be >= 0");
    if (!(min_child_weight >= 0.0))
        throw InvalidInput("Hyperparams: min_child_weight must be >= 0");
}

std::pair<std::vector<double>, std::vector<double>>
grad_hess(const Objective& objective, std::span<const double> y,
          std::span<const double> y_hat) {
    if (y.size() != y_hat.size())
        throw InvalidInput("grad_hess: length mismatch");

    std::vector<double> g(y.size()), h(y.size());
    if (objective.kind == ObjectiveKind::Mse) {
        for (std::size_t i = 0; i < y.size(); ++i) {
            g[i] = y_hat[i] - y[i];
            h[i] = 1.0;
        }
    } else {
        if (objective.weights.size() != y.size())
            throw InvalidInput("grad_hess: SERA weights not aligned with data");
        for (std::size_t i = 0; i < y.size(); ++i) {
            g[i] = objective.weights.weights[i] * (y_hat[i] - y[i]);
            h[i] = objective.weights.weights[i];
        }
    }
    return {std::move(g), std::move(h)};
}

double base_score_for(const Objective& objective, std::span<const double> y) {
    if (y.empty()) throw InvalidInput("base_score_for: empty target");
    if (objective.kind == ObjectiveKind::Mse)
        return std::accumulate(y.begin(), y.end(), 0.0) / static_cast<double>(y.size());

    if (objective.weights.size() != y.size())
        throw InvalidInput("base_score_for: SERA weights not aligned with data");
    double num = 0.0;
    double den = 0.0;
    for (std::size_t i = 0; i < y.size(); ++i) {
        num += objective.weights.weights[i] * y[i];
        den += objective.weights.weights[i];
    }
    return num / den;
}

double RegressionTree::predict(std::span<const double> row) const {
    int i = 0;
    while (!nodes[static_cast<std::size_t>(i)].is_leaf()) {
        const TreeNode& n = nodes[static_cast<std::size_t>(i)];
        i = row[static_cast<std::size_t>(n.feature)] < n.threshold ? n.left : n.right;
    }
    return nodes[static_cast<std::size_t>(i)].value;
}

namespace {

struct BestSplit {
    int feature = -1;
    double threshold = 0.0;
    double gain = 0.0;
};

class TreeBuilder {
public:
    TreeBuilder(const Matrix& features, std::span<const double> g,
                std::span<const double> h, const Hyperparams& params)
        : x_(features), g_(g), h_(h), params_(params) {}

    RegressionTree build() {
        std::vector<std::size_t> idx(x_.rows);
        std::iota(idx.begin(), idx.end(), std::size_t{0});
        RegressionTree tree;
        grow(tree.nodes, idx, 0);
        return tree;
    }

private:
    double leaf_value(double sum_g, double sum_h) const {
        const double denom = sum_h + params_.lambda;
        return denom > 0.0 ? -sum_g / denom : 0.0;
    }

    static double score(double sum_g, double sum_h, double lambda) {
        const double denom = sum_h + lambda;
        return denom > 0.0 ? sum_g * sum_g / denom : 0.0;
    }

    BestSplit find_best_split(const std::vector<std::size_t>& idx, double sum_g,
                              double sum_h) const {
        BestSplit best;
        const double parent_score = score(sum_g, sum_h, params_.lambda);

        std::vector<std::pair<double, std::size_t>> order(idx.size());
        for (std::size_t f = 0; f < x_.cols; ++f) {
            for (std::size_t i = 0; i < idx.size(); ++i)
                order[i] = {x_.at(idx[i], f), idx[i]};
            std::sort(order.begin(), order.end());

            double left_g = 0.0;
            double left_h = 0.0;
            for (std::size_t i = 1; i < order.size(); ++i) {
                left_g += g_[order[i - 1].second];
                left_h += h_[order[i - 1].second];
                const double prev = order[i - 1].first;
                const double next = order[i].first;
                if (!(prev < next)) continue;
                if (left_h < params_.min_child_weight) continue;
                const double right_h = sum_h - left_h;
                if (right_h < params_.min_child_weight) continue;

                const double right_g = sum_g - left_g;
                const double gain =
                    0.5 * (score(left_g, left_h, params_.lambda) +
                           score(right_g, right_h, params_.lambda) - parent_score) -
                    params_.gamma;
                if (gain > best.gain) {
                    double threshold = prev + 0.5 * (next - prev);
                    if (!(prev < threshold)) threshold = next; // adjacent doubles
                    best = {static_cast<int>(f), threshold, gain};
                }
            }
        }
        return best;
    }

    int grow(std::vector<TreeNode>& nodes, const std::vector<std::size_t>& idx,
             int depth) {
        double sum_g = 0.0;
        double sum_h = 0.0;
        for (std::size_t i : idx) {
            sum_g += g_[i];
            sum_h += h_[i];
        }

        const int node_id = static_cast<int>(nodes.size());
        nodes.emplace_back();
        nodes.back().value = leaf_value(sum_g, sum_h);

        if (depth >= params_.max_depth || idx.size() < 2 || sum_h <= 0.0)
            return node_id;
        const BestSplit best = find_best_split(idx, sum_g, sum_h);
        if (best.feature < 0 || !(best.gain > 0.0)) return node_id;

        std::vector<std::size_t> left_idx;
        std::vector<std::size_t> right_idx;
        left_idx.reserve(idx.size());
        right_idx.reserve(idx.size());
        for (std::size_t i : idx) {
            if (x_.at(i, static_cast<std::size_t>(best.feature)) < best.threshold)
                left_idx.push_back(i);
            else
                right_idx.push_back(i);
        }

        const int left = grow(nodes, left_idx, depth + 1);
        const int right = grow(nodes, right_idx, depth + 1);
        TreeNode& node = nodes[static_cast<std::size_t>(node_id)];
        node.feature = best.feature;
        node.threshold = best.threshold;
        node.left = left;
        node.right = right;
        return node_id;
    }

    const Matrix& x_;
    std::span<const double> g_;
    std::span<const double> h_;
    const Hyperparams& params_;
};

} // namespace

GbmModel fit(const Matrix& features, std::span<const double> y,
             const Objective& objective, const Hyperparams& params,
             std::uint64_t /*seed*/, std::vector<std::string> feature_names) {
    params.validate();
    if (features.rows == 0 || y.empty()) throw InvalidInput("fit: empty training data");
    if (features.rows != y.size())
        throw InvalidInput("fit: feature rows do not match target length");
    if (features.rows < 2) throw InvalidInput("fit: need at least 2 rows");
    for (double v : y)
        if (!std::isfinite(v)) throw InvalidInput("fit: non-finite target value");

    GbmModel model;
    model.eta = params.eta;
    model.objective_kind = objective.kind;
    if (feature_names.empty()) {
        for (std::size_t f = 0; f < features.cols; ++f)
            model.feature_names.push_back("f" + std::to_string(f));
    } else {
        if (feature_names.size() != features.cols)
            throw InvalidInput("fit: feature name count does not match columns");
        model.feature_names = std::move(feature_names);
    }
    model.base_score = base_score_for(objective, y);

    std::vector<double> preds(y.size(), model.base_score);
    model.trees.reserve(static_cast<std::size_t>(params.nrounds));
    for (int round = 0; round < params.nrounds; ++round) {
        const auto [g, h] = grad_hess(objective, y, preds);
        RegressionTree tree = TreeBuilder(features, g, h, params).build();
        const bool stumped = tree.nodes.size() == 1; // root found no useful split
        for (std::size_t i = 0; i < preds.size(); ++i)
            preds[i] += params.eta * tree.predict(features.row(i));
        model.trees.push_back(std::move(tree));
        if (stumped) break;
    }
    return model;
}

std::vector<double> predict(const GbmModel& model, const Matrix& features) {
    if (features.cols != model.feature_names.size())
        throw InvalidInput("predict: feature count " + std::to_string(features.cols) +
                           " does not match training schema " +
                           std::to_string(model.feature_names.size()));

    std::vector<double> preds(features.rows, model.base_score);
    for (const RegressionTree& tree : model.trees)
        for (std::size_t i = 0; i < features.rows; ++i)
            preds[i] += model.eta * tree.predict(features.row(i));
    return preds;
}

} // namespace sera
