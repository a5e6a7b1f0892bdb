#include "sera/model_io.hpp"

#include <fstream>

#include "sera/io_util.hpp"

namespace sera {

using nlohmann::json;

nlohmann::json model_to_json(const GbmModel& model) {
    json trees = json::array();
    for (const RegressionTree& tree : model.trees) {
        json nodes = json::array();
        for (const TreeNode& n : tree.nodes) {
            if (n.is_leaf())
                nodes.push_back({{"value", n.value}});
            else
                nodes.push_back({{"feature", n.feature},
                                 {"threshold", n.threshold},
                                 {"left", n.left},
                                 {"right", n.right}});
        }
        trees.push_back(std::move(nodes));
    }
    return {{"format", "seraboost-gbm"},
            {"base_score", model.base_score},
            {"eta", model.eta},
            {"objective", to_string(model.objective_kind)},
            {"feature_names", model.feature_names},
            {"trees", std::move(trees)}};
}

GbmModel model_from_json(const nlohmann::json& j) {
    if (!j.is_object() || j.value("format", "") != "seraboost-gbm")
        throw ParseError("model_from_json: not a seraboost-gbm document");

    GbmModel model;
    model.base_score = j.at("base_score").get<double>();
    model.eta = j.at("eta").get<double>();
    model.objective_kind =
        j.at("objective").get<std::string>() == "sera" ? ObjectiveKind::Sera
                                                       : ObjectiveKind::Mse;
    model.feature_names = j.at("feature_names").get<std::vector<std::string>>();
    for (const json& jt : j.at("trees")) {
        RegressionTree tree;
        for (const json& jn : jt) {
            TreeNode n;
            if (jn.contains("value")) {
                n.value = jn.at("value").get<double>();
            } else {
                n.feature = jn.at("feature").get<int>();
                n.threshold = jn.at("threshold").get<double>();
                n.left = jn.at("left").get<int>();
                n.right = jn.at("right").get<int>();
            }
            tree.nodes.push_back(n);
        }
        model.trees.push_back(std::move(tree));
    }
    return model;
}

void save_model(const std::filesystem::path& path, const GbmModel& model) {
    atomic_write_file(path, model_to_json(model).dump(2) + "\n");
}

GbmModel load_model(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw ParseError("cannot open model file: " + path.string());
    json j;
    try {
        in >> j;
    } catch (const json::exception& e) {
        throw ParseError("invalid model JSON in " + path.string() + ": " + e.what());
    }
    return model_from_json(j);
}

} // namespace sera
