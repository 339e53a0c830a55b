#include <cmath>
#include <string>

#include "json.hpp"

#include "internal/math_util.hpp"
#include "spamdet/errors.hpp"
#include "spamdet/models.hpp"

namespace spamdet {

namespace {

using ordered_json = nlohmann::ordered_json;

template <class... Ts>
struct overloaded : Ts... {
    using Ts::operator()...;
};
template <class... Ts>
overloaded(Ts...) -> overloaded<Ts...>;

ordered_json nodes_to_json(const Tree& tree) {
    ordered_json out = ordered_json::array();
    for (const auto& n : tree.nodes)
        out.push_back({n.column, n.threshold, n.left, n.right, n.score});
    return out;
}

Tree nodes_from_json(const ordered_json& j, std::uint32_t dimension) {
    if (!j.is_array() || j.empty()) throw DataError("model file: tree needs at least one node");
    Tree tree;
    tree.nodes.reserve(j.size());
    for (const auto& item : j) {
        if (!item.is_array() || item.size() != 5)
            throw DataError("model file: malformed tree node");
        TreeNode n;
        n.column = item[0].get<std::int32_t>();
        n.threshold = item[1].get<double>();
        n.left = item[2].get<std::uint32_t>();
        n.right = item[3].get<std::uint32_t>();
        n.score = item[4].get<double>();
        if (n.column >= 0) {
            if (static_cast<std::uint32_t>(n.column) >= dimension)
                throw DataError("model file: node column out of range");
            if (n.left >= j.size() || n.right >= j.size())
                throw DataError("model file: node child out of range");
        }
        tree.nodes.push_back(n);
    }
    return tree;
}

} // namespace

TrainConfig logistic_defaults() { return {}; }

TrainConfig svm_defaults() {
    TrainConfig c;
    c.learning_rate = 0.05;
    return c;
}

TrainConfig decision_tree_defaults() {
    TrainConfig c;
    c.max_depth = 12;
    c.min_samples_leaf = 5;
    return c;
}

TrainConfig random_forest_defaults() {
    TrainConfig c;
    c.n_trees = 100;
    c.max_depth = 16;
    c.min_samples_leaf = 5;
    c.feature_subsample_ratio = std::nullopt;  // sqrt(V) columns per node
    c.bootstrap = true;
    return c;
}

TrainConfig gradient_boosting_defaults() {
    TrainConfig c;
    c.n_trees = 100;
    c.learning_rate = 0.1;
    c.max_depth = 4;
    c.min_samples_leaf = 5;
    return c;
}

double TrainedModel::predict(const SparseVector& row) const {
    if (row.dimension != dimension)
        throw DataError("predict: row dimension does not match the model");
    return std::visit(
        overloaded{
            [&](const LinearModel& m) {
                double z = m.bias;
                for (const auto& e : row.entries) z += e.value * m.weights[e.index];
                return detail::stable_sigmoid(z);
            },
            [&](const Tree& t) { return t.predict(row); },
            [&](const Ensemble& e) {
                if (e.kind == Ensemble::Kind::bagged) {
                    double total = 0.0;
                    for (const auto& t : e.trees) total += t.predict(row);
                    return total / static_cast<double>(e.trees.size());
                }
                double z = e.base_score;
                for (const auto& t : e.trees) z += e.learning_rate * t.predict(row);
                return detail::stable_sigmoid(z);
            },
        },
        model);
}

std::string TrainedModel::to_json(
    const std::vector<std::pair<std::string, std::string>>& meta) const {
    ordered_json j;
    j["schema_version"] = 1;
    std::visit(overloaded{
                   [&](const LinearModel& m) {
                       j["kind"] = m.kind == LinearModel::Kind::logistic ? "logistic_regression"
                                                                         : "linear_svm";
                   },
                   [&](const Tree&) { j["kind"] = "decision_tree"; },
                   [&](const Ensemble& e) {
                       j["kind"] = e.kind == Ensemble::Kind::bagged ? "random_forest"
                                                                    : "gradient_boosting";
                   },
               },
               model);
    j["dimension"] = dimension;
    j["threshold"] = threshold;
    ordered_json jm = ordered_json::object();
    for (const auto& [key, value] : meta) jm[key] = value;
    j["meta"] = std::move(jm);
    std::visit(overloaded{
                   [&](const LinearModel& m) {
                       j["bias"] = m.bias;
                       j["weights"] = m.weights;
                   },
                   [&](const Tree& t) { j["nodes"] = nodes_to_json(t); },
                   [&](const Ensemble& e) {
                       if (e.kind == Ensemble::Kind::boosted) {
                           j["learning_rate"] = e.learning_rate;
                           j["base_score"] = e.base_score;
                       }
                       ordered_json trees = ordered_json::array();
                       for (const auto& t : e.trees) trees.push_back(nodes_to_json(t));
                       j["trees"] = std::move(trees);
                   },
               },
               model);
    return j.dump();
}

TrainedModel TrainedModel::from_json(std::string_view text,
                                     std::vector<std::pair<std::string, std::string>>* meta) {
    const ordered_json j = ordered_json::parse(text, nullptr, false);
    if (j.is_discarded() || !j.is_object()) throw DataError("model file: invalid JSON");
    try {
        if (j.at("schema_version").get<int>() != 1)
            throw DataError("model file: unsupported schema version");
        TrainedModel out;
        out.dimension = j.at("dimension").get<std::uint32_t>();
        out.threshold = j.at("threshold").get<double>();
        if (meta) {
            meta->clear();
            for (const auto& [key, value] : j.at("meta").items())
                meta->emplace_back(key, value.get<std::string>());
        }
        const auto kind = j.at("kind").get<std::string>();
        if (kind == "logistic_regression" || kind == "linear_svm") {
            LinearModel m;
            m.kind = kind == "linear_svm" ? LinearModel::Kind::hinge : LinearModel::Kind::logistic;
            m.bias = j.at("bias").get<double>();
            m.weights = j.at("weights").get<std::vector<double>>();
            if (m.weights.size() != out.dimension)
                throw DataError("model file: weight count does not match dimension");
            out.model = std::move(m);
        } else if (kind == "decision_tree") {
            out.model = nodes_from_json(j.at("nodes"), out.dimension);
        } else if (kind == "random_forest" || kind == "gradient_boosting") {
            Ensemble e;
            e.kind = kind == "random_forest" ? Ensemble::Kind::bagged : Ensemble::Kind::boosted;
            if (e.kind == Ensemble::Kind::boosted) {
                e.learning_rate = j.at("learning_rate").get<double>();
                e.base_score = j.at("base_score").get<double>();
            }
            for (const auto& t : j.at("trees")) e.trees.push_back(nodes_from_json(t, out.dimension));
            if (e.kind == Ensemble::Kind::bagged && e.trees.empty())
                throw DataError("model file: a forest needs at least one tree");
            out.model = std::move(e);
        } else {
            throw DataError("model file: unknown kind '" + kind + "'");
        }
        return out;
    } catch (const ordered_json::exception& ex) {
        throw DataError(std::string("model file: ") + ex.what());
    }
}

} // namespace spamdet
