#include "tsvc/model_json.hpp"

#include <fstream>

#include "json.hpp"
#include "tsvc/errors.hpp"

namespace tsvc {

namespace {

using ordered_json = nlohmann::ordered_json;

constexpr const char* kFormat = "tsvc-model/1";

ordered_json nodes_to_json(const CoefficientTree& tree) {
    ordered_json out = ordered_json::array();
    for (const TreeNode& node : tree.nodes()) {
        ordered_json n;
        n["modifier"] = node.modifier;
        n["split_point"] = node.split_point;
        n["left"] = node.left;
        n["right"] = node.right;
        n["parent"] = node.parent;
        n["coefficient"] = node.coefficient;
        out.push_back(std::move(n));
    }
    return out;
}

std::vector<TreeNode> nodes_from_json(const ordered_json& arr) {
    std::vector<TreeNode> nodes;
    for (const auto& n : arr) {
        TreeNode node;
        node.modifier = n.at("modifier").get<int>();
        node.split_point = n.at("split_point").get<double>();
        node.left = n.at("left").get<int>();
        node.right = n.at("right").get<int>();
        node.parent = n.at("parent").get<int>();
        node.coefficient = n.at("coefficient").get<double>();
        nodes.push_back(node);
    }
    return nodes;
}

}  // namespace

std::string model_to_json(const TsvcModel& model) {
    ordered_json doc;
    doc["format"] = kFormat;
    doc["family"] = model.family.distribution_name();
    doc["link"] = model.family.link_name();
    doc["response"] = model.response_name;

    ordered_json predictors = ordered_json::array();
    for (std::size_t j = 0; j < model.predictor_names.size(); ++j) {
        ordered_json p;
        p["name"] = model.predictor_names[j];
        p["scale"] = scale_name(model.predictor_scales[j]);
        predictors.push_back(std::move(p));
    }
    doc["predictors"] = std::move(predictors);

    doc["intercept"] = model.intercept;

    ordered_json trees = ordered_json::array();
    for (const auto& [j, tree] : model.trees) {
        ordered_json t;
        t["predictor"] = j;
        t["nodes"] = nodes_to_json(tree);
        trees.push_back(std::move(t));
    }
    doc["trees"] = std::move(trees);

    ordered_json linear = ordered_json::array();
    for (const auto& [j, beta] : model.linear) {
        ordered_json l;
        l["predictor"] = j;
        l["coefficient"] = beta;
        linear.push_back(std::move(l));
    }
    doc["linear"] = std::move(linear);
    doc["excluded"] = model.excluded;

    const FitDiagnostics& d = model.diagnostics;
    ordered_json diag;
    diag["deviance"] = d.deviance;
    diag["aic"] = d.aic;
    diag["log_likelihood"] = d.log_likelihood;
    diag["n_obs"] = static_cast<long>(d.n_obs);
    diag["converged"] = d.converged;
    diag["ridge_used"] = d.ridge_used;
    diag["max_splits_hit"] = d.max_splits_hit;

    ordered_json config;
    config["seed"] = d.seed;
    config["alpha"] = d.alpha;
    config["n_perm"] = d.n_perm;
    config["min_node_size"] = d.min_node_size;
    config["max_splits"] = d.max_splits;
    config["glm_max_iter"] = d.glm_max_iter;
    config["glm_tol"] = d.glm_tol;
    ordered_json exclusions = ordered_json::array();
    for (const auto& [j, m] : d.modifier_exclusions)
        exclusions.push_back(ordered_json::array({j, m}));
    config["modifier_exclusions"] = std::move(exclusions);
    diag["config"] = std::move(config);

    ordered_json splits = ordered_json::array();
    for (const SplitRecord& rec : d.split_history) {
        ordered_json r;
        r["iteration"] = rec.iteration;
        r["predictor"] = rec.predictor;
        r["node"] = rec.node_id;
        r["modifier"] = rec.modifier;
        r["split_point"] = rec.split_point;
        r["t_obs"] = rec.t_obs;
        r["p_value"] = rec.p_value;
        r["accepted"] = rec.accepted;
        splits.push_back(std::move(r));
    }
    diag["split_history"] = std::move(splits);

    ordered_json screens = ordered_json::array();
    for (const auto& rec : d.screen_history) {
        ordered_json r;
        r["predictor"] = rec.predictor;
        r["p_value"] = rec.p_value;
        r["dropped"] = rec.dropped;
        screens.push_back(std::move(r));
    }
    diag["screen_history"] = std::move(screens);
    doc["diagnostics"] = std::move(diag);

    return doc.dump(2) + "\n";
}

TsvcModel model_from_json(const std::string& text) {
    ordered_json doc;
    try {
        doc = ordered_json::parse(text);
    } catch (const nlohmann::json::exception& e) {
        throw data_error(std::string("cannot parse model JSON: ") + e.what());
    }

    try {
        if (doc.at("format").get<std::string>() != kFormat)
            throw data_error("unsupported model format '" +
                             doc.at("format").get<std::string>() + "'");

        TsvcModel model(Family::from_name(doc.at("family").get<std::string>()));
        model.response_name = doc.at("response").get<std::string>();
        for (const auto& p : doc.at("predictors")) {
            model.predictor_names.push_back(p.at("name").get<std::string>());
            model.predictor_scales.push_back(
                scale_from_name(p.at("scale").get<std::string>()));
        }
        model.intercept = doc.at("intercept").get<double>();
        for (const auto& t : doc.at("trees")) {
            const int j = t.at("predictor").get<int>();
            model.trees.emplace(j,
                                CoefficientTree::from_nodes(j, nodes_from_json(t.at("nodes"))));
        }
        for (const auto& l : doc.at("linear"))
            model.linear[l.at("predictor").get<int>()] =
                l.at("coefficient").get<double>();
        model.excluded = doc.at("excluded").get<std::vector<int>>();

        const auto& diag = doc.at("diagnostics");
        FitDiagnostics& d = model.diagnostics;
        d.deviance = diag.at("deviance").get<double>();
        d.aic = diag.at("aic").get<double>();
        d.log_likelihood = diag.at("log_likelihood").get<double>();
        d.n_obs = diag.at("n_obs").get<long>();
        d.converged = diag.at("converged").get<bool>();
        d.ridge_used = diag.at("ridge_used").get<bool>();
        d.max_splits_hit = diag.at("max_splits_hit").get<bool>();

        const auto& config = diag.at("config");
        d.seed = config.at("seed").get<std::uint64_t>();
        d.alpha = config.at("alpha").get<double>();
        d.n_perm = config.at("n_perm").get<int>();
        d.min_node_size = config.at("min_node_size").get<int>();
        d.max_splits = config.at("max_splits").get<int>();
        d.glm_max_iter = config.at("glm_max_iter").get<int>();
        d.glm_tol = config.at("glm_tol").get<double>();
        for (const auto& pair : config.at("modifier_exclusions"))
            d.modifier_exclusions.emplace_back(pair.at(0).get<int>(),
                                               pair.at(1).get<int>());

        for (const auto& r : diag.at("split_history")) {
            SplitRecord rec;
            rec.iteration = r.at("iteration").get<int>();
            rec.predictor = r.at("predictor").get<int>();
            rec.node_id = r.at("node").get<int>();
            rec.modifier = r.at("modifier").get<int>();
            rec.split_point = r.at("split_point").get<double>();
            rec.t_obs = r.at("t_obs").get<double>();
            rec.p_value = r.at("p_value").get<double>();
            rec.accepted = r.at("accepted").get<bool>();
            d.split_history.push_back(rec);
        }
        for (const auto& r : diag.at("screen_history")) {
            FitDiagnostics::ScreenRecord rec;
            rec.predictor = r.at("predictor").get<int>();
            rec.p_value = r.at("p_value").get<double>();
            rec.dropped = r.at("dropped").get<bool>();
            d.screen_history.push_back(rec);
        }

        model.validate();
        return model;
    } catch (const nlohmann::json::exception& e) {
        throw data_error(std::string("malformed model JSON: ") + e.what());
    } catch (const invalid_args_error& e) {
        // Bad names or an inconsistent structure in a file are data problems,
        // not caller mistakes.
        throw data_error(std::string("invalid model JSON: ") + e.what());
    }
}

void save_model(const TsvcModel& model, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw data_error("cannot write " + path);
    out << model_to_json(model);
    if (!out) throw data_error("write to " + path + " failed");
}

TsvcModel load_model(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw data_error("cannot open " + path);
    std::string text((std::istreambuf_iterator<char>(in)),
                     std::istreambuf_iterator<char>());
    return model_from_json(text);
}

}  // namespace tsvc
