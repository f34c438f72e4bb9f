#include <charconv>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"
#include "tsvc/algorithm.hpp"
#include "tsvc/csv.hpp"
#include "tsvc/dot.hpp"
#include "tsvc/model_json.hpp"
#include "tsvc/simbench.hpp"

namespace fs = std::filesystem;
using nlohmann::ordered_json;

namespace {

// Shortest round-trippable decimal representation.
std::string num(double v) {
    char buf[32];
    const auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, ptr);
}

std::string fixed(double v, int digits) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.*f", digits, v);
    return buf;
}

void emit_error(const std::string& type, const std::string& message) {
    ordered_json doc;
    doc["error"]["type"] = type;
    doc["error"]["message"] = message;
    std::cerr << doc.dump() << "\n";
}

std::ofstream open_out(const fs::path& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw tsvc::data_error("cannot write " + path.string());
    return out;
}

// ---------------------------------------------------------------------------
// fit
// ---------------------------------------------------------------------------

struct FitArgs {
    std::string csv;
    std::string schema;
    std::string family = "gaussian";
    std::string out_dir = ".";
    std::vector<std::string> exclusions;
    tsvc::FitConfig config;
};

int resolve_predictor(const std::string& token, const tsvc::Dataset& data) {
    int index = 0;
    const auto [ptr, ec] = std::from_chars(token.data(), token.data() + token.size(), index);
    if (ec == std::errc{} && ptr == token.data() + token.size()) {
        if (index < 0 || index >= data.n_predictors())
            throw tsvc::invalid_args_error("predictor index " + token + " out of range");
        return index;
    }
    const int found = data.index_of(token);
    if (found < 0)
        throw tsvc::invalid_args_error("unknown predictor '" + token + "'");
    return found;
}

std::pair<int, int> parse_exclusion(const std::string& spec, const tsvc::Dataset& data) {
    const auto colon = spec.find(':');
    if (colon == std::string::npos || colon == 0 || colon + 1 == spec.size())
        throw tsvc::invalid_args_error("--exclude-modifier expects predictor:modifier, got '" +
                                       spec + "'");
    const int j = resolve_predictor(spec.substr(0, colon), data);
    const int m = resolve_predictor(spec.substr(colon + 1), data);
    return {j, m};
}

std::string tree_summary(const tsvc::TsvcModel& model, int j) {
    const tsvc::CoefficientTree& tree = model.trees.at(j);
    std::string mods;
    for (int m : tree.modifiers()) {
        if (!mods.empty()) mods += ", ";
        mods += model.predictor_names[static_cast<std::size_t>(m)];
    }
    std::string leaves;
    for (int leaf : tree.leaf_ids()) {
        if (!leaves.empty()) leaves += " | ";
        leaves += fixed(tree.coefficient(leaf), 4);
    }
    return "tr(" + mods + "), " + std::to_string(tree.n_leaves()) +
           " leaves: " + leaves;
}

void write_report(const tsvc::TsvcModel& model, const fs::path& path) {
    std::ofstream out = open_out(path);
    const tsvc::FitDiagnostics& d = model.diagnostics;

    out << "TSVC fit report\n";
    out << "===============\n\n";
    out << "family:        " << model.family.distribution_name() << " ("
        << model.family.link_name() << ")\n";
    out << "response:      " << model.response_name << "\n";
    out << "observations:  " << d.n_obs << "\n";
    out << "deviance:      " << fixed(d.deviance, 4) << "\n";
    out << "AIC:           " << fixed(d.aic, 4) << "\n";
    out << "log-lik:       " << fixed(d.log_likelihood, 4) << "\n";
    out << "seed:          " << d.seed << "\n";
    out << "alpha:         " << num(d.alpha) << "    n_perm: " << d.n_perm
        << "    min_node_size: " << d.min_node_size << "    max_splits: " << d.max_splits
        << "\n";
    out << "converged:     " << (d.converged ? "yes" : "no")
        << "    ridge: " << (d.ridge_used ? "yes" : "no")
        << "    split cap hit: " << (d.max_splits_hit ? "yes" : "no") << "\n";

    out << "\nterms\n-----\n";
    std::size_t width = std::string("(intercept)").size();
    for (const std::string& name : model.predictor_names)
        width = std::max(width, name.size());
    const auto pad = [&](const std::string& name) {
        return name + std::string(width + 2 - name.size(), ' ');
    };
    out << pad("(intercept)") << "           " << fixed(model.intercept, 4) << "\n";
    for (int j = 0; j < static_cast<int>(model.predictor_names.size()); ++j) {
        const std::string& name = model.predictor_names[static_cast<std::size_t>(j)];
        if (model.trees.count(j)) {
            out << pad(name) << "tree      " << tree_summary(model, j) << "\n";
        } else if (model.linear.count(j)) {
            out << pad(name) << "linear    " << fixed(model.linear.at(j), 4) << "\n";
        } else {
            out << pad(name) << "excluded\n";
        }
    }

    out << "\nsplit history\n-------------\n";
    if (d.split_history.empty()) out << "(no splits tested)\n";
    for (const tsvc::SplitRecord& rec : d.split_history) {
        const std::string& j = model.predictor_names[static_cast<std::size_t>(rec.predictor)];
        const std::string& m = model.predictor_names[static_cast<std::size_t>(rec.modifier)];
        out << "  " << rec.iteration << ". " << j << " (node " << rec.node_id << ") by "
            << m << " at " << fixed(rec.split_point, 4) << "  T=" << fixed(rec.t_obs, 4)
            << "  p=" << fixed(rec.p_value, 4) << "  "
            << (rec.accepted ? "accepted" : "rejected") << "\n";
    }

    out << "\nscreen history\n--------------\n";
    if (d.screen_history.empty()) out << "(no linear terms screened)\n";
    for (const auto& rec : d.screen_history) {
        out << "  " << model.predictor_names[static_cast<std::size_t>(rec.predictor)]
            << "  p=" << fixed(rec.p_value, 4) << "  "
            << (rec.dropped ? "dropped" : "kept") << "\n";
    }
}

int cmd_fit(const FitArgs& args) {
    const std::vector<tsvc::ColumnSpec> schema = tsvc::load_schema(args.schema);
    const tsvc::Dataset data = tsvc::load_csv(args.csv, schema);
    if (!data.has_response())
        throw tsvc::schema_error("fitting needs a response column in " + args.csv);
    const tsvc::Family family = tsvc::Family::from_name(args.family);

    tsvc::FitConfig config = args.config;
    for (const std::string& spec : args.exclusions)
        config.modifier_exclusions.push_back(parse_exclusion(spec, data));

    const tsvc::TsvcModel model = tsvc::fit_tsvc(data, family, config);

    fs::create_directories(args.out_dir);
    const fs::path dir(args.out_dir);
    tsvc::save_model(model, (dir / "model.json").string());
    write_report(model, dir / "report.txt");
    int n_trees = 0;
    for (const auto& [j, tree] : model.trees) {
        const std::string& name = model.predictor_names[static_cast<std::size_t>(j)];
        std::ofstream out = open_out(dir / ("tree_" + name + ".dot"));
        out << tsvc::tree_to_dot(model, j);
        ++n_trees;
    }

    std::cout << "fit: n=" << model.diagnostics.n_obs << ", family=" << args.family
              << ", deviance=" << fixed(model.diagnostics.deviance, 4)
              << ", AIC=" << fixed(model.diagnostics.aic, 4) << "\n";
    for (const auto& [j, tree] : model.trees)
        std::cout << "  tree " << model.predictor_names[static_cast<std::size_t>(j)]
                  << ": " << tree_summary(model, j) << "\n";
    std::cout << "wrote " << (dir / "model.json").string() << ", "
              << (dir / "report.txt").string() << ", " << n_trees << " tree file"
              << (n_trees == 1 ? "" : "s") << "\n";
    return 0;
}

// ---------------------------------------------------------------------------
// predict
// ---------------------------------------------------------------------------

struct PredictArgs {
    std::string model;
    std::string csv;
    std::string out;
};

int cmd_predict(const PredictArgs& args) {
    const tsvc::TsvcModel model = tsvc::load_model(args.model);

    // The input may or may not carry the response column; check the header.
    std::ifstream header_in(args.csv);
    if (!header_in) throw tsvc::data_error("cannot open " + args.csv);
    std::string header_line;
    if (!std::getline(header_in, header_line))
        throw tsvc::data_error(args.csv + " is empty");
    header_in.close();
    bool has_response = false;
    {
        std::istringstream fields(header_line);
        std::string field;
        while (std::getline(fields, field, ',')) {
            while (!field.empty() && (field.back() == '\r' || field.back() == ' '))
                field.pop_back();
            while (!field.empty() && field.front() == ' ') field.erase(field.begin());
            if (field == model.response_name) has_response = true;
        }
    }

    std::ofstream out = open_out(args.out);
    for (std::size_t j = 0; j < model.predictor_names.size(); ++j)
        out << model.predictor_names[j] << ",";
    if (has_response) out << model.response_name << ",";
    out << "eta_hat,mu_hat\n";

    if (tsvc::count_csv_rows(args.csv) == 0) {
        std::cout << "predict: 0 rows -> " << args.out << "\n";
        return 0;  // nothing to score
    }

    // Build a loading schema from the model's stored column types.
    std::vector<tsvc::ColumnSpec> schema;
    for (std::size_t j = 0; j < model.predictor_names.size(); ++j)
        schema.push_back(tsvc::ColumnSpec{model.predictor_names[j],
                                          tsvc::ColumnSpec::Role::predictor,
                                          model.predictor_scales[j]});
    schema.push_back(tsvc::ColumnSpec{model.response_name,
                                      tsvc::ColumnSpec::Role::response,
                                      tsvc::Scale::continuous});
    const tsvc::Dataset data = tsvc::load_csv(args.csv, schema);
    tsvc::check_schema(model, data);

    const Eigen::VectorXd eta = tsvc::predict_eta(model, data);
    const Eigen::VectorXd mu = tsvc::predict_mu(model, data);
    for (Eigen::Index i = 0; i < data.n_rows(); ++i) {
        for (int j = 0; j < data.n_predictors(); ++j) out << num(data.values(j)[i]) << ",";
        if (data.has_response()) out << num(data.response()[i]) << ",";
        out << num(eta[i]) << "," << num(mu[i]) << "\n";
    }
    std::cout << "predict: " << data.n_rows() << " rows -> " << args.out << "\n";
    return 0;
}

// ---------------------------------------------------------------------------
// simulate
// ---------------------------------------------------------------------------

struct SimulateArgs {
    std::string scenario = "s1";
    std::vector<int> n_values;
    std::vector<double> sigma_values;
    int reps = 100;
    std::string out_dir = ".";
    tsvc::FitConfig config;
};

std::string cell_tag(const std::string& scenario, int n, double sigma) {
    return scenario + "_n" + std::to_string(n) + "_s" + num(sigma);
}

// One replication, through the checkpoint cache when possible.
tsvc::Detection run_rep(const tsvc::ScenarioSpec& spec, const tsvc::FitConfig& base,
                        int rep, const fs::path& checkpoint_dir,
                        const std::string& scenario) {
    const fs::path file =
        checkpoint_dir / (cell_tag(scenario, spec.n, spec.sigma_eps) + "_rep" +
                          std::to_string(rep) + ".json");
    if (fs::exists(file)) {
        std::ifstream in(file);
        ordered_json doc;
        try {
            in >> doc;
            tsvc::Detection det;
            det.delta_j = doc.at("delta_j").get<std::vector<int>>();
            det.delta_jm = doc.at("delta_jm").get<std::vector<std::vector<int>>>();
            det.present = doc.at("present").get<std::vector<int>>();
            return det;
        } catch (const nlohmann::json::exception&) {
            // fall through and recompute a corrupt checkpoint
        }
    }

    const tsvc::ScenarioDraw draw = tsvc::generate(spec, rep);
    tsvc::FitConfig config = base;
    config.seed = tsvc::scenario_fit_seed(spec, rep);
    const tsvc::TsvcModel model = tsvc::fit_tsvc(draw.data, tsvc::Family::gaussian(), config);
    const tsvc::Detection det = tsvc::extract_indicators(model);

    ordered_json doc;
    doc["scenario"] = scenario;
    doc["n"] = spec.n;
    doc["sigma"] = spec.sigma_eps;
    doc["rep"] = rep;
    doc["seed"] = spec.seed;
    doc["fit_seed"] = config.seed;
    doc["deviance"] = model.diagnostics.deviance;
    doc["delta_j"] = det.delta_j;
    doc["delta_jm"] = det.delta_jm;
    doc["present"] = det.present;
    std::ofstream out = open_out(file);
    out << doc.dump(2) << "\n";
    return det;
}

int cmd_simulate(const SimulateArgs& args) {
    const tsvc::ScenarioId id = tsvc::scenario_from_name(args.scenario);
    if (args.reps < 1) throw tsvc::invalid_args_error("--reps must be at least 1");
    for (int n : args.n_values)
        if (n < 20) throw tsvc::invalid_args_error("--n must be at least 20");
    for (double s : args.sigma_values)
        if (!(s > 0)) throw tsvc::invalid_args_error("--sigma must be positive");

    fs::create_directories(args.out_dir);
    const fs::path dir(args.out_dir);
    const fs::path checkpoints = dir / "checkpoints";
    fs::create_directories(checkpoints);

    const tsvc::ScenarioTruth truth = tsvc::truth_of(id);
    std::ofstream metrics = open_out(dir / "metrics.csv");
    metrics << "scenario,n,sigma,reps,n_perm,alpha,seed,tpr_c,fpr_c,tpr_cm,fpr_cm,poc\n";
    const auto cell_value = [](const std::optional<double>& v) {
        return v ? fixed(*v, 6) : std::string("NA");
    };

    for (int n : args.n_values) {
        for (double sigma : args.sigma_values) {
            tsvc::ScenarioSpec spec;
            spec.id = id;
            spec.n = n;
            spec.sigma_eps = sigma;
            spec.n_reps = args.reps;
            spec.seed = args.config.seed;

            std::vector<tsvc::Detection> detections;
            detections.reserve(static_cast<std::size_t>(args.reps));
            for (int rep = 0; rep < args.reps; ++rep)
                detections.push_back(
                    run_rep(spec, args.config, rep, checkpoints, args.scenario));

            const tsvc::EvalResult result = tsvc::evaluate(detections, truth);
            metrics << args.scenario << "," << n << "," << num(sigma) << "," << args.reps
                    << "," << args.config.n_perm << "," << num(args.config.alpha) << ","
                    << args.config.seed << "," << cell_value(result.tpr_c) << ","
                    << cell_value(result.fpr_c) << "," << cell_value(result.tpr_cm)
                    << "," << cell_value(result.fpr_cm) << "," << fixed(result.poc, 6)
                    << "\n";
            std::cout << "cell " << cell_tag(args.scenario, n, sigma) << ": reps="
                      << args.reps << " fpr_c=" << cell_value(result.fpr_c)
                      << " tpr_c=" << cell_value(result.tpr_c) << "\n";
        }
    }
    std::cout << "wrote " << (dir / "metrics.csv").string() << "\n";
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Tree-structured varying-coefficient GLMs"};
    app.require_subcommand(1);

    FitArgs fit_args;
    CLI::App* fit = app.add_subcommand("fit", "Fit a model to a CSV file");
    fit->add_option("--csv", fit_args.csv, "Input CSV with a header row")->required();
    fit->add_option("--schema", fit_args.schema, "JSON schema sidecar")->required();
    fit->add_option("--family", fit_args.family, "gaussian, binomial or poisson")
        ->default_val("gaussian");
    fit->add_option("--alpha", fit_args.config.alpha, "Global significance level")
        ->default_val(0.05);
    fit->add_option("--nperm", fit_args.config.n_perm, "Permutation replicates per test")
        ->default_val(1000);
    fit->add_option("--min-node-size", fit_args.config.min_node_size,
                    "Minimum observations per leaf")
        ->default_val(5);
    fit->add_option("--max-splits", fit_args.config.max_splits,
                    "Cap on accepted splits (0 = plain GLM)")
        ->default_val(30);
    fit->add_option("--seed", fit_args.config.seed, "Master RNG seed")->default_val(0);
    fit->add_option("--threads", fit_args.config.threads,
                    "Worker threads (0 = hardware)")
        ->default_val(0);
    fit->add_option("--exclude-modifier", fit_args.exclusions,
                    "predictor:modifier pair to bar from splitting (repeatable)");
    fit->add_option("--out-dir", fit_args.out_dir, "Output directory")->default_val(".");

    PredictArgs predict_args;
    CLI::App* predict = app.add_subcommand("predict", "Score a CSV with a saved model");
    predict->add_option("--model", predict_args.model, "model.json from a fit")->required();
    predict->add_option("--csv", predict_args.csv, "Input CSV to score")->required();
    predict->add_option("--out", predict_args.out, "Output CSV path")->required();

    SimulateArgs sim_args;
    CLI::App* simulate =
        app.add_subcommand("simulate", "Run a scenario study and report detection rates");
    simulate->add_option("--scenario", sim_args.scenario, "s1..s5 or illustrative")
        ->required();
    CLI::Option* n_opt =
        simulate->add_option("--n", sim_args.n_values, "Sample size(s), repeatable");
    CLI::Option* sigma_opt =
        simulate->add_option("--sigma", sim_args.sigma_values, "Noise sd(s), repeatable");
    CLI::Option* reps_opt =
        simulate->add_option("--reps", sim_args.reps, "Replications per cell");
    CLI::Option* nperm_opt =
        simulate->add_option("--nperm", sim_args.config.n_perm, "Permutation replicates");
    simulate->add_option("--alpha", sim_args.config.alpha, "Global significance level")
        ->default_val(0.05);
    simulate->add_option("--min-node-size", sim_args.config.min_node_size, "Minimum leaf size")
        ->default_val(5);
    simulate->add_option("--max-splits", sim_args.config.max_splits, "Cap on accepted splits")
        ->default_val(30);
    simulate->add_option("--seed", sim_args.config.seed, "Master RNG seed")->default_val(0);
    simulate->add_option("--threads", sim_args.config.threads, "Worker threads (0 = hardware)")
        ->default_val(0);
    std::string preset;
    simulate->add_option("--preset", preset,
                         "desk (n=250, sigma=1, 50 reps, 500 perms) or full "
                         "(paper grid, 100 reps, 1000 perms)");
    simulate->add_option("--out-dir", sim_args.out_dir, "Output directory")->default_val(".");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        if (e.get_exit_code() == 0) return app.exit(e);
        app.exit(e);
        emit_error("invalid_args", e.what());
        return 2;
    }

    try {
        if (fit->parsed()) return cmd_fit(fit_args);
        if (predict->parsed()) return cmd_predict(predict_args);
        if (simulate->parsed()) {
            // Presets fill whatever was not given explicitly.
            if (!preset.empty() && preset != "desk" && preset != "full")
                throw tsvc::invalid_args_error("--preset must be desk or full");
            const bool desk = preset == "desk";
            const bool full = preset == "full";
            if (sim_args.n_values.empty())
                sim_args.n_values = full ? std::vector<int>{100, 250, 500}
                                         : std::vector<int>{250};
            if (sim_args.sigma_values.empty())
                sim_args.sigma_values =
                    full ? std::vector<double>{1.0, 1.5, 2.0} : std::vector<double>{1.0};
            if (reps_opt->count() == 0) sim_args.reps = desk ? 50 : 100;
            if (nperm_opt->count() == 0) sim_args.config.n_perm = desk ? 500 : 1000;
            (void)n_opt;
            (void)sigma_opt;
            return cmd_simulate(sim_args);
        }
    } catch (const tsvc::invalid_args_error& e) {
        emit_error("invalid_args", e.what());
        return 2;
    } catch (const tsvc::data_error& e) {
        emit_error("data", e.what());
        return 3;
    } catch (const tsvc::numeric_error& e) {
        emit_error("numeric", e.what());
        return 4;
    } catch (const std::exception& e) {
        emit_error("internal", e.what());
        return 1;
    }
    return 0;
}
