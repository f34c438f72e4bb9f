#include "tsvc/algorithm.hpp"

#include <algorithm>
#include <optional>
#include <set>

#include "tsvc/parallel.hpp"
#include "tsvc/rng.hpp"

namespace tsvc {

namespace {

SplitOptions split_options(const FitConfig& config) {
    SplitOptions opts;
    opts.min_node_size = config.min_node_size;
    opts.glm_max_iter = config.glm_max_iter;
    opts.glm_tol = config.glm_tol;
    return opts;
}

// Predictors eligible for splitting / as modifiers: the current V union L.
std::vector<int> active_predictors(const ModelStructure& structure) {
    std::vector<int> out;
    for (const auto& [j, tree] : structure.trees) out.push_back(j);
    out.insert(out.end(), structure.linear.begin(), structure.linear.end());
    std::sort(out.begin(), out.end());
    return out;
}

bool excluded_pair(const FitConfig& config, int j, int m) {
    return std::find(config.modifier_exclusions.begin(), config.modifier_exclusions.end(),
                     std::make_pair(j, m)) != config.modifier_exclusions.end();
}

// Strictly larger statistic wins; exact ties go to the lexicographically
// smallest (predictor, modifier, split point, node).
bool better_than(const MaxSelected& a, const MaxSelected& b) {
    if (a.t_max != b.t_max) return a.t_max > b.t_max;
    const auto key = [](const MaxSelected& s) {
        return std::make_tuple(s.predictor, s.modifier, s.best_split_point, s.node_id);
    };
    return key(a) < key(b);
}

// Scores every admissible (predictor, leaf, modifier) combination and
// returns the winner, or nothing when no combination is scorable.
std::optional<MaxSelected> best_combination(const ModelStructure& structure,
                                            const Dataset& data, const Family& family,
                                            const FitConfig& config,
                                            const SplitOptions& opts) {
    std::optional<MaxSelected> best;
    const std::vector<int> active = active_predictors(structure);
    for (int j : active) {
        const auto it = structure.trees.find(j);
        const std::vector<int> leaves =
            it != structure.trees.end() ? it->second.leaf_ids() : std::vector<int>{0};
        for (int leaf : leaves) {
            for (int m : active) {
                if (m == j || excluded_pair(config, j, m)) continue;
                try {
                    const MaxSelected sel =
                        max_selected(structure, j, leaf, m, data, family, opts);
                    if (!best || better_than(sel, *best)) best = sel;
                } catch (const numeric_error&) {
                    // nothing admissible or scorable for this combination
                }
            }
        }
    }
    return best;
}

// Refits the structure and writes coefficients plus fit diagnostics into the
// model.  Falls back to a tiny ridge when the final design is not
// identifiable (recorded in diagnostics.ridge_used).
void refit_into(TsvcModel& model, const ModelStructure& structure, const Dataset& data,
                const SplitOptions& opts) {
    const DesignInfo info = build_design(structure, data);
    GlmOptions g;
    g.max_iter = opts.glm_max_iter;
    g.tol = opts.glm_tol;

    GlmFit fit = [&] {
        try {
            return fit_glm(info.design, data.response(), model.family, g);
        } catch (const rank_deficient_error&) {
            model.diagnostics.ridge_used = true;
            GlmOptions ridge = g;
            ridge.ridge_fallback = true;
            return fit_glm(info.design, data.response(), model.family, ridge);
        }
    }();

    model.trees = structure.trees;
    model.linear.clear();
    for (Eigen::Index k = 0; k < info.design.cols(); ++k) {
        const DesignColumn& col = info.columns[static_cast<std::size_t>(k)];
        switch (col.kind) {
            case DesignColumn::Kind::intercept:
                model.intercept = fit.coefficients[k];
                break;
            case DesignColumn::Kind::leaf:
                model.trees.at(col.predictor).set_coefficient(col.leaf_id,
                                                              fit.coefficients[k]);
                break;
            case DesignColumn::Kind::linear:
                model.linear[col.predictor] = fit.coefficients[k];
                break;
        }
    }
    model.diagnostics.deviance = fit.deviance;
    model.diagnostics.aic = fit.aic;
    model.diagnostics.log_likelihood = fit.log_likelihood;
    model.diagnostics.n_obs = data.n_rows();
    model.diagnostics.converged = fit.converged;
}

// Add-one permutation p-value for dropping linear term l from the structure:
// the statistic is deviance(without l) - deviance(with l), recomputed with
// column l globally permuted in each replicate.
double drop_one_pvalue(const ModelStructure& structure, int l, const Dataset& data,
                       const Family& family, int n_perm, uint64_t seed,
                       const SplitOptions& opts, int n_threads) {
    GlmOptions g;
    g.max_iter = opts.glm_max_iter;
    g.tol = opts.glm_tol;

    ModelStructure reduced = structure;
    reduced.linear.erase(std::find(reduced.linear.begin(), reduced.linear.end(), l));

    const DesignInfo full_info = build_design(structure, data);
    const DesignInfo reduced_info = build_design(reduced, data);
    const double dev_full = fit_glm(full_info.design, data.response(), family, g).deviance;
    // Column l does not appear in the reduced design, so its deviance is
    // unaffected by permuting l and is computed once.
    const double dev_reduced =
        fit_glm(reduced_info.design, data.response(), family, g).deviance;
    const double t_obs = dev_reduced - dev_full;

    const Eigen::VectorXd original = data.values(l);
    const std::vector<double> base_values(original.data(),
                                          original.data() + original.size());

    std::vector<double> stat(static_cast<std::size_t>(n_perm), 0.0);
    parallel_chunks(n_perm, n_threads, [&](int begin, int end) {
        Dataset scratch = data;
        std::vector<double> values;
        Eigen::VectorXd column(original.size());
        for (int rep = begin; rep < end; ++rep) {
            Rng rng(derive_seed(seed, static_cast<uint64_t>(rep)));
            values = base_values;
            rng.shuffle(values);
            for (std::size_t i = 0; i < values.size(); ++i)
                column[static_cast<Eigen::Index>(i)] = values[i];
            scratch.set_predictor_values(l, column);
            try {
                const DesignInfo info = build_design(structure, scratch);
                const double dev = fit_glm(info.design, scratch.response(), family, g).deviance;
                stat[static_cast<std::size_t>(rep)] = dev_reduced - dev;
            } catch (const numeric_error&) {
                // unscoreable permutation counts as no evidence
                stat[static_cast<std::size_t>(rep)] = 0.0;
            }
        }
    });

    int n_geq = 0;
    for (double t : stat)
        if (t >= t_obs) ++n_geq;
    return (n_geq + 1.0) / (n_perm + 1.0);
}

}  // namespace

TsvcModel linear_term_screen(const TsvcModel& model, const Dataset& data, double alpha,
                             int n_perm, uint64_t seed, const SplitOptions& opts,
                             int n_threads) {
    if (!(alpha > 0.0 && alpha < 1.0))
        throw invalid_args_error("alpha must lie strictly between 0 and 1");
    if (n_perm < 1) throw invalid_args_error("n_perm must be at least 1");
    const int threads = n_threads > 0 ? n_threads : default_threads();

    TsvcModel out = model;
    const ModelStructure structure = model.structure();
    const std::vector<int> modifiers = structure.modifiers();

    // Targets: linear terms that are not effect modifiers anywhere.  Tree
    // predictors and modifiers always keep their main effects.
    std::vector<int> targets;
    for (const auto& [l, beta] : model.linear)
        if (!std::binary_search(modifiers.begin(), modifiers.end(), l))
            targets.push_back(l);
    if (targets.empty()) return out;

    // All terms are tested against the same (pre-screen) model, then dropped
    // together and the remainder refit once.
    std::vector<int> dropped;
    for (int l : targets) {
        const double p = drop_one_pvalue(structure, l, data, model.family, n_perm,
                                         derive_seed(seed, static_cast<uint64_t>(l)),
                                         opts, threads);
        const bool drop = p > alpha;
        out.diagnostics.screen_history.push_back(
            FitDiagnostics::ScreenRecord{l, p, drop});
        if (drop) dropped.push_back(l);
    }

    ModelStructure screened = structure;
    for (int l : dropped) {
        screened.linear.erase(
            std::find(screened.linear.begin(), screened.linear.end(), l));
        out.linear.erase(l);
        out.excluded.push_back(l);
    }
    std::sort(out.excluded.begin(), out.excluded.end());

    refit_into(out, screened, data, opts);
    out.validate();
    return out;
}

TsvcModel fit_tsvc(const Dataset& data, const Family& family, const FitConfig& config) {
    if (!(config.alpha > 0.0 && config.alpha < 1.0))
        throw invalid_args_error("alpha must lie strictly between 0 and 1");
    if (config.n_perm < 1) throw invalid_args_error("n_perm must be at least 1");
    if (config.min_node_size < 1) throw invalid_args_error("min_node_size must be positive");
    if (config.max_splits < 0) throw invalid_args_error("max_splits must be nonnegative");
    if (!data.has_response()) throw schema_error("fitting needs a response column");
    const int p = data.n_predictors();
    if (p < 2) throw invalid_args_error("fitting needs at least two predictors");
    family.validate_response(data.response());

    bool any_varying = false;
    for (int j = 0; j < p && !any_varying; ++j) {
        const Eigen::VectorXd& x = data.values(j);
        any_varying = x.maxCoeff() > x.minCoeff();
    }
    if (!any_varying) throw degenerate_data_error("every predictor column is constant");

    const SplitOptions opts = split_options(config);
    const int threads = config.threads > 0 ? config.threads : default_threads();
    const double alpha_loc = alpha_local(config.alpha, p);

    ModelStructure structure;
    structure.p = p;
    for (int j = 0; j < p; ++j) structure.linear.push_back(j);

    TsvcModel model(family);
    model.predictor_names = data.predictor_names();
    for (int j = 0; j < p; ++j) model.predictor_scales.push_back(data.predictor(j).scale);
    model.response_name = data.response_name();
    model.diagnostics.seed = config.seed;
    model.diagnostics.alpha = config.alpha;
    model.diagnostics.n_perm = config.n_perm;
    model.diagnostics.min_node_size = config.min_node_size;
    model.diagnostics.max_splits = config.max_splits;
    model.diagnostics.glm_max_iter = config.glm_max_iter;
    model.diagnostics.glm_tol = config.glm_tol;
    model.diagnostics.modifier_exclusions = config.modifier_exclusions;

    // Steps 1 and 2: the initialization split is simply the first round of
    // the iteration, with every predictor still a single-leaf (linear) term.
    int accepted = 0;
    for (int iteration = 1; accepted < config.max_splits; ++iteration) {
        const std::optional<MaxSelected> winner =
            best_combination(structure, data, family, config, opts);
        if (!winner) break;

        const uint64_t test_seed =
            derive_seed(config.seed, rng_stream::split_test, static_cast<uint64_t>(iteration));
        const PermTestResult test =
            permutation_test(structure, winner->predictor, winner->node_id,
                             winner->modifier, data, family, config.n_perm, alpha_loc,
                             test_seed, opts, threads);

        SplitRecord record;
        record.iteration = iteration;
        record.predictor = winner->predictor;
        record.node_id = winner->node_id;
        record.modifier = winner->modifier;
        record.split_point = winner->best_split_point;
        record.t_obs = test.t_obs;
        record.p_value = test.p_value;
        record.accepted = test.significant;
        model.diagnostics.split_history.push_back(record);

        if (!test.significant) break;  // first non-significant test stops everything
        structure = split_structure(structure, winner->predictor, winner->node_id,
                                    winner->modifier, winner->best_split_point);
        if (++accepted == config.max_splits && config.max_splits > 0)
            model.diagnostics.max_splits_hit = true;
    }

    refit_into(model, structure, data, opts);

    // Step 3: screen the plain linear terms, drop, refit.
    TsvcModel screened = linear_term_screen(
        model, data, config.alpha, config.n_perm,
        derive_seed(config.seed, rng_stream::linear_screen), opts, threads);
    screened.validate();
    return screened;
}

FitSummary deviance_aic(const TsvcModel& model, const Dataset& data) {
    check_schema(model, data);
    if (!data.has_response())
        throw schema_error("deviance needs a response column");
    const Eigen::VectorXd mu = predict_mu(model, data);
    const double dev = model.family.deviance(data.response(), mu);
    const double ll = model.family.log_likelihood(data.response(), mu);
    int q = 1;  // intercept
    for (const auto& [j, tree] : model.trees) q += tree.n_leaves();
    q += static_cast<int>(model.linear.size());
    FitSummary summary;
    summary.deviance = dev;
    summary.aic = model.family.aic(ll, q);
    return summary;
}

}  // namespace tsvc
