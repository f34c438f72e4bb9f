#include "tsvc/simbench.hpp"

#include <cmath>

#include "tsvc/rng.hpp"

namespace tsvc {

const char* scenario_name(ScenarioId id) {
    switch (id) {
        case ScenarioId::s1: return "1";
        case ScenarioId::s2: return "2";
        case ScenarioId::s3: return "3";
        case ScenarioId::s4: return "4";
        case ScenarioId::s5: return "5";
        case ScenarioId::illustrative: return "illustrative";
    }
    return "1";
}

ScenarioId scenario_from_name(const std::string& name) {
    // "s1" and "1" are both common spellings on the command line.
    const std::string key =
        (name.size() == 2 && name[0] == 's') ? name.substr(1) : name;
    if (key == "1") return ScenarioId::s1;
    if (key == "2") return ScenarioId::s2;
    if (key == "3") return ScenarioId::s3;
    if (key == "4") return ScenarioId::s4;
    if (key == "5") return ScenarioId::s5;
    if (key == "illustrative") return ScenarioId::illustrative;
    throw invalid_args_error("unknown scenario '" + name + "'");
}

int scenario_p(ScenarioId id) { return id == ScenarioId::s4 ? 8 : 4; }

ScenarioTruth truth_of(ScenarioId id) {
    const int p = scenario_p(id);
    ScenarioTruth truth;
    truth.delta_j.assign(static_cast<std::size_t>(p), 0);
    truth.delta_jm.assign(static_cast<std::size_t>(p),
                          std::vector<int>(static_cast<std::size_t>(p), 0));
    auto pair = [&](int j, int m) {
        truth.delta_j[static_cast<std::size_t>(j)] = 1;
        truth.delta_jm[static_cast<std::size_t>(j)][static_cast<std::size_t>(m)] = 1;
    };
    switch (id) {
        case ScenarioId::s1:
            break;  // plain linear model
        case ScenarioId::s2:
            pair(0, 1);  // x1 modified by x2
            pair(1, 0);  // x2 modified by x1
            break;
        case ScenarioId::s3:
        case ScenarioId::s4:
            pair(2, 3);  // x3 modified by x4
            pair(3, 2);  // x4 modified by x3
            break;
        case ScenarioId::s5:
            pair(2, 3);
            pair(2, 1);  // ... and additionally by x2
            pair(3, 2);
            pair(3, 1);
            break;
        case ScenarioId::illustrative:
            pair(0, 1);  // x1 modified by x2 and x3
            pair(0, 2);
            pair(1, 0);  // x2 modified by x1 and x4
            pair(1, 3);
            break;
    }
    return truth;
}

ScenarioDraw generate(const ScenarioSpec& spec, int rep) {
    if (spec.n < 1) throw invalid_args_error("scenario sample size must be positive");
    if (!(spec.sigma_eps > 0.0))
        throw invalid_args_error("scenario noise level must be positive");
    const int n = spec.n;
    Rng rng(derive_seed(spec.seed, rng_stream::scenario_data, static_cast<uint64_t>(rep)));

    // Column-by-column draw in a fixed order: continuous pairs first, binary
    // pairs second, the noise vector last.
    std::vector<Column> cols;
    auto normal_col = [&](const std::string& name) {
        Eigen::VectorXd x(n);
        for (int i = 0; i < n; ++i) x[i] = rng.normal();
        cols.push_back(Column{name, Scale::continuous, std::move(x)});
    };
    auto binary_col = [&](const std::string& name) {
        Eigen::VectorXd x(n);
        for (int i = 0; i < n; ++i) x[i] = rng.bernoulli(0.5);
        cols.push_back(Column{name, Scale::binary, std::move(x)});
    };
    normal_col("x1");
    normal_col("x2");
    binary_col("x3");
    binary_col("x4");
    if (spec.id == ScenarioId::s4) {
        normal_col("x5");
        normal_col("x6");
        binary_col("x7");
        binary_col("x8");
    }

    const Eigen::VectorXd& x1 = cols[0].values;
    const Eigen::VectorXd& x2 = cols[1].values;
    const Eigen::VectorXd& x3 = cols[2].values;
    const Eigen::VectorXd& x4 = cols[3].values;

    const double b0 = 0.2;
    const double b = 0.4;
    Eigen::VectorXd mu(n);
    for (int i = 0; i < n; ++i) {
        switch (spec.id) {
            case ScenarioId::s1:
            case ScenarioId::s4:  // the extra covariates carry no effect
                mu[i] = b0 + b * (x1[i] + x2[i] + x3[i] + x4[i]);
                break;
            case ScenarioId::s2:
                mu[i] = b0 + x1[i] * std::atan(x2[i]) + x2[i] * std::atan(x1[i]) +
                        b * (x3[i] + x4[i]);
                break;
            case ScenarioId::s3:
                mu[i] = b0 + b * (x1[i] + x2[i]) +
                        x3[i] * (b + 0.4 * (x4[i] == 0.0)) +
                        x4[i] * (b + 0.4 * (x3[i] == 0.0));
                break;
            case ScenarioId::s5:
                mu[i] = b0 + b * (x1[i] + x2[i]) +
                        x3[i] * (b + 0.4 * (x4[i] == 0.0) +
                                 0.4 * (x4[i] == 0.0 && x2[i] > 0.0)) +
                        x4[i] * (b + 0.4 * (x3[i] == 0.0) +
                                 0.4 * (x3[i] == 0.0 && x2[i] > 0.0));
                break;
            case ScenarioId::illustrative:
                mu[i] = b0 +
                        x1[i] * (b + 0.6 * (x2[i] > 0.2) +
                                 0.6 * (x2[i] > 0.2 && x3[i] == 1.0)) +
                        x2[i] * (b + 0.6 * (x1[i] > -0.2) +
                                 0.6 * (x1[i] > -0.2 && x4[i] == 1.0)) +
                        b * (x3[i] + x4[i]);
                break;
        }
    }
    Eigen::VectorXd y(n);
    for (int i = 0; i < n; ++i) y[i] = mu[i] + spec.sigma_eps * rng.normal();

    return ScenarioDraw{Dataset(std::move(cols), "y", std::move(y)), truth_of(spec.id)};
}

Detection extract_indicators(const TsvcModel& model) {
    const int p = static_cast<int>(model.predictor_names.size());
    Detection det;
    det.delta_j.assign(static_cast<std::size_t>(p), 0);
    det.delta_jm.assign(static_cast<std::size_t>(p),
                        std::vector<int>(static_cast<std::size_t>(p), 0));
    det.present.assign(static_cast<std::size_t>(p), 1);
    for (const auto& [j, tree] : model.trees) {
        det.delta_j[static_cast<std::size_t>(j)] = 1;
        for (int m : tree.modifiers())
            det.delta_jm[static_cast<std::size_t>(j)][static_cast<std::size_t>(m)] = 1;
    }
    for (int e : model.excluded) det.present[static_cast<std::size_t>(e)] = 0;
    return det;
}

EvalResult evaluate(const std::vector<Detection>& fits, const ScenarioTruth& truth) {
    if (fits.empty()) throw invalid_args_error("evaluate needs at least one fit");
    const std::size_t p = truth.delta_j.size();
    for (const Detection& det : fits)
        if (det.delta_j.size() != p)
            throw invalid_args_error("fit and truth predictor counts differ");

    std::size_t pos_c = 0, neg_c = 0, pos_cm = 0, neg_cm = 0;
    for (std::size_t j = 0; j < p; ++j) {
        (truth.delta_j[j] ? pos_c : neg_c) += 1;
        for (std::size_t m = 0; m < p; ++m) {
            if (m == j) continue;
            (truth.delta_jm[j][m] ? pos_cm : neg_cm) += 1;
        }
    }

    double tpr_c = 0, fpr_c = 0, tpr_cm = 0, fpr_cm = 0, poc = 0;
    for (const Detection& det : fits) {
        double tp_c = 0, fp_c = 0, tp_cm = 0, fp_cm = 0, in_model = 0;
        for (std::size_t j = 0; j < p; ++j) {
            if (truth.delta_j[j])
                tp_c += det.delta_j[j];
            else
                fp_c += det.delta_j[j];
            in_model += det.present[j];
            for (std::size_t m = 0; m < p; ++m) {
                if (m == j) continue;
                if (truth.delta_jm[j][m])
                    tp_cm += det.delta_jm[j][m];
                else
                    fp_cm += det.delta_jm[j][m];
            }
        }
        if (pos_c) tpr_c += tp_c / static_cast<double>(pos_c);
        if (neg_c) fpr_c += fp_c / static_cast<double>(neg_c);
        if (pos_cm) tpr_cm += tp_cm / static_cast<double>(pos_cm);
        if (neg_cm) fpr_cm += fp_cm / static_cast<double>(neg_cm);
        poc += in_model / static_cast<double>(p);
    }

    const double reps = static_cast<double>(fits.size());
    EvalResult out;
    if (pos_c) out.tpr_c = tpr_c / reps;
    if (neg_c) out.fpr_c = fpr_c / reps;
    if (pos_cm) out.tpr_cm = tpr_cm / reps;
    if (neg_cm) out.fpr_cm = fpr_cm / reps;
    out.poc = poc / reps;
    return out;
}

EvalResult evaluate(const std::vector<TsvcModel>& fits, const ScenarioTruth& truth) {
    std::vector<Detection> detections;
    detections.reserve(fits.size());
    for (const TsvcModel& model : fits) detections.push_back(extract_indicators(model));
    return evaluate(detections, truth);
}

uint64_t scenario_fit_seed(const ScenarioSpec& spec, int rep) {
    return derive_seed(spec.seed, rng_stream::scenario_fit, static_cast<uint64_t>(rep));
}

ScenarioRun run_scenario(const ScenarioSpec& spec, const FitConfig& base_config) {
    if (spec.n_reps < 1) throw invalid_args_error("scenario needs at least one replication");
    std::vector<TsvcModel> fits;
    fits.reserve(static_cast<std::size_t>(spec.n_reps));
    for (int rep = 0; rep < spec.n_reps; ++rep) {
        const ScenarioDraw draw = generate(spec, rep);
        FitConfig config = base_config;
        config.seed = scenario_fit_seed(spec, rep);
        fits.push_back(fit_tsvc(draw.data, Family::gaussian(), config));
    }
    ScenarioRun run{std::move(fits), truth_of(spec.id), EvalResult{}};
    run.result = evaluate(run.fits, run.truth);
    return run;
}

}  // namespace tsvc
