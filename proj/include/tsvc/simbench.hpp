#pragma once

#include <optional>
#include <string>
#include <vector>

#include "tsvc/algorithm.hpp"

namespace tsvc {

// The five scenario studies plus the illustrative two-tree example.
enum class ScenarioId { s1 = 1, s2 = 2, s3 = 3, s4 = 4, s5 = 5, illustrative = 6 };

const char* scenario_name(ScenarioId id);
ScenarioId scenario_from_name(const std::string& name);
int scenario_p(ScenarioId id);  // 4 for scenarios 1-3, 5 and illustrative; 8 for 4

struct ScenarioSpec {
    ScenarioId id = ScenarioId::s1;
    int n = 250;
    double sigma_eps = 1.0;
    int n_reps = 100;
    uint64_t seed = 0;
};

// Which covariates truly have varying coefficients, and through which
// modifiers.  Constant across replications of one scenario.
struct ScenarioTruth {
    std::vector<int> delta_j;               // length p, 0/1
    std::vector<std::vector<int>> delta_jm;  // p x p, 0/1, diagonal unused
};

ScenarioTruth truth_of(ScenarioId id);

struct ScenarioDraw {
    Dataset data;
    ScenarioTruth truth;
};

// One simulated dataset.  Columns are drawn in a fixed order (x1, x2, ...,
// then the noise vector), each from a generator seeded by (spec.seed, rep),
// so a draw is reproducible independently of all other replications.
ScenarioDraw generate(const ScenarioSpec& spec, int rep);

// Fitted-model indicators in the same layout as ScenarioTruth, plus which
// covariates remain in the model at all (tree or linear term).
struct Detection {
    std::vector<int> delta_j;
    std::vector<std::vector<int>> delta_jm;
    std::vector<int> present;  // length p, 0/1
};

Detection extract_indicators(const TsvcModel& model);

// Rates averaged over replications; a rate whose truth-side denominator is
// empty (e.g. TPR in scenario 1) is absent rather than zero.
struct EvalResult {
    std::optional<double> tpr_c;
    std::optional<double> fpr_c;
    std::optional<double> tpr_cm;
    std::optional<double> fpr_cm;
    double poc = 0.0;  // mean proportion of covariates present
};

EvalResult evaluate(const std::vector<Detection>& fits, const ScenarioTruth& truth);
EvalResult evaluate(const std::vector<TsvcModel>& fits, const ScenarioTruth& truth);

struct ScenarioRun {
    std::vector<TsvcModel> fits;
    ScenarioTruth truth;
    EvalResult result;
};

// Generates and fits all replications of one cell.  Per-replication fit
// seeds derive from spec.seed, so cells and replications are independent of
// execution order.  `base_config` supplies everything but the seed.
ScenarioRun run_scenario(const ScenarioSpec& spec, const FitConfig& base_config);

// Fit seed used by run_scenario for one replication (exposed so callers that
// run replications themselves, e.g. for checkpointing, match it exactly).
uint64_t scenario_fit_seed(const ScenarioSpec& spec, int rep);

}  // namespace tsvc
