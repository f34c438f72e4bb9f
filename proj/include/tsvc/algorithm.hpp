#pragma once

#include <cstdint>
#include <utility>
#include <vector>

#include "tsvc/permutation.hpp"

namespace tsvc {

struct FitConfig {
    double alpha = 0.05;
    int n_perm = 1000;
    int min_node_size = 5;
    int max_splits = 30;  // safety cap on accepted splits
    uint64_t seed = 0;
    int threads = 0;  // 0 = hardware default
    // (predictor, modifier) pairs barred from the candidate set, e.g. dummy
    // columns of one factor that must not modify each other.
    std::vector<std::pair<int, int>> modifier_exclusions;
    int glm_max_iter = 100;
    double glm_tol = 1e-8;
};

// Fits the tree-structured varying-coefficient model:
//   - every predictor starts as a linear term;
//   - each iteration scores all (predictor, leaf, modifier) combinations by
//     their maximally selected LR statistic, permutation-tests the winner at
//     alpha/(p-1), and either applies the split or stops;
//   - afterwards the linear terms that never became trees or modifiers are
//     screened at level alpha and the final model is refit.
// Throws invalid_args_error for a bad config, degenerate_data_error when
// every predictor is constant.
TsvcModel fit_tsvc(const Dataset& data, const Family& family, const FitConfig& config);

// The final linear-term screen on its own: permutation-tests H0: beta_l = 0
// for every linear term that is neither a tree predictor nor a modifier
// (statistic: deviance increase from dropping the column), moves the
// non-significant ones to `excluded`, and refits.  Returns the screened,
// refit model; the input model's family drives all fits.
TsvcModel linear_term_screen(const TsvcModel& model, const Dataset& data, double alpha,
                             int n_perm, uint64_t seed, const SplitOptions& opts = {},
                             int n_threads = 1);

struct FitSummary {
    double deviance = 0.0;
    double aic = 0.0;
};

// Deviance and AIC of a fitted model evaluated at its stored coefficients;
// AIC counts one parameter per design column (intercept + leaves + linear
// terms) plus, for gaussian, the variance.
FitSummary deviance_aic(const TsvcModel& model, const Dataset& data);

}  // namespace tsvc
