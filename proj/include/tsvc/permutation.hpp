#pragma once

#include <cstdint>

#include "tsvc/split.hpp"

namespace tsvc {

struct PermTestResult {
    double t_obs = 0.0;
    int n_perm = 0;
    int n_geq = 0;          // permuted statistics >= t_obs
    double p_value = 1.0;   // (n_geq + 1) / (n_perm + 1)
    double alpha_local = 0.0;
    bool significant = false;
    uint64_t seed = 0;
    int n_degenerate = 0;   // replicates with no scorable candidate (statistic 0)
};

// Local level alpha/(p-1) controlling the familywise error over the p-1
// potential modifiers of one predictor.
double alpha_local(double alpha, int p);

// Permutation test of the maximally selected statistic for (j, node_id, m):
// t_obs is recomputed on the data, then each replicate redraws column m as a
// uniformly random permutation of its values (globally, over all n rows) and
// recomputes the max-selected statistic with the shuffled column in its
// splitting role only -- the rest of the fitted model (node membership,
// x_m's own predictor term, all other terms) is held at the observed data,
// so the null distribution reflects the modifier role under test and nothing
// else.  Replicates with no admissible or scorable split contribute a
// statistic of 0 and are counted in n_degenerate.  Replicate seeds derive
// from `seed` by index, so the result is bit-identical for a fixed seed
// regardless of n_threads.
PermTestResult permutation_test(const ModelStructure& structure, int j, int node_id,
                                int m, const Dataset& data, const Family& family,
                                int n_perm, double alpha_loc, uint64_t seed,
                                const SplitOptions& opts = {}, int n_threads = 1);

}  // namespace tsvc
