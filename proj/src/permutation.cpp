#include "tsvc/permutation.hpp"

#include <vector>

#include "tsvc/parallel.hpp"
#include "tsvc/rng.hpp"

namespace tsvc {

double alpha_local(double alpha, int p) {
    if (!(alpha > 0.0 && alpha < 1.0))
        throw invalid_args_error("alpha must lie strictly between 0 and 1");
    if (p < 2) throw invalid_args_error("alpha_local needs at least two covariates");
    return alpha / static_cast<double>(p - 1);
}

PermTestResult permutation_test(const ModelStructure& structure, int j, int node_id,
                                int m, const Dataset& data, const Family& family,
                                int n_perm, double alpha_loc, uint64_t seed,
                                const SplitOptions& opts, int n_threads) {
    if (n_perm < 1) throw invalid_args_error("n_perm must be at least 1");

    PermTestResult result;
    result.n_perm = n_perm;
    result.alpha_local = alpha_loc;
    result.seed = seed;
    result.t_obs = max_selected(structure, j, node_id, m, data, family, opts).t_max;

    const Eigen::VectorXd original = data.values(m);
    const std::vector<double> base_values(original.data(),
                                          original.data() + original.size());

    // The test conditions on the fitted model: each replicate shuffles the
    // modifier column in its splitting role only (candidate thresholds and
    // child indicators), while node membership and every base-model term --
    // including x_m's own predictor columns -- keep the observed values.
    // Every replicate owns a seed derived from its index and writes one slot,
    // so the aggregate is identical for any thread count or schedule.
    std::vector<double> stat(static_cast<std::size_t>(n_perm));
    std::vector<unsigned char> degenerate(static_cast<std::size_t>(n_perm), 0);
    const int threads = n_threads > 0 ? n_threads : default_threads();

    parallel_chunks(n_perm, threads, [&](int begin, int end) {
        std::vector<double> values;
        Eigen::VectorXd column(original.size());
        for (int rep = begin; rep < end; ++rep) {
            Rng rng(derive_seed(seed, static_cast<uint64_t>(rep)));
            values = base_values;
            rng.shuffle(values);
            for (std::size_t i = 0; i < values.size(); ++i)
                column[static_cast<Eigen::Index>(i)] = values[i];

            double t = 0.0;
            try {
                t = max_selected(structure, j, node_id, m, data, family, opts,
                                 &column)
                        .t_max;
            } catch (const numeric_error&) {
                // No admissible threshold or no scorable candidate under this
                // permutation: the statistic is 0 by convention.
                degenerate[static_cast<std::size_t>(rep)] = 1;
            }
            stat[static_cast<std::size_t>(rep)] = t;
        }
    });

    for (int rep = 0; rep < n_perm; ++rep) {
        if (stat[static_cast<std::size_t>(rep)] >= result.t_obs) ++result.n_geq;
        result.n_degenerate += degenerate[static_cast<std::size_t>(rep)];
    }
    result.p_value = (result.n_geq + 1.0) / (n_perm + 1.0);
    result.significant = result.p_value <= alpha_loc;
    return result;
}

}  // namespace tsvc
