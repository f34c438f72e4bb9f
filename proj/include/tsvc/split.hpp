#pragma once

#include <Eigen/Core>
#include <vector>

#include "tsvc/glm.hpp"
#include "tsvc/model.hpp"

namespace tsvc {

struct SplitOptions {
    int min_node_size = 5;   // minimum rows per child region
    int glm_max_iter = 100;
    double glm_tol = 1e-8;
};

// LR statistic of one (predictor, node, modifier, split point) candidate.
struct SplitCandidate {
    int predictor = -1;
    int node_id = -1;
    int modifier = -1;
    double split_point = 0.0;
    double lr_statistic = 0.0;  // deviance(current) - deviance(split model)
};

// Maximally selected statistic over all admissible split points of one
// (predictor, node, modifier) combination.
struct MaxSelected {
    int predictor = -1;
    int node_id = -1;
    int modifier = -1;
    double best_split_point = 0.0;
    double t_max = 0.0;
    int n_discarded = 0;  // candidates dropped as rank deficient
};

// Sorted admissible thresholds within a node: midpoints between consecutive
// distinct observed values (continuous/ordinal) or the single point 0 for a
// binary column with both levels present.  Thresholds whose children would
// fall below min_node_size are removed.  May return an empty vector.
std::vector<double> candidate_split_points(const Eigen::VectorXd& values, Scale scale,
                                           const Eigen::VectorXd& node_mask,
                                           int min_node_size);

// The current structure with leaf node_id of predictor j's tree split at
// (m, c).  A predictor without a tree is treated as a single-leaf tree with
// root id 0 (and must currently be a linear term).
ModelStructure split_structure(const ModelStructure& structure, int j, int node_id,
                               int m, double c);

// Scores one candidate by fitting the unsplit and the split model from
// scratch.  Deliberately independent of the sweep in max_selected so the two
// routes can check each other.  Throws rank_deficient_error when the split
// design is not identifiable.
SplitCandidate score_split(const ModelStructure& structure, int j, int node_id, int m,
                           double c, const Dataset& data, const Family& family,
                           const SplitOptions& opts = {});

// T_m = max over admissible c of the LR statistic, with the smallest-c
// tie-break.  Gaussian fits use an exact one-column update of the base
// least-squares solution; the other families refit with warm starts.  Rank
// deficient candidates are discarded (counted in n_discarded).  Throws
// no_admissible_split_error when no candidate survives.
//
// modifier_values, when given, replaces column m in its splitting role only:
// candidate thresholds and the child indicators are computed from it, while
// node membership and every term of the base model keep the dataset column.
// The permutation test uses this to shuffle the modifier without disturbing
// the rest of the fitted model.
MaxSelected max_selected(const ModelStructure& structure, int j, int node_id, int m,
                         const Dataset& data, const Family& family,
                         const SplitOptions& opts = {},
                         const Eigen::VectorXd* modifier_values = nullptr);

}  // namespace tsvc
