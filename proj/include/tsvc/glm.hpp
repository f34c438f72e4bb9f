#pragma once

#include <Eigen/Core>

#include "tsvc/family.hpp"

namespace tsvc {

struct GlmOptions {
    int max_iter = 100;
    // Convergence: |dev - dev_prev| / (|dev| + 0.1) < tol.
    double tol = 1e-8;
    // When set, a rank-deficient normal-equations matrix is repaired with a
    // tiny ridge (1e-8 on the diagonal) instead of throwing. Reserved for
    // the final refit; the split search wants the throw so it can discard
    // collinear candidates.
    bool ridge_fallback = false;
    // Optional warm start (length must equal the design's column count).
    const Eigen::VectorXd* warm_start = nullptr;
};

struct GlmFit {
    Eigen::VectorXd coefficients;
    double deviance = 0.0;
    double log_likelihood = 0.0;
    double aic = 0.0;
    int n_iter = 0;
    bool converged = false;
    // True if the |eta| cap was active at the final iterate (binomial
    // separation guard).
    bool boundary = false;
};

// Maximum-likelihood GLM fit by iteratively reweighted least squares.
//
// Throws rank_deficient_error when the weighted design is not identifiable
// (pivot below 1e-10 times the largest) and ridge_fallback is off, and
// invalid_response_error on a family domain violation. Non-convergence
// after max_iter is not an error: the best iterate is returned with
// converged=false.
GlmFit fit_glm(const Eigen::MatrixXd& design, const Eigen::VectorXd& response,
               const Family& family, const GlmOptions& opts = {});

}  // namespace tsvc
