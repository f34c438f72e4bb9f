#include "tsvc/glm.hpp"

#include <Eigen/Cholesky>
#include <cmath>
#include <limits>

namespace tsvc {

namespace {

constexpr double kPivotRelTol = 1e-10;
constexpr double kRidge = 1e-8;
constexpr int kMaxHalvings = 30;

Eigen::VectorXd initial_eta(const Eigen::VectorXd& y, const Family& family) {
    const Eigen::Index n = y.size();
    Eigen::VectorXd eta(n);
    switch (family.distribution()) {
        case Distribution::gaussian:
            eta = y;
            break;
        case Distribution::binomial:
            for (Eigen::Index i = 0; i < n; ++i)
                eta[i] = family.link_value((y[i] + 0.5) / 2.0);
            break;
        case Distribution::poisson:
            for (Eigen::Index i = 0; i < n; ++i)
                eta[i] = std::log(y[i] + 0.1);
            break;
    }
    return eta;
}

// Solves A x = b for symmetric positive semi-definite A with the pivoted
// LDLT; a pivot below kPivotRelTol times the largest means the design is
// not identifiable.
Eigen::VectorXd solve_normal_equations(Eigen::MatrixXd A, const Eigen::VectorXd& b,
                                       bool ridge_fallback) {
    Eigen::LDLT<Eigen::MatrixXd> ldlt(A);
    const Eigen::VectorXd d = ldlt.vectorD();
    const double d_max = d.maxCoeff();
    const bool deficient = !(d_max > 0.0) || d.minCoeff() <= kPivotRelTol * d_max ||
                           ldlt.info() != Eigen::Success;
    if (deficient) {
        if (!ridge_fallback)
            throw rank_deficient_error("glm: design matrix is rank deficient");
        A.diagonal().array() += kRidge;
        ldlt.compute(A);
        if (ldlt.info() != Eigen::Success)
            throw rank_deficient_error("glm: design matrix is rank deficient (ridge repair failed)");
        return ldlt.solve(b);
    }
    return ldlt.solve(b);
}

}  // namespace

GlmFit fit_glm(const Eigen::MatrixXd& design, const Eigen::VectorXd& response,
               const Family& family, const GlmOptions& opts) {
    const Eigen::Index n = design.rows();
    const Eigen::Index q = design.cols();
    if (q < 1) throw invalid_args_error("glm: design must have at least one column");
    if (response.size() != n)
        throw invalid_args_error("glm: design and response row counts differ");
    if (n < q)
        throw rank_deficient_error("glm: fewer rows than columns");
    family.validate_response(response);

    const double cap = family.eta_cap();

    Eigen::VectorXd beta = Eigen::VectorXd::Zero(q);
    Eigen::VectorXd eta(n);
    bool capped = false;
    auto apply_eta = [&](const Eigen::VectorXd& coef) {
        eta.noalias() = design * coef;
        capped = false;
        if (std::isfinite(cap)) {
            for (Eigen::Index i = 0; i < n; ++i) {
                if (eta[i] > cap) { eta[i] = cap; capped = true; }
                else if (eta[i] < -cap) { eta[i] = -cap; capped = true; }
            }
        }
    };

    if (opts.warm_start != nullptr) {
        if (opts.warm_start->size() != q)
            throw invalid_args_error("glm: warm start length does not match design");
        beta = *opts.warm_start;
        apply_eta(beta);
    } else {
        eta = initial_eta(response, family);
    }

    Eigen::VectorXd mu = family.inverse_link(eta);
    double dev_prev = family.deviance(response, mu);

    Eigen::VectorXd w(n), z(n);
    Eigen::MatrixXd A(q, q);
    Eigen::VectorXd b(q);

    GlmFit best;
    best.coefficients = beta;
    best.deviance = std::numeric_limits<double>::infinity();
    bool best_capped = false;

    int iter = 0;
    bool converged = false;
    Eigen::VectorXd beta_old = beta;
    for (iter = 1; iter <= opts.max_iter; ++iter) {
        for (Eigen::Index i = 0; i < n; ++i) {
            const double wi = family.irls_weight(mu[i]);
            w[i] = wi;
            z[i] = eta[i] + (response[i] - mu[i]) / wi;
        }
        A.noalias() = design.transpose() * w.asDiagonal() * design;
        b.noalias() = design.transpose() * (w.array() * z.array()).matrix();

        beta_old = beta;
        beta = solve_normal_equations(A, b, opts.ridge_fallback);

        apply_eta(beta);
        mu = family.inverse_link(eta);
        double dev = family.deviance(response, mu);

        int halvings = 0;
        while (!std::isfinite(dev) && halvings < kMaxHalvings) {
            beta = 0.5 * (beta + beta_old);
            apply_eta(beta);
            mu = family.inverse_link(eta);
            dev = family.deviance(response, mu);
            ++halvings;
        }
        if (!std::isfinite(dev)) {
            beta = beta_old;  // keep the last finite iterate
            break;
        }

        if (dev < best.deviance) {
            best.coefficients = beta;
            best.deviance = dev;
            best_capped = capped;
        }
        if (std::abs(dev - dev_prev) / (std::abs(dev) + 0.1) < opts.tol) {
            converged = true;
            dev_prev = dev;
            break;
        }
        dev_prev = dev;
    }

    GlmFit fit;
    fit.coefficients = best.coefficients;
    fit.deviance = best.deviance;
    fit.n_iter = std::min(iter, opts.max_iter);
    fit.converged = converged;
    fit.boundary = best_capped;
    if (!std::isfinite(fit.deviance)) {
        // No finite iterate at all; report the starting point.
        fit.coefficients = Eigen::VectorXd::Zero(q);
        apply_eta(fit.coefficients);
        mu = family.inverse_link(eta);
        fit.deviance = family.deviance(response, mu);
        fit.converged = false;
    } else {
        apply_eta(fit.coefficients);
        mu = family.inverse_link(eta);
    }
    fit.log_likelihood = family.log_likelihood(response, mu);
    fit.aic = family.aic(fit.log_likelihood, static_cast<int>(q));
    return fit;
}

}  // namespace tsvc
