#pragma once

#include <Eigen/Core>
#include <string>

#include "tsvc/errors.hpp"

namespace tsvc {

enum class Distribution { gaussian, binomial, poisson };
enum class Link { identity, logit, log };

// Exponential-family specification. Only the canonical pairings are
// accepted: gaussian/identity, binomial/logit, poisson/log.
class Family {
public:
    Family(Distribution distribution, Link link);

    static Family gaussian() { return {Distribution::gaussian, Link::identity}; }
    static Family binomial() { return {Distribution::binomial, Link::logit}; }
    static Family poisson() { return {Distribution::poisson, Link::log}; }
    static Family from_name(const std::string& name);

    Distribution distribution() const { return distribution_; }
    Link link() const { return link_; }
    std::string distribution_name() const;
    std::string link_name() const;

    double link_value(double mu) const;
    double inverse_link(double eta) const;
    Eigen::VectorXd inverse_link(const Eigen::VectorXd& eta) const;

    // IRLS weight at mu; for canonical links this is the variance function.
    double irls_weight(double mu) const;

    // |eta| guard during IRLS. Binomial fits are capped at 30 so the
    // weights stay finite under separation; the fit is flagged as boundary
    // if the cap is active at convergence.
    double eta_cap() const;

    double deviance(const Eigen::VectorXd& y, const Eigen::VectorXd& mu) const;

    // Full log-likelihood at mu. The gaussian value profiles out the
    // variance at its MLE sigma^2 = deviance/n.
    double log_likelihood(const Eigen::VectorXd& y, const Eigen::VectorXd& mu) const;

    // AIC = -2 loglik + 2 * n_parameters, where n_parameters counts one per
    // coefficient plus, for gaussian, one for the profiled variance.
    double aic(double log_likelihood, int n_coefficients) const;

    // Throws invalid_response_error on a domain violation
    // (binomial: y in {0,1}; poisson: nonnegative integers; gaussian: finite).
    void validate_response(const Eigen::VectorXd& y) const;

private:
    Distribution distribution_;
    Link link_;
};

}  // namespace tsvc
