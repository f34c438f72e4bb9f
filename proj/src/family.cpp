#include "tsvc/family.hpp"

#include <cmath>

namespace tsvc {

namespace {
constexpr double kMuFloor = 1e-12;
constexpr double kProbEps = 1e-15;
}  // namespace

Family::Family(Distribution distribution, Link link)
    : distribution_(distribution), link_(link) {
    const bool canonical =
        (distribution == Distribution::gaussian && link == Link::identity) ||
        (distribution == Distribution::binomial && link == Link::logit) ||
        (distribution == Distribution::poisson && link == Link::log);
    if (!canonical)
        throw invalid_args_error("family: only canonical distribution/link pairings are supported");
}

Family Family::from_name(const std::string& name) {
    if (name == "gaussian") return gaussian();
    if (name == "binomial") return binomial();
    if (name == "poisson") return poisson();
    throw invalid_args_error("family: unknown family '" + name + "'");
}

std::string Family::distribution_name() const {
    switch (distribution_) {
        case Distribution::gaussian: return "gaussian";
        case Distribution::binomial: return "binomial";
        case Distribution::poisson: return "poisson";
    }
    return {};
}

std::string Family::link_name() const {
    switch (link_) {
        case Link::identity: return "identity";
        case Link::logit: return "logit";
        case Link::log: return "log";
    }
    return {};
}

double Family::link_value(double mu) const {
    switch (link_) {
        case Link::identity: return mu;
        case Link::logit: return std::log(mu / (1.0 - mu));
        case Link::log: return std::log(mu);
    }
    return 0.0;
}

double Family::inverse_link(double eta) const {
    switch (link_) {
        case Link::identity: return eta;
        case Link::logit: return 1.0 / (1.0 + std::exp(-eta));
        case Link::log: return std::exp(eta);
    }
    return 0.0;
}

Eigen::VectorXd Family::inverse_link(const Eigen::VectorXd& eta) const {
    Eigen::VectorXd mu(eta.size());
    for (Eigen::Index i = 0; i < eta.size(); ++i) mu[i] = inverse_link(eta[i]);
    return mu;
}

double Family::irls_weight(double mu) const {
    switch (distribution_) {
        case Distribution::gaussian: return 1.0;
        case Distribution::binomial: {
            const double w = mu * (1.0 - mu);
            return w > kMuFloor ? w : kMuFloor;
        }
        case Distribution::poisson: return mu > kMuFloor ? mu : kMuFloor;
    }
    return 1.0;
}

double Family::eta_cap() const {
    switch (distribution_) {
        case Distribution::gaussian: return std::numeric_limits<double>::infinity();
        case Distribution::binomial: return 30.0;
        case Distribution::poisson: return 250.0;  // overflow guard only
    }
    return std::numeric_limits<double>::infinity();
}

double Family::deviance(const Eigen::VectorXd& y, const Eigen::VectorXd& mu) const {
    const Eigen::Index n = y.size();
    double dev = 0.0;
    switch (distribution_) {
        case Distribution::gaussian:
            for (Eigen::Index i = 0; i < n; ++i) {
                const double r = y[i] - mu[i];
                dev += r * r;
            }
            break;
        case Distribution::binomial:
            for (Eigen::Index i = 0; i < n; ++i) {
                const double p = std::min(1.0 - kProbEps, std::max(kProbEps, mu[i]));
                dev += -2.0 * (y[i] * std::log(p) + (1.0 - y[i]) * std::log1p(-p));
            }
            break;
        case Distribution::poisson:
            for (Eigen::Index i = 0; i < n; ++i) {
                const double m = std::max(kMuFloor, mu[i]);
                double term = m - y[i];
                if (y[i] > 0.0) term += y[i] * std::log(y[i] / m);
                dev += 2.0 * term;
            }
            break;
    }
    return dev;
}

double Family::log_likelihood(const Eigen::VectorXd& y, const Eigen::VectorXd& mu) const {
    const Eigen::Index n = y.size();
    switch (distribution_) {
        case Distribution::gaussian: {
            const double sigma2 = std::max(deviance(y, mu) / static_cast<double>(n), 1e-300);
            return -0.5 * static_cast<double>(n) *
                   (std::log(2.0 * M_PI * sigma2) + 1.0);
        }
        case Distribution::binomial:
            return -0.5 * deviance(y, mu);
        case Distribution::poisson: {
            double ll = 0.0;
            for (Eigen::Index i = 0; i < n; ++i) {
                const double m = std::max(kMuFloor, mu[i]);
                ll += y[i] * std::log(m) - m - std::lgamma(y[i] + 1.0);
            }
            return ll;
        }
    }
    return 0.0;
}

double Family::aic(double log_likelihood, int n_coefficients) const {
    const int k = n_coefficients + (distribution_ == Distribution::gaussian ? 1 : 0);
    return -2.0 * log_likelihood + 2.0 * static_cast<double>(k);
}

void Family::validate_response(const Eigen::VectorXd& y) const {
    for (Eigen::Index i = 0; i < y.size(); ++i) {
        const double v = y[i];
        if (!std::isfinite(v))
            throw invalid_response_error("response: non-finite value at row " + std::to_string(i + 1));
        switch (distribution_) {
            case Distribution::gaussian:
                break;
            case Distribution::binomial:
                if (v != 0.0 && v != 1.0)
                    throw invalid_response_error("response: binomial family requires values in {0,1}, got " +
                                                 std::to_string(v) + " at row " + std::to_string(i + 1));
                break;
            case Distribution::poisson:
                if (v < 0.0 || std::abs(v - std::round(v)) > 1e-8)
                    throw invalid_response_error("response: poisson family requires nonnegative integers, got " +
                                                 std::to_string(v) + " at row " + std::to_string(i + 1));
                break;
        }
    }
}

}  // namespace tsvc
