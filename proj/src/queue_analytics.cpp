#include "relaygate/queue_analytics.hpp"

#include "relaygate/channel.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

namespace relaygate {

namespace {

struct Outages {
    double p, ps, sp, s;
};

Outages outages(const NetworkParams& params) {
    return {outage_probability(params.link_p), outage_probability(params.link_ps),
            outage_probability(params.link_sp), outage_probability(params.link_s)};
}

void check_f(double f) {
    if (!(f >= 0.0 && f <= 1.0))
        throw std::invalid_argument("acceptance factor must be in [0, 1]");
}

// Residual service factor E[S^2]/(2 E[S]) = (1-p)/(2p) for Geometric(p).
double residual_factor(double p) {
    ServiceMoments m = geometric_moments(p);
    return m.e_s2 / (2.0 * m.e_s);
}

} // namespace

ServiceMoments geometric_moments(double p) {
    if (!(p > 0.0 && p <= 1.0))
        throw std::invalid_argument("geometric_moments: success probability must be in (0, 1]");
    return {1.0 / p, (1.0 - p) / (p * p)};
}

RateSet rate_set(const NetworkParams& params, double f) {
    params.validate();
    check_f(f);
    Outages out = outages(params);

    RateSet rs;
    rs.mu_p = (1.0 - out.p) + f * out.p * (1.0 - out.ps);
    if (rs.mu_p <= params.lambda_p) {
        rs.stable = false;
        rs.violated = "lambda_p < mu_p";
        rs.rho_p = rs.mu_p > 0.0 ? params.lambda_p / rs.mu_p
                                 : std::numeric_limits<double>::infinity();
        return rs;
    }
    rs.rho_p = params.lambda_p / rs.mu_p;

    // Share of slots holding a failed primary transmission that the relay
    // decodes and admits.
    rs.lambda_ps = f * out.p * (1.0 - out.ps) * rs.rho_p;
    rs.mu_ps = (1.0 - rs.rho_p) * (1.0 - out.sp);
    rs.rho_ps = rs.mu_ps > 0.0 ? rs.lambda_ps / rs.mu_ps
                               : (rs.lambda_ps > 0.0 ? std::numeric_limits<double>::infinity() : 0.0);
    if (!(rs.lambda_ps < rs.mu_ps)) rs.violated = "lambda_ps < mu_ps";

    // rho_ps clamped so an already-unstable relay queue cannot push mu_s
    // below zero; stable rate sets are unaffected.
    rs.mu_s = (1.0 - rs.rho_p) * (1.0 - out.s) *
              (1.0 - std::min(rs.rho_ps, 1.0) * (1.0 - out.sp));
    rs.rho_s = rs.mu_s > 0.0 ? params.lambda_s / rs.mu_s
                             : (params.lambda_s > 0.0 ? std::numeric_limits<double>::infinity() : 0.0);
    if (rs.violated.empty() && !(params.lambda_s < rs.mu_s))
        rs.violated = "lambda_s < mu_s";

    rs.stable = rs.violated.empty();
    return rs;
}

double primary_delay(const NetworkParams& params, double f) {
    RateSet rs = rate_set(params, f);
    if (params.lambda_p >= rs.mu_p) throw instability_error("lambda_p < mu_p");
    return (1.0 - params.lambda_p) / (rs.mu_p - params.lambda_p);
}

DelayBreakdown secondary_delay(const NetworkParams& params, double f) {
    RateSet rs = rate_set(params, f);
    if (!rs.stable) throw instability_error(rs.violated);

    double r_ps = residual_factor(rs.mu_ps);
    double r_s = residual_factor(rs.mu_s);

    DelayBreakdown d;
    d.d_p = (1.0 - params.lambda_p) / (rs.mu_p - params.lambda_p);
    d.d1 = rs.rho_s / (1.0 - rs.rho_p) * r_s + rs.rho_ps / (1.0 - rs.rho_p) * r_ps;
    d.d_s = (d.d1 + 2.0 * rs.rho_p * d.d_p) / (1.0 - rs.rho_s);
    d.d3 = rs.rho_p * d.d_p;
    d.d2 = rs.rho_p * d.d_p + rs.rho_s * d.d_s;
    return d;
}

double secondary_delay_derivative(const NetworkParams& params, double f) {
    RateSet rs = rate_set(params, f);
    if (!rs.stable) throw instability_error(rs.violated);
    Outages out = outages(params);

    double b = out.p * (1.0 - out.ps);
    double gap = rs.mu_p - params.lambda_p;
    double a_coef = residual_factor(rs.mu_ps) / ((1.0 - rs.rho_p) * (1.0 - rs.rho_s));
    double b_coef = 2.0 * rs.rho_p / (1.0 - rs.rho_s);

    double rho_ps_prime =
        b * params.lambda_p * (1.0 - out.p - params.lambda_p) /
        ((1.0 - out.sp) * gap * gap);
    double d_p_prime = -(1.0 - params.lambda_p) * b / (gap * gap);

    return a_coef * rho_ps_prime + b_coef * d_p_prime;
}

double secondary_delay_frozen_utilization(const NetworkParams& params, double f,
                                          double anchor_f) {
    RateSet anchor = rate_set(params, anchor_f);
    if (!anchor.stable) throw instability_error(anchor.violated);
    RateSet rs = rate_set(params, f);
    if (params.lambda_p >= rs.mu_p) throw instability_error("lambda_p < mu_p");

    double r_ps = residual_factor(anchor.mu_ps);
    double r_s = residual_factor(anchor.mu_s);
    double d_p = (1.0 - params.lambda_p) / (rs.mu_p - params.lambda_p);
    double d1 = anchor.rho_s / (1.0 - anchor.rho_p) * r_s +
                rs.rho_ps / (1.0 - anchor.rho_p) * r_ps;
    return (d1 + 2.0 * anchor.rho_p * d_p) / (1.0 - anchor.rho_s);
}

} // namespace relaygate
