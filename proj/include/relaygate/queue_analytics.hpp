#pragma once

#include "relaygate/errors.hpp"
#include "relaygate/params.hpp"

#include <string>

namespace relaygate {

// First two moments of a service time. For Geometric(p) service over slots:
// E[S] = 1/p, E[S^2] = (1-p)/p^2.
struct ServiceMoments {
    double e_s = 1.0;
    double e_s2 = 0.0;
};

ServiceMoments geometric_moments(double p);

// Per-queue arrival/service rates and utilizations at a given acceptance
// factor. `stable` requires all three strict inequalities
// lambda_p < mu_p, lambda_ps < mu_ps, lambda_s < mu_s; when it fails,
// `violated` names the first broken one and delay operations refuse to run.
struct RateSet {
    double mu_p = 0.0;
    double lambda_ps = 0.0;
    double mu_ps = 0.0;
    double mu_s = 0.0;
    double rho_p = 0.0;
    double rho_ps = 0.0;
    double rho_s = 0.0;
    bool stable = false;
    std::string violated; // empty when stable
};

RateSet rate_set(const NetworkParams& params, double f);

// Mean sojourn time of primary packets, (1 - lambda_p)/(mu_p - lambda_p).
double primary_delay(const NetworkParams& params, double f);

struct DelayBreakdown {
    double d_p = 0.0; // primary queue sojourn
    double d1 = 0.0;  // residual service seen on arrival
    double d2 = 0.0;  // backlog already queued (includes the secondary share)
    double d3 = 0.0;  // primary traffic arriving while waiting
    double d_s = 0.0; // total secondary sojourn, (d1 + 2 rho_p d_p)/(1 - rho_s)
};

// Secondary delay decomposition at acceptance factor f. Throws
// instability_error naming the violated constraint when the rate set at f
// is not stable.
DelayBreakdown secondary_delay(const NetworkParams& params, double f);

// d/df of the secondary delay under the fixed-utilization view: rho_p,
// rho_s and the Geometric residual factors are held at their values at f,
// only rho_ps and the primary delay vary. The exact coefficients are
//   A = R_ps / ((1-rho_p)(1-rho_s)),  B = 2 rho_p / (1-rho_s),  C = 0,
// with R_ps = E[S_ps^2]/(2 E[S_ps]), applied to
//   rho_ps'(f) = b lambda_p (1 - P_out,p - lambda_p)
//                / ((1-P_out,sp)(mu_p-lambda_p)^2),   b = P_out,p (1-P_out,ps)
//   d_p'(f)    = -(1-lambda_p) b / (mu_p-lambda_p)^2.
double secondary_delay_derivative(const NetworkParams& params, double f);

// The function the derivative above differentiates: the secondary delay
// assembly with rho_p, rho_s and the residual factors frozen at anchor_f
// while rho_ps and the primary delay are evaluated at f. Used by the
// finite-difference consistency checks.
double secondary_delay_frozen_utilization(const NetworkParams& params, double f,
                                          double anchor_f);

} // namespace relaygate
