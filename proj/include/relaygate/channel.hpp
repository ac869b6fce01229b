#pragma once

#include "relaygate/params.hpp"

namespace relaygate {

// Exponential integral E1(x) = int_x^inf exp(-t)/t dt for x > 0.
// Power series below 1, continued fraction above; relative error target
// 1e-12 across [1e-6, 50]. Diverges like -log(x) as x -> 0+.
double exp_integral_e1(double x);

// Probability that |g|^2 * p_max falls below gamma_th under Rayleigh fading:
// 1 - exp(-gamma_th / (sigma2 * p_max)). Zero threshold is never in outage.
double outage_probability(const LinkParams& link);

// Mean transmit power per packet under the minimum-power rule with ceiling
// p_max: (gamma_th/sigma2) * E1(gamma_th/(sigma2*p_max)). Defined as 0 at
// gamma_th = 0. Grows logarithmically in p_max but is finite for any
// p_max > 0.
double expected_relay_power(const LinkParams& link);

struct PowerBudgetReport {
    double gamma = 0.0;  // relay share of per-slot transmit power, in [0,1]
    double e_psp = 0.0;  // mean relay power per packet on the sp link
    double e_ps = 0.0;   // mean secondary power per packet on the s link
    double eps_sp = 0.0; // E1 factor of the sp link (0 when gamma_th = 0)
    double eps_s = 0.0;  // E1 factor of the s link
};

// Relay power budget ratio at acceptance factor f, with lambda_ps the relay
// queue arrival rate at that f (supplied by queue_analytics::rate_set).
// Both flows zero -> gamma defined as 0.
PowerBudgetReport power_budget(const NetworkParams& params, double f, double lambda_ps);

} // namespace relaygate
