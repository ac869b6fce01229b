#pragma once

#include "relaygate/params.hpp"
#include "relaygate/queue_analytics.hpp"

namespace relaygate {

// Two readings of the overflow expression. `literal` truncates the printed
// sum with a flat per-state occupancy quantity (clamped into [0,1]);
// `geometric_matched` (default) fits a geometric occupancy to the
// Pollaczek-Khinchin mean so the result is a true probability with the
// expected monotonicity in load and buffer room.
enum class BufferMode { literal, geometric_matched };

struct BufferMetrics {
    int k = 0;         // room limit K (packets)
    double p_n = 0.0;  // Pollaczek-Khinchin occupancy quantity
    double p_ov = 0.0; // overflow probability
    double p_b = 0.0;  // blocking probability
    BufferMode mode = BufferMode::geometric_matched;
};

// Pollaczek-Khinchin mean number in system, rho + lambda^2 E[S^2]/(2(1-rho)).
// Requires rho = lambda * E[S] < 1.
double occupancy_quantity(double lambda, const ServiceMoments& moments);

// Probability an arrival finds more than k packets already present.
double overflow_probability(double lambda, const ServiceMoments& moments, int k,
                            BufferMode mode = BufferMode::geometric_matched);

// Finite-buffer blocking approximation (1-rho) p_ov / (1 - rho p_ov);
// always <= p_ov for rho in [0,1).
double blocking_probability(double p_ov, double rho);

// d p_ov / d rho in the flat-occupancy reading: lambda^2 E[S^2]/(rho-1)^2 + 1.
// Defined on the open interval 0 < rho < 1; always >= 1.
double overflow_derivative(double lambda, const ServiceMoments& moments, double rho);

// Buffer metrics of the relaying queue at acceptance factor f: arrival rate
// and service moments come from rate_set(f).
BufferMetrics relay_buffer_metrics(const NetworkParams& params, double f, int k,
                                   BufferMode mode = BufferMode::geometric_matched);

} // namespace relaygate
