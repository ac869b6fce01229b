#include "relaygate/buffer_models.hpp"

#include "relaygate/errors.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace relaygate {

double occupancy_quantity(double lambda, const ServiceMoments& moments) {
    if (!(lambda >= 0.0) || !std::isfinite(lambda))
        throw std::invalid_argument("occupancy_quantity: lambda must be >= 0");
    double rho = lambda * moments.e_s;
    if (!(rho < 1.0)) throw instability_error("rho < 1");
    return rho + lambda * lambda * moments.e_s2 / (2.0 * (1.0 - rho));
}

double overflow_probability(double lambda, const ServiceMoments& moments, int k,
                            BufferMode mode) {
    if (k < 0) throw std::invalid_argument("overflow_probability: k must be >= 0");
    double l = occupancy_quantity(lambda, moments);
    if (lambda == 0.0) return 0.0; // empty system never overflows
    if (mode == BufferMode::literal)
        return std::clamp(1.0 - (k + 1) * l, 0.0, 1.0);
    double sigma = l / (1.0 + l);
    return std::pow(sigma, k + 1);
}

double blocking_probability(double p_ov, double rho) {
    if (!(p_ov >= 0.0 && p_ov <= 1.0))
        throw std::invalid_argument("blocking_probability: p_ov must be in [0, 1]");
    if (!(rho >= 0.0 && rho < 1.0))
        throw std::invalid_argument("blocking_probability: rho must be in [0, 1)");
    return (1.0 - rho) * p_ov / (1.0 - rho * p_ov);
}

double overflow_derivative(double lambda, const ServiceMoments& moments, double rho) {
    if (!(rho > 0.0 && rho < 1.0))
        throw std::domain_error("overflow_derivative: rho must be in (0, 1)");
    double gap = rho - 1.0;
    return lambda * lambda * moments.e_s2 / (gap * gap) + 1.0;
}

BufferMetrics relay_buffer_metrics(const NetworkParams& params, double f, int k,
                                   BufferMode mode) {
    RateSet rs = rate_set(params, f);
    if (!rs.stable) throw instability_error(rs.violated);
    ServiceMoments m = geometric_moments(rs.mu_ps);

    BufferMetrics out;
    out.k = k;
    out.mode = mode;
    out.p_n = occupancy_quantity(rs.lambda_ps, m);
    out.p_ov = overflow_probability(rs.lambda_ps, m, k, mode);
    out.p_b = blocking_probability(out.p_ov, rs.rho_ps);
    return out;
}

} // namespace relaygate
