#include "relaygate/channel.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

namespace relaygate {

namespace {

constexpr double kEulerGamma = 0.57721566490153286060651209;

double e1_series(double x) {
    // E1(x) = -gamma - ln x + sum_{k>=1} (-1)^{k+1} x^k / (k * k!)
    double sum = 0.0;
    double term = 1.0;
    for (int k = 1; k <= 60; ++k) {
        term *= -x / k;
        double contrib = -term / k;
        sum += contrib;
        if (std::abs(contrib) < std::abs(sum) * 1e-17) break;
    }
    return -kEulerGamma - std::log(x) + sum;
}

double e1_continued_fraction(double x) {
    // Modified Lentz evaluation of
    //   E1(x) = exp(-x) / (x + 1 - 1/(x + 3 - 4/(x + 5 - 9/(...))))
    const double tiny = 1e-300;
    double b = x + 1.0;
    double c = 1.0 / tiny;
    double d = 1.0 / b;
    double h = d;
    for (int i = 1; i <= 200; ++i) {
        double a = -static_cast<double>(i) * i;
        b += 2.0;
        d = a * d + b;
        if (std::abs(d) < tiny) d = tiny;
        c = b + a / c;
        if (std::abs(c) < tiny) c = tiny;
        d = 1.0 / d;
        double del = d * c;
        h *= del;
        if (std::abs(del - 1.0) < 1e-15) break;
    }
    return h * std::exp(-x);
}

} // namespace

double exp_integral_e1(double x) {
    if (!(x > 0.0) || !std::isfinite(x))
        throw std::domain_error("exp_integral_e1: argument must be finite and > 0");
    if (x < 1.0) return e1_series(x);
    if (x > 700.0) return 0.0; // exp(-x) underflows; true value < 1e-306
    return e1_continued_fraction(x);
}

double outage_probability(const LinkParams& link) {
    link.validate("link");
    if (link.gamma_th == 0.0) return 0.0;
    return -std::expm1(-link.gamma_th / (link.sigma2 * link.p_max));
}

double expected_relay_power(const LinkParams& link) {
    link.validate("link");
    if (link.gamma_th == 0.0) return 0.0; // no power needed, by continuity
    double a = link.gamma_th / (link.sigma2 * link.p_max);
    return link.gamma_th / link.sigma2 * exp_integral_e1(a);
}

PowerBudgetReport power_budget(const NetworkParams& params, double f, double lambda_ps) {
    params.validate();
    if (!(f >= 0.0 && f <= 1.0))
        throw std::invalid_argument("power_budget: f must be in [0, 1]");
    if (!(lambda_ps >= 0.0) || !std::isfinite(lambda_ps))
        throw std::invalid_argument("power_budget: lambda_ps must be >= 0");

    PowerBudgetReport r;
    const LinkParams& sp = params.link_sp;
    const LinkParams& s = params.link_s;
    if (sp.gamma_th > 0.0) {
        r.eps_sp = exp_integral_e1(sp.gamma_th / (sp.sigma2 * sp.p_max));
        r.e_psp = sp.gamma_th / sp.sigma2 * r.eps_sp;
    }
    if (s.gamma_th > 0.0) {
        r.eps_s = exp_integral_e1(s.gamma_th / (s.sigma2 * s.p_max));
        r.e_ps = s.gamma_th / s.sigma2 * r.eps_s;
    }
    double relay = lambda_ps * sp.gamma_th * r.eps_sp * s.sigma2;
    double own = params.lambda_s * s.gamma_th * r.eps_s * sp.sigma2;
    r.gamma = (relay + own > 0.0) ? relay / (relay + own) : 0.0;
    return r;
}

} // namespace relaygate
