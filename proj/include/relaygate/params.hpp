#pragma once

#include <cmath>
#include <stdexcept>
#include <string>

namespace relaygate {

inline double db_to_linear(double db) { return std::pow(10.0, db / 10.0); }
inline double linear_to_db(double x) { return 10.0 * std::log10(x); }

// One fading link. All quantities are linear (dB conversion happens at the
// config boundary). gamma_th is the SNR decode threshold, sigma2 the mean of
// the exponentially distributed channel power gain |g|^2, p_max the transmit
// power ceiling in the same normalized units as the noise floor.
struct LinkParams {
    double gamma_th = 1.0;
    double sigma2 = 1.0;
    double p_max = 1.0;

    void validate(const std::string& name) const {
        if (!(gamma_th >= 0.0) || !std::isfinite(gamma_th))
            throw std::invalid_argument(name + ".gamma_th must be >= 0");
        if (!(sigma2 > 0.0) || !std::isfinite(sigma2))
            throw std::invalid_argument(name + ".sigma2 must be > 0");
        if (!(p_max > 0.0) || !std::isfinite(p_max))
            throw std::invalid_argument(name + ".p_max must be > 0");
    }
};

// The four links of the relaying topology plus the two exogenous arrival
// rates (packets/slot). Link indices: p = PU-Tx->PU-Rx, ps = PU-Tx->SU-Tx,
// sp = SU-Tx->PU-Rx, s = SU-Tx->SU-Rx.
struct NetworkParams {
    LinkParams link_p;
    LinkParams link_s;
    LinkParams link_ps;
    LinkParams link_sp;
    double lambda_p = 0.3;
    double lambda_s = 0.1;

    void validate() const {
        link_p.validate("links.p");
        link_s.validate("links.s");
        link_ps.validate("links.ps");
        link_sp.validate("links.sp");
        if (!(lambda_p >= 0.0 && lambda_p < 1.0))
            throw std::invalid_argument("lambda_p must be in [0, 1)");
        if (!(lambda_s >= 0.0 && lambda_s < 1.0))
            throw std::invalid_argument("lambda_s must be in [0, 1)");
    }
};

} // namespace relaygate
