#pragma once

#include "relaygate/params.hpp"

#include <stdexcept>
#include <vector>

namespace relaygate {

// Lagrange multipliers of the decomposed problem: nu1 for the relay queue
// stability coupling, nu2 for the power budget, xi for the secondary queue
// stability. All projected onto [0, inf).
struct MultiplierState {
    double nu1 = 0.0;
    double nu2 = 0.0;
    double xi = 0.0;
};

struct SolverConfig {
    double gamma_th = 0.2;    // power budget ceiling, in (0, 1]
    double step_alpha = 0.1;  // subgradient step size
    double eps_conv = 1e-5;   // stop a loop when the multiplier moves <= this
    int max_outer = 200;      // cap for each of the nu1 and nu2 loops
    int max_inner = 500;      // cap for the xi loop
    double f_grid_step = 1e-3; // brute-force oracle granularity
    bool diminishing_step = false;  // alpha / sqrt(k) schedule instead of constant
    bool legacy_nu2_update = false; // nu2 += alpha * nu1 as literally printed

    void validate() const {
        if (!(gamma_th > 0.0 && gamma_th <= 1.0))
            throw std::invalid_argument("solver.gamma_th must be in (0, 1]");
        if (!(step_alpha > 0.0)) throw std::invalid_argument("solver.step_alpha must be > 0");
        if (!(eps_conv > 0.0)) throw std::invalid_argument("solver.eps_conv must be > 0");
        if (max_outer <= 0 || max_inner <= 0)
            throw std::invalid_argument("solver iteration caps must be > 0");
        if (!(f_grid_step > 0.0 && f_grid_step <= 1e-2))
            throw std::invalid_argument("solver.f_grid_step must be in (0, 1e-2]");
    }
};

// One row of the iteration trace: loop indices, the inner minimizer, the
// multipliers it was computed under, the dual value and the budget there.
struct TracePoint {
    int iter_outer = 0;
    int iter_mid = 0;
    int iter_inner = 0;
    double f = 0.0;
    MultiplierState multipliers;
    double objective = 0.0; // dual value g2 = min_f L2
    double gamma = 0.0;
    bool feasible = false;
};

// KKT products nu1*(lambda_ps-mu_ps), nu2*(Gamma-Gamma_th), xi*(lambda_s-mu_s).
struct KktResiduals {
    double stability_ps = 0.0;
    double power = 0.0;
    double stability_s = 0.0;
};

struct SolverResult {
    double f_star = 0.0;
    double d_s_star = 0.0;
    MultiplierState multipliers;
    KktResiduals kkt;
    std::vector<TracePoint> trace;
    bool converged = false;
};

// First-level Lagrangian: secondary delay plus the relay stability and power
// budget penalty terms. Unstable f evaluates to +inf.
double lagrangian_l1(const NetworkParams& params, double f, double nu1, double nu2,
                     double gamma_th);

// Second-level Lagrangian: lagrangian_l1 plus xi*(lambda_s - mu_s).
double lagrangian_l2(const NetworkParams& params, double f, double nu1, double nu2,
                     double xi, double gamma_th);

// argmin over f in [0,1] of lagrangian_l2 subject to lambda_p < mu_p(f);
// other instabilities act as +inf penalties. A coarse pre-scan brackets the
// minimum (and detects non-unimodal shapes, falling back to a fine grid)
// before golden-section refinement. Throws infeasible_error when no f is
// admissible.
double inner_minimize_f(const NetworkParams& params, const MultiplierState& m,
                        double gamma_th);

// Nested projected-subgradient solve: xi innermost, nu1 middle, nu2 outermost,
// each stopping when its multiplier moves by at most eps_conv. A primal
// recovery step then returns the best feasible acceptance factor, so the
// result satisfies Gamma(f*) <= gamma_th and all stability constraints even
// if a loop hit its iteration cap (converged=false in that case).
SolverResult solve(const NetworkParams& params, const SolverConfig& config);

// Independent grid oracle for the same problem: scans f in {0, step, ..., 1},
// keeps points satisfying all four constraints, returns the delay-minimizing
// one with ties broken toward smaller f. Throws infeasible_error when no
// grid point is feasible.
double brute_force_optimal_f(const NetworkParams& params, double gamma_th,
                             double grid_step);

struct MultiplierRanges {
    std::vector<double> nu1;
    std::vector<double> nu2;
    std::vector<double> xi;
};

struct ShadowPriceCell {
    MultiplierState multipliers;
    double f = 0.0;
    KktResiduals residuals;
    double objective = 0.0;
    bool feasible = false;
};

// Evaluates the inner minimizer over a grid of multiplier tuples and reports
// the KKT products and dual objective behind the sensitivity surfaces.
// Cells whose inner problem is infeasible are marked, not fatal.
std::vector<ShadowPriceCell> shadow_price_surface(const NetworkParams& params,
                                                  double gamma_th,
                                                  const MultiplierRanges& ranges);

// Budget ratio Gamma at acceptance factor f (rate_set + power_budget chained).
double gamma_at(const NetworkParams& params, double f);

} // namespace relaygate
