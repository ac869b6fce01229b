#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "oracles.hpp"
#include "relaygate/config.hpp"
#include "relaygate/errors.hpp"
#include "relaygate/optimizer.hpp"
#include "relaygate/queue_analytics.hpp"

#include <cmath>

using namespace relaygate;

namespace {
NetworkParams reference(double lambda_p, double lambda_s) {
    Bundle b = default_bundle();
    b.params.lambda_p = lambda_p;
    b.params.lambda_s = lambda_s;
    return b.params;
}
} // namespace

TEST_CASE("lagrangians") {
    NetworkParams p = reference(0.3, 0.1);

    SUBCASE("multipliers zero reduce to the plain delay") {
        for (double f : {0.1, 0.5, 0.9}) {
            CHECK(lagrangian_l1(p, f, 0, 0, 0.2) ==
                  doctest::Approx(secondary_delay(p, f).d_s).epsilon(1e-12));
            CHECK(lagrangian_l2(p, f, 0, 0, 0, 0.2) ==
                  doctest::Approx(lagrangian_l1(p, f, 0, 0, 0.2)).epsilon(1e-12));
        }
    }
    SUBCASE("feasible point with positive multipliers sits below the delay") {
        // f = 0.3 keeps gamma under 0.2 here, so every penalty term is <= 0
        double d_s = secondary_delay(p, 0.3).d_s;
        CHECK(gamma_at(p, 0.3) < 0.2);
        CHECK(lagrangian_l1(p, 0.3, 1.0, 1.0, 0.2) < d_s);
        CHECK(lagrangian_l2(p, 0.3, 1.0, 1.0, 1.0, 0.2) <
              lagrangian_l1(p, 0.3, 1.0, 1.0, 0.2));
    }
    SUBCASE("chained reference values") {
        CHECK(lagrangian_l1(p, 0.3, 1.0, 1.0, 0.2) ==
              doctest::Approx(1.52034337935).epsilon(1e-9));
        CHECK(lagrangian_l2(p, 0.3, 1.0, 1.0, 1.0, 0.2) ==
              doctest::Approx(1.0842033536).epsilon(1e-9));
        // and against the independent chain
        auto cr = oracles::chain(oracles::reference_input(0.3, 0.1), 0.3);
        double l1 = cr.d_s + (cr.lambda_ps - cr.mu_ps) + (cr.gamma - 0.2);
        CHECK(lagrangian_l1(p, 0.3, 1.0, 1.0, 0.2) == doctest::Approx(l1).epsilon(1e-9));
    }
    SUBCASE("instability maps to +inf") {
        NetworkParams q = reference(0.8, 0.1);
        CHECK(std::isinf(lagrangian_l1(q, 0.0, 1.0, 1.0, 0.2)));
    }
    CHECK_THROWS_AS(lagrangian_l1(p, 0.5, -1.0, 0.0, 0.2), std::invalid_argument);
    CHECK_THROWS_AS(lagrangian_l2(p, 0.5, 0.0, 0.0, -0.5, 0.2), std::invalid_argument);
}

TEST_CASE("inner minimizer") {
    NetworkParams p = reference(0.3, 0.1);

    SUBCASE("unpenalized problem rides the decreasing delay to f = 1") {
        double f = inner_minimize_f(p, {0, 0, 0}, 0.2);
        CHECK(f == doctest::Approx(1.0).epsilon(1e-6));
    }
    SUBCASE("heavy budget price pushes toward zero") {
        double f = inner_minimize_f(p, {0, 400, 0}, 0.2);
        CHECK(f <= 0.02);
    }
    SUBCASE("moderate price agrees with a fine-grid scan") {
        for (double nu2 : {2.0, 5.0, 8.0}) {
            MultiplierState m{0, nu2, 0};
            double f_lib = inner_minimize_f(p, m, 0.2);
            double best = 1e300, f_grid = 0.0;
            for (int i = 0; i <= 10000; ++i) {
                double f = i / 10000.0;
                double v = lagrangian_l2(p, f, 0, nu2, 0, 0.2);
                if (v < best) {
                    best = v;
                    f_grid = f;
                }
            }
            CHECK(std::abs(f_lib - f_grid) <= 2e-4);
        }
    }
    SUBCASE("no admissible factor raises") {
        NetworkParams q = reference(0.3, 0.6); // lambda_s above every mu_s
        CHECK_THROWS_AS(inner_minimize_f(q, {0, 0, 0}, 0.2), infeasible_error);
    }
}

TEST_CASE("brute force oracle") {
    NetworkParams p = reference(0.3, 0.1);

    SUBCASE("slack budget keeps the full acceptance") {
        CHECK(brute_force_optimal_f(p, 1.0, 1e-3) == doctest::Approx(1.0));
    }
    SUBCASE("zero budget forbids relaying") {
        CHECK(brute_force_optimal_f(p, 0.0, 1e-3) == 0.0);
    }
    SUBCASE("ties break toward smaller f") {
        // with no primary traffic the secondary delay is flat in f
        NetworkParams q = reference(0.0, 0.1);
        CHECK(brute_force_optimal_f(q, 1.0, 1e-2) == 0.0);
    }
    SUBCASE("infeasible problem raises") {
        NetworkParams q = reference(0.3, 0.6);
        CHECK_THROWS_AS(brute_force_optimal_f(q, 0.5, 1e-2), infeasible_error);
    }
    CHECK_THROWS_AS(brute_force_optimal_f(p, 0.2, 0.0), std::invalid_argument);
}

TEST_CASE("solve against the oracle") {
    SolverConfig cfg;

    SUBCASE("slack budget saturates at one") {
        NetworkParams p = reference(0.3, 0.1);
        cfg.gamma_th = 0.9; // gamma(1) ~ 0.31 here
        SolverResult r = solve(p, cfg);
        CHECK(r.f_star == doctest::Approx(1.0));
        CHECK(r.converged);
        CHECK(r.d_s_star == doctest::Approx(secondary_delay(p, 1.0).d_s));
    }
    SUBCASE("vanishing budget forces f to zero") {
        NetworkParams p = reference(0.3, 0.1);
        cfg.gamma_th = 1e-6;
        SolverResult r = solve(p, cfg);
        CHECK(r.f_star <= 1e-3);
    }
    SUBCASE("binding budget matches brute force") {
        NetworkParams p = reference(0.5, 0.1);
        cfg.gamma_th = 0.2;
        SolverResult r = solve(p, cfg);
        double oracle = brute_force_optimal_f(p, 0.2, cfg.f_grid_step);
        CHECK(std::abs(r.f_star - oracle) <= cfg.f_grid_step + 1e-3);
        CHECK(gamma_at(p, r.f_star) <= 0.2 + 1e-6);
        RateSet rs = rate_set(p, r.f_star);
        CHECK(rs.stable);
    }
    SUBCASE("multipliers stay nonnegative along the trace") {
        NetworkParams p = reference(0.4, 0.1);
        cfg.gamma_th = 0.15;
        SolverResult r = solve(p, cfg);
        for (const TracePoint& tp : r.trace) {
            CHECK(tp.multipliers.nu1 >= 0.0);
            CHECK(tp.multipliers.nu2 >= 0.0);
            CHECK(tp.multipliers.xi >= 0.0);
        }
    }
    SUBCASE("weak duality against the oracle optimum") {
        NetworkParams p = reference(0.4, 0.1);
        cfg.gamma_th = 0.15;
        SolverResult r = solve(p, cfg);
        double d_star = secondary_delay(p, brute_force_optimal_f(p, 0.15, 1e-3)).d_s;
        for (const TracePoint& tp : r.trace) {
            CHECK(tp.objective <= d_star + 1e-9);
        }
    }
    SUBCASE("complementary slackness when converged") {
        NetworkParams p = reference(0.3, 0.1);
        cfg.gamma_th = 0.9;
        SolverResult r = solve(p, cfg);
        REQUIRE(r.converged);
        CHECK(std::abs(r.kkt.stability_ps) <= 1e-3);
        CHECK(std::abs(r.kkt.power) <= 1e-3);
        CHECK(std::abs(r.kkt.stability_s) <= 1e-3);
    }
    SUBCASE("infeasible problem raises") {
        NetworkParams p = reference(0.3, 0.6);
        cfg.gamma_th = 0.5;
        CHECK_THROWS_AS(solve(p, cfg), infeasible_error);
    }
    SUBCASE("legacy nu2 rule still lands on a feasible answer") {
        NetworkParams p = reference(0.5, 0.1);
        cfg.gamma_th = 0.2;
        cfg.legacy_nu2_update = true;
        SolverResult r = solve(p, cfg);
        CHECK(gamma_at(p, r.f_star) <= 0.2 + 1e-6);
        double oracle = brute_force_optimal_f(p, 0.2, cfg.f_grid_step);
        CHECK(std::abs(r.f_star - oracle) <= cfg.f_grid_step + 1e-3);
    }
    SUBCASE("diminishing schedule works too") {
        NetworkParams p = reference(0.5, 0.1);
        cfg.gamma_th = 0.2;
        cfg.diminishing_step = true;
        SolverResult r = solve(p, cfg);
        double oracle = brute_force_optimal_f(p, 0.2, cfg.f_grid_step);
        CHECK(std::abs(r.f_star - oracle) <= cfg.f_grid_step + 1e-3);
    }
}

TEST_CASE("monotone response of the optimum") {
    SolverConfig cfg;

    SUBCASE("f* nondecreasing in the budget") {
        NetworkParams p = reference(0.5, 0.1);
        double prev = -1.0;
        for (double gth : {0.05, 0.1, 0.2, 0.3, 0.45, 0.6}) {
            cfg.gamma_th = gth;
            double f = solve(p, cfg).f_star;
            CHECK(f >= prev - 1e-9);
            prev = f;
        }
    }
    SUBCASE("f* nonincreasing in the primary load") {
        cfg.gamma_th = 0.2;
        double prev = 2.0;
        for (double lp : {0.1, 0.2, 0.3, 0.4, 0.5}) {
            double f = solve(reference(lp, 0.1), cfg).f_star;
            CHECK(f <= prev + 1e-9);
            prev = f;
        }
    }
}

TEST_CASE("shadow price surface") {
    NetworkParams p = reference(0.1, 0.1);

    SUBCASE("all-zero multipliers yield zero residuals") {
        MultiplierRanges r;
        r.nu1 = {0.0};
        r.nu2 = {0.0};
        r.xi = {0.0};
        auto cells = shadow_price_surface(p, 0.2, r);
        REQUIRE(cells.size() == 1);
        CHECK(cells[0].feasible);
        CHECK(cells[0].residuals.stability_ps == 0.0);
        CHECK(cells[0].residuals.power == 0.0);
        CHECK(cells[0].residuals.stability_s == 0.0);
    }
    SUBCASE("nu2 sweep produces finite residual curves") {
        MultiplierRanges r;
        r.nu1 = {0.0};
        r.xi = {0.0};
        for (int i = 0; i <= 40; ++i) r.nu2.push_back(i * 0.25);
        auto cells = shadow_price_surface(p, 0.2, r);
        REQUIRE(cells.size() == 41);
        for (const auto& c : cells) {
            REQUIRE(c.feasible);
            CHECK(std::isfinite(c.objective));
            // stability products are multiplier * negative slack at stable points
            CHECK(c.residuals.stability_ps <= 1e-12);
            CHECK(c.residuals.stability_s <= 1e-12);
        }
    }
    SUBCASE("infeasible cells are marked, not fatal") {
        NetworkParams q = reference(0.3, 0.6);
        MultiplierRanges r;
        r.nu1 = {0.0, 1.0};
        r.nu2 = {0.0};
        r.xi = {0.0};
        auto cells = shadow_price_surface(q, 0.2, r);
        REQUIRE(cells.size() == 2);
        for (const auto& c : cells) CHECK_FALSE(c.feasible);
    }
}
