#include "relaygate/cli_driver.hpp"

#include "relaygate/buffer_models.hpp"
#include "relaygate/channel.hpp"
#include "relaygate/config.hpp"
#include "relaygate/csv.hpp"
#include "relaygate/errors.hpp"
#include "relaygate/figures.hpp"
#include "relaygate/optimizer.hpp"
#include "relaygate/queue_analytics.hpp"
#include "relaygate/simulator.hpp"

#include <CLI11.hpp>

#include <cstdio>
#include <fstream>
#include <iostream>
#include <memory>
#include <sstream>

namespace relaygate {

namespace {

constexpr int kExitOk = 0;
constexpr int kExitUsage = 1;
constexpr int kExitConfig = 2;
constexpr int kExitInfeasible = 3;
constexpr int kExitNoConvergence = 4;

struct CliOptions {
    std::string config_path;
    std::string out_path;
    std::vector<std::string> overrides;
    std::string mode;
    double grid_step = -1.0;
    long long seed = -1;
};

Bundle load_bundle(const CliOptions& opt) {
    Bundle b;
    if (!opt.config_path.empty()) {
        std::ifstream in(opt.config_path);
        if (!in) throw config_error("cannot read config file: " + opt.config_path);
        std::stringstream ss;
        ss << in.rdbuf();
        b = parse_config(ss.str());
    } else {
        b = default_bundle();
    }
    apply_overrides(b, opt.overrides);
    if (opt.seed >= 0) b.sim.seed = static_cast<std::uint64_t>(opt.seed);
    if (!opt.mode.empty()) {
        if (opt.mode == "literal")
            b.mode = BufferMode::literal;
        else if (opt.mode == "geometric_matched")
            b.mode = BufferMode::geometric_matched;
        else
            throw config_error("--mode must be literal or geometric_matched");
    }
    return b;
}

int cmd_eval(const Bundle& b) {
    RateSet rs = rate_set(b.params, b.f);
    PowerBudgetReport pb = power_budget(b.params, b.f, rs.lambda_ps);
    std::printf("f          %.6g\n", b.f);
    std::printf("mu_p       %.6g\n", rs.mu_p);
    std::printf("lambda_ps  %.6g\n", rs.lambda_ps);
    std::printf("mu_ps      %.6g\n", rs.mu_ps);
    std::printf("mu_s       %.6g\n", rs.mu_s);
    std::printf("rho_p      %.6g\n", rs.rho_p);
    std::printf("rho_ps     %.6g\n", rs.rho_ps);
    std::printf("rho_s      %.6g\n", rs.rho_s);
    std::printf("gamma      %.6g\n", pb.gamma);
    std::printf("stable     %s\n", rs.stable ? "yes" : rs.violated.c_str());
    if (!rs.stable) return kExitInfeasible;
    DelayBreakdown d = secondary_delay(b.params, b.f);
    std::printf("d_p        %.6g\n", d.d_p);
    std::printf("d1         %.6g\n", d.d1);
    std::printf("d2         %.6g\n", d.d2);
    std::printf("d3         %.6g\n", d.d3);
    std::printf("d_s        %.6g\n", d.d_s);
    std::printf("d_s'       %.6g\n", secondary_delay_derivative(b.params, b.f));
    BufferMetrics bm = relay_buffer_metrics(b.params, b.f, b.buffer_k, b.mode);
    std::printf("p_n(K=%d)  %.6g\n", bm.k, bm.p_n);
    std::printf("p_ov       %.6g\n", bm.p_ov);
    std::printf("p_b        %.6g\n", bm.p_b);
    return kExitOk;
}

int cmd_sweep(const Bundle& b, const CliOptions& opt) {
    double step = opt.grid_step > 0.0 ? opt.grid_step : 0.01;
    std::string path = opt.out_path.empty() ? "sweep.csv" : opt.out_path;
    CsvWriter csv(path);
    csv.header({"f", "mu_p", "lambda_ps", "mu_ps", "mu_s", "rho_p", "rho_ps", "rho_s",
                "d_p", "d_s", "gamma", "feasible"});
    long long n = std::llround(1.0 / step);
    for (long long i = 0; i <= n; ++i) {
        double f = std::min(1.0, static_cast<double>(i) * step);
        RateSet rs = rate_set(b.params, f);
        double gamma = power_budget(b.params, f, rs.lambda_ps).gamma;
        std::vector<std::string> row{
            CsvWriter::num(f),         CsvWriter::num(rs.mu_p),
            CsvWriter::num(rs.lambda_ps), CsvWriter::num(rs.mu_ps),
            CsvWriter::num(rs.mu_s),   CsvWriter::num(rs.rho_p),
            CsvWriter::num(rs.rho_ps), CsvWriter::num(rs.rho_s)};
        if (rs.stable) {
            DelayBreakdown d = secondary_delay(b.params, f);
            row.push_back(CsvWriter::num(d.d_p));
            row.push_back(CsvWriter::num(d.d_s));
            row.push_back(CsvWriter::num(gamma));
            row.push_back("1");
        } else {
            row.push_back("infeasible");
            row.push_back("infeasible");
            row.push_back(CsvWriter::num(gamma));
            row.push_back("0");
        }
        csv.raw_row(row);
    }
    std::printf("wrote %s\n", path.c_str());
    return kExitOk;
}

int cmd_solve(Bundle b, const CliOptions& opt) {
    if (opt.grid_step > 0.0) {
        b.solver.f_grid_step = opt.grid_step; // oracle granularity here
        try {
            b.solver.validate();
        } catch (const std::invalid_argument& e) {
            throw config_error(e.what());
        }
    }
    SolverResult res = solve(b.params, b.solver);
    double oracle = brute_force_optimal_f(b.params, b.solver.gamma_th, b.solver.f_grid_step);
    std::printf("f_star       %.9g\n", res.f_star);
    std::printf("d_s_star     %.9g\n", res.d_s_star);
    std::printf("gamma(f*)    %.9g (threshold %.9g)\n", gamma_at(b.params, res.f_star),
                b.solver.gamma_th);
    std::printf("nu1          %.9g\n", res.multipliers.nu1);
    std::printf("nu2          %.9g\n", res.multipliers.nu2);
    std::printf("xi           %.9g\n", res.multipliers.xi);
    std::printf("kkt_nu1      %.9g\n", res.kkt.stability_ps);
    std::printf("kkt_nu2      %.9g\n", res.kkt.power);
    std::printf("kkt_xi       %.9g\n", res.kkt.stability_s);
    std::printf("iterations   %zu\n", res.trace.size());
    std::printf("converged    %s\n", res.converged ? "yes" : "no");
    std::printf("f_bruteforce %.9g\n", oracle);
    if (!opt.out_path.empty()) {
        CsvWriter csv(opt.out_path);
        csv.header({"iter_outer", "iter_mid", "iter_inner", "f", "nu1", "nu2", "xi",
                    "objective", "gamma", "feasible"});
        for (const TracePoint& tp : res.trace) {
            csv.raw_row({CsvWriter::num(tp.iter_outer), CsvWriter::num(tp.iter_mid),
                         CsvWriter::num(tp.iter_inner), CsvWriter::num(tp.f),
                         CsvWriter::num(tp.multipliers.nu1), CsvWriter::num(tp.multipliers.nu2),
                         CsvWriter::num(tp.multipliers.xi), CsvWriter::num(tp.objective),
                         CsvWriter::num(tp.gamma), tp.feasible ? "1" : "0"});
        }
        std::printf("wrote %s\n", opt.out_path.c_str());
    }
    return res.converged ? kExitOk : kExitNoConvergence;
}

class CsvSlotObserver : public SlotObserver {
  public:
    explicit CsvSlotObserver(const std::string& path) : csv_(path) {
        csv_.header({"slot", "event", "q_p", "q_ps", "q_s", "energy"});
    }
    void on_slot(std::int64_t slot, const char* event, std::size_t q_p, std::size_t q_ps,
                 std::size_t q_s, double energy) override {
        csv_.raw_row({CsvWriter::num(static_cast<long long>(slot)), event,
                      CsvWriter::num(static_cast<long long>(q_p)),
                      CsvWriter::num(static_cast<long long>(q_ps)),
                      CsvWriter::num(static_cast<long long>(q_s)), CsvWriter::num(energy)});
    }

  private:
    CsvWriter csv_;
};

int cmd_simulate(const Bundle& b, const CliOptions& opt) {
    SimConfig cfg = b.sim;
    cfg.params = b.params;
    cfg.f = b.f;

    std::unique_ptr<CsvSlotObserver> observer;
    if (b.sim_trace) {
        std::string trace_path =
            (opt.out_path.empty() ? std::string("simulate") : opt.out_path) + ".trace.csv";
        observer = std::make_unique<CsvSlotObserver>(trace_path);
    }

    ComparisonReport rep;
    SimStats stats = run(cfg, observer.get());
    rep = compare_with_analytics(cfg); // analytic side throws on instability
    std::printf("%-10s %14s %14s %12s %12s\n", "metric", "analytic", "empirical", "rel_err",
                "std_err");
    for (const ComparisonRow& r : rep.rows) {
        std::printf("%-10s %14.6g %14.6g %12.4g %12.4g\n", r.name.c_str(), r.analytic,
                    r.empirical, r.rel_err, r.std_err);
    }
    if (stats.divergence) std::printf("divergence flag set\n");

    if (!opt.out_path.empty()) {
        CsvWriter csv(opt.out_path);
        csv.header({"replication", "mu_p", "lambda_ps", "mu_ps", "mu_s", "d_p", "d_s",
                    "gamma_hat", "raw_energy_fraction", "blocking_fraction", "drops",
                    "conserved"});
        for (std::size_t r = 0; r < stats.replications.size(); ++r) {
            const RepStats& rs = stats.replications[r];
            csv.raw_row({CsvWriter::num(static_cast<long long>(r)), CsvWriter::num(rs.mu_p),
                         CsvWriter::num(rs.lambda_ps), CsvWriter::num(rs.mu_ps),
                         CsvWriter::num(rs.mu_s), CsvWriter::num(rs.mean_d_p),
                         CsvWriter::num(rs.mean_d_s), CsvWriter::num(rs.gamma_hat),
                         CsvWriter::num(rs.raw_energy_fraction),
                         CsvWriter::num(rs.blocking_fraction),
                         CsvWriter::num(static_cast<long long>(rs.ledger.drops)),
                         rs.ledger.conserved() ? "1" : "0"});
        }
        csv.raw_row({"mean", CsvWriter::num(stats.mu_p.mean), CsvWriter::num(stats.lambda_ps.mean),
                     CsvWriter::num(stats.mu_ps.mean), CsvWriter::num(stats.mu_s.mean),
                     CsvWriter::num(stats.mean_d_p.mean), CsvWriter::num(stats.mean_d_s.mean),
                     CsvWriter::num(stats.empirical_gamma.mean),
                     CsvWriter::num(stats.raw_energy_fraction.mean),
                     CsvWriter::num(stats.blocking_fraction.mean),
                     CsvWriter::num(static_cast<long long>(stats.drop_count)), ""});
        std::printf("wrote %s\n", opt.out_path.c_str());
    }
    return kExitOk;
}

int cmd_figures(const Bundle& b, const CliOptions& opt) {
    std::string dir = opt.out_path.empty() ? "figures" : opt.out_path;
    for (const std::string& f : run_figures(b, dir)) std::printf("wrote %s\n", f.c_str());
    return kExitOk;
}

} // namespace

int run_cli(const std::vector<std::string>& args) {
    CLI::App app{"relay_gate: cognitive relaying delay/power analysis, optimization and simulation"};
    app.footer(config_schema());

    CliOptions opt;
    app.fallthrough();
    app.add_option("--config", opt.config_path, "JSON config path (defaults used when absent)");
    app.add_option("--out", opt.out_path, "output CSV path (directory for `figures`)");
    app.add_option("--set", opt.overrides, "override config values, e.g. --set lambda_p=0.5")
        ->type_size(1);
    app.add_option("--seed", opt.seed, "simulation seed override");
    app.add_option("--grid-step", opt.grid_step, "grid step for sweeps and the oracle");
    app.add_option("--mode", opt.mode, "buffer mode: literal | geometric_matched");

    auto* eval = app.add_subcommand("eval", "closed-form metrics at one acceptance factor");
    auto* sweep = app.add_subcommand("sweep", "closed-form metrics over an f grid");
    auto* solve_cmd = app.add_subcommand("solve", "optimal acceptance factor");
    auto* simulate = app.add_subcommand("simulate", "Monte-Carlo run against the closed forms");
    auto* figures = app.add_subcommand("figures", "emit the full figure CSV set");
    app.require_subcommand(1);

    std::vector<std::string> reversed(args.rbegin(), args.rend());
    try {
        app.parse(reversed);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e) == 0 ? kExitOk : kExitUsage;
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return kExitUsage;
    }

    try {
        Bundle b = load_bundle(opt);
        if (eval->parsed()) return cmd_eval(b);
        if (sweep->parsed()) return cmd_sweep(b, opt);
        if (solve_cmd->parsed()) return cmd_solve(b, opt);
        if (simulate->parsed()) return cmd_simulate(b, opt);
        if (figures->parsed()) return cmd_figures(b, opt);
        return kExitUsage;
    } catch (const config_error& e) {
        std::fprintf(stderr, "config error: %s\n", e.what());
        return kExitConfig;
    } catch (const infeasible_error& e) {
        std::fprintf(stderr, "infeasible: %s\n", e.what());
        return kExitInfeasible;
    } catch (const instability_error& e) {
        std::fprintf(stderr, "infeasible: %s\n", e.what());
        return kExitInfeasible;
    } catch (const std::invalid_argument& e) {
        std::fprintf(stderr, "config error: %s\n", e.what());
        return kExitConfig;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return kExitUsage;
    }
}

int run_cli(int argc, char** argv) {
    std::vector<std::string> args;
    args.reserve(static_cast<std::size_t>(argc > 0 ? argc - 1 : 0));
    for (int i = 1; i < argc; ++i) args.emplace_back(argv[i]);
    return run_cli(args);
}

} // namespace relaygate
