#include "relaygate/figures.hpp"

#include "relaygate/buffer_models.hpp"
#include "relaygate/channel.hpp"
#include "relaygate/csv.hpp"
#include "relaygate/errors.hpp"
#include "relaygate/queue_analytics.hpp"

#include <atomic>
#include <cstdlib>
#include <filesystem>
#include <functional>
#include <thread>

namespace relaygate {

namespace {

struct SolvedPoint {
    bool feasible = false;
    double f_star = 0.0;
    double d_s_star = 0.0;
};

SolvedPoint solve_point(const NetworkParams& params, SolverConfig solver, double gamma_th) {
    SolvedPoint out;
    solver.gamma_th = gamma_th;
    try {
        SolverResult res = solve(params, solver);
        out.feasible = true;
        out.f_star = res.f_star;
        out.d_s_star = res.d_s_star;
    } catch (const infeasible_error&) {
    } catch (const instability_error&) {
    }
    return out;
}

int thread_cap() {
    if (const char* env = std::getenv("RELAY_GATE_THREADS")) {
        int v = std::atoi(env);
        if (v >= 1) return v;
    }
    unsigned hc = std::thread::hardware_concurrency();
    return hc ? static_cast<int>(hc) : 1;
}

// Evaluates cells concurrently; results land in index order so emission
// stays deterministic regardless of completion order.
template <typename T>
std::vector<T> parallel_map(int n, const std::function<T(int)>& fn) {
    std::vector<T> results(n);
    int threads = std::min(thread_cap(), n);
    if (threads <= 1) {
        for (int i = 0; i < n; ++i) results[i] = fn(i);
        return results;
    }
    std::atomic<int> next{0};
    auto worker = [&] {
        for (int i = next.fetch_add(1); i < n; i = next.fetch_add(1)) results[i] = fn(i);
    };
    std::vector<std::thread> pool;
    for (int t = 0; t < threads; ++t) pool.emplace_back(worker);
    for (auto& th : pool) th.join();
    return results;
}

std::vector<double> linspace(double lo, double hi, int n) {
    std::vector<double> v(n);
    for (int i = 0; i < n; ++i)
        v[i] = n == 1 ? lo : lo + (hi - lo) * static_cast<double>(i) / (n - 1);
    return v;
}

void write_fig2(const Bundle& b, const std::string& path) {
    CsvWriter csv(path);
    csv.header({"f", "d_s", "gamma", "feasible"});
    for (int i = 0; i <= 100; ++i) {
        double f = static_cast<double>(i) / 100.0;
        RateSet rs = rate_set(b.params, f);
        double gamma = power_budget(b.params, f, rs.lambda_ps).gamma;
        if (rs.stable) {
            double d_s = secondary_delay(b.params, f).d_s;
            csv.raw_row({CsvWriter::num(f), CsvWriter::num(d_s), CsvWriter::num(gamma), "1"});
        } else {
            csv.raw_row({CsvWriter::num(f), "infeasible", CsvWriter::num(gamma), "0"});
        }
    }
}

void write_fig4(const std::string& path, const std::string& x_name,
                const std::vector<double>& xs,
                const std::function<SolvedPoint(double)>& cell) {
    auto points = parallel_map<SolvedPoint>(
        static_cast<int>(xs.size()), [&](int i) { return cell(xs[i]); });
    CsvWriter csv(path);
    csv.header({x_name, "f_star", "d_s_star"});
    for (std::size_t i = 0; i < xs.size(); ++i) {
        if (points[i].feasible) {
            csv.raw_row({CsvWriter::num(xs[i]), CsvWriter::num(points[i].f_star),
                         CsvWriter::num(points[i].d_s_star)});
        } else {
            csv.raw_row({CsvWriter::num(xs[i]), "infeasible", "infeasible"});
        }
    }
}

void write_fig5(const std::string& path, const std::string& x_name,
                const std::vector<double>& xs,
                const std::function<NetworkParams(double)>& vary,
                const std::function<double(double)>& gamma_of_x) {
    MultiplierRanges ranges;
    ranges.nu1 = {0.0, 1.0};
    ranges.nu2 = linspace(0.0, 10.0, 21);
    ranges.xi = {0.0, 1.0};

    struct Row {
        double x;
        ShadowPriceCell cell;
    };
    auto rows = parallel_map<std::vector<Row>>(static_cast<int>(xs.size()), [&](int i) {
        NetworkParams p = vary(xs[i]);
        double gth = gamma_of_x(xs[i]);
        std::vector<Row> out;
        for (const ShadowPriceCell& c : shadow_price_surface(p, gth, ranges))
            out.push_back({xs[i], c});
        return out;
    });

    CsvWriter csv(path);
    csv.header({x_name, "nu1", "nu2", "xi", "f", "res_nu1", "res_nu2", "res_xi",
                "objective", "feasible"});
    for (const auto& group : rows) {
        for (const Row& r : group) {
            if (r.cell.feasible) {
                csv.raw_row({CsvWriter::num(r.x), CsvWriter::num(r.cell.multipliers.nu1),
                             CsvWriter::num(r.cell.multipliers.nu2),
                             CsvWriter::num(r.cell.multipliers.xi), CsvWriter::num(r.cell.f),
                             CsvWriter::num(r.cell.residuals.stability_ps),
                             CsvWriter::num(r.cell.residuals.power),
                             CsvWriter::num(r.cell.residuals.stability_s),
                             CsvWriter::num(r.cell.objective), "1"});
            } else {
                csv.raw_row({CsvWriter::num(r.x), CsvWriter::num(r.cell.multipliers.nu1),
                             CsvWriter::num(r.cell.multipliers.nu2),
                             CsvWriter::num(r.cell.multipliers.xi), "infeasible", "", "", "",
                             "", "0"});
            }
        }
    }
}

void write_fig6(const Bundle& b, const std::string& path) {
    struct Cell {
        std::string sweep;
        double x;
        SolvedPoint sp;
        bool metrics_ok = false;
        BufferMetrics lit, geo;
        double rho_ps = 0.0;
    };

    std::vector<std::pair<std::string, double>> plan;
    for (double x : linspace(0.05, 0.60, 12)) plan.push_back({"lambda_p", x});
    for (double x : linspace(0.02, 0.30, 15)) plan.push_back({"lambda_s", x});
    for (double x : linspace(0.05, 0.70, 14)) plan.push_back({"gamma_th", x});

    auto cells = parallel_map<Cell>(static_cast<int>(plan.size()), [&](int i) {
        Cell c;
        c.sweep = plan[i].first;
        c.x = plan[i].second;
        NetworkParams p = b.params;
        double gth = b.solver.gamma_th;
        if (c.sweep == "lambda_p") {
            p.lambda_p = c.x;
            p.lambda_s = 0.1;
            gth = 0.2;
        } else if (c.sweep == "lambda_s") {
            p.lambda_p = 0.3;
            p.lambda_s = c.x;
            gth = 0.2;
        } else {
            p.lambda_p = 0.5;
            p.lambda_s = 0.1;
            gth = c.x;
        }
        c.sp = solve_point(p, b.solver, gth);
        if (c.sp.feasible) {
            try {
                c.lit = relay_buffer_metrics(p, c.sp.f_star, b.buffer_k, BufferMode::literal);
                c.geo = relay_buffer_metrics(p, c.sp.f_star, b.buffer_k,
                                             BufferMode::geometric_matched);
                c.rho_ps = rate_set(p, c.sp.f_star).rho_ps;
                c.metrics_ok = true;
            } catch (const instability_error&) {
            }
        }
        return c;
    });

    CsvWriter csv(path);
    csv.header({"sweep", "x", "f_star", "k", "rho_ps", "p_n", "p_ov_literal", "p_b_literal",
                "p_ov_geometric", "p_b_geometric"});
    for (const Cell& c : cells) {
        if (c.metrics_ok) {
            csv.raw_row({c.sweep, CsvWriter::num(c.x), CsvWriter::num(c.sp.f_star),
                         CsvWriter::num(c.lit.k), CsvWriter::num(c.rho_ps),
                         CsvWriter::num(c.lit.p_n), CsvWriter::num(c.lit.p_ov),
                         CsvWriter::num(c.lit.p_b), CsvWriter::num(c.geo.p_ov),
                         CsvWriter::num(c.geo.p_b)});
        } else {
            csv.raw_row({c.sweep, CsvWriter::num(c.x), "infeasible", CsvWriter::num(b.buffer_k),
                         "", "", "", "", "", ""});
        }
    }
}

} // namespace

std::vector<std::string> run_figures(const Bundle& bundle, const std::string& out_dir) {
    namespace fs = std::filesystem;
    fs::create_directories(out_dir);
    auto path = [&](const char* name) { return (fs::path(out_dir) / name).string(); };

    std::vector<std::string> files;

    write_fig2(bundle, path("fig2.csv"));
    files.push_back(path("fig2.csv"));

    {
        NetworkParams p = bundle.params;
        p.lambda_s = 0.1;
        write_fig4(path("fig4a.csv"), "lambda_p", linspace(0.05, 0.60, 12),
                   [&](double x) {
                       NetworkParams q = p;
                       q.lambda_p = x;
                       return solve_point(q, bundle.solver, 0.2);
                   });
        files.push_back(path("fig4a.csv"));
    }
    {
        NetworkParams p = bundle.params;
        p.lambda_p = 0.3;
        write_fig4(path("fig4b.csv"), "lambda_s", linspace(0.02, 0.30, 15),
                   [&](double x) {
                       NetworkParams q = p;
                       q.lambda_s = x;
                       return solve_point(q, bundle.solver, 0.2);
                   });
        files.push_back(path("fig4b.csv"));
    }
    {
        NetworkParams p = bundle.params;
        p.lambda_p = 0.5;
        p.lambda_s = 0.1;
        write_fig4(path("fig4c.csv"), "gamma_th", linspace(0.02, 0.70, 35),
                   [&](double x) { return solve_point(p, bundle.solver, x); });
        files.push_back(path("fig4c.csv"));
    }

    {
        NetworkParams p = bundle.params;
        p.lambda_s = 0.1;
        write_fig5(path("fig5a.csv"), "lambda_p", linspace(0.1, 0.5, 5),
                   [&](double x) {
                       NetworkParams q = p;
                       q.lambda_p = x;
                       return q;
                   },
                   [](double) { return 0.2; });
        files.push_back(path("fig5a.csv"));
    }
    {
        NetworkParams p = bundle.params;
        p.lambda_p = 0.1;
        write_fig5(path("fig5b.csv"), "lambda_s", linspace(0.05, 0.30, 6),
                   [&](double x) {
                       NetworkParams q = p;
                       q.lambda_s = x;
                       return q;
                   },
                   [](double) { return 0.2; });
        files.push_back(path("fig5b.csv"));
    }
    {
        NetworkParams p = bundle.params;
        p.lambda_p = 0.5;
        p.lambda_s = 0.1;
        write_fig5(path("fig5c.csv"), "gamma_th", {0.1, 0.2, 0.4, 0.6},
                   [&](double) { return p; }, [](double x) { return x; });
        files.push_back(path("fig5c.csv"));
    }

    write_fig6(bundle, path("fig6.csv"));
    files.push_back(path("fig6.csv"));
    return files;
}

} // namespace relaygate
