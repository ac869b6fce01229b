#include "relaygate/simulator.hpp"

#include "relaygate/buffer_models.hpp"
#include "relaygate/channel.hpp"
#include "relaygate/errors.hpp"
#include "relaygate/queue_analytics.hpp"

#include <atomic>
#include <cmath>
#include <cstdlib>
#include <deque>
#include <thread>

namespace relaygate {

namespace {

// Counter-free splittable generator; replication r runs on state
// seed + (r+1) * 0x9E3779B97F4A7C15.
struct SplitMix64 {
    std::uint64_t state;

    std::uint64_t next() {
        state += 0x9E3779B97F4A7C15ULL;
        std::uint64_t z = state;
        z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
        z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
        return z ^ (z >> 31);
    }

    double next01() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }

    // Exponential with the given mean, via inversion.
    double next_exp(double mean) { return -mean * std::log1p(-next01()); }
};

constexpr int kTailBuckets = 64;

RepStats run_replication(const SimConfig& cfg, int rep, SlotObserver* observer) {
    SplitMix64 rng{cfg.seed + 0x9E3779B97F4A7C15ULL * static_cast<std::uint64_t>(rep + 1)};
    const NetworkParams& p = cfg.params;
    const double g_th_p = p.link_p.gamma_th, g_th_ps = p.link_ps.gamma_th;
    const double g_th_sp = p.link_sp.gamma_th, g_th_s = p.link_s.gamma_th;

    std::deque<std::int64_t> q_p, q_ps, q_s; // arrival slots

    RepStats st;
    RepLedger& led = st.ledger;

    std::uint64_t w_slots = 0, w_busy_p = 0, w_dep_p = 0, w_adm = 0, w_arr_s = 0;
    std::uint64_t w_opp_ps = 0, w_opp_s = 0;
    std::uint64_t w_relay_sched = 0, w_sec_sched = 0;
    std::uint64_t w_block_attempts = 0, w_blocks = 0;
    double w_relay_energy = 0.0, w_sec_energy = 0.0;
    double w_sum_dp = 0.0, w_sum_ds = 0.0;
    std::uint64_t w_n_dp = 0, w_n_ds = 0;
    double w_qs_len = 0.0, w_qps_len = 0.0;
    std::vector<std::uint64_t> tail_hist(kTailBuckets + 1, 0);

    for (std::int64_t slot = 0; slot < cfg.slots; ++slot) {
        const bool in_window = slot >= cfg.warmup;

        // Channel gains and coins are drawn every slot in a fixed order so
        // the stream does not depend on queue state.
        double u_arr_p = rng.next01();
        double u_arr_s = rng.next01();
        double g_p = rng.next_exp(p.link_p.sigma2);
        double g_ps = rng.next_exp(p.link_ps.sigma2);
        double g_sp = rng.next_exp(p.link_sp.sigma2);
        double g_s = rng.next_exp(p.link_s.sigma2);
        double u_adm = rng.next01();

        if (u_arr_p < p.lambda_p) {
            q_p.push_back(slot);
            ++led.arrivals_p;
        }
        if (u_arr_s < p.lambda_s) {
            q_s.push_back(slot);
            ++led.arrivals_s;
            if (in_window) ++w_arr_s;
        }

        const bool p_ok = g_p * p.link_p.p_max >= g_th_p;
        const bool ps_ok = g_ps * p.link_ps.p_max >= g_th_ps;
        const bool sp_ok = g_sp * p.link_sp.p_max >= g_th_sp;
        const bool s_ok = g_s * p.link_s.p_max >= g_th_s;

        const char* event = "idle";
        double slot_energy = 0.0;

        if (!q_p.empty()) {
            if (in_window) ++w_busy_p;
            event = "p_retx";
            if (p_ok) {
                std::int64_t arr = q_p.front();
                q_p.pop_front();
                ++led.dep_p_direct;
                event = "p_tx_ok";
                if (in_window) {
                    ++w_dep_p;
                    w_sum_dp += static_cast<double>(slot - arr + 1);
                    ++w_n_dp;
                }
            } else if (ps_ok && u_adm < cfg.f) {
                std::int64_t arr = q_p.front();
                q_p.pop_front();
                ++led.dep_p_relayed;
                if (in_window) {
                    ++w_dep_p;
                    w_sum_dp += static_cast<double>(slot - arr + 1);
                    ++w_n_dp;
                    ++w_block_attempts;
                }
                bool full = cfg.buffer_k >= 0 &&
                            q_ps.size() >= static_cast<std::size_t>(cfg.buffer_k);
                if (full) {
                    ++led.drops;
                    event = "p_drop";
                    if (in_window) ++w_blocks;
                } else {
                    q_ps.push_back(slot);
                    ++led.admissions;
                    event = "p_relayed";
                    if (in_window) ++w_adm;
                }
            }
            // otherwise the head stays for retransmission
        } else {
            // Idle slot: relay queue first, own traffic if the relay queue
            // is empty or its link is in outage.
            if (in_window) {
                if (sp_ok) ++w_opp_ps;
                if (!(!q_ps.empty() && sp_ok) && s_ok) ++w_opp_s;
            }
            bool relay_claims = !q_ps.empty();
            if (relay_claims) {
                if (in_window) ++w_relay_sched;
                if (sp_ok) {
                    q_ps.pop_front();
                    ++led.dep_ps;
                    slot_energy = g_th_sp / g_sp;
                    event = "ps_tx";
                    if (in_window) w_relay_energy += slot_energy;
                }
            }
            if ((!relay_claims || !sp_ok) && !q_s.empty()) {
                if (in_window) ++w_sec_sched;
                if (s_ok) {
                    std::int64_t arr = q_s.front();
                    q_s.pop_front();
                    ++led.dep_s;
                    slot_energy = g_th_s / g_s;
                    event = "s_tx";
                    if (in_window) {
                        w_sec_energy += slot_energy;
                        w_sum_ds += static_cast<double>(slot - arr + 1);
                        ++w_n_ds;
                    }
                }
            }
        }

        if (in_window) {
            ++w_slots;
            w_qs_len += static_cast<double>(q_s.size());
            w_qps_len += static_cast<double>(q_ps.size());
            std::size_t n = q_ps.size();
            ++tail_hist[n >= kTailBuckets ? kTailBuckets : n];
        }
        if (observer) observer->on_slot(slot, event, q_p.size(), q_ps.size(), q_s.size(), slot_energy);
    }

    led.final_qp = q_p.size();
    led.final_qps = q_ps.size();
    led.final_qs = q_s.size();

    const double ws = static_cast<double>(w_slots);
    st.mu_p = w_busy_p ? static_cast<double>(w_dep_p) / static_cast<double>(w_busy_p) : 0.0;
    st.lambda_ps = static_cast<double>(w_adm) / ws;
    st.mu_ps = static_cast<double>(w_opp_ps) / ws;
    st.mu_s = static_cast<double>(w_opp_s) / ws;
    st.lambda_s_hat = static_cast<double>(w_arr_s) / ws;
    st.mean_d_p = w_n_dp ? w_sum_dp / static_cast<double>(w_n_dp) : 0.0;
    st.mean_d_s = w_n_ds ? w_sum_ds / static_cast<double>(w_n_ds) : 0.0;
    st.e_psp_hat = w_relay_sched ? w_relay_energy / static_cast<double>(w_relay_sched) : 0.0;
    st.e_ps_hat = w_sec_sched ? w_sec_energy / static_cast<double>(w_sec_sched) : 0.0;
    double p_relay = st.lambda_ps * st.e_psp_hat;
    double p_own = st.lambda_s_hat * st.e_ps_hat;
    st.gamma_hat = (p_relay + p_own) > 0.0 ? p_relay / (p_relay + p_own) : 0.0;
    double e_total = w_relay_energy + w_sec_energy;
    st.raw_energy_fraction = e_total > 0.0 ? w_relay_energy / e_total : 0.0;
    st.mean_qs_len = w_qs_len / ws;
    st.mean_qps_len = w_qps_len / ws;
    st.final_qs_len = led.final_qs;
    st.blocking_fraction =
        w_block_attempts ? static_cast<double>(w_blocks) / static_cast<double>(w_block_attempts)
                         : 0.0;

    st.occupancy_tail.resize(kTailBuckets, 0.0);
    std::uint64_t above = 0;
    for (int k = kTailBuckets; k >= 1; --k) {
        above += tail_hist[k];
        if (k - 1 < kTailBuckets) st.occupancy_tail[k - 1] = static_cast<double>(above) / ws;
    }
    return st;
}

MeanSe summarize(const std::vector<RepStats>& reps, double RepStats::*field) {
    MeanSe out;
    const double n = static_cast<double>(reps.size());
    for (const RepStats& r : reps) out.mean += r.*field;
    out.mean /= n;
    if (reps.size() > 1) {
        double ss = 0.0;
        for (const RepStats& r : reps) {
            double d = r.*field - out.mean;
            ss += d * d;
        }
        out.se = std::sqrt(ss / (n - 1.0)) / std::sqrt(n);
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

} // namespace

SimStats run(const SimConfig& config, SlotObserver* observer) {
    config.validate();

    std::vector<RepStats> reps(config.replications);
    int threads = std::min(thread_cap(), config.replications);
    if (threads <= 1 || observer) {
        for (int r = 0; r < config.replications; ++r)
            reps[r] = run_replication(config, r, r == 0 ? observer : nullptr);
    } else {
        std::atomic<int> next{0};
        auto worker = [&] {
            for (int r = next.fetch_add(1); r < config.replications; r = next.fetch_add(1))
                reps[r] = run_replication(config, r, nullptr);
        };
        std::vector<std::thread> pool;
        pool.reserve(threads);
        for (int t = 0; t < threads; ++t) pool.emplace_back(worker);
        for (auto& th : pool) th.join();
    }

    SimStats stats;
    stats.mu_p = summarize(reps, &RepStats::mu_p);
    stats.lambda_ps = summarize(reps, &RepStats::lambda_ps);
    stats.mu_ps = summarize(reps, &RepStats::mu_ps);
    stats.mu_s = summarize(reps, &RepStats::mu_s);
    stats.mean_d_p = summarize(reps, &RepStats::mean_d_p);
    stats.mean_d_s = summarize(reps, &RepStats::mean_d_s);
    stats.empirical_gamma = summarize(reps, &RepStats::gamma_hat);
    stats.raw_energy_fraction = summarize(reps, &RepStats::raw_energy_fraction);
    stats.blocking_fraction = summarize(reps, &RepStats::blocking_fraction);

    stats.occupancy_tail.assign(kTailBuckets, 0.0);
    double mean_final = 0.0, mean_avg = 0.0;
    for (const RepStats& r : reps) {
        stats.drop_count += r.ledger.drops;
        mean_final += static_cast<double>(r.final_qs_len);
        mean_avg += r.mean_qs_len;
        for (int k = 0; k < kTailBuckets; ++k) stats.occupancy_tail[k] += r.occupancy_tail[k];
    }
    for (int k = 0; k < kTailBuckets; ++k)
        stats.occupancy_tail[k] /= static_cast<double>(reps.size());
    mean_final /= static_cast<double>(reps.size());
    mean_avg /= static_cast<double>(reps.size());
    stats.divergence = mean_final > 10.0 * mean_avg && mean_final > 0.0;

    stats.replications = std::move(reps);
    return stats;
}

ComparisonReport compare_with_analytics(const SimConfig& config) {
    config.validate();
    RateSet rs = rate_set(config.params, config.f);
    if (!rs.stable) throw instability_error(rs.violated);
    DelayBreakdown d = secondary_delay(config.params, config.f);
    double gamma = power_budget(config.params, config.f, rs.lambda_ps).gamma;

    SimStats sim = run(config);

    ComparisonReport rep;
    rep.divergence = sim.divergence;
    auto row = [&](const std::string& name, double analytic, const MeanSe& emp) {
        ComparisonRow r;
        r.name = name;
        r.analytic = analytic;
        r.empirical = emp.mean;
        r.rel_err = analytic != 0.0 ? (emp.mean - analytic) / analytic
                                    : (emp.mean == 0.0 ? 0.0 : INFINITY);
        r.std_err = emp.se;
        rep.rows.push_back(r);
    };
    row("mu_p", rs.mu_p, sim.mu_p);
    row("lambda_ps", rs.lambda_ps, sim.lambda_ps);
    row("mu_ps", rs.mu_ps, sim.mu_ps);
    row("mu_s", rs.mu_s, sim.mu_s);
    row("d_p", d.d_p, sim.mean_d_p);
    row("d_s", d.d_s, sim.mean_d_s);
    row("gamma", gamma, sim.empirical_gamma);
    if (config.buffer_k >= 0) {
        BufferMetrics bm = relay_buffer_metrics(config.params, config.f, config.buffer_k,
                                                BufferMode::geometric_matched);
        row("p_b", bm.p_b, sim.blocking_fraction);
    }
    return rep;
}

} // namespace relaygate
