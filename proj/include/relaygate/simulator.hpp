#pragma once

#include "relaygate/params.hpp"

#include <cstdint>
#include <string>
#include <vector>

namespace relaygate {

struct SimConfig {
    NetworkParams params;
    double f = 0.5;
    std::int64_t slots = 1'000'000;
    std::int64_t warmup = 10'000;
    std::uint64_t seed = 1;
    int buffer_k = -1; // relay queue capacity; negative = infinite
    int replications = 10;

    void validate() const {
        params.validate();
        if (!(f >= 0.0 && f <= 1.0))
            throw std::invalid_argument("sim.f must be in [0, 1]");
        if (warmup < 0 || slots <= warmup)
            throw std::invalid_argument("sim requires slots > warmup >= 0");
        if (replications < 1)
            throw std::invalid_argument("sim.replications must be >= 1");
    }
};

// Exact integer ledgers for one replication, counted over the whole run
// (including warmup) so conservation holds with no censoring.
struct RepLedger {
    std::uint64_t arrivals_p = 0;
    std::uint64_t arrivals_s = 0;
    std::uint64_t dep_p_direct = 0;
    std::uint64_t dep_p_relayed = 0; // admissions into Q_ps plus buffer drops
    std::uint64_t admissions = 0;    // entered Q_ps
    std::uint64_t drops = 0;         // admitted but Q_ps full
    std::uint64_t dep_ps = 0;
    std::uint64_t dep_s = 0;
    std::uint64_t final_qp = 0;
    std::uint64_t final_qps = 0;
    std::uint64_t final_qs = 0;

    bool conserved() const {
        return arrivals_p == dep_p_direct + dep_p_relayed + final_qp &&
               dep_p_relayed == admissions + drops &&
               admissions == dep_ps + final_qps &&
               arrivals_s == dep_s + final_qs;
    }
};

// Post-warmup measurements of one replication.
struct RepStats {
    RepLedger ledger;
    double mu_p = 0.0;      // Q_p departures per busy slot
    double lambda_ps = 0.0; // admissions per slot
    double mu_ps = 0.0;     // Pr[primary idle and sp link above threshold]
    double mu_s = 0.0;      // Pr[idle, relay queue passes, s link above threshold]
    double lambda_s_hat = 0.0;
    double mean_d_p = 0.0;
    double mean_d_s = 0.0;
    double e_psp_hat = 0.0; // relay energy per relay-scheduled slot
    double e_ps_hat = 0.0;  // secondary energy per secondary-scheduled slot
    double gamma_hat = 0.0; // per-packet-energy times rate, recombined
    double raw_energy_fraction = 0.0;
    double mean_qs_len = 0.0;
    double mean_qps_len = 0.0;
    std::uint64_t final_qs_len = 0;
    double blocking_fraction = 0.0;
    std::vector<double> occupancy_tail; // Pr[N_ps > k], k = 0..63
};

struct MeanSe {
    double mean = 0.0;
    double se = 0.0; // sample SD across replications / sqrt(R)
};

struct SimStats {
    MeanSe mu_p, lambda_ps, mu_ps, mu_s;
    MeanSe mean_d_p, mean_d_s;
    MeanSe empirical_gamma;
    MeanSe raw_energy_fraction;
    MeanSe blocking_fraction;
    std::vector<double> occupancy_tail; // averaged over replications
    std::uint64_t drop_count = 0;
    bool divergence = false; // secondary queue at horizon >> its time average
    std::vector<RepStats> replications;
    std::string rng_name = "splitmix64";
};

// Receives one row per slot of replication 0 when slot tracing is on.
class SlotObserver {
  public:
    virtual ~SlotObserver() = default;
    virtual void on_slot(std::int64_t slot, const char* event, std::size_t q_p,
                         std::size_t q_ps, std::size_t q_s, double energy) = 0;
};

// Slotted Monte-Carlo run of the relaying MAC protocol. Per slot: arrivals,
// then a primary transmission when Q_p is backlogged (failed packets are
// decoded/admitted by the relay with probability f), otherwise the relay
// queue gets the slot if its link clears the threshold, else the secondary
// queue. Energy follows the minimum-power rule on successful transmissions.
// Identical configs (same seed) produce bit-identical results; replications
// run concurrently with a fixed reduction order.
SimStats run(const SimConfig& config, SlotObserver* observer = nullptr);

struct ComparisonRow {
    std::string name;
    double analytic = 0.0;
    double empirical = 0.0;
    double rel_err = 0.0;
    double std_err = 0.0;
};

struct ComparisonReport {
    std::vector<ComparisonRow> rows;
    bool divergence = false;
};

// Side-by-side table of the closed-form values and their simulated
// counterparts (rates, delays, budget ratio, and blocking when the relay
// buffer is finite). Requires an analytically stable configuration.
ComparisonReport compare_with_analytics(const SimConfig& config);

} // namespace relaygate
