#pragma once

#include "relaygate/buffer_models.hpp"
#include "relaygate/optimizer.hpp"
#include "relaygate/params.hpp"
#include "relaygate/simulator.hpp"

#include <string>
#include <vector>

namespace relaygate {

// Everything an experiment needs, with defaults matching the reference
// scenario: gamma_th 0 dB on all links, sigma2 = 4/12/8/12 dB for p/ps/sp/s,
// P_p = P_s = P_ps = 1, P_sp = 0.25, lambda_p = 0.3, lambda_s = 0.1.
struct Bundle {
    NetworkParams params;
    SolverConfig solver;
    SimConfig sim; // sim.params kept in sync with params
    double f = 0.5;
    BufferMode mode = BufferMode::geometric_matched;
    int buffer_k = 5; // finite-buffer metrics default room
    bool sim_trace = false;
};

Bundle default_bundle();

// Parses a JSON config. Thresholds and variances are given in dB
// (keys *_db) and converted to linear; powers and rates are linear.
// Unknown keys, malformed values and range violations raise config_error
// with the offending key path. Missing keys fall back to defaults.
Bundle parse_config(const std::string& json_text);

// Applies repeatable key=value overrides using dotted paths matching the
// JSON schema, e.g. lambda_p=0.5, links.sp.p_max=0.5, solver.gamma_th=0.3.
void apply_overrides(Bundle& bundle, const std::vector<std::string>& overrides);

// Schema documentation string for --help and error messages.
std::string config_schema();

} // namespace relaygate
