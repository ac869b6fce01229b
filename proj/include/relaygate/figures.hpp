#pragma once

#include "relaygate/config.hpp"

#include <string>
#include <vector>

namespace relaygate {

// Writes the figure CSV set into out_dir (created if missing) and returns
// the file paths in a fixed order:
//   fig2.csv  - f, d_s, gamma, feasible over f in [0,1] step 0.01
//   fig4a.csv - lambda_p sweep of (f_star, d_s_star) at gamma_th=0.2, lambda_s=0.1
//   fig4b.csv - lambda_s sweep at lambda_p=0.3, gamma_th=0.2
//   fig4c.csv - gamma_th sweep at lambda_p=0.5, lambda_s=0.1
//   fig5a.csv / fig5b.csv / fig5c.csv - shadow-price surfaces
//   fig6.csv  - overflow/blocking probabilities along the three sweeps
// Infeasible sweep cells are marked "infeasible" instead of aborting.
// Output is deterministic for a given bundle.
std::vector<std::string> run_figures(const Bundle& bundle, const std::string& out_dir);

} // namespace relaygate
