#include "relaygate/config.hpp"

#include "relaygate/errors.hpp"

#include <json.hpp>

#include <cmath>
#include <set>
#include <sstream>

namespace relaygate {

namespace {

using nlohmann::json;

[[noreturn]] void fail(const std::string& path, const std::string& what) {
    throw config_error("config error at '" + path + "': " + what);
}

double get_number(const json& j, const std::string& path) {
    if (!j.is_number()) fail(path, "expected a number");
    return j.get<double>();
}

double get_in_range(const json& j, const std::string& path, double lo, double hi,
                    bool lo_open = false, bool hi_open = false) {
    double v = get_number(j, path);
    bool ok = (lo_open ? v > lo : v >= lo) && (hi_open ? v < hi : v <= hi);
    if (!ok) {
        std::ostringstream os;
        os << v << " out of range " << (lo_open ? "(" : "[") << lo << ", " << hi
           << (hi_open ? ")" : "]");
        fail(path, os.str());
    }
    return v;
}

void check_keys(const json& j, const std::string& path, const std::set<std::string>& allowed) {
    if (!j.is_object()) fail(path, "expected an object");
    for (auto it = j.begin(); it != j.end(); ++it) {
        if (!allowed.count(it.key()))
            fail(path.empty() ? it.key() : path + "." + it.key(), "unknown key");
    }
}

void parse_link(const json& j, const std::string& path, LinkParams& link) {
    check_keys(j, path, {"gamma_th_db", "sigma2_db", "p_max"});
    if (j.contains("gamma_th_db"))
        link.gamma_th = db_to_linear(get_number(j["gamma_th_db"], path + ".gamma_th_db"));
    if (j.contains("sigma2_db"))
        link.sigma2 = db_to_linear(get_number(j["sigma2_db"], path + ".sigma2_db"));
    if (j.contains("p_max"))
        link.p_max = get_in_range(j["p_max"], path + ".p_max", 0.0, 1e9, true);
}

void parse_solver(const json& j, SolverConfig& s) {
    check_keys(j, "solver",
               {"gamma_th", "step_alpha", "eps_conv", "max_outer", "max_inner",
                "f_grid_step", "diminishing_step", "legacy_nu2_update"});
    if (j.contains("gamma_th"))
        s.gamma_th = get_in_range(j["gamma_th"], "solver.gamma_th", 0.0, 1.0, true);
    if (j.contains("step_alpha"))
        s.step_alpha = get_in_range(j["step_alpha"], "solver.step_alpha", 0.0, 1e6, true);
    if (j.contains("eps_conv"))
        s.eps_conv = get_in_range(j["eps_conv"], "solver.eps_conv", 0.0, 1.0, true);
    if (j.contains("max_outer"))
        s.max_outer = static_cast<int>(get_in_range(j["max_outer"], "solver.max_outer", 1, 1e9));
    if (j.contains("max_inner"))
        s.max_inner = static_cast<int>(get_in_range(j["max_inner"], "solver.max_inner", 1, 1e9));
    if (j.contains("f_grid_step"))
        s.f_grid_step =
            get_in_range(j["f_grid_step"], "solver.f_grid_step", 0.0, 1e-2, true);
    if (j.contains("diminishing_step")) {
        if (!j["diminishing_step"].is_boolean()) fail("solver.diminishing_step", "expected a bool");
        s.diminishing_step = j["diminishing_step"].get<bool>();
    }
    if (j.contains("legacy_nu2_update")) {
        if (!j["legacy_nu2_update"].is_boolean()) fail("solver.legacy_nu2_update", "expected a bool");
        s.legacy_nu2_update = j["legacy_nu2_update"].get<bool>();
    }
}

void parse_sim(const json& j, SimConfig& s) {
    check_keys(j, "sim", {"slots", "warmup", "seed", "replications", "buffer_k", "trace"});
    if (j.contains("slots"))
        s.slots = static_cast<std::int64_t>(get_in_range(j["slots"], "sim.slots", 1, 1e12));
    if (j.contains("warmup"))
        s.warmup = static_cast<std::int64_t>(get_in_range(j["warmup"], "sim.warmup", 0, 1e12));
    if (j.contains("seed")) {
        if (!j["seed"].is_number_integer() && !j["seed"].is_number_unsigned())
            fail("sim.seed", "expected an integer");
        s.seed = j["seed"].get<std::uint64_t>();
    }
    if (j.contains("replications"))
        s.replications =
            static_cast<int>(get_in_range(j["replications"], "sim.replications", 1, 1e6));
    if (j.contains("buffer_k"))
        s.buffer_k = static_cast<int>(get_in_range(j["buffer_k"], "sim.buffer_k", -1, 1e6));
}

} // namespace

Bundle default_bundle() {
    Bundle b;
    b.params.link_p = {db_to_linear(0.0), db_to_linear(4.0), 1.0};
    b.params.link_ps = {db_to_linear(0.0), db_to_linear(12.0), 1.0};
    b.params.link_sp = {db_to_linear(0.0), db_to_linear(8.0), 0.25};
    b.params.link_s = {db_to_linear(0.0), db_to_linear(12.0), 1.0};
    b.params.lambda_p = 0.3;
    b.params.lambda_s = 0.1;
    b.sim.params = b.params;
    return b;
}

Bundle parse_config(const std::string& json_text) {
    json j;
    try {
        j = json::parse(json_text);
    } catch (const json::parse_error& e) {
        throw config_error(std::string("config is not valid JSON: ") + e.what());
    }

    Bundle b = default_bundle();
    check_keys(j, "",
               {"lambda_p", "lambda_s", "links", "solver", "sim", "f", "mode", "buffer_k"});

    if (j.contains("lambda_p"))
        b.params.lambda_p = get_in_range(j["lambda_p"], "lambda_p", 0.0, 1.0, false, true);
    if (j.contains("lambda_s"))
        b.params.lambda_s = get_in_range(j["lambda_s"], "lambda_s", 0.0, 1.0, false, true);
    if (j.contains("links")) {
        const json& links = j["links"];
        check_keys(links, "links", {"p", "ps", "sp", "s"});
        if (links.contains("p")) parse_link(links["p"], "links.p", b.params.link_p);
        if (links.contains("ps")) parse_link(links["ps"], "links.ps", b.params.link_ps);
        if (links.contains("sp")) parse_link(links["sp"], "links.sp", b.params.link_sp);
        if (links.contains("s")) parse_link(links["s"], "links.s", b.params.link_s);
    }
    if (j.contains("solver")) parse_solver(j["solver"], b.solver);
    if (j.contains("sim")) {
        parse_sim(j["sim"], b.sim);
        if (j["sim"].contains("trace")) {
            if (!j["sim"]["trace"].is_boolean()) fail("sim.trace", "expected a bool");
            b.sim_trace = j["sim"]["trace"].get<bool>();
        }
    }
    if (j.contains("f")) b.f = get_in_range(j["f"], "f", 0.0, 1.0);
    if (j.contains("mode")) {
        if (!j["mode"].is_string()) fail("mode", "expected \"literal\" or \"geometric_matched\"");
        std::string m = j["mode"].get<std::string>();
        if (m == "literal")
            b.mode = BufferMode::literal;
        else if (m == "geometric_matched")
            b.mode = BufferMode::geometric_matched;
        else
            fail("mode", "expected \"literal\" or \"geometric_matched\", got \"" + m + "\"");
    }
    if (j.contains("buffer_k"))
        b.buffer_k = static_cast<int>(get_in_range(j["buffer_k"], "buffer_k", 0, 1e6));

    try {
        b.params.validate();
        b.solver.validate();
    } catch (const std::invalid_argument& e) {
        throw config_error(e.what());
    }
    b.sim.params = b.params;
    b.sim.f = b.f;
    return b;
}

void apply_overrides(Bundle& bundle, const std::vector<std::string>& overrides) {
    if (overrides.empty()) return;

    // Reuse the JSON path: rebuild a patch object from key=value pairs and
    // run it through parse logic by deep-merging onto the current state.
    json patch = json::object();
    for (const std::string& kv : overrides) {
        auto eq = kv.find('=');
        if (eq == std::string::npos || eq == 0)
            throw config_error("override '" + kv + "' is not of the form key=value");
        std::string path = kv.substr(0, eq);
        std::string value = kv.substr(eq + 1);

        json* node = &patch;
        std::size_t start = 0;
        while (true) {
            auto dot = path.find('.', start);
            std::string part = path.substr(start, dot == std::string::npos ? dot : dot - start);
            if (part.empty()) throw config_error("override '" + kv + "' has an empty path segment");
            if (dot == std::string::npos) {
                json parsed;
                if (value == "true" || value == "false") {
                    parsed = (value == "true");
                } else {
                    try {
                        parsed = json::parse(value);
                        if (!parsed.is_number() && !parsed.is_boolean()) parsed = value;
                    } catch (const json::parse_error&) {
                        parsed = value;
                    }
                }
                (*node)[part] = parsed;
                break;
            }
            node = &(*node)[part];
            start = dot + 1;
        }
    }

    // Serialize current bundle state as the base document, merge, reparse.
    json base;
    base["lambda_p"] = bundle.params.lambda_p;
    base["lambda_s"] = bundle.params.lambda_s;
    auto link_json = [](const LinkParams& l) {
        json j;
        j["gamma_th_db"] = linear_to_db(l.gamma_th);
        j["sigma2_db"] = linear_to_db(l.sigma2);
        j["p_max"] = l.p_max;
        return j;
    };
    base["links"]["p"] = link_json(bundle.params.link_p);
    base["links"]["ps"] = link_json(bundle.params.link_ps);
    base["links"]["sp"] = link_json(bundle.params.link_sp);
    base["links"]["s"] = link_json(bundle.params.link_s);
    base["solver"]["gamma_th"] = bundle.solver.gamma_th;
    base["solver"]["step_alpha"] = bundle.solver.step_alpha;
    base["solver"]["eps_conv"] = bundle.solver.eps_conv;
    base["solver"]["max_outer"] = bundle.solver.max_outer;
    base["solver"]["max_inner"] = bundle.solver.max_inner;
    base["solver"]["f_grid_step"] = bundle.solver.f_grid_step;
    base["solver"]["diminishing_step"] = bundle.solver.diminishing_step;
    base["solver"]["legacy_nu2_update"] = bundle.solver.legacy_nu2_update;
    base["sim"]["slots"] = bundle.sim.slots;
    base["sim"]["warmup"] = bundle.sim.warmup;
    base["sim"]["seed"] = bundle.sim.seed;
    base["sim"]["replications"] = bundle.sim.replications;
    base["sim"]["buffer_k"] = bundle.sim.buffer_k;
    base["sim"]["trace"] = bundle.sim_trace;
    base["f"] = bundle.f;
    base["mode"] =
        bundle.mode == BufferMode::literal ? "literal" : "geometric_matched";
    base["buffer_k"] = bundle.buffer_k;

    base.merge_patch(patch);
    // parse_config re-checks everything; -1 buffer_k passes through (infinite).
    bundle = parse_config(base.dump());
}

std::string config_schema() {
    return "keys: lambda_p, lambda_s in [0,1); f in [0,1];\n"
           "      links.{p,ps,sp,s}.{gamma_th_db, sigma2_db, p_max};\n"
           "      solver.{gamma_th, step_alpha, eps_conv, max_outer, max_inner,\n"
           "              f_grid_step, diminishing_step, legacy_nu2_update};\n"
           "      sim.{slots, warmup, seed, replications, buffer_k};\n"
           "      mode = literal | geometric_matched; buffer_k >= 0\n"
           "thresholds/variances are dB, powers and rates linear";
}

} // namespace relaygate
