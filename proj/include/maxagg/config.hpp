#pragma once

#include <algorithm>
#include <cctype>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <thread>
#include <vector>

namespace maxagg::cli {

class config_error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Flat experiment configuration. Values come from built-in defaults, then a
// key=value config file, then command-line options; later sources win.
struct ExperimentConfig {
    std::string mode; // simulate | selfsimilar | scan | verify | experiment

    double k0 = 3.0;
    std::size_t M_b = 200;
    std::size_t steps = 25000;

    double center = 0.5;
    double dispersion = 0.3;
    std::string initial_profile; // CSV with x,G columns; overrides the gaussian

    std::vector<std::size_t> schedule; // empty selects {0, steps}
    std::string out_dir = ".";

    double T = 1.1; // verify horizon
    double tol = 1e-10;
    std::size_t max_iter = 200;
    std::size_t mild_cells = 200;

    double ghalf = 0.0; // > 0 selects a direct shoot in `selfsimilar`
    double D = 1.0;
    double ghalf_min = 0.2;
    double ghalf_max = 4.0;
    double ghalf_step = 0.05;

    double delta = 1e-6;
    double rk_tol = 1e-10;
    std::size_t n_output = 1601;

    bool exact_mass = false;
    bool seedless = true; // the toolkit is fully deterministic; must stay set
    std::string experiment; // fig1 | fig2 | fig3 | moment-curve | instability | nbound
    std::string stationarity_vars = "auto"; // auto | unscaled | rescaled
    std::size_t workers = 0; // 0: MAXAGG_WORKERS env var, else hardware

    void validate() const {
        if (!(k0 >= 0.0))
            throw config_error("config: k0 must be nonnegative");
        if (M_b < 2)
            throw config_error("config: mb must be at least 2");
        if (!initial_profile.empty() && !std::filesystem::exists(initial_profile))
            throw config_error("config: initial profile file does not exist: " + initial_profile);
        for (std::size_t j : schedule)
            if (j > steps)
                throw config_error("config: schedule entry exceeds steps");
        if (!(T > 1.0))
            throw config_error("config: T must exceed 1");
        if (!seedless)
            throw config_error("config: only the deterministic (seedless) mode exists");
        if (stationarity_vars != "auto" && stationarity_vars != "unscaled" &&
            stationarity_vars != "rescaled")
            throw config_error("config: stationarity_vars must be auto, unscaled or rescaled");
    }
};

namespace detail {

inline std::string trim(const std::string& s) {
    const auto b = s.find_first_not_of(" \t\r\n");
    if (b == std::string::npos)
        return {};
    const auto e = s.find_last_not_of(" \t\r\n");
    return s.substr(b, e - b + 1);
}

inline double parse_double(const std::string& key, const std::string& v) {
    try {
        std::size_t pos = 0;
        const double x = std::stod(v, &pos);
        if (pos != v.size())
            throw std::invalid_argument(v);
        return x;
    } catch (const std::exception&) {
        throw config_error("config: bad numeric value for " + key + ": '" + v + "'");
    }
}

inline std::size_t parse_count(const std::string& key, const std::string& v) {
    try {
        std::size_t pos = 0;
        const long long x = std::stoll(v, &pos);
        if (pos != v.size() || x < 0)
            throw std::invalid_argument(v);
        return static_cast<std::size_t>(x);
    } catch (const std::exception&) {
        throw config_error("config: bad count value for " + key + ": '" + v + "'");
    }
}

inline bool parse_bool(const std::string& key, const std::string& v) {
    if (v == "1" || v == "true" || v == "yes" || v == "on")
        return true;
    if (v == "0" || v == "false" || v == "no" || v == "off")
        return false;
    throw config_error("config: bad boolean value for " + key + ": '" + v + "'");
}

inline std::vector<std::size_t> parse_schedule(const std::string& key, const std::string& v) {
    std::vector<std::size_t> out;
    std::stringstream ss(v);
    std::string item;
    while (std::getline(ss, item, ',')) {
        item = trim(item);
        if (!item.empty())
            out.push_back(parse_count(key, item));
    }
    return out;
}

} // namespace detail

inline void apply_kv(ExperimentConfig& cfg, const std::string& key, const std::string& value) {
    using namespace detail;
    if (key == "mode")
        cfg.mode = value;
    else if (key == "k0")
        cfg.k0 = parse_double(key, value);
    else if (key == "mb")
        cfg.M_b = parse_count(key, value);
    else if (key == "steps")
        cfg.steps = parse_count(key, value);
    else if (key == "center")
        cfg.center = parse_double(key, value);
    else if (key == "dispersion")
        cfg.dispersion = parse_double(key, value);
    else if (key == "initial_profile")
        cfg.initial_profile = value;
    else if (key == "schedule")
        cfg.schedule = parse_schedule(key, value);
    else if (key == "out")
        cfg.out_dir = value;
    else if (key == "T")
        cfg.T = parse_double(key, value);
    else if (key == "tol")
        cfg.tol = parse_double(key, value);
    else if (key == "max_iter")
        cfg.max_iter = parse_count(key, value);
    else if (key == "mild_cells")
        cfg.mild_cells = parse_count(key, value);
    else if (key == "ghalf")
        cfg.ghalf = parse_double(key, value);
    else if (key == "d")
        cfg.D = parse_double(key, value);
    else if (key == "ghalf_min")
        cfg.ghalf_min = parse_double(key, value);
    else if (key == "ghalf_max")
        cfg.ghalf_max = parse_double(key, value);
    else if (key == "ghalf_step")
        cfg.ghalf_step = parse_double(key, value);
    else if (key == "delta")
        cfg.delta = parse_double(key, value);
    else if (key == "rk_tol")
        cfg.rk_tol = parse_double(key, value);
    else if (key == "n_output")
        cfg.n_output = parse_count(key, value);
    else if (key == "exact_mass")
        cfg.exact_mass = parse_bool(key, value);
    else if (key == "seedless")
        cfg.seedless = parse_bool(key, value);
    else if (key == "experiment")
        cfg.experiment = value;
    else if (key == "stationarity_vars")
        cfg.stationarity_vars = value;
    else if (key == "workers")
        cfg.workers = parse_count(key, value);
    else
        throw config_error("config: unknown key '" + key + "'");
}

// Lines of key=value; blank lines and '#' comments are skipped.
inline void load_config_file(ExperimentConfig& cfg, const std::string& path) {
    std::ifstream in(path);
    if (!in)
        throw config_error("config: cannot open " + path);
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        const std::string t = detail::trim(line);
        if (t.empty() || t[0] == '#')
            continue;
        const auto eq = t.find('=');
        if (eq == std::string::npos)
            throw config_error("config: missing '=' at " + path + ":" + std::to_string(lineno));
        apply_kv(cfg, detail::trim(t.substr(0, eq)), detail::trim(t.substr(eq + 1)));
    }
}

inline std::size_t effective_workers(const ExperimentConfig& cfg) {
    if (cfg.workers > 0)
        return cfg.workers;
    if (const char* env = std::getenv("MAXAGG_WORKERS")) {
        const long v = std::atol(env);
        if (v > 0)
            return static_cast<std::size_t>(v);
    }
    const unsigned hw = std::max(1u, std::min(8u, std::thread::hardware_concurrency()));
    return hw;
}

} // namespace maxagg::cli
