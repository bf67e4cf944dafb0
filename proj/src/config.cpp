#include "imco/config.hpp"

#include <cmath>
#include <istream>
#include <sstream>
#include <stdexcept>

namespace imco {

std::vector<std::string> PipelineConfig::validate(int m, int k) const {
    std::vector<std::string> problems;
    if (!(alpha > 0))
        problems.push_back("alpha must be positive");
    if (alpha * alpha >= 1.0 / 3)
        problems.push_back("alpha^2 must stay below 1/3 (got alpha=" +
                           std::to_string(alpha) + ")");
    if (projection && k > 0 && alpha > 1.0 / (4 * std::sqrt(double(k))) + 1e-12)
        problems.push_back(
            "projection requires alpha <= 1/(4 sqrt(k))");
    if (p_exp <= m)
        problems.push_back("p_exp must exceed m (the construction fails at "
                           "p = m); got p_exp=" +
                           std::to_string(p_exp));
    if (net_shrink < 4)
        problems.push_back("net_shrink must be at least 4");
    if (c <= 0) problems.push_back("c must be positive");
    if (max_order < 1) problems.push_back("max_order must be at least 1");
    if (noncompact && exhaustion_levels < 1)
        problems.push_back("noncompact runs need exhaustion_levels >= 1");

    // explicit ladder checks
    if (!r_seq.empty()) {
        if (r_seq[0] > 3.0 / 8 + 1e-12)
            problems.push_back("r_seq[0] must be at most 3/8");
        for (size_t i = 1; i < r_seq.size(); ++i)
            if (r_seq[i] > r_seq[i - 1])
                problems.push_back("r_seq must be nonincreasing");
        if (dprime_seq.size() + 1 == r_seq.size() ||
            dprime_seq.size() == r_seq.size()) {
            for (size_t i = 0; i + 1 < r_seq.size() && i < dprime_seq.size();
                 ++i)
                if (dprime_seq[i] > r_seq[i + 1] / 4 + 1e-12)
                    problems.push_back(
                        "ladder broken: dprime_seq[" + std::to_string(i) +
                        "] exceeds r_seq[" + std::to_string(i + 1) + "]/4");
        } else if (!dprime_seq.empty()) {
            problems.push_back("dprime_seq length does not match r_seq");
        }
        for (size_t i = 0; i + 1 < dprime_seq.size() && i < delta_seq.size();
             ++i)
            if (delta_seq[i] > dprime_seq[i + 1] / 4 + 1e-12)
                problems.push_back("ladder broken: delta_seq[" +
                                   std::to_string(i) + "] exceeds dprime_seq[" +
                                   std::to_string(i + 1) + "]/4");
    }
    return problems;
}

namespace {

template <typename T>
void put(std::ostringstream& os, const char* key, const T& v) {
    os << key << "=" << v << "\n";
}

std::string join(const std::vector<double>& v) {
    std::ostringstream os;
    for (size_t i = 0; i < v.size(); ++i) {
        if (i) os << ",";
        os << v[i];
    }
    return os.str();
}

}  // namespace

std::string PipelineConfig::canonical() const {
    std::ostringstream os;
    os.precision(17);
    put(os, "alpha", alpha);
    put(os, "ball_step", ball_step);
    put(os, "c", c);
    put(os, "conv_tol", conv_tol);
    put(os, "delta", delta);
    put(os, "delta_seq", join(delta_seq));
    put(os, "dprime_seq", join(dprime_seq));
    put(os, "exhaustion_levels", exhaustion_levels);
    put(os, "gate_tol", gate_tol);
    put(os, "h_grid", h_grid);
    put(os, "max_order", max_order);
    put(os, "net_shrink", net_shrink);
    put(os, "noncompact", int(noncompact));
    put(os, "p_exp", p_exp);
    put(os, "projection", int(projection));
    put(os, "r_over_delta", r_over_delta);
    put(os, "r_seq", join(r_seq));
    put(os, "smoothing_radius", smoothing_radius);
    put(os, "threads", threads);
    put(os, "tol_fix", tol_fix);
    put(os, "tol_geom", tol_geom);
    put(os, "tol_glue", tol_glue);
    put(os, "tol_ortho", tol_ortho);
    return os.str();
}

uint64_t PipelineConfig::hash() const {
    uint64_t h = 1469598103934665603ull;
    for (char c : canonical()) {
        h ^= static_cast<unsigned char>(c);
        h *= 1099511628211ull;
    }
    return h;
}

namespace {

double parse_double(const std::string& s) {
    size_t pos = 0;
    double v = std::stod(s, &pos);
    if (pos != s.size())
        throw std::invalid_argument("malformed number: " + s);
    return v;
}

std::vector<double> parse_list(const std::string& s) {
    std::vector<double> out;
    if (s.empty()) return out;
    std::istringstream is(s);
    std::string tok;
    while (std::getline(is, tok, ',')) out.push_back(parse_double(tok));
    return out;
}

}  // namespace

void apply_config_entry(PipelineConfig& cfg, const std::string& key,
                        const std::string& value) {
    if (key == "alpha") cfg.alpha = parse_double(value);
    else if (key == "p_exp") cfg.p_exp = parse_double(value);
    else if (key == "delta") cfg.delta = parse_double(value);
    else if (key == "net_shrink") cfg.net_shrink = parse_double(value);
    else if (key == "c") cfg.c = parse_double(value);
    else if (key == "r_over_delta") cfg.r_over_delta = parse_double(value);
    else if (key == "h_grid") cfg.h_grid = parse_double(value);
    else if (key == "tol_ortho") cfg.tol_ortho = parse_double(value);
    else if (key == "tol_geom") cfg.tol_geom = parse_double(value);
    else if (key == "tol_glue") cfg.tol_glue = parse_double(value);
    else if (key == "tol_fix") cfg.tol_fix = parse_double(value);
    else if (key == "gate_tol") cfg.gate_tol = parse_double(value);
    else if (key == "conv_tol") cfg.conv_tol = parse_double(value);
    else if (key == "smoothing_radius")
        cfg.smoothing_radius = parse_double(value);
    else if (key == "max_order") cfg.max_order = int(parse_double(value));
    else if (key == "projection") cfg.projection = parse_double(value) != 0;
    else if (key == "noncompact") cfg.noncompact = parse_double(value) != 0;
    else if (key == "exhaustion_levels")
        cfg.exhaustion_levels = int(parse_double(value));
    else if (key == "ball_step") cfg.ball_step = parse_double(value);
    else if (key == "threads") cfg.threads = int(parse_double(value));
    else if (key == "r_seq") cfg.r_seq = parse_list(value);
    else if (key == "dprime_seq") cfg.dprime_seq = parse_list(value);
    else if (key == "delta_seq") cfg.delta_seq = parse_list(value);
    else throw std::invalid_argument("unknown config key: " + key);
}

PipelineConfig parse_config(std::istream& is, const PipelineConfig& base) {
    PipelineConfig cfg = base;
    std::string line;
    int lineno = 0;
    while (std::getline(is, line)) {
        ++lineno;
        size_t hash_pos = line.find('#');
        if (hash_pos != std::string::npos) line = line.substr(0, hash_pos);
        size_t a = line.find_first_not_of(" \t\r");
        if (a == std::string::npos) continue;
        size_t b = line.find_last_not_of(" \t\r");
        line = line.substr(a, b - a + 1);
        size_t eq = line.find('=');
        if (eq == std::string::npos)
            throw std::invalid_argument("config line " + std::to_string(lineno) +
                                        ": expected key=value");
        std::string key = line.substr(0, eq);
        std::string value = line.substr(eq + 1);
        auto strip = [](std::string s) {
            size_t x = s.find_first_not_of(" \t");
            size_t y = s.find_last_not_of(" \t");
            return x == std::string::npos ? std::string()
                                          : s.substr(x, y - x + 1);
        };
        apply_config_entry(cfg, strip(key), strip(value));
    }
    return cfg;
}

}  // namespace imco
