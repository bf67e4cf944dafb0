#pragma once
#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

namespace imco {

// Flat pipeline configuration. Every knob has a textual key with the same
// name, settable from a key=value file or command-line flags.
struct PipelineConfig {
    double alpha = 0.25;
    double p_exp = 2.0;
    double delta = 0.0;        // 0 = auto from the certified radius
    double net_shrink = 10.0;  // net spacing = chart radius / net_shrink
    double c = 2.0;            // radius bound constant
    double r_over_delta = 16.0;
    double h_grid = 0.0;       // 0 = half the local edge length
    double tol_ortho = 1e-10;
    double tol_geom = 1e-9;
    double tol_glue = 0.0;  // 0 = max(3 h alpha, 2 h)
    double tol_fix = 1e-10;
    double gate_tol = 1e9;
    double conv_tol = 0.5;
    double smoothing_radius = 0.0;
    int max_order = 3;  // K
    bool projection = true;
    bool noncompact = false;
    int exhaustion_levels = 0;
    double ball_step = 1.0;
    int threads = 0;

    // optional explicit ladder for subdivided runs
    std::vector<double> r_seq;
    std::vector<double> dprime_seq;
    std::vector<double> delta_seq;

    // returns human-readable problems; empty means valid. m and k are the
    // scenario dimensions the config will run against.
    std::vector<std::string> validate(int m, int k) const;

    std::string canonical() const;  // sorted key=value lines
    uint64_t hash() const;          // FNV-1a of the canonical form
};

// Parses key=value lines ('#' comments, blank lines allowed). Unknown keys
// and malformed values throw.
PipelineConfig parse_config(std::istream& is,
                            const PipelineConfig& base = {});
// Applies one "key=value" assignment.
void apply_config_entry(PipelineConfig& cfg, const std::string& key,
                        const std::string& value);

}  // namespace imco
