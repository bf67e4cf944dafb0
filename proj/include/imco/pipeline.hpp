#pragma once
#include <string>
#include <vector>

#include "imco/config.hpp"
#include "imco/measures.hpp"
#include "imco/projector.hpp"
#include "imco/scenario.hpp"

namespace imco {

// Exit codes: 0 = success (including expected failures that were expected),
// 1 = audit mismatch, 2 = input or config error.
struct PipelineResult {
    int exit_code = 0;
    std::vector<std::string> lines;  // key=value records, one per line

    void add(const std::string& record) { lines.push_back(record); }
};

// vertices whose ambient distance to the mesh boundary exceeds margin;
// everything, for closed meshes
std::vector<int> interior_vertices(const SampledImmersion& mesh,
                                   double margin);

// certified chart radius: sampled max_graph_radius, capped by a quarter of
// the mesh extent (and 3/8 for noncompact runs)
double certified_radius(const SampledImmersion& mesh,
                        const PipelineConfig& cfg);

// certify -> net -> extract -> converge -> glue -> limit -> project ->
// measure, with one report line per record. stop_after truncates the run
// after the named stage (certify, net, converge, limit, project, measure).
PipelineResult run_pipeline(const PipelineConfig& cfg, const Scenario& sc,
                            const std::string& stop_after = "");

}  // namespace imco
