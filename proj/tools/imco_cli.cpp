#include <CLI11.hpp>
#include <fstream>
#include <iostream>
#include <map>
#include <string>

#include "imco/pipeline.hpp"
#include "imco/system.hpp"

namespace {

struct CommonOpts {
    std::string config_file;
    std::vector<std::string> sets;
    std::string scenario;
    std::vector<std::string> params;
    std::string out_file;
    int threads = 0;
};

void add_common(CLI::App* cmd, CommonOpts& o, bool needs_scenario) {
    cmd->add_option("-c,--config", o.config_file,
                    "key=value configuration file");
    cmd->add_option("--set", o.sets, "override one config key (key=value)");
    auto* s = cmd->add_option("-s,--scenario", o.scenario,
                              "scenario name (circle_family, sphere_family, "
                              "two_lines_dumbbell, spiral_vs_circle, "
                              "annulus_graphs, line_family, "
                              "shrinking_perturbation)");
    if (needs_scenario) s->required();
    cmd->add_option("-P,--param", o.params,
                    "scenario generator parameter (key=value)");
    cmd->add_option("-o,--out", o.out_file, "write the report to this file");
    cmd->add_option("--threads", o.threads, "worker cap (0 = default)");
}

imco::PipelineConfig load_config(const CommonOpts& o) {
    imco::PipelineConfig cfg;
    if (!o.config_file.empty()) {
        std::ifstream is(o.config_file);
        if (!is) throw std::invalid_argument("cannot open " + o.config_file);
        cfg = imco::parse_config(is);
    }
    for (const auto& kv : o.sets) {
        size_t eq = kv.find('=');
        if (eq == std::string::npos)
            throw std::invalid_argument("--set expects key=value, got " + kv);
        imco::apply_config_entry(cfg, kv.substr(0, eq), kv.substr(eq + 1));
    }
    if (o.threads) cfg.threads = o.threads;
    return cfg;
}

std::map<std::string, double> scenario_params(const CommonOpts& o) {
    std::map<std::string, double> p;
    for (const auto& kv : o.params) {
        size_t eq = kv.find('=');
        if (eq == std::string::npos)
            throw std::invalid_argument("--param expects key=value, got " + kv);
        p[kv.substr(0, eq)] = std::stod(kv.substr(eq + 1));
    }
    return p;
}

int emit(const imco::PipelineResult& res, const CommonOpts& o) {
    std::ostream* os = &std::cout;
    std::ofstream file;
    if (!o.out_file.empty()) {
        file.open(o.out_file);
        if (!file) {
            std::cerr << "cannot write " << o.out_file << "\n";
            return 2;
        }
        os = &file;
    }
    for (const auto& line : res.lines) *os << line << "\n";
    return res.exit_code;
}

int run_stage(const CommonOpts& o, const std::string& stop_after) {
    imco::PipelineConfig cfg = load_config(o);
    imco::Scenario sc = imco::generate(o.scenario, scenario_params(o));
    imco::PipelineResult res = imco::run_pipeline(cfg, sc, stop_after);
    return emit(res, o);
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"compactness pipeline for immersions with L^p-bounded "
                 "second fundamental form"};
    app.require_subcommand(1);

    CommonOpts gen_o, cert_o, net_o, conv_o, lim_o, proj_o, meas_o, run_o;
    std::string gen_dir = ".";
    std::string dist_a, dist_b;

    auto* gen = app.add_subcommand("gen", "generate scenario meshes");
    add_common(gen, gen_o, true);
    gen->add_option("-d,--dir", gen_dir, "output directory");

    auto* cert = app.add_subcommand("certify",
                                    "certified chart radius and norms");
    add_common(cert, cert_o, true);
    auto* net = app.add_subcommand("net", "greedy delta-net");
    add_common(net, net_o, true);
    auto* conv = app.add_subcommand("converge",
                                    "system distances along the sequence");
    add_common(conv, conv_o, true);
    auto* lim = app.add_subcommand("limit", "glue the limit manifold");
    add_common(lim, lim_o, true);
    auto* proj = app.add_subcommand("project",
                                    "reparametrization and convergence");
    add_common(proj, proj_o, true);
    auto* meas = app.add_subcommand("measure", "pushforward measure checks");
    add_common(meas, meas_o, true);
    auto* run = app.add_subcommand("run", "full pipeline");
    add_common(run, run_o, true);

    auto* dist = app.add_subcommand("distance",
                                    "metric distance of two system files");
    dist->add_option("a", dist_a, "first system file")->required();
    dist->add_option("b", dist_b, "second system file")->required();

    CLI11_PARSE(app, argc, argv);

    try {
        if (gen->parsed()) {
            imco::Scenario sc =
                imco::generate(gen_o.scenario, scenario_params(gen_o));
            for (size_t i = 0; i < sc.sequence.size(); ++i) {
                char name[64];
                std::snprintf(name, sizeof name, "/member_%03zu.mesh", i);
                std::ofstream os(gen_dir + name);
                imco::save_mesh(os, sc.sequence[i]);
            }
            if (sc.limit) {
                std::ofstream os(gen_dir + "/limit.mesh");
                imco::save_mesh(os, *sc.limit);
            }
            std::cout << "scenario=" << sc.name
                      << " members=" << sc.sequence.size()
                      << " limit=" << (sc.limit ? 1 : 0) << " dir=" << gen_dir
                      << "\n";
            return 0;
        }
        if (dist->parsed()) {
            std::ifstream ia(dist_a), ib(dist_b);
            if (!ia || !ib) {
                std::cerr << "cannot open system file\n";
                return 2;
            }
            imco::GraphSystem a = imco::read_system(ia);
            imco::GraphSystem b = imco::read_system(ib);
            std::cout << "distance=" << imco::system_distance(a, b) << "\n";
            return 0;
        }
        if (cert->parsed()) return run_stage(cert_o, "certify");
        if (net->parsed()) return run_stage(net_o, "net");
        if (conv->parsed()) return run_stage(conv_o, "converge");
        if (lim->parsed()) return run_stage(lim_o, "limit");
        if (proj->parsed()) return run_stage(proj_o, "project");
        if (meas->parsed()) return run_stage(meas_o, "measure");
        if (run->parsed()) return run_stage(run_o, "");
    } catch (const std::invalid_argument& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
