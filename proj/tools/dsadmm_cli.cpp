#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "dsadmm/experiment.hpp"
#include "dsadmm/graph.hpp"

namespace {

constexpr int kOk = 0;
constexpr int kConfigError = 1;
constexpr int kVerifyFailed = 2;

struct CommonFlags {
    std::string config;
    std::vector<std::string> sets;
    std::optional<std::string> algorithm, graph, output;
    std::optional<double> p, beta, r, tau, tol;
    std::optional<std::uint64_t> seed;
    std::optional<int> max_iters;
    bool verify = false;
};

void add_common(CLI::App* cmd, CommonFlags& f) {
    cmd->add_option("-c,--config", f.config, "key = value config file");
    cmd->add_option("--set", f.sets, "extra key=value override (repeatable)");
    cmd->add_option("--algorithm", f.algorithm, "dsadmm | pgextra | nids");
    cmd->add_option("--graph", f.graph, "ring | complete | erdos");
    cmd->add_option("--p", f.p, "edge probability for erdos");
    cmd->add_option("--beta", f.beta, "DS-ADMM penalty");
    cmd->add_option("--r", f.r, "DS-ADMM half-step dual size");
    cmd->add_option("--tau", f.tau, "DS-ADMM proximal coefficient");
    cmd->add_option("--seed", f.seed, "graph and partition seed");
    cmd->add_option("--max-iters", f.max_iters, "iteration cap");
    cmd->add_option("--tol", f.tol, "suboptimality tolerance");
    cmd->add_option("--output", f.output, "output CSV path");
    cmd->add_flag("--verify", f.verify, "run the centralized oracle in lockstep");
}

dsadmm::ExperimentConfig resolve(const CommonFlags& f) {
    dsadmm::ExperimentConfig cfg = f.config.empty() ? dsadmm::ExperimentConfig{} : dsadmm::load_config(f.config);
    for (const std::string& kv : f.sets) {
        const auto eq = kv.find('=');
        if (eq == std::string::npos) throw dsadmm::ConfigError("--set expects key=value, got '" + kv + "'");
        dsadmm::set_field(cfg, kv.substr(0, eq), kv.substr(eq + 1));
    }
    if (f.algorithm) cfg.algorithm = *f.algorithm;
    if (f.graph) cfg.graph = *f.graph;
    if (f.p) cfg.p = *f.p;
    if (f.beta) cfg.beta = *f.beta;
    if (f.r) cfg.r = *f.r;
    if (f.tau) cfg.tau = *f.tau;
    if (f.seed) cfg.seed = *f.seed;
    if (f.max_iters) cfg.max_iters = *f.max_iters;
    if (f.tol) cfg.tol = *f.tol;
    if (f.output) cfg.output = *f.output;
    if (f.verify) cfg.verify = true;
    cfg.validate();
    return cfg;
}

int graph_info(const std::string& kind, int n, double p, std::uint64_t seed, const std::string& edges_out) {
    std::optional<dsadmm::Graph> g;
    if (kind == "ring") g = dsadmm::gen_ring(n);
    else if (kind == "complete") g = dsadmm::gen_complete(n);
    else if (kind == "erdos") g = dsadmm::gen_erdos_renyi(n, p, seed);
    else throw dsadmm::ConfigError("field 'graph': must be ring, complete or erdos");
    const dsadmm::MixingMatrix w = dsadmm::metropolis_weights(*g);
    int dmin = n, dmax = 0;
    for (int i = 0; i < n; ++i) {
        dmin = std::min(dmin, g->degree(i));
        dmax = std::max(dmax, g->degree(i));
    }
    const auto& ev = w.eigenvalues();
    std::cout << "nodes: " << n << "\nedges: " << g->num_edges() << "\ndegree: min " << dmin << ", max " << dmax
              << "\nlambda_2(W): " << ev(std::min<Eigen::Index>(1, ev.size() - 1))
              << "\nlambda_n(W): " << ev(ev.size() - 1) << "\nspectral gap: " << dsadmm::spectral_gap(w) << "\n";
    if (!edges_out.empty()) {
        std::ofstream out(edges_out);
        if (!out) throw dsadmm::ConfigError("cannot write " + edges_out);
        dsadmm::write_edge_list(out, *g);
    }
    return kOk;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Decentralized composite optimization: DS-ADMM, PG-EXTRA and NIDS"};
    app.require_subcommand(1);

    CommonFlags run_flags, sweep_flags, verify_flags;
    CLI::App* run = app.add_subcommand("run", "run one algorithm and write its trajectory CSV");
    add_common(run, run_flags);
    CLI::App* sweep = app.add_subcommand("sweep", "tune beta or the step size on a log grid");
    add_common(sweep, sweep_flags);
    CLI::App* verify = app.add_subcommand("verify", "run DS-ADMM against the centralized oracle");
    add_common(verify, verify_flags);

    std::string g_kind = "erdos", edges_out;
    int g_n = 30;
    double g_p = 0.5;
    std::uint64_t g_seed = 1;
    CLI::App* info = app.add_subcommand("graph-info", "print graph and mixing-matrix statistics");
    info->add_option("--graph", g_kind, "ring | complete | erdos");
    info->add_option("--n", g_n, "number of nodes");
    info->add_option("--p", g_p, "edge probability for erdos");
    info->add_option("--seed", g_seed, "graph seed");
    info->add_option("--edges-out", edges_out, "write the edge list here");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? kOk : kConfigError;
    }

    try {
        if (info->parsed()) return graph_info(g_kind, g_n, g_p, g_seed, edges_out);
        if (sweep->parsed()) {
            const dsadmm::ExperimentConfig cfg = resolve(sweep_flags);
            dsadmm::run_sweep(cfg, std::cout);
            return kOk;
        }
        const bool verifying = verify->parsed();
        dsadmm::ExperimentConfig cfg = resolve(verifying ? verify_flags : run_flags);
        if (verifying) {
            cfg.verify = true;
            cfg.validate();
        }
        const dsadmm::ExperimentSummary summary = dsadmm::run_experiment(cfg, std::cout);
        if (summary.verification && !summary.verification->passed()) return kVerifyFailed;
        return kOk;
    } catch (const dsadmm::ConfigError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return kConfigError;
    } catch (const std::invalid_argument& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return kConfigError;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kConfigError;
    }
}
