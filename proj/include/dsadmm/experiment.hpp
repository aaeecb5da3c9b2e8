#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <memory>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "dsadmm/agent.hpp"
#include "dsadmm/baselines.hpp"
#include "dsadmm/graph.hpp"
#include "dsadmm/oracle.hpp"
#include "dsadmm/problem.hpp"

namespace dsadmm {

class ConfigError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

struct ExperimentConfig {
    // Problem and data. Without a dataset path a synthetic set is drawn.
    std::string problem = "lasso";  // lasso | svm
    std::optional<std::string> dataset;
    bool normalize = false;  // per-feature max-abs scaling of a dataset file
    SynthSpec synth;
    std::optional<double> lambda;  // defaults to 1 / m

    // Network.
    int n_agents = 30;
    std::string graph = "erdos";  // ring | complete | erdos
    double p = 0.5;
    std::uint64_t seed = 1;  // graph draw and data partition

    // Algorithm.
    std::string algorithm = "dsadmm";  // dsadmm | pgextra | nids
    double beta = 1.0;
    double r = 0.99;
    double tau = 0.01;
    double step = 1e-2;
    int max_iters = 2000;
    double tol = 1e-10;
    bool kkt = true;

    bool verify = false;
    /// Oracle deviation bound; defaults to 1e-9 (1e-6 with the hinge solver).
    std::optional<double> verify_tol;
    std::string output = "trajectory.csv";
    std::string cache_dir = ".dsadmm_cache";

    // Sweep subcommand.
    double sweep_target = 1e-6;
    std::optional<int> sweep_patience;

    /// Throws ConfigError naming the offending field.
    void validate() const;
};

/// Assigns one field from its textual value; throws ConfigError for
/// unknown keys or malformed values.
void set_field(ExperimentConfig& cfg, const std::string& key, const std::string& value);

/// Flat `key = value` lines; `#` starts a comment.
ExperimentConfig parse_config(std::istream& in);
ExperimentConfig load_config(const std::filesystem::path& path);

/// Everything an algorithm run needs, built from a config.
struct Setup {
    Dataset data;
    std::unique_ptr<MixingMatrix> mixing;
    CompositeProblem problem;
    Reference reference;
};

Setup build_setup(const ExperimentConfig& cfg);

struct ExperimentSummary {
    std::string algorithm;
    RunStatus status = RunStatus::MaxIterations;
    int iterations = 0;
    double final_objective = 0.0;
    double final_suboptimality = 0.0;
    std::uint64_t rounds = 0;
    std::uint64_t scalars = 0;
    std::optional<VerificationReport> verification;

    void write(std::ostream& out) const;
};

/// Runs the configured algorithm on a prepared setup.
RunResult run_algorithm(const ExperimentConfig& cfg, const Setup& setup,
                        std::optional<VerificationReport>* verification = nullptr);

/// Builds the setup, runs, writes the trajectory CSV to cfg.output and the
/// summary next to it (`.summary.txt`). With verify on, also writes
/// `.verify.txt` and `.verify.csv`.
ExperimentSummary run_experiment(const ExperimentConfig& cfg, std::ostream& log);

/// Tunes beta (DS-ADMM) or the step (baselines) on log_grid() and writes
/// one row per evaluated point to cfg.output.
SweepResult run_sweep(const ExperimentConfig& cfg, std::ostream& log);

/// Verification run: runs DS-ADMM with the lockstep oracle and a reference
/// run ten times longer for the limit point.
VerificationReport verify_run(const ExperimentConfig& cfg, const Setup& setup, RunResult* result = nullptr);

}  // namespace dsadmm
