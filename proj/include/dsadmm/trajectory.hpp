#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "dsadmm/iterate.hpp"
#include "dsadmm/prox.hpp"

namespace dsadmm {

/// One metrics row per completed iteration.
struct IterateRecord {
    int iter = 0;
    std::uint64_t comm_rounds_cum = 0;
    std::uint64_t scalars_cum = 0;
    double objective = 0.0;
    std::optional<double> suboptimality;
    double consensus_err = 0.0;
    std::optional<double> kkt_residual;
    double wall_ms = 0.0;  // elapsed since the run started
};

/// Communication cost: rounds and transmitted scalars, with a per-iteration
/// breakdown. A delivery of k scalars from an agent to one neighbor costs k;
/// an agent's use of its own values is free.
class CommLedger {
public:
    struct Iteration {
        std::uint64_t rounds = 0;
        std::uint64_t scalars = 0;
    };

    void begin_iteration() { per_iteration_.emplace_back(); }
    void record_round(std::uint64_t scalars);

    std::uint64_t rounds_total() const { return rounds_total_; }
    std::uint64_t scalars_total() const { return scalars_total_; }
    const std::vector<Iteration>& per_iteration() const { return per_iteration_; }

private:
    std::uint64_t rounds_total_ = 0;
    std::uint64_t scalars_total_ = 0;
    std::vector<Iteration> per_iteration_;
};

struct StopRule {
    int max_iters = 2000;
    double tol = 1e-10;
    /// With F* known, stop on suboptimality <= tol; otherwise on the size of
    /// the last iterate change.
    std::optional<double> f_star;
};

enum class RunStatus { Converged, MaxIterations, Diverged };

std::string to_string(RunStatus status);

struct RunResult {
    std::vector<IterateRecord> records;
    CommLedger ledger;
    RunStatus status = RunStatus::MaxIterations;
    Vector average;  // network average of the primal iterate at exit
    /// Stacked iterate at exit. Baselines report u = v = x with zero duals.
    GlobalIterate final_iterate;
};

/// `iter,comm_rounds_cum,scalars_cum,objective,suboptimality,consensus_err,kkt_residual,wall_ms`
/// with empty cells for absent optional values.
void write_trajectory_csv(std::ostream& out, const std::vector<IterateRecord>& records);
void write_trajectory_csv(const std::filesystem::path& path, const std::vector<IterateRecord>& records);
std::vector<IterateRecord> read_trajectory_csv(std::istream& in);
std::vector<IterateRecord> read_trajectory_csv(const std::filesystem::path& path);

/// Index of the first record with suboptimality <= target, if any.
std::optional<std::size_t> first_reaching(const std::vector<IterateRecord>& records, double target);

}  // namespace dsadmm
