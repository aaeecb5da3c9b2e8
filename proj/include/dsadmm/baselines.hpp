#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "dsadmm/graph.hpp"
#include "dsadmm/problem.hpp"
#include "dsadmm/trajectory.hpp"

namespace dsadmm {

enum class BaselineKind { PgExtra, Nids };

std::string to_string(BaselineKind kind);

struct BaselineParams {
    double step = 1e-2;
    BaselineKind algorithm = BaselineKind::PgExtra;

    void validate() const;
};

/// Proximal-gradient baselines. Each agent splits its pair (f_i, g_i) into
/// a smooth part (gradient) and a prox part: f_i is the smooth part when it
/// is smooth, otherwise g_i is (hinge losses land in the prox slot). Both
/// methods send one d-vector to every neighbor per iteration, so after T
/// iterations rounds = T and scalars = 2 d |E| T. A run whose iterate norm
/// exceeds 1e12 (or turns non-finite) stops with RunStatus::Diverged.
RunResult pg_extra_run(const CompositeProblem& problem, const MixingMatrix& w, double step, const StopRule& stop);

/// NIDS with mixing (I + W) / 2. The start x1 = prox(x0 - step grad(x0)) is
/// a local step and is not counted as an iteration.
RunResult nids_run(const CompositeProblem& problem, const MixingMatrix& w, double step, const StopRule& stop);

RunResult baseline_run(const CompositeProblem& problem, const MixingMatrix& w, const BaselineParams& params,
                       const StopRule& stop);

/// 10^(lo + k / per_decade) for k = 0 .. (hi - lo) * per_decade.
std::vector<double> log_grid(int lo_exp = -4, int hi_exp = 1, int per_decade = 13);

struct SweepPoint {
    double value = 0.0;
    RunStatus status = RunStatus::MaxIterations;
    int iterations = 0;  // iterations actually run
    std::optional<int> iters_to_target;
    std::uint64_t scalars_to_target = 0;
};

struct SweepResult {
    std::vector<SweepPoint> points;  // in evaluation order
    std::optional<double> best;
    std::optional<int> best_iters;
    std::uint64_t best_scalars = 0;
};

/// Runs one configuration with the given iteration cap; the stop rule's
/// target is the sweep target.
using SweepRunner = std::function<RunResult(double value, int max_iters)>;

/// Picks the grid value that reaches `target` suboptimality in the fewest
/// iterations (ties: fewer scalars). A coarse pass takes every
/// `coarse_stride`-th point from the top of the grid; the remaining points
/// follow in order of distance from the best coarse point. Each run is
/// capped at the best iteration count found so far, so a point that cannot
/// win stops early. With `patience` set, the fine pass stops after that
/// many consecutive points without improvement.
SweepResult tune(const std::vector<double>& grid, const SweepRunner& runner, double target, int max_iters,
                 std::optional<int> patience = std::nullopt, int coarse_stride = 13);

}  // namespace dsadmm
