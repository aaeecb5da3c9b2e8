#pragma once

#include <functional>
#include <memory>
#include <optional>
#include <utility>
#include <vector>

#include "dsadmm/graph.hpp"
#include "dsadmm/iterate.hpp"
#include "dsadmm/problem.hpp"
#include "dsadmm/trajectory.hpp"

namespace dsadmm {

/// Penalty beta, half-step dual size r in (0, 1] and proximal coefficient
/// tau > 0. The full-step dual size s is fixed to 1 in the decentralized
/// protocol.
struct DsAdmmParams {
    double beta = 1.0;
    double r = 0.99;
    double tau = 0.01;
    static constexpr double s = 1.0;

    void validate() const;
    /// Step of both local prox evaluations, 1 / (beta (2 + tau)).
    double prox_step() const { return 1.0 / (beta * (2.0 + tau)); }
};

/// Local variables of one agent between phases.
///
/// `v_agg`/`b_agg` hold the round-2 aggregates of the previous iteration and
/// `u_agg`/`a_agg` the round-1 aggregates of the current one. `w2_half` is
/// w2 at the preceding half step; the full-step w2 is formed at the start of
/// group 1.
struct AgentState {
    Vector u, v, w1, w2_half;
    Vector v_agg, b_agg, u_agg, a_agg;

    static AgentState zeros(int d);
};

/// Payload of one communication round: (a_i, u_i) in round 1, (b_i, v_i) in
/// round 2.
struct RoundMessage {
    int sender = 0;
    int round = 1;
    Vector dual_payload;
    Vector primal_payload;
};

using MessagePtr = std::shared_ptr<const RoundMessage>;

/// Forms full-step w2, takes the u prox step and the w2 half step, and
/// returns the round-1 message (a_i, u_i).
RoundMessage group1_update(AgentState& state, int id, const DsAdmmParams& params, const ProxFn& f);

/// Takes the w1 half step, the v prox step and the w1 full step, and returns
/// the round-2 message (b_i, v_i).
RoundMessage group2_update(AgentState& state, int id, const DsAdmmParams& params, const ProxFn& g);

/// Simulated synchronous network running DS-ADMM.
///
/// Agents only ever see their own state and the messages delivered to them.
/// A delivery goes to each graph neighbor of the sender and is charged
/// 2*d scalars in the ledger; aggregation uses the receiver's column of W.
class DsAdmmNetwork {
public:
    DsAdmmNetwork(const CompositeProblem& problem, const MixingMatrix& w, DsAdmmParams params);

    /// group1 -> exchange round 1 -> group2 -> exchange round 2.
    void step();

    void run_group1();
    void exchange_round1();
    void run_group2();
    void exchange_round2();

    int num_agents() const { return static_cast<int>(states_.size()); }
    int dim() const { return d_; }
    const DsAdmmParams& params() const { return params_; }
    const CommLedger& ledger() const { return ledger_; }
    const AgentState& state(int i) const { return states_[i]; }
    /// Direct state access for fault-injection tests.
    AgentState& mutable_state(int i) { return states_[i]; }

    Vector average_u() const;
    double consensus_error() const;
    /// (u, v, w1, w2) at the current iteration boundary, w2 at its full step.
    GlobalIterate stacked() const;

private:
    void deliver(int round);

    const CompositeProblem& problem_;
    const MixingMatrix& mixing_;
    DsAdmmParams params_;
    int d_;
    std::vector<AgentState> states_;
    std::vector<MessagePtr> outbox_;
    CommLedger ledger_;
};

/// Per-iteration hook. May return a KKT residual to record.
using IterationObserver = std::function<std::optional<double>(int iter, const DsAdmmNetwork&)>;

RunResult run_dsadmm(const CompositeProblem& problem, const MixingMatrix& w, const DsAdmmParams& params,
                     const StopRule& stop, const IterationObserver& observer = {});

}  // namespace dsadmm
