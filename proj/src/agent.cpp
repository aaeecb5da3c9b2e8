#include "dsadmm/agent.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <stdexcept>

namespace dsadmm {

void DsAdmmParams::validate() const {
    if (!(beta > 0.0)) throw std::invalid_argument("DS-ADMM: beta must be positive");
    if (!(r > 0.0 && r <= 1.0)) throw std::invalid_argument("DS-ADMM: r must lie in (0, 1]");
    if (!(tau > 0.0)) throw std::invalid_argument("DS-ADMM: tau must be positive");
}

AgentState AgentState::zeros(int d) {
    const Vector z = Vector::Zero(d);
    return {z, z, z, z, z, z, z, z};
}

RoundMessage group1_update(AgentState& st, int id, const DsAdmmParams& p, const ProxFn& f) {
    const double denom = 2.0 + p.tau;
    const Vector w2 = st.w2_half - p.beta * (st.u - st.v_agg);
    const Vector anchor = (st.v_agg + (1.0 + p.tau) * st.u) / denom + (st.b_agg + w2) / (denom * p.beta);
    st.u = f.prox(anchor, p.prox_step());
    st.w2_half = w2 - p.r * p.beta * (st.u - st.v_agg);
    Vector a = st.w2_half + (st.w2_half - w2) / p.r;
    return {id, 1, std::move(a), st.u};
}

RoundMessage group2_update(AgentState& st, int id, const DsAdmmParams& p, const ProxFn& g) {
    const double denom = 2.0 + p.tau;
    const Vector w1_half = st.w1 - p.r * p.beta * (st.u_agg - st.v);
    const Vector anchor = (st.u_agg + (1.0 + p.tau) * st.v) / denom - (w1_half + st.a_agg) / (denom * p.beta);
    st.v = g.prox(anchor, p.prox_step());
    st.w1 = w1_half - DsAdmmParams::s * p.beta * (st.u_agg - st.v);
    Vector b = st.w1 + (st.w1 - w1_half) / DsAdmmParams::s;
    return {id, 2, std::move(b), st.v};
}

DsAdmmNetwork::DsAdmmNetwork(const CompositeProblem& problem, const MixingMatrix& w, DsAdmmParams params)
    : problem_(problem), mixing_(w), params_(params), d_(problem.d) {
    params_.validate();
    if (problem.n != w.size()) throw std::invalid_argument("DS-ADMM: problem.n != mixing matrix size");
    states_.assign(problem.n, AgentState::zeros(d_));
}

void DsAdmmNetwork::run_group1() {
    outbox_.assign(states_.size(), nullptr);
    for (int i = 0; i < num_agents(); ++i)
        outbox_[i] = std::make_shared<const RoundMessage>(group1_update(states_[i], i, params_, *problem_.f[i]));
}

void DsAdmmNetwork::run_group2() {
    outbox_.assign(states_.size(), nullptr);
    for (int i = 0; i < num_agents(); ++i)
        outbox_[i] = std::make_shared<const RoundMessage>(group2_update(states_[i], i, params_, *problem_.g[i]));
}

void DsAdmmNetwork::deliver(int round) {
    const int n = num_agents();
    const Graph& graph = mixing_.graph();
    if (static_cast<int>(outbox_.size()) != n)
        throw std::logic_error("DS-ADMM: exchange without a completed update phase");
    for (int j = 0; j < n; ++j) {
        if (!outbox_[j] || outbox_[j]->round != round)
            throw std::logic_error("DS-ADMM: exchange without a completed update phase");
        if (outbox_[j]->dual_payload.size() != d_ || outbox_[j]->primal_payload.size() != d_)
            throw std::invalid_argument("DS-ADMM: message dimension mismatch");
    }

    std::vector<std::vector<MessagePtr>> inbox(n);
    std::uint64_t scalars = 0;
    for (int j = 0; j < n; ++j) {
        for (int i : graph.neighbors(j)) {
            inbox[i].push_back(outbox_[j]);
            scalars += 2 * static_cast<std::uint64_t>(d_);
        }
    }
    ledger_.record_round(scalars);

    for (int i = 0; i < n; ++i) {
        const RoundMessage& own = *outbox_[i];
        Vector dual = mixing_(i, i) * own.dual_payload;
        Vector primal = mixing_(i, i) * own.primal_payload;
        for (const auto& msg : inbox[i]) {
            if (!graph.has_edge(msg->sender, i))
                throw std::logic_error("DS-ADMM: message from a non-neighbor");
            const double weight = mixing_(msg->sender, i);
            dual.noalias() += weight * msg->dual_payload;
            primal.noalias() += weight * msg->primal_payload;
        }
        AgentState& st = states_[i];
        if (round == 1) {
            st.a_agg = std::move(dual);
            st.u_agg = std::move(primal);
        } else {
            st.b_agg = std::move(dual);
            st.v_agg = std::move(primal);
        }
    }
    outbox_.clear();
}

void DsAdmmNetwork::exchange_round1() { deliver(1); }
void DsAdmmNetwork::exchange_round2() { deliver(2); }

void DsAdmmNetwork::step() {
    ledger_.begin_iteration();
    run_group1();
    exchange_round1();
    run_group2();
    exchange_round2();
}

Vector DsAdmmNetwork::average_u() const {
    Vector avg = Vector::Zero(d_);
    for (const auto& st : states_) avg += st.u;
    return avg / static_cast<double>(states_.size());
}

double DsAdmmNetwork::consensus_error() const {
    const Vector avg = average_u();
    double worst = 0.0;
    for (const auto& st : states_) worst = std::max(worst, (st.u - avg).norm());
    return worst;
}

GlobalIterate DsAdmmNetwork::stacked() const {
    const int n = num_agents();
    GlobalIterate it = GlobalIterate::zeros(n, d_);
    for (int i = 0; i < n; ++i) {
        const AgentState& st = states_[i];
        it.u.segment(i * d_, d_) = st.u;
        it.v.segment(i * d_, d_) = st.v;
        it.w1.segment(i * d_, d_) = st.w1;
        it.w2.segment(i * d_, d_) = st.w2_half - params_.beta * (st.u - st.v_agg);
    }
    return it;
}

RunResult run_dsadmm(const CompositeProblem& problem, const MixingMatrix& w, const DsAdmmParams& params,
                     const StopRule& stop, const IterationObserver& observer) {
    using Clock = std::chrono::steady_clock;
    DsAdmmNetwork net(problem, w, params);
    RunResult result;
    result.average = net.average_u();
    const auto start = Clock::now();
    const int n = net.num_agents();
    const int d = net.dim();
    Vector previous(2 * n * d);
    auto primal_stack = [&](Vector& out) {
        for (int i = 0; i < n; ++i) {
            out.segment(i * d, d) = net.state(i).u;
            out.segment((n + i) * d, d) = net.state(i).v;
        }
    };
    Vector current(2 * n * d);
    primal_stack(previous);

    for (int t = 1; t <= stop.max_iters; ++t) {
        net.step();
        IterateRecord rec;
        rec.iter = t;
        rec.comm_rounds_cum = net.ledger().rounds_total();
        rec.scalars_cum = net.ledger().scalars_total();
        const Vector avg = net.average_u();
        rec.objective = problem.objective(avg);
        if (stop.f_star) rec.suboptimality = rec.objective - *stop.f_star;
        rec.consensus_err = net.consensus_error();
        if (observer) rec.kkt_residual = observer(t, net);
        rec.wall_ms = std::chrono::duration<double, std::milli>(Clock::now() - start).count();
        result.records.push_back(rec);
        result.average = avg;

        if (!std::isfinite(rec.objective)) {
            result.status = RunStatus::Diverged;
            break;
        }
        primal_stack(current);
        const double movement = (current - previous).norm();
        std::swap(current, previous);
        const bool done = stop.f_star ? *rec.suboptimality <= stop.tol : movement <= stop.tol;
        if (done) {
            result.status = RunStatus::Converged;
            break;
        }
    }
    result.ledger = net.ledger();
    result.final_iterate = net.stacked();
    return result;
}

}  // namespace dsadmm
