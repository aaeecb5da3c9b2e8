#include <gtest/gtest.h>

#include <memory>

#include "dsadmm/agent.hpp"
#include "dsadmm/oracle.hpp"
#include "dsadmm/rng.hpp"

using namespace dsadmm;

namespace {

Vector random_vector(Rng& rng, int d) {
    Vector v(d);
    for (int k = 0; k < d; ++k) v(k) = rng.normal();
    return v;
}

AgentState random_state(Rng& rng, int d) {
    return {random_vector(rng, d), random_vector(rng, d), random_vector(rng, d), random_vector(rng, d),
            random_vector(rng, d), random_vector(rng, d), random_vector(rng, d), random_vector(rng, d)};
}

CompositeProblem zero_problem(int n, int d) {
    std::vector<ProxPtr> f(n, std::make_shared<ZeroFn>()), g(n, std::make_shared<ZeroFn>());
    return make_custom(f, g, d);
}

struct LassoFixture {
    Dataset data;
    CompositeProblem problem;
    Reference ref;
    std::unique_ptr<MixingMatrix> w;

    LassoFixture(int n, int m, int d, std::uint64_t seed, Graph graph) {
        SynthSpec spec;
        spec.n_samples = m;
        spec.d = d;
        spec.seed = seed;
        data = synth_lasso(spec).data;
        problem = make_lasso(data, n, std::nullopt, seed);
        ref = reference_solution(problem);
        w = std::make_unique<MixingMatrix>(metropolis_weights(graph));
    }
};

}  // namespace

TEST(AgentParams, Validation) {
    EXPECT_NO_THROW((DsAdmmParams{1.0, 1.0, 0.1}.validate()));
    EXPECT_THROW((DsAdmmParams{0.0, 0.5, 0.1}.validate()), std::invalid_argument);
    EXPECT_THROW((DsAdmmParams{1.0, 0.0, 0.1}.validate()), std::invalid_argument);
    EXPECT_THROW((DsAdmmParams{1.0, 1.5, 0.1}.validate()), std::invalid_argument);
    EXPECT_THROW((DsAdmmParams{1.0, 0.5, 0.0}.validate()), std::invalid_argument);
    EXPECT_DOUBLE_EQ((DsAdmmParams{2.0, 0.5, 0.5}.prox_step()), 1.0 / 5.0);
}

TEST(AgentUpdates, ZeroStateZeroDataStaysZero) {
    AgentState st = AgentState::zeros(4);
    DsAdmmParams p;
    ZeroFn zero;
    RoundMessage m1 = group1_update(st, 0, p, zero);
    RoundMessage m2 = group2_update(st, 0, p, zero);
    EXPECT_EQ(m1.round, 1);
    EXPECT_EQ(m2.round, 2);
    EXPECT_TRUE(m1.dual_payload.isZero(0.0));
    EXPECT_TRUE(m1.primal_payload.isZero(0.0));
    EXPECT_TRUE(m2.dual_payload.isZero(0.0));
    EXPECT_TRUE(m2.primal_payload.isZero(0.0));
}

TEST(AgentUpdates, Group1PayloadIdentity) {
    Rng rng(1);
    L1Norm f(0.3);
    for (int k = 0; k < 50; ++k) {
        AgentState st = random_state(rng, 5);
        DsAdmmParams p{0.5 + rng.uniform(), 0.1 + 0.9 * rng.uniform(), 0.01 + rng.uniform()};
        const Vector w2 = st.w2_half - p.beta * (st.u - st.v_agg);
        const Vector v_agg = st.v_agg;
        RoundMessage m = group1_update(st, 3, p, f);
        EXPECT_EQ(m.sender, 3);
        EXPECT_EQ(m.primal_payload, st.u);
        const Vector expected = w2 - (1.0 + p.r) * p.beta * (st.u - v_agg);
        EXPECT_LT((m.dual_payload - expected).norm(), 1e-12 * (1.0 + expected.norm()));
    }
}

TEST(AgentUpdates, Group2PayloadIdentity) {
    Rng rng(2);
    SquaredL2 g(0.7);
    for (int k = 0; k < 50; ++k) {
        AgentState st = random_state(rng, 5);
        DsAdmmParams p{0.5 + rng.uniform(), 0.1 + 0.9 * rng.uniform(), 0.01 + rng.uniform()};
        const Vector w1_half = st.w1 - p.r * p.beta * (st.u_agg - st.v);
        RoundMessage m = group2_update(st, 1, p, g);
        EXPECT_EQ(m.primal_payload, st.v);
        const Vector expected = 2.0 * st.w1 - w1_half;
        EXPECT_LT((m.dual_payload - expected).norm(), 1e-12 * (1.0 + expected.norm()));
        // full step equals the half step moved by beta (v - u_agg) more
        EXPECT_LT((st.w1 - (w1_half - p.beta * (st.u_agg - st.v))).norm(), 1e-12 * (1.0 + st.w1.norm()));
    }
}

TEST(AgentNetwork, LedgerRing4) {
    CompositeProblem p = zero_problem(4, 3);
    MixingMatrix w = metropolis_weights(gen_ring(4));
    DsAdmmNetwork net(p, w, {});
    net.run_group1();
    net.exchange_round1();
    EXPECT_EQ(net.ledger().rounds_total(), 1u);
    EXPECT_EQ(net.ledger().scalars_total(), 48u);
    net.run_group2();
    net.exchange_round2();
    EXPECT_EQ(net.ledger().scalars_total(), 96u);
}

TEST(AgentNetwork, LedgerClosedForm) {
    const int d = 4, T = 17;
    Graph g = gen_erdos_renyi(9, 0.4, 3);
    // nonzero data, so the movement rule with tol 0 never fires early
    LassoFixture fx(9, 90, d, 3, g);
    RunResult res = run_dsadmm(fx.problem, *fx.w, {}, StopRule{T, 0.0, std::nullopt});
    ASSERT_EQ(res.records.size(), static_cast<std::size_t>(T));
    EXPECT_EQ(res.ledger.rounds_total(), 2u * T);
    EXPECT_EQ(res.ledger.scalars_total(), 8u * d * g.num_edges() * T);
    for (const auto& it : res.ledger.per_iteration()) {
        EXPECT_EQ(it.rounds, 2u);
        EXPECT_EQ(it.scalars, 8u * d * g.num_edges());
    }
    for (int t = 0; t < T; ++t) {
        EXPECT_EQ(res.records[t].comm_rounds_cum, 2u * (t + 1));
        EXPECT_EQ(res.records[t].scalars_cum, 8u * d * g.num_edges() * (t + 1));
    }
}

TEST(AgentNetwork, MaxItersZero) {
    CompositeProblem p = zero_problem(3, 2);
    MixingMatrix w = metropolis_weights(gen_ring(3));
    RunResult res = run_dsadmm(p, w, {}, StopRule{0, 1e-10, std::nullopt});
    EXPECT_TRUE(res.records.empty());
    EXPECT_EQ(res.ledger.rounds_total(), 0u);
    EXPECT_EQ(res.ledger.scalars_total(), 0u);
}

TEST(AgentNetwork, ExchangeOrderEnforced) {
    CompositeProblem p = zero_problem(3, 2);
    MixingMatrix w = metropolis_weights(gen_ring(3));
    DsAdmmNetwork net(p, w, {});
    EXPECT_THROW(net.exchange_round1(), std::logic_error);
    net.run_group1();
    EXPECT_THROW(net.exchange_round2(), std::logic_error);
}

TEST(AgentNetwork, UniformPayloadAggregatesToItself) {
    // identical agents from identical state produce identical messages
    const int d = 3;
    Matrix a(2, d);
    a << 1, 2, 0, 0, 1, -1;
    Vector b(2);
    b << 1, -1;
    auto f = std::make_shared<QuadraticLoss>(SparseRowMatrix(a.sparseView()), b, 0.5);
    auto g = std::make_shared<L1Norm>(0.1);
    CompositeProblem p = make_custom({f, f, f, f, f}, {g, g, g, g, g}, d);
    MixingMatrix w = metropolis_weights(gen_erdos_renyi(5, 0.6, 1));
    DsAdmmNetwork net(p, w, {});
    net.run_group1();
    net.exchange_round1();
    for (int i = 0; i < 5; ++i) {
        EXPECT_LT((net.state(i).u_agg - net.state(0).u).norm(), 1e-14);
        // w2 starts at 0, so a = (1 + 1/r) w2_half
        EXPECT_LT((net.state(i).a_agg - (1.0 + 1.0 / 0.99) * net.state(0).w2_half).norm(), 1e-14);
    }
}

TEST(AgentNetwork, SingleAgentMatchesOracleAndSolves) {
    LassoFixture fx(1, 40, 5, 3, Graph(1, {}));
    DsAdmmParams params{1.0, 0.99, 0.01};
    DsAdmmNetwork net(fx.problem, *fx.w, params);
    GlobalMatrices gm = build_matrices(*fx.w, fx.problem.d, OracleParams::from(params));
    GlobalIterate oracle = GlobalIterate::zeros(1, fx.problem.d);
    for (int t = 0; t < 50; ++t) {
        net.step();
        oracle = global_step(oracle, gm, fx.problem);
        EXPECT_LT(relative_deviation(net.stacked(), oracle), 1e-12);
    }
    RunResult res = run_dsadmm(fx.problem, *fx.w, params, StopRule{5000, 1e-12, fx.ref.objective});
    EXPECT_EQ(res.status, RunStatus::Converged);
    EXPECT_LT((res.average - fx.ref.x).norm(), 1e-5);
}

TEST(AgentNetwork, ConsensusFixedPoint) {
    // every agent holds the same (f, g), so the local optimum is the global one
    SynthSpec spec;
    spec.n_samples = 30;
    spec.d = 4;
    Dataset ds = synth_lasso(spec).data;
    CompositeProblem one = make_lasso(ds, 1, 0.02, 0);
    Reference ref = reference_solution(one, 1e-14);
    const int n = 4;
    CompositeProblem p = make_custom(std::vector<ProxPtr>(n, one.f[0]), std::vector<ProxPtr>(n, one.g[0]), 4);
    MixingMatrix w = metropolis_weights(gen_complete(n));
    DsAdmmNetwork net(p, w, {0.8, 0.99, 0.01});
    const Vector grad = one.f[0]->gradient(ref.x);
    for (int i = 0; i < n; ++i) {
        AgentState& st = net.mutable_state(i);
        st.u = st.v = st.v_agg = ref.x;
        st.w1 = Vector::Zero(4);
        st.w2_half = grad;
        st.b_agg = Vector::Zero(4);
    }
    net.step();
    for (int i = 0; i < n; ++i) {
        EXPECT_LT((net.state(i).u - ref.x).norm(), 1e-9);
        EXPECT_LT((net.state(i).v - ref.x).norm(), 1e-9);
    }
}

TEST(AgentNetwork, NonNeighborTamperIsInvisible) {
    LassoFixture fx(6, 60, 4, 5, gen_ring(6));
    DsAdmmParams params;
    DsAdmmNetwork clean(fx.problem, *fx.w, params), tampered(fx.problem, *fx.w, params);
    for (int t = 0; t < 3; ++t) {
        clean.step();
        tampered.step();
    }
    // agent 3 is two hops from agent 0 on ring(6); one iteration is not enough to reach it
    AgentState& st = tampered.mutable_state(3);
    st.u.array() += 100.0;
    st.w2_half.array() -= 50.0;
    clean.step();
    tampered.step();
    const AgentState& a = clean.state(0);
    const AgentState& b = tampered.state(0);
    EXPECT_EQ(a.u, b.u);
    EXPECT_EQ(a.v, b.v);
    EXPECT_EQ(a.w1, b.w1);
    EXPECT_EQ(a.w2_half, b.w2_half);
    EXPECT_EQ(a.v_agg, b.v_agg);
    EXPECT_EQ(a.b_agg, b.b_agg);
    // the tamper is real: agent 3's neighbor sees it
    EXPECT_NE(clean.state(2).u_agg, tampered.state(2).u_agg);
}

TEST(AgentNetwork, PhaseOrderIndependence) {
    LassoFixture fx(5, 50, 3, 6, gen_erdos_renyi(5, 0.6, 2));
    DsAdmmParams params;
    DsAdmmNetwork net(fx.problem, *fx.w, params);
    for (int t = 0; t < 4; ++t) net.step();
    std::vector<AgentState> copy;
    for (int i = 0; i < 5; ++i) copy.push_back(net.state(i));
    net.run_group1();
    // same phase applied in reverse agent order on the snapshot
    for (int i = 4; i >= 0; --i) group1_update(copy[i], i, params, *fx.problem.f[i]);
    for (int i = 0; i < 5; ++i) {
        EXPECT_EQ(copy[i].u, net.state(i).u);
        EXPECT_EQ(copy[i].w2_half, net.state(i).w2_half);
    }
}

TEST(AgentRun, DeterministicRerun) {
    LassoFixture fx(10, 100, 20, 1, gen_erdos_renyi(10, 0.5, 1));
    StopRule stop{200, 1e-10, fx.ref.objective};
    RunResult a = run_dsadmm(fx.problem, *fx.w, {}, stop);
    RunResult b = run_dsadmm(fx.problem, *fx.w, {}, stop);
    ASSERT_EQ(a.records.size(), b.records.size());
    for (std::size_t k = 0; k < a.records.size(); ++k) {
        EXPECT_EQ(a.records[k].objective, b.records[k].objective);
        EXPECT_EQ(a.records[k].consensus_err, b.records[k].consensus_err);
    }
    EXPECT_EQ(a.average, b.average);
}

TEST(AgentRun, EventuallyMonotoneAndConverges) {
    LassoFixture fx(10, 100, 20, 1, gen_erdos_renyi(10, 0.5, 1));
    RunResult res = run_dsadmm(fx.problem, *fx.w, {}, StopRule{2000, 1e-10, fx.ref.objective});
    EXPECT_EQ(res.status, RunStatus::Converged);
    for (const auto& rec : res.records) EXPECT_GE(*rec.suboptimality, -1e-10);
    for (std::size_t k = 50; k + 1 < res.records.size(); ++k)
        EXPECT_LE(*res.records[k + 1].suboptimality, *res.records[k].suboptimality) << "iter " << k + 2;
    EXPECT_LE(res.records.back().consensus_err, 1e-6);
}

TEST(AgentRun, RejectsSizeMismatch) {
    CompositeProblem p = zero_problem(3, 2);
    MixingMatrix w = metropolis_weights(gen_ring(4));
    EXPECT_THROW(DsAdmmNetwork(p, w, {}), std::invalid_argument);
}
