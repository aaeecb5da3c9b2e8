// Acceptance suite. Prints one PASS/FAIL line per criterion; exit status is
// nonzero if any selected criterion fails.
//
//   acceptance                 run all criteria
//   acceptance --criterion N   run criterion N only

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <functional>
#include <iostream>
#include <map>
#include <memory>
#include <sstream>
#include <string>
#include <vector>

#include <Eigen/Eigenvalues>

#include "dsadmm/agent.hpp"
#include "dsadmm/baselines.hpp"
#include "dsadmm/experiment.hpp"
#include "dsadmm/oracle.hpp"
#include "dsadmm/rng.hpp"

using namespace dsadmm;

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point start) {
    return std::chrono::duration<double>(Clock::now() - start).count();
}

struct Outcome {
    bool pass = true;
    std::ostringstream detail;

    void require(bool ok, const std::string& what) {
        if (!ok) {
            pass = false;
            detail << " [failed: " << what << "]";
        }
    }
};

// Synthetic Lasso: 10 agents, d = 20, 100 samples, seed 1.
ExperimentConfig lasso_fixture_config() {
    ExperimentConfig cfg;
    cfg.problem = "lasso";
    cfg.n_agents = 10;
    cfg.synth.n_samples = 100;
    cfg.synth.d = 20;
    cfg.synth.seed = 1;
    cfg.seed = 1;
    cfg.beta = 1.0;
    cfg.r = 0.99;
    cfg.tau = 0.01;
    cfg.cache_dir = "";
    return cfg;
}

const Setup& lasso_fixture() {
    static const Setup setup = build_setup(lasso_fixture_config());
    return setup;
}

DsAdmmParams fixture_params() { return {1.0, 0.99, 0.01}; }

struct VerifiedRun {
    RunResult run;
    std::unique_ptr<LockstepVerifier> verifier;
    double seconds = 0.0;
};

// DS-ADMM with the lockstep oracle for exactly `iters` iterations.
VerifiedRun verified_run(int iters) {
    const Setup& s = lasso_fixture();
    VerifiedRun out;
    out.verifier = std::make_unique<LockstepVerifier>(s.problem, *s.mixing, fixture_params());
    const auto start = Clock::now();
    StopRule stop{iters, 0.0, std::nullopt};
    LockstepVerifier& v = *out.verifier;
    out.run = run_dsadmm(s.problem, *s.mixing, fixture_params(), stop,
                         [&](int, const DsAdmmNetwork& net) { return v.observe(net); });
    out.seconds = seconds_since(start);
    return out;
}

const VerifiedRun& run_500() {
    static const VerifiedRun r = verified_run(500);
    return r;
}

GlobalIterate reference_limit(int iters) {
    const Setup& s = lasso_fixture();
    DsAdmmNetwork net(s.problem, *s.mixing, fixture_params());
    for (int t = 0; t < iters; ++t) net.step();
    return net.stacked();
}

// ---------------------------------------------------------------- criteria

Outcome criterion1() {
    Outcome o;
    VerifiedRun r = verified_run(200);
    const double dev = r.verifier->max_deviation();
    o.detail << "200 iterations, max relative deviation " << dev << ", " << r.seconds << " s";
    o.require(r.verifier->deviations().size() == 200, "200 lockstep comparisons");
    o.require(dev <= 1e-9, "deviation <= 1e-9");
    o.require(r.seconds <= 10.0, "runtime <= 10 s");
    return o;
}

Outcome criterion2() {
    Outcome o;
    const VerifiedRun& r = run_500();
    const GlobalIterate w_inf = reference_limit(5000);
    TrajectoryCheck c = check_contraction(r.verifier->trajectory(), r.verifier->matrices(), w_inf);
    double worst = INFINITY;
    for (const auto& row : c.rows) worst = std::min(worst, row.margin());
    o.detail << c.rows.size() << " steps checked, " << c.violations() << " violations, min margin " << worst;
    o.require(c.rows.size() == 500, "t = 0..499 checked");
    o.require(c.violations() == 0, "zero violations");
    return o;
}

Outcome criterion3() {
    Outcome o;
    const VerifiedRun& r = run_500();
    TrajectoryCheck c = check_ergodic_bound(r.verifier->trajectory(), r.verifier->matrices());
    double worst_ratio = 0.0;
    for (const auto& row : c.rows) worst_ratio = std::max(worst_ratio, row.lhs / row.rhs);
    o.detail << c.rows.size() << " steps checked, " << c.violations() << " violations, max lhs/rhs " << worst_ratio;
    o.require(c.rows.size() == 500, "t = 0..499 checked");
    o.require(c.violations() == 0, "zero violations");
    return o;
}

RunResult linear_rate_run() {
    const Setup& s = lasso_fixture();
    return run_dsadmm(s.problem, *s.mixing, fixture_params(), StopRule{20000, 1e-10, s.reference.objective});
}

Outcome criterion4() {
    Outcome o;
    RunResult run = linear_rate_run();
    auto hit = first_reaching(run.records, 1e-10);
    o.require(hit.has_value(), "suboptimality reaches 1e-10");
    if (!hit) return o;
    const int k = static_cast<int>(*hit);  // records [0, k) lie above 1e-10
    const int first = k - static_cast<int>(std::ceil(0.6 * k));
    std::vector<double> xs, ys;
    for (int i = first; i < k; ++i) {
        const double sub = *run.records[i].suboptimality;
        o.require(sub > 0.0, "positive suboptimality before the hit");
        if (sub <= 0.0) return o;
        xs.push_back(run.records[i].iter);
        ys.push_back(std::log(sub));
    }
    const double n = static_cast<double>(xs.size());
    double mx = 0, my = 0;
    for (std::size_t i = 0; i < xs.size(); ++i) {
        mx += xs[i] / n;
        my += ys[i] / n;
    }
    double sxy = 0, sxx = 0, syy = 0;
    for (std::size_t i = 0; i < xs.size(); ++i) {
        sxy += (xs[i] - mx) * (ys[i] - my);
        sxx += (xs[i] - mx) * (xs[i] - mx);
        syy += (ys[i] - my) * (ys[i] - my);
    }
    const double slope = sxy / sxx;
    const double r2 = syy > 0 ? sxy * sxy / (sxx * syy) : 1.0;
    o.detail << "hit 1e-10 at iteration " << run.records[*hit].iter << ", fit over " << xs.size()
             << " iterations: slope " << slope << " per iteration, R^2 " << r2;
    o.require(slope < 0.0, "decreasing fit");
    o.require(r2 >= 0.9, "R^2 >= 0.9");
    return o;
}

Outcome criterion5() {
    Outcome o;
    const auto start = Clock::now();
    Rng rng(2024);
    int bad_theta = 0, bad_identity = 0, bad_g = 0;
    double worst_identity = 0.0, worst_g = 0.0, worst_theta_gap = -INFINITY;
    for (int k = 0; k < 20; ++k) {
        const int n = 2 + static_cast<int>(rng.index(5));
        const int d = 1 + static_cast<int>(rng.index(3));
        const MixingMatrix w = metropolis_weights(gen_erdos_renyi(n, 0.5 + 0.5 * rng.uniform(), 1000 + k));
        const OracleParams p{0.1 + 4.9 * rng.uniform(), 0.05 + 0.9 * rng.uniform(), 1.0, 0.005 + rng.uniform()};
        const GlobalMatrices gm = build_matrices(w, d, p);
        const SpectralReport rep = check_spectra(gm, rate_constants(p, spectral_gap(w)));
        if (!rep.dense) ++bad_identity;
        if (!rep.theta_bound_holds()) ++bad_theta;
        if (!rep.identities_hold()) ++bad_identity;
        if (!rep.g_matches()) ++bad_g;
        worst_identity = std::max(worst_identity, rep.identity_error);
        worst_g = std::max(worst_g, std::abs(rep.lambda_min_g - rep.expected_min_g));
        worst_theta_gap = std::max(worst_theta_gap, rep.lambda_max_h - rep.theta);
    }
    const double secs = seconds_since(start);
    o.detail << "20 configurations: max(lambda_max(H) - theta) " << worst_theta_gap << ", identity error "
             << worst_identity << ", |lambda_min(G) - min(beta tau, (1-r)/beta)| " << worst_g << ", " << secs
             << " s";
    o.require(bad_theta == 0, "lambda_max(H) <= theta + 1e-8");
    o.require(bad_identity == 0, "H = S M^-1 and G = S + S^T - M^T S within 1e-10");
    o.require(bad_g == 0, "lambda_min(G) within 1e-10");
    o.require(secs <= 5.0, "runtime <= 5 s");
    return o;
}

Outcome criterion6() {
    Outcome o;
    int runs = 0;
    auto check = [&](const std::string& label, const RunResult& r, std::uint64_t rounds_per, std::uint64_t scalars_per) {
        ++runs;
        const std::uint64_t t = r.records.size();
        o.require(r.ledger.rounds_total() == rounds_per * t, label + " rounds");
        o.require(r.ledger.scalars_total() == scalars_per * t, label + " scalars");
        for (std::size_t k = 0; k < r.records.size(); ++k) {
            if (r.records[k].comm_rounds_cum != rounds_per * (k + 1) ||
                r.records[k].scalars_cum != scalars_per * (k + 1)) {
                o.require(false, label + " cumulative counters");
                break;
            }
        }
    };
    struct Case {
        std::string graph;
        int n;
        std::string problem;
        int iters;
    };
    const std::vector<Case> cases{{"erdos", 10, "lasso", 200}, {"ring", 7, "lasso", 57},
                                  {"complete", 5, "svm", 40}, {"erdos", 30, "svm", 25}};
    for (const Case& c : cases) {
        ExperimentConfig cfg;
        cfg.graph = c.graph;
        cfg.n_agents = c.n;
        cfg.problem = c.problem;
        cfg.synth.n_samples = 10 * c.n;
        cfg.synth.d = 6;
        cfg.cache_dir = "";
        const Setup s = build_setup(cfg);
        const std::uint64_t d = s.problem.d, e = s.mixing->graph().num_edges();
        // movement-based stop at tolerance 0: runs the full T iterations
        const StopRule stop{c.iters, 0.0, std::nullopt};
        for (const std::string alg : {"dsadmm", "pgextra", "nids"}) {
            RunResult r = alg == "dsadmm"
                              ? run_dsadmm(s.problem, *s.mixing, fixture_params(), stop)
                              : baseline_run(s.problem, *s.mixing,
                                             {0.5, alg == "nids" ? BaselineKind::Nids : BaselineKind::PgExtra}, stop);
            const std::string label = alg + "/" + c.graph + "/" + c.problem;
            o.require(r.records.size() == static_cast<std::size_t>(c.iters), label + " ran T iterations");
            if (alg == "dsadmm") check(label, r, 2, 8 * d * e);
            else check(label, r, 1, 2 * d * e);
        }
    }
    o.detail << runs << " runs, integer equality of rounds and scalars against the closed forms";
    return o;
}

Outcome criterion7() {
    Outcome o;
    int graphs = 0, failures = 0;
    double worst_row = 0.0, min_gap = INFINITY;
    for (double p : {0.2, 0.5}) {
        for (std::uint64_t seed = 0; seed < 50; ++seed) {
            ++graphs;
            const MixingMatrix w = metropolis_weights(gen_erdos_renyi(30, p, seed));
            const Matrix& m = w.weights();
            bool ok = true;
            for (int i = 0; i < 30; ++i) {
                worst_row = std::max(worst_row, std::abs(m.row(i).sum() - 1.0));
                if (std::abs(m.row(i).sum() - 1.0) > 1e-12) ok = false;
                if (!(m(i, i) > 0.0)) ok = false;
                for (int j = 0; j < 30; ++j) {
                    if (m(i, j) != m(j, i)) ok = false;
                    if (i != j && (m(i, j) > 0.0) != w.graph().has_edge(i, j)) ok = false;
                    if (i != j && m(i, j) < 0.0) ok = false;
                }
            }
            const double gap = spectral_gap(w);
            min_gap = std::min(min_gap, gap);
            if (!(gap > 0.0)) ok = false;
            if (!ok) ++failures;
        }
    }
    const double ring_gap = spectral_gap(metropolis_weights(gen_ring(4)));
    o.detail << graphs << " graphs, " << failures << " failing, max row-sum error " << worst_row
             << ", min gap " << min_gap << ", ring(4) gap " << ring_gap;
    o.require(graphs == 100 && failures == 0, "all invariants on every graph");
    o.require(std::abs(ring_gap - 2.0 / 3.0) <= 1e-12, "ring(4) gap = 2/3");
    return o;
}

Outcome criterion8() {
    Outcome o;
    Rng rng(88);
    const int d = 5;
    Matrix a(8, d);
    for (int i = 0; i < 8; ++i)
        for (int j = 0; j < d; ++j) a(i, j) = rng.normal();
    Vector b(8);
    for (int i = 0; i < 8; ++i) b(i) = rng.normal();
    std::vector<std::pair<std::string, std::shared_ptr<ProxFn>>> closed{
        {"l1", std::make_shared<L1Norm>(0.6)},
        {"sq_l2", std::make_shared<SquaredL2>(1.7)},
        {"elastic_net", std::make_shared<ElasticNet>(0.3, 0.8)},
        {"quadratic", std::make_shared<QuadraticLoss>(SparseRowMatrix(a.sparseView()), b, 0.25)}};

    double worst_opt = 0.0;
    int opt_fail = 0;
    for (int k = 0; k < 1000; ++k) {
        Vector v(d);
        for (int j = 0; j < d; ++j) v(j) = 3.0 * rng.normal();
        const double step = std::exp(1.5 * rng.normal());
        for (const auto& [name, h] : closed) {
            const Vector x = h->prox(v, step);
            const double dist = h->subdiff_dist(x, (v - x) / step);
            worst_opt = std::max(worst_opt, dist);
            if (dist > 1e-8) ++opt_fail;
        }
    }

    // hinge sum in one dimension against a grid on [-10, 10] at 1e-4
    Matrix rows(4, 1);
    rows << 1.0, -0.7, 2.0, 0.4;
    Vector labels(4);
    labels << 1, 1, -1, -1;
    HingeSum hinge(rows, labels, 0.8);
    double worst_grid = 0.0;
    for (double v : {-5.0, -1.3, -0.2, 0.0, 0.45, 1.0, 2.2, 6.0}) {
        for (double step : {0.3, 1.0, 2.5}) {
            Vector vv(1);
            vv << v;
            const double x = hinge.prox(vv, step)(0);
            double best_x = -10.0, best = INFINITY;
            Vector g(1);
            for (long i = 0; i <= 200000; ++i) {
                g(0) = -10.0 + i * 1e-4;
                const double val = hinge.evaluate(g) + (g(0) - v) * (g(0) - v) / (2 * step);
                if (val < best) {
                    best = val;
                    best_x = g(0);
                }
            }
            worst_grid = std::max(worst_grid, std::abs(x - best_x));
        }
    }

    Matrix hrows(10, d);
    for (int i = 0; i < 10; ++i)
        for (int j = 0; j < d; ++j) hrows(i, j) = rng.normal();
    Vector hl(10);
    for (int i = 0; i < 10; ++i) hl(i) = rng.uniform() < 0.5 ? -1.0 : 1.0;
    closed.emplace_back("hinge", std::make_shared<HingeSum>(hrows, hl, 0.3, 1e-12));
    double worst_firm = -INFINITY;
    int firm_fail = 0;
    for (int k = 0; k < 100; ++k) {
        Vector u(d), v(d);
        for (int j = 0; j < d; ++j) {
            u(j) = 2.0 * rng.normal();
            v(j) = 2.0 * rng.normal();
        }
        for (const auto& [name, h] : closed) {
            const Vector pu = h->prox(u, 0.7), pv = h->prox(v, 0.7);
            const double excess = (pu - pv).squaredNorm() - (pu - pv).dot(u - v);
            worst_firm = std::max(worst_firm, excess);
            if (excess > 1e-9 || (pu - pv).norm() > (u - v).norm() + 1e-9) ++firm_fail;
        }
    }
    o.detail << "optimality worst " << worst_opt << " over 4000 evaluations, hinge grid error " << worst_grid
             << ", firm nonexpansiveness worst excess " << worst_firm;
    o.require(opt_fail == 0, "subgradient optimality <= 1e-8");
    o.require(worst_grid <= 2e-4, "hinge prox within 2e-4 of the grid oracle");
    o.require(firm_fail == 0, "firm nonexpansiveness on 100 pairs");
    return o;
}

// Tuned comparison runs behind criteria 9 and 10.
struct Tuned {
    std::string problem;
    double p = 0.0;
    std::string algorithm;
    SweepResult sweep;
};

ExperimentConfig comparison_config(const std::string& problem, double p) {
    ExperimentConfig cfg;
    cfg.problem = problem;
    cfg.n_agents = 30;
    cfg.graph = "erdos";
    cfg.p = p;
    cfg.seed = 42;
    cfg.synth.d = 20;
    if (problem == "lasso") {
        cfg.synth.n_samples = 900;
        cfg.synth.correlation = 0.6;
    } else {
        cfg.synth.n_samples = 300;
        cfg.synth.correlation = 0.0;
    }
    cfg.cache_dir = "";
    cfg.max_iters = 5000;
    cfg.sweep_target = 1e-6;
    cfg.sweep_patience = 13;
    cfg.kkt = false;
    return cfg;
}

RunResult comparison_run(const ExperimentConfig& base, const Setup& s, const std::string& alg, double value, int cap) {
    ExperimentConfig cfg = base;
    cfg.algorithm = alg;
    cfg.max_iters = cap;
    cfg.tol = cfg.sweep_target;
    if (alg == "dsadmm") cfg.beta = value;
    else cfg.step = value;
    return run_algorithm(cfg, s);
}

struct ComparisonData {
    std::vector<Tuned> tuned;
    std::vector<std::pair<std::string, RunResult>> best_runs;
    std::map<std::string, std::shared_ptr<Setup>> setups;
    double seconds = 0.0;
};

const ComparisonData& comparisons() {
    static const ComparisonData data = [] {
        ComparisonData out;
        const auto start = Clock::now();
        for (const std::string problem : {"lasso", "svm"}) {
            for (double p : {0.5, 0.2}) {
                const ExperimentConfig cfg = comparison_config(problem, p);
                auto setup = std::make_shared<Setup>(build_setup(cfg));
                for (const std::string alg : {"dsadmm", "pgextra", "nids"}) {
                    SweepRunner runner = [&](double value, int cap) {
                        return comparison_run(cfg, *setup, alg, value, cap);
                    };
                    Tuned t{problem, p, alg, tune(log_grid(), runner, cfg.sweep_target, cfg.max_iters, cfg.sweep_patience)};
                    // the tuned point is re-run under the default stop rule, past the 1e-6 target
                    if (t.sweep.best) {
                        ExperimentConfig full = cfg;
                        full.tol = ExperimentConfig{}.tol;
                        full.max_iters = 4 * cfg.max_iters;
                        full.sweep_target = full.tol;
                        out.best_runs.emplace_back(problem + "/p=" + std::to_string(p).substr(0, 3) + "/" + alg,
                                                   comparison_run(full, *setup, alg, *t.sweep.best, full.max_iters));
                    }
                    out.tuned.push_back(std::move(t));
                }
                out.setups[problem + std::to_string(p)] = setup;
            }
        }
        out.seconds = seconds_since(start);
        return out;
    }();
    return data;
}

const Tuned* find_tuned(const ComparisonData& c, const std::string& problem, double p, const std::string& alg) {
    for (const Tuned& t : c.tuned)
        if (t.problem == problem && t.p == p && t.algorithm == alg) return &t;
    return nullptr;
}

Outcome criterion9() {
    Outcome o;
    const ComparisonData& c = comparisons();
    o.detail << "synthetic data (public sets not present); tuned iterations/scalars to 1e-6:";
    for (const std::string problem : {"lasso", "svm"}) {
        for (double p : {0.5, 0.2}) {
            o.detail << " " << problem << "@p=" << p << " {";
            for (const std::string alg : {"dsadmm", "pgextra", "nids"}) {
                const Tuned* t = find_tuned(c, problem, p, alg);
                o.detail << " " << alg << " ";
                if (t && t->sweep.best) o.detail << *t->sweep.best_iters << "/" << t->sweep.best_scalars;
                else o.detail << "none";
            }
            o.detail << " }";
        }
        const Tuned* ds = find_tuned(c, problem, 0.5, "dsadmm");
        o.require(ds && ds->sweep.best, problem + " DS-ADMM reaches 1e-6");
        for (const std::string alg : {"pgextra", "nids"}) {
            const Tuned* other = find_tuned(c, problem, 0.5, alg);
            if (!ds || !ds->sweep.best) break;
            // a baseline that never reaches the target loses on both counts
            if (!other || !other->sweep.best) continue;
            o.require(*ds->sweep.best_iters < *other->sweep.best_iters, problem + " fewer iterations than " + alg);
            o.require(ds->sweep.best_scalars < other->sweep.best_scalars, problem + " fewer scalars than " + alg);
        }
        for (const std::string alg : {"dsadmm", "pgextra", "nids"}) {
            const Tuned* dense = find_tuned(c, problem, 0.5, alg);
            const Tuned* sparse = find_tuned(c, problem, 0.2, alg);
            if (!dense || !dense->sweep.best) continue;
            const bool slower = !sparse->sweep.best || *sparse->sweep.best_iters > *dense->sweep.best_iters;
            o.require(slower, problem + " " + alg + " needs more iterations at p = 0.2");
        }
    }
    for (const auto& [label, run] : c.best_runs) {
        const auto hit = first_reaching(run.records, 1e-6);
        bool same = false;
        for (const Tuned& t : c.tuned)
            if (label.find("/" + t.algorithm) != std::string::npos && label.rfind(t.problem, 0) == 0 &&
                label.find(t.p == 0.5 ? "p=0.5" : "p=0.2") != std::string::npos)
                same = hit && t.sweep.best_iters && static_cast<int>(*hit) + 1 == *t.sweep.best_iters;
        o.require(same, label + " re-run reaches 1e-6 at the tuned iteration");
    }
    o.detail << "; " << c.seconds << " s";
    o.require(c.seconds <= 300.0, "runtime <= 5 min");
    return o;
}

Outcome criterion10() {
    Outcome o;
    struct Item {
        std::string label;
        RunResult run;
        const MixingMatrix* w;
        int d;
    };
    std::vector<Item> items;
    const Setup& fx = lasso_fixture();
    items.push_back({"fixture 500-iteration run", run_500().run, fx.mixing.get(), fx.problem.d});
    items.push_back({"linear-rate run", linear_rate_run(), fx.mixing.get(), fx.problem.d});
    {
        ExperimentConfig cfg = lasso_fixture_config();
        cfg.verify = true;
        cfg.max_iters = 2000;
        RunResult r;
        verify_run(cfg, fx, &r);
        items.push_back({"verify run", std::move(r), fx.mixing.get(), fx.problem.d});
    }
    const ComparisonData& c = comparisons();
    for (const auto& [label, run] : c.best_runs) {
        const std::string problem = label.substr(0, label.find('/'));
        const double p = label.find("p=0.5") != std::string::npos ? 0.5 : 0.2;
        const Setup& s = *c.setups.at(problem + std::to_string(p));
        items.push_back({label, run, s.mixing.get(), s.problem.d});
    }

    double worst_consensus = 0.0, worst_constraint = 0.0;
    std::string worst_label;
    for (const Item& it : items) {
        if (it.run.records.empty()) {
            o.require(false, it.label + " has no iterations");
            continue;
        }
        const GlobalMatrices gm = build_matrices(*it.w, it.d, {}, 0);
        const double consensus = it.run.records.back().consensus_err;
        const double constraint = constraint_residual(it.run.final_iterate, gm);
        if (std::max(consensus, constraint) > std::max(worst_consensus, worst_constraint)) worst_label = it.label;
        worst_consensus = std::max(worst_consensus, consensus);
        worst_constraint = std::max(worst_constraint, constraint);
        o.require(consensus <= 1e-6, it.label + " consensus " + std::to_string(consensus));
        o.require(constraint <= 1e-6, it.label + " ||Au - Bv|| " + std::to_string(constraint));
    }
    o.detail << items.size() << " runs, max consensus error " << worst_consensus << ", max ||Au - Bv|| "
             << worst_constraint << " (" << worst_label << ")";
    return o;
}

const std::vector<std::pair<std::string, std::function<Outcome()>>>& registry() {
    static const std::vector<std::pair<std::string, std::function<Outcome()>>> r{
        {"oracle equivalence", criterion1},
        {"contraction inequality", criterion2},
        {"sublinear bound", criterion3},
        {"linear convergence", criterion4},
        {"H and G eigenvalue checks", criterion5},
        {"communication accounting", criterion6},
        {"mixing-matrix suite", criterion7},
        {"prox suite", criterion8},
        {"tuned comparison and sparse-graph slowdown", criterion9},
        {"consensus at the final iterate", criterion10}};
    return r;
}

}  // namespace

int main(int argc, char** argv) {
    std::vector<int> selected;
    for (int i = 1; i < argc; ++i) {
        const std::string arg = argv[i];
        if (arg == "--criterion" && i + 1 < argc) {
            selected.push_back(std::atoi(argv[++i]));
        } else {
            std::cerr << "usage: acceptance [--criterion N]...\n";
            return 64;
        }
    }
    const auto& reg = registry();
    if (selected.empty())
        for (std::size_t k = 1; k <= reg.size(); ++k) selected.push_back(static_cast<int>(k));

    bool all = true;
    for (int k : selected) {
        if (k < 1 || k > static_cast<int>(reg.size())) {
            std::cerr << "no criterion " << k << "\n";
            return 64;
        }
        const auto& [name, fn] = reg[k - 1];
        Outcome o;
        try {
            o = fn();
        } catch (const std::exception& e) {
            o.pass = false;
            o.detail << " [exception: " << e.what() << "]";
        }
        all = all && o.pass;
        std::cout << (o.pass ? "PASS" : "FAIL") << " criterion " << k << " (" << name << "): " << o.detail.str()
                  << std::endl;
    }
    return all ? 0 : 1;
}
