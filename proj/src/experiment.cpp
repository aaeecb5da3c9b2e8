#include "dsadmm/experiment.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <ostream>
#include <sstream>

namespace dsadmm {

namespace {

std::string trim(const std::string& s) {
    const auto first = s.find_first_not_of(" \t\r");
    if (first == std::string::npos) return "";
    const auto last = s.find_last_not_of(" \t\r");
    return s.substr(first, last - first + 1);
}

[[noreturn]] void bad_value(const std::string& key, const std::string& value, const std::string& expected) {
    throw ConfigError("field '" + key + "': expected " + expected + ", got '" + value + "'");
}

double to_double(const std::string& key, const std::string& value) {
    double out = 0.0;
    const char* end = value.data() + value.size();
    auto [ptr, ec] = std::from_chars(value.data(), end, out);
    if (ec != std::errc() || ptr != end || !std::isfinite(out)) bad_value(key, value, "a number");
    return out;
}

long long to_integer(const std::string& key, const std::string& value) {
    long long out = 0;
    const char* end = value.data() + value.size();
    auto [ptr, ec] = std::from_chars(value.data(), end, out);
    if (ec != std::errc() || ptr != end) bad_value(key, value, "an integer");
    return out;
}

int to_int(const std::string& key, const std::string& value) {
    const long long v = to_integer(key, value);
    if (v < -2147483647LL || v > 2147483647LL) bad_value(key, value, "an integer in range");
    return static_cast<int>(v);
}

std::uint64_t to_u64(const std::string& key, const std::string& value) {
    std::uint64_t out = 0;
    const char* end = value.data() + value.size();
    auto [ptr, ec] = std::from_chars(value.data(), end, out);
    if (ec != std::errc() || ptr != end) bad_value(key, value, "a nonnegative integer");
    return out;
}

bool to_bool(const std::string& key, const std::string& value) {
    std::string v = value;
    std::transform(v.begin(), v.end(), v.begin(), [](unsigned char c) { return std::tolower(c); });
    if (v == "true" || v == "1" || v == "yes" || v == "on") return true;
    if (v == "false" || v == "0" || v == "no" || v == "off") return false;
    bad_value(key, value, "true or false");
}

void require(bool ok, const std::string& key, const std::string& message) {
    if (!ok) throw ConfigError("field '" + key + "': " + message);
}

bool one_of(const std::string& v, std::initializer_list<const char*> options) {
    return std::any_of(options.begin(), options.end(), [&](const char* o) { return v == o; });
}

DsAdmmParams admm_params(const ExperimentConfig& cfg) {
    DsAdmmParams p;
    p.beta = cfg.beta;
    p.r = cfg.r;
    p.tau = cfg.tau;
    return p;
}

StopRule stop_rule(const ExperimentConfig& cfg, const Setup& setup) {
    StopRule stop;
    stop.max_iters = cfg.max_iters;
    stop.tol = cfg.tol;
    stop.f_star = setup.reference.objective;
    return stop;
}

std::filesystem::path sibling(const std::string& output, const std::string& suffix) {
    std::filesystem::path p(output);
    return p.replace_extension(suffix);
}

void ensure_parent(const std::filesystem::path& path) {
    if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
}

}  // namespace

void set_field(ExperimentConfig& cfg, const std::string& key, const std::string& raw) {
    const std::string value = trim(raw);
    if (key == "problem") cfg.problem = value;
    else if (key == "dataset") cfg.dataset = value.empty() ? std::nullopt : std::optional<std::string>(value);
    else if (key == "normalize") cfg.normalize = to_bool(key, value);
    else if (key == "n_samples") cfg.synth.n_samples = to_int(key, value);
    else if (key == "d") cfg.synth.d = to_int(key, value);
    else if (key == "data_seed") cfg.synth.seed = to_u64(key, value);
    else if (key == "noise") cfg.synth.noise = to_double(key, value);
    else if (key == "correlation") cfg.synth.correlation = to_double(key, value);
    else if (key == "lambda") cfg.lambda = value.empty() ? std::nullopt : std::optional<double>(to_double(key, value));
    else if (key == "n_agents") cfg.n_agents = to_int(key, value);
    else if (key == "graph") cfg.graph = value;
    else if (key == "p") cfg.p = to_double(key, value);
    else if (key == "seed") cfg.seed = to_u64(key, value);
    else if (key == "algorithm") cfg.algorithm = value;
    else if (key == "beta") cfg.beta = to_double(key, value);
    else if (key == "r") cfg.r = to_double(key, value);
    else if (key == "tau") cfg.tau = to_double(key, value);
    else if (key == "step") cfg.step = to_double(key, value);
    else if (key == "max_iters") cfg.max_iters = to_int(key, value);
    else if (key == "tol") cfg.tol = to_double(key, value);
    else if (key == "kkt") cfg.kkt = to_bool(key, value);
    else if (key == "verify") cfg.verify = to_bool(key, value);
    else if (key == "output") cfg.output = value;
    else if (key == "cache_dir") cfg.cache_dir = value;
    else if (key == "sweep_target") cfg.sweep_target = to_double(key, value);
    else if (key == "verify_tol")
        cfg.verify_tol = value.empty() ? std::nullopt : std::optional<double>(to_double(key, value));
    else if (key == "sweep_patience")
        cfg.sweep_patience = value.empty() ? std::nullopt : std::optional<int>(to_int(key, value));
    else throw ConfigError("unknown field '" + key + "'");
}

void ExperimentConfig::validate() const {
    require(one_of(problem, {"lasso", "svm"}), "problem", "must be lasso or svm");
    require(one_of(algorithm, {"dsadmm", "pgextra", "nids"}), "algorithm", "must be dsadmm, pgextra or nids");
    require(one_of(graph, {"ring", "complete", "erdos"}), "graph", "must be ring, complete or erdos");
    require(n_agents >= 1, "n_agents", "must be at least 1");
    if (graph == "ring") require(n_agents >= 3, "n_agents", "a ring needs at least 3 agents");
    if (graph != "ring" && n_agents == 1) require(graph == "complete", "graph", "a single agent needs graph = complete");
    require(p > 0.0 && p <= 1.0, "p", "must lie in (0, 1]");
    require(beta > 0.0, "beta", "must be positive");
    require(r > 0.0 && r <= 1.0, "r", "must lie in (0, 1]");
    require(tau > 0.0, "tau", "must be positive");
    require(step > 0.0, "step", "must be positive");
    require(max_iters >= 0, "max_iters", "must be nonnegative");
    require(tol > 0.0, "tol", "must be positive");
    require(!lambda || *lambda > 0.0, "lambda", "must be positive");
    if (!dataset) {
        require(synth.d >= 1, "d", "must be at least 1");
        require(synth.n_samples >= n_agents, "n_samples", "must be at least n_agents");
        require(synth.noise >= 0.0, "noise", "must be nonnegative");
        require(synth.correlation >= 0.0 && synth.correlation < 1.0, "correlation", "must lie in [0, 1)");
    }
    require(!output.empty(), "output", "must not be empty");
    require(sweep_target > 0.0, "sweep_target", "must be positive");
    require(!verify_tol || *verify_tol > 0.0, "verify_tol", "must be positive");
    require(!sweep_patience || *sweep_patience >= 1, "sweep_patience", "must be at least 1");
    if (verify) {
        require(algorithm == "dsadmm", "verify", "verification applies to algorithm = dsadmm only");
        require(r < 1.0, "verify", "the verified bounds need r < 1");
    }
}

ExperimentConfig parse_config(std::istream& in) {
    ExperimentConfig cfg;
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        const auto hash = line.find('#');
        if (hash != std::string::npos) line.erase(hash);
        line = trim(line);
        if (line.empty()) continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos)
            throw ConfigError("line " + std::to_string(lineno) + ": expected 'key = value'");
        const std::string key = trim(line.substr(0, eq));
        try {
            set_field(cfg, key, line.substr(eq + 1));
        } catch (const ConfigError& e) {
            throw ConfigError("line " + std::to_string(lineno) + ": " + e.what());
        }
    }
    return cfg;
}

ExperimentConfig load_config(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config file " + path.string());
    return parse_config(in);
}

Setup build_setup(const ExperimentConfig& cfg) {
    cfg.validate();
    Setup s;
    const bool svm = cfg.problem == "svm";
    if (cfg.dataset) {
        if (!std::filesystem::exists(*cfg.dataset))
            throw ConfigError("field 'dataset': file not found: " + *cfg.dataset);
        try {
            s.data = parse_libsvm(std::filesystem::path(*cfg.dataset), svm);
        } catch (const ParseError& e) {
            throw ConfigError("field 'dataset': " + std::string(e.what()));
        }
        if (cfg.normalize) normalize_max_abs(s.data);
        if (static_cast<int>(s.data.size()) < cfg.n_agents)
            throw ConfigError("field 'dataset': fewer samples than agents");
    } else {
        s.data = svm ? synth_svm(cfg.synth) : synth_lasso(cfg.synth).data;
    }

    std::optional<Graph> graph;
    try {
        if (cfg.graph == "ring") graph = gen_ring(cfg.n_agents);
        else if (cfg.graph == "complete") graph = cfg.n_agents == 1 ? Graph(1, {}) : gen_complete(cfg.n_agents);
        else graph = gen_erdos_renyi(cfg.n_agents, cfg.p, cfg.seed);
    } catch (const std::invalid_argument& e) {
        throw ConfigError("field 'graph': " + std::string(e.what()));
    }
    s.mixing = std::make_unique<MixingMatrix>(metropolis_weights(*graph));

    s.problem = svm ? make_svm(s.data, cfg.n_agents, cfg.lambda, cfg.seed)
                    : make_lasso(s.data, cfg.n_agents, cfg.lambda, cfg.seed);
    s.reference = cfg.cache_dir.empty() ? reference_solution(s.problem)
                                        : cached_reference(s.problem, cfg.cache_dir);
    return s;
}

VerificationReport verify_run(const ExperimentConfig& cfg, const Setup& setup, RunResult* result) {
    const DsAdmmParams params = admm_params(cfg);
    LockstepVerifier verifier(setup.problem, *setup.mixing, params);
    const bool kkt = cfg.kkt;
    IterationObserver observer = [&](int, const DsAdmmNetwork& net) -> std::optional<double> {
        const double residual = verifier.observe(net);
        if (kkt) return residual;
        return std::nullopt;
    };
    RunResult run = run_dsadmm(setup.problem, *setup.mixing, params, stop_rule(cfg, setup), observer);

    // Limit point: ten times as many iterations, or until the iterate stops
    // moving at double precision.
    DsAdmmNetwork limit(setup.problem, *setup.mixing, params);
    const int horizon = 10 * std::max<int>(1, static_cast<int>(run.records.size()));
    Vector prev = limit.stacked().stacked();
    for (int t = 0; t < horizon; ++t) {
        limit.step();
        Vector cur = limit.stacked().stacked();
        const double moved = (cur - prev).norm();
        prev = std::move(cur);
        if (moved <= 1e-15 * std::max(1.0, prev.norm())) break;
    }
    const GlobalIterate w_ref = limit.stacked();

    const GlobalMatrices& gm = verifier.matrices();
    VerificationReport rep;
    rep.rates = rate_constants(gm.params, spectral_gap(*setup.mixing));
    rep.spectra = check_spectra(gm, rep.rates);
    rep.max_oracle_deviation = verifier.max_deviation();
    rep.deviation_tolerance = cfg.verify_tol ? *cfg.verify_tol
                              : setup.problem.kind == ProblemKind::Svm ? 1e-6
                                                                       : 1e-9;
    rep.contraction = check_contraction(verifier.trajectory(), gm, w_ref);
    rep.ergodic_bound = check_ergodic_bound(verifier.trajectory(), gm);
    if (!run.records.empty()) {
        rep.final_consensus = run.records.back().consensus_err;
        rep.final_constraint = constraint_residual(verifier.trajectory().back(), gm);
    }
    if (result) *result = std::move(run);
    return rep;
}

RunResult run_algorithm(const ExperimentConfig& cfg, const Setup& setup,
                        std::optional<VerificationReport>* verification) {
    cfg.validate();
    if (cfg.algorithm == "dsadmm") {
        if (cfg.verify) {
            RunResult run;
            VerificationReport rep = verify_run(cfg, setup, &run);
            if (verification) *verification = std::move(rep);
            return run;
        }
        IterationObserver observer;
        std::optional<GlobalMatrices> gm;
        if (cfg.kkt) {
            gm = build_matrices(*setup.mixing, setup.problem.d, OracleParams::from(admm_params(cfg)), 0);
            observer = [&](int, const DsAdmmNetwork& net) -> std::optional<double> {
                return kkt_residual(net.stacked(), *gm, setup.problem);
            };
        }
        return run_dsadmm(setup.problem, *setup.mixing, admm_params(cfg), stop_rule(cfg, setup), observer);
    }
    BaselineParams bp;
    bp.step = cfg.step;
    bp.algorithm = cfg.algorithm == "pgextra" ? BaselineKind::PgExtra : BaselineKind::Nids;
    return baseline_run(setup.problem, *setup.mixing, bp, stop_rule(cfg, setup));
}

void ExperimentSummary::write(std::ostream& out) const {
    const auto flags = out.flags();
    out << std::setprecision(10);
    out << "algorithm: " << algorithm << "\n";
    out << "status: " << to_string(status) << "\n";
    out << "iterations: " << iterations << "\n";
    out << "final objective: " << final_objective << "\n";
    out << "final suboptimality: " << final_suboptimality << "\n";
    out << "communication rounds: " << rounds << "\n";
    out << "transmitted scalars: " << scalars << "\n";
    if (verification) out << "verification: " << (verification->passed() ? "passed" : "failed") << "\n";
    out.flags(flags);
}

ExperimentSummary run_experiment(const ExperimentConfig& cfg, std::ostream& log) {
    const Setup setup = build_setup(cfg);
    log << "problem " << cfg.problem << ": m = " << setup.data.size() << ", d = " << setup.problem.d
        << ", n = " << setup.problem.n << ", |E| = " << setup.mixing->graph().num_edges()
        << ", F* = " << std::setprecision(15) << setup.reference.objective << "\n";

    std::optional<VerificationReport> verification;
    const RunResult run = run_algorithm(cfg, setup, &verification);

    ExperimentSummary summary;
    summary.algorithm = cfg.algorithm;
    summary.status = run.status;
    summary.iterations = static_cast<int>(run.records.size());
    summary.rounds = run.ledger.rounds_total();
    summary.scalars = run.ledger.scalars_total();
    if (!run.records.empty()) {
        summary.final_objective = run.records.back().objective;
        summary.final_suboptimality = run.records.back().suboptimality.value_or(NAN);
    } else {
        summary.final_objective = setup.problem.objective(Vector::Zero(setup.problem.d));
        summary.final_suboptimality = summary.final_objective - setup.reference.objective;
    }
    summary.verification = verification;

    const std::filesystem::path out_path(cfg.output);
    ensure_parent(out_path);
    write_trajectory_csv(out_path, run.records);
    {
        std::ofstream out(sibling(cfg.output, ".summary.txt"));
        summary.write(out);
    }
    if (verification) {
        std::ofstream text(sibling(cfg.output, ".verify.txt"));
        verification->write_text(text);
        std::ofstream csv(sibling(cfg.output, ".verify.csv"));
        verification->write_csv(csv);
        verification->write_text(log);
    }
    summary.write(log);
    return summary;
}

SweepResult run_sweep(const ExperimentConfig& cfg, std::ostream& log) {
    const Setup setup = build_setup(cfg);
    const bool admm = cfg.algorithm == "dsadmm";
    SweepRunner runner = [&](double value, int cap) {
        StopRule stop;
        stop.max_iters = cap;
        stop.tol = cfg.sweep_target;
        stop.f_star = setup.reference.objective;
        if (admm) {
            DsAdmmParams p = admm_params(cfg);
            p.beta = value;
            return run_dsadmm(setup.problem, *setup.mixing, p, stop);
        }
        BaselineParams bp;
        bp.step = value;
        bp.algorithm = cfg.algorithm == "pgextra" ? BaselineKind::PgExtra : BaselineKind::Nids;
        return baseline_run(setup.problem, *setup.mixing, bp, stop);
    };
    const SweepResult result = tune(log_grid(), runner, cfg.sweep_target, cfg.max_iters, cfg.sweep_patience);

    const std::filesystem::path out_path(cfg.output);
    ensure_parent(out_path);
    std::ofstream out(out_path);
    out << "value,status,iterations,iters_to_target,scalars_to_target\n" << std::setprecision(17);
    for (const SweepPoint& pt : result.points) {
        out << pt.value << ',' << to_string(pt.status) << ',' << pt.iterations << ',';
        if (pt.iters_to_target) out << *pt.iters_to_target << ',' << pt.scalars_to_target;
        else out << ',';
        out << '\n';
    }
    const char* name = admm ? "beta" : "step";
    if (result.best)
        log << "best " << name << " = " << std::setprecision(6) << *result.best << ": " << *result.best_iters
            << " iterations, " << result.best_scalars << " scalars to suboptimality " << cfg.sweep_target << "\n";
    else
        log << "no " << name << " on the grid reached suboptimality " << cfg.sweep_target << "\n";
    return result;
}

}  // namespace dsadmm
