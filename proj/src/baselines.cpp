#include "dsadmm/baselines.hpp"

#include <chrono>
#include <cmath>
#include <stdexcept>

namespace dsadmm {

std::string to_string(BaselineKind kind) { return kind == BaselineKind::PgExtra ? "pgextra" : "nids"; }

void BaselineParams::validate() const {
    if (!(step > 0.0)) throw std::invalid_argument("baseline: step must be positive");
}

namespace {

constexpr double kDivergence = 1e12;

// Columns of d x n matrices are agent iterates.
class Splitting {
public:
    Splitting(const CompositeProblem& p, const MixingMatrix& w) : problem_(p), w_(w) {
        if (p.n != w.size()) throw std::invalid_argument("baseline: problem.n != mixing matrix size");
        for (int i = 0; i < p.n; ++i) {
            if (p.f[i]->smooth()) {
                smooth_.push_back(p.f[i]);
                prox_.push_back(p.g[i]);
            } else if (p.g[i]->smooth()) {
                smooth_.push_back(p.g[i]);
                prox_.push_back(p.f[i]);
            } else {
                throw std::invalid_argument("baseline: agent has no smooth component");
            }
        }
        scalars_per_round_ = 2 * static_cast<std::uint64_t>(p.d) * w.graph().num_edges();
    }

    Matrix gradient(const Matrix& x) const {
        Matrix out(x.rows(), x.cols());
        for (int i = 0; i < problem_.n; ++i) out.col(i) = smooth_[i]->gradient(x.col(i));
        return out;
    }

    Matrix prox(const Matrix& x, double step) const {
        Matrix out(x.rows(), x.cols());
        for (int i = 0; i < problem_.n; ++i) out.col(i) = prox_[i]->prox(x.col(i), step);
        return out;
    }

    // One communication round: every agent sends its column to its
    // neighbors and mixes with W.
    Matrix mix(const Matrix& x, CommLedger& ledger) const {
        ledger.record_round(scalars_per_round_);
        return x * w_.weights();
    }

    const CompositeProblem& problem() const { return problem_; }

private:
    const CompositeProblem& problem_;
    const MixingMatrix& w_;
    std::vector<ProxPtr> smooth_;
    std::vector<ProxPtr> prox_;
    std::uint64_t scalars_per_round_ = 0;
};

// Appends the metrics row and decides whether to stop.
class Recorder {
public:
    Recorder(const CompositeProblem& p, const StopRule& stop) : problem_(p), stop_(stop), start_(Clock::now()) {}

    bool record(int t, const Matrix& x, const Matrix& prev, const CommLedger& ledger, RunResult& result) {
        IterateRecord rec;
        rec.iter = t;
        rec.comm_rounds_cum = ledger.rounds_total();
        rec.scalars_cum = ledger.scalars_total();
        const Vector avg = x.rowwise().mean();
        result.average = avg;
        const Vector flat = x.reshaped();
        result.final_iterate = {flat, flat, Vector::Zero(flat.size()), Vector::Zero(flat.size())};
        const double norm = x.norm();
        if (!std::isfinite(norm) || norm > kDivergence) {
            rec.objective = problem_.objective(avg);
            rec.consensus_err = INFINITY;
            rec.wall_ms = elapsed();
            result.records.push_back(rec);
            result.status = RunStatus::Diverged;
            return true;
        }
        rec.objective = problem_.objective(avg);
        if (stop_.f_star) rec.suboptimality = rec.objective - *stop_.f_star;
        rec.consensus_err = (x.colwise() - avg).colwise().norm().maxCoeff();
        rec.wall_ms = elapsed();
        result.records.push_back(rec);
        if (!std::isfinite(rec.objective)) {
            result.status = RunStatus::Diverged;
            return true;
        }
        const bool done = stop_.f_star ? *rec.suboptimality <= stop_.tol : (x - prev).norm() <= stop_.tol;
        if (done) result.status = RunStatus::Converged;
        return done;
    }

private:
    using Clock = std::chrono::steady_clock;
    double elapsed() const { return std::chrono::duration<double, std::milli>(Clock::now() - start_).count(); }

    const CompositeProblem& problem_;
    const StopRule& stop_;
    Clock::time_point start_;
};

void begin(CommLedger& ledger) { ledger.begin_iteration(); }

}  // namespace

RunResult pg_extra_run(const CompositeProblem& problem, const MixingMatrix& w, double step, const StopRule& stop) {
    BaselineParams{step, BaselineKind::PgExtra}.validate();
    Splitting sp(problem, w);
    Recorder rec(problem, stop);
    RunResult result;
    const int d = problem.d;
    const int n = problem.n;
    Matrix x_prev = Matrix::Zero(d, n);
    result.average = Vector::Zero(d);
    result.final_iterate = GlobalIterate::zeros(n, d);
    if (stop.max_iters <= 0) return result;

    // Iteration 1: x1 = prox(W x0 - a grad(x0)).
    begin(result.ledger);
    Matrix wx_prev = sp.mix(x_prev, result.ledger);
    Matrix grad_prev = sp.gradient(x_prev);
    Matrix half = wx_prev - step * grad_prev;
    Matrix x = sp.prox(half, step);
    if (rec.record(1, x, x_prev, result.ledger, result)) return result;

    for (int t = 2; t <= stop.max_iters; ++t) {
        begin(result.ledger);
        const Matrix wx = sp.mix(x, result.ledger);
        const Matrix grad = sp.gradient(x);
        half = wx + half - 0.5 * (x_prev + wx_prev) - step * (grad - grad_prev);
        Matrix x_next = sp.prox(half, step);
        x_prev = std::move(x);
        x = std::move(x_next);
        wx_prev = wx;
        grad_prev = grad;
        if (rec.record(t, x, x_prev, result.ledger, result)) break;
    }
    return result;
}

RunResult nids_run(const CompositeProblem& problem, const MixingMatrix& w, double step, const StopRule& stop) {
    BaselineParams{step, BaselineKind::Nids}.validate();
    Splitting sp(problem, w);
    Recorder rec(problem, stop);
    RunResult result;
    const int d = problem.d;
    const int n = problem.n;
    Matrix x_prev = Matrix::Zero(d, n);
    result.average = Vector::Zero(d);
    result.final_iterate = GlobalIterate::zeros(n, d);
    if (stop.max_iters <= 0) return result;

    Matrix grad_prev = sp.gradient(x_prev);
    Matrix z = x_prev - step * grad_prev;
    Matrix x = sp.prox(z, step);

    for (int t = 1; t <= stop.max_iters; ++t) {
        begin(result.ledger);
        const Matrix grad = sp.gradient(x);
        const Matrix y = 2.0 * x - x_prev - step * (grad - grad_prev);
        z += 0.5 * (y + sp.mix(y, result.ledger)) - x;
        Matrix x_next = sp.prox(z, step);
        x_prev = std::move(x);
        x = std::move(x_next);
        grad_prev = grad;
        if (rec.record(t, x, x_prev, result.ledger, result)) break;
    }
    return result;
}

RunResult baseline_run(const CompositeProblem& problem, const MixingMatrix& w, const BaselineParams& params,
                       const StopRule& stop) {
    params.validate();
    return params.algorithm == BaselineKind::PgExtra ? pg_extra_run(problem, w, params.step, stop)
                                                     : nids_run(problem, w, params.step, stop);
}

std::vector<double> log_grid(int lo_exp, int hi_exp, int per_decade) {
    if (hi_exp < lo_exp || per_decade <= 0) throw std::invalid_argument("log_grid: bad range");
    std::vector<double> grid;
    const int count = (hi_exp - lo_exp) * per_decade;
    for (int k = 0; k <= count; ++k)
        grid.push_back(std::pow(10.0, lo_exp + static_cast<double>(k) / per_decade));
    return grid;
}

SweepResult tune(const std::vector<double>& grid, const SweepRunner& runner, double target, int max_iters,
                 std::optional<int> patience, int coarse_stride) {
    SweepResult out;
    const int count = static_cast<int>(grid.size());
    std::vector<bool> done(count, false);
    std::optional<int> best_index;
    int cap = max_iters;
    int stale = 0;

    // Returns false once patience runs out.
    auto evaluate = [&](int idx) {
        done[idx] = true;
        const double value = grid[idx];
        const RunResult run = runner(value, cap);
        SweepPoint pt;
        pt.value = value;
        pt.status = run.status;
        pt.iterations = static_cast<int>(run.records.size());
        if (run.status != RunStatus::Diverged) {
            if (auto hit = first_reaching(run.records, target)) {
                pt.iters_to_target = run.records[*hit].iter;
                pt.scalars_to_target = run.records[*hit].scalars_cum;
            }
        }
        out.points.push_back(pt);

        bool improved = false;
        if (pt.iters_to_target &&
            (!out.best_iters || *pt.iters_to_target < *out.best_iters ||
             (*pt.iters_to_target == *out.best_iters && pt.scalars_to_target < out.best_scalars))) {
            out.best = value;
            out.best_iters = pt.iters_to_target;
            out.best_scalars = pt.scalars_to_target;
            best_index = idx;
            cap = *pt.iters_to_target;
            improved = true;
        }
        if (!out.best) return true;
        stale = improved ? 0 : stale + 1;
        return !(patience && stale >= *patience);
    };

    // Coarse pass from the top of the grid.
    const int stride = std::max(coarse_stride, 1);
    for (int idx = count - 1; idx >= 0; idx -= stride) evaluate(idx);
    stale = 0;

    // Remaining points, nearest to the best first (larger value on ties).
    std::vector<int> rest;
    for (int idx = count - 1; idx >= 0; --idx)
        if (!done[idx]) rest.push_back(idx);
    if (best_index) {
        const int center = *best_index;
        std::stable_sort(rest.begin(), rest.end(),
                         [center](int a, int b) { return std::abs(a - center) < std::abs(b - center); });
    }
    for (int idx : rest)
        if (!evaluate(idx)) break;
    return out;
}

}  // namespace dsadmm
