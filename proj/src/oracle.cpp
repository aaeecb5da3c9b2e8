#include "dsadmm/oracle.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <ostream>
#include <stdexcept>

#include <Eigen/Eigenvalues>
#include <unsupported/Eigen/KroneckerProduct>

namespace dsadmm {

namespace {

Vector blockwise_prox(const std::vector<ProxPtr>& fns, const Vector& x, int d, double step) {
    Vector out(x.size());
    for (std::size_t i = 0; i < fns.size(); ++i) {
        const Eigen::Index off = static_cast<Eigen::Index>(i) * d;
        out.segment(off, d) = fns[i]->prox(x.segment(off, d), step);
    }
    return out;
}

double blockwise_dist_sq(const std::vector<ProxPtr>& fns, const Vector& x, const Vector& y, int d) {
    double total = 0.0;
    for (std::size_t i = 0; i < fns.size(); ++i) {
        const Eigen::Index off = static_cast<Eigen::Index>(i) * d;
        const double dist = fns[i]->subdiff_dist(x.segment(off, d), y.segment(off, d));
        total += dist * dist;
    }
    return total;
}

Vector stack2(const Vector& a, const Vector& b) {
    Vector out(a.size() + b.size());
    out << a, b;
    return out;
}

void check_params(const OracleParams& p) {
    if (!(p.beta > 0.0)) throw std::invalid_argument("oracle: beta must be positive");
    if (!(p.r >= 0.0 && p.r <= 1.0)) throw std::invalid_argument("oracle: r must lie in [0, 1]");
    if (!(p.s > 0.0)) throw std::invalid_argument("oracle: s must be positive");
    if (!(p.tau > 0.0)) throw std::invalid_argument("oracle: tau must be positive");
}

// H and G restricted to the eigenvector of W with eigenvalue mu, in
// coordinates (u, v, w1, w2).
Eigen::Matrix4d h_block(const OracleParams& p, double mu) {
    const double q = p.beta * (1.0 + p.tau - mu * mu);
    const double k = 1.0 / (1.0 + p.r);
    Eigen::Matrix4d h = Eigen::Matrix4d::Zero();
    h(0, 0) = q;
    h(1, 1) = q + p.beta * (1.0 + mu * mu) * k;
    h(1, 2) = h(2, 1) = p.r * k;
    h(1, 3) = h(3, 1) = p.r * mu * k;
    h(2, 2) = h(3, 3) = k / p.beta;
    return h;
}

}  // namespace

Vector GlobalMatrices::apply_wt(const Vector& x) const {
    Eigen::Map<const Matrix> xm(x.data(), d, n);
    Vector out(x.size());
    Eigen::Map<Matrix> om(out.data(), d, n);
    om.noalias() = xm * w.transpose();
    return out;
}

Vector GlobalMatrices::apply_q(const Vector& x) const {
    return params.beta * ((1.0 + params.tau) * x - apply_wt(apply_wt(x)));
}

Vector GlobalMatrices::apply_a(const Vector& u) const { return stack2(apply_wt(u), u); }
Vector GlobalMatrices::apply_b(const Vector& v) const { return stack2(v, apply_wt(v)); }

Vector GlobalMatrices::apply_at(const Vector& lambda) const {
    const int m = nd();
    return apply_wt(lambda.head(m)) + lambda.tail(m);
}

Vector GlobalMatrices::apply_bt(const Vector& lambda) const {
    const int m = nd();
    return lambda.head(m) + apply_wt(lambda.tail(m));
}

Vector GlobalMatrices::apply_h(const Vector& x) const {
    const int m = nd();
    const double beta = params.beta;
    const double k = 1.0 / (1.0 + params.r);
    const Vector u = x.segment(0, m);
    const Vector v = x.segment(m, m);
    const Vector lambda = x.segment(2 * m, 2 * m);
    Vector out(4 * m);
    out.segment(0, m) = apply_q(u);
    out.segment(m, m) = apply_q(v) + beta * k * apply_bt(apply_b(v)) + params.r * k * apply_bt(lambda);
    out.segment(2 * m, 2 * m) = params.r * k * apply_b(v) + (k / beta) * lambda;
    return out;
}

Vector GlobalMatrices::apply_g(const Vector& x) const {
    const int m = nd();
    Vector out(4 * m);
    out.segment(0, m) = apply_q(x.segment(0, m));
    out.segment(m, m) = apply_q(x.segment(m, m));
    out.segment(2 * m, 2 * m) = ((1.0 - params.r) / params.beta) * x.segment(2 * m, 2 * m);
    return out;
}

GlobalMatrices build_matrices(const MixingMatrix& w, int d, const OracleParams& params, int dense_limit) {
    check_params(params);
    if (d <= 0) throw std::invalid_argument("oracle: d must be positive");
    GlobalMatrices gm;
    gm.n = w.size();
    gm.d = d;
    gm.params = params;
    gm.w = w.weights();
    gm.w_eigenvalues = w.eigenvalues();

    const double beta = params.beta;
    const double r = params.r;
    double q_min = INFINITY;
    for (Eigen::Index i = 0; i < gm.w_eigenvalues.size(); ++i) {
        const double mu = gm.w_eigenvalues(i);
        q_min = std::min(q_min, beta * (1.0 + params.tau - mu * mu));
        Eigen::LLT<Eigen::Matrix4d> llt(h_block(params, mu));
        if (llt.info() != Eigen::Success) throw std::runtime_error("oracle: H is not positive definite");
    }
    if (!(q_min > 0.0)) throw std::runtime_error("oracle: Q is not positive definite");

    const int m = gm.nd();
    if (4 * m > dense_limit) return gm;

    gm.dense = true;
    const Matrix id = Matrix::Identity(m, m);
    gm.Wt = Eigen::kroneckerProduct(gm.w, Matrix::Identity(d, d));
    gm.A.resize(2 * m, m);
    gm.A << gm.Wt, id;
    gm.B.resize(2 * m, m);
    gm.B << id, gm.Wt;
    gm.Q = beta * ((1.0 + params.tau) * id - gm.Wt.transpose() * gm.Wt);

    const Matrix btb = gm.B.transpose() * gm.B;
    const Matrix id2 = Matrix::Identity(2 * m, 2 * m);
    const int full = 4 * m;

    gm.S = Matrix::Zero(full, full);
    gm.S.block(0, 0, m, m) = gm.Q;
    gm.S.block(m, m, m, m) = gm.Q + beta * btb;
    gm.S.block(m, 2 * m, m, 2 * m) = r * gm.B.transpose();
    gm.S.block(2 * m, m, 2 * m, m) = gm.B;
    gm.S.block(2 * m, 2 * m, 2 * m, 2 * m) = id2 / beta;

    gm.M = Matrix::Identity(full, full);
    gm.M.block(2 * m, m, 2 * m, m) = beta * gm.B;
    gm.M.block(2 * m, 2 * m, 2 * m, 2 * m) = (1.0 + r) * id2;

    gm.H = Matrix::Zero(full, full);
    gm.H.block(0, 0, m, m) = gm.Q;
    gm.H.block(m, m, m, m) = gm.Q + beta / (1.0 + r) * btb;
    gm.H.block(m, 2 * m, m, 2 * m) = r / (1.0 + r) * gm.B.transpose();
    gm.H.block(2 * m, m, 2 * m, m) = r / (1.0 + r) * gm.B;
    gm.H.block(2 * m, 2 * m, 2 * m, 2 * m) = id2 / (beta * (1.0 + r));

    gm.G = Matrix::Zero(full, full);
    gm.G.block(0, 0, m, m) = gm.Q;
    gm.G.block(m, m, m, m) = gm.Q;
    gm.G.block(2 * m, 2 * m, 2 * m, 2 * m) = (1.0 - r) / beta * id2;

    const Matrix s_minv = gm.S * gm.M.inverse();
    const Matrix g_form = gm.S + gm.S.transpose() - gm.M.transpose() * gm.S;
    gm.identity_error = std::max((gm.H - s_minv).cwiseAbs().maxCoeff(), (gm.G - g_form).cwiseAbs().maxCoeff());
    if (gm.identity_error > 1e-10) throw std::runtime_error("oracle: block matrix identities fail");
    if ((gm.H - gm.H.transpose()).cwiseAbs().maxCoeff() > 1e-12 * (1.0 + gm.H.cwiseAbs().maxCoeff()))
        throw std::runtime_error("oracle: H is not symmetric");
    return gm;
}

GlobalIterate global_step(const GlobalIterate& it, const GlobalMatrices& gm, const CompositeProblem& p) {
    const OracleParams& par = gm.params;
    const double beta = par.beta;
    const double c = beta * (2.0 + par.tau);
    const double step = 1.0 / c;

    const Vector wu = gm.apply_wt(it.u);
    const Vector wv = gm.apply_wt(it.v);
    const Vector lin_u = gm.apply_wt(it.w1) + it.w2 + beta * (2.0 * wv + (1.0 + par.tau) * it.u - gm.apply_wt(wu));

    GlobalIterate next;
    next.u = blockwise_prox(p.f, lin_u / c, gm.d, step);
    const Vector wu_next = gm.apply_wt(next.u);
    const Vector w1_half = it.w1 - par.r * beta * (wu_next - it.v);
    const Vector w2_half = it.w2 - par.r * beta * (next.u - wv);

    const Vector lin_v = beta * (2.0 * wu_next + (1.0 + par.tau) * it.v - gm.apply_wt(wv)) -
                         (w1_half + gm.apply_wt(w2_half));
    next.v = blockwise_prox(p.g, lin_v / c, gm.d, step);
    const Vector wv_next = gm.apply_wt(next.v);
    next.w1 = w1_half - par.s * beta * (wu_next - next.v);
    next.w2 = w2_half - par.s * beta * (next.u - wv_next);
    return next;
}

GlobalIterate global_step_dense(const GlobalIterate& it, const GlobalMatrices& gm, const CompositeProblem& p) {
    if (!gm.dense) throw std::logic_error("oracle: dense matrices were not built");
    const OracleParams& par = gm.params;
    const double beta = par.beta;
    const double c = beta * (2.0 + par.tau);
    const int m = gm.nd();
    const Vector lambda = it.lambda();

    GlobalIterate next;
    const Vector arg_u = gm.A.transpose() * lambda + beta * gm.A.transpose() * (gm.B * it.v) + gm.Q * it.u;
    next.u = blockwise_prox(p.f, arg_u / c, gm.d, 1.0 / c);
    const Vector lambda_half = lambda - par.r * beta * (gm.A * next.u - gm.B * it.v);
    const Vector arg_v = -gm.B.transpose() * lambda_half + beta * gm.B.transpose() * (gm.A * next.u) + gm.Q * it.v;
    next.v = blockwise_prox(p.g, arg_v / c, gm.d, 1.0 / c);
    const Vector lambda_next = lambda_half - par.s * beta * (gm.A * next.u - gm.B * next.v);
    next.w1 = lambda_next.head(m);
    next.w2 = lambda_next.tail(m);
    return next;
}

GlobalIterate tilde_iterate(const GlobalIterate& it, const GlobalIterate& next, const GlobalMatrices& gm) {
    const int m = gm.nd();
    const Vector lambda = it.lambda() - gm.params.beta * (gm.apply_a(next.u) - gm.apply_b(it.v));
    return {next.u, next.v, lambda.head(m), lambda.tail(m)};
}

double weighted_norm(const Vector& x, const Matrix& m) {
    const double inner = x.dot(m * x);
    if (inner < -1e-12) throw std::domain_error("weighted_norm: matrix is not positive semidefinite");
    return std::sqrt(std::max(inner, 0.0));
}

namespace {

double clamped_sqrt(double inner) {
    if (inner < -1e-12) throw std::domain_error("weighted_norm: matrix is not positive semidefinite");
    return std::sqrt(std::max(inner, 0.0));
}

}  // namespace

double h_norm(const Vector& x, const GlobalMatrices& gm) { return clamped_sqrt(x.dot(gm.apply_h(x))); }
double g_norm(const Vector& x, const GlobalMatrices& gm) { return clamped_sqrt(x.dot(gm.apply_g(x))); }

double constraint_residual(const GlobalIterate& it, const GlobalMatrices& gm) {
    return (gm.apply_a(it.u) - gm.apply_b(it.v)).norm();
}

double kkt_residual(const GlobalIterate& it, const GlobalMatrices& gm, const CompositeProblem& p) {
    const Vector lambda = it.lambda();
    const double df = blockwise_dist_sq(p.f, it.u, gm.apply_at(lambda), gm.d);
    const double dg = blockwise_dist_sq(p.g, it.v, -gm.apply_bt(lambda), gm.d);
    const double c = constraint_residual(it, gm);
    return std::sqrt(df + dg + c * c);
}

RateConstants rate_constants(const OracleParams& p, double rho) {
    if (!(p.r > 0.0 && p.r < 1.0)) throw std::invalid_argument("rate_constants: r must lie in (0, 1)");
    if (!(p.beta > 0.0) || !(p.tau > 0.0)) throw std::invalid_argument("rate_constants: beta, tau must be positive");
    if (!(rho > 0.0 && rho <= 1.0)) throw std::invalid_argument("rate_constants: rho must lie in (0, 1]");
    const double b = p.beta;
    const double r = p.r;
    const double tb2 = (p.tau * b) * (p.tau * b);
    RateConstants rc;
    rc.rho = rho;
    rc.phi = std::min(2.0 * b * rho, (1.0 - r) / b);
    rc.delta = std::max({6.0 * r * r + 2.0 / (b * b), 12.0 * b * b + 4.0 + tb2, 3.0 * tb2});
    rc.theta = (2.0 * r * r * b * b + 1.0) / (b * (r + 1.0)) + (2.0 + p.tau - r) * b;
    return rc;
}

bool SpectralReport::g_matches() const { return std::abs(lambda_min_g - expected_min_g) <= 1e-10; }

SpectralReport check_spectra(const GlobalMatrices& gm, const RateConstants& rate) {
    const OracleParams& p = gm.params;
    SpectralReport rep;
    rep.theta = rate.theta;
    rep.expected_min_g = std::min(p.beta * p.tau, (1.0 - p.r) / p.beta);
    rep.stated_bound = 2.0 * (1.0 - p.r) * rate.rho;
    rep.proof_bound = rate.phi;
    rep.dense = gm.dense;
    rep.identity_error = gm.identity_error;
    if (gm.dense) {
        Eigen::SelfAdjointEigenSolver<Matrix> eh(gm.H, Eigen::EigenvaluesOnly);
        Eigen::SelfAdjointEigenSolver<Matrix> eg(gm.G, Eigen::EigenvaluesOnly);
        rep.lambda_max_h = eh.eigenvalues().maxCoeff();
        rep.lambda_min_g = eg.eigenvalues().minCoeff();
        return rep;
    }
    rep.lambda_max_h = -INFINITY;
    rep.lambda_min_g = (1.0 - p.r) / p.beta;
    for (Eigen::Index i = 0; i < gm.w_eigenvalues.size(); ++i) {
        const double mu = gm.w_eigenvalues(i);
        Eigen::SelfAdjointEigenSolver<Eigen::Matrix4d> eh(h_block(p, mu), Eigen::EigenvaluesOnly);
        rep.lambda_max_h = std::max(rep.lambda_max_h, eh.eigenvalues().maxCoeff());
        rep.lambda_min_g = std::min(rep.lambda_min_g, p.beta * (1.0 + p.tau - mu * mu));
    }
    return rep;
}

int TrajectoryCheck::violations() const {
    return static_cast<int>(std::count_if(rows.begin(), rows.end(), [](const CheckRow& r) { return !r.ok(); }));
}

TrajectoryCheck check_contraction(const std::vector<GlobalIterate>& traj, const GlobalMatrices& gm,
                                  const GlobalIterate& w_ref) {
    TrajectoryCheck out;
    out.name = "contraction";
    const Vector ref = w_ref.stacked();
    for (std::size_t t = 0; t + 1 < traj.size(); ++t) {
        const Vector cur = traj[t].stacked();
        const Vector nxt = traj[t + 1].stacked();
        const Vector tilde = tilde_iterate(traj[t], traj[t + 1], gm).stacked();
        const double h_next = h_norm(nxt - ref, gm);
        const double h_cur = h_norm(cur - ref, gm);
        const double g_gap = g_norm(cur - tilde, gm);
        CheckRow row;
        row.t = static_cast<int>(t);
        row.lhs = h_next * h_next;
        row.rhs = h_cur * h_cur - g_gap * g_gap;
        row.slack = 1e-8 * (1.0 + row.lhs);
        out.rows.push_back(row);
    }
    return out;
}

TrajectoryCheck check_ergodic_bound(const std::vector<GlobalIterate>& traj, const GlobalMatrices& gm) {
    TrajectoryCheck out;
    out.name = "sublinear";
    if (traj.size() < 2) return out;
    const OracleParams& p = gm.params;
    if (!(p.r < 1.0)) throw std::invalid_argument("check_ergodic_bound: requires r < 1");
    const double hw = h_norm(traj[1].stacked() - traj[0].stacked(), gm);
    const Vector dv = traj[1].v - traj[0].v;
    const double c0 = hw * hw + dv.dot(gm.apply_q(dv));
    const double factor = c0 / (p.beta * p.tau) * (1.0 + p.r) / (1.0 - p.r);
    for (std::size_t t = 0; t + 1 < traj.size(); ++t) {
        CheckRow row;
        row.t = static_cast<int>(t);
        row.lhs = (traj[t].stacked() - traj[t + 1].stacked()).squaredNorm();
        row.rhs = factor / static_cast<double>(t + 1);
        row.slack = 1e-8 * row.rhs;
        out.rows.push_back(row);
    }
    return out;
}

double relative_deviation(const GlobalIterate& x, const GlobalIterate& y) {
    const Vector ys = y.stacked();
    const double diff = (x.stacked() - ys).norm();
    const double scale = ys.norm();
    return scale > 0.0 ? diff / scale : diff;
}

LockstepVerifier::LockstepVerifier(const CompositeProblem& problem, const MixingMatrix& w,
                                   const DsAdmmParams& params)
    : problem_(problem),
      gm_(build_matrices(w, problem.d, OracleParams::from(params))),
      oracle_(GlobalIterate::zeros(problem.n, problem.d)) {}

double LockstepVerifier::observe(const DsAdmmNetwork& net) {
    if (traj_.empty()) traj_.push_back(GlobalIterate::zeros(problem_.n, problem_.d));
    oracle_ = global_step(oracle_, gm_, problem_);
    GlobalIterate cur = net.stacked();
    deviations_.push_back(relative_deviation(cur, oracle_));
    const double kkt = kkt_residual(cur, gm_, problem_);
    traj_.push_back(std::move(cur));
    return kkt;
}

double LockstepVerifier::max_deviation() const {
    return deviations_.empty() ? 0.0 : *std::max_element(deviations_.begin(), deviations_.end());
}

bool VerificationReport::passed() const {
    return spectra.passed() && max_oracle_deviation <= deviation_tolerance && contraction.violations() == 0 &&
           ergodic_bound.violations() == 0;
}

void VerificationReport::write_text(std::ostream& out) const {
    const auto flags = out.flags();
    out << std::setprecision(6);
    out << "oracle equivalence: max relative deviation " << max_oracle_deviation << " (tolerance "
        << deviation_tolerance << ") " << (max_oracle_deviation <= deviation_tolerance ? "ok" : "FAILED") << "\n";
    out << "lambda_max(H) = " << spectra.lambda_max_h << ", theta = " << spectra.theta << " "
        << (spectra.theta_bound_holds() ? "ok" : "FAILED") << "\n";
    out << "lambda_min(G) = " << spectra.lambda_min_g << ", min(beta tau, (1-r)/beta) = " << spectra.expected_min_g
        << " " << (spectra.g_matches() ? "ok" : "FAILED") << "\n";
    out << "  stated lower bound 2(1-r)rho = " << spectra.stated_bound
        << (spectra.lambda_min_g >= spectra.stated_bound - 1e-12 ? " (holds)" : " (does not hold)") << "\n";
    out << "  phi = min(2 beta rho, (1-r)/beta) = " << spectra.proof_bound
        << (spectra.lambda_min_g >= spectra.proof_bound - 1e-12 ? " (holds)" : " (does not hold)") << "\n";
    if (spectra.dense)
        out << "block identities: max error " << spectra.identity_error << " "
            << (spectra.identities_hold() ? "ok" : "FAILED") << "\n";
    out << "rate constants: rho " << rates.rho << ", phi " << rates.phi << ", delta " << rates.delta << ", theta "
        << rates.theta << "\n";
    out << "contraction: " << contraction.violations() << " violations in " << contraction.rows.size() << " steps\n";
    out << "sublinear bound: " << ergodic_bound.violations() << " violations in " << ergodic_bound.rows.size() << " steps\n";
    out << "final consensus error " << final_consensus << ", constraint residual " << final_constraint << "\n";
    out << "verification " << (passed() ? "PASSED" : "FAILED") << "\n";
    out.flags(flags);
}

void VerificationReport::write_csv(std::ostream& out) const {
    out << "check,t,lhs,rhs,slack,margin\n";
    out << std::setprecision(17);
    for (const TrajectoryCheck* check : {&contraction, &ergodic_bound})
        for (const CheckRow& row : check->rows)
            out << check->name << ',' << row.t << ',' << row.lhs << ',' << row.rhs << ',' << row.slack << ','
                << row.margin() << '\n';
}

}  // namespace dsadmm
