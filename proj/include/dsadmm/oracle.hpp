#pragma once

#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "dsadmm/agent.hpp"
#include "dsadmm/graph.hpp"
#include "dsadmm/iterate.hpp"
#include "dsadmm/problem.hpp"

namespace dsadmm {

/// Parameters of the centralized replica. Unlike the decentralized protocol
/// the full-step dual size s is free here.
struct OracleParams {
    double beta = 1.0;
    double r = 0.99;
    double s = 1.0;
    double tau = 0.01;

    static OracleParams from(const DsAdmmParams& p) { return {p.beta, p.r, 1.0, p.tau}; }
};

/// Matrices of the stacked formulation, with Wt = W (x) I_d,
/// A = (Wt; I), B = (I; Wt), Q = beta((1 + tau) I - Wt^T Wt) and the block
/// matrices H, S, M, G of the contraction analysis (taken at s = 1).
///
/// Dense copies are only formed when 4nd <= dense_limit; every operation
/// below also has a structured path that applies Wt through the n x n
/// mixing matrix.
struct GlobalMatrices {
    int n = 0;
    int d = 0;
    OracleParams params;
    Matrix w;  // n x n mixing weights
    Vector w_eigenvalues;
    bool dense = false;
    Matrix Wt, A, B, Q, S, M, H, G;
    double identity_error = 0.0;  // dense path only

    int nd() const { return n * d; }
    /// Wt x for an nd-vector.
    Vector apply_wt(const Vector& x) const;
    Vector apply_q(const Vector& x) const;
    Vector apply_h(const Vector& w4) const;
    Vector apply_g(const Vector& w4) const;
    /// A u and B v (2nd-vectors), A^T lambda and B^T lambda (nd-vectors).
    Vector apply_a(const Vector& u) const;
    Vector apply_b(const Vector& v) const;
    Vector apply_at(const Vector& lambda) const;
    Vector apply_bt(const Vector& lambda) const;
};

/// Builds the matrices and checks their invariants: Q and H positive
/// definite, H = S M^-1 and G = S + S^T - M^T S within 1e-10 elementwise
/// (the last two only on the dense path). Throws std::runtime_error on a
/// failed check and std::invalid_argument on bad parameters.
GlobalMatrices build_matrices(const MixingMatrix& w, int d, const OracleParams& params,
                              int dense_limit = 2000);

/// One iteration in the decomposed-multiplier form with Wt applied
/// structurally and the prox taken blockwise per agent.
GlobalIterate global_step(const GlobalIterate& it, const GlobalMatrices& gm, const CompositeProblem& p);

/// The same iteration written with the dense A, B and Q (requires gm.dense).
GlobalIterate global_step_dense(const GlobalIterate& it, const GlobalMatrices& gm,
                                const CompositeProblem& p);

/// w-tilde of the contraction analysis: (u+, v+, lambda - beta(A u+ - B v)).
GlobalIterate tilde_iterate(const GlobalIterate& it, const GlobalIterate& next, const GlobalMatrices& gm);

/// sqrt(x^T M x). Inner products in (-1e-12, 0) are clamped to 0; anything
/// more negative throws std::domain_error.
double weighted_norm(const Vector& x, const Matrix& m);
double h_norm(const Vector& w4, const GlobalMatrices& gm);
double g_norm(const Vector& w4, const GlobalMatrices& gm);

/// sqrt(dist^2(A^T lambda, df(u)) + dist^2(-B^T lambda, dg(v)) + ||Au - Bv||^2).
double kkt_residual(const GlobalIterate& it, const GlobalMatrices& gm, const CompositeProblem& p);

/// ||Au - Bv||.
double constraint_residual(const GlobalIterate& it, const GlobalMatrices& gm);

struct RateConstants {
    double rho = 0.0;
    double phi = 0.0;
    double delta = 0.0;
    double theta = 0.0;

    double epsilon(double c) const { return phi / (c * c * delta * theta); }
};

/// Throws std::invalid_argument unless 0 < r < 1, beta > 0, tau > 0 and
/// rho in (0, 1].
RateConstants rate_constants(const OracleParams& params, double rho);

struct SpectralReport {
    double lambda_max_h = 0.0;
    double theta = 0.0;
    double lambda_min_g = 0.0;
    double expected_min_g = 0.0;  // min(beta tau, (1 - r) / beta)
    double stated_bound = 0.0;    // 2 (1 - r) rho
    double proof_bound = 0.0;     // phi
    double identity_error = 0.0;  // max elementwise error of H = S M^-1 and G = S + S^T - M^T S
    bool dense = false;

    bool theta_bound_holds() const { return lambda_max_h <= theta + 1e-8; }
    bool g_matches() const;
    bool identities_hold() const { return identity_error <= 1e-10; }
    bool passed() const { return theta_bound_holds() && g_matches() && identities_hold(); }
};

/// Extreme eigenvalues of H and G. On the dense path they come from a
/// symmetric eigensolver on the full matrices; otherwise from the 4x4 blocks
/// obtained by diagonalizing W.
SpectralReport check_spectra(const GlobalMatrices& gm, const RateConstants& rate);

struct CheckRow {
    int t = 0;
    double lhs = 0.0;
    double rhs = 0.0;
    double slack = 0.0;
    bool ok() const { return lhs <= rhs + slack; }
    double margin() const { return rhs + slack - lhs; }
};

struct TrajectoryCheck {
    std::string name;
    std::vector<CheckRow> rows;
    int violations() const;
};

/// ||w(t+1) - w_ref||_H^2 <= ||w(t) - w_ref||_H^2 - ||w(t) - w~(t)||_G^2 with
/// slack 1e-8 (1 + lhs), for every consecutive pair of the trajectory.
TrajectoryCheck check_contraction(const std::vector<GlobalIterate>& traj, const GlobalMatrices& gm,
                                  const GlobalIterate& w_ref);

/// ||w(t) - w(t+1)||^2 <= C / (beta tau (t+1)) * (1+r)/(1-r) with
/// C = ||w(1) - w(0)||_H^2 + ||v(1) - v(0)||_Q^2 and relative slack 1e-8.
TrajectoryCheck check_ergodic_bound(const std::vector<GlobalIterate>& traj, const GlobalMatrices& gm);

/// ||x - y|| / ||y|| on the stacked 4nd-vectors (absolute when y = 0).
double relative_deviation(const GlobalIterate& x, const GlobalIterate& y);

/// Runs the centralized replica next to a decentralized network and keeps
/// the stacked trajectory for the post-hoc checks. Pure observer: it never
/// touches the network.
class LockstepVerifier {
public:
    LockstepVerifier(const CompositeProblem& problem, const MixingMatrix& w, const DsAdmmParams& params);

    /// Call after each completed iteration; returns the KKT residual of the
    /// decentralized iterate.
    double observe(const DsAdmmNetwork& net);

    const GlobalMatrices& matrices() const { return gm_; }
    const std::vector<GlobalIterate>& trajectory() const { return traj_; }
    const std::vector<double>& deviations() const { return deviations_; }
    double max_deviation() const;

private:
    const CompositeProblem& problem_;
    GlobalMatrices gm_;
    GlobalIterate oracle_;
    std::vector<GlobalIterate> traj_;
    std::vector<double> deviations_;
};

struct VerificationReport {
    SpectralReport spectra;
    RateConstants rates;
    double max_oracle_deviation = 0.0;
    double deviation_tolerance = 1e-9;
    TrajectoryCheck contraction;
    TrajectoryCheck ergodic_bound;
    double final_consensus = 0.0;
    double final_constraint = 0.0;

    bool passed() const;
    void write_text(std::ostream& out) const;
    /// `check,t,lhs,rhs,slack,margin` per row of both trajectory checks.
    void write_csv(std::ostream& out) const;
};

}  // namespace dsadmm
