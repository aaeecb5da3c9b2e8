#pragma once

#include <cstdint>
#include <map>
#include <memory>
#include <mutex>
#include <optional>

#include <Eigen/Dense>
#include <Eigen/Sparse>

namespace dsadmm {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;
using SparseRowMatrix = Eigen::SparseMatrix<double, Eigen::RowMajor>;

/// Closed proper convex function h exposed through the three queries the
/// solvers and the verifier need.
///
/// prox(v, step) returns argmin_x h(x) + ||x - v||^2 / (2 step), and
/// subdiff_dist(x, y) returns dist(y, dh(x)). Smooth functions also expose
/// gradient(); calling it on a nonsmooth function throws std::logic_error.
class ProxFn {
public:
    virtual ~ProxFn() = default;

    virtual double evaluate(const Vector& x) const = 0;
    virtual Vector prox(const Vector& v, double step) const = 0;
    virtual double subdiff_dist(const Vector& x, const Vector& y) const = 0;

    virtual bool smooth() const { return false; }
    virtual Vector gradient(const Vector& x) const;
};

using ProxPtr = std::shared_ptr<const ProxFn>;

// Closed-form operators.
Vector prox_l1(const Vector& v, double step, double weight);
Vector prox_sq_l2(const Vector& v, double step, double weight);
Vector prox_elastic_net(const Vector& v, double step, double w1, double w2);

/// h = 0.
class ZeroFn final : public ProxFn {
public:
    double evaluate(const Vector&) const override { return 0.0; }
    Vector prox(const Vector& v, double) const override { return v; }
    double subdiff_dist(const Vector&, const Vector& y) const override { return y.norm(); }
    bool smooth() const override { return true; }
    Vector gradient(const Vector& x) const override { return Vector::Zero(x.size()); }
};

/// h = weight * ||x||_1.
class L1Norm final : public ProxFn {
public:
    explicit L1Norm(double weight);
    double weight() const { return weight_; }
    double evaluate(const Vector& x) const override;
    Vector prox(const Vector& v, double step) const override;
    double subdiff_dist(const Vector& x, const Vector& y) const override;

private:
    double weight_;
};

/// h = (weight / 2) * ||x||_2^2.
class SquaredL2 final : public ProxFn {
public:
    explicit SquaredL2(double weight);
    double weight() const { return weight_; }
    double evaluate(const Vector& x) const override;
    Vector prox(const Vector& v, double step) const override;
    double subdiff_dist(const Vector& x, const Vector& y) const override;
    bool smooth() const override { return true; }
    Vector gradient(const Vector& x) const override { return weight_ * x; }

private:
    double weight_;
};

/// h = w1 * ||x||_1 + (w2 / 2) * ||x||_2^2.
class ElasticNet final : public ProxFn {
public:
    ElasticNet(double w1, double w2);
    double evaluate(const Vector& x) const override;
    Vector prox(const Vector& v, double step) const override;
    double subdiff_dist(const Vector& x, const Vector& y) const override;

private:
    double w1_;
    double w2_;
};

/// h = (scale / 2) * ||A x - b||^2.
///
/// A is kept dense when rows * cols <= dense_limit, otherwise sparse. The
/// prox solves (I + step*scale*A^T A) x = v + step*scale*A^T b, caching a
/// Cholesky factor (dense) or the assembled system (sparse, solved with
/// conjugate gradients) per distinct step. Cache fills are serialized; after
/// warm-up the cache is only read.
class QuadraticLoss final : public ProxFn {
public:
    QuadraticLoss(SparseRowMatrix a, Vector b, double scale, double dense_limit = 1e7);

    int dim() const { return static_cast<int>(a_.cols()); }
    int rows() const { return static_cast<int>(a_.rows()); }
    bool is_dense() const { return dense_; }
    double scale() const { return scale_; }
    const SparseRowMatrix& design() const { return a_; }
    const Vector& targets() const { return b_; }

    double evaluate(const Vector& x) const override;
    Vector prox(const Vector& v, double step) const override;
    double subdiff_dist(const Vector& x, const Vector& y) const override;
    bool smooth() const override { return true; }
    Vector gradient(const Vector& x) const override;

    /// Largest eigenvalue of scale * A^T A.
    double lipschitz() const;

private:
    SparseRowMatrix a_;
    Vector b_;
    double scale_;
    bool dense_;
    Matrix dense_a_;
    Matrix gram_;  // A^T A, dense path only
    Vector atb_;
    double btb_;

    mutable std::mutex cache_mutex_;
    mutable std::map<double, std::shared_ptr<const Eigen::LLT<Matrix>>> llt_cache_;
    mutable std::map<double, std::shared_ptr<const Eigen::SparseMatrix<double>>> sparse_cache_;
};

/// Result of the box-constrained dual coordinate ascent used for hinge
/// subproblems.
struct HingeDualResult {
    Vector x;
    Vector alpha;
    int sweeps = 0;
};

/// Maximizes sum_j alpha_j (1 - z_j^T v) - 0.5 ||sum_j alpha_j z_j||^2 over
/// alpha in [0, upper]^m, where z_j are the rows of `signed_rows` (b_j a_j),
/// and returns x = v + sum_j alpha_j z_j. Coordinates are visited in a fresh
/// seeded random order each sweep. Stops once a full sweep moves x by less
/// than tol in every single coordinate step; throws std::runtime_error after
/// max_sweeps. Between sweeps the dual is maximized exactly over the face of
/// currently free coordinates (a reduced Newton step, skipped for faces
/// larger than 500).
HingeDualResult solve_hinge_dual(const Matrix& signed_rows, const Vector& v, double upper,
                                 double tol, int max_sweeps, std::uint64_t seed);

/// h = scale * sum_j max(0, 1 - b_j a_j^T x).
///
/// prox is computed by solve_hinge_dual with upper bound scale*step and a
/// sweep cap of 10 * (sample count). subdiff_dist treats samples whose
/// margin is within margin_tol of 1 as ties and projects onto the resulting
/// box-parameterized subdifferential.
class HingeSum final : public ProxFn {
public:
    HingeSum(Matrix rows, Vector labels, double scale, double tol = 1e-10,
             double margin_tol = 1e-7);

    int dim() const { return static_cast<int>(signed_rows_.cols()); }
    int samples() const { return static_cast<int>(signed_rows_.rows()); }
    double scale() const { return scale_; }
    double tolerance() const { return tol_; }
    const Matrix& signed_rows() const { return signed_rows_; }

    double evaluate(const Vector& x) const override;
    Vector prox(const Vector& v, double step) const override;
    double subdiff_dist(const Vector& x, const Vector& y) const override;

private:
    Matrix signed_rows_;
    double scale_;
    double tol_;
    double margin_tol_;
};

}  // namespace dsadmm
