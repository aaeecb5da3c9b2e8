#include "dsadmm/prox.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/IterativeLinearSolvers>

#include "dsadmm/rng.hpp"

namespace dsadmm {

namespace {

void require_step(double step) {
    if (!(step > 0.0)) throw std::invalid_argument("prox: step must be positive");
}

double soft_threshold(double x, double t) {
    if (x > t) return x - t;
    if (x < -t) return x + t;
    return 0.0;
}

// Distance from y to weight * d|x| per coordinate, summed in quadrature.
double l1_subdiff_dist(const Vector& x, const Vector& y, double weight) {
    double sq = 0.0;
    for (Eigen::Index k = 0; k < x.size(); ++k) {
        double gap;
        if (x(k) > 0.0)
            gap = y(k) - weight;
        else if (x(k) < 0.0)
            gap = y(k) + weight;
        else
            gap = std::max(std::abs(y(k)) - weight, 0.0);
        sq += gap * gap;
    }
    return std::sqrt(sq);
}

}  // namespace

Vector ProxFn::gradient(const Vector&) const {
    throw std::logic_error("gradient requested from a nonsmooth function");
}

Vector prox_l1(const Vector& v, double step, double weight) {
    require_step(step);
    const double t = step * weight;
    return v.unaryExpr([t](double x) { return soft_threshold(x, t); });
}

Vector prox_sq_l2(const Vector& v, double step, double weight) {
    require_step(step);
    return v / (1.0 + step * weight);
}

Vector prox_elastic_net(const Vector& v, double step, double w1, double w2) {
    return prox_l1(v, step, w1) / (1.0 + step * w2);
}

// ---------------------------------------------------------------------------

L1Norm::L1Norm(double weight) : weight_(weight) {
    if (!(weight >= 0.0)) throw std::invalid_argument("L1Norm: weight must be nonnegative");
}

double L1Norm::evaluate(const Vector& x) const { return weight_ * x.lpNorm<1>(); }

Vector L1Norm::prox(const Vector& v, double step) const { return prox_l1(v, step, weight_); }

double L1Norm::subdiff_dist(const Vector& x, const Vector& y) const {
    return l1_subdiff_dist(x, y, weight_);
}

SquaredL2::SquaredL2(double weight) : weight_(weight) {
    if (!(weight >= 0.0)) throw std::invalid_argument("SquaredL2: weight must be nonnegative");
}

double SquaredL2::evaluate(const Vector& x) const { return 0.5 * weight_ * x.squaredNorm(); }

Vector SquaredL2::prox(const Vector& v, double step) const { return prox_sq_l2(v, step, weight_); }

double SquaredL2::subdiff_dist(const Vector& x, const Vector& y) const {
    return (y - weight_ * x).norm();
}

ElasticNet::ElasticNet(double w1, double w2) : w1_(w1), w2_(w2) {
    if (!(w1 >= 0.0 && w2 >= 0.0))
        throw std::invalid_argument("ElasticNet: weights must be nonnegative");
}

double ElasticNet::evaluate(const Vector& x) const {
    return w1_ * x.lpNorm<1>() + 0.5 * w2_ * x.squaredNorm();
}

Vector ElasticNet::prox(const Vector& v, double step) const {
    return prox_elastic_net(v, step, w1_, w2_);
}

double ElasticNet::subdiff_dist(const Vector& x, const Vector& y) const {
    return l1_subdiff_dist(x, y - w2_ * x, w1_);
}

// ---------------------------------------------------------------------------

QuadraticLoss::QuadraticLoss(SparseRowMatrix a, Vector b, double scale, double dense_limit)
    : a_(std::move(a)), b_(std::move(b)), scale_(scale) {
    if (a_.rows() != b_.size()) throw std::invalid_argument("QuadraticLoss: rows of A != size of b");
    if (!(scale > 0.0)) throw std::invalid_argument("QuadraticLoss: scale must be positive");
    a_.makeCompressed();
    dense_ = static_cast<double>(a_.rows()) * static_cast<double>(a_.cols()) <= dense_limit;
    atb_ = a_.transpose() * b_;
    btb_ = b_.squaredNorm();
    if (dense_) {
        dense_a_ = Matrix(a_);
        gram_ = dense_a_.transpose() * dense_a_;
    }
}

double QuadraticLoss::evaluate(const Vector& x) const {
    if (x.size() != a_.cols()) throw std::invalid_argument("QuadraticLoss: dimension mismatch");
    if (a_.rows() == 0) return 0.0;
    if (dense_) {
        if (a_.rows() > a_.cols()) {
            const double quad = x.dot(gram_ * x) - 2.0 * atb_.dot(x) + btb_;
            return 0.5 * scale_ * std::max(quad, 0.0);
        }
        return 0.5 * scale_ * (dense_a_ * x - b_).squaredNorm();
    }
    return 0.5 * scale_ * (a_ * x - b_).squaredNorm();
}

Vector QuadraticLoss::gradient(const Vector& x) const {
    if (a_.rows() == 0) return Vector::Zero(x.size());
    if (dense_) return scale_ * (gram_ * x - atb_);
    return scale_ * (a_.transpose() * (a_ * x - b_));
}

double QuadraticLoss::subdiff_dist(const Vector& x, const Vector& y) const {
    return (y - gradient(x)).norm();
}

double QuadraticLoss::lipschitz() const {
    if (a_.rows() == 0) return 0.0;
    Matrix g = dense_ ? gram_ : Matrix(Matrix(a_).transpose() * Matrix(a_));
    Eigen::SelfAdjointEigenSolver<Matrix> solver(g, Eigen::EigenvaluesOnly);
    return scale_ * solver.eigenvalues().maxCoeff();
}

Vector QuadraticLoss::prox(const Vector& v, double step) const {
    require_step(step);
    if (v.size() != a_.cols()) throw std::invalid_argument("QuadraticLoss: dimension mismatch");
    if (a_.rows() == 0) return v;
    const double c = step * scale_;
    const Vector rhs = v + c * atb_;
    if (dense_) {
        std::shared_ptr<const Eigen::LLT<Matrix>> factor;
        {
            std::lock_guard<std::mutex> lock(cache_mutex_);
            auto it = llt_cache_.find(step);
            if (it == llt_cache_.end()) {
                Matrix system = c * gram_;
                system.diagonal().array() += 1.0;
                auto llt = std::make_shared<Eigen::LLT<Matrix>>(system);
                if (llt->info() != Eigen::Success)
                    throw std::runtime_error("QuadraticLoss: factorization failed");
                it = llt_cache_.emplace(step, std::move(llt)).first;
            }
            factor = it->second;
        }
        return factor->solve(rhs);
    }
    std::shared_ptr<const Eigen::SparseMatrix<double>> system;
    {
        std::lock_guard<std::mutex> lock(cache_mutex_);
        auto it = sparse_cache_.find(step);
        if (it == sparse_cache_.end()) {
            Eigen::SparseMatrix<double> at = a_.transpose();
            Eigen::SparseMatrix<double> sys = c * (at * a_);
            Eigen::SparseMatrix<double> eye(sys.rows(), sys.cols());
            eye.setIdentity();
            sys += eye;
            sys.makeCompressed();
            it = sparse_cache_.emplace(step, std::make_shared<Eigen::SparseMatrix<double>>(std::move(sys))).first;
        }
        system = it->second;
    }
    Eigen::ConjugateGradient<Eigen::SparseMatrix<double>, Eigen::Lower | Eigen::Upper> cg;
    cg.setTolerance(1e-15);
    cg.setMaxIterations(10 * static_cast<int>(v.size()) + 100);
    cg.compute(*system);
    Vector x = cg.solveWithGuess(rhs, v);
    if (cg.info() != Eigen::Success && cg.error() > 1e-10)
        throw std::runtime_error("QuadraticLoss: conjugate gradients did not converge");
    return x;
}

// ---------------------------------------------------------------------------

namespace {

constexpr Eigen::Index kMaxFaceSize = 500;

// Exact maximization of the dual over the face where the currently free
// coordinates move and the others stay at their bounds, cut back to stay in
// the box. The dual is concave, so any step in [0, 1] along the segment
// towards the face maximizer does not decrease it.
void face_newton_step(const Matrix& z, double upper, Vector& alpha, Vector& x) {
    std::vector<Eigen::Index> free;
    for (Eigen::Index j = 0; j < alpha.size(); ++j)
        if (alpha(j) > 0.0 && alpha(j) < upper) free.push_back(j);
    if (free.empty() || static_cast<Eigen::Index>(free.size()) > kMaxFaceSize) return;

    const Eigen::Index k = static_cast<Eigen::Index>(free.size());
    Matrix zf(k, z.cols());
    Vector grad(k);
    for (Eigen::Index a = 0; a < k; ++a) {
        zf.row(a) = z.row(free[a]);
        grad(a) = 1.0 - zf.row(a).dot(x);
    }
    const Matrix gram = zf * zf.transpose();
    Eigen::LDLT<Matrix> ldlt(gram);
    if (ldlt.info() != Eigen::Success) return;
    const Vector dir = ldlt.solve(grad);
    if (!dir.allFinite() || (gram * dir - grad).norm() > 1e-8 * (1.0 + grad.norm())) return;

    double t = 1.0;
    for (Eigen::Index a = 0; a < k; ++a) {
        const double cur = alpha(free[a]);
        if (dir(a) > 0.0) t = std::min(t, (upper - cur) / dir(a));
        else if (dir(a) < 0.0) t = std::min(t, -cur / dir(a));
    }
    if (!(t > 0.0)) return;
    Vector delta(k);
    for (Eigen::Index a = 0; a < k; ++a) {
        const double next = std::clamp(alpha(free[a]) + t * dir(a), 0.0, upper);
        delta(a) = next - alpha(free[a]);
        alpha(free[a]) = next;
    }
    x.noalias() += zf.transpose() * delta;
}

}  // namespace

HingeDualResult solve_hinge_dual(const Matrix& signed_rows, const Vector& v, double upper,
                                 double tol, int max_sweeps, std::uint64_t seed) {
    const Eigen::Index m = signed_rows.rows();
    if (signed_rows.cols() != v.size()) throw std::invalid_argument("hinge dual: dimension mismatch");
    if (!(tol > 0.0)) throw std::invalid_argument("hinge dual: tol must be positive");
    HingeDualResult result{v, Vector::Zero(m), 0};
    if (m == 0) return result;

    const Vector norms_sq = signed_rows.rowwise().squaredNorm();
    std::vector<Eigen::Index> order(m);
    std::iota(order.begin(), order.end(), Eigen::Index{0});
    Rng rng(seed);

    Vector& x = result.x;
    Vector& alpha = result.alpha;
    for (int sweep = 1; sweep <= max_sweeps; ++sweep) {
        rng.shuffle(order);
        double largest_move = 0.0;
        for (Eigen::Index j : order) {
            if (norms_sq(j) == 0.0) continue;
            const double grad = 1.0 - signed_rows.row(j).dot(x);
            const double next = std::clamp(alpha(j) + grad / norms_sq(j), 0.0, upper);
            const double delta = next - alpha(j);
            if (delta == 0.0) continue;
            alpha(j) = next;
            x.noalias() += delta * signed_rows.row(j).transpose();
            largest_move = std::max(largest_move, std::abs(delta) * std::sqrt(norms_sq(j)));
        }
        result.sweeps = sweep;
        if (largest_move < tol) return result;
        face_newton_step(signed_rows, upper, alpha, x);
    }
    throw std::runtime_error("hinge dual: no convergence after " + std::to_string(max_sweeps) +
                             " sweeps (tolerance too tight)");
}

HingeSum::HingeSum(Matrix rows, Vector labels, double scale, double tol, double margin_tol)
    : signed_rows_(std::move(rows)), scale_(scale), tol_(tol), margin_tol_(margin_tol) {
    if (signed_rows_.rows() != labels.size())
        throw std::invalid_argument("HingeSum: row count != label count");
    if (!(scale > 0.0)) throw std::invalid_argument("HingeSum: scale must be positive");
    if (!(tol > 0.0)) throw std::invalid_argument("HingeSum: tol must be positive");
    for (Eigen::Index j = 0; j < labels.size(); ++j) {
        if (labels(j) != 1.0 && labels(j) != -1.0)
            throw std::invalid_argument("HingeSum: labels must be +1 or -1");
        signed_rows_.row(j) *= labels(j);
    }
}

double HingeSum::evaluate(const Vector& x) const {
    if (signed_rows_.rows() == 0) return 0.0;
    const Vector margins = signed_rows_ * x;
    return scale_ * (1.0 - margins.array()).max(0.0).sum();
}

Vector HingeSum::prox(const Vector& v, double step) const {
    require_step(step);
    const int cap = std::max(10 * samples(), 10);
    return solve_hinge_dual(signed_rows_, v, scale_ * step, tol_, cap, 0x5eedULL).x;
}

double HingeSum::subdiff_dist(const Vector& x, const Vector& y) const {
    const Eigen::Index m = signed_rows_.rows();
    Vector residual = y;
    std::vector<Eigen::Index> ties;
    if (m > 0) {
        const Vector margins = signed_rows_ * x;
        for (Eigen::Index j = 0; j < m; ++j) {
            const double slack = 1.0 - margins(j);
            if (std::abs(slack) <= margin_tol_)
                ties.push_back(j);
            else if (slack > 0.0)
                residual += scale_ * signed_rows_.row(j).transpose();
        }
    }
    if (ties.empty()) return residual.norm();

    // min over theta in [0,1]^ties of || residual + scale * sum theta_j z_j ||.
    std::vector<double> theta(ties.size(), 0.0);
    std::vector<double> norms_sq(ties.size());
    for (std::size_t k = 0; k < ties.size(); ++k)
        norms_sq[k] = scale_ * scale_ * signed_rows_.row(ties[k]).squaredNorm();
    for (int sweep = 0; sweep < 100000; ++sweep) {
        double largest = 0.0;
        for (std::size_t k = 0; k < ties.size(); ++k) {
            if (norms_sq[k] == 0.0) continue;
            const auto row = signed_rows_.row(ties[k]);
            const double grad = scale_ * row.dot(residual);
            const double next = std::clamp(theta[k] - grad / norms_sq[k], 0.0, 1.0);
            const double delta = next - theta[k];
            if (delta == 0.0) continue;
            theta[k] = next;
            residual.noalias() += delta * scale_ * row.transpose();
            largest = std::max(largest, std::abs(delta) * std::sqrt(norms_sq[k]));
        }
        if (largest < 1e-15) break;
    }
    return residual.norm();
}

}  // namespace dsadmm
