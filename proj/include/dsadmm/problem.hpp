#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "dsadmm/prox.hpp"

namespace dsadmm {

using SparseRow = std::vector<std::pair<int, double>>;

/// Rows of (0-based index, value) pairs with one label per row.
struct Dataset {
    std::vector<SparseRow> rows;
    std::vector<double> labels;
    int d = 0;

    std::size_t size() const { return rows.size(); }
    bool empty() const { return rows.empty(); }
    Matrix dense() const;
    Vector label_vector() const;
    SparseRowMatrix sparse() const;
    /// FNV-1a over dimensions, labels and entries.
    std::uint64_t fingerprint() const;
};

class ParseError : public std::runtime_error {
public:
    ParseError(const std::string& what, int line)
        : std::runtime_error(what + " (line " + std::to_string(line) + ")"), line_(line) {}
    int line() const { return line_; }

private:
    int line_;
};

class ConvergenceError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// LIBSVM text: `label idx:val idx:val ...` with 1-based indices. When
/// `classification` is set every label must be +1 or -1.
Dataset parse_libsvm(std::istream& in, bool classification = false);
Dataset parse_libsvm(const std::filesystem::path& path, bool classification = false);

/// Divides each feature by its largest absolute value (features that are
/// identically zero are left alone).
void normalize_max_abs(Dataset& ds);

/// Shuffles rows with `seed` and deals them round-robin to n parts.
std::vector<Dataset> partition_even(const Dataset& ds, int n, std::uint64_t seed);

enum class ProblemKind { Lasso, Svm, Custom };

/// min_x sum_i f_i(x) + g_i(x), one (f_i, g_i) pair per agent.
struct CompositeProblem {
    ProblemKind kind = ProblemKind::Custom;
    int n = 0;
    int d = 0;
    std::vector<ProxPtr> f;
    std::vector<ProxPtr> g;

    // Centralized description, used by the reference solvers.
    double lambda = 0.0;
    std::size_t total_samples = 0;
    Matrix data;      // all rows, m x d
    Vector targets;   // responses (Lasso) or labels (SVM)
    std::uint64_t dataset_hash = 0;

    double objective(const Vector& x) const;
};

/// Builds a Custom problem from explicit per-agent pairs.
CompositeProblem make_custom(std::vector<ProxPtr> f, std::vector<ProxPtr> g, int d);

/// f_i = (1/2m)||A_i x - b_i||^2, g_i = (lambda/n)||x||_1; lambda defaults to 1/m.
CompositeProblem make_lasso(const Dataset& ds, int n, std::optional<double> lambda,
                            std::uint64_t seed, double dense_limit = 1e7);

/// f_i = (1/m) sum_{j in S_i} max(0, 1 - b_j a_j^T x), g_i = (lambda/2n)||x||^2;
/// lambda defaults to 1/m.
CompositeProblem make_svm(const Dataset& ds, int n, std::optional<double> lambda,
                          std::uint64_t seed, double hinge_tol = 1e-10);

struct Reference {
    Vector x;
    double objective = 0.0;
};

/// High-precision centralized solution. Lasso: FISTA with adaptive restart
/// until the gradient-mapping norm is <= tol. SVM: dual coordinate ascent
/// until a sweep moves x by less than tol. Throws ConvergenceError after
/// 10^6 iterations.
Reference reference_solution(const CompositeProblem& p, double tol = 1e-12);

/// Cache file name for a problem: keyed by dataset hash, lambda, n and kind.
std::string reference_cache_key(const CompositeProblem& p);
void save_reference(const std::filesystem::path& file, const Reference& ref);
std::optional<Reference> load_reference(const std::filesystem::path& file, int d);

/// Loads the reference from cache_dir when present, otherwise solves and
/// stores it.
Reference cached_reference(const CompositeProblem& p, const std::filesystem::path& cache_dir,
                           double tol = 1e-12);

struct SynthSpec {
    int n_samples = 100;
    int d = 20;
    std::uint64_t seed = 1;
    double noise = 0.01;
    /// Equicorrelation between features; 0 gives i.i.d. standard normal rows.
    double correlation = 0.0;
};

struct SyntheticLasso {
    Dataset data;
    Vector planted;
};

/// Gaussian rows, planted x with ceil(10% of d) nonzeros of magnitude in
/// [1, 2] and random sign, responses A x + noise * N(0, 1).
SyntheticLasso synth_lasso(const SynthSpec& spec);

/// Gaussian rows labelled by the sign of a planted hyperplane (separable).
Dataset synth_svm(const SynthSpec& spec);

}  // namespace dsadmm
