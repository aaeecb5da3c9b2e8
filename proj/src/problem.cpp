#include "dsadmm/problem.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <iomanip>
#include <sstream>

#include "dsadmm/rng.hpp"

namespace dsadmm {

namespace {

constexpr std::uint64_t kFnvOffset = 1469598103934665603ULL;
constexpr std::uint64_t kFnvPrime = 1099511628211ULL;

template <class T>
void fnv_mix(std::uint64_t& h, const T& value) {
    unsigned char bytes[sizeof(T)];
    std::memcpy(bytes, &value, sizeof(T));
    for (unsigned char b : bytes) {
        h ^= b;
        h *= kFnvPrime;
    }
}

Matrix dense_rows(const Dataset& ds) { return ds.dense(); }

void require_nonempty(const Dataset& ds, const char* who) {
    if (ds.empty()) throw std::invalid_argument(std::string(who) + ": dataset has no rows");
}

}  // namespace

Matrix Dataset::dense() const {
    Matrix a = Matrix::Zero(static_cast<Eigen::Index>(rows.size()), d);
    for (std::size_t r = 0; r < rows.size(); ++r)
        for (auto [idx, val] : rows[r]) a(static_cast<Eigen::Index>(r), idx) = val;
    return a;
}

Vector Dataset::label_vector() const {
    return Eigen::Map<const Vector>(labels.data(), static_cast<Eigen::Index>(labels.size()));
}

SparseRowMatrix Dataset::sparse() const {
    std::vector<Eigen::Triplet<double>> triplets;
    for (std::size_t r = 0; r < rows.size(); ++r)
        for (auto [idx, val] : rows[r]) triplets.emplace_back(static_cast<int>(r), idx, val);
    SparseRowMatrix a(static_cast<Eigen::Index>(rows.size()), d);
    a.setFromTriplets(triplets.begin(), triplets.end());
    return a;
}

std::uint64_t Dataset::fingerprint() const {
    std::uint64_t h = kFnvOffset;
    fnv_mix(h, d);
    fnv_mix(h, rows.size());
    for (std::size_t r = 0; r < rows.size(); ++r) {
        fnv_mix(h, labels[r]);
        fnv_mix(h, rows[r].size());
        for (auto [idx, val] : rows[r]) {
            fnv_mix(h, idx);
            fnv_mix(h, val);
        }
    }
    return h;
}

Dataset parse_libsvm(std::istream& in, bool classification) {
    Dataset ds;
    std::string line;
    int line_no = 0;
    int max_index = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
        std::istringstream fields(line);
        std::string token;
        fields >> token;
        double label = 0.0;
        try {
            std::size_t used = 0;
            label = std::stod(token, &used);
            if (used != token.size()) throw std::invalid_argument(token);
        } catch (const std::exception&) {
            throw ParseError("libsvm: bad label '" + token + "'", line_no);
        }
        if (classification && label != 1.0 && label != -1.0)
            throw ParseError("libsvm: classification label must be +1 or -1", line_no);
        SparseRow row;
        int previous = 0;
        while (fields >> token) {
            const auto colon = token.find(':');
            if (colon == std::string::npos || colon == 0 || colon + 1 == token.size())
                throw ParseError("libsvm: malformed feature '" + token + "'", line_no);
            int index = 0;
            double value = 0.0;
            try {
                std::size_t used = 0;
                index = std::stoi(token.substr(0, colon), &used);
                if (used != colon) throw std::invalid_argument(token);
                const std::string rest = token.substr(colon + 1);
                value = std::stod(rest, &used);
                if (used != rest.size()) throw std::invalid_argument(token);
            } catch (const std::exception&) {
                throw ParseError("libsvm: malformed feature '" + token + "'", line_no);
            }
            if (index < 1) throw ParseError("libsvm: feature index must be >= 1", line_no);
            if (index <= previous)
                throw ParseError("libsvm: feature indices must be increasing", line_no);
            previous = index;
            max_index = std::max(max_index, index);
            row.emplace_back(index - 1, value);
        }
        ds.rows.push_back(std::move(row));
        ds.labels.push_back(label);
    }
    ds.d = max_index;
    return ds;
}

Dataset parse_libsvm(const std::filesystem::path& path, bool classification) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("libsvm: cannot open " + path.string());
    return parse_libsvm(in, classification);
}

void normalize_max_abs(Dataset& ds) {
    std::vector<double> peak(ds.d, 0.0);
    for (const auto& row : ds.rows)
        for (auto [idx, val] : row) peak[idx] = std::max(peak[idx], std::abs(val));
    for (auto& row : ds.rows)
        for (auto& [idx, val] : row)
            if (peak[idx] > 0.0) val /= peak[idx];
}

std::vector<Dataset> partition_even(const Dataset& ds, int n, std::uint64_t seed) {
    if (n <= 0) throw std::invalid_argument("partition_even: n must be positive");
    if (static_cast<std::size_t>(n) > ds.size())
        throw std::invalid_argument("partition_even: more agents than rows");
    std::vector<std::size_t> order(ds.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
    Rng rng(seed);
    rng.shuffle(order);
    std::vector<Dataset> parts(n);
    for (auto& part : parts) part.d = ds.d;
    for (std::size_t k = 0; k < order.size(); ++k) {
        auto& part = parts[k % static_cast<std::size_t>(n)];
        part.rows.push_back(ds.rows[order[k]]);
        part.labels.push_back(ds.labels[order[k]]);
    }
    return parts;
}

double CompositeProblem::objective(const Vector& x) const {
    double total = 0.0;
    for (int i = 0; i < n; ++i) total += f[i]->evaluate(x) + g[i]->evaluate(x);
    return total;
}

CompositeProblem make_custom(std::vector<ProxPtr> f, std::vector<ProxPtr> g, int d) {
    if (f.empty() || f.size() != g.size())
        throw std::invalid_argument("make_custom: need one (f, g) pair per agent");
    CompositeProblem p;
    p.kind = ProblemKind::Custom;
    p.n = static_cast<int>(f.size());
    p.d = d;
    p.f = std::move(f);
    p.g = std::move(g);
    return p;
}

CompositeProblem make_lasso(const Dataset& ds, int n, std::optional<double> lambda,
                            std::uint64_t seed, double dense_limit) {
    require_nonempty(ds, "make_lasso");
    const double m = static_cast<double>(ds.size());
    const double lam = lambda.value_or(1.0 / m);
    if (!(lam > 0.0)) throw std::invalid_argument("make_lasso: lambda must be positive");
    CompositeProblem p;
    p.kind = ProblemKind::Lasso;
    p.n = n;
    p.d = ds.d;
    p.lambda = lam;
    p.total_samples = ds.size();
    p.data = dense_rows(ds);
    p.targets = ds.label_vector();
    p.dataset_hash = ds.fingerprint();
    for (const auto& part : partition_even(ds, n, seed)) {
        p.f.push_back(std::make_shared<QuadraticLoss>(part.sparse(), part.label_vector(), 1.0 / m,
                                                      dense_limit));
        p.g.push_back(std::make_shared<L1Norm>(lam / n));
    }
    return p;
}

CompositeProblem make_svm(const Dataset& ds, int n, std::optional<double> lambda,
                          std::uint64_t seed, double hinge_tol) {
    require_nonempty(ds, "make_svm");
    for (double label : ds.labels)
        if (label != 1.0 && label != -1.0)
            throw std::invalid_argument("make_svm: labels must be +1 or -1");
    const double m = static_cast<double>(ds.size());
    const double lam = lambda.value_or(1.0 / m);
    if (!(lam > 0.0)) throw std::invalid_argument("make_svm: lambda must be positive");
    CompositeProblem p;
    p.kind = ProblemKind::Svm;
    p.n = n;
    p.d = ds.d;
    p.lambda = lam;
    p.total_samples = ds.size();
    p.data = dense_rows(ds);
    p.targets = ds.label_vector();
    p.dataset_hash = ds.fingerprint();
    for (const auto& part : partition_even(ds, n, seed)) {
        p.f.push_back(std::make_shared<HingeSum>(part.dense(), part.label_vector(), 1.0 / m, hinge_tol));
        p.g.push_back(std::make_shared<SquaredL2>(lam / n));
    }
    return p;
}

namespace {

Reference lasso_reference(const CompositeProblem& p, double tol) {
    const double m = static_cast<double>(p.total_samples);
    const Matrix gram = p.data.transpose() * p.data / m;
    const Vector corr = p.data.transpose() * p.targets / m;
    const double lam = p.lambda;
    Eigen::SelfAdjointEigenSolver<Matrix> solver(gram, Eigen::EigenvaluesOnly);
    const double lip = std::max(solver.eigenvalues().maxCoeff(), 1e-300);
    const double step = 1.0 / lip;

    auto gradient = [&](const Vector& x) -> Vector { return gram * x - corr; };
    auto mapping_norm = [&](const Vector& x) {
        return lip * (x - prox_l1(x - step * gradient(x), step, lam)).norm();
    };

    Vector x = Vector::Zero(p.d);
    Vector y = x;
    double t = 1.0;
    constexpr long kMaxIters = 1000000;
    for (long k = 0; k < kMaxIters; ++k) {
        const Vector next = prox_l1(y - step * gradient(y), step, lam);
        if (mapping_norm(next) <= tol) return {next, p.objective(next)};
        if ((y - next).dot(next - x) > 0.0) {
            t = 1.0;
            y = next;
        } else {
            const double t_next = 0.5 * (1.0 + std::sqrt(1.0 + 4.0 * t * t));
            y = next + ((t - 1.0) / t_next) * (next - x);
            t = t_next;
        }
        x = next;
    }
    throw ConvergenceError("reference_solution: FISTA hit the iteration cap");
}

Reference svm_reference(const CompositeProblem& p, double tol) {
    const double m = static_cast<double>(p.total_samples);
    Matrix signed_rows = p.data;
    for (Eigen::Index j = 0; j < signed_rows.rows(); ++j) signed_rows.row(j) *= p.targets(j);
    // argmin (1/m) sum hinge + (lambda/2)||x||^2 is the hinge prox at 0 with step 1/lambda.
    const double upper = 1.0 / (m * p.lambda);
    try {
        auto result = solve_hinge_dual(signed_rows, Vector::Zero(p.d), upper, tol, 1000000, 0x5eedULL);
        return {result.x, p.objective(result.x)};
    } catch (const std::runtime_error& e) {
        throw ConvergenceError(std::string("reference_solution: ") + e.what());
    }
}

}  // namespace

Reference reference_solution(const CompositeProblem& p, double tol) {
    switch (p.kind) {
        case ProblemKind::Lasso:
            return lasso_reference(p, tol);
        case ProblemKind::Svm:
            return svm_reference(p, tol);
        case ProblemKind::Custom:
            break;
    }
    throw std::invalid_argument("reference_solution: only Lasso and SVM problems are supported");
}

std::string reference_cache_key(const CompositeProblem& p) {
    std::uint64_t h = kFnvOffset;
    fnv_mix(h, p.dataset_hash);
    fnv_mix(h, p.lambda);
    fnv_mix(h, p.n);
    fnv_mix(h, static_cast<int>(p.kind));
    char buf[40];
    std::snprintf(buf, sizeof(buf), "ref_%016llx.txt", static_cast<unsigned long long>(h));
    return buf;
}

void save_reference(const std::filesystem::path& file, const Reference& ref) {
    std::ofstream out(file);
    if (!out) throw std::runtime_error("cannot write reference cache " + file.string());
    out << std::setprecision(17);
    out << ref.x.size() << '\n';
    for (Eigen::Index k = 0; k < ref.x.size(); ++k) out << ref.x(k) << '\n';
    out << ref.objective << '\n';
}

std::optional<Reference> load_reference(const std::filesystem::path& file, int d) {
    std::ifstream in(file);
    if (!in) return std::nullopt;
    long dim = 0;
    if (!(in >> dim) || dim != d) return std::nullopt;
    Reference ref;
    ref.x.resize(d);
    for (int k = 0; k < d; ++k)
        if (!(in >> ref.x(k))) return std::nullopt;
    if (!(in >> ref.objective)) return std::nullopt;
    return ref;
}

Reference cached_reference(const CompositeProblem& p, const std::filesystem::path& cache_dir,
                           double tol) {
    const auto file = cache_dir / reference_cache_key(p);
    if (auto hit = load_reference(file, p.d)) return *hit;
    Reference ref = reference_solution(p, tol);
    std::filesystem::create_directories(cache_dir);
    save_reference(file, ref);
    return ref;
}

namespace {

Matrix gaussian_rows(const SynthSpec& spec, Rng& rng) {
    if (spec.n_samples <= 0 || spec.d <= 0)
        throw std::invalid_argument("synthetic data: n_samples and d must be positive");
    if (!(spec.correlation >= 0.0 && spec.correlation < 1.0))
        throw std::invalid_argument("synthetic data: correlation must be in [0, 1)");
    const double own = std::sqrt(1.0 - spec.correlation);
    const double shared = std::sqrt(spec.correlation);
    Matrix a(spec.n_samples, spec.d);
    for (int r = 0; r < spec.n_samples; ++r) {
        const double common = spec.correlation > 0.0 ? rng.normal() : 0.0;
        for (int c = 0; c < spec.d; ++c) a(r, c) = own * rng.normal() + shared * common;
    }
    return a;
}

Dataset to_dataset(const Matrix& a, const Vector& labels) {
    Dataset ds;
    ds.d = static_cast<int>(a.cols());
    for (Eigen::Index r = 0; r < a.rows(); ++r) {
        SparseRow row;
        for (Eigen::Index c = 0; c < a.cols(); ++c)
            if (a(r, c) != 0.0) row.emplace_back(static_cast<int>(c), a(r, c));
        ds.rows.push_back(std::move(row));
        ds.labels.push_back(labels(r));
    }
    return ds;
}

}  // namespace

SyntheticLasso synth_lasso(const SynthSpec& spec) {
    Rng rng(spec.seed);
    const Matrix a = gaussian_rows(spec, rng);
    const int support = static_cast<int>(std::ceil(0.1 * spec.d));
    std::vector<int> coords(spec.d);
    for (int c = 0; c < spec.d; ++c) coords[c] = c;
    rng.shuffle(coords);
    Vector planted = Vector::Zero(spec.d);
    for (int k = 0; k < support; ++k) {
        const double magnitude = 1.0 + rng.uniform();
        planted(coords[k]) = rng.uniform() < 0.5 ? -magnitude : magnitude;
    }
    Vector y = a * planted;
    for (Eigen::Index r = 0; r < y.size(); ++r) y(r) += spec.noise * rng.normal();
    return {to_dataset(a, y), planted};
}

Dataset synth_svm(const SynthSpec& spec) {
    Rng rng(spec.seed);
    const Matrix a = gaussian_rows(spec, rng);
    Vector w(spec.d);
    for (int c = 0; c < spec.d; ++c) w(c) = rng.normal();
    const Vector scores = a * w;
    Vector labels(spec.n_samples);
    for (int r = 0; r < spec.n_samples; ++r) labels(r) = scores(r) >= 0.0 ? 1.0 : -1.0;
    return to_dataset(a, labels);
}

}  // namespace dsadmm
