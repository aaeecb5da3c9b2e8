#pragma once

#include <cstdint>
#include <iosfwd>
#include <utility>
#include <vector>

#include <Eigen/Dense>

namespace dsadmm {

using Edge = std::pair<int, int>;

/// Undirected, connected communication graph on agents 0..n-1.
///
/// Edges are stored normalized (first < second) and sorted. Construction
/// rejects self-loops, duplicates, out-of-range endpoints and disconnected
/// edge sets.
class Graph {
public:
    Graph(int n, std::vector<Edge> edges);

    int num_nodes() const { return n_; }
    std::size_t num_edges() const { return edges_.size(); }
    const std::vector<Edge>& edges() const { return edges_; }
    const std::vector<int>& neighbors(int i) const { return adjacency_[i]; }
    int degree(int i) const { return static_cast<int>(adjacency_[i].size()); }
    bool has_edge(int i, int j) const;

    /// Connectivity test usable on candidate edge sets before a Graph exists.
    static bool is_connected(int n, const std::vector<Edge>& edges);

private:
    int n_;
    std::vector<Edge> edges_;
    std::vector<std::vector<int>> adjacency_;
};

Graph gen_ring(int n);
Graph gen_complete(int n);

/// G(n, p) sample conditioned on connectivity. A disconnected draw is
/// discarded and redrawn with seed + 1; gives up after 1000 attempts.
Graph gen_erdos_renyi(int n, double p, std::uint64_t seed);

/// Symmetric doubly stochastic mixing matrix bound to its graph, with the
/// spectrum (descending) computed once at construction.
class MixingMatrix {
public:
    /// Validates symmetry, row sums, sign pattern and spectrum; throws
    /// std::invalid_argument on any violation.
    MixingMatrix(Eigen::MatrixXd weights, Graph graph);

    const Eigen::MatrixXd& weights() const { return w_; }
    const Graph& graph() const { return graph_; }
    int size() const { return static_cast<int>(w_.rows()); }
    double operator()(int i, int j) const { return w_(i, j); }
    const Eigen::VectorXd& eigenvalues() const { return eigenvalues_; }

private:
    Eigen::MatrixXd w_;
    Graph graph_;
    Eigen::VectorXd eigenvalues_;
};

/// W_ij = 1 / (1 + max(d_i, d_j)) on edges, diagonal fills the row to 1.
MixingMatrix metropolis_weights(const Graph& g);

/// rho = 1 - max(|lambda_2|, |lambda_n|). Throws std::domain_error when
/// rho <= 1e-12 (numerically disconnected).
double spectral_gap(const MixingMatrix& w);

/// Edge-list text format: header `n <count>`, then one `i j` per line.
void write_edge_list(std::ostream& out, const Graph& g);
Graph read_edge_list(std::istream& in);

}  // namespace dsadmm
