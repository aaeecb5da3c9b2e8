#include "dsadmm/graph.hpp"

#include <algorithm>
#include <cmath>
#include <istream>
#include <ostream>
#include <queue>
#include <set>
#include <sstream>
#include <stdexcept>
#include <string>

#include "dsadmm/rng.hpp"

namespace dsadmm {

Graph::Graph(int n, std::vector<Edge> edges) : n_(n), adjacency_(n > 0 ? n : 0) {
    if (n <= 0) throw std::invalid_argument("Graph: node count must be positive");
    std::set<Edge> seen;
    for (auto [a, b] : edges) {
        if (a < 0 || b < 0 || a >= n || b >= n)
            throw std::invalid_argument("Graph: edge endpoint out of range");
        if (a == b) throw std::invalid_argument("Graph: self-loop on node " + std::to_string(a));
        Edge e = std::minmax(a, b);
        if (!seen.insert(e).second)
            throw std::invalid_argument("Graph: duplicate edge {" + std::to_string(e.first) + "," +
                                        std::to_string(e.second) + "}");
    }
    edges_.assign(seen.begin(), seen.end());
    if (!is_connected(n, edges_)) throw std::invalid_argument("Graph: edge set is not connected");
    for (auto [a, b] : edges_) {
        adjacency_[a].push_back(b);
        adjacency_[b].push_back(a);
    }
    for (auto& adj : adjacency_) std::sort(adj.begin(), adj.end());
}

bool Graph::has_edge(int i, int j) const {
    const auto& adj = adjacency_[i];
    return std::binary_search(adj.begin(), adj.end(), j);
}

bool Graph::is_connected(int n, const std::vector<Edge>& edges) {
    if (n <= 1) return true;
    std::vector<std::vector<int>> adj(n);
    for (auto [a, b] : edges) {
        adj[a].push_back(b);
        adj[b].push_back(a);
    }
    std::vector<char> visited(n, 0);
    std::queue<int> frontier;
    frontier.push(0);
    visited[0] = 1;
    int reached = 1;
    while (!frontier.empty()) {
        int i = frontier.front();
        frontier.pop();
        for (int j : adj[i]) {
            if (!visited[j]) {
                visited[j] = 1;
                ++reached;
                frontier.push(j);
            }
        }
    }
    return reached == n;
}

Graph gen_ring(int n) {
    if (n < 3) throw std::invalid_argument("gen_ring: need n >= 3");
    std::vector<Edge> edges;
    for (int i = 0; i < n; ++i) edges.emplace_back(i, (i + 1) % n);
    return Graph(n, std::move(edges));
}

Graph gen_complete(int n) {
    if (n < 2) throw std::invalid_argument("gen_complete: need n >= 2");
    std::vector<Edge> edges;
    for (int i = 0; i < n; ++i)
        for (int j = i + 1; j < n; ++j) edges.emplace_back(i, j);
    return Graph(n, std::move(edges));
}

Graph gen_erdos_renyi(int n, double p, std::uint64_t seed) {
    if (n < 2) throw std::invalid_argument("gen_erdos_renyi: need n >= 2");
    if (!(p > 0.0 && p <= 1.0)) throw std::invalid_argument("gen_erdos_renyi: need 0 < p <= 1");
    constexpr int kMaxAttempts = 1000;
    for (int attempt = 0; attempt < kMaxAttempts; ++attempt) {
        Rng rng(seed + static_cast<std::uint64_t>(attempt));
        std::vector<Edge> edges;
        for (int i = 0; i < n; ++i)
            for (int j = i + 1; j < n; ++j)
                if (rng.uniform() < p) edges.emplace_back(i, j);
        if (Graph::is_connected(n, edges)) return Graph(n, std::move(edges));
    }
    std::ostringstream msg;
    msg << "gen_erdos_renyi: no connected sample in " << kMaxAttempts << " attempts (n=" << n
        << ", p=" << p << "); p is too small for n";
    throw std::runtime_error(msg.str());
}

MixingMatrix::MixingMatrix(Eigen::MatrixXd weights, Graph graph)
    : w_(std::move(weights)), graph_(std::move(graph)) {
    const int n = graph_.num_nodes();
    if (w_.rows() != n || w_.cols() != n)
        throw std::invalid_argument("MixingMatrix: size does not match graph");
    for (int i = 0; i < n; ++i) {
        if (!(w_(i, i) > 0.0)) throw std::invalid_argument("MixingMatrix: nonpositive diagonal");
        for (int j = 0; j < n; ++j) {
            if (w_(i, j) != w_(j, i)) throw std::invalid_argument("MixingMatrix: not symmetric");
            if (i == j) continue;
            const bool edge = graph_.has_edge(i, j);
            if (edge && !(w_(i, j) > 0.0))
                throw std::invalid_argument("MixingMatrix: zero weight on an edge");
            if (!edge && w_(i, j) != 0.0)
                throw std::invalid_argument("MixingMatrix: nonzero weight off the edge set");
        }
        if (std::abs(w_.row(i).sum() - 1.0) > 1e-12)
            throw std::invalid_argument("MixingMatrix: row sum differs from 1");
    }
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(w_, Eigen::EigenvaluesOnly);
    eigenvalues_ = solver.eigenvalues().reverse();
    if (std::abs(eigenvalues_(0) - 1.0) > 1e-10)
        throw std::invalid_argument("MixingMatrix: largest eigenvalue is not 1");
    if (n > 1 && eigenvalues_(1) >= 1.0 - 1e-12)
        throw std::invalid_argument("MixingMatrix: eigenvalue 1 is not simple");
    if (eigenvalues_(n - 1) <= -1.0 + 1e-12)
        throw std::invalid_argument("MixingMatrix: eigenvalue at or below -1");
}

MixingMatrix metropolis_weights(const Graph& g) {
    const int n = g.num_nodes();
    Eigen::MatrixXd w = Eigen::MatrixXd::Zero(n, n);
    for (auto [i, j] : g.edges()) {
        const double weight = 1.0 / (1.0 + std::max(g.degree(i), g.degree(j)));
        w(i, j) = weight;
        w(j, i) = weight;
    }
    for (int i = 0; i < n; ++i) {
        double off = 0.0;
        for (int j : g.neighbors(i)) off += w(i, j);
        w(i, i) = 1.0 - off;
    }
    return MixingMatrix(std::move(w), g);
}

double spectral_gap(const MixingMatrix& w) {
    const auto& ev = w.eigenvalues();
    const long n = ev.size();
    double worst = 0.0;
    if (n > 1) worst = std::max(std::abs(ev(1)), std::abs(ev(n - 1)));
    const double rho = 1.0 - worst;
    if (rho <= 1e-12) throw std::domain_error("spectral_gap: gap vanishes (graph numerically disconnected)");
    return rho;
}

void write_edge_list(std::ostream& out, const Graph& g) {
    out << "n " << g.num_nodes() << '\n';
    for (auto [i, j] : g.edges()) out << i << ' ' << j << '\n';
}

Graph read_edge_list(std::istream& in) {
    std::string line;
    int n = -1;
    std::vector<Edge> edges;
    int line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
        std::istringstream fields(line);
        if (n < 0) {
            std::string tag;
            if (!(fields >> tag >> n) || tag != "n" || n <= 0)
                throw std::invalid_argument("edge list: bad header on line " + std::to_string(line_no));
            continue;
        }
        int a = 0, b = 0;
        if (!(fields >> a >> b))
            throw std::invalid_argument("edge list: malformed line " + std::to_string(line_no));
        edges.emplace_back(a, b);
    }
    if (n < 0) throw std::invalid_argument("edge list: missing header");
    return Graph(n, std::move(edges));
}

}  // namespace dsadmm
