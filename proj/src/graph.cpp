#include "beliefsim/graph.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <queue>
#include <string>

#include "beliefsim/errors.hpp"

namespace beliefsim {

Network Network::from_neighborhoods(std::vector<std::vector<int>> nbrs) {
    Network net;
    net.n = static_cast<int>(nbrs.size());
    if (net.n == 0) throw validation_error("network: at least one node required");
    for (std::size_t i = 0; i < nbrs.size(); ++i) {
        auto& row = nbrs[i];
        std::sort(row.begin(), row.end());
        for (std::size_t k = 0; k < row.size(); ++k) {
            if (row[k] < 0 || row[k] >= net.n)
                throw validation_error("network[" + std::to_string(i) + "]: index " +
                                       std::to_string(row[k]) + " out of range [0," +
                                       std::to_string(net.n - 1) + "]");
            if (k > 0 && row[k] == row[k - 1])
                throw validation_error("network[" + std::to_string(i) + "]: duplicate neighbor " +
                                       std::to_string(row[k]));
        }
    }
    net.neighbors = std::move(nbrs);
    return net;
}

bool Network::has_edge(int i, int j) const {
    const auto& row = neighbors[static_cast<std::size_t>(i)];
    return std::binary_search(row.begin(), row.end(), j);
}

Matrix Network::adjacency() const {
    Matrix a(n, n);
    for (int i = 0; i < n; ++i)
        for (int j : neighbors[static_cast<std::size_t>(i)]) a(i, j) = 1.0;
    return a;
}

namespace {

// Successor lists along the direction of information flow: succ[j] holds
// every i with j in N(i), i.e. the nodes reading j's report.
std::vector<std::vector<int>> successors(const Network& net) {
    std::vector<std::vector<int>> succ(static_cast<std::size_t>(net.n));
    for (int i = 0; i < net.n; ++i)
        for (int j : net.neighbors[static_cast<std::size_t>(i)])
            succ[static_cast<std::size_t>(j)].push_back(i);
    return succ;
}

// BFS hop distances from `src` over the given edge lists; -1 marks unreachable.
std::vector<int> bfs_levels(const std::vector<std::vector<int>>& edges, int src) {
    std::vector<int> level(edges.size(), -1);
    std::queue<int> q;
    level[static_cast<std::size_t>(src)] = 0;
    q.push(src);
    while (!q.empty()) {
        const int u = q.front();
        q.pop();
        for (int v : edges[static_cast<std::size_t>(u)])
            if (level[static_cast<std::size_t>(v)] < 0) {
                level[static_cast<std::size_t>(v)] = level[static_cast<std::size_t>(u)] + 1;
                q.push(v);
            }
    }
    return level;
}

void require_strongly_connected(const Network& net, const char* who) {
    if (!is_strongly_connected(net))
        throw validation_error(std::string(who) + ": network must be strongly connected");
}

} // namespace

bool is_strongly_connected(const Network& net) {
    // Node 0 must reach everyone along the flow direction and be reached by
    // everyone; neighbor lists are exactly the reverse edges.
    const auto fwd = bfs_levels(successors(net), 0);
    for (int l : fwd)
        if (l < 0) return false;
    const auto bwd = bfs_levels(net.neighbors, 0);
    for (int l : bwd)
        if (l < 0) return false;
    return true;
}

bool is_aperiodic(const Network& net) {
    require_strongly_connected(net, "is_aperiodic");
    const auto succ = successors(net);
    const auto level = bfs_levels(succ, 0);
    long g = 0;
    for (int u = 0; u < net.n; ++u)
        for (int v : succ[static_cast<std::size_t>(u)]) {
            const long d = static_cast<long>(level[static_cast<std::size_t>(u)]) + 1 -
                           level[static_cast<std::size_t>(v)];
            g = std::gcd(g, std::abs(d));
        }
    return g == 1;
}

int diameter(const Network& net) {
    require_strongly_connected(net, "diameter");
    const auto succ = successors(net);
    int diam = 0;
    for (int s = 0; s < net.n; ++s) {
        const auto level = bfs_levels(succ, s);
        for (int l : level) diam = std::max(diam, l);
    }
    return diam;
}

PerronResult perron(const Network& net, double tol, long max_iter) {
    require_strongly_connected(net, "perron");
    return perron_left(net.adjacency(), tol, max_iter);
}

Matrix normalized_adjacency(const Network& net) {
    Matrix t(net.n, net.n);
    for (int i = 0; i < net.n; ++i) {
        const int d = net.degree(i);
        if (d == 0)
            throw validation_error("normalized_adjacency: node " + std::to_string(i) +
                                   " has no neighbors");
        for (int j : net.neighbors[static_cast<std::size_t>(i)])
            t(i, j) = 1.0 / static_cast<double>(d);
    }
    return t;
}

std::vector<double> stationary_distribution(const Matrix& p, double tol) {
    if (p.rows != p.cols || p.rows == 0)
        throw validation_error("stationary_distribution: matrix must be square");
    const int n = p.rows;
    std::vector<std::vector<int>> support(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) {
        double row_sum = 0.0;
        for (int j = 0; j < n; ++j) {
            const double x = p(i, j);
            if (!(x >= 0.0))
                throw validation_error("stationary_distribution: entries must be >= 0");
            row_sum += x;
            if (x > 0.0) support[static_cast<std::size_t>(i)].push_back(j);
        }
        if (std::abs(row_sum - 1.0) > 1e-9)
            throw validation_error("stationary_distribution: row " + std::to_string(i) +
                                   " sums to " + std::to_string(row_sum) + ", expected 1");
    }
    if (!is_strongly_connected(Network::from_neighborhoods(support)))
        throw validation_error("stationary_distribution: chain is reducible");

    // (P^T - I) s = 0 with the last equation replaced by sum(s) = 1. The
    // replaced row is redundant for an irreducible chain, so the system is
    // square and regular; no aperiodicity needed anywhere.
    Matrix m(n, n);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) m(i, j) = p(j, i) - (i == j ? 1.0 : 0.0);
    for (int j = 0; j < n; ++j) m(n - 1, j) = 1.0;
    std::vector<double> b(static_cast<std::size_t>(n), 0.0);
    b.back() = 1.0;
    std::vector<double> s = solve_linear(std::move(m), std::move(b));

    double total = 0.0;
    for (double x : s) total += x;
    for (double& x : s) x /= total;
    for (int i = 0; i < n; ++i)
        if (!(s[static_cast<std::size_t>(i)] > 0.0))
            throw numeric_error("stationary_distribution: nonpositive entry in solution");

    const auto check = vec_mat(s, p);
    for (int j = 0; j < n; ++j)
        if (std::abs(check[static_cast<std::size_t>(j)] - s[static_cast<std::size_t>(j)]) >
            std::max(tol, 1e-12))
            throw numeric_error("stationary_distribution: residual exceeds tolerance");
    return s;
}

SpectralData analyze_network(const Network& net, double tol, long max_iter) {
    require_strongly_connected(net, "analyze_network");
    SpectralData sd;
    const PerronResult pr = perron(net, tol, max_iter);
    sd.spectral_radius = pr.value;
    sd.centrality = pr.left_vector;
    sd.norm_adjacency = normalized_adjacency(net);
    sd.stationary = stationary_distribution(sd.norm_adjacency, tol);
    sd.diameter = diameter(net);
    sd.aperiodic = is_aperiodic(net);
    return sd;
}

} // namespace beliefsim
