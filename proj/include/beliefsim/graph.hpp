#pragma once

#include <vector>

#include "beliefsim/linalg.hpp"

namespace beliefsim {

/// A directed observation network. `neighbors[i]` lists the agents whose
/// reported beliefs agent i sees each round (its in-neighborhood), sorted
/// ascending. Equivalently, adjacency()(i, j) == 1 iff j is observed by i,
/// so information flows along the edge j -> i. Self-loops are allowed and
/// mean an agent re-reads its own last report.
struct Network {
    int n = 0;
    std::vector<std::vector<int>> neighbors;

    /// Validates indices, rejects duplicates, sorts each neighborhood.
    static Network from_neighborhoods(std::vector<std::vector<int>> nbrs);

    int degree(int i) const { return static_cast<int>(neighbors[static_cast<std::size_t>(i)].size()); }
    bool has_edge(int i, int j) const; // j observed by i
    Matrix adjacency() const;          // dense 0/1, row i = indicator of N(i)
};

/// True when every agent can reach every other along directed edges.
bool is_strongly_connected(const Network& net);

/// Period test for a strongly connected network: true when the gcd of all
/// directed cycle lengths is 1. Throws validation_error when not strongly
/// connected. Uses BFS level arithmetic (the period divides
/// level(u) + 1 - level(v) for every edge u -> v), which is exact integer
/// computation, not a numeric tolerance check.
bool is_aperiodic(const Network& net);

/// Longest shortest directed path, in hops. Throws when not strongly connected.
int diameter(const Network& net);

/// Dominant eigenvalue and left eigenvector of the adjacency matrix.
/// The left vector is entrywise positive and normalized to sum 1.
/// Requires strong connectivity; see perron_left for the algorithm.
PerronResult perron(const Network& net, double tol = 1e-10, long max_iter = 1'000'000);

/// Row-stochastic matrix obtained by dividing each adjacency row by its degree.
/// Throws validation_error when some agent has no neighbors.
Matrix normalized_adjacency(const Network& net);

/// Stationary row vector s of a row-stochastic matrix: s^T P = s^T, sum(s)=1,
/// solved directly by Gaussian elimination on (P^T - I) with the normalization
/// row appended in place of the redundant equation. Works for periodic chains,
/// where power iteration would not settle. Requires an irreducible chain.
std::vector<double> stationary_distribution(const Matrix& p, double tol = 1e-10);

/// Everything the rate predictions and diagnostics need, computed once.
struct SpectralData {
    double spectral_radius = 0.0;       // of the adjacency matrix
    std::vector<double> centrality;     // left dominant eigenvector, sums to 1
    Matrix norm_adjacency;              // row-stochastic neighbor-averaging matrix
    std::vector<double> stationary;     // stationary vector of norm_adjacency
    int diameter = 0;
    bool aperiodic = false;

    /// Smallest power k for which every entry of a primitive nonnegative
    /// adjacency-like matrix can be argued strictly positive: diameter + 1.
    int positivity_power() const { return diameter + 1; }
};

/// Validates strong connectivity, then computes the full spectral summary.
SpectralData analyze_network(const Network& net, double tol = 1e-10, long max_iter = 1'000'000);

} // namespace beliefsim
