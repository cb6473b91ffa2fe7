#pragma once

#include <span>
#include <vector>

#include "beliefsim/graph.hpp"
#include "beliefsim/model.hpp"
#include "beliefsim/prob.hpp"

namespace beliefsim {

struct Trajectory;  // engine.hpp
struct RunConfig;   // engine.hpp

// Dense log-domain beliefs for every agent at one point in time.
struct BeliefState {
    int n = 0;
    int n_states = 0;
    long time = 0;
    std::vector<double> log_mu;  // n * n_states, row-major by agent

    std::span<double> agent_row(int i);
    std::span<const double> agent_row(int i) const;
    Dist beliefs(int i) const;
};

// Log belief ratios phi_i(theta) = log mu_i(theta) - log mu_i(truth), one
// column per non-truth state. The truth column is omitted (identically zero).
struct LogRatios {
    int n = 0;
    int truth = 0;
    std::vector<int> false_states;
    Matrix phi;  // n x false_states.size()
};

// Each agent's private Bayesian posterior from its own prior and first signal.
BeliefState bayes_init(const SignalModel& sig, const InitialPriors& priors,
                       std::span<const int> signals);

// Linear-domain belief vector -> componentwise logs (zeros map to -inf).
std::vector<double> log_linearize(const Dist& belief);

LogRatios log_ratios(const BeliefState& state, int truth);

// Reconstruct the full belief distribution of one agent from its ratio row.
// phi_false holds the ratios for the non-truth states in ascending state
// order; the truth slot is implicit.
Dist ratios_to_beliefs(std::span<const double> phi_false, int truth);

// Centrality-weighted initial prior tilt toward theta_check.
double network_bias(const SpectralData& spectral, const InitialPriors& priors, int truth,
                    int theta_check);

// Residuals of the aggregate bookkeeping recursion
//   Phi_t = tr(Xi_t) + Lambda_t + rho * Phi_{t-1} - tr(Xi_t A^T)
// where Phi is the centrality-weighted ratio aggregate, Xi collects the prior
// ratios each agent assigns to itself and its neighbors, and Lambda is the
// weighted sum of realized log-likelihood ratios. `max_edge_residual` checks
// the same step with the exact edge sum in place of the spectral shortcut, so
// it isolates floating-point error from eigenvector error.
struct IdentityReport {
    long steps = 0;
    double max_residual = 0.0;
    long worst_step = 0;
    double mean_residual = 0.0;
    double max_edge_residual = 0.0;
};

IdentityReport aggregate_identity(const Trajectory& traj, const RunConfig& cfg,
                                  const SpectralData& spectral, int theta_check);

}  // namespace beliefsim
