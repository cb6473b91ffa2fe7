#pragma once

#include <span>
#include <string>
#include <variant>
#include <vector>

#include "beliefsim/graph.hpp"
#include "beliefsim/model.hpp"
#include "beliefsim/prob.hpp"

namespace beliefsim {

/// Deterministic positive weight sequence x_1, x_2, ... used by the
/// time-varying rule to throttle how strongly neighbor reports enter each
/// round. The kinds cover the regimes of interest:
///   power:     c / t^p          (p = 1 is the harmonic sequence)
///   log_power: c / (t ln^2(t+2)) (summable, but with a heavy enough tail
///                                 that network information keeps arriving)
///   geometric: c * p^t          (0 < p < 1: tails die too fast to learn from)
///   constant:  c                 (c = 0 degrades the rule to standalone Bayes)
struct WeightSchedule {
    enum class Kind { power, log_power, geometric, constant };
    Kind kind = Kind::log_power;
    double c = 1.0;
    double p = 1.0;

    double at(long t) const; // t >= 1
    void validate() const;
    const char* kind_name() const;
};

/// Circle rule: every agent treats its unique neighbor's report as the prior
/// and applies one Bayes step on its own signal. The fixed reference prior is
/// shared by all agents and only shows up in diagnostics (it cancels from the
/// update itself). Only valid on a directed cycle.
struct CommonFixedPrior {
    Dist prior; // empty means uniform
};

/// Each round every agent picks one neighbor at random (row i of
/// `choice_probs`, defaulting to uniform over N(i)) and applies the circle
/// step with that neighbor's report.
struct RandomWalkNeighbor {
    Matrix choice_probs; // empty means uniform over neighborhoods
};

/// Each agent treats the geometric average of all neighbor reports as its
/// prior each round: new belief ∝ likelihood * (prod_j mu_j)^(1/deg).
struct GeometricAveragePrior {};

/// Self-belief Bayes step plus a vanishing dose of neighbor log-beliefs:
/// log-belief ratios follow phi_i' = phi_i + signal-llr + (x_t/rho) * sum_j phi_j.
/// With a summable schedule the accumulated bias stays bounded, while a slow
/// enough tail still ferries everyone's information across the network.
struct TimeVaryingLogLinear {
    WeightSchedule schedule;
};

/// Fixed self-weight eta on the agent's own previous belief and (1-eta)
/// spread over the neighborhood average:
/// new belief ∝ likelihood * mu_i^eta * (prod_j mu_j)^((1-eta)/deg).
/// Works on periodic networks, unlike the pure geometric-average rule.
struct WeightedSelfBelief {
    double eta = 0.5;
};

using UpdateRule = std::variant<CommonFixedPrior, RandomWalkNeighbor, GeometricAveragePrior,
                                TimeVaryingLogLinear, WeightedSelfBelief>;

/// Stable name used by configs and outputs: common_prior, random_walk,
/// geometric, time_varying, weighted_self.
std::string rule_name(const UpdateRule& rule);

/// Structural checks of a rule against the network it will run on
/// (degree-1 requirement for the circle rule, choice-matrix support, eta
/// range, schedule parameters).
void validate_rule(const UpdateRule& rule, const Network& net, int n_states);

// ---------------------------------------------------------------------------
// One-agent update operations, linear domain in and out. These are the
// reference implementations; the simulation engine uses the log-domain kernel
// below, and tests pin the two against each other.
// ---------------------------------------------------------------------------

/// General memoryless kernel ("expert mode"): explicit prior tables.
/// new belief ∝ self_prior(k) * lik_i(signal|k) * prod_j nbr_belief_j(k) / nbr_prior_j(k).
/// neighbor vectors are aligned with each other; all distributions must be
/// strictly positive.
Dist memoryless_update(int agent, const Dist& self_prior, const std::vector<Dist>& neighbor_priors,
                       int signal, const std::vector<Dist>& neighbor_beliefs,
                       const SignalModel& sig);

/// Bayes step with the unique neighbor's report as prior. Requires degree 1.
Dist circle_update(const Network& net, int agent, const Dist& neighbor_belief, int signal,
                   const SignalModel& sig);

/// Circle step with a chosen neighbor; `chosen` must be in N(agent).
Dist random_walk_update(const Network& net, int agent, int chosen, const Dist& neighbor_belief,
                        int signal, const SignalModel& sig);

/// neighbor_beliefs must be ordered like net.neighbors[agent] (ascending).
Dist geometric_average_update(const Network& net, int agent,
                              const std::vector<Dist>& neighbor_beliefs, int signal,
                              const SignalModel& sig);

/// x_t must satisfy 0 <= x_t < spectral radius. Implemented through the
/// explicit prior-table route (the kernel above); the engine's log-domain
/// recursion is the production path and the two are cross-checked in tests.
Dist time_varying_update(const Network& net, int agent, const Dist& self_belief,
                         const std::vector<Dist>& neighbor_beliefs, int signal, double x_t,
                         const SpectralData& spectral, const SignalModel& sig);

Dist weighted_self_update(const Network& net, int agent, const Dist& self_belief,
                          const std::vector<Dist>& neighbor_beliefs, int signal, double eta,
                          const SignalModel& sig);

// ---------------------------------------------------------------------------
// Log-domain kernel used by the engine.
// ---------------------------------------------------------------------------

/// Computes agent's next log-belief row from the previous round's full
/// log-belief matrix (n_agents x n_states, flattened row-major). `chosen` is
/// only read for the random-walk rule, `x_t` only for the time-varying rule.
/// The output row is log-normalized. Throws numeric_error on zero likelihood
/// or zero normalizer.
void agent_step_log(const UpdateRule& rule, const Network& net, double spectral_radius,
                    const SignalModel& sig, std::span<const double> prev_log_mu, int n_states,
                    int agent, int signal, int chosen, double x_t, std::span<double> out);

/// The per-round prior ratios a rule effectively applied, in log-ratio form
/// against the realized state: self[i] for the agent's own prior slot and
/// neighbors[i][k] aligned with net.neighbors[i]. `phi_prev` is the previous
/// round's log-belief ratio for one alternative state (one value per agent).
/// These are what the network-aggregate bookkeeping needs; neighbors not
/// consulted in a round (unchosen random-walk neighbors) carry the neighbor's
/// own ratio, which cancels exactly.
struct PriorRatios {
    std::vector<double> self;
    std::vector<std::vector<double>> neighbors;
};

PriorRatios step_prior_ratios(const UpdateRule& rule, const Network& net,
                              std::span<const double> phi_prev, double x_t,
                              double spectral_radius, std::span<const int> choices, int truth,
                              int theta_check);

} // namespace beliefsim
