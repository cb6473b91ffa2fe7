#pragma once

#include <span>
#include <string>
#include <vector>

#include "beliefsim/linalg.hpp"
#include "beliefsim/prob.hpp"
#include "beliefsim/rng.hpp"

namespace beliefsim {

/// Divergences below this are treated as exactly zero when deciding whether an
/// agent can tell two states apart (identical rows produce an exact 0.0, so
/// this guard only absorbs float dust from genuinely distinct rows).
inline constexpr double kDivergenceZeroTol = 1e-13;

/// The finite set of possible worlds. `truth` indexes the realized state;
/// `nature_prior` is only used when the realized state is sampled rather than
/// pinned (empty means uniform).
struct StateSpace {
    std::vector<std::string> states;
    int truth = 0;
    Dist nature_prior; // optional

    int n_states() const { return static_cast<int>(states.size()); }
    int index_of(const std::string& label) const; // -1 when absent
    void validate() const;
    int sample_truth(Substream& rng) const;
};

/// Per-agent conditional signal distributions. `tables[i]` has one row per
/// state of the world and one column per signal in agent i's private signal
/// alphabet (alphabets may differ across agents). Rows are validated to be
/// distributions; entries must be strictly positive unless
/// `allow_zero_likelihoods` is set, and even then *using* a zero-likelihood
/// entry during an update is a hard runtime error, because a belief that hits
/// an exact zero can never recover under multiplicative updating.
struct SignalModel {
    std::vector<Matrix> tables;
    bool allow_zero_likelihoods = false;

    int n_agents() const { return static_cast<int>(tables.size()); }
    int n_signals(int agent) const { return tables[static_cast<std::size_t>(agent)].cols; }
    double likelihood(int agent, int state, int signal) const {
        return tables[static_cast<std::size_t>(agent)](state, signal);
    }
    /// Natural log of the likelihood; throws numeric_error on a zero entry.
    double log_likelihood(int agent, int state, int signal) const;
    void validate(int n_states) const;
};

/// Initial (time-zero) priors, one distribution per agent.
struct InitialPriors {
    std::vector<Dist> per_agent;

    static InitialPriors uniform(int n_agents, int n_states);
    void validate(int n_agents, int n_states) const;
    /// Log prior ratios log(nu_i(theta_check)/nu_i(truth)) per agent.
    std::vector<double> prior_log_ratios(int truth, int theta_check) const;
};

/// KL divergence sum_s p(s) log(p(s)/q(s)), natural log. Zero-probability
/// p-entries contribute nothing; q(s) == 0 with p(s) > 0 is rejected.
double kl_divergence(std::span<const double> p, std::span<const double> q);

/// n_agents x n_states matrix whose (i, k) entry is the negative KL divergence
/// between agent i's signal distribution under the realized state and under
/// state k. Entries are <= 0 with the realized-state column exactly zero; the
/// magnitude is the per-round information agent i's signals carry against k.
Matrix signal_divergences(const SignalModel& sig, int truth);

struct IdentifiabilityReport {
    bool identifiable = false;
    /// witnesses[k] lists the agents whose signals distinguish state k from
    /// the realized state; empty at the realized state itself.
    std::vector<std::vector<int>> witnesses;
};

/// The realized state is globally identifiable when every other state has at
/// least one witness somewhere in the population.
IdentifiabilityReport check_identifiability(const SignalModel& sig, int truth);

/// Draws one signal for `agent` conditioned on the realized state.
int sample_signal(const SignalModel& sig, int agent, int truth_state, Substream& rng);

} // namespace beliefsim
