#include "beliefsim/model.hpp"

#include <cmath>

#include "beliefsim/errors.hpp"

namespace beliefsim {

int StateSpace::index_of(const std::string& label) const {
    for (std::size_t k = 0; k < states.size(); ++k)
        if (states[k] == label) return static_cast<int>(k);
    return -1;
}

void StateSpace::validate() const {
    if (states.size() < 2) throw validation_error("states: at least two states required");
    for (std::size_t a = 0; a < states.size(); ++a)
        for (std::size_t b = a + 1; b < states.size(); ++b)
            if (states[a] == states[b])
                throw validation_error("states: duplicate label '" + states[a] + "'");
    if (truth < 0 || truth >= n_states())
        throw validation_error("truth: index out of range");
    if (!nature_prior.empty())
        validate_distribution(nature_prior, "nature_prior", /*allow_zero=*/true);
}

int StateSpace::sample_truth(Substream& rng) const {
    const Dist prior = nature_prior.empty() ? uniform_dist(n_states()) : nature_prior;
    return sample_discrete(prior, rng);
}

double SignalModel::log_likelihood(int agent, int state, int signal) const {
    const double v = likelihood(agent, state, signal);
    if (v <= 0.0)
        throw numeric_error("zero likelihood used: agent " + std::to_string(agent) +
                            ", state " + std::to_string(state) + ", signal " +
                            std::to_string(signal));
    return std::log(v);
}

void SignalModel::validate(int n_states) const {
    if (tables.empty()) throw validation_error("likelihoods: at least one agent required");
    for (int i = 0; i < n_agents(); ++i) {
        const Matrix& t = tables[static_cast<std::size_t>(i)];
        const std::string who = "likelihoods[" + std::to_string(i) + "]";
        if (t.rows != n_states)
            throw validation_error(who + ": expected one row per state (" +
                                   std::to_string(n_states) + "), got " + std::to_string(t.rows));
        if (t.cols < 1) throw validation_error(who + ": empty signal alphabet");
        for (int k = 0; k < t.rows; ++k) {
            std::span<const double> row(&t.a[static_cast<std::size_t>(k) * t.cols],
                                        static_cast<std::size_t>(t.cols));
            validate_distribution(row, who + "[" + std::to_string(k) + "]",
                                  allow_zero_likelihoods);
        }
    }
}

InitialPriors InitialPriors::uniform(int n_agents, int n_states) {
    InitialPriors p;
    p.per_agent.assign(static_cast<std::size_t>(n_agents), uniform_dist(n_states));
    return p;
}

void InitialPriors::validate(int n_agents, int n_states) const {
    if (static_cast<int>(per_agent.size()) != n_agents)
        throw validation_error("priors: expected " + std::to_string(n_agents) + " entries, got " +
                               std::to_string(per_agent.size()));
    for (std::size_t i = 0; i < per_agent.size(); ++i) {
        if (static_cast<int>(per_agent[i].size()) != n_states)
            throw validation_error("priors[" + std::to_string(i) + "]: expected " +
                                   std::to_string(n_states) + " entries");
        validate_distribution(per_agent[i], "priors[" + std::to_string(i) + "]");
    }
}

std::vector<double> InitialPriors::prior_log_ratios(int truth, int theta_check) const {
    std::vector<double> out(per_agent.size());
    for (std::size_t i = 0; i < per_agent.size(); ++i)
        out[i] = std::log(per_agent[i][static_cast<std::size_t>(theta_check)] /
                          per_agent[i][static_cast<std::size_t>(truth)]);
    return out;
}

double kl_divergence(std::span<const double> p, std::span<const double> q) {
    if (p.size() != q.size())
        throw validation_error("kl_divergence: distributions on different supports");
    validate_distribution(p, "kl_divergence: p", /*allow_zero=*/true, 1e-9);
    validate_distribution(q, "kl_divergence: q", /*allow_zero=*/true, 1e-9);
    double kl = 0.0;
    for (std::size_t s = 0; s < p.size(); ++s) {
        if (p[s] == 0.0) continue;
        if (q[s] == 0.0)
            throw validation_error("kl_divergence: q vanishes where p has mass");
        kl += p[s] * std::log(p[s] / q[s]);
    }
    return kl;
}

Matrix signal_divergences(const SignalModel& sig, int truth) {
    const int n = sig.n_agents();
    const int k_states = sig.tables.empty() ? 0 : sig.tables[0].rows;
    Matrix lam(n, k_states);
    for (int i = 0; i < n; ++i) {
        const Matrix& t = sig.tables[static_cast<std::size_t>(i)];
        std::span<const double> true_row(&t.a[static_cast<std::size_t>(truth) * t.cols],
                                         static_cast<std::size_t>(t.cols));
        for (int k = 0; k < k_states; ++k) {
            if (k == truth) {
                lam(i, k) = 0.0;
                continue;
            }
            std::span<const double> row(&t.a[static_cast<std::size_t>(k) * t.cols],
                                        static_cast<std::size_t>(t.cols));
            lam(i, k) = -kl_divergence(true_row, row);
        }
    }
    return lam;
}

IdentifiabilityReport check_identifiability(const SignalModel& sig, int truth) {
    const Matrix lam = signal_divergences(sig, truth);
    IdentifiabilityReport rep;
    rep.witnesses.assign(static_cast<std::size_t>(lam.cols), {});
    rep.identifiable = true;
    for (int k = 0; k < lam.cols; ++k) {
        if (k == truth) continue;
        for (int i = 0; i < lam.rows; ++i)
            if (lam(i, k) < -kDivergenceZeroTol)
                rep.witnesses[static_cast<std::size_t>(k)].push_back(i);
        if (rep.witnesses[static_cast<std::size_t>(k)].empty()) rep.identifiable = false;
    }
    return rep;
}

int sample_signal(const SignalModel& sig, int agent, int truth_state, Substream& rng) {
    const Matrix& t = sig.tables[static_cast<std::size_t>(agent)];
    std::span<const double> row(&t.a[static_cast<std::size_t>(truth_state) * t.cols],
                                static_cast<std::size_t>(t.cols));
    return sample_discrete(row, rng);
}

} // namespace beliefsim
