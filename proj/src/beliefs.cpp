#include "beliefsim/beliefs.hpp"

#include <cmath>
#include <string>

#include "beliefsim/engine.hpp"
#include "beliefsim/errors.hpp"
#include "beliefsim/rules.hpp"

namespace beliefsim {

std::span<double> BeliefState::agent_row(int i) {
    return std::span<double>(log_mu).subspan(static_cast<std::size_t>(i) * n_states,
                                             static_cast<std::size_t>(n_states));
}

std::span<const double> BeliefState::agent_row(int i) const {
    return std::span<const double>(log_mu).subspan(static_cast<std::size_t>(i) * n_states,
                                                   static_cast<std::size_t>(n_states));
}

Dist BeliefState::beliefs(int i) const {
    const auto row = agent_row(i);
    return to_linear(std::vector<double>(row.begin(), row.end()));
}

BeliefState bayes_init(const SignalModel& sig, const InitialPriors& priors,
                       std::span<const int> signals) {
    const int n = sig.n_agents();
    if (static_cast<int>(signals.size()) != n)
        throw validation_error("bayes_init: expected one signal per agent");
    const int k_states = sig.tables.empty() ? 0 : sig.tables.front().rows;
    priors.validate(n, k_states);

    BeliefState state;
    state.n = n;
    state.n_states = k_states;
    state.time = 0;
    state.log_mu.assign(static_cast<std::size_t>(n) * k_states, 0.0);
    for (int i = 0; i < n; ++i) {
        auto row = state.agent_row(i);
        const Dist& prior = priors.per_agent[static_cast<std::size_t>(i)];
        for (int k = 0; k < k_states; ++k)
            row[static_cast<std::size_t>(k)] =
                std::log(prior[static_cast<std::size_t>(k)]) +
                sig.log_likelihood(i, k, signals[static_cast<std::size_t>(i)]);
        log_normalize_in_place(row);
    }
    return state;
}

std::vector<double> log_linearize(const Dist& belief) {
    validate_distribution(belief, "belief", /*allow_zero=*/true);
    return to_log(belief);
}

LogRatios log_ratios(const BeliefState& state, int truth) {
    if (truth < 0 || truth >= state.n_states)
        throw validation_error("log_ratios: truth index out of range");
    LogRatios out;
    out.n = state.n;
    out.truth = truth;
    for (int k = 0; k < state.n_states; ++k)
        if (k != truth) out.false_states.push_back(k);
    out.phi = Matrix(state.n, static_cast<int>(out.false_states.size()));
    for (int i = 0; i < state.n; ++i) {
        const auto row = state.agent_row(i);
        const double base = row[static_cast<std::size_t>(truth)];
        if (!std::isfinite(base))
            throw numeric_error("log_ratios: agent " + std::to_string(i) +
                                " has zero belief on the true state");
        for (std::size_t c = 0; c < out.false_states.size(); ++c)
            out.phi(i, static_cast<int>(c)) =
                row[static_cast<std::size_t>(out.false_states[c])] - base;
    }
    return out;
}

Dist ratios_to_beliefs(std::span<const double> phi_false, int truth) {
    const int k_states = static_cast<int>(phi_false.size()) + 1;
    if (truth < 0 || truth >= k_states)
        throw validation_error("ratios_to_beliefs: truth index out of range");
    std::vector<double> lv(static_cast<std::size_t>(k_states));
    int c = 0;
    for (int k = 0; k < k_states; ++k)
        lv[static_cast<std::size_t>(k)] = (k == truth) ? 0.0 : phi_false[static_cast<std::size_t>(c++)];
    log_normalize_in_place(lv);
    return to_linear(lv);
}

double network_bias(const SpectralData& spectral, const InitialPriors& priors, int truth,
                    int theta_check) {
    const std::vector<double> psi = priors.prior_log_ratios(truth, theta_check);
    if (psi.size() != spectral.centrality.size())
        throw validation_error("network_bias: prior count does not match the network size");
    double b = 0.0;
    for (std::size_t i = 0; i < psi.size(); ++i) b += spectral.centrality[i] * psi[i];
    return b;
}

IdentityReport aggregate_identity(const Trajectory& traj, const RunConfig& cfg,
                                  const SpectralData& spectral, int theta_check) {
    if (theta_check == traj.truth)
        throw validation_error("aggregate_identity: theta_check must differ from the true state");
    int fi = -1;
    for (std::size_t c = 0; c < traj.false_states.size(); ++c)
        if (traj.false_states[c] == theta_check) fi = static_cast<int>(c);
    if (fi < 0) throw validation_error("aggregate_identity: theta_check out of range");
    const int n = traj.n;
    if (traj.signals.empty())
        throw validation_error("aggregate_identity: the run must record signals");
    const bool walk = std::holds_alternative<RandomWalkNeighbor>(cfg.rule);
    if (walk && traj.choices.empty())
        throw validation_error("aggregate_identity: the run must record neighbor choices");

    const std::vector<double>& alpha = spectral.centrality;
    const double rho = spectral.spectral_radius;
    const auto* tv = std::get_if<TimeVaryingLogLinear>(&cfg.rule);

    IdentityReport rep;
    std::vector<double> phi_prev(static_cast<std::size_t>(n));
    double residual_sum = 0.0;
    for (long t = 1; t <= traj.horizon; ++t) {
        double agg_prev = 0.0;
        double agg_now = 0.0;
        for (int i = 0; i < n; ++i) {
            phi_prev[static_cast<std::size_t>(i)] = traj.phi_at(t - 1, i, fi);
            agg_prev += alpha[static_cast<std::size_t>(i)] * phi_prev[static_cast<std::size_t>(i)];
            agg_now += alpha[static_cast<std::size_t>(i)] * traj.phi_at(t, i, fi);
        }

        const double x_t = tv ? tv->schedule.at(t) : 0.0;
        std::span<const int> choices;
        if (walk)
            choices = std::span<const int>(traj.choices)
                          .subspan(static_cast<std::size_t>(t - 1) * n, static_cast<std::size_t>(n));
        const PriorRatios pr = step_prior_ratios(cfg.rule, cfg.net, phi_prev, x_t, rho, choices,
                                                 traj.truth, theta_check);

        double tr_xi = 0.0;
        double tr_xi_flow = 0.0;
        double lambda_w = 0.0;
        double edge_sum = 0.0;
        for (int i = 0; i < n; ++i) {
            const double a = alpha[static_cast<std::size_t>(i)];
            tr_xi += a * pr.self[static_cast<std::size_t>(i)];
            for (double g : pr.neighbors[static_cast<std::size_t>(i)]) tr_xi_flow += a * g;
            for (int j : cfg.net.neighbors[static_cast<std::size_t>(i)])
                edge_sum += a * phi_prev[static_cast<std::size_t>(j)];
            const int s = traj.signal_at(t, i);
            lambda_w += a * (cfg.sig.log_likelihood(i, theta_check, s) -
                             cfg.sig.log_likelihood(i, traj.truth, s));
        }

        const double shared = tr_xi + lambda_w - tr_xi_flow;
        const double r_closed = std::abs(agg_now - (shared + rho * agg_prev));
        const double r_edge = std::abs(agg_now - (shared + edge_sum));
        if (r_closed > rep.max_residual) {
            rep.max_residual = r_closed;
            rep.worst_step = t;
        }
        if (r_edge > rep.max_edge_residual) rep.max_edge_residual = r_edge;
        residual_sum += r_closed;
        ++rep.steps;
    }
    if (rep.steps > 0) rep.mean_residual = residual_sum / static_cast<double>(rep.steps);
    return rep;
}

}  // namespace beliefsim
