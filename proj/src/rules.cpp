#include "beliefsim/rules.hpp"

#include <cmath>

#include "beliefsim/errors.hpp"

namespace beliefsim {

double WeightSchedule::at(long t) const {
    const double td = static_cast<double>(t);
    switch (kind) {
        case Kind::power: return c / std::pow(td, p);
        case Kind::log_power: {
            const double l = std::log(td + 2.0);
            return c / (td * l * l);
        }
        case Kind::geometric: return c * std::pow(p, td);
        case Kind::constant: return c;
    }
    throw validation_error("x_schedule: unknown kind");
}

void WeightSchedule::validate() const {
    if (!(c >= 0.0) || !std::isfinite(c))
        throw validation_error("x_schedule.c: must be finite and >= 0");
    if (!std::isfinite(p)) throw validation_error("x_schedule.p: must be finite");
    if (kind == Kind::geometric && !(p > 0.0))
        throw validation_error("x_schedule.p: geometric schedule needs p > 0");
}

const char* WeightSchedule::kind_name() const {
    switch (kind) {
        case Kind::power: return "power";
        case Kind::log_power: return "log_power";
        case Kind::geometric: return "geometric";
        case Kind::constant: return "constant";
    }
    return "?";
}

std::string rule_name(const UpdateRule& rule) {
    struct Visitor {
        std::string operator()(const CommonFixedPrior&) const { return "common_prior"; }
        std::string operator()(const RandomWalkNeighbor&) const { return "random_walk"; }
        std::string operator()(const GeometricAveragePrior&) const { return "geometric"; }
        std::string operator()(const TimeVaryingLogLinear&) const { return "time_varying"; }
        std::string operator()(const WeightedSelfBelief&) const { return "weighted_self"; }
    };
    return std::visit(Visitor{}, rule);
}

void validate_rule(const UpdateRule& rule, const Network& net, int n_states) {
    if (const auto* cp = std::get_if<CommonFixedPrior>(&rule)) {
        for (int i = 0; i < net.n; ++i)
            if (net.degree(i) != 1)
                throw validation_error("rule common_prior: network must be a directed cycle "
                                       "(node " + std::to_string(i) + " has degree " +
                                       std::to_string(net.degree(i)) + ")");
        if (!cp->prior.empty()) {
            if (static_cast<int>(cp->prior.size()) != n_states)
                throw validation_error("rule.params.prior: expected " + std::to_string(n_states) +
                                       " entries");
            validate_distribution(cp->prior, "rule.params.prior");
        }
    } else if (const auto* rw = std::get_if<RandomWalkNeighbor>(&rule)) {
        const Matrix& p = rw->choice_probs;
        if (p.rows == 0) return; // uniform default
        if (p.rows != net.n || p.cols != net.n)
            throw validation_error("rule.params.P: expected a " + std::to_string(net.n) + "x" +
                                   std::to_string(net.n) + " matrix");
        for (int i = 0; i < net.n; ++i) {
            double row_sum = 0.0;
            for (int j = 0; j < net.n; ++j) {
                const double x = p(i, j);
                if (!(x >= 0.0))
                    throw validation_error("rule.params.P[" + std::to_string(i) +
                                           "]: entries must be >= 0");
                if (x > 0.0 && !net.has_edge(i, j))
                    throw validation_error("rule.params.P[" + std::to_string(i) + "][" +
                                           std::to_string(j) + "]: positive weight on a non-edge");
                if (x == 0.0 && net.has_edge(i, j))
                    throw validation_error("rule.params.P[" + std::to_string(i) + "][" +
                                           std::to_string(j) + "]: neighbor has zero weight; "
                                           "drop the edge or give it positive probability");
                row_sum += x;
            }
            if (std::abs(row_sum - 1.0) > 1e-9)
                throw validation_error("rule.params.P[" + std::to_string(i) + "]: row sums to " +
                                       std::to_string(row_sum) + ", expected 1");
        }
    } else if (const auto* tv = std::get_if<TimeVaryingLogLinear>(&rule)) {
        tv->schedule.validate();
    } else if (const auto* ws = std::get_if<WeightedSelfBelief>(&rule)) {
        if (!(ws->eta > 0.0 && ws->eta < 1.0))
            throw validation_error("rule.params.eta: must lie strictly between 0 and 1");
    }
}

namespace {

void check_belief_arg(const Dist& d, int n_states, const char* what) {
    if (static_cast<int>(d.size()) != n_states)
        throw validation_error(std::string(what) + ": wrong number of states");
    validate_distribution(d, what);
}

Dist finish_linear(std::vector<double> log_vals) {
    log_normalize_in_place(log_vals);
    return to_linear(log_vals);
}

} // namespace

Dist memoryless_update(int agent, const Dist& self_prior, const std::vector<Dist>& neighbor_priors,
                       int signal, const std::vector<Dist>& neighbor_beliefs,
                       const SignalModel& sig) {
    const int k_states = sig.tables[static_cast<std::size_t>(agent)].rows;
    check_belief_arg(self_prior, k_states, "memoryless_update: self prior");
    if (neighbor_priors.size() != neighbor_beliefs.size())
        throw validation_error("memoryless_update: neighbor priors/beliefs size mismatch");
    for (const auto& d : neighbor_priors) check_belief_arg(d, k_states, "memoryless_update: neighbor prior");
    for (const auto& d : neighbor_beliefs) check_belief_arg(d, k_states, "memoryless_update: neighbor belief");

    std::vector<double> lv(static_cast<std::size_t>(k_states));
    for (int k = 0; k < k_states; ++k) {
        double v = std::log(self_prior[static_cast<std::size_t>(k)]) +
                   sig.log_likelihood(agent, k, signal);
        for (std::size_t j = 0; j < neighbor_beliefs.size(); ++j)
            v += std::log(neighbor_beliefs[j][static_cast<std::size_t>(k)]) -
                 std::log(neighbor_priors[j][static_cast<std::size_t>(k)]);
        lv[static_cast<std::size_t>(k)] = v;
    }
    return finish_linear(std::move(lv));
}

Dist circle_update(const Network& net, int agent, const Dist& neighbor_belief, int signal,
                   const SignalModel& sig) {
    if (net.degree(agent) != 1)
        throw validation_error("circle_update: agent " + std::to_string(agent) +
                               " must have exactly one neighbor");
    const int k_states = sig.tables[static_cast<std::size_t>(agent)].rows;
    check_belief_arg(neighbor_belief, k_states, "circle_update: neighbor belief");
    std::vector<double> lv(static_cast<std::size_t>(k_states));
    for (int k = 0; k < k_states; ++k)
        lv[static_cast<std::size_t>(k)] = std::log(neighbor_belief[static_cast<std::size_t>(k)]) +
                                          sig.log_likelihood(agent, k, signal);
    return finish_linear(std::move(lv));
}

Dist random_walk_update(const Network& net, int agent, int chosen, const Dist& neighbor_belief,
                        int signal, const SignalModel& sig) {
    if (!net.has_edge(agent, chosen))
        throw validation_error("random_walk_update: chosen node " + std::to_string(chosen) +
                               " is not a neighbor of agent " + std::to_string(agent));
    const int k_states = sig.tables[static_cast<std::size_t>(agent)].rows;
    check_belief_arg(neighbor_belief, k_states, "random_walk_update: neighbor belief");
    std::vector<double> lv(static_cast<std::size_t>(k_states));
    for (int k = 0; k < k_states; ++k)
        lv[static_cast<std::size_t>(k)] = std::log(neighbor_belief[static_cast<std::size_t>(k)]) +
                                          sig.log_likelihood(agent, k, signal);
    return finish_linear(std::move(lv));
}

Dist geometric_average_update(const Network& net, int agent,
                              const std::vector<Dist>& neighbor_beliefs, int signal,
                              const SignalModel& sig) {
    const int d = net.degree(agent);
    if (static_cast<int>(neighbor_beliefs.size()) != d)
        throw validation_error("geometric_average_update: expected one belief per neighbor");
    const int k_states = sig.tables[static_cast<std::size_t>(agent)].rows;
    for (const auto& b : neighbor_beliefs)
        check_belief_arg(b, k_states, "geometric_average_update: neighbor belief");
    std::vector<double> lv(static_cast<std::size_t>(k_states));
    for (int k = 0; k < k_states; ++k) {
        double v = sig.log_likelihood(agent, k, signal);
        for (const auto& b : neighbor_beliefs)
            v += std::log(b[static_cast<std::size_t>(k)]) / static_cast<double>(d);
        lv[static_cast<std::size_t>(k)] = v;
    }
    return finish_linear(std::move(lv));
}

Dist time_varying_update(const Network& net, int agent, const Dist& self_belief,
                         const std::vector<Dist>& neighbor_beliefs, int signal, double x_t,
                         const SpectralData& spectral, const SignalModel& sig) {
    if (!(x_t >= 0.0))
        throw validation_error("time_varying_update: x_t must be >= 0");
    if (x_t >= spectral.spectral_radius)
        throw validation_error("time_varying_update: x_t=" + std::to_string(x_t) +
                               " must stay below the spectral radius " +
                               std::to_string(spectral.spectral_radius));
    const int d = net.degree(agent);
    if (static_cast<int>(neighbor_beliefs.size()) != d)
        throw validation_error("time_varying_update: expected one belief per neighbor");
    const int k_states = sig.tables[static_cast<std::size_t>(agent)].rows;
    check_belief_arg(self_belief, k_states, "time_varying_update: self belief");
    for (const auto& b : neighbor_beliefs)
        check_belief_arg(b, k_states, "time_varying_update: neighbor belief");

    // Reference route through explicit prior tables: the agent's own slot
    // carries its previous belief unchanged, and each neighbor slot carries
    // the neighbor's belief deflated by the exponent eta_t = 1 - x_t/rho and
    // renormalized. The engine's log recursion must match this exactly.
    const double eta_t = 1.0 - x_t / spectral.spectral_radius;
    std::vector<Dist> neighbor_priors;
    neighbor_priors.reserve(neighbor_beliefs.size());
    for (const auto& b : neighbor_beliefs) {
        std::vector<double> lp(b.size());
        for (std::size_t k = 0; k < b.size(); ++k) lp[k] = eta_t * std::log(b[k]);
        log_normalize_in_place(lp);
        neighbor_priors.push_back(to_linear(lp));
    }
    return memoryless_update(agent, self_belief, neighbor_priors, signal, neighbor_beliefs, sig);
}

Dist weighted_self_update(const Network& net, int agent, const Dist& self_belief,
                          const std::vector<Dist>& neighbor_beliefs, int signal, double eta,
                          const SignalModel& sig) {
    if (!(eta > 0.0 && eta < 1.0))
        throw validation_error("weighted_self_update: eta must lie strictly between 0 and 1");
    const int d = net.degree(agent);
    if (static_cast<int>(neighbor_beliefs.size()) != d)
        throw validation_error("weighted_self_update: expected one belief per neighbor");
    const int k_states = sig.tables[static_cast<std::size_t>(agent)].rows;
    check_belief_arg(self_belief, k_states, "weighted_self_update: self belief");
    for (const auto& b : neighbor_beliefs)
        check_belief_arg(b, k_states, "weighted_self_update: neighbor belief");
    std::vector<double> lv(static_cast<std::size_t>(k_states));
    const double w = (1.0 - eta) / static_cast<double>(d);
    for (int k = 0; k < k_states; ++k) {
        double v = eta * std::log(self_belief[static_cast<std::size_t>(k)]) +
                   sig.log_likelihood(agent, k, signal);
        for (const auto& b : neighbor_beliefs) v += w * std::log(b[static_cast<std::size_t>(k)]);
        lv[static_cast<std::size_t>(k)] = v;
    }
    return finish_linear(std::move(lv));
}

void agent_step_log(const UpdateRule& rule, const Network& net, double spectral_radius,
                    const SignalModel& sig, std::span<const double> prev_log_mu, int n_states,
                    int agent, int signal, int chosen, double x_t, std::span<double> out) {
    const auto row = [&](int j) {
        return prev_log_mu.subspan(static_cast<std::size_t>(j) * n_states,
                                   static_cast<std::size_t>(n_states));
    };
    const auto& nbrs = net.neighbors[static_cast<std::size_t>(agent)];

    for (int k = 0; k < n_states; ++k) {
        const double ll = sig.log_likelihood(agent, k, signal);
        double v = 0.0;
        if (std::holds_alternative<CommonFixedPrior>(rule)) {
            v = row(nbrs[0])[static_cast<std::size_t>(k)] + ll;
        } else if (std::holds_alternative<RandomWalkNeighbor>(rule)) {
            v = row(chosen)[static_cast<std::size_t>(k)] + ll;
        } else if (std::holds_alternative<GeometricAveragePrior>(rule)) {
            double s = 0.0;
            for (int j : nbrs) s += row(j)[static_cast<std::size_t>(k)];
            v = s / static_cast<double>(nbrs.size()) + ll;
        } else if (std::holds_alternative<TimeVaryingLogLinear>(rule)) {
            double s = 0.0;
            for (int j : nbrs) s += row(j)[static_cast<std::size_t>(k)];
            v = row(agent)[static_cast<std::size_t>(k)] + (x_t / spectral_radius) * s + ll;
        } else {
            const double eta = std::get<WeightedSelfBelief>(rule).eta;
            double s = 0.0;
            for (int j : nbrs) s += row(j)[static_cast<std::size_t>(k)];
            v = eta * row(agent)[static_cast<std::size_t>(k)] +
                (1.0 - eta) / static_cast<double>(nbrs.size()) * s + ll;
        }
        out[static_cast<std::size_t>(k)] = v;
    }
    log_normalize_in_place(out);
}

PriorRatios step_prior_ratios(const UpdateRule& rule, const Network& net,
                              std::span<const double> phi_prev, double x_t,
                              double spectral_radius, std::span<const int> choices, int truth,
                              int theta_check) {
    PriorRatios pr;
    pr.self.assign(static_cast<std::size_t>(net.n), 0.0);
    pr.neighbors.resize(static_cast<std::size_t>(net.n));
    for (int i = 0; i < net.n; ++i) {
        const auto& nbrs = net.neighbors[static_cast<std::size_t>(i)];
        auto& out = pr.neighbors[static_cast<std::size_t>(i)];
        out.assign(nbrs.size(), 0.0);

        if (const auto* cp = std::get_if<CommonFixedPrior>(&rule)) {
            const double psi =
                cp->prior.empty()
                    ? 0.0
                    : std::log(cp->prior[static_cast<std::size_t>(theta_check)] /
                               cp->prior[static_cast<std::size_t>(truth)]);
            pr.self[static_cast<std::size_t>(i)] = psi;
            for (auto& g : out) g = psi;
        } else if (std::holds_alternative<RandomWalkNeighbor>(rule)) {
            // Reference prior is uniform (ratio zero). Neighbors that were not
            // consulted this round carry their own ratio, which cancels
            // against the belief they reported.
            pr.self[static_cast<std::size_t>(i)] = 0.0;
            const int chosen = choices[static_cast<std::size_t>(i)];
            for (std::size_t k = 0; k < nbrs.size(); ++k)
                out[k] = (nbrs[k] == chosen) ? 0.0
                                             : phi_prev[static_cast<std::size_t>(nbrs[k])];
        } else if (std::holds_alternative<GeometricAveragePrior>(rule)) {
            double s = 0.0;
            for (int j : nbrs) s += phi_prev[static_cast<std::size_t>(j)];
            const double g = s / static_cast<double>(nbrs.size());
            pr.self[static_cast<std::size_t>(i)] = g;
            for (auto& v : out) v = g;
        } else if (std::holds_alternative<TimeVaryingLogLinear>(rule)) {
            const double eta_t = 1.0 - x_t / spectral_radius;
            pr.self[static_cast<std::size_t>(i)] = phi_prev[static_cast<std::size_t>(i)];
            for (std::size_t k = 0; k < nbrs.size(); ++k)
                out[k] = eta_t * phi_prev[static_cast<std::size_t>(nbrs[k])];
        } else {
            const double eta = std::get<WeightedSelfBelief>(rule).eta;
            const double w = 1.0 - (1.0 - eta) / static_cast<double>(nbrs.size());
            pr.self[static_cast<std::size_t>(i)] = eta * phi_prev[static_cast<std::size_t>(i)];
            for (std::size_t k = 0; k < nbrs.size(); ++k)
                out[k] = w * phi_prev[static_cast<std::size_t>(nbrs[k])];
        }
    }
    return pr;
}

} // namespace beliefsim
