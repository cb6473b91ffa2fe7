#include "beliefsim/engine.hpp"

#include <algorithm>
#include <cmath>
#include <exception>
#include <optional>
#include <string>
#include <thread>
#include <utility>

#include "beliefsim/errors.hpp"
#include "beliefsim/rng.hpp"

namespace beliefsim {

std::span<const double> Trajectory::phi_at(long t) const {
    const std::size_t stride = static_cast<std::size_t>(n) * static_cast<std::size_t>(n_false());
    return std::span<const double>(phi).subspan(static_cast<std::size_t>(t) * stride, stride);
}

std::span<const double> Trajectory::phi_at(long t, int agent) const {
    return phi_at(t).subspan(static_cast<std::size_t>(agent) * n_false(),
                             static_cast<std::size_t>(n_false()));
}

double Trajectory::phi_at(long t, int agent, int false_index) const {
    return phi[(static_cast<std::size_t>(t) * n + agent) * n_false() +
               static_cast<std::size_t>(false_index)];
}

Dist Trajectory::beliefs_from_phi(long t, int agent) const {
    return ratios_to_beliefs(phi_at(t, agent), truth);
}

int Trajectory::signal_at(long t, int agent) const {
    if (signals.empty()) throw validation_error("trajectory did not record signals");
    return signals[static_cast<std::size_t>(t) * n + agent];
}

int Trajectory::choice_at(long t, int agent) const {
    if (choices.empty()) throw validation_error("trajectory did not record neighbor choices");
    return choices[static_cast<std::size_t>(t - 1) * n + agent];
}

void validate_run_config(const RunConfig& cfg, const SpectralData& spectral) {
    if (cfg.net.n < 1) throw validation_error("network: must have at least one agent");
    cfg.states.validate();
    const int k_states = cfg.states.n_states();
    cfg.sig.validate(k_states);
    if (cfg.sig.n_agents() != cfg.net.n)
        throw validation_error("signal_model: expected one likelihood table per agent");
    cfg.priors.validate(cfg.net.n, k_states);
    if (cfg.truth < -1 || cfg.truth >= k_states)
        throw validation_error("truth: state index out of range");
    if (cfg.horizon < 0) throw validation_error("horizon: must be >= 0");
    if (cfg.record.belief_every < 0)
        throw validation_error("record.belief_every: must be >= 0");
    validate_rule(cfg.rule, cfg.net, k_states);
    if (const auto* tv = std::get_if<TimeVaryingLogLinear>(&cfg.rule)) {
        for (long t = 1; t <= cfg.horizon; ++t) {
            const double x = tv->schedule.at(t);
            if (!std::isfinite(x) || x < 0.0)
                throw validation_error("rule.params.x_schedule: weight at step " +
                                       std::to_string(t) + " is not finite and nonnegative");
            if (x >= spectral.spectral_radius)
                throw validation_error("rule.params.x_schedule: weight " + std::to_string(x) +
                                       " at step " + std::to_string(t) +
                                       " reaches the spectral radius " +
                                       std::to_string(spectral.spectral_radius));
        }
    }
}

namespace {

void record_phi_row(Trajectory& traj, std::span<const double> log_mu) {
    for (int i = 0; i < traj.n; ++i) {
        const auto row = log_mu.subspan(static_cast<std::size_t>(i) * traj.n_states,
                                        static_cast<std::size_t>(traj.n_states));
        const double base = row[static_cast<std::size_t>(traj.truth)];
        for (int k : traj.false_states)
            traj.phi.push_back(row[static_cast<std::size_t>(k)] - base);
    }
}

void check_normalized(std::span<const double> row, long t, int agent) {
    double s = 0.0;
    for (double lv : row) s += std::exp(lv);
    if (std::abs(s - 1.0) > 1e-12)
        throw numeric_error("step " + std::to_string(t) + ", agent " + std::to_string(agent) +
                            ": belief normalization drifted by " + std::to_string(s - 1.0));
}

void take_snapshot(Trajectory& traj, long t, std::span<const double> log_mu) {
    BeliefSnapshot snap;
    snap.t = t;
    snap.beliefs.resize(log_mu.size());
    for (std::size_t i = 0; i < log_mu.size(); ++i) snap.beliefs[i] = std::exp(log_mu[i]);
    traj.snapshots.push_back(std::move(snap));
}

}  // namespace

Trajectory simulate(const RunConfig& cfg, const SpectralData& spectral) {
    validate_run_config(cfg, spectral);
    const int n = cfg.net.n;
    const int k_states = cfg.states.n_states();
    const long horizon = cfg.horizon;

    int truth = cfg.truth;
    if (truth < 0) {
        Substream rng(cfg.seed, 0, 0, Draw::truth);
        truth = cfg.states.sample_truth(rng);
    }

    Trajectory traj;
    traj.n = n;
    traj.n_states = k_states;
    traj.truth = truth;
    traj.horizon = horizon;
    traj.seed = cfg.seed;
    for (int k = 0; k < k_states; ++k)
        if (k != truth) traj.false_states.push_back(k);
    traj.phi.reserve(static_cast<std::size_t>(horizon + 1) * n * (k_states - 1));
    const bool walk = std::holds_alternative<RandomWalkNeighbor>(cfg.rule);
    const bool keep_signals = cfg.record.signals;
    const bool keep_choices = walk && cfg.record.choices;
    if (keep_signals) traj.signals.reserve(static_cast<std::size_t>(horizon + 1) * n);
    if (keep_choices) traj.choices.reserve(static_cast<std::size_t>(horizon) * n);

    // Per-agent neighbor choice weights, in neighbor-list order.
    std::vector<std::vector<double>> pick_probs;
    if (walk) {
        const Matrix& p = std::get<RandomWalkNeighbor>(cfg.rule).choice_probs;
        pick_probs.resize(static_cast<std::size_t>(n));
        for (int i = 0; i < n; ++i) {
            const auto& nbrs = cfg.net.neighbors[static_cast<std::size_t>(i)];
            auto& probs = pick_probs[static_cast<std::size_t>(i)];
            if (p.rows > 0) {
                probs.reserve(nbrs.size());
                for (int j : nbrs) probs.push_back(p(i, j));
            } else {
                probs.assign(nbrs.size(), 1.0 / static_cast<double>(nbrs.size()));
            }
        }
    }

    const auto* tv = std::get_if<TimeVaryingLogLinear>(&cfg.rule);

    std::vector<int> step_signals(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) {
        Substream rng(cfg.seed, static_cast<std::uint64_t>(i), 0, Draw::signal);
        step_signals[static_cast<std::size_t>(i)] = sample_signal(cfg.sig, i, truth, rng);
    }
    std::vector<double> prev;
    try {
        prev = bayes_init(cfg.sig, cfg.priors, step_signals).log_mu;
    } catch (const numeric_error& e) {
        throw numeric_error("initialization: " + std::string(e.what()));
    }
    if (keep_signals)
        traj.signals.insert(traj.signals.end(), step_signals.begin(), step_signals.end());
    record_phi_row(traj, prev);
    const long every = cfg.record.belief_every;
    take_snapshot(traj, 0, prev);

    std::vector<double> next(prev.size());
    std::vector<int> step_choices(static_cast<std::size_t>(walk ? n : 0));
    for (long t = 1; t <= horizon; ++t) {
        const double x_t = tv ? tv->schedule.at(t) : 0.0;
        for (int i = 0; i < n; ++i) {
            Substream sig_rng(cfg.seed, static_cast<std::uint64_t>(i),
                              static_cast<std::uint64_t>(t), Draw::signal);
            const int s = sample_signal(cfg.sig, i, truth, sig_rng);
            step_signals[static_cast<std::size_t>(i)] = s;
            int chosen = -1;
            if (walk) {
                Substream pick_rng(cfg.seed, static_cast<std::uint64_t>(i),
                                   static_cast<std::uint64_t>(t), Draw::neighbor);
                const int idx = sample_discrete(pick_probs[static_cast<std::size_t>(i)], pick_rng);
                chosen = cfg.net.neighbors[static_cast<std::size_t>(i)][static_cast<std::size_t>(idx)];
                step_choices[static_cast<std::size_t>(i)] = chosen;
            }
            auto out = std::span<double>(next).subspan(static_cast<std::size_t>(i) * k_states,
                                                       static_cast<std::size_t>(k_states));
            try {
                agent_step_log(cfg.rule, cfg.net, spectral.spectral_radius, cfg.sig, prev,
                               k_states, i, s, chosen, x_t, out);
            } catch (const numeric_error& e) {
                throw numeric_error("step " + std::to_string(t) + ", agent " + std::to_string(i) +
                                    ": " + std::string(e.what()));
            }
            check_normalized(out, t, i);
        }
        prev.swap(next);
        if (keep_signals)
            traj.signals.insert(traj.signals.end(), step_signals.begin(), step_signals.end());
        if (keep_choices)
            traj.choices.insert(traj.choices.end(), step_choices.begin(), step_choices.end());
        record_phi_row(traj, prev);
        if ((every > 0 && t % every == 0 && t != horizon) || t == horizon)
            take_snapshot(traj, t, prev);
    }
    return traj;
}

namespace {

struct SeedOutcome {
    SeedSummary summary;
    std::optional<Trajectory> traj;
};

SeedOutcome run_one_seed(const RunConfig& base, const SpectralData& spectral, std::uint64_t seed,
                         bool compute_identity, double rate_window) {
    RunConfig cfg = base;
    cfg.seed = seed;
    SeedOutcome out;
    out.summary.seed = seed;
    try {
        Trajectory traj = simulate(cfg, spectral);
        out.summary.truth = traj.truth;
        if (traj.horizon >= 100 && rate_window > 0.0)
            for (int theta : traj.false_states)
                out.summary.rates.push_back(empirical_rate(traj, theta, rate_window));
        if (compute_identity)
            for (int theta : traj.false_states)
                out.summary.identity.push_back(aggregate_identity(traj, cfg, spectral, theta));
        out.summary.final_false_beliefs.reserve(static_cast<std::size_t>(traj.n) * traj.n_false());
        for (int i = 0; i < traj.n; ++i) {
            const Dist b = traj.beliefs_from_phi(traj.horizon, i);
            for (int k : traj.false_states) {
                const double v = b[static_cast<std::size_t>(k)];
                out.summary.final_false_beliefs.push_back(v);
                out.summary.max_false_belief_final =
                    std::max(out.summary.max_false_belief_final, v);
            }
        }
        out.traj = std::move(traj);
    } catch (const numeric_error& e) {
        out.summary.error = e.what();
        out.traj.reset();
    }
    return out;
}

}  // namespace

Ensemble monte_carlo(const RunConfig& base, const SpectralData& spectral, int n_seeds,
                     int n_threads, const TrajectorySink& sink, bool compute_identity,
                     double rate_window) {
    if (n_seeds < 1) throw validation_error("monte_carlo: n_seeds must be >= 1");
    if (n_threads < 1) throw validation_error("monte_carlo: n_threads must be >= 1");
    validate_run_config(base, spectral);

    Ensemble ens;
    ens.truth_mode = base.truth;

    for (int batch = 0; batch < n_seeds; batch += n_threads) {
        const int count = std::min(n_threads, n_seeds - batch);
        std::vector<SeedOutcome> outcomes(static_cast<std::size_t>(count));
        std::vector<std::exception_ptr> errors(static_cast<std::size_t>(count));
        if (count == 1) {
            try {
                outcomes[0] = run_one_seed(base, spectral, base.seed ^ static_cast<std::uint64_t>(batch),
                                           compute_identity, rate_window);
            } catch (...) {
                errors[0] = std::current_exception();
            }
        } else {
            std::vector<std::thread> workers;
            workers.reserve(static_cast<std::size_t>(count));
            for (int w = 0; w < count; ++w) {
                const std::uint64_t seed = base.seed ^ static_cast<std::uint64_t>(batch + w);
                workers.emplace_back([&, w, seed] {
                    try {
                        outcomes[static_cast<std::size_t>(w)] =
                            run_one_seed(base, spectral, seed, compute_identity, rate_window);
                    } catch (...) {
                        errors[static_cast<std::size_t>(w)] = std::current_exception();
                    }
                });
            }
            for (auto& th : workers) th.join();
        }
        for (int w = 0; w < count; ++w) {
            if (errors[static_cast<std::size_t>(w)])
                std::rethrow_exception(errors[static_cast<std::size_t>(w)]);
            SeedOutcome& o = outcomes[static_cast<std::size_t>(w)];
            if (o.summary.error.empty()) {
                if (sink) sink(o.summary, *o.traj);
            } else {
                ++ens.failed;
            }
            o.traj.reset();
            ens.runs.push_back(std::move(o.summary));
        }
    }

    // Aggregate rate and identity digests over the successful runs.
    std::size_t n_false = 0;
    for (const SeedSummary& run : ens.runs)
        if (run.error.empty()) n_false = std::max(n_false, run.rates.size());
    if (n_false > 0) {
        ens.mean_rate.assign(n_false, 0.0);
        ens.sd_rate.assign(n_false, 0.0);
        std::vector<int> counts(n_false, 0);
        for (const SeedSummary& run : ens.runs) {
            if (!run.error.empty()) continue;
            for (std::size_t c = 0; c < run.rates.size(); ++c) {
                ens.mean_rate[c] += run.rates[c].mean_rate;
                ++counts[c];
            }
        }
        for (std::size_t c = 0; c < n_false; ++c)
            if (counts[c] > 0) ens.mean_rate[c] /= counts[c];
        for (const SeedSummary& run : ens.runs) {
            if (!run.error.empty()) continue;
            for (std::size_t c = 0; c < run.rates.size(); ++c) {
                const double d = run.rates[c].mean_rate - ens.mean_rate[c];
                ens.sd_rate[c] += d * d;
            }
        }
        for (std::size_t c = 0; c < n_false; ++c)
            if (counts[c] > 1) ens.sd_rate[c] = std::sqrt(ens.sd_rate[c] / (counts[c] - 1));
    }
    for (const SeedSummary& run : ens.runs)
        for (const IdentityReport& rep : run.identity)
            ens.max_identity_residual = std::max(ens.max_identity_residual, rep.max_residual);
    return ens;
}

}  // namespace beliefsim
