#include "beliefsim/commands.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <limits>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include "json.hpp"

#include "beliefsim/analysis.hpp"
#include "beliefsim/beliefs.hpp"
#include "beliefsim/config.hpp"
#include "beliefsim/engine.hpp"
#include "beliefsim/errors.hpp"

namespace beliefsim {

namespace {

using nlohmann::json;
namespace fs = std::filesystem;

constexpr double kSpectralTol = 1e-13;

std::string resolve_output_dir(const CliOptions& opt, const ExperimentConfig& cfg) {
    if (!opt.output_dir.empty()) return opt.output_dir;
    if (!cfg.output_dir.empty()) return cfg.output_dir;
    if (const char* env = std::getenv("BELIEFSIM_OUTPUT_DIR"); env && *env) return env;
    return ".";
}

std::string fmt_double(double v) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

json spectral_to_json(const SpectralData& sp) {
    return json{{"spectral_radius", sp.spectral_radius},
                {"centrality", sp.centrality},
                {"stationary", sp.stationary},
                {"diameter", sp.diameter},
                {"aperiodic", sp.aperiodic},
                {"positivity_power", sp.positivity_power()}};
}

json prediction_to_json(const RatePrediction& pred, const StateSpace& states) {
    json out{{"rule", pred.rule},
             {"has_closed_form", pred.has_closed_form},
             {"identifiable", pred.identifiable}};
    if (!pred.has_closed_form) {
        out["note"] = pred.note;
        out["rates"] = nullptr;
        return out;
    }
    out["weights_kind"] = pred.weights_kind;
    out["weights"] = pred.weights;
    json rates = json::object();
    for (std::size_t c = 0; c < pred.false_states.size(); ++c)
        rates[states.states[static_cast<std::size_t>(pred.false_states[c])]] = pred.rates[c];
    out["rates"] = std::move(rates);
    out["min_rate"] = pred.min_rate;
    out["argmin_state"] = states.states[static_cast<std::size_t>(pred.argmin_state)];
    return out;
}

json rate_block(const std::vector<RateEstimate>& rates, const std::vector<int>& false_states,
                const StateSpace& states) {
    if (rates.empty()) return nullptr;
    json out = json::object();
    for (std::size_t c = 0; c < rates.size(); ++c) {
        const std::string& label = states.states[static_cast<std::size_t>(false_states[c])];
        out[label] = json{{"mean_rate", rates[c].mean_rate},
                          {"sd_rate", rates[c].sd_rate},
                          {"t_begin", rates[c].t_begin},
                          {"t_end", rates[c].t_end}};
    }
    return out;
}

double prior_ratio_norm(const InitialPriors& priors) {
    double worst = 0.0;
    for (const Dist& d : priors.per_agent) {
        double lo = std::numeric_limits<double>::infinity();
        double hi = -lo;
        for (double v : d) {
            lo = std::min(lo, std::log(v));
            hi = std::max(hi, std::log(v));
        }
        worst = std::max(worst, hi - lo);
    }
    return worst;
}

}  // namespace

void write_trajectory_csv(const std::string& path, const Trajectory& traj,
                          const StateSpace& states) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw validation_error("cannot write '" + path + "'");
    out << "t,agent,state,belief\n";
    for (const BeliefSnapshot& snap : traj.snapshots) {
        for (int i = 0; i < traj.n; ++i)
            for (int k = 0; k < traj.n_states; ++k)
                out << snap.t << ',' << i << ',' << states.states[static_cast<std::size_t>(k)]
                    << ',' << fmt_double(snap.beliefs[static_cast<std::size_t>(i) * traj.n_states +
                                                      static_cast<std::size_t>(k)])
                    << '\n';
    }
    if (!out.good()) throw validation_error("failed while writing '" + path + "'");
}

void cmd_inspect(const CliOptions& opt) {
    const ExperimentConfig cfg = load_config_file(opt.config_path);
    const SpectralData sp = analyze_network(cfg.run.net, kSpectralTol);
    long edges = 0;
    for (const auto& nbrs : cfg.run.net.neighbors) edges += static_cast<long>(nbrs.size());

    json ident = json::array();
    for (int truth = 0; truth < cfg.run.states.n_states(); ++truth) {
        const IdentifiabilityReport rep = check_identifiability(cfg.run.sig, truth);
        json witnesses = json::object();
        for (int k = 0; k < cfg.run.states.n_states(); ++k) {
            if (k == truth) continue;
            witnesses[cfg.run.states.states[static_cast<std::size_t>(k)]] =
                rep.witnesses[static_cast<std::size_t>(k)];
        }
        ident.push_back(json{{"truth", cfg.run.states.states[static_cast<std::size_t>(truth)]},
                             {"identifiable", rep.identifiable},
                             {"witnesses", std::move(witnesses)}});
    }

    json out{{"config_hash", cfg.config_hash},
             {"agents", cfg.run.net.n},
             {"edges", edges},
             {"strongly_connected", true},  // analyze_network would have thrown otherwise
             {"spectral", spectral_to_json(sp)},
             {"identifiability", std::move(ident)}};
    std::cout << out.dump(2) << "\n";
}

void cmd_rates(const CliOptions& opt) {
    const ExperimentConfig cfg = load_config_file(opt.config_path);
    if (cfg.run.truth < 0)
        throw validation_error("rates: the config must pin 'truth' to a state label");
    const SpectralData sp = analyze_network(cfg.run.net, kSpectralTol);
    const RatePrediction pred =
        theoretical_rate(cfg.run.rule, cfg.run.net, sp, cfg.run.sig, cfg.run.truth);
    json out = prediction_to_json(pred, cfg.run.states);
    out["config_hash"] = cfg.config_hash;
    out["truth"] = cfg.run.states.states[static_cast<std::size_t>(cfg.run.truth)];
    std::cout << out.dump(2) << "\n";
}

void cmd_coeffs(const CliOptions& opt) {
    const ExperimentConfig cfg = load_config_file(opt.config_path);
    const auto* tv = std::get_if<TimeVaryingLogLinear>(&cfg.run.rule);
    if (!tv)
        throw validation_error("coeffs: the configured rule has no influence schedule; "
                               "use rule 'time_varying'");
    if (cfg.run.horizon < 1) throw validation_error("coeffs: horizon must be >= 1");
    const SpectralData sp = analyze_network(cfg.run.net, kSpectralTol);
    const MixCoefficients mc = m_coefficients(tv->schedule, cfg.run.horizon);
    const LearningConditionReport rep =
        learning_condition_report(mc, sp, prior_ratio_norm(cfg.run.priors));

    json series = json::array();
    for (std::size_t i = 0; i < rep.sample_times.size(); ++i)
        series.push_back(json{{"t", rep.sample_times[i]},
                              {"tail", rep.series_tail[i]},
                              {"any", rep.series_any[i]}});
    json out{{"config_hash", cfg.config_hash},
             {"horizon", rep.horizon},
             {"depth", rep.depth},
             {"m1_total", rep.m1_total},
             {"m1_last_decade_share", rep.m1_last_decade_share},
             {"x_diverging", rep.x_diverging},
             {"overflowed", rep.overflowed},
             {"tail_last_decade_gain", rep.tail_last_decade_gain},
             {"growth_lo", rep.growth_lo},
             {"growth_hi", rep.growth_hi},
             {"bias_bound", rep.bias_bound},
             {"verdict", rep.verdict},
             {"series", std::move(series)}};
    std::cout << out.dump(2) << "\n";
}

void cmd_simulate(const CliOptions& opt) {
    const ExperimentConfig cfg = load_config_file(opt.config_path);
    const int threads = opt.threads > 0 ? opt.threads : cfg.threads;
    const SpectralData sp = analyze_network(cfg.run.net, kSpectralTol);
    const fs::path dir = resolve_output_dir(opt, cfg);
    fs::create_directories(dir);

    std::vector<fs::path> written;
    const auto cleanup = [&written]() {
        for (const fs::path& p : written) {
            std::error_code ec;
            fs::remove(p, ec);
        }
    };

    try {
        json runs = json::array();
        const TrajectorySink sink = [&](const SeedSummary& summary, const Trajectory& traj) {
            const fs::path file = dir / ("trajectory_" + std::to_string(summary.seed) + ".csv");
            write_trajectory_csv(file.string(), traj, cfg.run.states);
            written.push_back(file);
            json entry{{"seed", summary.seed},
                       {"truth", cfg.run.states.states[static_cast<std::size_t>(summary.truth)]},
                       {"status", "ok"},
                       {"file", file.filename().string()},
                       {"max_false_belief_final", summary.max_false_belief_final},
                       {"rates", rate_block(summary.rates, traj.false_states, cfg.run.states)}};
            if (!summary.identity.empty()) {
                double worst = 0.0;
                for (const IdentityReport& rep : summary.identity)
                    worst = std::max(worst, rep.max_residual);
                entry["identity_max_residual"] = worst;
            }
            runs.push_back(std::move(entry));
        };

        const Ensemble ens = monte_carlo(cfg.run, sp, cfg.n_seeds, threads, sink,
                                         cfg.check_identity, opt.window);
        if (ens.failed > 0) {
            std::string first;
            for (const SeedSummary& run : ens.runs)
                if (!run.error.empty()) {
                    first = "seed " + std::to_string(run.seed) + ": " + run.error;
                    break;
                }
            throw numeric_error("simulate: " + std::to_string(ens.failed) +
                                " run(s) failed numerically; first failure: " + first);
        }

        json aggregate{{"n_seeds", cfg.n_seeds}, {"window", opt.window}};
        if (cfg.run.truth >= 0 && !ens.mean_rate.empty()) {
            json mean = json::object();
            json sd = json::object();
            int c = 0;
            for (int k = 0; k < cfg.run.states.n_states(); ++k) {
                if (k == cfg.run.truth) continue;
                const std::string& label = cfg.run.states.states[static_cast<std::size_t>(k)];
                mean[label] = ens.mean_rate[static_cast<std::size_t>(c)];
                sd[label] = ens.sd_rate[static_cast<std::size_t>(c)];
                ++c;
            }
            aggregate["mean_rate"] = std::move(mean);
            aggregate["sd_rate"] = std::move(sd);
        } else {
            aggregate["mean_rate"] = nullptr;
            aggregate["sd_rate"] = nullptr;
        }
        if (cfg.check_identity) aggregate["max_identity_residual"] = ens.max_identity_residual;

        json summary{{"config", cfg.canonical},
                     {"config_hash", cfg.config_hash},
                     {"spectral", spectral_to_json(sp)},
                     {"runs", std::move(runs)},
                     {"aggregate", std::move(aggregate)}};
        if (cfg.run.truth >= 0) {
            const RatePrediction pred =
                theoretical_rate(cfg.run.rule, cfg.run.net, sp, cfg.run.sig, cfg.run.truth);
            summary["theoretical"] = prediction_to_json(pred, cfg.run.states);
        } else {
            summary["theoretical"] = nullptr;
        }

        const fs::path summary_path = dir / "summary.json";
        {
            std::ofstream out(summary_path, std::ios::binary);
            if (!out) throw validation_error("cannot write '" + summary_path.string() + "'");
            written.push_back(summary_path);
            out << summary.dump(2) << "\n";
            if (!out.good())
                throw validation_error("failed while writing '" + summary_path.string() + "'");
        }
        std::cout << "wrote " << cfg.n_seeds << " trajectories and summary.json to "
                  << dir.string() << "\n";
    } catch (...) {
        cleanup();
        throw;
    }
}

void cmd_compare(const CliOptions& opt) {
    const ExperimentConfig cfg = load_config_file(opt.config_path);
    if (cfg.run.truth < 0)
        throw validation_error("compare: the config must pin 'truth' to a state label");
    if (cfg.run.horizon < 100)
        throw validation_error("compare: horizon must be >= 100 for a trend fit");
    const int threads = opt.threads > 0 ? opt.threads : cfg.threads;
    const SpectralData sp = analyze_network(cfg.run.net, kSpectralTol);
    const RatePrediction pred =
        theoretical_rate(cfg.run.rule, cfg.run.net, sp, cfg.run.sig, cfg.run.truth);
    if (!pred.has_closed_form)
        throw validation_error("compare: no closed-form prediction for this setup (" + pred.note +
                               ")");

    const Ensemble ens =
        monte_carlo(cfg.run, sp, cfg.n_seeds, threads, {}, cfg.check_identity, opt.window);
    if (ens.failed > 0)
        throw numeric_error("compare: " + std::to_string(ens.failed) + " run(s) failed numerically");

    json theo = json::object();
    json emp_mean = json::object();
    json emp_sd = json::object();
    json abs_err = json::object();
    json rel_err = json::object();
    for (std::size_t c = 0; c < pred.false_states.size(); ++c) {
        const std::string& label =
            cfg.run.states.states[static_cast<std::size_t>(pred.false_states[c])];
        const double t = pred.rates[c];
        const double e = ens.mean_rate[c];
        theo[label] = t;
        emp_mean[label] = e;
        emp_sd[label] = ens.sd_rate[c];
        abs_err[label] = std::abs(e - t);
        rel_err[label] = t != 0.0 ? std::abs(e - t) / t : (e == 0.0 ? 0.0 : 1.0);
    }

    json out{{"config_hash", cfg.config_hash},
             {"rule", pred.rule},
             {"truth", cfg.run.states.states[static_cast<std::size_t>(cfg.run.truth)]},
             {"n_seeds", cfg.n_seeds},
             {"window", opt.window},
             {"theoretical", std::move(theo)},
             {"empirical_mean", std::move(emp_mean)},
             {"empirical_sd", std::move(emp_sd)},
             {"abs_error", std::move(abs_err)},
             {"rel_error", std::move(rel_err)}};

    const fs::path dir = resolve_output_dir(opt, cfg);
    fs::create_directories(dir);
    const fs::path path = dir / "compare.json";
    std::ofstream file(path, std::ios::binary);
    if (!file) throw validation_error("cannot write '" + path.string() + "'");
    file << out.dump(2) << "\n";
    if (!file.good()) throw validation_error("failed while writing '" + path.string() + "'");
    std::cout << out.dump(2) << "\n";
}

}  // namespace beliefsim
