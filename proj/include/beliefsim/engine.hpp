#pragma once

#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include "beliefsim/analysis.hpp"
#include "beliefsim/beliefs.hpp"
#include "beliefsim/graph.hpp"
#include "beliefsim/model.hpp"
#include "beliefsim/rules.hpp"

namespace beliefsim {

struct RecordOptions {
    long belief_every = 1;  // linear-belief snapshot cadence; 0 keeps only t=0 and t=T
    bool signals = true;
    bool choices = true;
};

struct RunConfig {
    Network net;
    StateSpace states;
    SignalModel sig;
    InitialPriors priors;
    UpdateRule rule;
    long horizon = 0;        // rule steps after the private initialization round
    std::uint64_t seed = 0;
    int truth = -1;          // -1 draws the true state from the nature prior per seed
    RecordOptions record;
};

void validate_run_config(const RunConfig& cfg, const SpectralData& spectral);

struct BeliefSnapshot {
    long t = 0;
    std::vector<double> beliefs;  // n * n_states, linear domain
};

// One realized run. Log belief ratios are dense over time; linear beliefs are
// kept only at snapshot times to bound memory on long horizons.
struct Trajectory {
    int n = 0;
    int n_states = 0;
    int truth = 0;
    long horizon = 0;
    std::uint64_t seed = 0;
    std::vector<int> false_states;
    std::vector<double> phi;    // (horizon+1) * n * (n_states-1)
    std::vector<int> signals;   // (horizon+1) * n when recorded
    std::vector<int> choices;   // horizon * n for neighbor-sampling rules when recorded
    std::vector<BeliefSnapshot> snapshots;

    int n_false() const { return n_states - 1; }
    std::span<const double> phi_at(long t) const;
    std::span<const double> phi_at(long t, int agent) const;
    double phi_at(long t, int agent, int false_index) const;
    Dist beliefs_from_phi(long t, int agent) const;
    int signal_at(long t, int agent) const;
    int choice_at(long t, int agent) const;  // defined for t >= 1
};

Trajectory simulate(const RunConfig& cfg, const SpectralData& spectral);

// Per-seed digest kept by the ensemble after the trajectory is released.
struct SeedSummary {
    std::uint64_t seed = 0;
    int truth = 0;
    std::string error;                       // non-empty if the run failed numerically
    std::vector<RateEstimate> rates;         // per false state; empty on short horizons
    std::vector<IdentityReport> identity;    // per false state when requested
    std::vector<double> final_false_beliefs; // n * (n_states-1), linear domain
    double max_false_belief_final = 0.0;
};

struct Ensemble {
    int truth_mode = -1;  // fixed truth, or -1 when drawn per seed
    std::vector<SeedSummary> runs;
    int failed = 0;
    std::vector<double> mean_rate;  // per false state, over successful runs with rates
    std::vector<double> sd_rate;
    double max_identity_residual = 0.0;
};

// Called in seed order for every successful run, before its trajectory is
// discarded. May be empty.
using TrajectorySink = std::function<void(const SeedSummary&, const Trajectory&)>;

// Runs `n_seeds` independent runs with seeds base.seed ^ k, at most
// `n_threads` in flight. Outputs are byte-identical for any thread count.
Ensemble monte_carlo(const RunConfig& base, const SpectralData& spectral, int n_seeds,
                     int n_threads, const TrajectorySink& sink = {},
                     bool compute_identity = false, double rate_window = 0.5);

}  // namespace beliefsim
