#pragma once

#include <span>
#include <string>
#include <vector>

#include "beliefsim/graph.hpp"
#include "beliefsim/model.hpp"
#include "beliefsim/rules.hpp"

namespace beliefsim {

struct Trajectory;  // engine.hpp

// Closed-form asymptotic learning rate, when the rule admits one. `rates`
// holds one entry per non-truth state; the overall rate at which the worst
// false state is shed is `min_rate`. Rules without a closed form (or whose
// preconditions fail) set has_closed_form=false and explain why in `note`.
struct RatePrediction {
    std::string rule;
    std::string weights_kind;          // "uniform" | "walk_stationary" | "flow_stationary" | ""
    std::vector<double> weights;       // per-agent weights behind the formula
    std::vector<int> false_states;
    std::vector<double> rates;         // per false state, >= 0
    int argmin_state = -1;
    double min_rate = 0.0;
    bool identifiable = false;
    bool has_closed_form = false;
    std::string note;
};

RatePrediction theoretical_rate(const UpdateRule& rule, const Network& net,
                                const SpectralData& spectral, const SignalModel& sig, int truth);

// Elementary symmetric sums M_j of the schedule weights {x_u : tau < u <= t}
// for every suffix start tau, up to order j_cap. Order-1 suffix sums are kept
// separately so callers can probe divergence cheaply.
struct MixCoefficients {
    long t = 0;
    int j_cap = 0;
    std::vector<double> x;           // x_1..x_t (index 0 unused)
    Matrix table;                    // (t+1) rows (tau), j_cap+1 cols (order j)
    std::vector<double> m1_suffix;   // M_1^{(t,tau)} for tau = 0..t
    double m1_total = 0.0;           // M_1^{(t,0)}

    double at(long tau, int j) const { return table(static_cast<int>(tau), j); }
};

// j_cap < 0 selects the full table for small horizons and a bounded-order
// table for large ones.
MixCoefficients m_coefficients(const WeightSchedule& schedule, long t, int j_cap = -1);

// Trend diagnostics for the sufficient/necessary learning conditions driven
// by the schedule alone. `series_tail` tracks the running sum over suffixes
// of all mixing terms of order >= depth; a schedule can only sustain learning
// through the network if that series keeps growing.
struct LearningConditionReport {
    long horizon = 0;
    int depth = 1;
    double m1_total = 0.0;
    double m1_last_decade_share = 0.0;  // fraction of M_1 mass placed after t/10
    bool x_diverging = false;
    bool overflowed = false;
    std::vector<long> sample_times;
    std::vector<double> series_tail;    // orders >= depth
    std::vector<double> series_any;     // orders >= 1
    double tail_last_decade_gain = 0.0;
    double growth_lo = 0.0;             // min of series_tail(t)/t over trailing half
    double growth_hi = 0.0;             // max of the same
    double bias_bound = 1.0;            // psi_norm * exp(m1_total)
    std::string verdict;  // learning-trend | non-learning-trend | necessary-condition-violated
};

LearningConditionReport learning_condition_report(const MixCoefficients& coeffs,
                                                  const SpectralData& spectral,
                                                  double psi_norm = 1.0);

// Trailing-window least-squares slope of each agent's log belief ratio, sign
// flipped so learning shows up as a positive rate.
struct RateEstimate {
    long t_begin = 0;
    long t_end = 0;
    std::vector<double> rates;  // per agent
    double mean_rate = 0.0;
    double sd_rate = 0.0;
};

RateEstimate empirical_rate(const Trajectory& traj, int theta_check, double window = 0.5);

// Smallest power at which every row of B^m lands within eps of the limiting
// weight vector. Honest about failure: non-regular matrices may never reach
// the target, in which case `reached` stays false and `deviation` reports the
// best miss seen by the cap.
struct PowerDiagnostic {
    bool reached = false;
    long power = 0;
    double deviation = 0.0;
};

PowerDiagnostic power_convergence_diagnostic(const Matrix& b, std::span<const double> limit,
                                             double eps, long cap);

}  // namespace beliefsim
