#include "beliefsim/analysis.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "beliefsim/engine.hpp"
#include "beliefsim/errors.hpp"

namespace beliefsim {

RatePrediction theoretical_rate(const UpdateRule& rule, const Network& net,
                                const SpectralData& spectral, const SignalModel& sig, int truth) {
    const int n = net.n;
    if (sig.n_agents() != n)
        throw validation_error("theoretical_rate: signal model does not match the network size");
    const int k_states = sig.tables.front().rows;
    if (truth < 0 || truth >= k_states)
        throw validation_error("theoretical_rate: truth index out of range");

    RatePrediction out;
    out.rule = rule_name(rule);
    out.identifiable = check_identifiability(sig, truth).identifiable;
    for (int k = 0; k < k_states; ++k)
        if (k != truth) out.false_states.push_back(k);

    if (std::holds_alternative<TimeVaryingLogLinear>(rule)) {
        out.note = "no closed form under a time-varying schedule; "
                   "use the mixing-coefficient diagnostics instead";
        return out;
    }
    if (std::holds_alternative<GeometricAveragePrior>(rule) && !spectral.aperiodic) {
        out.note = "the neighbor-averaging chain is periodic, so the stationary-weight "
                   "formula does not apply";
        return out;
    }

    if (std::holds_alternative<CommonFixedPrior>(rule)) {
        out.weights_kind = "uniform";
        out.weights.assign(static_cast<std::size_t>(n), 1.0 / static_cast<double>(n));
    } else if (const auto* rw = std::get_if<RandomWalkNeighbor>(&rule)) {
        out.weights_kind = "walk_stationary";
        const Matrix p = rw->choice_probs.rows > 0 ? rw->choice_probs : normalized_adjacency(net);
        out.weights = stationary_distribution(p);
    } else {
        out.weights_kind = "flow_stationary";
        out.weights = spectral.stationary;
    }

    const Matrix lambda = signal_divergences(sig, truth);
    out.rates.resize(out.false_states.size());
    out.min_rate = std::numeric_limits<double>::infinity();
    for (std::size_t c = 0; c < out.false_states.size(); ++c) {
        double r = 0.0;
        for (int i = 0; i < n; ++i)
            r += out.weights[static_cast<std::size_t>(i)] * (-lambda(i, out.false_states[c]));
        out.rates[c] = r;
        if (r < out.min_rate) {
            out.min_rate = r;
            out.argmin_state = out.false_states[c];
        }
    }
    out.has_closed_form = true;
    return out;
}

MixCoefficients m_coefficients(const WeightSchedule& schedule, long t, int j_cap) {
    schedule.validate();
    if (t < 1) throw validation_error("m_coefficients: horizon must be >= 1");
    if (j_cap < 0) j_cap = t <= 1024 ? static_cast<int>(t) : 64;
    if (j_cap < 1) throw validation_error("m_coefficients: order cap must be >= 1");
    j_cap = static_cast<int>(std::min<long>(j_cap, t));

    MixCoefficients mc;
    mc.t = t;
    mc.j_cap = j_cap;
    mc.x.assign(static_cast<std::size_t>(t) + 1, 0.0);
    for (long u = 1; u <= t; ++u) {
        const double xu = schedule.at(u);
        if (!std::isfinite(xu) || xu < 0.0)
            throw numeric_error("m_coefficients: schedule weight at step " + std::to_string(u) +
                                " is not a finite nonnegative number");
        mc.x[static_cast<std::size_t>(u)] = xu;
    }

    mc.table = Matrix(static_cast<int>(t) + 1, j_cap + 1);
    mc.table(static_cast<int>(t), 0) = 1.0;
    for (long tau = t - 1; tau >= 0; --tau) {
        const double y = mc.x[static_cast<std::size_t>(tau) + 1];
        const int r = static_cast<int>(tau);
        mc.table(r, 0) = 1.0;
        for (int j = 1; j <= j_cap; ++j)
            mc.table(r, j) = mc.table(r + 1, j) + y * mc.table(r + 1, j - 1);
    }

    mc.m1_suffix.assign(static_cast<std::size_t>(t) + 1, 0.0);
    for (long tau = t - 1; tau >= 0; --tau)
        mc.m1_suffix[static_cast<std::size_t>(tau)] =
            mc.m1_suffix[static_cast<std::size_t>(tau) + 1] + mc.x[static_cast<std::size_t>(tau) + 1];
    mc.m1_total = mc.m1_suffix[0];
    return mc;
}

namespace {

std::vector<long> report_sample_times(long t_max) {
    std::vector<long> out;
    if (t_max <= 96) {
        for (long u = 1; u <= t_max; ++u) out.push_back(u);
        return out;
    }
    const double steps = 96.0;
    const double ratio = std::pow(static_cast<double>(t_max), 1.0 / steps);
    double v = 1.0;
    long last = 0;
    for (int i = 0; i <= static_cast<int>(steps); ++i) {
        const long u = std::min<long>(t_max, static_cast<long>(std::llround(v)));
        if (u > last) {
            out.push_back(u);
            last = u;
        }
        v *= ratio;
    }
    const long dec = std::max<long>(1, t_max / 10);
    if (std::find(out.begin(), out.end(), dec) == out.end()) {
        out.push_back(dec);
        std::sort(out.begin(), out.end());
    }
    if (out.back() != t_max) out.push_back(t_max);
    return out;
}

}  // namespace

LearningConditionReport learning_condition_report(const MixCoefficients& coeffs,
                                                  const SpectralData& spectral, double psi_norm) {
    const long t = coeffs.t;
    LearningConditionReport rep;
    rep.horizon = t;
    rep.depth = std::min(spectral.positivity_power(), 12);
    rep.m1_total = coeffs.m1_total;
    const long dec = std::max<long>(1, t / 10);
    rep.m1_last_decade_share =
        coeffs.m1_total > 0.0 ? coeffs.m1_suffix[static_cast<std::size_t>(dec)] / coeffs.m1_total
                              : 0.0;
    rep.bias_bound = psi_norm * std::exp(std::min(coeffs.m1_total, 700.0));

    // Forward pass over the horizon. Row tau carries the low-order sums
    // (j < depth) and the full product over its suffix; the tail of order
    // >= depth is their clamped difference.
    const int d = rep.depth;
    std::vector<double> low(static_cast<std::size_t>(t) * d, 0.0);
    std::vector<double> q(static_cast<std::size_t>(t), 0.0);
    std::vector<double> s_tail(static_cast<std::size_t>(t) + 1, 0.0);
    std::vector<double> s_any(static_cast<std::size_t>(t) + 1, 0.0);
    long saturated_at = 0;

    for (long step = 1; step <= t; ++step) {
        // open the row for tau = step-1 (empty suffix so far)
        const std::size_t row = static_cast<std::size_t>(step - 1);
        low[row * d] = 1.0;
        for (int j = 1; j < d; ++j) low[row * d + j] = 0.0;
        q[row] = 1.0;

        const double y = coeffs.x[static_cast<std::size_t>(step)];
        bool overflow = false;
        double tail_sum = 0.0;
        double any_sum = 0.0;
        for (long tau = 0; tau < step; ++tau) {
            double* m = &low[static_cast<std::size_t>(tau) * d];
            for (int j = d - 1; j >= 1; --j) m[j] += y * m[j - 1];
            q[static_cast<std::size_t>(tau)] *= 1.0 + y;
            const double qv = q[static_cast<std::size_t>(tau)];
            if (qv > 1e300) overflow = true;
            double lo = 0.0;
            for (int j = 0; j < d; ++j) lo += m[j];
            tail_sum += std::max(0.0, qv - lo);
            any_sum += std::max(0.0, qv - m[0]);
        }
        s_tail[static_cast<std::size_t>(step)] = tail_sum;
        s_any[static_cast<std::size_t>(step)] = any_sum;
        if (overflow) {
            rep.overflowed = true;
            saturated_at = step;
            for (long u = step + 1; u <= t; ++u) {
                s_tail[static_cast<std::size_t>(u)] = tail_sum;
                s_any[static_cast<std::size_t>(u)] = any_sum;
            }
            break;
        }
    }

    const long effective_t = saturated_at > 0 ? saturated_at : t;
    rep.sample_times = report_sample_times(effective_t);
    for (long u : rep.sample_times) {
        rep.series_tail.push_back(s_tail[static_cast<std::size_t>(u)]);
        rep.series_any.push_back(s_any[static_cast<std::size_t>(u)]);
    }

    const double s_end = s_tail[static_cast<std::size_t>(t)];
    const double s_dec = s_tail[static_cast<std::size_t>(dec)];
    rep.tail_last_decade_gain = s_end > 0.0 ? (s_end - s_dec) / s_end : 0.0;

    rep.growth_lo = std::numeric_limits<double>::infinity();
    rep.growth_hi = 0.0;
    for (long u = std::max<long>(1, t / 2); u <= t; ++u) {
        const double g = s_tail[static_cast<std::size_t>(u)] / static_cast<double>(u);
        rep.growth_lo = std::min(rep.growth_lo, g);
        rep.growth_hi = std::max(rep.growth_hi, g);
    }
    if (!std::isfinite(rep.growth_lo)) rep.growth_lo = 0.0;

    rep.x_diverging = rep.overflowed || rep.m1_last_decade_share >= 0.9 - 1e-12;
    if (rep.x_diverging)
        rep.verdict = "necessary-condition-violated";
    else if (rep.tail_last_decade_gain >= 0.01)
        rep.verdict = "learning-trend";
    else
        rep.verdict = "non-learning-trend";
    return rep;
}

RateEstimate empirical_rate(const Trajectory& traj, int theta_check, double window) {
    if (traj.horizon < 100)
        throw validation_error("empirical_rate: needs a horizon of at least 100 steps");
    if (!(window > 0.0 && window <= 1.0))
        throw validation_error("empirical_rate: window must lie in (0, 1]");
    int fi = -1;
    for (std::size_t c = 0; c < traj.false_states.size(); ++c)
        if (traj.false_states[c] == theta_check) fi = static_cast<int>(c);
    if (fi < 0) throw validation_error("empirical_rate: theta_check is not a false state");

    RateEstimate est;
    est.t_end = traj.horizon;
    est.t_begin = std::min<long>(traj.horizon - 1,
                                 traj.horizon - static_cast<long>(window * traj.horizon));
    if (est.t_begin < 0) est.t_begin = 0;
    const long m = est.t_end - est.t_begin + 1;
    const double t_mean = 0.5 * static_cast<double>(est.t_begin + est.t_end);

    est.rates.resize(static_cast<std::size_t>(traj.n));
    for (int i = 0; i < traj.n; ++i) {
        double y_mean = 0.0;
        for (long u = est.t_begin; u <= est.t_end; ++u) y_mean += traj.phi_at(u, i, fi);
        y_mean /= static_cast<double>(m);
        double num = 0.0;
        double den = 0.0;
        for (long u = est.t_begin; u <= est.t_end; ++u) {
            const double dt = static_cast<double>(u) - t_mean;
            num += dt * (traj.phi_at(u, i, fi) - y_mean);
            den += dt * dt;
        }
        est.rates[static_cast<std::size_t>(i)] = -num / den;
    }

    double mean = 0.0;
    for (double r : est.rates) mean += r;
    mean /= static_cast<double>(est.rates.size());
    est.mean_rate = mean;
    if (est.rates.size() > 1) {
        double ss = 0.0;
        for (double r : est.rates) ss += (r - mean) * (r - mean);
        est.sd_rate = std::sqrt(ss / static_cast<double>(est.rates.size() - 1));
    }
    return est;
}

PowerDiagnostic power_convergence_diagnostic(const Matrix& b, std::span<const double> limit,
                                             double eps, long cap) {
    if (b.rows != b.cols) throw validation_error("power_convergence_diagnostic: matrix not square");
    if (static_cast<int>(limit.size()) != b.rows)
        throw validation_error("power_convergence_diagnostic: limit vector has the wrong length");
    if (!(eps > 0.0)) throw validation_error("power_convergence_diagnostic: eps must be > 0");
    if (cap < 1) throw validation_error("power_convergence_diagnostic: cap must be >= 1");

    PowerDiagnostic diag;
    diag.deviation = std::numeric_limits<double>::infinity();
    Matrix m = b;
    for (long p = 1; p <= cap; ++p) {
        double dev = 0.0;
        for (int i = 0; i < b.rows; ++i)
            for (int j = 0; j < b.cols; ++j)
                dev = std::max(dev, std::abs(m(i, j) - limit[static_cast<std::size_t>(j)]));
        if (dev < diag.deviation) {
            diag.deviation = dev;
            diag.power = p;
        }
        if (dev <= eps) {
            diag.reached = true;
            diag.power = p;
            diag.deviation = dev;
            return diag;
        }
        if (p < cap) m = mat_mul(m, b);
    }
    return diag;
}

}  // namespace beliefsim
