#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <span>
#include <string>
#include <vector>

#include "beliefsim/errors.hpp"

namespace beliefsim {

/// A finite probability distribution in the linear domain.
using Dist = std::vector<double>;

inline double log_sum_exp(std::span<const double> v) {
    double m = -std::numeric_limits<double>::infinity();
    for (double x : v) m = std::max(m, x);
    if (!std::isfinite(m)) return m; // all -inf (or an explicit inf/nan poked through)
    double s = 0.0;
    for (double x : v) s += std::exp(x - m);
    return m + std::log(s);
}

/// Normalize a vector of log-weights in place so that sum(exp(v)) == 1.
/// Throws numeric_error when the total mass is zero (all entries -inf).
inline void log_normalize_in_place(std::span<double> v) {
    const double z = log_sum_exp(v);
    if (!std::isfinite(z))
        throw numeric_error("zero normalizer: no state has positive posterior mass");
    for (double& x : v) x -= z;
}

inline Dist to_linear(std::span<const double> log_values) {
    Dist out(log_values.size());
    for (std::size_t i = 0; i < log_values.size(); ++i) out[i] = std::exp(log_values[i]);
    return out;
}

/// Elementwise log. Zero entries map to -inf; negative entries are rejected.
inline std::vector<double> to_log(std::span<const double> linear) {
    std::vector<double> out(linear.size());
    for (std::size_t i = 0; i < linear.size(); ++i) {
        if (linear[i] < 0.0)
            throw validation_error("negative probability entry");
        out[i] = std::log(linear[i]);
    }
    return out;
}

/// Checks that `d` is a probability distribution: entries in [0,1] (strictly
/// positive unless allow_zero), summing to 1 within tol. `what` names the
/// offending object in error messages.
inline void validate_distribution(std::span<const double> d, const std::string& what,
                                  bool allow_zero = false, double tol = 1e-9) {
    if (d.empty()) throw validation_error(what + ": empty distribution");
    double sum = 0.0;
    for (std::size_t i = 0; i < d.size(); ++i) {
        const double x = d[i];
        if (!std::isfinite(x) || x < 0.0)
            throw validation_error(what + "[" + std::to_string(i) + "]: entries must be finite and >= 0");
        if (!allow_zero && x == 0.0)
            throw validation_error(what + "[" + std::to_string(i) + "]: zero entry not allowed here");
        sum += x;
    }
    if (std::abs(sum - 1.0) > tol)
        throw validation_error(what + ": entries sum to " + std::to_string(sum) + ", expected 1");
}

inline Dist uniform_dist(int k) {
    return Dist(static_cast<std::size_t>(k), 1.0 / static_cast<double>(k));
}

} // namespace beliefsim
