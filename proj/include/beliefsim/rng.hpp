#pragma once

#include <cstdint>
#include <span>

#include "beliefsim/errors.hpp"

namespace beliefsim {

/// SplitMix64 finalizer; the work-horse mixing function for the substream scheme.
inline std::uint64_t mix64(std::uint64_t z) {
    z += 0x9e3779b97f4a7c15ULL;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

/// What a substream is consumed for. Part of the stream key so that draws of
/// different kinds can never alias.
enum class Draw : std::uint64_t {
    signal = 1,        // private signal of an agent in a round
    neighbor = 2,      // neighbor choice of an agent in a round
    truth = 3,         // sampling the realized state of the world
    generic = 4,       // anything else (tests, auxiliary chains)
};

/// Counter-based random substream. The key is derived from (master seed,
/// agent, step, purpose); the k-th output is a pure function of (key, k).
/// This gives every (agent, round) its own independent stream, so simulated
/// trajectories do not depend on the order in which agents are updated, and
/// identical configs reproduce identical draws on any machine.
class Substream {
public:
    Substream(std::uint64_t master, std::uint64_t agent, std::uint64_t step, Draw purpose)
        : key_(derive(master, agent, step, purpose)) {}

    std::uint64_t next_u64() { return mix64(key_ + 0x9e3779b97f4a7c15ULL * ++counter_); }

    /// Uniform double in [0, 1) with 53 random bits.
    double next_unit() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

private:
    static std::uint64_t derive(std::uint64_t master, std::uint64_t agent,
                                std::uint64_t step, Draw purpose) {
        std::uint64_t k = mix64(master);
        k = mix64(k ^ (agent + 0x51ed270b0a1c361bULL));
        k = mix64(k ^ (step + 0x2545f4914f6cdd1dULL));
        k = mix64(k ^ static_cast<std::uint64_t>(purpose));
        return k;
    }

    std::uint64_t key_;
    std::uint64_t counter_ = 0;
};

/// Inverse-CDF draw from a finite distribution (linear domain, entries >= 0).
/// Deterministic given the stream state; a float-guard returns the last
/// positive-probability index when rounding leaves the cumulative short of u.
inline int sample_discrete(std::span<const double> probs, Substream& rng) {
    if (probs.empty()) throw validation_error("sample_discrete: empty distribution");
    const double u = rng.next_unit();
    double acc = 0.0;
    int last_positive = -1;
    for (std::size_t i = 0; i < probs.size(); ++i) {
        if (probs[i] > 0.0) last_positive = static_cast<int>(i);
        acc += probs[i];
        if (u < acc) return static_cast<int>(i);
    }
    if (last_positive < 0) throw numeric_error("sample_discrete: distribution has no mass");
    return last_positive;
}

} // namespace beliefsim
