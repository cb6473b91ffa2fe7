#include "doctest.h"

#include <cmath>
#include <cstdint>
#include <vector>

#include "beliefsim/analysis.hpp"
#include "beliefsim/engine.hpp"
#include "beliefsim/errors.hpp"
#include "beliefsim/graph.hpp"
#include "beliefsim/model.hpp"
#include "beliefsim/rules.hpp"

using namespace beliefsim;

namespace {

Network cycle(int n) {
    std::vector<std::vector<int>> nbrs(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) nbrs[static_cast<std::size_t>(i)] = {(i + 1) % n};
    return Network::from_neighborhoods(std::move(nbrs));
}

Matrix binary_tilt(double k) {
    const double b = (1.0 - std::sqrt(1.0 - std::exp(-2.0 * k))) / 2.0;
    Matrix t(2, 2);
    t(0, 0) = 0.5;
    t(0, 1) = 0.5;
    t(1, 0) = b;
    t(1, 1) = 1.0 - b;
    return t;
}

SignalModel tilted(const std::vector<double>& ks) {
    SignalModel sig;
    for (double k : ks) sig.tables.push_back(binary_tilt(k));
    return sig;
}

// All subsets of the suffix weights {x_u : tau < u <= t}, accumulated by size.
double brute_symmetric_sum(const std::vector<double>& x, long t, long tau, int j) {
    const int m = static_cast<int>(t - tau);
    double total = j == 0 ? 1.0 : 0.0;
    if (j == 0) return total;
    for (std::uint32_t mask = 1; mask < (1u << m); ++mask) {
        if (__builtin_popcount(mask) != j) continue;
        double prod = 1.0;
        for (int b = 0; b < m; ++b)
            if (mask & (1u << b)) prod *= x[static_cast<std::size_t>(tau + 1 + b)];
        total += prod;
    }
    return total;
}

} // namespace

TEST_CASE("closed-form rate for the circle rule is the plain average") {
    const Network net = cycle(3);
    const SpectralData sp = analyze_network(net);
    const SignalModel sig = tilted({0.1, 0.2, 0.3});

    const RatePrediction pred = theoretical_rate(CommonFixedPrior{}, net, sp, sig, 0);
    CHECK(pred.has_closed_form);
    CHECK(pred.rule == "common_prior");
    CHECK(pred.weights_kind == "uniform");
    CHECK(pred.identifiable);
    REQUIRE(pred.rates.size() == 1);
    CHECK(pred.rates[0] == doctest::Approx(0.2).epsilon(1e-12));
    CHECK(pred.min_rate == doctest::Approx(0.2).epsilon(1e-12));
    CHECK(pred.argmin_state == 1);

    // a population blind everywhere is flagged as unidentifiable
    const RatePrediction blind = theoretical_rate(CommonFixedPrior{}, net, sp, tilted({0, 0, 0}), 0);
    CHECK(!blind.identifiable);
    CHECK(blind.min_rate == doctest::Approx(0.0));
}

TEST_CASE("random-walk rate weights by the walk's stationary distribution") {
    SUBCASE("uniform choice on a 2-ring") {
        const Network net = cycle(2);
        const SpectralData sp = analyze_network(net);
        const RatePrediction pred =
            theoretical_rate(RandomWalkNeighbor{}, net, sp, tilted({0.1, 0.3}), 0);
        CHECK(pred.has_closed_form);
        CHECK(pred.weights_kind == "walk_stationary");
        CHECK(pred.weights[0] == doctest::Approx(0.5).epsilon(1e-10));
        CHECK(pred.min_rate == doctest::Approx(0.2).epsilon(1e-10));
    }
    SUBCASE("custom choice matrix") {
        const Network net = Network::from_neighborhoods({{1}, {0, 1}});
        const SpectralData sp = analyze_network(net);
        Matrix p(2, 2);
        p(0, 1) = 1.0;
        p(1, 0) = 0.5;
        p(1, 1) = 0.5;
        const RatePrediction pred =
            theoretical_rate(RandomWalkNeighbor{p}, net, sp, tilted({0.3, 0.15}), 0);
        CHECK(pred.weights[0] == doctest::Approx(1.0 / 3.0).epsilon(1e-10));
        CHECK(pred.weights[1] == doctest::Approx(2.0 / 3.0).epsilon(1e-10));
        CHECK(pred.min_rate == doctest::Approx(0.2).epsilon(1e-10));
    }
}

TEST_CASE("geometric averaging has no closed form on a periodic network") {
    const Network net = cycle(2);
    const SpectralData sp = analyze_network(net);
    const RatePrediction pred =
        theoretical_rate(GeometricAveragePrior{}, net, sp, tilted({0.1, 0.3}), 0);
    CHECK(!pred.has_closed_form);
    CHECK(pred.note.find("periodic") != std::string::npos);

    // ... but works on an aperiodic one, weighting by the flow-stationary vector.
    const Network good = Network::from_neighborhoods({{4}, {0, 3}, {1}, {0, 2}, {3}});
    const SpectralData sp2 = analyze_network(good);
    const RatePrediction pred2 = theoretical_rate(
        GeometricAveragePrior{}, good, sp2, tilted({0.1, 0.05, 0.15, 0.08, 0.12}), 0);
    CHECK(pred2.has_closed_form);
    CHECK(pred2.weights_kind == "flow_stationary");
    double want = 0.0;
    const std::vector<double> ks = {0.1, 0.05, 0.15, 0.08, 0.12};
    for (int i = 0; i < 5; ++i) want += sp2.stationary[static_cast<std::size_t>(i)] *
                                        ks[static_cast<std::size_t>(i)];
    CHECK(pred2.min_rate == doctest::Approx(want).epsilon(1e-10));
}

TEST_CASE("weighted self-belief keeps its closed form on periodic networks") {
    const Network net = cycle(5);
    const SpectralData sp = analyze_network(net);
    const RatePrediction pred = theoretical_rate(WeightedSelfBelief{0.2}, net, sp,
                                                 tilted({0.10, 0.05, 0.15, 0.08, 0.12}), 0);
    CHECK(pred.has_closed_form);
    CHECK(pred.weights_kind == "flow_stationary");
    CHECK(pred.min_rate == doctest::Approx(0.1).epsilon(1e-10));
}

TEST_CASE("time-varying rule reports no closed form") {
    const Network net = cycle(3);
    const SpectralData sp = analyze_network(net);
    const RatePrediction pred =
        theoretical_rate(TimeVaryingLogLinear{}, net, sp, tilted({0.1, 0.2, 0.3}), 0);
    CHECK(!pred.has_closed_form);
    CHECK(!pred.note.empty());
    CHECK(pred.rates.empty());
}

TEST_CASE("mixing coefficients: hand-worked inverse-square case") {
    WeightSchedule sq{WeightSchedule::Kind::power, 1.0, 2.0};
    const MixCoefficients mc = m_coefficients(sq, 3);
    CHECK(mc.j_cap == 3);
    CHECK(mc.at(0, 1) == doctest::Approx(49.0 / 36.0).epsilon(1e-14));
    CHECK(mc.at(0, 2) == doctest::Approx(7.0 / 18.0).epsilon(1e-14));
    CHECK(mc.at(0, 3) == doctest::Approx(1.0 / 36.0).epsilon(1e-14));
    CHECK(mc.at(1, 1) == doctest::Approx(13.0 / 36.0).epsilon(1e-14));
    CHECK(mc.at(2, 1) == doctest::Approx(1.0 / 9.0).epsilon(1e-14));
    CHECK(mc.at(3, 0) == 1.0);
    CHECK(mc.at(3, 1) == 0.0);
    CHECK(mc.m1_total == doctest::Approx(49.0 / 36.0).epsilon(1e-14));
    for (long tau = 0; tau <= 3; ++tau)
        CHECK(mc.m1_suffix[static_cast<std::size_t>(tau)] ==
              doctest::Approx(mc.at(tau, 1)).epsilon(1e-14));

    CHECK_THROWS_AS(m_coefficients(sq, 0), validation_error);
    CHECK_THROWS_AS(m_coefficients(sq, 5, 0), validation_error);
}

TEST_CASE("mixing coefficients match exhaustive subset enumeration") {
    const std::vector<WeightSchedule> schedules = {
        {WeightSchedule::Kind::power, 1.0, 1.0},
        {WeightSchedule::Kind::log_power, 1.0, 1.0},
    };
    for (const auto& sch : schedules) {
        for (long t = 1; t <= 10; ++t) {
            const MixCoefficients mc = m_coefficients(sch, t);
            for (long tau = 0; tau <= t; ++tau)
                for (int j = 0; j <= static_cast<int>(t - tau); ++j)
                    CHECK(std::abs(mc.at(tau, j) - brute_symmetric_sum(mc.x, t, tau, j)) <= 1e-12);
        }
    }
}

TEST_CASE("mixing coefficients obey the factorial bound") {
    WeightSchedule harmonic{WeightSchedule::Kind::power, 1.0, 1.0};
    const MixCoefficients mc = m_coefficients(harmonic, 200, 8);
    double jfac = 1.0;
    for (int j = 1; j <= 8; ++j) {
        jfac *= j;
        for (long tau = 0; tau <= 200; ++tau) {
            const double m1 = mc.m1_suffix[static_cast<std::size_t>(tau)];
            CHECK(mc.at(tau, j) <= std::pow(m1, j) / jfac + 1e-12);
        }
    }
}

TEST_CASE("default order cap covers small horizons fully and large ones boundedly") {
    WeightSchedule h{WeightSchedule::Kind::power, 1.0, 1.0};
    CHECK(m_coefficients(h, 10).j_cap == 10);
    CHECK(m_coefficients(h, 2000, 4).j_cap == 4);
    CHECK(m_coefficients(h, 2000).j_cap == 64);
}

TEST_CASE("schedule trend verdicts") {
    const Network net = cycle(3);
    const SpectralData sp = analyze_network(net);

    SUBCASE("harmonic weights sustain a learning trend") {
        WeightSchedule h{WeightSchedule::Kind::power, 1.0, 1.0};
        const LearningConditionReport rep =
            learning_condition_report(m_coefficients(h, 2000, 4), sp);
        CHECK(rep.verdict == "learning-trend");
        CHECK(!rep.x_diverging);
        CHECK(!rep.overflowed);
        CHECK(rep.depth == sp.diameter + 1);
        CHECK(rep.tail_last_decade_gain >= 0.01);
        CHECK(rep.growth_hi >= rep.growth_lo);
        CHECK(rep.sample_times.back() == 2000);
        CHECK(rep.series_tail.size() == rep.sample_times.size());
    }
    SUBCASE("fast-decaying weights flatten out") {
        WeightSchedule g{WeightSchedule::Kind::geometric, 1.0, 0.5};
        const LearningConditionReport rep =
            learning_condition_report(m_coefficients(g, 2000, 4), sp);
        CHECK(rep.verdict == "non-learning-trend");
        CHECK(rep.m1_total == doctest::Approx(1.0).epsilon(1e-6));
    }
    SUBCASE("constant weights violate the boundedness requirement") {
        WeightSchedule c{WeightSchedule::Kind::constant, 0.1, 1.0};
        const LearningConditionReport rep =
            learning_condition_report(m_coefficients(c, 2000, 4), sp);
        CHECK(rep.verdict == "necessary-condition-violated");
        CHECK(rep.x_diverging);
        CHECK(rep.m1_last_decade_share == doctest::Approx(0.9).epsilon(1e-10));
    }
    SUBCASE("exploding weights overflow and are flagged") {
        WeightSchedule g{WeightSchedule::Kind::geometric, 1.0, 1.5};
        const LearningConditionReport rep =
            learning_condition_report(m_coefficients(g, 500, 4), sp);
        CHECK(rep.verdict == "necessary-condition-violated");
        CHECK(rep.overflowed);
        CHECK(rep.x_diverging);
    }
    SUBCASE("zero weights mean no network flow at all") {
        WeightSchedule z{WeightSchedule::Kind::constant, 0.0, 1.0};
        const LearningConditionReport rep =
            learning_condition_report(m_coefficients(z, 500, 4), sp);
        CHECK(rep.verdict == "non-learning-trend");
        CHECK(rep.m1_total == 0.0);
        CHECK(rep.tail_last_decade_gain == 0.0);
    }
    SUBCASE("bias bound scales with the prior spread") {
        WeightSchedule g{WeightSchedule::Kind::geometric, 1.0, 0.5};
        const MixCoefficients mc = m_coefficients(g, 100, 4);
        const LearningConditionReport one = learning_condition_report(mc, sp, 1.0);
        const LearningConditionReport two = learning_condition_report(mc, sp, 2.0);
        CHECK(two.bias_bound == doctest::Approx(2.0 * one.bias_bound).epsilon(1e-12));
        CHECK(one.bias_bound == doctest::Approx(std::exp(mc.m1_total)).epsilon(1e-12));
    }
}

TEST_CASE("trailing-window slope recovers an exact linear decay") {
    Trajectory traj;
    traj.n = 2;
    traj.n_states = 2;
    traj.truth = 0;
    traj.horizon = 200;
    traj.false_states = {1};
    const double r0 = 0.05;
    const double r1 = 0.12;
    for (long t = 0; t <= 200; ++t) {
        traj.phi.push_back(1.0 - r0 * static_cast<double>(t));
        traj.phi.push_back(-2.0 - r1 * static_cast<double>(t));
    }

    const RateEstimate est = empirical_rate(traj, 1, 0.5);
    CHECK(est.t_begin == 100);
    CHECK(est.t_end == 200);
    CHECK(est.rates[0] == doctest::Approx(r0).epsilon(1e-12));
    CHECK(est.rates[1] == doctest::Approx(r1).epsilon(1e-12));
    CHECK(est.mean_rate == doctest::Approx(0.085).epsilon(1e-12));
    CHECK(est.sd_rate == doctest::Approx(std::sqrt(2.0) * 0.035).epsilon(1e-9));

    CHECK_THROWS_AS(empirical_rate(traj, 0, 0.5), validation_error);
    CHECK_THROWS_AS(empirical_rate(traj, 1, 0.0), validation_error);

    Trajectory tiny = traj;
    tiny.horizon = 50;
    CHECK_THROWS_AS(empirical_rate(tiny, 1, 0.5), validation_error);
}

TEST_CASE("power-convergence diagnostic") {
    SUBCASE("aperiodic chain reaches its limit") {
        const Network net = Network::from_neighborhoods({{1, 2}, {0, 2}, {0, 1}});
        const Matrix b = normalized_adjacency(net);
        const std::vector<double> limit(3, 1.0 / 3.0);
        const PowerDiagnostic diag = power_convergence_diagnostic(b, limit, 1e-6, 100);
        CHECK(diag.reached);
        CHECK(diag.power >= 1);
        CHECK(diag.power <= 40);
        CHECK(diag.deviation <= 1e-6);
    }
    SUBCASE("periodic chain never settles") {
        const Network net = cycle(2);
        const Matrix b = normalized_adjacency(net);
        const std::vector<double> limit(2, 0.5);
        const PowerDiagnostic diag = power_convergence_diagnostic(b, limit, 1e-6, 50);
        CHECK(!diag.reached);
        CHECK(diag.deviation == doctest::Approx(0.5).epsilon(1e-12));
    }
    SUBCASE("input validation") {
        Matrix rect(2, 3);
        const std::vector<double> limit(2, 0.5);
        CHECK_THROWS_AS(power_convergence_diagnostic(rect, limit, 1e-6, 10), validation_error);
        const Matrix sq = Matrix::identity(2);
        const std::vector<double> wrong(3, 0.5);
        CHECK_THROWS_AS(power_convergence_diagnostic(sq, wrong, 1e-6, 10), validation_error);
        CHECK_THROWS_AS(power_convergence_diagnostic(sq, limit, 0.0, 10), validation_error);
        CHECK_THROWS_AS(power_convergence_diagnostic(sq, limit, 1e-6, 0), validation_error);
    }
}
