#include "doctest.h"

#include <cmath>
#include <limits>
#include <vector>

#include "beliefsim/beliefs.hpp"
#include "beliefsim/engine.hpp"
#include "beliefsim/errors.hpp"
#include "beliefsim/graph.hpp"
#include "beliefsim/model.hpp"
#include "beliefsim/rng.hpp"
#include "beliefsim/rules.hpp"

using namespace beliefsim;

namespace {

Network cycle(int n) {
    std::vector<std::vector<int>> nbrs(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) nbrs[static_cast<std::size_t>(i)] = {(i + 1) % n};
    return Network::from_neighborhoods(std::move(nbrs));
}

Network irregular5() { return Network::from_neighborhoods({{4}, {0, 3}, {1}, {0, 2}, {3}}); }

Matrix binary_tilt(double k) {
    const double b = (1.0 - std::sqrt(1.0 - std::exp(-2.0 * k))) / 2.0;
    Matrix t(2, 2);
    t(0, 0) = 0.5;
    t(0, 1) = 0.5;
    t(1, 0) = b;
    t(1, 1) = 1.0 - b;
    return t;
}

RunConfig make_run(UpdateRule rule, Network net, const std::vector<double>& ks, long horizon,
                   std::uint64_t seed) {
    RunConfig cfg;
    cfg.net = std::move(net);
    cfg.states.states = {"A", "B"};
    for (double k : ks) cfg.sig.tables.push_back(binary_tilt(k));
    cfg.priors = InitialPriors::uniform(static_cast<int>(ks.size()), 2);
    cfg.rule = std::move(rule);
    cfg.horizon = horizon;
    cfg.seed = seed;
    cfg.truth = 0;
    cfg.record.belief_every = 0;
    return cfg;
}

} // namespace

TEST_CASE("initialization applies one private Bayes step per agent") {
    Matrix t(2, 2);
    t(0, 0) = 0.8;
    t(0, 1) = 0.2;
    t(1, 0) = 0.2;
    t(1, 1) = 0.8;
    SignalModel sig;
    sig.tables = {t, t};
    InitialPriors priors;
    priors.per_agent = {{0.5, 0.5}, {0.25, 0.75}};

    const std::vector<int> signals = {0, 1};
    const BeliefState st = bayes_init(sig, priors, signals);
    CHECK(st.n == 2);
    CHECK(st.n_states == 2);
    CHECK(st.time == 0);

    const Dist b0 = st.beliefs(0);
    CHECK(b0[0] == doctest::Approx(0.8).epsilon(1e-14));
    CHECK(b0[1] == doctest::Approx(0.2).epsilon(1e-14));

    // agent 1: prior (0.25, 0.75), signal 1 -> (0.25*0.2, 0.75*0.8) normalized
    const Dist b1 = st.beliefs(1);
    CHECK(b1[0] == doctest::Approx(0.05 / 0.65).epsilon(1e-13));
    CHECK(b1[1] == doctest::Approx(0.60 / 0.65).epsilon(1e-13));

    const std::vector<int> wrong = {0};
    CHECK_THROWS_AS(bayes_init(sig, priors, wrong), validation_error);
}

TEST_CASE("log linearization maps zeros to -inf") {
    const std::vector<double> lv = log_linearize({0.25, 0.75, 0.0});
    CHECK(lv[0] == doctest::Approx(std::log(0.25)).epsilon(1e-15));
    CHECK(lv[1] == doctest::Approx(std::log(0.75)).epsilon(1e-15));
    CHECK(std::isinf(lv[2]));
    CHECK(lv[2] < 0.0);
}

TEST_CASE("ratio extraction against the realized state") {
    BeliefState st;
    st.n = 2;
    st.n_states = 3;
    st.log_mu = {std::log(0.5), std::log(0.3), std::log(0.2),
                 std::log(0.1), std::log(0.6), std::log(0.3)};

    const LogRatios lr = log_ratios(st, 1);
    CHECK(lr.n == 2);
    CHECK(lr.truth == 1);
    CHECK(lr.false_states == std::vector<int>{0, 2});
    CHECK(lr.phi(0, 0) == doctest::Approx(std::log(0.5 / 0.3)).epsilon(1e-13));
    CHECK(lr.phi(0, 1) == doctest::Approx(std::log(0.2 / 0.3)).epsilon(1e-13));
    CHECK(lr.phi(1, 0) == doctest::Approx(std::log(0.1 / 0.6)).epsilon(1e-13));
    CHECK(lr.phi(1, 1) == doctest::Approx(std::log(0.3 / 0.6)).epsilon(1e-13));

    BeliefState dead;
    dead.n = 1;
    dead.n_states = 2;
    dead.log_mu = {-std::numeric_limits<double>::infinity(), 0.0};
    CHECK_THROWS_AS(log_ratios(dead, 0), numeric_error);
}

TEST_CASE("beliefs reconstructed from ratio rows") {
    const std::vector<double> one = {std::log(1.0 / 3.0)};
    const Dist b = ratios_to_beliefs(one, 0);
    CHECK(b[0] == doctest::Approx(0.75).epsilon(1e-13));
    CHECK(b[1] == doctest::Approx(0.25).epsilon(1e-13));

    // truth slot in the middle of a three-state space
    const std::vector<double> two = {std::log(1.0 / 3.0), std::log(1.0 / 3.0)};
    const Dist b3 = ratios_to_beliefs(two, 1);
    CHECK(b3[0] == doctest::Approx(0.2).epsilon(1e-13));
    CHECK(b3[1] == doctest::Approx(0.6).epsilon(1e-13));
    CHECK(b3[2] == doctest::Approx(0.2).epsilon(1e-13));
}

TEST_CASE("ratio round trip preserves beliefs") {
    Substream rng(909, 0, 0, Draw::generic);
    for (int trial = 0; trial < 50; ++trial) {
        const int k = 2 + static_cast<int>(rng.next_u64() % 4);
        const int truth = static_cast<int>(rng.next_u64() % static_cast<std::uint64_t>(k));
        Dist b(static_cast<std::size_t>(k));
        double sum = 0.0;
        for (double& v : b) {
            v = 1e-3 + rng.next_unit();
            sum += v;
        }
        for (double& v : b) v /= sum;

        BeliefState st;
        st.n = 1;
        st.n_states = k;
        st.log_mu = log_linearize(b);
        const LogRatios lr = log_ratios(st, truth);
        std::vector<double> row(static_cast<std::size_t>(k - 1));
        for (int f = 0; f < k - 1; ++f) row[static_cast<std::size_t>(f)] = lr.phi(0, f);
        const Dist back = ratios_to_beliefs(row, truth);
        for (int s = 0; s < k; ++s)
            CHECK(back[static_cast<std::size_t>(s)] ==
                  doctest::Approx(b[static_cast<std::size_t>(s)]).epsilon(1e-12));
    }
}

TEST_CASE("network-weighted prior tilt") {
    const Network net = cycle(2);
    const SpectralData sp = analyze_network(net);

    CHECK(network_bias(sp, InitialPriors::uniform(2, 2), 0, 1) == doctest::Approx(0.0));

    InitialPriors skew;
    skew.per_agent = {{0.8, 0.2}, {0.5, 0.5}};
    const double want = 0.5 * std::log(0.25);
    CHECK(network_bias(sp, skew, 0, 1) == doctest::Approx(want).epsilon(1e-13));
}

TEST_CASE("aggregate bookkeeping residuals vanish for every rule") {
    const double tol = 1e-13;
    const long horizon = 60;

    const auto check_identity = [&](const RunConfig& cfg) {
        const SpectralData sp = analyze_network(cfg.net, tol);
        const Trajectory traj = simulate(cfg, sp);
        const IdentityReport rep = aggregate_identity(traj, cfg, sp, 1);
        CHECK(rep.steps == horizon);
        CHECK(rep.max_residual <= 1e-10);
        CHECK(rep.max_edge_residual <= 1e-12);
        CHECK(rep.mean_residual <= rep.max_residual);
        CHECK_THROWS_AS(aggregate_identity(traj, cfg, sp, 0), validation_error);
    };

    SUBCASE("common prior on a four-ring") {
        check_identity(make_run(CommonFixedPrior{{0.6, 0.4}}, cycle(4),
                                {0.05, 0.1, 0.2, 0.15}, horizon, 11));
    }
    SUBCASE("random neighbor choice") {
        check_identity(make_run(RandomWalkNeighbor{}, irregular5(),
                                {0.1, 0.05, 0.15, 0.08, 0.12}, horizon, 12));
    }
    SUBCASE("geometric averaging") {
        check_identity(make_run(GeometricAveragePrior{}, irregular5(),
                                {0.1, 0.05, 0.15, 0.08, 0.12}, horizon, 13));
    }
    SUBCASE("time-varying weights") {
        TimeVaryingLogLinear tv;
        tv.schedule.kind = WeightSchedule::Kind::log_power;
        tv.schedule.c = 1.0;
        check_identity(make_run(tv, irregular5(), {0.1, 0.05, 0.15, 0.08, 0.12}, horizon, 14));
    }
    SUBCASE("weighted self-belief on a periodic five-ring") {
        check_identity(make_run(WeightedSelfBelief{0.3}, cycle(5),
                                {0.1, 0.05, 0.15, 0.08, 0.12}, horizon, 15));
    }
}

TEST_CASE("aggregate bookkeeping needs recorded signals") {
    RunConfig cfg = make_run(GeometricAveragePrior{}, irregular5(),
                             {0.1, 0.05, 0.15, 0.08, 0.12}, 10, 3);
    cfg.record.signals = false;
    const SpectralData sp = analyze_network(cfg.net, 1e-13);
    const Trajectory traj = simulate(cfg, sp);
    CHECK_THROWS_AS(aggregate_identity(traj, cfg, sp, 1), validation_error);
}
