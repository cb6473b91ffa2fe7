#include "doctest.h"

#include <cmath>
#include <vector>

#include "beliefsim/errors.hpp"
#include "beliefsim/model.hpp"
#include "beliefsim/rng.hpp"

using namespace beliefsim;

namespace {

// Two-signal table whose false-state row is tilted so that the divergence of
// the truth row against it is exactly `k` nats.
Matrix binary_tilt(double k) {
    const double b = (1.0 - std::sqrt(1.0 - std::exp(-2.0 * k))) / 2.0;
    Matrix t(2, 2);
    t(0, 0) = 0.5;
    t(0, 1) = 0.5;
    t(1, 0) = b;
    t(1, 1) = 1.0 - b;
    return t;
}

} // namespace

TEST_CASE("kl divergence matches hand-computed values") {
    const Dist p = {0.5, 0.5};
    const Dist q = {0.75, 0.25};
    const double want = 0.5 * std::log(0.5 / 0.75) + 0.5 * std::log(0.5 / 0.25);
    CHECK(kl_divergence(p, q) == doctest::Approx(want).epsilon(1e-14));
    CHECK(kl_divergence(p, p) == 0.0);

    const Dist point = {1.0, 0.0};
    CHECK(kl_divergence(point, p) == doctest::Approx(std::log(2.0)).epsilon(1e-14));

    CHECK_THROWS_AS(kl_divergence(p, point), validation_error);
    const Dist wide = {0.2, 0.3, 0.5};
    CHECK_THROWS_AS(kl_divergence(p, wide), validation_error);
}

TEST_CASE("signal divergences recover the designed tilt") {
    SignalModel sig;
    const std::vector<double> ks = {0.05, 0.1, 0.2};
    for (double k : ks) sig.tables.push_back(binary_tilt(k));
    sig.validate(2);

    const Matrix lam = signal_divergences(sig, 0);
    REQUIRE(lam.rows == 3);
    REQUIRE(lam.cols == 2);
    for (int i = 0; i < 3; ++i) {
        CHECK(lam(i, 0) == 0.0); // realized-state column is exactly zero
        CHECK(lam(i, 1) == doctest::Approx(-ks[static_cast<std::size_t>(i)]).epsilon(1e-12));
    }
}

TEST_CASE("identifiability report lists witnesses by state") {
    Matrix a0(3, 2); // blind between states 0 and 1, informative on 2
    a0(0, 0) = 0.5;
    a0(0, 1) = 0.5;
    a0(1, 0) = 0.5;
    a0(1, 1) = 0.5;
    a0(2, 0) = 0.8;
    a0(2, 1) = 0.2;
    Matrix a1(3, 2); // informative on 1, blind on 2
    a1(0, 0) = 0.5;
    a1(0, 1) = 0.5;
    a1(1, 0) = 0.3;
    a1(1, 1) = 0.7;
    a1(2, 0) = 0.5;
    a1(2, 1) = 0.5;

    SignalModel sig;
    sig.tables = {a0, a1};
    sig.validate(3);

    const IdentifiabilityReport rep = check_identifiability(sig, 0);
    CHECK(rep.identifiable);
    REQUIRE(rep.witnesses.size() == 3);
    CHECK(rep.witnesses[0].empty()); // realized-state slot stays empty
    CHECK(rep.witnesses[1] == std::vector<int>{1});
    CHECK(rep.witnesses[2] == std::vector<int>{0});

    SignalModel blind;
    blind.tables = {a0, a0};
    const IdentifiabilityReport rep2 = check_identifiability(blind, 0);
    CHECK(!rep2.identifiable);
    CHECK(rep2.witnesses[1].empty());
    CHECK(rep2.witnesses[2] == std::vector<int>{0, 1});
}

TEST_CASE("state space validation and truth sampling") {
    StateSpace st;
    st.states = {"A", "B"};
    st.validate();
    CHECK(st.index_of("B") == 1);
    CHECK(st.index_of("Z") == -1);

    StateSpace dup;
    dup.states = {"A", "A"};
    CHECK_THROWS_AS(dup.validate(), validation_error);

    StateSpace tiny;
    tiny.states = {"A"};
    CHECK_THROWS_AS(tiny.validate(), validation_error);

    StateSpace bad_truth;
    bad_truth.states = {"A", "B"};
    bad_truth.truth = 2;
    CHECK_THROWS_AS(bad_truth.validate(), validation_error);

    StateSpace bad_prior;
    bad_prior.states = {"A", "B"};
    bad_prior.nature_prior = {0.6, 0.6};
    CHECK_THROWS_AS(bad_prior.validate(), validation_error);

    SUBCASE("a point-mass nature prior always yields that state") {
        StateSpace pin;
        pin.states = {"A", "B"};
        pin.nature_prior = {0.0, 1.0};
        pin.validate();
        Substream rng(7, 0, 0, Draw::truth);
        for (int r = 0; r < 32; ++r) CHECK(pin.sample_truth(rng) == 1);
    }
    SUBCASE("uniform truth sampling is unbiased (chi-square, alpha = 1e-3)") {
        StateSpace st2;
        st2.states = {"A", "B"};
        Substream rng(11, 0, 0, Draw::truth);
        int ones = 0;
        const int draws = 10000;
        for (int r = 0; r < draws; ++r) ones += st2.sample_truth(rng);
        const double expect = draws / 2.0;
        const double chi2 = (ones - expect) * (ones - expect) / expect +
                            (draws - ones - expect) * (draws - ones - expect) / expect;
        CHECK(chi2 < 10.8276); // df = 1
    }
}

TEST_CASE("signal model validation and zero-likelihood handling") {
    SignalModel sig;
    sig.tables = {binary_tilt(0.1)};
    sig.validate(2);
    CHECK(sig.n_agents() == 1);
    CHECK(sig.n_signals(0) == 2);
    CHECK_THROWS_AS(sig.validate(3), validation_error); // row count mismatch

    Matrix with_zero(2, 2);
    with_zero(0, 0) = 0.5;
    with_zero(0, 1) = 0.5;
    with_zero(1, 0) = 1.0;
    with_zero(1, 1) = 0.0;
    SignalModel strict;
    strict.tables = {with_zero};
    CHECK_THROWS_AS(strict.validate(2), validation_error);

    SignalModel loose;
    loose.tables = {with_zero};
    loose.allow_zero_likelihoods = true;
    loose.validate(2);
    CHECK(loose.log_likelihood(0, 1, 0) == doctest::Approx(0.0));
    CHECK_THROWS_AS(loose.log_likelihood(0, 1, 1), numeric_error);

    SignalModel empty;
    CHECK_THROWS_AS(empty.validate(2), validation_error);
}

TEST_CASE("initial priors") {
    const InitialPriors u = InitialPriors::uniform(3, 4);
    u.validate(3, 4);
    CHECK(u.per_agent[2][3] == doctest::Approx(0.25));
    CHECK_THROWS_AS(u.validate(2, 4), validation_error);
    CHECK_THROWS_AS(u.validate(3, 3), validation_error);

    InitialPriors p;
    p.per_agent = {{0.8, 0.2}};
    const std::vector<double> r = p.prior_log_ratios(0, 1);
    CHECK(r[0] == doctest::Approx(std::log(0.25)).epsilon(1e-14));

    InitialPriors bad;
    bad.per_agent = {{0.8, 0.1}};
    CHECK_THROWS_AS(bad.validate(1, 2), validation_error);
}

TEST_CASE("signal sampling follows the conditional row (chi-square, alpha = 1e-3)") {
    Matrix t(2, 3);
    t(0, 0) = 0.2;
    t(0, 1) = 0.3;
    t(0, 2) = 0.5;
    t(1, 0) = 1.0 / 3.0;
    t(1, 1) = 1.0 / 3.0;
    t(1, 2) = 1.0 / 3.0;
    SignalModel sig;
    sig.tables = {t};
    sig.validate(2);

    Substream rng(5, 0, 0, Draw::signal);
    const int draws = 10000;
    int counts[3] = {0, 0, 0};
    for (int r = 0; r < draws; ++r) ++counts[sample_signal(sig, 0, 0, rng)];
    double chi2 = 0.0;
    for (int s = 0; s < 3; ++s) {
        const double expect = draws * t(0, s);
        chi2 += (counts[s] - expect) * (counts[s] - expect) / expect;
    }
    CHECK(chi2 < 13.8155); // df = 2
}

TEST_CASE("substreams are deterministic and separated by purpose") {
    Substream a(42, 3, 17, Draw::signal);
    Substream b(42, 3, 17, Draw::signal);
    for (int r = 0; r < 16; ++r) CHECK(a.next_u64() == b.next_u64());

    Substream c(42, 3, 17, Draw::neighbor);
    Substream d(42, 3, 18, Draw::signal);
    Substream e(43, 3, 17, Draw::signal);
    Substream f(42, 4, 17, Draw::signal);
    Substream base(42, 3, 17, Draw::signal);
    const std::uint64_t v = base.next_u64();
    CHECK(c.next_u64() != v);
    CHECK(d.next_u64() != v);
    CHECK(e.next_u64() != v);
    CHECK(f.next_u64() != v);

    Substream g(1, 0, 0, Draw::generic);
    for (int r = 0; r < 1000; ++r) {
        const double x = g.next_unit();
        CHECK(x >= 0.0);
        CHECK(x < 1.0);
    }
}
