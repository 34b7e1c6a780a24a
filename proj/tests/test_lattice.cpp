#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <set>

#include "dqring/lattice.hpp"

using namespace dqring;

TEST_CASE("bond distance is the minimum number of ring steps") {
    CHECK(bond_distance(0, 0, 8) == 0);
    CHECK(bond_distance(0, 1, 8) == 1);
    CHECK(bond_distance(0, 7, 8) == 1);
    CHECK(bond_distance(0, 4, 8) == 4);
    CHECK(bond_distance(2, 7, 8) == 3);
    for (int n : {5, 8}) {
        for (int i = 0; i < n; ++i)
            for (int j = 0; j < n; ++j) {
                CHECK(bond_distance(i, j, n) == bond_distance(j, i, n));
                CHECK(bond_distance(i, j, n) <= n / 2);
                // walking around the ring in either direction
                int steps = 0;
                for (int k = i; k != j; k = (k + 1) % n) ++steps;
                CHECK(bond_distance(i, j, n) == std::min(steps, n - steps));
            }
    }
    CHECK_THROWS_AS(bond_distance(0, 8, 8), std::out_of_range);
    CHECK_THROWS_AS(bond_distance(-1, 0, 8), std::out_of_range);
}

TEST_CASE("spec validation") {
    RingSpec spec;
    CHECK_NOTHROW(validate(spec));
    spec.n_spins = 1;
    CHECK_THROWS_AS(validate(spec), std::invalid_argument);
    spec = RingSpec{};
    spec.alpha = 0.0;
    CHECK_THROWS_AS(validate(spec), std::invalid_argument);
    spec = RingSpec{};
    spec.disorder_width = -0.1;
    CHECK_THROWS_AS(validate(spec), std::invalid_argument);
}

TEST_CASE("coupling magnitudes follow the power law") {
    RingSpec spec;
    spec.n_spins = 9;
    spec.alpha = 2.0;
    spec.coupling_j = 1.5;
    const CouplingTable table = build_couplings(spec);
    for (int i = 0; i < 9; ++i) {
        CHECK(table.coupling(i, i) == 0.0);
        for (int j = 0; j < 9; ++j) {
            if (i == j) continue;
            const double r = bond_distance(i, j, 9);
            CHECK(table.coupling(i, j) == doctest::Approx(1.5 / (r * r)).epsilon(1e-14));
            CHECK(table.coupling(i, j) == table.coupling(j, i));
        }
    }
}

TEST_CASE("random sign mode flips only signs and is seed deterministic") {
    RingSpec spec;
    spec.n_spins = 10;
    spec.alpha = 1.0;
    spec.sign_mode = SignMode::random_sign;
    spec.seed = 42;
    const CouplingTable a = build_couplings(spec);
    const CouplingTable b = build_couplings(spec);
    CHECK(a.d == b.d);
    CHECK(a.h == b.h);

    RingSpec uniform = spec;
    uniform.sign_mode = SignMode::uniform;
    const CouplingTable u = build_couplings(uniform);
    bool any_negative = false;
    for (int i = 0; i < 10; ++i)
        for (int j = 0; j < 10; ++j) {
            CHECK(std::abs(a.coupling(i, j)) == doctest::Approx(std::abs(u.coupling(i, j))));
            any_negative = any_negative || a.coupling(i, j) < 0.0;
        }
    CHECK(any_negative);

    spec.seed = 43;
    const CouplingTable c = build_couplings(spec);
    CHECK(a.d != c.d);
}

TEST_CASE("disorder fields are bounded and seed dependent") {
    RingSpec spec;
    spec.n_spins = 12;
    spec.disorder_width = 0.8;
    spec.seed = 5;
    const CouplingTable table = build_couplings(spec);
    std::set<double> values;
    for (double h : table.h) {
        CHECK(h >= -0.4);
        CHECK(h <= 0.4);
        values.insert(h);
    }
    CHECK(values.size() == table.h.size());  // continuous draws, no repeats

    spec.seed = 6;
    CHECK(build_couplings(spec).h != table.h);

    spec.disorder_width = 0.0;
    for (double h : build_couplings(spec).h) CHECK(h == 0.0);
}

TEST_CASE("second moment counts ordered pairs") {
    RingSpec spec;
    spec.n_spins = 6;
    spec.alpha = 3.0;
    const CouplingTable table = build_couplings(spec);
    double expected = 0.0;
    for (int i = 0; i < 6; ++i)
        for (int j = i + 1; j < 6; ++j)
            expected += 2.0 * table.coupling(i, j) * table.coupling(i, j);
    CHECK(coupling_second_moment(table) == doctest::Approx(expected).epsilon(1e-15));

    // invariant under random signs: depends on squares only
    spec.sign_mode = SignMode::random_sign;
    CHECK(coupling_second_moment(build_couplings(spec)) == doctest::Approx(expected).epsilon(1e-15));
}

TEST_CASE("sign mode string round trip") {
    CHECK(sign_mode_from_string(to_string(SignMode::uniform)) == SignMode::uniform);
    CHECK(sign_mode_from_string(to_string(SignMode::random_sign)) == SignMode::random_sign);
    CHECK_THROWS_AS(sign_mode_from_string("bogus"), std::invalid_argument);
}
