#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <numbers>

#include "dqring/correlator.hpp"
#include "oracle.hpp"

using namespace dqring;

namespace {

CouplingTable test_couplings(int n, double alpha = 3.0, std::uint64_t seed = 11) {
    RingSpec spec;
    spec.n_spins = n;
    spec.alpha = alpha;
    spec.seed = seed;
    return build_couplings(spec);
}

}  // namespace

TEST_CASE("echo matrix at t = 0 is diag(1/4) for any phi") {
    const CouplingTable couplings = test_couplings(5);
    const TrotterPlan plan = make_trotter_plan(couplings, 0.01);
    for (double phi : {0.0, 0.4, std::numbers::pi}) {
        const EchoMatrix echo = echo_matrix_exact(couplings, plan, 0.0, phi);
        for (int i = 0; i < 5; ++i)
            for (int j = 0; j < 5; ++j)
                CHECK(std::abs(echo.at(i, j) - (i == j ? cplx{0.25, 0.0} : cplx{0.0, 0.0})) == 0.0);
    }
}

TEST_CASE("phi = 0 normalization holds at any time") {
    const CouplingTable couplings = test_couplings(6, 2.0, 4);
    const TrotterPlan plan = make_trotter_plan(couplings, 0.01);
    for (double t : {0.5, 3.0, 10.0}) {
        const EchoDecomposition dec = decompose_echo(echo_matrix_exact(couplings, plan, t, 0.0));
        CHECK(std::abs(dec.m_g - 1.0) < 1e-10);
    }
}

TEST_CASE("echo matrix matches the dense-operator brute force") {
    // N=4, alpha=3, Jt = 2, phi = pi/4; oracle evolves with the exact
    // exponential, so agreement is limited by the Trotter step, refined here.
    const CouplingTable couplings = test_couplings(4, 3.0, 11);
    const TrotterPlan plan = make_trotter_plan(couplings, 0.001);
    const double t = 2.0, phi = std::numbers::pi / 4.0;
    const EchoMatrix echo = echo_matrix_exact(couplings, plan, t, phi);
    const oracle::Mat ref = oracle::echo_matrix(couplings, t, phi);
    for (int i = 0; i < 4; ++i)
        for (int j = 0; j < 4; ++j)
            CHECK(std::abs(echo.at(i, j) - ref(i, j)) < 1e-8);
}

TEST_CASE("hermitian-like symmetry and phi periodicity") {
    const CouplingTable couplings = test_couplings(6, 1.0, 9);
    const TrotterPlan plan = make_trotter_plan(couplings, 0.01);
    const PairCoherenceTensor tensor = pair_tensor_exact(couplings, plan, 2.0);
    const EchoMatrix plus = tensor.echo_at(0.8);
    const EchoMatrix minus = tensor.echo_at(-0.8);
    const EchoMatrix wrapped = tensor.echo_at(0.8 + 2.0 * std::numbers::pi);
    for (int i = 0; i < 6; ++i)
        for (int j = 0; j < 6; ++j) {
            CHECK(std::abs(plus.at(i, j) - std::conj(minus.at(j, i))) < 1e-12);
            CHECK(std::abs(plus.at(i, j) - wrapped.at(i, j)) < 1e-12);
        }
}

TEST_CASE("coherence tensor carries only even orders and mirrors correctly") {
    const CouplingTable couplings = test_couplings(5, 3.0, 3);
    const TrotterPlan plan = make_trotter_plan(couplings, 0.01);
    const PairCoherenceTensor tensor = pair_tensor_exact(couplings, plan, 1.5);
    for (int m = -5; m <= 5; ++m)
        for (int i = 0; i < 5; ++i)
            for (int j = 0; j < 5; ++j) {
                if (m % 2 != 0) CHECK(std::abs(tensor.at(m, i, j)) == 0.0);
                CHECK(std::abs(tensor.at(m, j, i) - std::conj(tensor.at(m, i, j))) < 1e-16);
            }
}

TEST_CASE("sweep reuses the propagator across a forward grid") {
    const CouplingTable couplings = test_couplings(5, 2.0, 8);
    const TrotterPlan plan = make_trotter_plan(couplings, 0.01);
    ExactEchoSweep sweep(couplings, plan);
    sweep.advance_to(0.7);
    const PairCoherenceTensor swept = sweep.advance_to(1.9);
    const PairCoherenceTensor direct = pair_tensor_exact(couplings, plan, 1.9);
    for (std::size_t k = 0; k < swept.a.size(); ++k)
        CHECK(std::abs(swept.a[k] - direct.a[k]) < 1e-12);
    CHECK_THROWS_AS(sweep.advance_to(1.0), std::invalid_argument);
}

TEST_CASE("exact estimator cutoff fails loudly") {
    const CouplingTable couplings = test_couplings(13, 1.0, 1);
    const TrotterPlan plan = make_trotter_plan(couplings, 0.01);
    CHECK_THROWS_AS(pair_tensor_exact(couplings, plan, 0.0), std::invalid_argument);
}

TEST_CASE("stochastic estimator is exact at t = 0 even with one state") {
    const CouplingTable couplings = test_couplings(6);
    const TrotterPlan plan = make_trotter_plan(couplings, 0.01);
    const EchoMatrix echo = echo_matrix_stochastic(couplings, plan, 0.0, 0.9, 1, 5);
    for (int i = 0; i < 6; ++i)
        for (int j = 0; j < 6; ++j)
            CHECK(std::abs(echo.at(i, j) - (i == j ? cplx{0.25, 0.0} : cplx{0.0, 0.0})) < 1e-14);
}

TEST_CASE("stochastic mean is consistent with the exact estimator") {
    const CouplingTable couplings = test_couplings(6, 3.0, 7);
    const TrotterPlan plan = make_trotter_plan(couplings, 0.01);
    const double t = 1.5, phi = 0.6;
    const EchoMatrix exact = echo_matrix_exact(couplings, plan, t, phi);
    const EchoMatrix stoch = echo_matrix_stochastic(couplings, plan, t, phi, 24, 2024);
    CHECK(stoch.estimator.kind == EstimatorInfo::Kind::stochastic);
    for (int i = 0; i < 6; ++i)
        for (int j = 0; j < 6; ++j) {
            const double dev = std::abs(stoch.at(i, j) - exact.at(i, j));
            const double se = stoch.std_error_at(i, j);
            CHECK(se > 0.0);
            CHECK(dev < 4.0 * se + 1e-12);
        }
}

TEST_CASE("standard errors shrink like one over sqrt(n_states)") {
    const CouplingTable couplings = test_couplings(6, 1.0, 3);
    const TrotterPlan plan = make_trotter_plan(couplings, 0.02);
    const double t = 2.0, phi = 1.1;
    double se_small = 0.0, se_large = 0.0;
    for (std::uint64_t seed : {11ull, 12ull, 13ull}) {
        se_small += echo_matrix_stochastic(couplings, plan, t, phi, 8, seed).std_error_at(0, 0);
        se_large += echo_matrix_stochastic(couplings, plan, t, phi, 32, seed).std_error_at(0, 0);
    }
    CHECK(se_small / se_large == doctest::Approx(2.0).epsilon(0.25));
}

TEST_CASE("echo decomposition identities") {
    const CouplingTable couplings = test_couplings(6, 2.0, 6);
    const TrotterPlan plan = make_trotter_plan(couplings, 0.01);
    const EchoMatrix echo = echo_matrix_exact(couplings, plan, 2.5, 0.9);
    const EchoDecomposition dec = decompose_echo(echo);
    CHECK(dec.m_g == dec.m_l + dec.m_ct);  // identity by construction
    double l = 0.0, ct = 0.0;
    for (int i = 0; i < 6; ++i) {
        l += dec.m_l_site[i];
        ct += dec.m_ct_site[i];
    }
    CHECK(dec.m_l == doctest::Approx(l).epsilon(1e-14));
    CHECK(dec.m_ct == doctest::Approx(ct).epsilon(1e-14));

    const EchoMatrix t0 = echo_matrix_exact(couplings, plan, 0.0, 0.3);
    const EchoDecomposition anchor = decompose_echo(t0);
    CHECK(anchor.m_l == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(std::abs(anchor.m_ct) < 1e-12);

    EchoMatrix corrupted = echo;
    corrupted.at(1, 2) += cplx{0.0, 1e-6};
    CHECK_THROWS_AS(decompose_echo(corrupted), std::runtime_error);
}

TEST_CASE("distance echoes partition the global echo") {
    for (int n : {5, 6}) {  // odd and even rings (antipodal edge case)
        const CouplingTable couplings = test_couplings(n, 2.0, 9);
        const TrotterPlan plan = make_trotter_plan(couplings, 0.01);
        const EchoMatrix echo = echo_matrix_exact(couplings, plan, 1.7, 1.3);
        const EchoDecomposition dec = decompose_echo(echo);
        double sum = 0.0;
        for (int d = 0; d <= n / 2; ++d) sum += distance_echo(echo, d);
        CHECK(std::abs(sum - dec.m_g) < 1e-10);
        CHECK(distance_echo(echo, 0) == doctest::Approx(dec.m_l).epsilon(1e-12));
        CHECK_THROWS_AS(distance_echo(echo, n / 2 + 1), std::out_of_range);
        CHECK_THROWS_AS(distance_echo(echo, -1), std::out_of_range);
    }
}
