#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <numbers>

#include "dqring/spectrum.hpp"
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

TEST_CASE("phi grid sizing") {
    CHECK(PhiGrid::default_size(4) == 32);
    CHECK(PhiGrid::default_size(12) == 32);
    CHECK(PhiGrid::default_size(15) == 32);
    CHECK(PhiGrid::default_size(16) == 64);  // 2N + 2 = 34 > 32
    const PhiGrid grid = PhiGrid::make(8);
    CHECK(grid.phi.size() == 8);
    CHECK(grid.phi[3] == doctest::Approx(2.0 * std::numbers::pi * 3.0 / 8.0));
    CHECK_THROWS_AS(PhiGrid::make(12), std::invalid_argument);
    CHECK_THROWS_AS(PhiGrid::make(0), std::invalid_argument);
}

TEST_CASE("spectrum decode on analytic signals") {
    const PhiGrid grid = PhiGrid::make(32);

    std::vector<double> flat(32, 1.0);
    const CoherenceSpectrum dc = decode_spectrum(grid, flat, 0.0, "G", true);
    for (int m = dc.m_min(); m <= dc.m_max(); ++m)
        CHECK(dc.at(m) == doctest::Approx(m == 0 ? 1.0 : 0.0).epsilon(1e-14));
    CHECK(cluster_size_from_spectrum(dc) == doctest::Approx(0.0));

    std::vector<double> tone(32);
    for (int k = 0; k < 32; ++k) tone[k] = std::cos(2.0 * grid.phi[k]);
    const CoherenceSpectrum pair = decode_spectrum(grid, tone, 0.0, "G", true);
    CHECK(pair.at(2) == doctest::Approx(0.5).epsilon(1e-13));
    CHECK(pair.at(-2) == doctest::Approx(0.5).epsilon(1e-13));
    CHECK(pair.sum() == doctest::Approx(1.0).epsilon(1e-13));
    // K = 2 (4 * 1/2 + 4 * 1/2) = 8
    CHECK(cluster_size_from_spectrum(pair) == doctest::Approx(8.0).epsilon(1e-13));

    CHECK_THROWS_AS(decode_spectrum(grid, std::vector<double>(31, 0.0), 0.0, "G", true),
                    std::invalid_argument);
}

TEST_CASE("tensor spectra: sum rule, parity, positivity") {
    const CouplingTable couplings = test_couplings(6, 1.0, 4);
    const TrotterPlan plan = make_trotter_plan(couplings, 0.01);
    const PairCoherenceTensor tensor = pair_tensor_exact(couplings, plan, 3.0);
    const PhiGrid grid = PhiGrid::make(PhiGrid::default_size(6));
    const SpectrumSet set = analyze_tensor(tensor, nullptr, grid, true);

    // sum rule: total intensity is the phi = 0 signal
    const EchoMatrix at_zero = tensor.echo_at(0.0);
    const EchoDecomposition dec = decompose_echo(at_zero);
    CHECK(set.global.sum() == doctest::Approx(dec.m_g).epsilon(1e-12));
    CHECK(set.local.sum() == doctest::Approx(dec.m_l).epsilon(1e-12));
    CHECK(set.cross.sum() == doctest::Approx(dec.m_ct).epsilon(1e-10));

    for (int m = set.global.m_min(); m <= set.global.m_max(); ++m) {
        if (m % 2 != 0) {
            CHECK(std::abs(set.global.at(m)) < 1e-9);
            CHECK(std::abs(set.local.at(m)) < 1e-9);
        }
        CHECK(set.global.at(m) > -1e-12);  // G and L intensities are squared norms
        CHECK(set.local.at(m) > -1e-12);
        // aliasing margin: orders beyond +-N are empty
        if (std::abs(m) > 6) CHECK(std::abs(set.global.at(m)) < 1e-12);
    }

    // aggregate = site average
    CHECK(set.local_site.size() == 6);
    for (int m = set.local.m_min(); m <= set.local.m_max(); ++m) {
        double l = 0.0, ct = 0.0;
        for (int i = 0; i < 6; ++i) {
            l += set.local_site[i].at(m);
            ct += set.cross_site[i].at(m);
        }
        CHECK(set.local.at(m) == doctest::Approx(l / 6.0).epsilon(1e-10));
        CHECK(set.cross.at(m) == doctest::Approx(ct / 6.0).epsilon(1e-10));
    }
}

TEST_CASE("spectrum route and direct commutator route agree") {
    const CouplingTable couplings = test_couplings(6, 3.0, 7);
    const TrotterPlan plan = make_trotter_plan(couplings, 0.01);
    const PhiGrid grid = PhiGrid::make(32);
    EstimatorInfo exact;
    for (double t : {0.5, 2.0, 5.0}) {
        const SpectrumSet set =
            analyze_tensor(pair_tensor_exact(couplings, plan, t), nullptr, grid, true);
        const ClusterSizes direct = cluster_size_direct(couplings, plan, t, exact);
        CHECK(cluster_size_from_spectrum(set.global) == doctest::Approx(direct.k_g).epsilon(1e-6));
        CHECK(cluster_size_from_spectrum(set.local) == doctest::Approx(direct.k_l).epsilon(1e-6));
        CHECK(cluster_size_from_spectrum(set.cross) ==
              doctest::Approx(direct.k_ct).epsilon(1e-6).scale(1.0));
        // difference form vs the explicit pairwise sum
        CHECK(cluster_ct_explicit(couplings, plan, t, exact) ==
              doctest::Approx(direct.k_ct).epsilon(1e-9).scale(1.0));
    }
}

TEST_CASE("direct route matches the dense commutator oracle") {
    const CouplingTable couplings = test_couplings(4, 2.0, 13);
    const TrotterPlan plan = make_trotter_plan(couplings, 0.001);
    const double t = 1.5;
    const ClusterSizes direct = cluster_size_direct(couplings, plan, t, EstimatorInfo{});
    const oracle::ClusterSizes ref = oracle::cluster_sizes(couplings, t);
    CHECK(direct.k_g == doctest::Approx(ref.k_g).epsilon(1e-7));
    CHECK(direct.k_l == doctest::Approx(ref.k_l).epsilon(1e-7));
    CHECK(direct.k_ct == doctest::Approx(ref.k_ct).epsilon(1e-6).scale(1.0));
}

TEST_CASE("stochastic direct route is consistent and errors are flagged") {
    const CouplingTable couplings = test_couplings(6, 1.0, 21);
    const TrotterPlan plan = make_trotter_plan(couplings, 0.02);
    EstimatorInfo stoch;
    stoch.kind = EstimatorInfo::Kind::stochastic;
    stoch.n_states = 32;
    stoch.seed = 77;
    const ClusterSizes approx = cluster_size_direct(couplings, plan, 2.0, stoch);
    const ClusterSizes exact = cluster_size_direct(couplings, plan, 2.0, EstimatorInfo{});
    CHECK(approx.k_g == doctest::Approx(exact.k_g).epsilon(0.15));
    CHECK(approx.k_l == doctest::Approx(exact.k_l).epsilon(0.15));

    EstimatorInfo bad = stoch;
    bad.n_states = 0;
    CHECK_THROWS_AS(cluster_size_direct(couplings, plan, 2.0, bad), std::invalid_argument);
    const CouplingTable big = test_couplings(13);
    CHECK_THROWS_AS(cluster_size_direct(big, make_trotter_plan(big, 0.01), 1.0, EstimatorInfo{}),
                    std::invalid_argument);
}

TEST_CASE("diagonal/offdiagonal split of the local cluster size") {
    const CouplingTable couplings = test_couplings(6, 2.0, 5);
    const TrotterPlan plan = make_trotter_plan(couplings, 0.01);

    const DiagOffdiagSplit t0 = diagonal_offdiagonal_split(couplings, plan, 0.0);
    CHECK(std::abs(t0.diagonal) < 1e-12);
    CHECK(std::abs(t0.offdiagonal_local) < 1e-12);
    CHECK(std::abs(t0.cross) < 1e-12);

    const double t = 5.0;
    const DiagOffdiagSplit split = diagonal_offdiagonal_split(couplings, plan, t);
    const ClusterSizes direct = cluster_size_direct(couplings, plan, t, EstimatorInfo{});
    CHECK(split.diagonal + split.offdiagonal_local == doctest::Approx(direct.k_l).epsilon(1e-9));
    CHECK(split.cross == doctest::Approx(direct.k_ct).epsilon(1e-6).scale(1.0));
    CHECK(split.diagonal >= 0.0);

    const CouplingTable big = test_couplings(9);
    CHECK_THROWS_AS(diagonal_offdiagonal_split(big, make_trotter_plan(big, 0.01), 1.0),
                    std::invalid_argument);
}

TEST_CASE("k series over a grid: identities and anchors") {
    const CouplingTable couplings = test_couplings(6, 3.0, 9);
    const TrotterPlan plan = make_trotter_plan(couplings, 0.01);
    const PhiGrid grid = PhiGrid::make(32);
    const std::vector<double> times{0.0, 0.5, 1.0, 2.0, 4.0};
    const KSeries series = compute_k_series(couplings, plan, times, grid, EstimatorInfo{});

    CHECK(series.times == times);
    CHECK(std::abs(series.k_g[0]) < 1e-10);  // K(0) = 0 convention
    CHECK(std::abs(series.k_l[0]) < 1e-10);
    for (std::size_t k = 0; k < times.size(); ++k) {
        CHECK(series.k_g[k] == doctest::Approx(series.k_l[k] + series.k_ct[k]).epsilon(1e-9));
        double site_ct = 0.0;
        for (int i = 0; i < 6; ++i) site_ct += series.k_ct_site[i][k];
        CHECK(series.k_ct[k] == doctest::Approx(site_ct / 6.0).epsilon(1e-8).scale(1.0));
    }
    CHECK(series.spectra.size() == times.size());
    CHECK(series.tensors.size() == times.size());
    CHECK(series.err_g.empty());
}

TEST_CASE("stochastic k series carries error bars") {
    const CouplingTable couplings = test_couplings(6, 3.0, 9);
    const TrotterPlan plan = make_trotter_plan(couplings, 0.02);
    const PhiGrid grid = PhiGrid::make(32);
    EstimatorInfo stoch;
    stoch.kind = EstimatorInfo::Kind::stochastic;
    stoch.n_states = 16;
    stoch.seed = 3;
    const std::vector<double> times{0.0, 2.0};
    const KSeries series = compute_k_series(couplings, plan, times, grid, stoch);
    const KSeries exact = compute_k_series(couplings, plan, times, grid, EstimatorInfo{});
    CHECK(series.err_g.size() == 2);
    CHECK(series.err_g[1] > 0.0);
    CHECK(std::abs(series.k_g[1] - exact.k_g[1]) < 5.0 * series.err_g[1] + 1e-9);
    CHECK(series.state_tensors.size() == 2);
    CHECK(series.state_tensors[1].size() == 16);
}
