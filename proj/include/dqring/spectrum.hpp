#pragma once

#include <string>

#include "dqring/correlator.hpp"

namespace dqring {

/// Uniform encoding-phase grid phi_k = 2 pi k / n_phi.
struct PhiGrid {
    int n_phi = 0;
    std::vector<double> phi;

    /// Smallest admissible power of two for N spins: at least 2N + 2 phases so
    /// coherence orders up to +-N cannot alias into the centered window, and
    /// never below 32.
    static int default_size(int n_spins);
    static PhiGrid make(int n_phi);
};

/// Coherence-order intensities g_m on the centered window m = -n_phi/2 ..
/// n_phi/2 - 1, from the DFT of an echo signal over the phi grid.
struct CoherenceSpectrum {
    double t = 0.0;
    int n_phi = 0;
    std::string source;       // "G", "L", "CT", "L_site<i>", "CT_site<i>"
    std::vector<double> g;    // index m + n_phi/2
    std::vector<double> g_err;  // same layout; empty for the exact estimator

    double at(int m) const { return g[static_cast<std::size_t>(m + n_phi / 2)]; }
    double err_at(int m) const {
        return g_err.empty() ? 0.0 : g_err[static_cast<std::size_t>(m + n_phi / 2)];
    }
    int m_min() const { return -n_phi / 2; }
    int m_max() const { return n_phi / 2 - 1; }
    double sum() const;
};

/// g_m = (1/n_phi) sum_k M(phi_k) e^{-i m phi_k}. With check_imag the
/// imaginary residue must stay below 1e-9 (exact-estimator signals are real
/// and even in phi up to roundoff).
CoherenceSpectrum decode_spectrum(const PhiGrid& grid, const std::vector<double>& samples, double t,
                                  std::string source, bool check_imag);

/// K = 2 sum_m m^2 g_m. Note K(0) = 0 under this convention (one uncorrelated
/// spin maps to zero, not one).
double cluster_size_from_spectrum(const CoherenceSpectrum& spectrum);

/// Standard error of the spectrum-route K by linear propagation of g_err.
double cluster_size_error(const CoherenceSpectrum& spectrum);

/// All spectra of one time point. Aggregate signals carry the (4/N) echo
/// normalization; per-site signals carry 4 E so that the aggregate is the
/// site average of the per-site values.
struct SpectrumSet {
    double t = 0.0;
    CoherenceSpectrum global, local, cross;
    std::vector<CoherenceSpectrum> local_site, cross_site;
};

/// Decodes every spectrum of one time point from the pair tensor. Per-site
/// cross signals are symmetrized in phi before the DFT (the Trotter splitting
/// breaks the exact evenness of individual E_ij rows at O(dt^2); aggregate
/// signals are even identically). per_state, when given, supplies stochastic
/// error bars; exact_check enables the 1e-9 imaginary-residue guards.
SpectrumSet analyze_tensor(const PairCoherenceTensor& mean,
                           const std::vector<PairCoherenceTensor>* per_state, const PhiGrid& grid,
                           bool exact_check);

struct ClusterSizes {
    double k_g = 0.0;
    double k_l = 0.0;
    double k_ct = 0.0;
};

/// Direct commutator route: K from the squared norms of [I^z, I_i^z(t)]|psi>
/// accumulated over basis states (exact) or random-phase states (stochastic).
/// K_CT is returned as K_G - K_L; the explicit cross sum is the test oracle
/// below.
ClusterSizes cluster_size_direct(const CouplingTable& couplings, const TrotterPlan& plan, double t,
                                 const EstimatorInfo& estimator);

/// Explicit sum over i != j of <A_i psi|A_j psi>; independent of the
/// difference form in cluster_size_direct.
double cluster_ct_explicit(const CouplingTable& couplings, const TrotterPlan& plan, double t,
                           const EstimatorInfo& estimator);

constexpr int kDiagSplitMaxSpins = 8;

/// Splits K_L into single-site commutator terms and the q != k remainder, and
/// returns the cross sum, each with the common 2/(N 2^(N-2)) normalization.
struct DiagOffdiagSplit {
    double diagonal = 0.0;
    double offdiagonal_local = 0.0;
    double cross = 0.0;
};

DiagOffdiagSplit diagonal_offdiagonal_split(const CouplingTable& couplings, const TrotterPlan& plan,
                                            double t);

/// Cluster-size series over a forward-ordered time grid, produced through the
/// spectrum route with one propagator sweep.
struct KSeries {
    int n_spins = 0;
    std::vector<double> times;
    std::vector<double> k_g, k_l, k_ct;
    std::vector<double> err_g, err_l, err_ct;           // empty for exact
    std::vector<std::vector<double>> k_g_site, k_l_site, k_ct_site;  // [site][time]

    std::vector<SpectrumSet> spectra;          // one per time point
    std::vector<PairCoherenceTensor> tensors;  // mean tensor per time point
    std::vector<std::vector<PairCoherenceTensor>> state_tensors;  // stochastic only
};

KSeries compute_k_series(const CouplingTable& couplings, const TrotterPlan& plan,
                         const std::vector<double>& times, const PhiGrid& grid,
                         const EstimatorInfo& estimator);

}  // namespace dqring
