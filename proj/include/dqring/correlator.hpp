#pragma once

#include <Eigen/Dense>
#include <array>
#include <optional>

#include "dqring/propagator.hpp"

namespace dqring {

constexpr int kExactEstimatorMaxSpins = 12;

namespace detail {
/// Per-state seed stream for the stochastic estimators; shared so that the
/// echo and direct-commutator routes draw identical random-phase states.
std::uint64_t state_seed(std::uint64_t seed, std::uint64_t k);
}  // namespace detail

struct EstimatorInfo {
    enum class Kind { exact, stochastic };
    Kind kind = Kind::exact;
    int n_states = 1;
    std::uint64_t seed = 0;
};

/// E_ij(t, phi) = 2^-N Tr{ I_i^z(t) R(phi)^dag I_j^z(t) R(phi) }.
struct EchoMatrix {
    int n_spins = 0;
    double t = 0.0;
    double phi = 0.0;
    std::vector<cplx> e;            // N*N, row-major
    std::vector<double> std_error;  // per entry; empty for the exact estimator
    EstimatorInfo estimator;

    cplx at(int i, int j) const { return e[static_cast<std::size_t>(i) * n_spins + j]; }
    cplx& at(int i, int j) { return e[static_cast<std::size_t>(i) * n_spins + j]; }
    double std_error_at(int i, int j) const {
        return std_error.empty() ? 0.0 : std_error[static_cast<std::size_t>(i) * n_spins + j];
    }
};

/// Coherence-order resolution of the pair correlators at fixed t:
///   E_ij(t, phi) = sum_m a(m, i, j) e^{i m phi},   m = -N..N,
/// where m is the magnetization difference of the two basis states bridged by
/// the evolved operators. The whole phi dependence of the echo matrix is in
/// this tensor, so a phi grid costs nothing extra once it is built.
struct PairCoherenceTensor {
    int n_spins = 0;
    double t = 0.0;
    std::vector<cplx> a;  // (2N+1) * N * N, m-major, m offset by +N

    cplx at(int m, int i, int j) const {
        return a[(static_cast<std::size_t>(m + n_spins) * n_spins + i) * n_spins + j];
    }
    cplx& at(int m, int i, int j) {
        return a[(static_cast<std::size_t>(m + n_spins) * n_spins + i) * n_spins + j];
    }

    EchoMatrix echo_at(double phi) const;

    static PairCoherenceTensor zero(int n_spins, double t);
};

/// Exact-estimator sweep over a forward-ordered time grid.
///
/// The trace over all 2^N basis states is evaluated as dense linear algebra:
/// the backward propagator W(t) = U^dag(t) (Trotterized) is carried as two
/// parity blocks (the DQ term only couples states of equal magnetization
/// parity), advanced between grid points by a cached segment propagator, and
/// the site operators in the Heisenberg picture are formed as W^dag D_i W.
/// Their magnetization-resolved Gram products give the pair tensor.
class ExactEchoSweep {
  public:
    ExactEchoSweep(const CouplingTable& couplings, const TrotterPlan& plan);

    /// t must not decrease across calls; snapped to the step grid.
    const PairCoherenceTensor& advance_to(double t);

    const PairCoherenceTensor& tensor() const { return tensor_; }
    double current_time() const { return static_cast<double>(steps_done_) * plan_.dt; }
    int n_spins() const { return n_; }

  private:
    const std::array<Eigen::MatrixXcd, 2>& step_power(int bit);
    void compute_tensor();

    int n_;
    TrotterPlan plan_;
    long long steps_done_ = 0;
    std::array<std::vector<std::uint32_t>, 2> block_states_;  // basis states per parity, ascending
    std::array<Eigen::MatrixXcd, 2> w_;                       // compact W(t) blocks
    // power_cache_[j] holds U^dag(2^j dt) as compact blocks; advancing by k
    // steps applies the set bits of k, low to high (the factors commute).
    std::vector<std::array<Eigen::MatrixXcd, 2>> power_cache_;
    PairCoherenceTensor tensor_;
    bool tensor_valid_ = false;
};

PairCoherenceTensor pair_tensor_exact(const CouplingTable& couplings, const TrotterPlan& plan, double t);

EchoMatrix echo_matrix_exact(const CouplingTable& couplings, const TrotterPlan& plan, double t, double phi);

/// Random-phase-state estimate; keeps the per-state tensors so that mean and
/// standard error are available at any phi.
struct StochasticEchoResult {
    int n_spins = 0;
    double t = 0.0;
    std::uint64_t seed = 0;
    std::vector<PairCoherenceTensor> states;

    PairCoherenceTensor mean() const;
    EchoMatrix echo_at(double phi) const;
};

StochasticEchoResult pair_tensor_stochastic(const CouplingTable& couplings, const TrotterPlan& plan,
                                            double t, int n_states, std::uint64_t seed);

EchoMatrix echo_matrix_stochastic(const CouplingTable& couplings, const TrotterPlan& plan, double t,
                                  double phi, int n_states, std::uint64_t seed);

/// M_G = M_L + M_CT split of the normalized echo, Eq.-level identity by construction.
struct EchoDecomposition {
    double m_g = 0.0;
    double m_l = 0.0;
    double m_ct = 0.0;
    std::vector<double> m_l_site;   // (4/N) E_ii
    std::vector<double> m_ct_site;  // (4/N) sum_{j != i} E_ij
};

EchoDecomposition decompose_echo(const EchoMatrix& echo);

/// Contribution to M_G from echoes returning at ring distance n from the
/// initial site; the antipodal site (even N, n = N/2) is counted once.
double distance_echo(const EchoMatrix& echo, int n);

}  // namespace dqring
