#pragma once

#include <bit>
#include <complex>
#include <cstdint>
#include <vector>

namespace dqring {

using cplx = std::complex<double>;

/// Dense state vector over the computational (Zeeman) basis of N spins-1/2.
/// Bit i of the basis index s is 1 when spin i is up (I_i^z eigenvalue +1/2).
struct StateVector {
    int n_spins = 0;
    std::vector<cplx> amp;

    std::size_t dim() const { return amp.size(); }

    static StateVector zero(int n_spins);
    static StateVector basis_state(int n_spins, std::uint64_t s);
};

/// Total I^z eigenvalue of basis state s.
inline double magnetization(std::uint64_t s, int n_spins) {
    return static_cast<double>(std::popcount(s)) - 0.5 * n_spins;
}

/// Precomputed M_s table over the full basis.
struct MagnetizationIndex {
    int n_spins = 0;
    std::vector<double> m;

    static MagnetizationIndex build(int n_spins);
};

/// In place: a_s <- a_s * (bit_i(s) - 1/2).
void apply_site_sz(StateVector& state, int site);

/// In place: a_s <- a_s * M_s.
void apply_total_sz(StateVector& state);

/// In place: a_s <- a_s * exp(-i phi M_s)  (rotation R(phi) = exp(-i phi I^z)).
void apply_rotation(StateVector& state, double phi);

/// Uniform-modulus state 2^{-N/2} exp(i theta_s) with i.i.d. phases; the
/// typicality trace estimator Tr{A} ~ 2^N <psi|A|psi>. Deterministic per seed.
StateVector random_phase_state(int n_spins, std::uint64_t seed);

cplx inner_product(const StateVector& a, const StateVector& b);

double norm(const StateVector& state);

}  // namespace dqring
