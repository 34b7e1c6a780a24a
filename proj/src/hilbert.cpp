#include "dqring/hilbert.hpp"

#include <cmath>
#include <numbers>
#include <random>
#include <stdexcept>

namespace dqring {

StateVector StateVector::zero(int n_spins) {
    StateVector st;
    st.n_spins = n_spins;
    st.amp.assign(std::size_t{1} << n_spins, cplx{0.0, 0.0});
    return st;
}

StateVector StateVector::basis_state(int n_spins, std::uint64_t s) {
    StateVector st = zero(n_spins);
    if (s >= st.dim()) throw std::out_of_range("basis_state: index out of range");
    st.amp[s] = 1.0;
    return st;
}

MagnetizationIndex MagnetizationIndex::build(int n_spins) {
    MagnetizationIndex idx;
    idx.n_spins = n_spins;
    idx.m.resize(std::size_t{1} << n_spins);
    for (std::uint64_t s = 0; s < idx.m.size(); ++s)
        idx.m[s] = magnetization(s, n_spins);
    return idx;
}

void apply_site_sz(StateVector& state, int site) {
    if (site < 0 || site >= state.n_spins)
        throw std::out_of_range("apply_site_sz: site out of range");
    const std::uint64_t mask = std::uint64_t{1} << site;
    for (std::uint64_t s = 0; s < state.dim(); ++s)
        state.amp[s] *= (s & mask) ? 0.5 : -0.5;
}

void apply_total_sz(StateVector& state) {
    for (std::uint64_t s = 0; s < state.dim(); ++s)
        state.amp[s] *= magnetization(s, state.n_spins);
}

void apply_rotation(StateVector& state, double phi) {
    for (std::uint64_t s = 0; s < state.dim(); ++s) {
        double angle = -phi * magnetization(s, state.n_spins);
        state.amp[s] *= cplx{std::cos(angle), std::sin(angle)};
    }
}

StateVector random_phase_state(int n_spins, std::uint64_t seed) {
    StateVector st = StateVector::zero(n_spins);
    std::mt19937_64 rng(seed);
    const double mag = std::pow(2.0, -0.5 * n_spins);
    for (std::uint64_t s = 0; s < st.dim(); ++s) {
        double theta = 2.0 * std::numbers::pi * (static_cast<double>(rng() >> 11) * 0x1.0p-53);
        st.amp[s] = cplx{mag * std::cos(theta), mag * std::sin(theta)};
    }
    return st;
}

cplx inner_product(const StateVector& a, const StateVector& b) {
    if (a.n_spins != b.n_spins) throw std::invalid_argument("inner_product: size mismatch");
    cplx acc{0.0, 0.0};
    for (std::uint64_t s = 0; s < a.dim(); ++s)
        acc += std::conj(a.amp[s]) * b.amp[s];
    return acc;
}

double norm(const StateVector& state) {
    double acc = 0.0;
    for (const cplx& a : state.amp) acc += std::norm(a);
    return std::sqrt(acc);
}

}  // namespace dqring
