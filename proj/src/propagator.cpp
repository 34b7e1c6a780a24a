#include "dqring/propagator.hpp"

#include <cmath>
#include <stdexcept>

namespace dqring {

namespace {

// Rotates the (s11, s00) amplitude pairs for sites p1 < p2 by
// [[c, -i s], [-i s, c]]. The enumeration inserts the two fixed bits into a
// 2^(N-2) counter, so no per-element bit scatter is needed.
void pair_gate_kernel(cplx* amp, int n_spins, int p1, int p2, double c, double s) {
    const std::uint64_t mask = (std::uint64_t{1} << p1) | (std::uint64_t{1} << p2);
    const std::uint64_t n_low = std::uint64_t{1} << p1;
    const std::uint64_t n_mid = std::uint64_t{1} << (p2 - p1 - 1);
    const std::uint64_t n_high = std::uint64_t{1} << (n_spins - 1 - p2);
    for (std::uint64_t hi = 0; hi < n_high; ++hi) {
        const std::uint64_t base_h = hi << (p2 + 1);
        for (std::uint64_t mid = 0; mid < n_mid; ++mid) {
            const std::uint64_t base_m = base_h | (mid << (p1 + 1));
            for (std::uint64_t lo = 0; lo < n_low; ++lo) {
                const std::uint64_t s00 = base_m | lo;
                const std::uint64_t s11 = s00 | mask;
                const cplx a = amp[s11];
                const cplx b = amp[s00];
                // a' = c a - i s b,  b' = -i s a + c b
                amp[s11] = cplx{c * a.real() + s * b.imag(), c * a.imag() - s * b.real()};
                amp[s00] = cplx{c * b.real() + s * a.imag(), c * b.imag() - s * a.real()};
            }
        }
    }
}

}  // namespace

TrotterPlan make_trotter_plan(const CouplingTable& couplings, double dt) {
    if (!(dt > 0.0)) throw std::invalid_argument("make_trotter_plan: dt must be > 0");
    TrotterPlan plan;
    plan.couplings = couplings;
    plan.dt = dt;
    const int n = couplings.n_spins;
    for (int i = 0; i < n; ++i) {
        for (int j = i + 1; j < n; ++j) {
            plan.gate_order.emplace_back(i, j);
            // each gate fires twice per step (palindromic sweep), so it
            // carries half the bond angle; the kernel halves it once more
            const double half = 0.25 * couplings.coupling(i, j) * dt;
            plan.cos_half.push_back(std::cos(half));
            plan.sin_half.push_back(std::sin(half));
        }
    }
    const std::uint64_t dim = std::uint64_t{1} << n;
    plan.zeeman_half.resize(dim);
    for (std::uint64_t s = 0; s < dim; ++s) {
        double zf = 0.0;
        for (int i = 0; i < n; ++i)
            zf += couplings.h[i] * (((s >> i) & 1) ? 0.5 : -0.5);
        const double angle = -0.5 * dt * zf;
        plan.zeeman_half[s] = cplx{std::cos(angle), std::sin(angle)};
    }
    return plan;
}

void dq_pair_gate(StateVector& state, int i, int j, double theta) {
    if (i == j) throw std::invalid_argument("dq_pair_gate: i == j");
    if (i < 0 || j < 0 || i >= state.n_spins || j >= state.n_spins)
        throw std::out_of_range("dq_pair_gate: site out of range");
    if (i > j) std::swap(i, j);
    pair_gate_kernel(state.amp.data(), state.n_spins, i, j, std::cos(0.5 * theta), std::sin(0.5 * theta));
}

void zeeman_gate(StateVector& state, const std::vector<double>& h, double dt, int direction) {
    for (std::uint64_t s = 0; s < state.dim(); ++s) {
        double zf = 0.0;
        for (int i = 0; i < state.n_spins; ++i)
            zf += h[i] * (((s >> i) & 1) ? 0.5 : -0.5);
        const double angle = -direction * dt * zf;
        state.amp[s] *= cplx{std::cos(angle), std::sin(angle)};
    }
}

void trotter_step(StateVector& state, const TrotterPlan& plan, int direction) {
    cplx* amp = state.amp.data();
    const std::size_t n_gates = plan.gate_order.size();
    // Palindromic sweep G_1..G_K G_K..G_1 between the Zeeman halves: the step
    // is symmetric, so the state error is O(dt^2), and its inverse is the same
    // sequence with negated angles.
    const double sign = direction >= 0 ? 1.0 : -1.0;
    for (std::uint64_t s = 0; s < state.dim(); ++s)
        amp[s] *= direction >= 0 ? plan.zeeman_half[s] : std::conj(plan.zeeman_half[s]);
    for (std::size_t g = 0; g < n_gates; ++g)
        pair_gate_kernel(amp, state.n_spins, plan.gate_order[g].first, plan.gate_order[g].second,
                         plan.cos_half[g], sign * plan.sin_half[g]);
    for (std::size_t g = n_gates; g-- > 0;)
        pair_gate_kernel(amp, state.n_spins, plan.gate_order[g].first, plan.gate_order[g].second,
                         plan.cos_half[g], sign * plan.sin_half[g]);
    for (std::uint64_t s = 0; s < state.dim(); ++s)
        amp[s] *= direction >= 0 ? plan.zeeman_half[s] : std::conj(plan.zeeman_half[s]);
}

long long step_count(const TrotterPlan& plan, double t) {
    if (t < 0.0) throw std::invalid_argument("evolve: t must be >= 0");
    return std::llround(t / plan.dt);
}

void evolve(StateVector& state, const TrotterPlan& plan, double t, int direction) {
    const long long steps = step_count(plan, t);
    for (long long k = 0; k < steps; ++k) trotter_step(state, plan, direction);
}

Eigen::MatrixXcd dense_hamiltonian(const CouplingTable& couplings) {
    const int n = couplings.n_spins;
    const std::uint64_t dim = std::uint64_t{1} << n;
    Eigen::MatrixXcd ham = Eigen::MatrixXcd::Zero(dim, dim);
    for (std::uint64_t s = 0; s < dim; ++s) {
        double diag = 0.0;
        for (int i = 0; i < n; ++i)
            diag += couplings.h[i] * (((s >> i) & 1) ? 0.5 : -0.5);
        ham(s, s) = diag;
    }
    // D (IxIx - IyIy) = D/2 (I+I+ + I-I-): couples (up,up) <-> (down,down)
    for (int i = 0; i < n; ++i) {
        for (int j = i + 1; j < n; ++j) {
            const std::uint64_t mask = (std::uint64_t{1} << i) | (std::uint64_t{1} << j);
            for (std::uint64_t s = 0; s < dim; ++s) {
                if ((s & mask) == mask) {
                    ham(s ^ mask, s) += 0.5 * couplings.coupling(i, j);
                    ham(s, s ^ mask) += 0.5 * couplings.coupling(i, j);
                }
            }
        }
    }
    return ham;
}

ExactPropagator exact_propagator(const CouplingTable& couplings) {
    if (couplings.n_spins > kExactPropagatorMaxSpins)
        throw std::invalid_argument("exact_propagator: N > 10 refused (dense eigendecomposition)");
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> solver(dense_hamiltonian(couplings));
    if (solver.info() != Eigen::Success)
        throw std::runtime_error("exact_propagator: eigendecomposition failed");
    ExactPropagator prop;
    prop.n_spins = couplings.n_spins;
    prop.eigenvalues = solver.eigenvalues();
    prop.eigenvectors = solver.eigenvectors();
    return prop;
}

void exact_evolve(const ExactPropagator& prop, StateVector& state, double t, int direction) {
    if (state.n_spins != prop.n_spins) throw std::invalid_argument("exact_evolve: size mismatch");
    Eigen::Map<Eigen::VectorXcd> psi(state.amp.data(), static_cast<Eigen::Index>(state.dim()));
    Eigen::VectorXcd modes = prop.eigenvectors.adjoint() * psi;
    for (Eigen::Index k = 0; k < modes.size(); ++k) {
        const double angle = -direction * prop.eigenvalues(k) * t;
        modes(k) *= cplx{std::cos(angle), std::sin(angle)};
    }
    psi = prop.eigenvectors * modes;
}

}  // namespace dqring
