#pragma once

#include <Eigen/Dense>
#include <utility>

#include "dqring/hilbert.hpp"
#include "dqring/lattice.hpp"

namespace dqring {

/// Symmetric second-order Trotter splitting of the double-quantum Hamiltonian
///   H = sum_i h_i I_i^z + sum_{i<j} D_ij (I_i^x I_j^x - I_i^y I_j^y).
/// One forward step is  Z(dt/2) G_1 ... G_K G_K ... G_1 Z(dt/2)  with the pair
/// gates swept palindromically in (i<j) row-major order, each carrying half
/// the bond angle; the backward step is the exact operator inverse (same
/// palindrome, negated angles), so a forward/backward round trip is an
/// identity up to roundoff.
struct TrotterPlan {
    CouplingTable couplings;
    double dt = 0.01;
    std::vector<std::pair<int, int>> gate_order;  // (i, j) with i < j, row-major
    std::vector<double> cos_half;                 // cos(D_ij dt / 4) per gate
    std::vector<double> sin_half;
    std::vector<cplx> zeeman_half;                // exp(-i (dt/2) sum_i h_i sigma_i(s)) per basis state

    int n_spins() const { return couplings.n_spins; }
};

TrotterPlan make_trotter_plan(const CouplingTable& couplings, double dt);

/// exp(-i theta (I_i^x I_j^x - I_i^y I_j^y)): rotates each ((up,up),(down,down))
/// amplitude pair by [[cos(theta/2), -i sin(theta/2)], [-i sin(theta/2), cos(theta/2)]];
/// the zero-quantum subspace (up,down)/(down,up) is untouched.
void dq_pair_gate(StateVector& state, int i, int j, double theta);

/// Diagonal phase exp(-i direction dt sum_i h_i (bit_i(s) - 1/2)).
void zeeman_gate(StateVector& state, const std::vector<double>& h, double dt, int direction);

/// One second-order step of exp(-i direction H dt).
void trotter_step(StateVector& state, const TrotterPlan& plan, int direction);

/// Applies round(t / dt) Trotter steps; direction -1 is the exact inverse of +1.
void evolve(StateVector& state, const TrotterPlan& plan, double t, int direction);

long long step_count(const TrotterPlan& plan, double t);

/// Dense eigendecomposition oracle; N <= 10 only.
struct ExactPropagator {
    int n_spins = 0;
    Eigen::VectorXd eigenvalues;
    Eigen::MatrixXcd eigenvectors;
};

constexpr int kExactPropagatorMaxSpins = 10;

Eigen::MatrixXcd dense_hamiltonian(const CouplingTable& couplings);

ExactPropagator exact_propagator(const CouplingTable& couplings);

/// state <- exp(-i direction H t) state, via the eigendecomposition.
void exact_evolve(const ExactPropagator& prop, StateVector& state, double t, int direction);

}  // namespace dqring
