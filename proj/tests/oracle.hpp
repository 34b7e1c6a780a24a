#pragma once

// Brute-force dense-operator reference implementations, kept deliberately
// independent of the library internals: explicit Kronecker products, matrix
// exponentials via eigendecomposition, and literal traces. Small N only.

#include <Eigen/Dense>
#include <cmath>
#include <complex>
#include <vector>

#include "dqring/lattice.hpp"

namespace oracle {

using cplx = std::complex<double>;
using Mat = Eigen::MatrixXcd;

// Basis index convention mirrors the library: bit i of the index is 1 when
// spin i is up, and bit 0 varies fastest.
inline Mat kron(const Mat& a, const Mat& b) {
    Mat out(a.rows() * b.rows(), a.cols() * b.cols());
    for (Eigen::Index i = 0; i < a.rows(); ++i)
        for (Eigen::Index j = 0; j < a.cols(); ++j)
            out.block(i * b.rows(), j * b.cols(), b.rows(), b.cols()) = a(i, j) * b;
    return out;
}

inline Mat spin_half(char axis) {
    Mat m(2, 2);
    switch (axis) {
        case 'x':
            m << 0.0, 0.5, 0.5, 0.0;
            break;
        case 'y':
            m << 0.0, cplx{0.0, -0.5}, cplx{0.0, 0.5}, 0.0;
            break;
        default:  // z; index 0 is spin down
            m << -0.5, 0.0, 0.0, 0.5;
            break;
    }
    return m;
}

inline Mat site_operator(int n_spins, int site, const Mat& m2) {
    const Eigen::Index low = Eigen::Index{1} << site;
    const Eigen::Index high = Eigen::Index{1} << (n_spins - 1 - site);
    return kron(Mat::Identity(high, high), kron(m2, Mat::Identity(low, low)));
}

inline Mat total_sz(int n_spins) {
    const Eigen::Index dim = Eigen::Index{1} << n_spins;
    Mat out = Mat::Zero(dim, dim);
    for (int i = 0; i < n_spins; ++i) out += site_operator(n_spins, i, spin_half('z'));
    return out;
}

inline Mat hamiltonian(const dqring::CouplingTable& couplings) {
    const int n = couplings.n_spins;
    const Eigen::Index dim = Eigen::Index{1} << n;
    Mat h = Mat::Zero(dim, dim);
    for (int i = 0; i < n; ++i) h += couplings.h[i] * site_operator(n, i, spin_half('z'));
    for (int i = 0; i < n; ++i)
        for (int j = i + 1; j < n; ++j) {
            const Mat xx = site_operator(n, i, spin_half('x')) * site_operator(n, j, spin_half('x'));
            const Mat yy = site_operator(n, i, spin_half('y')) * site_operator(n, j, spin_half('y'));
            h += couplings.coupling(i, j) * (xx - yy);
        }
    return h;
}

/// exp(-i H t) for Hermitian H.
inline Mat propagator(const Mat& h, double t) {
    Eigen::SelfAdjointEigenSolver<Mat> solver(h);
    const Eigen::VectorXd& w = solver.eigenvalues();
    Mat phases = Mat::Zero(w.size(), w.size());
    for (Eigen::Index k = 0; k < w.size(); ++k) {
        const double angle = -w(k) * t;
        phases(k, k) = cplx{std::cos(angle), std::sin(angle)};
    }
    return solver.eigenvectors() * phases * solver.eigenvectors().adjoint();
}

/// E_ij(t, phi) = 2^-N Tr{ I_i^z(t) R^dag I_j^z(t) R }, literal trace.
inline Mat echo_matrix(const dqring::CouplingTable& couplings, double t, double phi) {
    const int n = couplings.n_spins;
    const Eigen::Index dim = Eigen::Index{1} << n;
    const Mat u = propagator(hamiltonian(couplings), t);
    const Mat r = propagator(total_sz(n), phi);
    std::vector<Mat> heis(n);
    for (int i = 0; i < n; ++i)
        heis[i] = u * site_operator(n, i, spin_half('z')) * u.adjoint();
    Mat e(n, n);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j)
            e(i, j) = (heis[i] * r.adjoint() * heis[j] * r).trace() / static_cast<double>(dim);
    return e;
}

struct ClusterSizes {
    double k_g = 0.0;
    double k_l = 0.0;
    double k_ct = 0.0;
};

/// K_G, K_L, and the explicit i != j cross sum from literal commutator traces.
inline ClusterSizes cluster_sizes(const dqring::CouplingTable& couplings, double t) {
    const int n = couplings.n_spins;
    const Mat u = propagator(hamiltonian(couplings), t);
    const Mat iz = total_sz(n);
    const double norm = -2.0 / (n * std::pow(2.0, n - 2));
    std::vector<Mat> comm(n);
    Mat heis_total = Mat::Zero(iz.rows(), iz.cols());
    ClusterSizes out;
    for (int i = 0; i < n; ++i) {
        const Mat heis = u * site_operator(n, i, spin_half('z')) * u.adjoint();
        comm[i] = iz * heis - heis * iz;
        out.k_l += norm * (comm[i] * comm[i]).trace().real();
        heis_total += heis;
    }
    const Mat c = iz * heis_total - heis_total * iz;
    out.k_g = norm * (c * c).trace().real();
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j)
            if (i != j) out.k_ct += norm * (comm[i] * comm[j]).trace().real();
    return out;
}

}  // namespace oracle
