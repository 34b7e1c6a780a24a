#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace dqring {

enum class SignMode { uniform, random_sign };

std::string to_string(SignMode m);
SignMode sign_mode_from_string(const std::string& s);

/// Parameters of a spin-1/2 ring with power-law couplings |D_ij| = J / r_ij^alpha
/// (r_ij = bond distance) and on-site disorder fields h_i ~ U[-W/2, W/2].
/// Time is measured in units of hbar/J throughout.
struct RingSpec {
    int n_spins = 8;
    double alpha = 3.0;
    double coupling_j = 1.0;
    SignMode sign_mode = SignMode::uniform;
    double disorder_width = 1.0;  // W, in units of J
    std::uint64_t seed = 0;
};

/// Throws std::invalid_argument if the spec violates its invariants.
void validate(const RingSpec& spec);

struct CouplingTable {
    int n_spins = 0;
    std::vector<double> d;  // N*N, symmetric, zero diagonal
    std::vector<double> h;  // length N

    double coupling(int i, int j) const { return d[static_cast<std::size_t>(i) * n_spins + j]; }
    double& coupling(int i, int j) { return d[static_cast<std::size_t>(i) * n_spins + j]; }
};

/// Minimum number of ring steps between sites i and j.
int bond_distance(int i, int j, int n_spins);

/// Deterministic for a given spec: coupling signs consume the seeded stream in
/// (i<j) row-major pair order; disorder fields use a sub-stream keyed off the seed.
CouplingTable build_couplings(const RingSpec& spec);

/// Sum of D_ij^2 over ordered pairs i != j (each unordered pair counted twice).
double coupling_second_moment(const CouplingTable& table);

}  // namespace dqring
