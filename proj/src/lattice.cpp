#include "dqring/lattice.hpp"

#include <cmath>
#include <cstdlib>
#include <random>
#include <stdexcept>

namespace dqring {

std::string to_string(SignMode m) {
    return m == SignMode::uniform ? "uniform" : "random";
}

SignMode sign_mode_from_string(const std::string& s) {
    if (s == "uniform") return SignMode::uniform;
    if (s == "random") return SignMode::random_sign;
    throw std::invalid_argument("unknown sign mode: " + s);
}

void validate(const RingSpec& spec) {
    if (spec.n_spins < 2) throw std::invalid_argument("RingSpec: N must be >= 2");
    if (!(spec.alpha > 0.0)) throw std::invalid_argument("RingSpec: alpha must be > 0");
    if (spec.disorder_width < 0.0) throw std::invalid_argument("RingSpec: disorder width must be >= 0");
}

int bond_distance(int i, int j, int n_spins) {
    if (i < 0 || j < 0 || i >= n_spins || j >= n_spins)
        throw std::out_of_range("bond_distance: site index out of range");
    int d = std::abs(i - j);
    return std::min(d, n_spins - d);
}

namespace {

// splitmix64; used to derive independent sub-streams from one seed.
std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t tag) {
    std::uint64_t z = seed + 0x9e3779b97f4a7c15ull * (tag + 1);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
    return z ^ (z >> 31);
}

// top 53 bits -> [0, 1); avoids std::uniform_real_distribution, whose output
// is implementation-defined and would break cross-platform reproducibility.
double unit_double(std::mt19937_64& rng) {
    return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

constexpr std::uint64_t kFieldStreamTag = 0x6669656c6473ull;  // "fields"

}  // namespace

CouplingTable build_couplings(const RingSpec& spec) {
    validate(spec);
    const int n = spec.n_spins;
    CouplingTable table;
    table.n_spins = n;
    table.d.assign(static_cast<std::size_t>(n) * n, 0.0);
    table.h.assign(n, 0.0);

    std::mt19937_64 sign_rng(spec.seed);
    for (int i = 0; i < n; ++i) {
        for (int j = i + 1; j < n; ++j) {
            double mag = spec.coupling_j / std::pow(static_cast<double>(bond_distance(i, j, n)), spec.alpha);
            double sign = 1.0;
            if (spec.sign_mode == SignMode::random_sign)
                sign = (sign_rng() >> 63) ? -1.0 : 1.0;
            table.coupling(i, j) = sign * mag;
            table.coupling(j, i) = sign * mag;
        }
    }

    std::mt19937_64 field_rng(mix_seed(spec.seed, kFieldStreamTag));
    for (int i = 0; i < n; ++i)
        table.h[i] = (unit_double(field_rng) - 0.5) * spec.disorder_width;

    return table;
}

double coupling_second_moment(const CouplingTable& table) {
    double s = 0.0;
    for (int i = 0; i < table.n_spins; ++i)
        for (int j = 0; j < table.n_spins; ++j)
            if (i != j) s += table.coupling(i, j) * table.coupling(i, j);
    return s;
}

}  // namespace dqring
