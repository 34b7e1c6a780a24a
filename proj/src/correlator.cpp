#include "dqring/correlator.hpp"

#include <cblas.h>

#include <cmath>
#include <stdexcept>

namespace dqring {

namespace detail {

std::uint64_t state_seed(std::uint64_t seed, std::uint64_t k) {
    std::uint64_t z = seed + 0x9e3779b97f4a7c15ull * (k + 1);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
    return z ^ (z >> 31);
}

}  // namespace detail

namespace {

// C = A^H * B, with B given as a (A.rows x cols) column-major block.
void gemm_adjoint(const Eigen::MatrixXcd& a, const cplx* b, int cols, cplx* c) {
    const cplx one{1.0, 0.0};
    const cplx zero{0.0, 0.0};
    cblas_zgemm(CblasColMajor, CblasConjTrans, CblasNoTrans, static_cast<int>(a.cols()), cols,
                static_cast<int>(a.rows()), &one, a.data(), static_cast<int>(a.rows()), b,
                static_cast<int>(a.rows()), &zero, c, static_cast<int>(a.cols()));
}

void check_exact_cutoff(int n_spins) {
    if (n_spins > kExactEstimatorMaxSpins)
        throw std::invalid_argument("exact estimator: N = " + std::to_string(n_spins) +
                                    " exceeds the exact cutoff (" +
                                    std::to_string(kExactEstimatorMaxSpins) + "); use the stochastic estimator");
}

}  // namespace

PairCoherenceTensor PairCoherenceTensor::zero(int n_spins, double t) {
    PairCoherenceTensor tensor;
    tensor.n_spins = n_spins;
    tensor.t = t;
    tensor.a.assign(static_cast<std::size_t>(2 * n_spins + 1) * n_spins * n_spins, cplx{0.0, 0.0});
    return tensor;
}

EchoMatrix PairCoherenceTensor::echo_at(double phi) const {
    EchoMatrix echo;
    echo.n_spins = n_spins;
    echo.t = t;
    echo.phi = phi;
    echo.e.assign(static_cast<std::size_t>(n_spins) * n_spins, cplx{0.0, 0.0});
    echo.estimator.kind = EstimatorInfo::Kind::exact;
    for (int m = -n_spins; m <= n_spins; ++m) {
        const cplx phase{std::cos(m * phi), std::sin(m * phi)};
        for (int i = 0; i < n_spins; ++i)
            for (int j = 0; j < n_spins; ++j)
                echo.at(i, j) += at(m, i, j) * phase;
    }
    return echo;
}

ExactEchoSweep::ExactEchoSweep(const CouplingTable& couplings, const TrotterPlan& plan)
    : n_(couplings.n_spins), plan_(plan) {
    check_exact_cutoff(n_);
    // Threaded BLAS would make reductions scheduling-dependent; results must
    // be bit-stable, so the GEMMs run single-threaded.
    openblas_set_num_threads(1);
    const std::uint64_t dim = std::uint64_t{1} << n_;
    for (std::uint64_t s = 0; s < dim; ++s)
        block_states_[std::popcount(s) & 1].push_back(static_cast<std::uint32_t>(s));
    for (int p = 0; p < 2; ++p) {
        const auto d = static_cast<Eigen::Index>(block_states_[p].size());
        w_[p] = Eigen::MatrixXcd::Identity(d, d);
    }
    tensor_ = PairCoherenceTensor::zero(n_, 0.0);
}

const std::array<Eigen::MatrixXcd, 2>& ExactEchoSweep::step_power(int bit) {
    while (static_cast<int>(power_cache_.size()) <= bit) {
        std::array<Eigen::MatrixXcd, 2> next;
        if (power_cache_.empty()) {
            // Single backward step, column by column, compacted per parity.
            for (int p = 0; p < 2; ++p) {
                const auto& states = block_states_[p];
                const auto d = static_cast<Eigen::Index>(states.size());
                next[p].resize(d, d);
                for (Eigen::Index c = 0; c < d; ++c) {
                    StateVector col = StateVector::basis_state(n_, states[c]);
                    trotter_step(col, plan_, -1);
                    for (Eigen::Index r = 0; r < d; ++r) next[p](r, c) = col.amp[states[r]];
                }
            }
        } else {
            const auto& prev = power_cache_.back();
            for (int p = 0; p < 2; ++p) next[p] = prev[p] * prev[p];
        }
        power_cache_.push_back(std::move(next));
    }
    return power_cache_[bit];
}

const PairCoherenceTensor& ExactEchoSweep::advance_to(double t) {
    const long long target = step_count(plan_, t);
    if (target < steps_done_)
        throw std::invalid_argument("ExactEchoSweep: time grid must be non-decreasing");
    const long long delta = target - steps_done_;
    if (delta > 0) {
        // U^dag(t + k dt) = U^dag(dt)^k U^dag(t); set bits applied low to high.
        for (int bit = 0; bit < 63; ++bit) {
            if ((delta >> bit) & 1) {
                const auto& seg = step_power(bit);
                for (int p = 0; p < 2; ++p) w_[p] = seg[p] * w_[p];
            }
        }
        steps_done_ = target;
        tensor_valid_ = false;
    }
    if (!tensor_valid_) compute_tensor();
    return tensor_;
}

void ExactEchoSweep::compute_tensor() {
    tensor_ = PairCoherenceTensor::zero(n_, current_time());
    const int n = n_;
    for (int p = 0; p < 2; ++p) {
        const auto& states = block_states_[p];
        const auto d = static_cast<Eigen::Index>(states.size());
        const Eigen::Index block = std::min<Eigen::Index>(d, 256);
        std::vector<cplx> scaled(static_cast<std::size_t>(d) * block);
        std::vector<std::vector<cplx>> msite(n, std::vector<cplx>(static_cast<std::size_t>(d) * block));
        for (Eigen::Index b0 = 0; b0 < d; b0 += block) {
            const Eigen::Index bw = std::min(block, d - b0);
            for (int i = 0; i < n; ++i) {
                // (D_i W)[:, b0:b0+bw], rows weighted by sigma_i of the row state
                const std::uint64_t mask = std::uint64_t{1} << i;
                for (Eigen::Index bb = 0; bb < bw; ++bb) {
                    const cplx* src = w_[p].data() + (b0 + bb) * d;
                    cplx* dst = scaled.data() + bb * d;
                    for (Eigen::Index r = 0; r < d; ++r)
                        dst[r] = src[r] * ((states[r] & mask) ? 0.5 : -0.5);
                }
                gemm_adjoint(w_[p], scaled.data(), static_cast<int>(bw), msite[i].data());
            }
            // msite[i](a, bb) = <s_a| U I_i^z U^dag |s_b>; Gram-accumulate by
            // coherence order m = M(s_b) - M(s_a). A_ji^m = conj(A_ij^m), so
            // only the lower triangle is accumulated here.
            std::vector<cplx> u(n);
            for (Eigen::Index bb = 0; bb < bw; ++bb) {
                const int pop_b = std::popcount(states[b0 + bb]);
                for (Eigen::Index a = 0; a < d; ++a) {
                    const int m = pop_b - std::popcount(states[a]);
                    for (int i = 0; i < n; ++i) u[i] = msite[i][bb * d + a];
                    cplx* slab = &tensor_.at(m, 0, 0);
                    for (int i = 0; i < n; ++i) {
                        const cplx ui = u[i];
                        for (int j = 0; j <= i; ++j) slab[i * n + j] += ui * std::conj(u[j]);
                    }
                }
            }
        }
    }
    const double scale = std::pow(2.0, -n);
    for (int m = -n; m <= n; ++m)
        for (int i = 0; i < n; ++i)
            for (int j = 0; j <= i; ++j) {
                tensor_.at(m, i, j) *= scale;
                if (j != i) tensor_.at(m, j, i) = std::conj(tensor_.at(m, i, j));
            }
    tensor_valid_ = true;
}

PairCoherenceTensor pair_tensor_exact(const CouplingTable& couplings, const TrotterPlan& plan, double t) {
    ExactEchoSweep sweep(couplings, plan);
    return sweep.advance_to(t);
}

EchoMatrix echo_matrix_exact(const CouplingTable& couplings, const TrotterPlan& plan, double t, double phi) {
    return pair_tensor_exact(couplings, plan, t).echo_at(phi);
}

namespace {

// Single random-phase-state contribution: the trace becomes an expectation in
// |psi>, the encoding rotation is resolved over the magnetization sectors of
// |psi>, and the outer rotation over the magnetization of the amplitude index.
PairCoherenceTensor one_state_tensor(const TrotterPlan& plan, double t, int n, std::uint64_t state_seed) {
    PairCoherenceTensor tensor = PairCoherenceTensor::zero(n, t);
    const StateVector psi = random_phase_state(n, state_seed);
    const std::uint64_t dim = psi.dim();

    StateVector back = psi;
    evolve(back, plan, t, -1);
    std::vector<StateVector> heis(n);  // heis[i] = U I_i^z U^dag |psi>
    for (int i = 0; i < n; ++i) {
        heis[i] = back;
        apply_site_sz(heis[i], i);
        evolve(heis[i], plan, t, +1);
    }

    std::vector<StateVector> sector_heis(n);
    for (int pop = 0; pop <= n; ++pop) {
        StateVector part = StateVector::zero(n);
        for (std::uint64_t s = 0; s < dim; ++s)
            if (std::popcount(s) == pop) part.amp[s] = psi.amp[s];
        evolve(part, plan, t, -1);
        for (int j = 0; j < n; ++j) {
            sector_heis[j] = part;
            apply_site_sz(sector_heis[j], j);
            evolve(sector_heis[j], plan, t, +1);
        }
        for (std::uint64_t x = 0; x < dim; ++x) {
            const int m = std::popcount(x) - pop;
            cplx* slab = &tensor.at(m, 0, 0);
            for (int i = 0; i < n; ++i) {
                const cplx ci = std::conj(heis[i].amp[x]);
                for (int j = 0; j < n; ++j) slab[i * n + j] += ci * sector_heis[j].amp[x];
            }
        }
    }
    return tensor;
}

}  // namespace

PairCoherenceTensor StochasticEchoResult::mean() const {
    PairCoherenceTensor out = PairCoherenceTensor::zero(n_spins, t);
    for (const auto& tensor : states)
        for (std::size_t k = 0; k < out.a.size(); ++k) out.a[k] += tensor.a[k];
    const double inv = 1.0 / static_cast<double>(states.size());
    for (auto& v : out.a) v *= inv;
    return out;
}

EchoMatrix StochasticEchoResult::echo_at(double phi) const {
    const int n = n_spins;
    const int n_states = static_cast<int>(states.size());
    EchoMatrix out;
    out.n_spins = n;
    out.t = t;
    out.phi = phi;
    out.e.assign(static_cast<std::size_t>(n) * n, cplx{0.0, 0.0});
    out.std_error.assign(static_cast<std::size_t>(n) * n, 0.0);
    out.estimator = {EstimatorInfo::Kind::stochastic, n_states, seed};

    std::vector<cplx> sum(out.e.size(), cplx{0.0, 0.0});
    std::vector<double> sum_sq_re(out.e.size(), 0.0), sum_sq_im(out.e.size(), 0.0);
    for (const auto& tensor : states) {
        EchoMatrix ek = tensor.echo_at(phi);
        for (std::size_t k = 0; k < sum.size(); ++k) {
            sum[k] += ek.e[k];
            sum_sq_re[k] += ek.e[k].real() * ek.e[k].real();
            sum_sq_im[k] += ek.e[k].imag() * ek.e[k].imag();
        }
    }
    for (std::size_t k = 0; k < sum.size(); ++k) {
        out.e[k] = sum[k] / static_cast<double>(n_states);
        if (n_states > 1) {
            double var_re = (sum_sq_re[k] - sum[k].real() * sum[k].real() / n_states) / (n_states - 1);
            double var_im = (sum_sq_im[k] - sum[k].imag() * sum[k].imag() / n_states) / (n_states - 1);
            var_re = std::max(var_re, 0.0);
            var_im = std::max(var_im, 0.0);
            out.std_error[k] = std::sqrt((var_re + var_im) / n_states);
        }
    }
    return out;
}

StochasticEchoResult pair_tensor_stochastic(const CouplingTable& couplings, const TrotterPlan& plan,
                                            double t, int n_states, std::uint64_t seed) {
    if (n_states < 1) throw std::invalid_argument("pair_tensor_stochastic: n_states must be >= 1");
    StochasticEchoResult result;
    result.n_spins = couplings.n_spins;
    result.t = t;
    result.seed = seed;
    result.states.reserve(n_states);
    for (int k = 0; k < n_states; ++k)
        result.states.push_back(one_state_tensor(plan, t, couplings.n_spins, detail::state_seed(seed, k)));
    return result;
}

EchoMatrix echo_matrix_stochastic(const CouplingTable& couplings, const TrotterPlan& plan, double t,
                                  double phi, int n_states, std::uint64_t seed) {
    return pair_tensor_stochastic(couplings, plan, t, n_states, seed).echo_at(phi);
}

EchoDecomposition decompose_echo(const EchoMatrix& echo) {
    const int n = echo.n_spins;
    EchoDecomposition dec;
    dec.m_l_site.resize(n);
    dec.m_ct_site.resize(n);
    const double scale = 4.0 / n;
    double worst_imag = 0.0;
    for (int i = 0; i < n; ++i) {
        cplx local = echo.at(i, i);
        cplx cross{0.0, 0.0};
        for (int j = 0; j < n; ++j)
            if (j != i) cross += echo.at(i, j);
        worst_imag = std::max({worst_imag, std::abs(local.imag()), std::abs(cross.imag())});
        dec.m_l_site[i] = scale * local.real();
        dec.m_ct_site[i] = scale * cross.real();
        dec.m_l += dec.m_l_site[i];
        dec.m_ct += dec.m_ct_site[i];
    }
    dec.m_g = dec.m_l + dec.m_ct;
    if (echo.estimator.kind == EstimatorInfo::Kind::exact && worst_imag * scale >= 1e-9)
        throw std::runtime_error("decompose_echo: imaginary residue above tolerance");
    return dec;
}

double distance_echo(const EchoMatrix& echo, int n) {
    const int n_spins = echo.n_spins;
    if (n < 0 || n > n_spins / 2) throw std::out_of_range("distance_echo: distance out of range");
    const double scale = 4.0 / n_spins;
    double acc = 0.0;
    const bool antipodal = (n_spins % 2 == 0) && (n == n_spins / 2);
    for (int i = 0; i < n_spins; ++i) {
        if (n == 0) {
            acc += echo.at(i, i).real();
        } else if (antipodal) {
            acc += echo.at(i, (i + n) % n_spins).real();
        } else {
            acc += echo.at(i, (i + n) % n_spins).real() + echo.at(i, (i - n + n_spins) % n_spins).real();
        }
    }
    return scale * acc;
}

}  // namespace dqring
