#include "dqring/spectrum.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>

namespace dqring {

int PhiGrid::default_size(int n_spins) {
    int p = 32;
    while (p < 2 * n_spins + 2) p <<= 1;
    return p;
}

PhiGrid PhiGrid::make(int n_phi) {
    if (n_phi < 2 || (n_phi & (n_phi - 1)) != 0)
        throw std::invalid_argument("PhiGrid: n_phi must be a power of two >= 2");
    PhiGrid grid;
    grid.n_phi = n_phi;
    grid.phi.resize(n_phi);
    for (int k = 0; k < n_phi; ++k)
        grid.phi[k] = 2.0 * std::numbers::pi * k / n_phi;
    return grid;
}

double CoherenceSpectrum::sum() const {
    double acc = 0.0;
    for (double v : g) acc += v;
    return acc;
}

CoherenceSpectrum decode_spectrum(const PhiGrid& grid, const std::vector<double>& samples, double t,
                                  std::string source, bool check_imag) {
    if (static_cast<int>(samples.size()) != grid.n_phi)
        throw std::invalid_argument("decode_spectrum: samples do not cover the phi grid");
    CoherenceSpectrum spec;
    spec.t = t;
    spec.n_phi = grid.n_phi;
    spec.source = std::move(source);
    spec.g.resize(grid.n_phi);
    for (int m = spec.m_min(); m <= spec.m_max(); ++m) {
        cplx acc{0.0, 0.0};
        for (int k = 0; k < grid.n_phi; ++k) {
            const double angle = -m * grid.phi[k];
            acc += samples[k] * cplx{std::cos(angle), std::sin(angle)};
        }
        acc /= static_cast<double>(grid.n_phi);
        if (check_imag && std::abs(acc.imag()) >= 1e-9)
            throw std::runtime_error("decode_spectrum: imaginary residue above tolerance in " +
                                     spec.source);
        spec.g[static_cast<std::size_t>(m + grid.n_phi / 2)] = acc.real();
    }
    return spec;
}

double cluster_size_from_spectrum(const CoherenceSpectrum& spectrum) {
    double acc = 0.0;
    for (int m = spectrum.m_min(); m <= spectrum.m_max(); ++m)
        acc += static_cast<double>(m) * m * spectrum.at(m);
    return 2.0 * acc;
}

double cluster_size_error(const CoherenceSpectrum& spectrum) {
    if (spectrum.g_err.empty()) return 0.0;
    double acc = 0.0;
    for (int m = spectrum.m_min(); m <= spectrum.m_max(); ++m) {
        const double w = static_cast<double>(m) * m * spectrum.err_at(m);
        acc += w * w;
    }
    return 2.0 * std::sqrt(acc);
}

namespace {

// Echo signals of one tensor on the phi grid; aggregates carry 4/N, per-site
// rows carry 4, so aggregate = site mean.
struct EchoSamples {
    std::vector<double> global, local, cross;
    std::vector<std::vector<double>> local_site, cross_site;  // [site][phi]
};

EchoSamples build_samples(const PairCoherenceTensor& tensor, const PhiGrid& grid, bool exact_check) {
    const int n = tensor.n_spins;
    const int n_phi = grid.n_phi;
    EchoSamples smp;
    smp.global.assign(n_phi, 0.0);
    smp.local.assign(n_phi, 0.0);
    smp.cross.assign(n_phi, 0.0);
    smp.local_site.assign(n, std::vector<double>(n_phi, 0.0));
    smp.cross_site.assign(n, std::vector<double>(n_phi, 0.0));
    for (int k = 0; k < n_phi; ++k) {
        const EchoMatrix echo = tensor.echo_at(grid.phi[k]);
        for (int i = 0; i < n; ++i) {
            cplx local = echo.at(i, i);
            cplx cross{0.0, 0.0};
            for (int j = 0; j < n; ++j)
                if (j != i) cross += echo.at(i, j);
            if (exact_check &&
                (std::abs(local.imag()) >= 1e-9 || std::abs(cross.imag()) >= 1e-9))
                throw std::runtime_error("analyze_tensor: imaginary echo residue above tolerance");
            smp.local_site[i][k] = 4.0 * local.real();
            smp.cross_site[i][k] = 4.0 * cross.real();
        }
    }
    // Per-site cross rows are even in phi only up to the Trotter splitting
    // error; symmetrize them so per-site spectra stay real. Aggregates are
    // even identically (E_ij(-phi) = E_ji(phi)), so this leaves them exact.
    for (int i = 0; i < n; ++i) {
        std::vector<double> sym(n_phi);
        for (int k = 0; k < n_phi; ++k)
            sym[k] = 0.5 * (smp.cross_site[i][k] + smp.cross_site[i][(n_phi - k) % n_phi]);
        smp.cross_site[i] = std::move(sym);
    }
    for (int k = 0; k < n_phi; ++k) {
        for (int i = 0; i < n; ++i) {
            smp.local[k] += smp.local_site[i][k] / n;
            smp.cross[k] += smp.cross_site[i][k] / n;
        }
        smp.global[k] = smp.local[k] + smp.cross[k];
    }
    return smp;
}

// Standard error of the mean per phi sample across per-state signals.
std::vector<double> sample_stderr(const std::vector<const std::vector<double>*>& rows) {
    const std::size_t n_phi = rows.front()->size();
    const std::size_t n = rows.size();
    std::vector<double> out(n_phi, 0.0);
    if (n < 2) return out;
    for (std::size_t k = 0; k < n_phi; ++k) {
        double sum = 0.0, sum_sq = 0.0;
        for (const auto* row : rows) {
            sum += (*row)[k];
            sum_sq += (*row)[k] * (*row)[k];
        }
        double var = (sum_sq - sum * sum / n) / (n - 1);
        out[k] = std::sqrt(std::max(var, 0.0) / n);
    }
    return out;
}

// g_err_m = (1/n_phi) sqrt(sum_k SE_k^2): the DFT kernel has unit modulus.
std::vector<double> dft_stderr(const std::vector<double>& se, int n_phi) {
    double acc = 0.0;
    for (double v : se) acc += v * v;
    return std::vector<double>(n_phi, std::sqrt(acc) / n_phi);
}

}  // namespace

SpectrumSet analyze_tensor(const PairCoherenceTensor& mean,
                           const std::vector<PairCoherenceTensor>* per_state, const PhiGrid& grid,
                           bool exact_check) {
    const int n = mean.n_spins;
    SpectrumSet set;
    set.t = mean.t;
    EchoSamples smp = build_samples(mean, grid, exact_check);
    set.global = decode_spectrum(grid, smp.global, mean.t, "G", exact_check);
    set.local = decode_spectrum(grid, smp.local, mean.t, "L", exact_check);
    set.cross = decode_spectrum(grid, smp.cross, mean.t, "CT", exact_check);
    for (int i = 0; i < n; ++i) {
        set.local_site.push_back(
            decode_spectrum(grid, smp.local_site[i], mean.t, "L_site" + std::to_string(i), exact_check));
        set.cross_site.push_back(
            decode_spectrum(grid, smp.cross_site[i], mean.t, "CT_site" + std::to_string(i), exact_check));
    }
    if (per_state != nullptr && per_state->size() > 1) {
        std::vector<EchoSamples> state_smp;
        state_smp.reserve(per_state->size());
        for (const auto& tensor : *per_state) state_smp.push_back(build_samples(tensor, grid, false));
        auto attach = [&](CoherenceSpectrum& spec, auto pick) {
            std::vector<const std::vector<double>*> rows;
            rows.reserve(state_smp.size());
            for (const auto& s : state_smp) rows.push_back(pick(s));
            spec.g_err = dft_stderr(sample_stderr(rows), grid.n_phi);
        };
        attach(set.global, [](const EchoSamples& s) { return &s.global; });
        attach(set.local, [](const EchoSamples& s) { return &s.local; });
        attach(set.cross, [](const EchoSamples& s) { return &s.cross; });
        for (int i = 0; i < n; ++i) {
            attach(set.local_site[i], [i](const EchoSamples& s) { return &s.local_site[i]; });
            attach(set.cross_site[i], [i](const EchoSamples& s) { return &s.cross_site[i]; });
        }
    }
    return set;
}

namespace {

// Commutator vectors A_i = [I^z, I_i^z(t)] |psi| for one input state.
std::vector<StateVector> commutator_vectors(const TrotterPlan& plan, double t, const StateVector& psi) {
    const int n = psi.n_spins;
    StateVector back = psi;
    evolve(back, plan, t, -1);
    StateVector back_z = psi;
    apply_total_sz(back_z);
    evolve(back_z, plan, t, -1);
    std::vector<StateVector> a(n);
    for (int i = 0; i < n; ++i) {
        StateVector left = back;  // I^z U I_i^z U^dag |psi>
        apply_site_sz(left, i);
        evolve(left, plan, t, +1);
        apply_total_sz(left);
        StateVector right = back_z;  // U I_i^z U^dag I^z |psi>
        apply_site_sz(right, i);
        evolve(right, plan, t, +1);
        for (std::uint64_t s = 0; s < left.dim(); ++s) left.amp[s] -= right.amp[s];
        a[i] = std::move(left);
    }
    return a;
}

double norm_sq(const StateVector& v) {
    double acc = 0.0;
    for (const cplx& a : v.amp) acc += std::norm(a);
    return acc;
}

// Runs fn over the estimator's input states; returns the trace normalization
// factor 2/(N 2^(N-2)) combined with the basis-sum or state-average weight.
template <typename Fn>
double for_each_trace_state(const CouplingTable& couplings, const EstimatorInfo& estimator, Fn&& fn) {
    const int n = couplings.n_spins;
    const double trace_norm = 2.0 / (n * std::pow(2.0, n - 2));
    if (estimator.kind == EstimatorInfo::Kind::exact) {
        if (n > kExactEstimatorMaxSpins)
            throw std::invalid_argument("cluster_size_direct: N exceeds the exact cutoff");
        const std::uint64_t dim = std::uint64_t{1} << n;
        for (std::uint64_t s = 0; s < dim; ++s) fn(StateVector::basis_state(n, s));
        return trace_norm;
    }
    if (estimator.n_states < 1)
        throw std::invalid_argument("cluster_size_direct: n_states must be >= 1");
    for (int k = 0; k < estimator.n_states; ++k)
        fn(random_phase_state(n, detail::state_seed(estimator.seed, k)));
    // Tr X ~ 2^N <psi|X|psi> averaged over random-phase states.
    return trace_norm * std::pow(2.0, n) / estimator.n_states;
}

}  // namespace

ClusterSizes cluster_size_direct(const CouplingTable& couplings, const TrotterPlan& plan, double t,
                                 const EstimatorInfo& estimator) {
    const int n = couplings.n_spins;
    double acc_g = 0.0, acc_l = 0.0;
    const double weight = for_each_trace_state(couplings, estimator, [&](const StateVector& psi) {
        const auto a = commutator_vectors(plan, t, psi);
        StateVector total = StateVector::zero(n);
        for (int i = 0; i < n; ++i) {
            acc_l += norm_sq(a[i]);
            for (std::uint64_t s = 0; s < total.dim(); ++s) total.amp[s] += a[i].amp[s];
        }
        acc_g += norm_sq(total);
    });
    ClusterSizes k;
    k.k_g = weight * acc_g;
    k.k_l = weight * acc_l;
    k.k_ct = k.k_g - k.k_l;
    return k;
}

double cluster_ct_explicit(const CouplingTable& couplings, const TrotterPlan& plan, double t,
                           const EstimatorInfo& estimator) {
    const int n = couplings.n_spins;
    double acc = 0.0;
    const double weight = for_each_trace_state(couplings, estimator, [&](const StateVector& psi) {
        const auto a = commutator_vectors(plan, t, psi);
        for (int i = 0; i < n; ++i)
            for (int j = 0; j < n; ++j)
                if (j != i) acc += inner_product(a[i], a[j]).real();
    });
    return weight * acc;
}

DiagOffdiagSplit diagonal_offdiagonal_split(const CouplingTable& couplings, const TrotterPlan& plan,
                                            double t) {
    const int n = couplings.n_spins;
    if (n > kDiagSplitMaxSpins)
        throw std::invalid_argument("diagonal_offdiagonal_split: N exceeds the N <= 8 cutoff");
    const std::uint64_t dim = std::uint64_t{1} << n;
    const double weight = 2.0 / (n * std::pow(2.0, n - 2));
    DiagOffdiagSplit split;
    for (std::uint64_t s = 0; s < dim; ++s) {
        const StateVector psi = StateVector::basis_state(n, s);
        StateVector back = psi;
        evolve(back, plan, t, -1);
        std::vector<StateVector> a(n);
        // [I_k^z, I_i^z(t)] |s> = (sigma_k(x) - sigma_k(s)) componentwise on
        // L_i = U I_i^z U^dag |s>, since I_k^z is diagonal.
        for (int i = 0; i < n; ++i) {
            StateVector left = back;
            apply_site_sz(left, i);
            evolve(left, plan, t, +1);
            a[i] = std::move(left);
        }
        std::vector<StateVector> c(n);
        std::vector<StateVector> a_full(n);
        for (int i = 0; i < n; ++i) {
            for (int k = 0; k < n; ++k) {
                c[k] = a[i];
                const std::uint64_t mask = std::uint64_t{1} << k;
                const double sk = (s & mask) ? 0.5 : -0.5;
                for (std::uint64_t x = 0; x < dim; ++x)
                    c[k].amp[x] *= ((x & mask) ? 0.5 : -0.5) - sk;
                split.diagonal += norm_sq(c[k]);
            }
            for (int k = 0; k < n; ++k)
                for (int q = 0; q < n; ++q)
                    if (q != k) split.offdiagonal_local += inner_product(c[k], c[q]).real();
            a_full[i] = StateVector::zero(n);
            for (int k = 0; k < n; ++k)
                for (std::uint64_t x = 0; x < dim; ++x) a_full[i].amp[x] += c[k].amp[x];
        }
        for (int i = 0; i < n; ++i)
            for (int j = 0; j < n; ++j)
                if (j != i) split.cross += inner_product(a_full[i], a_full[j]).real();
    }
    split.diagonal *= weight;
    split.offdiagonal_local *= weight;
    split.cross *= weight;
    return split;
}

KSeries compute_k_series(const CouplingTable& couplings, const TrotterPlan& plan,
                         const std::vector<double>& times, const PhiGrid& grid,
                         const EstimatorInfo& estimator) {
    const int n = couplings.n_spins;
    const bool exact = estimator.kind == EstimatorInfo::Kind::exact;
    KSeries series;
    series.n_spins = n;
    series.times = times;
    series.k_g_site.assign(n, {});
    series.k_l_site.assign(n, {});
    series.k_ct_site.assign(n, {});
    std::optional<ExactEchoSweep> sweep;
    if (exact) sweep.emplace(couplings, plan);
    for (double t : times) {
        SpectrumSet set;
        if (exact) {
            const PairCoherenceTensor& tensor = sweep->advance_to(t);
            set = analyze_tensor(tensor, nullptr, grid, true);
            series.tensors.push_back(tensor);
        } else {
            StochasticEchoResult result =
                pair_tensor_stochastic(couplings, plan, t, estimator.n_states, estimator.seed);
            set = analyze_tensor(result.mean(), &result.states, grid, false);
            series.tensors.push_back(result.mean());
            series.state_tensors.push_back(std::move(result.states));
        }
        series.k_g.push_back(cluster_size_from_spectrum(set.global));
        series.k_l.push_back(cluster_size_from_spectrum(set.local));
        series.k_ct.push_back(cluster_size_from_spectrum(set.cross));
        if (!exact) {
            series.err_g.push_back(cluster_size_error(set.global));
            series.err_l.push_back(cluster_size_error(set.local));
            series.err_ct.push_back(cluster_size_error(set.cross));
        }
        for (int i = 0; i < n; ++i) {
            const double kl = cluster_size_from_spectrum(set.local_site[i]);
            const double kct = cluster_size_from_spectrum(set.cross_site[i]);
            series.k_l_site[i].push_back(kl);
            series.k_ct_site[i].push_back(kct);
            series.k_g_site[i].push_back(kl + kct);
        }
        series.spectra.push_back(std::move(set));
    }
    return series;
}

}  // namespace dqring
