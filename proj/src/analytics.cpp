#include "dqring/analytics.hpp"

#include <cmath>
#include <stdexcept>

namespace dqring {

ShortTimeCoefficients short_time_prediction(const CouplingTable& couplings) {
    const double s = coupling_second_moment(couplings);
    ShortTimeCoefficients c;
    c.c_g = 8.0 * s / couplings.n_spins;
    c.c_l = 4.0 * s / couplings.n_spins;
    return c;
}

SaturationStats saturation_stats(const std::vector<double>& times,
                                 const std::vector<std::vector<double>>& site_series, double t_s,
                                 double t_max) {
    if (!(t_s < t_max)) throw std::invalid_argument("saturation_stats: need t_s < t_max");
    if (times.empty() || times.front() > t_s || times.back() < t_max)
        throw std::invalid_argument("saturation_stats: time grid does not cover the window");
    std::vector<std::size_t> idx;
    for (std::size_t k = 0; k < times.size(); ++k)
        if (times[k] >= t_s && times[k] <= t_max) idx.push_back(k);
    if (idx.size() < 2) throw std::invalid_argument("saturation_stats: fewer than 2 samples in window");

    // Normalized trapezoid weights on the window sub-grid.
    const std::size_t n_t = idx.size();
    std::vector<double> w(n_t, 0.0);
    for (std::size_t k = 0; k + 1 < n_t; ++k) {
        const double h = 0.5 * (times[idx[k + 1]] - times[idx[k]]);
        w[k] += h;
        w[k + 1] += h;
    }
    double w_sum = 0.0;
    for (double v : w) w_sum += v;
    for (double& v : w) v /= w_sum;

    const std::size_t n_sites = site_series.size();
    SaturationStats stats;
    stats.t_s = t_s;
    stats.t_max = t_max;
    stats.site_mean.resize(n_sites);
    stats.site_sd.resize(n_sites);

    auto weighted_mean = [&](const std::vector<double>& series) {
        double acc = 0.0;
        for (std::size_t k = 0; k < n_t; ++k) acc += w[k] * series[idx[k]];
        return acc;
    };
    auto weighted_cov = [&](const std::vector<double>& a, double mu_a, const std::vector<double>& b,
                            double mu_b) {
        double acc = 0.0;
        for (std::size_t k = 0; k < n_t; ++k)
            acc += w[k] * (a[idx[k]] - mu_a) * (b[idx[k]] - mu_b);
        return acc;
    };

    std::vector<double> avg(times.size(), 0.0);
    for (const auto& series : site_series) {
        if (series.size() != times.size())
            throw std::invalid_argument("saturation_stats: series length mismatch");
        for (std::size_t k = 0; k < times.size(); ++k) avg[k] += series[k] / n_sites;
    }
    stats.mean = weighted_mean(avg);
    stats.sd = std::sqrt(std::max(weighted_cov(avg, stats.mean, avg, stats.mean), 0.0));

    for (std::size_t i = 0; i < n_sites; ++i) {
        stats.site_mean[i] = weighted_mean(site_series[i]);
        const double var = weighted_cov(site_series[i], stats.site_mean[i], site_series[i], stats.site_mean[i]);
        stats.site_sd[i] = std::sqrt(std::max(var, 0.0));
        stats.site_variance_avg += var / n_sites;
    }
    for (std::size_t i = 0; i < n_sites; ++i)
        for (std::size_t j = 0; j < n_sites; ++j)
            if (j != i)
                stats.total_covariance += weighted_cov(site_series[i], stats.site_mean[i],
                                                       site_series[j], stats.site_mean[j]) /
                                          (static_cast<double>(n_sites) * n_sites);
    return stats;
}

SaturationStats saturation_stats_ct(const KSeries& series, double t_s, double t_max) {
    return saturation_stats(series.times, series.k_ct_site, t_s, t_max);
}

double default_saturation_time(double alpha) {
    if (alpha <= 0.0) throw std::invalid_argument("default_saturation_time: alpha must be > 0");
    // Tabulated onsets: (alpha, t_s) = (1, 10), (2, 20), (3, 50); piecewise
    // log-linear in between, nearest-segment slope outside.
    const double a[3] = {1.0, 2.0, 3.0};
    const double lt[3] = {std::log(10.0), std::log(20.0), std::log(50.0)};
    int seg = alpha < a[1] ? 0 : 1;
    const double slope = (lt[seg + 1] - lt[seg]) / (a[seg + 1] - a[seg]);
    return std::exp(lt[seg] + slope * (alpha - a[seg]));
}

ScalingFit scaling_fit(const std::vector<double>& n_values, const std::vector<double>& y_values,
                       ScalingModel model) {
    const std::size_t n = n_values.size();
    if (n < 3 || y_values.size() != n)
        throw std::invalid_argument("scaling_fit: need at least 3 (N, y) points");
    std::vector<double> x(n), y(n);
    for (std::size_t k = 0; k < n; ++k) {
        if (!(y_values[k] > 0.0)) throw std::invalid_argument("scaling_fit: y values must be positive");
        x[k] = model == ScalingModel::power ? std::log(n_values[k]) : n_values[k];
        y[k] = std::log(y_values[k]);
    }
    double mx = 0.0, my = 0.0;
    for (std::size_t k = 0; k < n; ++k) {
        mx += x[k] / n;
        my += y[k] / n;
    }
    double sxx = 0.0, sxy = 0.0;
    for (std::size_t k = 0; k < n; ++k) {
        sxx += (x[k] - mx) * (x[k] - mx);
        sxy += (x[k] - mx) * (y[k] - my);
    }
    if (sxx == 0.0) throw std::invalid_argument("scaling_fit: degenerate N values");
    ScalingFit fit;
    fit.model = model;
    fit.exponent = sxy / sxx;
    fit.intercept = my - fit.exponent * mx;
    double ss_res = 0.0;
    fit.residuals.resize(n);
    for (std::size_t k = 0; k < n; ++k) {
        fit.residuals[k] = y[k] - (fit.intercept + fit.exponent * x[k]);
        ss_res += fit.residuals[k] * fit.residuals[k];
    }
    fit.residual_rms = std::sqrt(ss_res / n);
    if (n > 2) fit.exponent_stderr = std::sqrt(ss_res / (n - 2) / sxx);
    return fit;
}

std::string to_string(ScalingModel model) {
    return model == ScalingModel::power ? "power" : "exponential";
}

}  // namespace dqring
