#pragma once

#include <string>
#include <vector>

#include "dqring/spectrum.hpp"

namespace dqring {

/// Leading short-time coefficients: K_G ~ c_g t^2 and K_L ~ c_l t^2 (hbar = 1).
/// With the bond sum written once per pair (i<j, couplings table convention),
/// the BCH expansion gives c_g = 8 S / N and c_l = 4 S / N, S the ordered-pair
/// sum of D_ij^2. Equivalently 32/N and 16/N times the squared half-couplings
/// of the symmetrized double sum.
struct ShortTimeCoefficients {
    double c_g = 0.0;
    double c_l = 0.0;
};

ShortTimeCoefficients short_time_prediction(const CouplingTable& couplings);

/// Time averages and fluctuations of a per-site series bundle over a
/// saturation window, trapezoid-weighted on the sampled grid.
struct SaturationStats {
    double t_s = 0.0;
    double t_max = 0.0;
    double mean = 0.0;     // <K> of the site-averaged series
    double sd = 0.0;       // SD(K) of the site-averaged series
    std::vector<double> site_mean;  // <K^i>
    std::vector<double> site_sd;    // SD(K^i)
    double site_variance_avg = 0.0;  // (1/N) sum_i SD^2(K^i)
    double total_covariance = 0.0;   // (1/N^2) sum_{i != j} Cov(K^i, K^j)
};

/// All moments are taken against the same trapezoid weights, so the
/// decomposition SD^2 = site_variance_avg / N + total_covariance is an
/// algebraic identity of the sampled data, not an approximation.
SaturationStats saturation_stats(const std::vector<double>& times,
                                 const std::vector<std::vector<double>>& site_series, double t_s,
                                 double t_max);

/// Convenience overload for the site-resolved cross-term block of a KSeries.
SaturationStats saturation_stats_ct(const KSeries& series, double t_s, double t_max);

/// Saturation onset by coupling range: 50, 20, 10 for alpha = 3, 2, 1;
/// log-linear in alpha elsewhere. A convention default, overridable upstream.
double default_saturation_time(double alpha);

enum class ScalingModel { power, exponential };

/// Least-squares fit of (N, y) points: power fits log y on log N, exponential
/// fits log y on N.
struct ScalingFit {
    ScalingModel model = ScalingModel::power;
    double exponent = 0.0;   // power: y ~ N^exponent; exponential: y ~ e^{-rate N}, exponent = -rate
    double intercept = 0.0;  // log-space intercept
    double exponent_stderr = 0.0;
    double residual_rms = 0.0;  // in log space
    std::vector<double> residuals;
};

ScalingFit scaling_fit(const std::vector<double>& n_values, const std::vector<double>& y_values,
                       ScalingModel model);

std::string to_string(ScalingModel model);

}  // namespace dqring
