#pragma once

namespace lmsvar {

struct ConfidenceInterval {
    double confidence = 0.0;
    double lower = 0.0;
    double upper = 0.0;

    bool contains(double value) const { return lower <= value && value <= upper; }
};

/// CDF of the chi-square distribution with one degree of freedom, erf(sqrt(x/2)).
double chi2_1_cdf(double x);

/// Inverse of chi2_1_cdf for p in (0, 1), relative accuracy better than 1e-9.
double chi2_1_quantile(double p);

/// Standard normal quantile (Acklam's rational approximation, ~1e-9 relative).
double normal_quantile_approx(double p);

/// Interval with probability (1 - confidence) / 2 in each tail.
ConfidenceInterval equal_tail_interval(double confidence);

/// Interval for e^2 when e is zero-mean Gaussian with variance j_inf.
ConfidenceInterval gaussian_se_bounds(double j_inf, double confidence);

/// j_inf + 3 * sqrt(var_e2).
double three_sigma_upper(double j_inf, double var_e2);

/// 10 * log10 of a power quantity.
double to_db(double power);

} // namespace lmsvar
