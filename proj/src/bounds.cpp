#include "lmsvar/bounds.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>
#include <string>

namespace lmsvar {

namespace {

void require_open_unit(double p, const char* what) {
    if (!(p > 0.0 && p < 1.0)) {
        throw std::domain_error(std::string(what) + " must lie in (0, 1)");
    }
}

} // namespace

double normal_quantile_approx(double p) {
    require_open_unit(p, "probability");

    static constexpr double a[] = {-3.969683028665376e+01, 2.209460984245205e+02, -2.759285104469687e+02,
                                   1.383577518672690e+02,  -3.066479806614716e+01, 2.506628277459239e+00};
    static constexpr double b[] = {-5.447609879822406e+01, 1.615858368580409e+02, -1.556989798598866e+02,
                                   6.680131188771972e+01, -1.328068155288572e+01};
    static constexpr double c[] = {-7.784894002430293e-03, -3.223964580411365e-01, -2.400758277161838e+00,
                                   -2.549732539343734e+00, 4.374664141464968e+00,  2.938163982698783e+00};
    static constexpr double d[] = {7.784695709041462e-03, 3.224671290700398e-01, 2.445134137142996e+00,
                                   3.754408661907416e+00};
    constexpr double p_low = 0.02425;

    auto tail = [&](double q) {
        return (((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) /
               ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1.0);
    };

    if (p < p_low) {
        return tail(std::sqrt(-2.0 * std::log(p)));
    }
    if (p > 1.0 - p_low) {
        return -tail(std::sqrt(-2.0 * std::log1p(-p)));
    }
    const double q = p - 0.5;
    const double r = q * q;
    return (((((a[0] * r + a[1]) * r + a[2]) * r + a[3]) * r + a[4]) * r + a[5]) * q /
           (((((b[0] * r + b[1]) * r + b[2]) * r + b[3]) * r + b[4]) * r + 1.0);
}

double chi2_1_cdf(double x) {
    if (!(x > 0.0)) {
        return 0.0;
    }
    return std::erf(std::sqrt(x / 2.0));
}

double chi2_1_quantile(double p) {
    require_open_unit(p, "chi-square probability");

    // Solve erf(t) = p for t = sqrt(x/2), starting from the normal quantile at
    // (1+p)/2. The upper branch works on the complement to keep precision.
    const bool upper = p > 0.5;
    const double z0 = upper ? -normal_quantile_approx((1.0 - p) / 2.0) : normal_quantile_approx((1.0 + p) / 2.0);
    double t = z0 / std::numbers::sqrt2;
    const double complement = 1.0 - p;
    const double slope = 2.0 / std::sqrt(std::numbers::pi);

    for (int iter = 0; iter < 8; ++iter) {
        const double residual = upper ? complement - std::erfc(t) : std::erf(t) - p;
        const double step = residual / (slope * std::exp(-t * t));
        t -= step;
        if (std::abs(step) <= 1e-17 * std::abs(t)) {
            break;
        }
    }
    return 2.0 * t * t;
}

ConfidenceInterval equal_tail_interval(double confidence) {
    require_open_unit(confidence, "confidence");
    return {confidence, chi2_1_quantile((1.0 - confidence) / 2.0), chi2_1_quantile((1.0 + confidence) / 2.0)};
}

ConfidenceInterval gaussian_se_bounds(double j_inf, double confidence) {
    if (!(j_inf > 0.0)) {
        throw std::invalid_argument("steady-state MSE must be positive");
    }
    auto interval = equal_tail_interval(confidence);
    interval.lower *= j_inf;
    interval.upper *= j_inf;
    return interval;
}

double three_sigma_upper(double j_inf, double var_e2) {
    if (!(var_e2 >= 0.0)) {
        throw std::invalid_argument("squared-error variance must be nonnegative");
    }
    if (!(j_inf > 0.0)) {
        throw std::invalid_argument("steady-state MSE must be positive");
    }
    return j_inf + 3.0 * std::sqrt(var_e2);
}

double to_db(double power) { return 10.0 * std::log10(power); }

} // namespace lmsvar
