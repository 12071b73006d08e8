#pragma once

#include <cstddef>
#include <optional>

#include <Eigen/Dense>

#include "lmsvar/bounds.hpp"
#include "lmsvar/filters.hpp"
#include "lmsvar/signals.hpp"

namespace lmsvar {

/// Steady-state weight-error covariance K = E{v v^T}. Remembers whether it is
/// a scaled identity so trace products can skip the dense path.
class CovMatrix {
public:
    explicit CovMatrix(Eigen::MatrixXd entries);
    static CovMatrix scaled_identity(double scale, std::size_t n);

    const Eigen::MatrixXd& matrix() const { return entries_; }
    std::size_t size() const { return static_cast<std::size_t>(entries_.rows()); }
    std::optional<double> identity_scale() const { return identity_scale_; }

private:
    Eigen::MatrixXd entries_;
    std::optional<double> identity_scale_;
};

double trace_kr(const CovMatrix& k, const AutocorrMatrix& r);
double trace_rkrk(const CovMatrix& k, const AutocorrMatrix& r);

/// K[inf] ~= (mu * j_min / 2) I, valid for small steps.
CovMatrix weight_error_cov_lms(double mu, double j_min, std::size_t n_taps);

/// J[inf] = j_min * (1 + mu/2 * tr(R)).
double steady_state_mse(double mu, double j_min, const AutocorrMatrix& r);

/// E{e^4[inf]} under Gaussian regressor and Gaussian weight-error assumptions.
double fourth_moment(double kurtosis, double j_min, const CovMatrix& k, const AutocorrMatrix& r);

/// Var{e^2[inf]} for arbitrary noise kurtosis and weight-error covariance.
double var_e2_general(double kurtosis, double j_min, const CovMatrix& k, const AutocorrMatrix& r);

/// Gaussian-noise specialisation: 2 J[inf]^2 + 6 tr(RKRK).
double var_e2_gaussian(double j_inf, const CovMatrix& k, const AutocorrMatrix& r);

/// Closed form for LMS:
/// j_min^2 [(psi-1) + 2 mu tr(R) + mu^2/2 (tr(R)^2 + 3 tr(R^2))].
double var_e2_lms(double kurtosis, double j_min, double mu, const AutocorrMatrix& r);

/// Above this value of mu * tr(R) the small-step covariance model is flagged.
inline constexpr double kSmallStepLimit = 0.2;

struct Prediction {
    double j_min = 0.0;
    double j_inf = 0.0;
    double e4_inf = 0.0;
    double var_e2_inf = 0.0;
    double effective_mu = 0.0;
    double kurtosis = 0.0;
    /// mu * tr(R); above kSmallStepLimit the K[inf] approximation is stressed.
    double step_load = 0.0;
    bool small_step_warning = false;

    std::optional<ConfidenceInterval> gaussian_bounds;
    double three_sigma_upper = 0.0;
};

/// Closed-form steady-state prediction for an LMS or NLMS filter. NLMS is
/// mapped onto LMS with step beta / (N * input_variance). Gaussian chi-square
/// bounds are filled when `confidence` is given.
Prediction predict(const FilterSpec& filter, const PlantSpec& plant, const SignalSpec& signal,
                   std::optional<double> confidence = std::nullopt);

} // namespace lmsvar
