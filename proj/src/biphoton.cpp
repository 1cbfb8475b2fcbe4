#include "franson/biphoton.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

namespace franson {

Covariance2 Covariance2::inverse() const {
    const double d = det();
    if (!(d > 0.0)) throw std::invalid_argument("covariance is not positive definite");
    return {yy / d, -xy / d, xx / d};
}

double Covariance2::correlation() const { return xy / std::sqrt(xx * yy); }

GaussianBiphoton::GaussianBiphoton(double omega_s0, double omega_i0, double sigma_s, double sigma_i,
                                   double rho)
    : omega_s0_(omega_s0), omega_i0_(omega_i0), sigma_s_(sigma_s), sigma_i_(sigma_i), rho_(rho) {
    if (!std::isfinite(omega_s0) || !std::isfinite(omega_i0))
        throw std::invalid_argument("center frequencies must be finite");
    if (!(sigma_s > 0.0) || !(sigma_i > 0.0) || !std::isfinite(sigma_s) || !std::isfinite(sigma_i))
        throw std::invalid_argument("marginal bandwidths must be positive and finite");
    if (!(std::abs(rho) <= kMaxAbsRho))
        throw std::invalid_argument("|rho| must not exceed " + std::to_string(kMaxAbsRho));
}

GaussianBiphoton GaussianBiphoton::from_temporal(double omega_s0, double omega_i0, double dt_s,
                                                 double dt_i, double rho_t) {
    if (!(dt_s > 0.0) || !(dt_i > 0.0))
        throw std::invalid_argument("temporal widths must be positive");
    if (!(std::abs(rho_t) < 1.0)) throw std::invalid_argument("|rho_t| must be below 1");
    const double root = std::sqrt(1.0 - rho_t * rho_t);
    return {omega_s0, omega_i0, 1.0 / (2.0 * dt_s * root), 1.0 / (2.0 * dt_i * root), -rho_t};
}

Covariance2 GaussianBiphoton::spectral_covariance() const {
    return {sigma_s_ * sigma_s_, rho_ * sigma_s_ * sigma_i_, sigma_i_ * sigma_i_};
}

Covariance2 GaussianBiphoton::temporal_covariance() const {
    const Covariance2 inv = spectral_covariance().inverse();
    return {inv.xx / 4.0, inv.xy / 4.0, inv.yy / 4.0};
}

double GaussianBiphoton::temporal_peak_intensity() const {
    return 2.0 * sigma_s_ * sigma_i_ * std::sqrt(1.0 - rho_ * rho_) / kPi;
}

double jsa_value(const GaussianBiphoton& state, double omega_s, double omega_i) {
    const double rho = state.rho();
    const double one_minus = 1.0 - rho * rho;
    const double norm =
        1.0 / (std::sqrt(kTwoPi * state.sigma_s() * state.sigma_i()) * std::pow(one_minus, 0.25));
    const double x = (omega_s - state.omega_s0()) / state.sigma_s();
    const double y = (omega_i - state.omega_i0()) / state.sigma_i();
    const double bracket = 0.5 * x * x + 0.5 * y * y - rho * x * y;
    return norm * std::exp(-bracket / (2.0 * one_minus));
}

std::complex<double> jta_value(const GaussianBiphoton& state, double t_s, double t_i) {
    const double ss = state.sigma_s() * t_s;
    const double ii = state.sigma_i() * t_i;
    const double quad = ss * ss + ii * ii + 2.0 * state.rho() * ss * ii;
    const double amplitude = std::sqrt(state.temporal_peak_intensity()) * std::exp(-quad);
    return std::polar(amplitude, state.omega_s0() * t_s + state.omega_i0() * t_i);
}

WidthSummary width_summary(double sd_x, double sd_y, double correlation) {
    WidthSummary w;
    w.marginal_s = sd_x;
    w.marginal_i = sd_y;
    const double root = std::sqrt(1.0 - correlation * correlation);
    w.heralded_s = sd_x * root;
    w.heralded_i = sd_y * root;
    const double sum_sq = sd_x * sd_x + sd_y * sd_y;
    const double cross = 2.0 * correlation * sd_x * sd_y;
    w.diag_plus = std::sqrt(sum_sq + cross);
    w.diag_minus = std::sqrt(sum_sq - cross);
    w.correlation = correlation;
    return w;
}

WidthSummary spectral_widths(const GaussianBiphoton& state) {
    return width_summary(state.sigma_s(), state.sigma_i(), state.rho());
}

WidthSummary temporal_widths(const GaussianBiphoton& state) {
    const Covariance2 cov = state.temporal_covariance();
    return width_summary(std::sqrt(cov.xx), std::sqrt(cov.yy), cov.correlation());
}

double coherence_time(double bandwidth) {
    if (!(bandwidth > 0.0)) throw std::invalid_argument("bandwidth must be positive");
    return 1.0 / bandwidth;
}

CoherenceTimes coherence_times(const GaussianBiphoton& state) {
    const WidthSummary w = spectral_widths(state);
    return {coherence_time(w.marginal_s), coherence_time(w.marginal_i), coherence_time(w.diag_plus)};
}

double wavelength_to_angfreq(double lambda_nm) {
    if (!(lambda_nm > 0.0) || !std::isfinite(lambda_nm))
        throw std::invalid_argument("wavelength must be positive");
    return kTwoPi * kSpeedOfLight / lambda_nm;
}

double angfreq_to_wavelength(double omega) {
    if (!(omega > 0.0) || !std::isfinite(omega))
        throw std::invalid_argument("angular frequency must be positive");
    return kTwoPi * kSpeedOfLight / omega;
}

}  // namespace franson
