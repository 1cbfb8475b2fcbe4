// Gaussian energy-time entangled two-photon state and its analytic properties.
//
// Units throughout: time in ps, angular frequency in rad/ps, wavelength in nm.
// Every width is a standard deviation.

#pragma once

#include <array>
#include <complex>

namespace franson {

inline constexpr double kPi = 3.14159265358979323846;
inline constexpr double kTwoPi = 2.0 * kPi;

/// Speed of light in nm/ps.
inline constexpr double kSpeedOfLight = 299792.458;

/// Largest |rho| accepted at construction; the normalization (1-rho^2)^(1/4)
/// is singular at |rho| = 1.
inline constexpr double kMaxAbsRho = 0.999999;

/// Symmetric 2x2 covariance in (signal, idler) order.
struct Covariance2 {
    double xx = 0.0;
    double xy = 0.0;
    double yy = 0.0;

    double det() const { return xx * yy - xy * xy; }
    Covariance2 inverse() const;
    double correlation() const;
};

/// Pure two-mode state with a real, non-negative Gaussian joint spectral
/// amplitude. Immutable once constructed.
class GaussianBiphoton {
public:
    /// Throws std::invalid_argument unless sigma_s, sigma_i > 0 and
    /// |rho| <= kMaxAbsRho.
    GaussianBiphoton(double omega_s0, double omega_i0, double sigma_s, double sigma_i, double rho);

    /// Builds the transform-limited state whose joint temporal intensity has
    /// marginal widths dt_s, dt_i (ps) and temporal correlation rho_t.
    static GaussianBiphoton from_temporal(double omega_s0, double omega_i0, double dt_s, double dt_i,
                                          double rho_t);

    double omega_s0() const { return omega_s0_; }
    double omega_i0() const { return omega_i0_; }
    double sigma_s() const { return sigma_s_; }
    double sigma_i() const { return sigma_i_; }
    double rho() const { return rho_; }

    /// Covariance of the joint spectral intensity.
    Covariance2 spectral_covariance() const;

    /// Covariance of the joint temporal intensity, the inverse spectral
    /// covariance divided by four.
    Covariance2 temporal_covariance() const;

    /// Peak value of |jta_value|^2.
    double temporal_peak_intensity() const;

private:
    double omega_s0_;
    double omega_i0_;
    double sigma_s_;
    double sigma_i_;
    double rho_;
};

struct WidthSummary {
    double marginal_s = 0.0;
    double marginal_i = 0.0;
    double heralded_s = 0.0;
    double heralded_i = 0.0;
    double diag_plus = 0.0;   // s.d. of x_s + x_i
    double diag_minus = 0.0;  // s.d. of x_s - x_i
    double correlation = 0.0;
};

struct CoherenceTimes {
    double tau1_s = 0.0;
    double tau1_i = 0.0;
    double tau2 = 0.0;
};

/// F(omega_s, omega_i), normalized so that the intensity integrates to one.
double jsa_value(const GaussianBiphoton& state, double omega_s, double omega_i);

/// f(t_s, t_i) = (1/2pi) * integral F(w_s, w_i) exp(i(w_s t_s + w_i t_i)).
std::complex<double> jta_value(const GaussianBiphoton& state, double t_s, double t_i);

/// Widths summary of a bivariate normal with the given marginals and correlation.
WidthSummary width_summary(double sd_x, double sd_y, double correlation);

WidthSummary spectral_widths(const GaussianBiphoton& state);
WidthSummary temporal_widths(const GaussianBiphoton& state);

CoherenceTimes coherence_times(const GaussianBiphoton& state);

/// Coherence time for a bandwidth: 1 / bandwidth.
double coherence_time(double bandwidth);

/// omega = 2 pi c / lambda. Throws std::invalid_argument for lambda <= 0.
double wavelength_to_angfreq(double lambda_nm);
double angfreq_to_wavelength(double omega);

}  // namespace franson
