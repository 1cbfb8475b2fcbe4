// Closed-form model of a Gaussian biphoton after two unbalanced interferometers.
//
// Each arm multiplies the amplitude by (1 + exp(i(omega*tau + phi)))/2. All rates
// are relative: they are integrals or samples of |amplitude|^2 with the source
// normalized to unit probability.

#pragma once

#include <array>
#include <complex>
#include <vector>

#include "franson/biphoton.hpp"

namespace franson {

enum class Side { Signal, Idler };

/// One unbalanced interferometer: long-short delay tau (ps) and phase phi (rad).
class InterferometerArm {
public:
    InterferometerArm() = default;
    /// Throws std::invalid_argument if tau is negative or not finite. The phase
    /// is wrapped into [0, 2pi).
    InterferometerArm(double tau, double phi);

    /// Arm whose fringe phase omega0*tau + phi equals effective_phase, i.e. the
    /// phase measured from the constructive fringe at the carrier frequency.
    static InterferometerArm calibrated(double tau, double effective_phase, double omega0);

    double tau() const { return tau_; }
    double phi() const { return phi_; }

    /// omega0 * tau + phi.
    double fringe_phase(double omega0) const { return omega0 * tau_ + phi_; }

private:
    double tau_ = 0.0;
    double phi_ = 0.0;
};

struct FransonSettings {
    InterferometerArm arm_s;
    InterferometerArm arm_i;

    static FransonSettings identity() { return {}; }
    /// Keeps one side's arm and replaces the other by the identity.
    FransonSettings only(Side side) const;
};

enum class PathTerm { ShortShort, LongShort, ShortLong, LongLong };

inline constexpr std::array<PathTerm, 4> kAllPathTerms = {PathTerm::ShortShort, PathTerm::LongShort,
                                                          PathTerm::ShortLong, PathTerm::LongLong};

std::complex<double> arm_transfer(double omega, const InterferometerArm& arm);

std::complex<double> jsa_after(const FransonSettings& settings, const GaussianBiphoton& state,
                               double omega_s, double omega_i);

double jsi_after(const FransonSettings& settings, const GaussianBiphoton& state, double omega_s,
                 double omega_i);

/// Unit-peak envelope of one path combination; the long arm on a side shifts
/// that time coordinate by +tau.
double path_term(PathTerm term, const FransonSettings& settings, const GaussianBiphoton& state,
                 double t_s, double t_i);

/// |f_franson(t_s, t_i)|^2 from the four path envelopes and their interference.
double jti_after(const FransonSettings& settings, const GaussianBiphoton& state, double t_s,
                 double t_i);

/// Integral of |jsa_after|^2 over the plane.
double coincidence_rate(const FransonSettings& settings, const GaussianBiphoton& state);

/// 1 + exp(-sigma^2 tau^2 / 2) cos(omega0 tau + phi).
double singles_rate(const InterferometerArm& arm, double sigma, double omega0);

/// Single-photon arrival-time density on one side with only that side's arm
/// applied; unit integral for the identity arm.
double temporal_marginal(const FransonSettings& settings, const GaussianBiphoton& state, Side side,
                         double t);

struct SelectedRates {
    double coincidence = 0.0;
    double singles_s = 0.0;
    double singles_i = 0.0;
};

/// Rates with detection restricted to t_s = -tau_s/2, t_i = -tau_i/2.
SelectedRates selected_rates(const FransonSettings& settings, const GaussianBiphoton& state);

/// Unselected: phase-sum fringe amplitude over the DC coincidence term (<= 1/2).
/// Selected: phase-sum fringe amplitude over the DC term of the selected rate.
double predicted_visibility(const FransonSettings& settings, const GaussianBiphoton& state,
                            bool selected);

/// (1/2) exp(-bw^2 tau^2 / 2) for equal delays and two-photon bandwidth bw.
double unselected_visibility(double two_photon_bandwidth, double tau);

/// The joint temporal intensity after the interferometer written as a sum of
/// Gaussians sharing one precision matrix:
///   jti(t) = sum_k weight_k * exp(-(t - c_k)^T P (t - c_k) / 2).
struct JtiDecomposition {
    struct Term {
        double weight = 0.0;
        std::array<double, 2> center{};
    };
    Covariance2 precision;
    std::vector<Term> terms;

    double evaluate(double t_s, double t_i) const;
};

JtiDecomposition jti_decomposition(const FransonSettings& settings, const GaussianBiphoton& state);

}  // namespace franson
