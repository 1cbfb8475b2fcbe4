// Parameter recovery from maps and count tables: Gaussian fits, response
// deconvolution, fringe visibility and the CHSH-Bell parameter.

#pragma once

#include <array>
#include <cstdint>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "franson/biphoton.hpp"
#include "franson/detector.hpp"
#include "franson/histogram.hpp"

namespace franson {

class FitError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Residual weights: uniform for model data, 1/max(count, 1) for counts.
enum class FitWeighting { Uniform, Poisson };

struct GaussianFit1D {
    double amplitude = 0.0;
    double center = 0.0;
    double sigma = 0.0;
    double offset = 0.0;
    double err_amplitude = 0.0;
    double err_center = 0.0;
    double err_sigma = 0.0;
    double err_offset = 0.0;
};

/// Least-squares fit of A exp(-(x-mu)^2 / 2s^2) + c, seeded from moments.
GaussianFit1D fit_gaussian_1d(std::span<const double> x, std::span<const double> y,
                              FitWeighting weighting = FitWeighting::Uniform);

struct GaussianFit2D {
    double center_x = 0.0;
    double center_y = 0.0;
    double sigma_x = 0.0;
    double sigma_y = 0.0;
    double rho = 0.0;
    double amplitude = 0.0;
    double offset = 0.0;
    double err_center_x = 0.0;
    double err_center_y = 0.0;
    double err_sigma_x = 0.0;
    double err_sigma_y = 0.0;
    double err_rho = 0.0;
    double err_amplitude = 0.0;
    double err_offset = 0.0;

    // Set by deconvolve_covariance when |rho| had to be clamped.
    bool clamped = false;
    double rho_unclamped = 0.0;

    Covariance2 covariance() const { return {sigma_x * sigma_x, rho * sigma_x * sigma_y, sigma_y * sigma_y}; }
};

/// Two stages: 1D fits of both marginals, then rho (with amplitude and offset)
/// on the full map with the marginal centers and widths held fixed.
GaussianFit2D fit_gaussian_2d(const Histogram2D& map, FitWeighting weighting = FitWeighting::Uniform);

struct DiagonalWidths {
    double plus = 0.0;   // s.d. of x + y
    double minus = 0.0;  // s.d. of x - y
    double err_plus = 0.0;
    double err_minus = 0.0;
};

/// Projects the map onto x + y and x - y and fits 1D Gaussians to both.
DiagonalWidths diagonal_widths(const Histogram2D& map, FitWeighting weighting = FitWeighting::Uniform);

struct HeraldedWidths {
    double x = 0.0;
    double y = 0.0;
    double err_x = 0.0;
    double err_y = 0.0;
};

/// Mean width of 1D fits to `slices` conditional slices spread over +-1 sigma
/// of the other axis' center.
HeraldedWidths heralded_widths(const Histogram2D& map, const GaussianFit2D& fit, std::size_t slices = 5,
                               FitWeighting weighting = FitWeighting::Uniform);

/// sqrt(meas^2 - resp^2). Throws std::invalid_argument if resp >= meas.
double deconvolve_width(double sigma_meas, double sigma_resp);

/// Removes the response variance from each axis and keeps the off-diagonal
/// covariance. |rho| >= 1 afterwards is clamped with a warning on stderr.
GaussianFit2D deconvolve_covariance(const GaussianFit2D& fit, double resp_x, double resp_y);

enum class Channel { Coincidence, SinglesSignal, SinglesIdler };

/// Counts pooled by phase sum (mod 2pi) into equal-width bins.
struct PhaseBin {
    double phase = 0.0;     // bin center, rad
    double counts = 0.0;    // total counts in the bin
    double dwell = 0.0;     // total dwell, s
    double rate = 0.0;      // counts / dwell
    double rate_err = 0.0;  // sqrt(counts) / dwell
};

std::vector<PhaseBin> bin_by_phase_sum(const std::vector<CountRecord>& records, std::size_t bins,
                                       Channel channel = Channel::Coincidence);

struct FringeFit {
    double c0 = 0.0;
    double visibility = 0.0;
    double phase0 = 0.0;
    double err_c0 = 0.0;
    double err_visibility = 0.0;
    double err_phase0 = 0.0;
    double visibility_unclamped = 0.0;
};

/// Weighted least squares of C0 (1 + V cos(phase - phase0)), weights 1/variance
/// with Poisson variance. Needs >= 5 bins covering a full period.
FringeFit fit_fringe(const std::vector<PhaseBin>& bins);

struct Correlator {
    double value = 0.0;
    double error = 0.0;
};

/// (R++ + R-- - R+- - R-+) / total with Poisson error 2 sqrt(P M / N^3).
Correlator chsh_correlation(double r_pp, double r_pm, double r_mp, double r_mm);

struct BellResult {
    // E(a,b), E(a,b'), E(a',b), E(a',b')
    std::array<Correlator, 4> correlators{};
    double s = 0.0;
    double sigma_s = 0.0;
};

/// S = |E(a,b) + E(a,b') + E(a',b) - E(a',b')|, errors added in quadrature.
BellResult chsh_parameter(const std::array<Correlator, 4>& correlators);

using CountTable = std::array<std::array<double, 4>, 4>;

/// Table laid out as BellTable: rows (b+, b-, b'+, b'-), columns (a+, a-, a'+, a'-).
BellResult evaluate_bell(const CountTable& table);
CountTable to_count_table(const std::array<std::array<std::uint64_t, 4>, 4>& counts);

/// The measured 200 s coincidence table used as the analysis reference.
CountTable measured_bell_counts();

/// Published headline value for the same table, S = 2.42 +- 0.02.
inline constexpr double kPublishedBellS = 2.42;
inline constexpr double kPublishedBellSigma = 0.02;

}  // namespace franson
