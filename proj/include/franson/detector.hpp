// Simulated measurements: Gaussian instrument response, absolute rate
// calibration, flat background, Poisson sampling and the scan drivers that
// produce joint-intensity maps, phase fringes and Bell count tables.

#pragma once

#include <array>
#include <cstdint>
#include <iosfwd>
#include <optional>
#include <vector>

#include "franson/biphoton.hpp"
#include "franson/franson.hpp"
#include "franson/histogram.hpp"

namespace franson {

/// Gaussian instrument response s.d. per axis; zero means an ideal detector.
struct ResponseModel {
    double gate_sigma_s = 0.0;  // ps
    double gate_sigma_i = 0.0;  // ps
    double spec_sigma_s = 0.0;  // rad/ps
    double spec_sigma_i = 0.0;  // rad/ps

    void validate() const;
};

/// What pair_rate_peak refers to.
enum class RateReference {
    SourcePeak,  // peak of the gated joint temporal intensity without interferometer
    FringePeak,  // constructive fringe at the selected gate position
};

struct CountModel {
    double pair_rate_peak = 0.0;                 // Hz, background excluded
    double background_rate = 0.0;                // Hz, flat coincidence background
    std::array<double, 2> singles_rates{};       // Hz at the source peak, (signal, idler)
    std::array<double, 2> singles_background{};  // Hz, (signal, idler)
    double dwell = 1.0;                          // s per setting
    std::uint64_t seed = 0;
    RateReference reference = RateReference::SourcePeak;

    void validate() const;
};

/// One measurement setting. Expected values are mean counts over the dwell,
/// background included.
struct CountRecord {
    double phi_s = 0.0;
    double phi_i = 0.0;
    double gate_s = 0.0;
    double gate_i = 0.0;
    double expected_cc = 0.0;
    std::uint64_t counts_cc = 0;
    double expected_ss = 0.0;
    std::uint64_t counts_ss = 0;
    double expected_si = 0.0;
    std::uint64_t counts_si = 0;
    double dwell = 0.0;
};

/// Separable Gaussian blur. Each source cell's mass is spread over the in-grid
/// cells, so the total is preserved. Throws std::invalid_argument when a
/// positive sigma is not resolved by the grid (step >= sigma/2).
Histogram2D convolve_map(const Histogram2D& map, double sigma_x, double sigma_y);

enum class MapKind { Jsi, Jti };

struct ScanGrid {
    Axis x;
    Axis y;

    /// Square grid of n points per axis spanning +-span marginal widths around
    /// the center of the map (the carrier frequencies for a spectral map; the
    /// midpoint between short and long arrivals for a temporal map, extended by
    /// half the delay).
    static ScanGrid around(MapKind kind, const GaussianBiphoton& state, const FransonSettings& settings,
                           std::size_t n = 256, double span = 6.0);
};

/// Model intensity on the grid, blurred by the matching response. With a peak
/// rate, values are scaled so that the map without interferometer peaks at it.
Histogram2D expected_scan(MapKind kind, const GaussianBiphoton& state, const FransonSettings& settings,
                          const ResponseModel& response, const ScanGrid& grid,
                          std::optional<double> peak_rate = std::nullopt);

/// V / (1 + B / C0) for a fringe of mean signal rate C0 on a flat background B.
double background_visibility(double v_ideal, double mean_rate_c0, double background_b);

/// Fringe peak over background, C0 (1 + V) / B.
double peak_snr(double v_ideal, double mean_rate_c0, double background_b);

/// Poisson draw with mean expected_rate * dwell from a generator seeded by
/// (seed, stream) alone.
std::uint64_t sample_counts(double expected_rate, double dwell, std::uint64_t seed, std::uint64_t stream);

/// Coincidence intensity averaged over a Gaussian gate centered at gate_center
/// with the response's temporal widths. Equals jti_after at the gate center
/// for an ideal response.
double gated_coincidence(const FransonSettings& settings, const GaussianBiphoton& state,
                         std::array<double, 2> gate_center, const ResponseModel& response);

/// Single-photon arrival density on one side, with only that side's arm,
/// averaged over that side's gate.
double gated_singles(const FransonSettings& settings, const GaussianBiphoton& state, Side side,
                     double gate_delay, const ResponseModel& response);

/// Interferometer delays shared by every setting of a scan.
struct FransonDelays {
    double tau_s = 0.0;
    double tau_i = 0.0;

    /// Arms for phases measured from the constructive fringe.
    FransonSettings settings(const GaussianBiphoton& state, double phase_s, double phase_i) const;
    /// Gate halfway between short and long arrivals.
    std::array<double, 2> selected_gate() const { return {-0.5 * tau_s, -0.5 * tau_i}; }
};

/// Absolute expected rates (Hz, background included) at one setting.
struct ExpectedRates {
    double coincidence = 0.0;
    double singles_s = 0.0;
    double singles_i = 0.0;
};

class RateCalculator {
public:
    RateCalculator(const GaussianBiphoton& state, FransonDelays delays, const CountModel& counts,
                   const ResponseModel& response, std::optional<std::array<double, 2>> gates = std::nullopt);

    ExpectedRates at(double phase_s, double phase_i) const;
    std::array<double, 2> gates() const { return gates_; }

private:
    GaussianBiphoton state_;
    FransonDelays delays_;
    CountModel counts_;
    ResponseModel response_;
    std::array<double, 2> gates_;
    double scale_cc_ = 0.0;
    double scale_s_ = 0.0;
    double scale_i_ = 0.0;
};

/// Phase scan over the (phase_s, phase_i) grid, phases referenced to the
/// constructive fringe. Records are ordered with phase_s varying fastest.
std::vector<CountRecord> phase_fringe_scan(const GaussianBiphoton& state, FransonDelays delays,
                                           const std::vector<double>& phases_s,
                                           const std::vector<double>& phases_i, const CountModel& counts,
                                           const ResponseModel& response,
                                           std::optional<std::array<double, 2>> gates = std::nullopt);

/// Measurement choices a, a' (signal) and b, b' (idler). Outcome +1 uses the
/// phase itself, outcome -1 adds pi.
struct BellSettings {
    double a = 7.0 * kPi / 4.0;
    double a_prime = kPi / 4.0;
    double b = 0.0;
    double b_prime = kPi / 2.0;
};

/// Sixteen settings laid out as rows (b+, b-, b'+, b'-) by columns
/// (a+, a-, a'+, a'-).
struct BellTable {
    std::array<std::array<CountRecord, 4>, 4> cells{};

    std::array<std::array<std::uint64_t, 4>, 4> counts() const;
    std::array<std::array<double, 4>, 4> expected() const;
    std::vector<CountRecord> records() const;
};

std::array<double, 4> bell_signal_phases(const BellSettings& s);
std::array<double, 4> bell_idler_phases(const BellSettings& s);

BellTable bell_experiment(const GaussianBiphoton& state, FransonDelays delays, const BellSettings& settings,
                          const CountModel& counts, const ResponseModel& response);

inline constexpr const char* kCountRecordHeader =
    "phi_s,phi_i,gate_s,gate_i,expected_cc,counts_cc,expected_ss,counts_ss,expected_si,counts_si,dwell_s";

void write_count_records_csv(std::ostream& out, const std::vector<CountRecord>& records);
std::vector<CountRecord> read_count_records_csv(std::istream& in);

}  // namespace franson
