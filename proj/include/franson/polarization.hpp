// Jones-calculus model of the birefringent unbalanced interferometer:
// alpha-BBO time-bin split, quarter-wave plate, half-wave plate, then a
// polarizer that keeps H.
//
// Basis conventions: |H> = (1, 0), |V> = (0, 1), |D> = (H + V)/sqrt2,
// |A> = (H - V)/sqrt2, |L> = (H - iV)/sqrt2, |R> = (H + iV)/sqrt2.

#pragma once

#include <array>
#include <complex>

#include "franson/biphoton.hpp"
#include "franson/franson.hpp"

namespace franson::polarization {

using Complex = std::complex<double>;

struct JonesVector {
    Complex h{};
    Complex v{};

    double norm2() const { return std::norm(h) + std::norm(v); }
};

/// Row-major 2x2 complex matrix acting on (h, v).
struct JonesMatrix {
    std::array<Complex, 4> m{};

    Complex operator()(int row, int col) const { return m[static_cast<std::size_t>(2 * row + col)]; }
    JonesMatrix adjoint() const;
};

JonesVector operator*(const JonesMatrix& a, const JonesVector& x);
JonesMatrix operator*(const JonesMatrix& a, const JonesMatrix& b);
Complex inner(const JonesVector& a, const JonesVector& b);  // <a|b>

JonesVector horizontal();
JonesVector vertical();
JonesVector diagonal();
JonesVector antidiagonal();
JonesVector left_circular();
JonesVector right_circular();

/// i [[cos 2t, sin 2t], [sin 2t, -cos 2t]].
JonesMatrix hwp_unitary(double theta);

/// Quarter-wave plate with its fast axis horizontal, diag(1, -i). Maps D to L
/// and A to R with no relative phase.
JonesMatrix qwp_unitary();

/// Projector onto H.
JonesMatrix horizontal_polarizer();

/// Deviation of a matrix from unitarity, max |(U^dagger U - I)_jk|.
double unitarity_error(const JonesMatrix& u);

enum class TimeBin { Early = 0, Late = 1 };

/// Photon amplitudes over polarization and time bin.
struct TimeBinPolState {
    std::array<JonesVector, 2> bins{};  // indexed by TimeBin
    double bin_delay = 0.0;

    const JonesVector& early() const { return bins[0]; }
    const JonesVector& late() const { return bins[1]; }
    double norm2() const { return bins[0].norm2() + bins[1].norm2(); }

    TimeBinPolState apply(const JonesMatrix& element) const;
};

/// Crystal at 45 degrees: the D component stays in the early bin and the A
/// component is delayed into the late bin. The late bin carries the crystal's
/// fixed retardation phase, chosen so that |V> maps to (|D>|e> + |A>|l>)/sqrt2.
TimeBinPolState birefringent_split(const JonesVector& input, double bin_delay);

/// |V> through the full arm for a half-wave plate angle theta. Throws
/// std::invalid_argument for bin_delay <= 0.
TimeBinPolState simulate_arm(double theta_hwp, double bin_delay);

/// Spectral transfer of an H-projected time-bin state, a_e + a_l exp(i w tau).
Complex spectral_transfer(const TimeBinPolState& state, double omega);

/// Phase of the late bin relative to the early bin after the H projection.
double bin_relative_phase(const TimeBinPolState& state);

/// Max absolute deviation between the single-arm output spectra obtained from
/// simulate_arm(theta) and from arm_transfer with phi = 4 theta, both
/// normalized by the source marginal peak, over +-6 sigma of that side's
/// marginal.
double arm_equivalence_check(double theta, double bin_delay, const GaussianBiphoton& state, Side side);

}  // namespace franson::polarization
