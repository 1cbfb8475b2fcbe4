#include "franson/polarization.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace franson::polarization {

namespace {
constexpr double kInvSqrt2 = 0.70710678118654752440;
constexpr Complex kI{0.0, 1.0};
}  // namespace

JonesMatrix JonesMatrix::adjoint() const {
    return {{std::conj(m[0]), std::conj(m[2]), std::conj(m[1]), std::conj(m[3])}};
}

JonesVector operator*(const JonesMatrix& a, const JonesVector& x) {
    return {a(0, 0) * x.h + a(0, 1) * x.v, a(1, 0) * x.h + a(1, 1) * x.v};
}

JonesMatrix operator*(const JonesMatrix& a, const JonesMatrix& b) {
    JonesMatrix out;
    for (int r = 0; r < 2; ++r)
        for (int c = 0; c < 2; ++c)
            out.m[static_cast<std::size_t>(2 * r + c)] = a(r, 0) * b(0, c) + a(r, 1) * b(1, c);
    return out;
}

Complex inner(const JonesVector& a, const JonesVector& b) {
    return std::conj(a.h) * b.h + std::conj(a.v) * b.v;
}

JonesVector horizontal() { return {1.0, 0.0}; }
JonesVector vertical() { return {0.0, 1.0}; }
JonesVector diagonal() { return {kInvSqrt2, kInvSqrt2}; }
JonesVector antidiagonal() { return {kInvSqrt2, -kInvSqrt2}; }
JonesVector left_circular() { return {kInvSqrt2, -kI * kInvSqrt2}; }
JonesVector right_circular() { return {kInvSqrt2, kI * kInvSqrt2}; }

JonesMatrix hwp_unitary(double theta) {
    const double c = std::cos(2.0 * theta);
    const double s = std::sin(2.0 * theta);
    return {{kI * c, kI * s, kI * s, -kI * c}};
}

JonesMatrix qwp_unitary() { return {{1.0, 0.0, 0.0, -kI}}; }

JonesMatrix horizontal_polarizer() { return {{1.0, 0.0, 0.0, 0.0}}; }

double unitarity_error(const JonesMatrix& u) {
    const JonesMatrix p = u.adjoint() * u;
    double worst = 0.0;
    for (int r = 0; r < 2; ++r)
        for (int c = 0; c < 2; ++c)
            worst = std::max(worst, std::abs(p(r, c) - (r == c ? 1.0 : 0.0)));
    return worst;
}

TimeBinPolState TimeBinPolState::apply(const JonesMatrix& element) const {
    TimeBinPolState out = *this;
    for (JonesVector& bin : out.bins) bin = element * bin;
    return out;
}

TimeBinPolState birefringent_split(const JonesVector& input, double bin_delay) {
    if (!(bin_delay > 0.0)) throw std::invalid_argument("bin delay must be positive");
    const JonesVector d = diagonal();
    const JonesVector a = antidiagonal();
    const Complex along_d = inner(d, input);
    // Retardation phase pi on the slow (A) axis.
    const Complex along_a = -inner(a, input);

    TimeBinPolState out;
    out.bin_delay = bin_delay;
    out.bins[0] = {along_d * d.h, along_d * d.v};
    out.bins[1] = {along_a * a.h, along_a * a.v};
    return out;
}

TimeBinPolState simulate_arm(double theta_hwp, double bin_delay) {
    return birefringent_split(vertical(), bin_delay)
        .apply(qwp_unitary())
        .apply(hwp_unitary(theta_hwp))
        .apply(horizontal_polarizer());
}

Complex spectral_transfer(const TimeBinPolState& state, double omega) {
    return state.early().h + state.late().h * std::polar(1.0, omega * state.bin_delay);
}

double bin_relative_phase(const TimeBinPolState& state) {
    return std::arg(state.late().h * std::conj(state.early().h));
}

double arm_equivalence_check(double theta, double bin_delay, const GaussianBiphoton& state, Side side) {
    const TimeBinPolState arm_state = simulate_arm(theta, bin_delay);
    const InterferometerArm arm(bin_delay, 4.0 * theta);
    const bool signal = side == Side::Signal;
    const double center = signal ? state.omega_s0() : state.omega_i0();
    const double sigma = signal ? state.sigma_s() : state.sigma_i();

    // The H projection keeps half the photon; both routes then peak at unit
    // transmission.
    const double scale = 1.0 / (2.0 * arm_state.norm2());
    constexpr int kSamples = 1201;
    double worst = 0.0;
    for (int k = 0; k < kSamples; ++k) {
        const double x = -6.0 + 12.0 * k / (kSamples - 1);
        const double omega = center + x * sigma;
        const double envelope = std::exp(-0.5 * x * x);
        const double via_jones = std::norm(spectral_transfer(arm_state, omega)) * scale * envelope;
        const double via_arm = std::norm(arm_transfer(omega, arm)) * envelope;
        worst = std::max(worst, std::abs(via_jones - via_arm));
    }
    return worst;
}

}  // namespace franson::polarization
