#include "franson/franson.hpp"

#include <cmath>
#include <stdexcept>

namespace franson {

namespace {

double wrap_phase(double phi) {
    double wrapped = std::fmod(phi, kTwoPi);
    if (wrapped < 0.0) wrapped += kTwoPi;
    if (wrapped >= kTwoPi) wrapped = 0.0;
    return wrapped;
}

// u^T M u with M the spectral covariance; the amplitude envelope is exp(-Q(t)).
double quad_form(const GaussianBiphoton& state, double u_s, double u_i) {
    const double a = state.sigma_s() * u_s;
    const double b = state.sigma_i() * u_i;
    return a * a + b * b + 2.0 * state.rho() * a * b;
}

struct PathGeometry {
    double shift_s;
    double shift_i;
    double phase;
};

PathGeometry geometry(PathTerm term, const FransonSettings& settings, const GaussianBiphoton& state) {
    const bool long_s = term == PathTerm::LongShort || term == PathTerm::LongLong;
    const bool long_i = term == PathTerm::ShortLong || term == PathTerm::LongLong;
    PathGeometry g{0.0, 0.0, 0.0};
    if (long_s) {
        g.shift_s = settings.arm_s.tau();
        g.phase += settings.arm_s.fringe_phase(state.omega_s0());
    }
    if (long_i) {
        g.shift_i = settings.arm_i.tau();
        g.phase += settings.arm_i.fringe_phase(state.omega_i0());
    }
    return g;
}

double normal_pdf(double x, double sd) {
    return std::exp(-0.5 * x * x / (sd * sd)) / (std::sqrt(kTwoPi) * sd);
}

}  // namespace

InterferometerArm::InterferometerArm(double tau, double phi) : tau_(tau), phi_(0.0) {
    if (!std::isfinite(tau) || tau < 0.0)
        throw std::invalid_argument("interferometer delay must be finite and non-negative");
    if (!std::isfinite(phi)) throw std::invalid_argument("interferometer phase must be finite");
    phi_ = wrap_phase(phi);
}

InterferometerArm InterferometerArm::calibrated(double tau, double effective_phase, double omega0) {
    // omega0 * tau is ~2e3 rad; reduce it separately to keep the wrap exact.
    const double carrier = wrap_phase(omega0 * tau);
    return {tau, wrap_phase(effective_phase) - carrier};
}

FransonSettings FransonSettings::only(Side side) const {
    FransonSettings out;
    if (side == Side::Signal)
        out.arm_s = arm_s;
    else
        out.arm_i = arm_i;
    return out;
}

std::complex<double> arm_transfer(double omega, const InterferometerArm& arm) {
    return 0.5 * (1.0 + std::polar(1.0, omega * arm.tau() + arm.phi()));
}

std::complex<double> jsa_after(const FransonSettings& settings, const GaussianBiphoton& state,
                               double omega_s, double omega_i) {
    return jsa_value(state, omega_s, omega_i) * arm_transfer(omega_s, settings.arm_s) *
           arm_transfer(omega_i, settings.arm_i);
}

double jsi_after(const FransonSettings& settings, const GaussianBiphoton& state, double omega_s,
                 double omega_i) {
    const double f = jsa_value(state, omega_s, omega_i);
    const double cs = std::cos(0.5 * (omega_s * settings.arm_s.tau() + settings.arm_s.phi()));
    const double ci = std::cos(0.5 * (omega_i * settings.arm_i.tau() + settings.arm_i.phi()));
    return f * f * cs * cs * ci * ci;
}

double path_term(PathTerm term, const FransonSettings& settings, const GaussianBiphoton& state,
                 double t_s, double t_i) {
    const PathGeometry g = geometry(term, settings, state);
    return std::exp(-quad_form(state, t_s + g.shift_s, t_i + g.shift_i));
}

double jti_after(const FransonSettings& settings, const GaussianBiphoton& state, double t_s,
                 double t_i) {
    const double ss = path_term(PathTerm::ShortShort, settings, state, t_s, t_i);
    const double ls = path_term(PathTerm::LongShort, settings, state, t_s, t_i);
    const double sl = path_term(PathTerm::ShortLong, settings, state, t_s, t_i);
    const double ll = path_term(PathTerm::LongLong, settings, state, t_s, t_i);
    const double psi_s = settings.arm_s.fringe_phase(state.omega_s0());
    const double psi_i = settings.arm_i.fringe_phase(state.omega_i0());

    const double sum = ss * ss + ls * ls + sl * sl + ll * ll                //
                       + 2.0 * (ss * ls + sl * ll) * std::cos(psi_s)        //
                       + 2.0 * (ss * sl + ls * ll) * std::cos(psi_i)        //
                       + 2.0 * sl * ls * std::cos(psi_s - psi_i)            //
                       + 2.0 * ss * ll * std::cos(psi_s + psi_i);
    return state.temporal_peak_intensity() / 16.0 * sum;
}

double coincidence_rate(const FransonSettings& settings, const GaussianBiphoton& state) {
    const double ts = settings.arm_s.tau();
    const double ti = settings.arm_i.tau();
    const double a = state.sigma_s() * ts;
    const double b = state.sigma_i() * ti;
    const double cross = state.rho() * a * b;
    const double psi_s = settings.arm_s.fringe_phase(state.omega_s0());
    const double psi_i = settings.arm_i.fringe_phase(state.omega_i0());

    // (1/2)(a-b)^2 + (1 +/- rho) a b == (a^2 + b^2)/2 +/- rho a b
    const double damp_sum = std::exp(-0.5 * (a * a + b * b) - cross);
    const double damp_diff = std::exp(-0.5 * (a * a + b * b) + cross);
    const double bracket = 1.0 + std::exp(-0.5 * a * a) * std::cos(psi_s) +
                           std::exp(-0.5 * b * b) * std::cos(psi_i) +
                           0.5 * damp_sum * std::cos(psi_s + psi_i) +
                           0.5 * damp_diff * std::cos(psi_s - psi_i);
    return 0.25 * bracket;
}

double singles_rate(const InterferometerArm& arm, double sigma, double omega0) {
    const double x = sigma * arm.tau();
    return 1.0 + std::exp(-0.5 * x * x) * std::cos(arm.fringe_phase(omega0));
}

double temporal_marginal(const FransonSettings& settings, const GaussianBiphoton& state, Side side,
                         double t) {
    const bool signal = side == Side::Signal;
    const InterferometerArm& arm = signal ? settings.arm_s : settings.arm_i;
    const double sigma = signal ? state.sigma_s() : state.sigma_i();
    const double omega0 = signal ? state.omega_s0() : state.omega_i0();
    const WidthSummary tw = temporal_widths(state);
    const double sd = signal ? tw.marginal_s : tw.marginal_i;
    const double tau = arm.tau();
    const double x = sigma * tau;
    return 0.25 * (normal_pdf(t, sd) + normal_pdf(t + tau, sd) +
                   2.0 * std::cos(arm.fringe_phase(omega0)) * std::exp(-0.5 * x * x) *
                       normal_pdf(t + 0.5 * tau, sd));
}

SelectedRates selected_rates(const FransonSettings& settings, const GaussianBiphoton& state) {
    const double a = state.sigma_s() * settings.arm_s.tau();
    const double b = state.sigma_i() * settings.arm_i.tau();
    const double q_plus = a * a + b * b + 2.0 * state.rho() * a * b;
    const double q_minus = a * a + b * b - 2.0 * state.rho() * a * b;
    const double psi_s = settings.arm_s.fringe_phase(state.omega_s0());
    const double psi_i = settings.arm_i.fringe_phase(state.omega_i0());

    SelectedRates out;
    out.coincidence =
        state.temporal_peak_intensity() / 16.0 *
        (2.0 * std::exp(-0.5 * q_plus) * (1.0 + std::cos(psi_s + psi_i)) +
         2.0 * std::exp(-0.5 * q_minus) * (1.0 + std::cos(psi_s - psi_i)) +
         4.0 * std::exp(-0.5 * (a * a + b * b)) * (std::cos(psi_s) + std::cos(psi_i)));

    const double one_minus = 1.0 - state.rho() * state.rho();
    const WidthSummary tw = temporal_widths(state);
    auto single = [&](double x, double psi, double sd) {
        const double peak = 1.0 / (std::sqrt(kTwoPi) * sd);
        return 0.5 * peak * (std::exp(-0.5 * x * x * one_minus) + std::exp(-0.5 * x * x) * std::cos(psi));
    };
    out.singles_s = single(a, psi_s, tw.marginal_s);
    out.singles_i = single(b, psi_i, tw.marginal_i);
    return out;
}

double predicted_visibility(const FransonSettings& settings, const GaussianBiphoton& state,
                            bool selected) {
    const double a = state.sigma_s() * settings.arm_s.tau();
    const double b = state.sigma_i() * settings.arm_i.tau();
    const double q_plus = a * a + b * b + 2.0 * state.rho() * a * b;
    if (!selected) return 0.5 * std::exp(-0.5 * q_plus);
    // Ratio e^{-Q+/2} / (e^{-Q+/2} + e^{-Q-/2}) written to avoid underflow.
    const double q_minus = a * a + b * b - 2.0 * state.rho() * a * b;
    return 1.0 / (1.0 + std::exp(0.5 * (q_plus - q_minus)));
}

double unselected_visibility(double two_photon_bandwidth, double tau) {
    const double x = two_photon_bandwidth * tau;
    return 0.5 * std::exp(-0.5 * x * x);
}

double JtiDecomposition::evaluate(double t_s, double t_i) const {
    double sum = 0.0;
    for (const Term& term : terms) {
        const double u = t_s - term.center[0];
        const double v = t_i - term.center[1];
        const double q = precision.xx * u * u + 2.0 * precision.xy * u * v + precision.yy * v * v;
        sum += term.weight * std::exp(-0.5 * q);
    }
    return sum;
}

JtiDecomposition jti_decomposition(const FransonSettings& settings, const GaussianBiphoton& state) {
    // exp(-Q(t+a)) exp(-Q(t+b)) = exp(-2 Q(t + (a+b)/2) - Q(a-b)/2), and 2Q = (1/2)(4M).
    const Covariance2 m = state.spectral_covariance();
    JtiDecomposition out;
    out.precision = {4.0 * m.xx, 4.0 * m.xy, 4.0 * m.yy};

    std::array<PathGeometry, 4> paths{};
    for (std::size_t k = 0; k < kAllPathTerms.size(); ++k) paths[k] = geometry(kAllPathTerms[k], settings, state);

    const double scale = state.temporal_peak_intensity() / 16.0;
    for (std::size_t a = 0; a < paths.size(); ++a) {
        for (std::size_t b = a; b < paths.size(); ++b) {
            const PathGeometry& pa = paths[a];
            const PathGeometry& pb = paths[b];
            const double coefficient = a == b ? 1.0 : 2.0 * std::cos(pa.phase - pb.phase);
            const double overlap =
                std::exp(-0.5 * quad_form(state, pa.shift_s - pb.shift_s, pa.shift_i - pb.shift_i));
            JtiDecomposition::Term term;
            term.weight = scale * coefficient * overlap;
            term.center = {-0.5 * (pa.shift_s + pb.shift_s), -0.5 * (pa.shift_i + pb.shift_i)};
            out.terms.push_back(term);
        }
    }
    return out;
}

}  // namespace franson
