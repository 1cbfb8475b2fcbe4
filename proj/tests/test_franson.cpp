#include <doctest.h>

#include <cmath>
#include <random>

#include "franson/detector.hpp"
#include "franson/franson.hpp"
#include "oracles.hpp"

using namespace franson;
using doctest::Approx;

namespace {
const GaussianBiphoton kSpectral(2584.6, 2276.7, 10.63, 9.56, -0.9942);
const FransonDelays kDelays{0.82, 0.91};
}  // namespace

TEST_CASE("arm transfer") {
    CHECK(std::abs(arm_transfer(0.0, InterferometerArm(0.5, 0.0)) - 1.0) < 1e-15);
    CHECK(std::abs(arm_transfer(0.0, InterferometerArm(0.5, kPi))) < 1e-15);
    std::mt19937_64 rng(1);
    std::uniform_real_distribution<double> u(0.0, 10.0);
    for (int k = 0; k < 100; ++k) {
        const InterferometerArm arm(u(rng) * 0.1, u(rng));
        const double w = u(rng) * 300.0;
        const double c = std::cos(0.5 * (w * arm.tau() + arm.phi()));
        CHECK(std::norm(arm_transfer(w, arm)) == Approx(c * c).epsilon(1e-12));
    }
}

TEST_CASE("arm validation and phase wrapping") {
    CHECK_THROWS_AS(InterferometerArm(-0.1, 0.0), std::invalid_argument);
    CHECK_THROWS_AS(InterferometerArm(std::nan(""), 0.0), std::invalid_argument);
    CHECK(InterferometerArm(1.0, -kPi / 2).phi() == Approx(3 * kPi / 2));
    CHECK(InterferometerArm(1.0, 5 * kPi).phi() == Approx(kPi));
    const InterferometerArm cal = InterferometerArm::calibrated(0.82, 0.3, 2584.6);
    CHECK(std::remainder(cal.fringe_phase(2584.6) - 0.3, kTwoPi) == Approx(0.0).epsilon(1e-9));
}

TEST_CASE("identity interferometer leaves the jsa unchanged") {
    const FransonSettings id = FransonSettings::identity();
    for (double dw : {-20.0, 0.0, 3.0}) {
        const double ws = 2584.6 + dw;
        const double wi = 2276.7 - dw;
        CHECK(jsa_after(id, kSpectral, ws, wi).real() == Approx(jsa_value(kSpectral, ws, wi)).epsilon(1e-15));
        CHECK(jsi_after(id, kSpectral, ws, wi) == Approx(std::pow(jsa_value(kSpectral, ws, wi), 2)).epsilon(1e-14));
    }
    const FransonSettings dark{InterferometerArm(0.0, kPi), InterferometerArm(0.0, kPi)};
    CHECK(std::abs(jsa_after(dark, kSpectral, 2584.6, 2276.7)) < 1e-16);
}

TEST_CASE("jsa_after matches the definition and jsi is its modulus") {
    std::mt19937_64 rng(2);
    for (int k = 0; k < 20; ++k) {
        const oracle::Params p = oracle::random_params(rng);
        std::normal_distribution<double> n(0.0, 1.0);
        const double ws = p.omega_s0 + p.sigma_s * n(rng);
        const double wi = p.omega_i0 + p.sigma_i * n(rng);
        const auto model = jsa_after(p.settings(), p.state(), ws, wi);
        const auto ref = oracle::jsa_after(p, ws, wi);
        CHECK(std::abs(model - ref) <= 1e-12 * std::abs(jsa_value(p.state(), ws, wi)) + 1e-300);
        CHECK(jsi_after(p.settings(), p.state(), ws, wi) == Approx(std::norm(model)).epsilon(1e-12));
    }
}

TEST_CASE("jsi fringe period and comb shift") {
    const FransonSettings s0 = kDelays.settings(kSpectral, 0.0, 0.0);
    const FransonSettings spi = kDelays.settings(kSpectral, 0.0, kPi);
    const double period = kTwoPi / 0.82;
    CHECK(period == Approx(7.66).epsilon(1e-3));
    // Along the signal axis at fixed idler frequency, the comb repeats after one period.
    const double wi = 2276.7;
    for (double dw : {-3.0, 0.0, 1.7}) {
        const double a = jsi_after(s0, kSpectral, 2584.6 + dw, wi) / std::pow(jsa_value(kSpectral, 2584.6 + dw, wi), 2);
        const double b = jsi_after(s0, kSpectral, 2584.6 + dw + period, wi) /
                         std::pow(jsa_value(kSpectral, 2584.6 + dw + period, wi), 2);
        CHECK(a == Approx(b).epsilon(1e-9));
    }
    // Advancing the idler phase by pi moves the idler comb by half its period.
    const double half = 0.5 * kTwoPi / 0.91;
    for (double dw : {-2.0, 0.5}) {
        const double ws = 2584.6;
        const double a = jsi_after(s0, kSpectral, ws, wi + dw) / std::pow(jsa_value(kSpectral, ws, wi + dw), 2);
        const double b = jsi_after(spi, kSpectral, ws, wi + dw + half) /
                         std::pow(jsa_value(kSpectral, ws, wi + dw + half), 2);
        CHECK(a == Approx(b).epsilon(1e-9));
    }
}

TEST_CASE("path envelopes") {
    const FransonSettings s = kDelays.settings(kSpectral, 0.0, 0.0);
    CHECK(path_term(PathTerm::ShortShort, s, kSpectral, 0.0, 0.0) == Approx(1.0));
    CHECK(path_term(PathTerm::LongLong, s, kSpectral, -0.82, -0.91) == Approx(1.0));
    CHECK(path_term(PathTerm::LongShort, s, kSpectral, -0.82, 0.0) == Approx(1.0));
    CHECK(path_term(PathTerm::ShortLong, s, kSpectral, 0.0, -0.91) == Approx(1.0));
    // The short-long and long-short envelopes never overlap.
    double worst = 0.0;
    for (int i = 0; i <= 200; ++i) {
        for (int j = 0; j <= 200; ++j) {
            const double ts = -2.5 + 4.0 * i / 200.0;
            const double ti = -2.5 + 4.0 * j / 200.0;
            worst = std::max(worst, path_term(PathTerm::ShortLong, s, kSpectral, ts, ti) *
                                        path_term(PathTerm::LongShort, s, kSpectral, ts, ti));
        }
    }
    CHECK(worst < 1e-10);
    const GaussianBiphoton flat(0.0, 0.0, 5.0, 5.0, 0.0);
    const FransonSettings zero{InterferometerArm(0.0, 0.0), InterferometerArm(0.0, 0.0)};
    for (const PathTerm t : kAllPathTerms) CHECK(path_term(t, zero, flat, 0.03, -0.02) == Approx(path_term(PathTerm::ShortShort, zero, flat, 0.03, -0.02)));
}

TEST_CASE("jti at the identity interferometer is the source jti") {
    const FransonSettings id = FransonSettings::identity();
    for (double t : {-0.3, 0.0, 0.2}) {
        CHECK(jti_after(id, kSpectral, t, 0.9 * t) == Approx(std::norm(jta_value(kSpectral, t, 0.9 * t))).epsilon(1e-12));
    }
}

TEST_CASE("jti decomposition reproduces jti_after and is non-negative") {
    std::mt19937_64 rng(3);
    for (int k = 0; k < 20; ++k) {
        const oracle::Params p = oracle::random_params(rng);
        const JtiDecomposition d = jti_decomposition(p.settings(), p.state());
        CHECK(d.terms.size() == 10);
        const double peak = jti_after(p.settings(), p.state(), -0.5 * p.tau_s, -0.5 * p.tau_i) + p.state().temporal_peak_intensity();
        std::uniform_real_distribution<double> t(-2.0, 1.0);
        for (int j = 0; j < 50; ++j) {
            const double ts = t(rng);
            const double ti = t(rng);
            const double v = jti_after(p.settings(), p.state(), ts, ti);
            CHECK(d.evaluate(ts, ti) == Approx(v).epsilon(1e-9).scale(peak));
            CHECK(v >= -1e-12 * peak);
        }
    }
}

TEST_CASE("jti integrates to the coincidence rate") {
    std::mt19937_64 rng(4);
    for (int k = 0; k < 4; ++k) {
        const oracle::Params p = oracle::random_params(rng);
        const WidthSummary w = temporal_widths(p.state());
        const double hs = 10.0 * w.marginal_s + p.tau_s;
        const double hi = 10.0 * w.marginal_i + p.tau_i;
        const double total = oracle::integrate_2d(
            [&](double ts, double ti) { return jti_after(p.settings(), p.state(), ts, ti); }, -hs, hs, -hi, hi, 1200);
        CHECK(total == Approx(coincidence_rate(p.settings(), p.state())).epsilon(1e-6));
    }
}

TEST_CASE("coincidence rate matches quadrature") {
    std::mt19937_64 rng(11);
    for (int k = 0; k < 20; ++k) {
        const oracle::Params p = oracle::random_params(rng);
        CHECK(coincidence_rate(p.settings(), p.state()) == Approx(oracle::coincidence_quadrature(p)).epsilon(1e-6));
    }
    oracle::Params nominal{2584.6, 2276.7, 10.63, 9.56, -0.9942, 0.82, 0.91, 0.0, 0.0};
    CHECK(coincidence_rate(nominal.settings(), nominal.state()) == Approx(oracle::coincidence_quadrature(nominal)).epsilon(1e-6));
}

TEST_CASE("coincidence rate without delays") {
    for (double ps : {0.0, 0.7, 2.0, kPi}) {
        for (double pi : {0.0, 1.1, 4.0}) {
            const FransonSettings s{InterferometerArm(0.0, ps), InterferometerArm(0.0, pi)};
            const double expected = 1.0 + std::cos(ps) + std::cos(pi) + 0.5 * std::cos(ps + pi) + 0.5 * std::cos(ps - pi);
            CHECK(4.0 * coincidence_rate(s, kSpectral) == Approx(expected).epsilon(1e-12).scale(1.0));
        }
    }
}

TEST_CASE("anticorrelated source fringes follow the phase sum") {
    const GaussianBiphoton anti(2584.6, 2276.7, 10.0, 10.0, -0.9999);
    const GaussianBiphoton corr(2584.6, 2276.7, 10.0, 10.0, 0.9999);
    const FransonDelays d{0.85, 0.85};
    const auto amp = [&](const GaussianBiphoton& s, double sign) {
        const double hi = coincidence_rate(d.settings(s, 0.0, 0.0), s);
        const double lo = coincidence_rate(d.settings(s, kPi / 2, sign * kPi / 2), s);
        return hi - lo;
    };
    // Phase sum pi with zero difference, and phase difference pi with zero sum.
    CHECK(amp(anti, 1.0) > 100.0 * std::abs(amp(anti, -1.0)));
    CHECK(amp(corr, -1.0) > 100.0 * std::abs(amp(corr, 1.0)));
    // In that limit only the three sum terms survive.
    for (double sum : {0.0, 1.0, 2.5}) {
        const FransonSettings s = d.settings(anti, 0.3, sum - 0.3);
        const double three = 0.25 * (1.0 + 0.5 * std::exp(-0.5 * std::pow(spectral_widths(anti).diag_plus * 0.85, 2)) * std::cos(sum));
        CHECK(coincidence_rate(s, anti) == Approx(three).epsilon(1e-9));
    }
}

TEST_CASE("singles rate") {
    CHECK(singles_rate(InterferometerArm(0.0, 0.0), 10.0, 2500.0) == Approx(2.0));
    CHECK(singles_rate(InterferometerArm(0.0, 1.0), 10.0, 2500.0) == Approx(1.0 + std::cos(1.0)));
    const double amp = std::exp(-0.5 * std::pow(10.63 * 0.82, 2));
    CHECK(amp < 1e-16);
    CHECK(amp > 1e-17);
    for (double phi : {0.0, 1.0, kPi}) {
        CHECK(std::abs(singles_rate(InterferometerArm::calibrated(0.82, phi, 2584.6), 10.63, 2584.6) - 1.0) < 1e-15);
    }
    CHECK(std::abs(10.63 * 0.82 - 9.56 * 0.91) / (9.56 * 0.91) < 0.002);
    // The fringe amplitude equals the Fourier transform of the marginal spectrum.
    const double sigma = 3.0;
    const double tau = 0.4;
    const double w0 = 500.0;
    for (double phi : {0.0, 0.9, 2.0}) {
        const InterferometerArm arm(tau, phi);
        const double quad = oracle::integrate_1d(
            [&](double w) {
                const double g = std::exp(-0.5 * std::pow((w - w0) / sigma, 2)) / (std::sqrt(kTwoPi) * sigma);
                return 4.0 * g * std::norm(arm_transfer(w, arm)) / 2.0;
            },
            w0 - 12 * sigma, w0 + 12 * sigma, 4000);
        CHECK(singles_rate(arm, sigma, w0) == Approx(quad).epsilon(1e-9));
    }
}

TEST_CASE("temporal marginal") {
    const FransonSettings s = kDelays.settings(kSpectral, 0.4, 0.0);
    const WidthSummary w = temporal_widths(kSpectral);
    for (const Side side : {Side::Signal, Side::Idler}) {
        const double width = side == Side::Signal ? w.marginal_s : w.marginal_i;
        const double tau = side == Side::Signal ? 0.82 : 0.91;
        const double total = oracle::integrate_1d([&](double t) { return temporal_marginal(s, kSpectral, side, t); },
                                                  -10 * width - tau, 10 * width, 4000);
        const InterferometerArm arm = side == Side::Signal ? s.arm_s : s.arm_i;
        const double sigma = side == Side::Signal ? 10.63 : 9.56;
        const double w0 = side == Side::Signal ? 2584.6 : 2276.7;
        CHECK(total == Approx(0.5 * singles_rate(arm, sigma, w0)).epsilon(1e-9));
    }
    const double id_total = oracle::integrate_1d(
        [&](double t) { return temporal_marginal(FransonSettings::identity(), kSpectral, Side::Signal, t); }, -5.0, 5.0, 4000);
    CHECK(id_total == Approx(1.0).epsilon(1e-9));
}

TEST_CASE("selected rates are the jti at the selected gate") {
    std::mt19937_64 rng(12);
    for (int k = 0; k < 50; ++k) {
        const oracle::Params p = oracle::random_params(rng);
        const SelectedRates r = selected_rates(p.settings(), p.state());
        const double v = jti_after(p.settings(), p.state(), -0.5 * p.tau_s, -0.5 * p.tau_i);
        CHECK(r.coincidence == Approx(v).epsilon(1e-12).scale(p.state().temporal_peak_intensity()));
        CHECK(r.singles_s == Approx(temporal_marginal(p.settings(), p.state(), Side::Signal, -0.5 * p.tau_s)).epsilon(1e-12));
        CHECK(r.singles_i == Approx(temporal_marginal(p.settings(), p.state(), Side::Idler, -0.5 * p.tau_i)).epsilon(1e-12));
    }
}

TEST_CASE("delays satisfy the matching condition") {
    CHECK(10.63 * 0.82 == Approx(8.72).epsilon(1e-3));
    CHECK(9.56 * 0.91 == Approx(8.70).epsilon(1e-3));
}

TEST_CASE("predicted visibility") {
    CHECK(unselected_visibility(1.531, 0.82) == Approx(0.2274).epsilon(1e-3));
    const GaussianBiphoton ideal(2584.6, 2276.7, 10.0, 10.0, -0.999);
    const FransonDelays d{0.85, 0.85};
    CHECK(predicted_visibility(d.settings(ideal, 0.0, 0.0), ideal, true) == Approx(1.0).epsilon(1e-6));
    const FransonDelays far{50.0, 50.0};
    CHECK(predicted_visibility(far.settings(ideal, 0.0, 0.0), ideal, false) < 1e-12);
    // Equal delays keep both selected paths equally weighted at the gate however long the delay.
    CHECK(predicted_visibility(far.settings(kSpectral, 0.0, 0.0), kSpectral, true) == Approx(1.0).epsilon(1e-9));
    // A delay mismatch leaves the gate midway between the selected lobes but starves it of pairs.
    const FransonDelays matched{3.0, 3.0};
    const FransonDelays mismatched{3.0, 4.0};
    CHECK(predicted_visibility(mismatched.settings(kSpectral, 0.0, 0.0), kSpectral, true) == Approx(1.0).epsilon(1e-9));
    const double starved = selected_rates(mismatched.settings(kSpectral, 0.0, 0.0), kSpectral).coincidence;
    CHECK(starved < 1e-6 * selected_rates(matched.settings(kSpectral, 0.0, 0.0), kSpectral).coincidence);

    std::mt19937_64 rng(13);
    for (int k = 0; k < 500; ++k) {
        const oracle::Params p = oracle::random_params(rng);
        const double u = predicted_visibility(p.settings(), p.state(), false);
        const double s = predicted_visibility(p.settings(), p.state(), true);
        CHECK(u <= 0.5);
        CHECK(u >= 0.0);
        CHECK(s <= 1.0);
        CHECK(s >= 0.0);
    }
    // Unselected visibility from the two-photon bandwidth matches the full model.
    const FransonDelays eq{0.82, 0.82};
    const GaussianBiphoton anti(2584.6, 2276.7, 10.0, 10.0, -kMaxAbsRho);
    CHECK(predicted_visibility(eq.settings(anti, 0.0, 0.0), anti, false) ==
          Approx(unselected_visibility(spectral_widths(anti).diag_plus, 0.82)).epsilon(1e-6));
}
