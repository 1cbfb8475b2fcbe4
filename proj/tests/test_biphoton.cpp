#include <doctest.h>

#include <cmath>
#include <random>

#include "franson/biphoton.hpp"
#include "oracles.hpp"

using namespace franson;
using doctest::Approx;

namespace {
const GaussianBiphoton kSpectral(2584.6, 2276.7, 10.63, 9.56, -0.9942);
}

TEST_CASE("jsa peak equals the normalization prefactor") {
    const double n = 1.0 / (std::sqrt(2.0 * kPi * 10.63 * 9.56) * std::pow(1.0 - 0.9942 * 0.9942, 0.25));
    CHECK(jsa_value(kSpectral, 2584.6, 2276.7) == Approx(n).epsilon(1e-15));
}

TEST_CASE("uncorrelated jsa factorizes") {
    const GaussianBiphoton s(100.0, 200.0, 3.0, 5.0, 0.0);
    const auto g = [](double x, double sigma) {
        return std::exp(-x * x / (4.0 * sigma * sigma)) / std::pow(2.0 * kPi * sigma * sigma, 0.25);
    };
    for (double ws : {95.0, 100.0, 104.5}) {
        for (double wi : {190.0, 201.0, 212.0}) {
            CHECK(jsa_value(s, ws, wi) == Approx(g(ws - 100.0, 3.0) * g(wi - 200.0, 5.0)).epsilon(1e-13));
        }
    }
}

TEST_CASE("joint spectral intensity integrates to one") {
    std::mt19937_64 rng(5);
    for (int k = 0; k < 5; ++k) {
        oracle::Params p = oracle::random_params(rng);
        p.tau_s = p.tau_i = 0.0;
        p.phi_s = p.phi_i = 0.0;
        const GaussianBiphoton s = p.state();
        const double total = oracle::integrate_2d(
            [&](double ws, double wi) { return std::pow(jsa_value(s, ws, wi), 2); }, p.omega_s0 - 8 * p.sigma_s,
            p.omega_s0 + 8 * p.sigma_s, p.omega_i0 - 8 * p.sigma_i, p.omega_i0 + 8 * p.sigma_i, 800);
        CHECK(total == Approx(1.0).epsilon(1e-6));
    }
}

TEST_CASE("jta matches the FFT of the sampled jsa") {
    std::mt19937_64 rng(6);
    for (int k = 0; k < 3; ++k) {
        oracle::Params p = oracle::random_params(rng);
        p.tau_s = p.tau_i = 0.0;
        p.phi_s = p.phi_i = 0.0;
        const GaussianBiphoton s = p.state();
        const oracle::TimeGrid g = oracle::jti_fft(p);
        const std::size_t n = g.t_s.size();
        const double peak = s.temporal_peak_intensity();
        double err = 0.0;
        for (std::size_t ki = 0; ki < n; ++ki) {
            for (std::size_t ks = 0; ks < n; ++ks) {
                err = std::max(err, std::abs(std::norm(jta_value(s, g.t_s[ks], g.t_i[ki])) - g.intensity[ki * n + ks]));
            }
        }
        CHECK(err / peak < 1e-6);
        CHECK(std::norm(jta_value(s, 0.0, 0.0)) == Approx(peak).epsilon(1e-14));
    }
}

TEST_CASE("temporal correlation is the negative of the spectral correlation") {
    std::mt19937_64 rng(7);
    for (int k = 0; k < 50; ++k) {
        const oracle::Params p = oracle::random_params(rng);
        const GaussianBiphoton s = p.state();
        CHECK(s.temporal_covariance().correlation() == Approx(-p.rho).epsilon(1e-12));
        CHECK(temporal_widths(s).marginal_s ==
              Approx(1.0 / (2.0 * p.sigma_s * std::sqrt(1.0 - p.rho * p.rho))).epsilon(1e-12));
    }
}

TEST_CASE("deconvolved spectral state predicts the temporal widths") {
    const WidthSummary t = temporal_widths(kSpectral);
    CHECK(t.marginal_s == Approx(0.4374).epsilon(1e-3));
    CHECK(t.correlation == Approx(0.9942).epsilon(1e-12));
    CHECK(std::abs(t.marginal_s - 0.455) / 0.455 < 0.05);
}

TEST_CASE("from_temporal round trips") {
    const GaussianBiphoton s = GaussianBiphoton::from_temporal(1.0, 2.0, 0.455, 0.488, 0.979);
    const WidthSummary t = temporal_widths(s);
    CHECK(t.marginal_s == Approx(0.455).epsilon(1e-12));
    CHECK(t.marginal_i == Approx(0.488).epsilon(1e-12));
    CHECK(t.correlation == Approx(0.979).epsilon(1e-12));
    CHECK(s.sigma_s() / s.sigma_i() == Approx(1.0725).epsilon(1e-3));
}

TEST_CASE("spectral widths of the deconvolved source") {
    const WidthSummary w = spectral_widths(kSpectral);
    CHECK(w.diag_plus == Approx(1.52).epsilon(0.01));
    CHECK(std::abs(w.diag_plus - 1.531) < 0.01);
    CHECK(w.diag_minus == Approx(20.16).epsilon(1e-3));
    CHECK(w.heralded_s == Approx(1.1433).epsilon(1e-4));
    CHECK(w.heralded_i == Approx(1.0282).epsilon(1e-4));
    CHECK(std::abs(w.heralded_s - 1.13) <= 0.05);
}

TEST_CASE("width summary identities") {
    std::mt19937_64 rng(8);
    std::uniform_real_distribution<double> sd(0.1, 20.0);
    std::uniform_real_distribution<double> corr(-0.999, 0.999);
    for (int k = 0; k < 100; ++k) {
        const double a = sd(rng);
        const double b = sd(rng);
        const double r = corr(rng);
        const WidthSummary w = width_summary(a, b, r);
        CHECK(w.heralded_s == Approx(a * std::sqrt(1.0 - r * r)).epsilon(1e-14));
        CHECK(w.heralded_i == Approx(b * std::sqrt(1.0 - r * r)).epsilon(1e-14));
        CHECK(w.diag_plus * w.diag_plus == Approx(a * a + b * b + 2.0 * r * a * b).epsilon(1e-10));
        CHECK(w.diag_minus * w.diag_minus == Approx(a * a + b * b - 2.0 * r * a * b).epsilon(1e-10));
    }
    const WidthSummary sym = width_summary(3.0, 4.0, 0.0);
    CHECK(sym.diag_plus == Approx(5.0));
    CHECK(sym.diag_minus == Approx(5.0));
}

TEST_CASE("coherence times") {
    CHECK(coherence_time(10.65) == Approx(0.0939).epsilon(1e-3));
    CHECK(coherence_time(1.531) == Approx(0.6532).epsilon(1e-3));
    const CoherenceTimes c = coherence_times(kSpectral);
    CHECK(c.tau1_s == Approx(1.0 / 10.63));
    CHECK(c.tau2 == Approx(1.0 / spectral_widths(kSpectral).diag_plus));
    CHECK_THROWS_AS(coherence_time(0.0), std::invalid_argument);
}

TEST_CASE("wavelength conversion") {
    CHECK(wavelength_to_angfreq(730.0) == Approx(2580.33).epsilon(1e-5));
    CHECK(wavelength_to_angfreq(827.0) == Approx(2277.7).epsilon(1e-3));
    CHECK(angfreq_to_wavelength(2584.6) == Approx(728.8).epsilon(1e-4));
    CHECK(angfreq_to_wavelength(wavelength_to_angfreq(1000.0)) == Approx(1000.0).epsilon(1e-15));
    CHECK_THROWS_AS(wavelength_to_angfreq(0.0), std::invalid_argument);
}

TEST_CASE("invalid states are rejected") {
    CHECK_THROWS_AS(GaussianBiphoton(0, 0, 0.0, 1.0, 0.0), std::invalid_argument);
    CHECK_THROWS_AS(GaussianBiphoton(0, 0, 1.0, -1.0, 0.0), std::invalid_argument);
    CHECK_THROWS_AS(GaussianBiphoton(0, 0, 1.0, 1.0, 1.0), std::invalid_argument);
    CHECK_THROWS_AS(GaussianBiphoton(0, 0, 1.0, 1.0, -0.9999999), std::invalid_argument);
    CHECK_NOTHROW(GaussianBiphoton(0, 0, 1.0, 1.0, kMaxAbsRho));
}
