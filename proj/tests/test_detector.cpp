#include <doctest.h>

#include <cmath>
#include <set>
#include <sstream>

#include "franson/detector.hpp"
#include "franson/fit.hpp"
#include "oracles.hpp"

using namespace franson;
using doctest::Approx;

namespace {

const GaussianBiphoton kSpectral(2584.6, 2276.7, 10.63, 9.56, -0.9942);
const FransonDelays kDelays{0.82, 0.91};

ResponseModel gate(double s) {
    ResponseModel r;
    r.gate_sigma_s = s;
    r.gate_sigma_i = s;
    return r;
}

CountModel fringe_counts() {
    CountModel c;
    c.pair_rate_peak = 10.8;
    c.background_rate = 0.8;
    c.singles_rates = {11600.0, 18500.0};
    c.singles_background = {400.0, 2500.0};
    c.dwell = 60.0;
    c.seed = 1;
    c.reference = RateReference::FringePeak;
    return c;
}

}  // namespace

TEST_CASE("model validation") {
    ResponseModel r;
    r.gate_sigma_s = -0.1;
    CHECK_THROWS_AS(r.validate(), std::invalid_argument);
    CountModel c;
    c.dwell = 0.0;
    CHECK_THROWS_AS(c.validate(), std::invalid_argument);
    c.dwell = 1.0;
    c.background_rate = -1.0;
    CHECK_THROWS_AS(c.validate(), std::invalid_argument);
}

TEST_CASE("convolution preserves the total and adds variances") {
    const GaussianBiphoton s = GaussianBiphoton::from_temporal(0.0, 0.0, 0.455, 0.488, 0.979);
    const FransonSettings id = FransonSettings::identity();
    const ScanGrid grid = ScanGrid::around(MapKind::Jti, s, id, 301, 7.0);
    const Histogram2D raw = expected_scan(MapKind::Jti, s, id, ResponseModel{}, grid);
    const Histogram2D zero = convolve_map(raw, 0.0, 0.0);
    CHECK(zero.values() == raw.values());
    const Histogram2D blurred = convolve_map(raw, 0.12, 0.12);
    CHECK(blurred.total() == Approx(raw.total()).epsilon(1e-6));
    const GaussianFit2D fit = fit_gaussian_2d(blurred);
    CHECK(fit.sigma_x == Approx(std::hypot(0.455, 0.120)).epsilon(1e-4));
    CHECK(fit.sigma_y == Approx(std::hypot(0.488, 0.120)).epsilon(1e-4));
    CHECK(fit.sigma_x == Approx(0.471).epsilon(2e-3));
    CHECK(fit.sigma_y > fit_gaussian_2d(raw).sigma_y);
    CHECK_THROWS_AS(convolve_map(raw, 0.01, 0.12), std::invalid_argument);
}

TEST_CASE("expected scans") {
    const FransonSettings id = FransonSettings::identity();
    const ScanGrid jsi_grid = ScanGrid::around(MapKind::Jsi, kSpectral, id, 201, 5.0);
    const Histogram2D jsi = expected_scan(MapKind::Jsi, kSpectral, id, ResponseModel{}, jsi_grid);
    CHECK(jsi.at(37, 150) == Approx(jsi_after(id, kSpectral, jsi_grid.x.at(37), jsi_grid.y.at(150))).epsilon(1e-15));
    CHECK(fit_gaussian_2d(jsi).rho < -0.99);

    const FransonSettings s0 = kDelays.settings(kSpectral, 0.0, 0.0);
    const ScanGrid tg = ScanGrid::around(MapKind::Jti, kSpectral, s0, 301, 6.0);
    const Histogram2D before = expected_scan(MapKind::Jti, kSpectral, id, gate(0.12), tg, 43.2);
    CHECK(before.max() == Approx(43.2).epsilon(1e-9));
    CHECK(fit_gaussian_2d(before).rho > 0.9);
    const Histogram2D after = expected_scan(MapKind::Jti, kSpectral, s0, gate(0.12), tg, 43.2);
    // The selected lobe sits at the gate, the two cross lobes are displaced by one delay along t_s - t_i.
    const auto at = [&](const Histogram2D& h, double ts, double ti) {
        const auto ix = static_cast<std::size_t>(std::lround((ts - tg.x.start) / tg.x.step));
        const auto iy = static_cast<std::size_t>(std::lround((ti - tg.y.start) / tg.y.step));
        return h.at(ix, iy);
    };
    const std::array<double, 2> g = kDelays.selected_gate();
    CHECK(at(after, g[0], g[1]) > at(after, -0.82, 0.0));
    CHECK(at(after, g[0], g[1]) > at(after, 0.0, -0.91));
    CHECK(at(after, -0.82, 0.0) > 3.0 * at(after, -0.41, 0.0));
    CHECK(after.total() < before.total());
}

TEST_CASE("background visibility and snr") {
    CHECK(background_visibility(1.0, 5.5, 0.8) == Approx(0.873).epsilon(1e-3));
    CHECK(background_visibility(0.7, 5.5, 0.0) == Approx(0.7));
    CHECK(peak_snr(1.0, 5.5, 0.8) == Approx(13.75));
    CHECK(44.0 / 0.8 == Approx(55.0));
    double last = 2.0;
    for (double b = 0.0; b < 5.0; b += 0.25) {
        const double v = background_visibility(0.95, 5.0, b);
        CHECK(v < last);
        last = v;
    }
}

TEST_CASE("poisson sampling") {
    CHECK(sample_counts(0.0, 200.0, 3, 4) == 0);
    CHECK(sample_counts(6.46, 200.0, 3, 4) == sample_counts(6.46, 200.0, 3, 4));
    std::set<std::uint64_t> distinct;
    double sum = 0.0;
    double sum2 = 0.0;
    const int n = 10000;
    for (int seed = 0; seed < n; ++seed) {
        const auto k = static_cast<double>(sample_counts(1292.0, 1.0, static_cast<std::uint64_t>(seed), 0));
        CHECK(std::abs(k - 1292.0) < 5.0 * std::sqrt(1292.0));
        sum += k;
        sum2 += k * k;
        distinct.insert(static_cast<std::uint64_t>(k));
    }
    const double mean = sum / n;
    const double var = sum2 / n - mean * mean;
    CHECK(mean == Approx(1292.0).epsilon(0.01));
    CHECK(var == Approx(1292.0).epsilon(0.05));
    CHECK(distinct.size() > 50);
    int same = 0;
    for (std::uint64_t stream = 0; stream < 20; ++stream)
        if (sample_counts(10.0, 1.0, 1, stream) == sample_counts(10.0, 1.0, 1, stream + 1000)) ++same;
    CHECK(same < 20);
}

TEST_CASE("gated rates reduce to the model for an ideal response") {
    std::mt19937_64 rng(31);
    for (int k = 0; k < 20; ++k) {
        const oracle::Params p = oracle::random_params(rng);
        const std::array<double, 2> g{-0.5 * p.tau_s, -0.5 * p.tau_i};
        const double scale = p.state().temporal_peak_intensity();
        CHECK(gated_coincidence(p.settings(), p.state(), g, ResponseModel{}) ==
              Approx(jti_after(p.settings(), p.state(), g[0], g[1])).epsilon(1e-12).scale(scale));
        CHECK(gated_singles(p.settings(), p.state(), Side::Idler, g[1], ResponseModel{}) ==
              Approx(temporal_marginal(p.settings(), p.state(), Side::Idler, g[1])).epsilon(1e-12));
    }
}

TEST_CASE("gated rates equal the gate-weighted average of the model") {
    const FransonSettings s = kDelays.settings(kSpectral, 0.3, 1.1);
    const ResponseModel r = gate(0.12);
    const std::array<double, 2> g{-0.41, -0.455};
    const double w = 0.12;
    const double quad = oracle::integrate_2d(
        [&](double ts, double ti) {
            const double kernel = std::exp(-0.5 * ((ts - g[0]) * (ts - g[0]) + (ti - g[1]) * (ti - g[1])) / (w * w)) /
                                  (kTwoPi * w * w);
            return kernel * jti_after(s, kSpectral, ts, ti);
        },
        g[0] - 10 * w, g[0] + 10 * w, g[1] - 10 * w, g[1] + 10 * w, 800);
    CHECK(gated_coincidence(s, kSpectral, g, r) == Approx(quad).epsilon(1e-8));

    const double quad_s = oracle::integrate_1d(
        [&](double t) {
            const double kernel = std::exp(-0.5 * (t - g[0]) * (t - g[0]) / (w * w)) / (std::sqrt(kTwoPi) * w);
            return kernel * temporal_marginal(s, kSpectral, Side::Signal, t);
        },
        g[0] - 10 * w, g[0] + 10 * w, 4000);
    CHECK(gated_singles(s, kSpectral, Side::Signal, g[0], r) == Approx(quad_s).epsilon(1e-8));
}

TEST_CASE("rate calibration") {
    const CountModel c = fringe_counts();
    const RateCalculator calc(kSpectral, kDelays, c, gate(0.12));
    CHECK(calc.at(0.0, 0.0).coincidence == Approx(10.8 + 0.8).epsilon(1e-12));
    const double lo = calc.at(kPi, 0.0).coincidence;
    CHECK(lo < 1.0);
    CHECK(calc.at(0.4, -0.4).coincidence == Approx(calc.at(0.0, 0.0).coincidence).epsilon(1e-9));

    CountModel source = c;
    source.reference = RateReference::SourcePeak;
    source.pair_rate_peak = 43.2;
    const RateCalculator from_source(kSpectral, kDelays, source, gate(0.12));
    const double peak = from_source.at(0.0, 0.0).coincidence - 0.8;
    CHECK(peak / 43.2 > 0.1);
    CHECK(peak / 43.2 < 0.25);

    // Singles do not depend on either phase.
    for (double phi : {0.0, 1.0, 2.0, 3.0}) {
        CHECK(calc.at(phi, 0.3).singles_s == Approx(calc.at(0.0, 0.3).singles_s).epsilon(1e-15));
        CHECK(calc.at(0.3, phi).singles_i == Approx(calc.at(0.3, 0.0).singles_i).epsilon(1e-15));
    }
}

TEST_CASE("phase scan layout and determinism") {
    const std::vector<double> ps{0.0, 1.0, 2.0};
    const std::vector<double> pi{0.5, 1.5};
    const CountModel c = fringe_counts();
    const auto a = phase_fringe_scan(kSpectral, kDelays, ps, pi, c, gate(0.12));
    REQUIRE(a.size() == 6);
    CHECK(a[1].phi_s == 1.0);
    CHECK(a[1].phi_i == 0.5);
    CHECK(a[3].phi_s == 0.0);
    CHECK(a[3].phi_i == 1.5);
    const auto b = phase_fringe_scan(kSpectral, kDelays, ps, pi, c, gate(0.12));
    for (std::size_t k = 0; k < a.size(); ++k) {
        CHECK(a[k].counts_cc == b[k].counts_cc);
        CHECK(a[k].counts_ss == b[k].counts_ss);
        CHECK(a[k].expected_cc == b[k].expected_cc);
        CHECK(a[k].dwell == 60.0);
    }
}

TEST_CASE("expected fringe is a sinusoid in the phase sum") {
    const CountModel c = fringe_counts();
    const RateCalculator calc(kSpectral, kDelays, c, gate(0.12));
    // Fit C0 (1 + V cos x) + 0 sin x through the expected rates by linear least squares.
    double s1 = 0, sc = 0, sy = 0, scc = 0, scy = 0;
    std::vector<std::pair<double, double>> pts;
    for (int k = 0; k < 32; ++k) {
        const double x = kTwoPi * k / 32.0;
        const double y = calc.at(0.5 * x, 0.5 * x).coincidence;
        pts.emplace_back(x, y);
        s1 += 1;
        sc += std::cos(x);
        sy += y;
        scc += std::cos(x) * std::cos(x);
        scy += std::cos(x) * y;
    }
    const double b = (s1 * scy - sc * sy) / (s1 * scc - sc * sc);
    const double a = (sy - b * sc) / s1;
    double ss_res = 0, ss_tot = 0;
    const double mean = sy / s1;
    for (const auto& [x, y] : pts) {
        ss_res += std::pow(y - a - b * std::cos(x), 2);
        ss_tot += std::pow(y - mean, 2);
    }
    CHECK(1.0 - ss_res / ss_tot > 0.999);
}

TEST_CASE("bell experiment") {
    const BellSettings settings;
    const auto sp = bell_signal_phases(settings);
    const auto ip = bell_idler_phases(settings);
    CHECK(sp[0] == Approx(7 * kPi / 4));
    CHECK(sp[1] == Approx(7 * kPi / 4 + kPi));
    CHECK(ip[3] == Approx(kPi / 2 + kPi));

    CountModel ideal;
    ideal.pair_rate_peak = 10.0;
    ideal.dwell = 200.0;
    ideal.reference = RateReference::FringePeak;
    const GaussianBiphoton anti(2584.6, 2276.7, 10.0, 10.0, -0.9999);
    const BellTable t = bell_experiment(anti, FransonDelays{0.85, 0.85}, settings, ideal, ResponseModel{});
    const BellResult r = evaluate_bell(t.expected());
    for (int k = 0; k < 4; ++k) CHECK(std::abs(r.correlators[k].value) == Approx(1.0 / std::sqrt(2.0)).epsilon(1e-3));
    CHECK(r.s == Approx(2.0 * std::sqrt(2.0)).epsilon(1e-3));
    CHECK(t.records().size() == 16);

    CountModel none = ideal;
    none.pair_rate_peak = 0.0;
    const BellTable zero = bell_experiment(anti, FransonDelays{0.85, 0.85}, settings, none, ResponseModel{});
    for (const auto& row : zero.counts())
        for (const auto v : row) CHECK(v == 0);
}

TEST_CASE("count records csv") {
    const auto records = phase_fringe_scan(kSpectral, kDelays, {0.0, 1.0}, {0.0}, fringe_counts(), gate(0.12));
    std::stringstream s;
    write_count_records_csv(s, records);
    CHECK(s.str().rfind(std::string(kCountRecordHeader) + "\n", 0) == 0);
    const auto back = read_count_records_csv(s);
    REQUIRE(back.size() == records.size());
    for (std::size_t k = 0; k < back.size(); ++k) {
        CHECK(back[k].expected_cc == records[k].expected_cc);
        CHECK(back[k].counts_si == records[k].counts_si);
        CHECK(back[k].gate_i == records[k].gate_i);
    }
    std::stringstream bad(std::string(kCountRecordHeader) + "\n1,2,3\n");
    CHECK_THROWS_AS(read_count_records_csv(bad), CsvError);
}
