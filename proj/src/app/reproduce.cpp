#include "franson/app/reproduce.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <ostream>
#include <stdexcept>

#ifndef FRANSON_CONFIG_DIR
#define FRANSON_CONFIG_DIR "configs"
#endif

namespace franson::app {

namespace {

Comparison within(const std::string& name, double value, double expected, double tol) {
    return {name, value, expected - tol, expected + tol, std::abs(value - expected) <= tol};
}

Comparison between(const std::string& name, double value, double low, double high) {
    return {name, value, low, high, value >= low && value <= high};
}

/// Rounds to `expected` at `decimals` decimal places.
Comparison rounds_to(const std::string& name, double value, double expected, int decimals) {
    const double scale = std::pow(10.0, decimals);
    const double half = 0.5 / scale;
    return {name, value, expected - half, expected + half, std::round(value * scale) == std::round(expected * scale)};
}

std::string note(const std::string& what, double model, double reference) {
    return what + ": model " + format_number(model) + ", reference " + format_number(reference);
}

std::size_t nearest_index(const Axis& axis, double v) {
    const double k = std::round((v - axis.start) / axis.step);
    return static_cast<std::size_t>(std::clamp(k, 0.0, static_cast<double>(axis.count - 1)));
}

double sample(const Histogram2D& map, double x, double y) {
    return map.at(nearest_index(map.x(), x), nearest_index(map.y(), y));
}

void add_fit(OutputBundle& out, const std::string& stem, const FitReport& report) {
    out.add(stem + ".txt", fit_report_text(report));
    out.add(stem + ".csv", fit_report_csv(report));
}

ExperimentConfig bundled(const std::filesystem::path& dir, const std::string& name) {
    return load_config(dir / name);
}

void run_table1(ReproduceResult& r, const std::filesystem::path& dir) {
    auto& c = r.comparisons;
    // Deconvolution arithmetic on the quoted measured widths.
    c.push_back(rounds_to("deconvolved_dt_s", deconvolve_width(0.471, 0.120), 0.455, 3));
    c.push_back(rounds_to("deconvolved_dt_i", deconvolve_width(0.502, 0.120), 0.488, 3));
    GaussianFit2D quoted_t;
    quoted_t.sigma_x = 0.471;
    quoted_t.sigma_y = 0.502;
    quoted_t.rho = 0.920;
    c.push_back(between("deconvolved_rho_t", deconvolve_covariance(quoted_t, 0.120, 0.120).rho, 0.979, 0.980));

    // Coherence times and heralded widths from the deconvolved spectral values.
    c.push_back(rounds_to("tau1_s", coherence_time(10.65), 0.094, 3));
    c.push_back(rounds_to("tau1_i", coherence_time(9.57), 0.105, 3));
    c.push_back(rounds_to("tau2", coherence_time(1.531), 0.653, 3));
    const WidthSummary quoted_w = width_summary(10.63, 9.56, -0.9942);
    c.push_back(within("heralded_s", quoted_w.heralded_s, 1.13, 0.05));
    c.push_back(within("heralded_i", quoted_w.heralded_i, 1.02, 0.02));

    // Temporal pipeline: render, fit, deconvolve.
    const ExperimentConfig tcfg = bundled(dir, "table1_temporal.cfg");
    const GaussianBiphoton& tstate = tcfg.require_source().state;
    const ResponseModel tresp = tcfg.require_detector().response;
    const ScanBlock tscan = tcfg.scan_or_default();
    const FransonSettings none = FransonSettings::identity();
    const Histogram2D jti = expected_scan(MapKind::Jti, tstate, none, tresp,
                                          ScanGrid::around(MapKind::Jti, tstate, none, tscan.points, tscan.span));
    const FitReport tfit = fit_map(jti, tresp.gate_sigma_s, tresp.gate_sigma_i);
    c.push_back(within("jti_marginal_s", tfit.measured.sigma_x, 0.471, 0.004));
    c.push_back(within("jti_marginal_i", tfit.measured.sigma_y, 0.502, 0.005));
    c.push_back(within("jti_correlation", tfit.measured.rho, 0.920, 0.003));
    c.push_back(within("jti_deconvolved_marginal_s", tfit.deconvolved.sigma_x, 0.455, 0.004));
    c.push_back(within("jti_deconvolved_marginal_i", tfit.deconvolved.sigma_y, 0.488, 0.005));
    c.push_back(within("jti_deconvolved_correlation", tfit.deconvolved.rho, 0.979, 0.004));
    r.outputs.add("jti_measured.csv", histogram_csv(jti));
    add_fit(r.outputs, "fit_temporal", tfit);

    // Spectral pipeline.
    const ExperimentConfig scfg = bundled(dir, "table1_spectral.cfg");
    const GaussianBiphoton& sstate = scfg.require_source().state;
    const ResponseModel sresp = scfg.require_detector().response;
    const ScanBlock sscan = scfg.scan_or_default();
    const Histogram2D jsi = expected_scan(MapKind::Jsi, sstate, none, sresp,
                                          ScanGrid::around(MapKind::Jsi, sstate, none, sscan.points, sscan.span));
    const FitReport sfit = fit_map(jsi, sresp.spec_sigma_s, sresp.spec_sigma_i);
    c.push_back(within("jsi_center_s", sfit.measured.center_x, 2584.6, 0.4));
    c.push_back(within("jsi_center_i", sfit.measured.center_y, 2276.7, 0.4));
    c.push_back(within("jsi_marginal_s", sfit.measured.sigma_x, 10.65, 0.04));
    c.push_back(within("jsi_marginal_i", sfit.measured.sigma_y, 9.57, 0.04));
    c.push_back(within("jsi_deconvolved_marginal_s", sfit.deconvolved.sigma_x, 10.63, 0.04));
    c.push_back(within("jsi_deconvolved_marginal_i", sfit.deconvolved.sigma_y, 9.56, 0.04));
    c.push_back(within("jsi_deconvolved_correlation", sfit.deconvolved.rho, -0.9942, 0.0001));
    c.push_back(within("two_photon_bandwidth", spectral_widths(sstate).diag_plus, 1.531, 0.0153));
    r.outputs.add("jsi_measured.csv", histogram_csv(jsi));
    add_fit(r.outputs, "fit_spectral", sfit);

    GaussianFit2D quoted_s;
    quoted_s.sigma_x = 10.65;
    quoted_s.sigma_y = 9.57;
    quoted_s.rho = -0.9929;
    r.notes.push_back(note("deconvolved spectral correlation from the quoted measured values",
                           deconvolve_covariance(quoted_s, sresp.spec_sigma_s, sresp.spec_sigma_i).rho, -0.9942));
    r.notes.push_back(note("idler coherence time from the deconvolved width 9.56", coherence_time(9.56), 0.105));
    r.notes.push_back(note("idler temporal width from an unrounded measured width 0.5022", deconvolve_width(0.5022, 0.120), 0.488));
    r.notes.push_back(note("measured spectral correlation of the rendered map", sfit.measured.rho, -0.9929));
    r.notes.push_back(note("measured spectral heralded width, signal", sfit.heralded.x, 1.25));
    r.notes.push_back(note("measured spectral heralded width, idler", sfit.heralded.y, 1.13));
    r.notes.push_back(note("spectral difference bandwidth", spectral_widths(sstate).diag_minus, 17.81));
    const WidthSummary tw = temporal_widths(tstate);
    r.notes.push_back(note("temporal sum width", tw.diag_plus, 0.895));
    r.notes.push_back(note("temporal difference width", tw.diag_minus, 0.091));
    r.notes.push_back(note("deconvolved temporal heralded width, signal", tw.heralded_s, 0.059));
    r.notes.push_back(note("deconvolved temporal heralded width, idler", tw.heralded_i, 0.063));
}

void run_table2(ReproduceResult& r) {
    const CountTable counts = measured_bell_counts();
    const BellResult bell = evaluate_bell(counts);
    static const char* names[4] = {"E_ab", "E_ab'", "E_a'b", "E_a'b'"};
    static const double expected[4] = {0.587, 0.659, 0.618, -0.596};
    for (int k = 0; k < 4; ++k) r.comparisons.push_back(rounds_to(names[k], bell.correlators[k].value, expected[k], 3));
    r.comparisons.push_back(within("S", bell.s, 2.459, 0.001));
    r.comparisons.push_back(rounds_to("S_err", bell.sigma_s, 0.027, 3));
    r.comparisons.push_back(between("violation_sigmas", (bell.s - 2.0) / bell.sigma_s, 15.0, 1e9));
    r.notes.push_back("discrepancy: direct evaluation gives S = " + format_number(bell.s) + " +- " +
                      format_number(bell.sigma_s) + ", the published headline is " + format_number(kPublishedBellS) +
                      " +- " + format_number(kPublishedBellSigma));
    r.outputs.add("bell_table.csv", bell_table_csv(counts));
    r.outputs.add("bell_report.txt", bell_report_text(bell, true));
}

void run_fig3(ReproduceResult& r, const std::filesystem::path& dir) {
    const ExperimentConfig cfg = bundled(dir, "fig3.cfg");
    const GaussianBiphoton& state = cfg.require_source().state;
    const FransonDelays delays = cfg.require_franson().delays();
    const ResponseModel resp = cfg.require_detector().response;
    const ScanBlock scan = cfg.scan_or_default();
    const FransonSettings none = FransonSettings::identity();
    const FransonSettings sum0 = delays.settings(state, 0.0, 0.0);
    const FransonSettings sumpi = delays.settings(state, 0.0, kPi);

    const ScanGrid sgrid = ScanGrid::around(MapKind::Jsi, state, sum0, scan.points, scan.span);
    const ScanGrid tgrid = ScanGrid::around(MapKind::Jti, state, sum0, scan.points, scan.span);
    const Histogram2D jsi_before = expected_scan(MapKind::Jsi, state, none, resp, sgrid);
    const Histogram2D jti_before = expected_scan(MapKind::Jti, state, none, resp, tgrid);
    const Histogram2D jsi_0 = expected_scan(MapKind::Jsi, state, sum0, resp, sgrid);
    const Histogram2D jsi_pi = expected_scan(MapKind::Jsi, state, sumpi, resp, sgrid);
    const Histogram2D jti_0 = expected_scan(MapKind::Jti, state, sum0, resp, tgrid);
    const Histogram2D jti_pi = expected_scan(MapKind::Jti, state, sumpi, resp, tgrid);

    auto& c = r.comparisons;
    const GaussianFit2D fs = fit_gaussian_2d(jsi_before);
    const GaussianFit2D ft = fit_gaussian_2d(jti_before);
    c.push_back(between("jsi_before_correlation", fs.rho, -1.0, -0.98));
    c.push_back(between("jti_before_correlation", ft.rho, 0.9, 1.0));

    const auto gate = delays.selected_gate();
    const double center0 = sample(jti_0, gate[0], gate[1]);
    const double centerpi = sample(jti_pi, gate[0], gate[1]);
    c.push_back(between("jti_center_contrast", centerpi > 0.0 ? center0 / centerpi : 1e300, 10.0, 1e300));

    const std::size_t ix = nearest_index(tgrid.x, gate[0]);
    const std::size_t iy = nearest_index(tgrid.y, gate[1]);
    double neighbour_max = 0.0;
    for (int dx = -1; dx <= 1; ++dx) {
        for (int dy = -1; dy <= 1; ++dy) {
            if (dx != 0 || dy != 0) neighbour_max = std::max(neighbour_max, jti_0.at(ix + dx, iy + dy));
        }
    }
    c.push_back(between("jti_center_over_neighbours", center0 / neighbour_max, 1.0, 1e300));

    const auto lobe_change = [&](double ts, double ti) {
        const double a = sample(jti_0, ts, ti);
        const double b = sample(jti_pi, ts, ti);
        return std::abs(a - b) / std::max(a, b);
    };
    c.push_back(between("jti_side_lobe_change_ls", lobe_change(-delays.tau_s, 0.0), 0.0, 1e-3));
    c.push_back(between("jti_side_lobe_change_sl", lobe_change(0.0, -delays.tau_i), 0.0, 1e-3));

    const double carrier0 = sample(jsi_0, state.omega_s0(), state.omega_i0());
    const double carrierpi = sample(jsi_pi, state.omega_s0(), state.omega_i0());
    c.push_back(between("jsi_comb_shift", carrierpi / carrier0, 0.0, 0.1));
    const double mass = jsi_0.integral() / jsi_before.integral();
    c.push_back(within("jsi_after_mass", mass / coincidence_rate(sum0, state), 1.0, 1e-4));

    r.outputs.add("jsi_before.csv", histogram_csv(jsi_before));
    r.outputs.add("jti_before.csv", histogram_csv(jti_before));
    r.outputs.add("jsi_after_sum0.csv", histogram_csv(jsi_0));
    r.outputs.add("jsi_after_sumpi.csv", histogram_csv(jsi_pi));
    r.outputs.add("jti_after_sum0.csv", histogram_csv(jti_0));
    r.outputs.add("jti_after_sumpi.csv", histogram_csv(jti_pi));
}

void run_fig4(ReproduceResult& r, const std::filesystem::path& dir, std::optional<std::uint64_t> seed) {
    const ExperimentConfig cfg = bundled(dir, "fig4.cfg");
    const FringeRun run = run_fringe(cfg, seed.value_or(cfg.require_detector().counts.seed));
    r.comparisons.push_back(between("visibility", run.fit.visibility, 0.83, 0.89));
    r.comparisons.push_back(between("model_visibility", run.expected_visibility, 0.83, 0.89));
    r.comparisons.push_back(between("singles_modulation", run.singles_modulation, 0.0, 1e-12));
    r.notes.push_back("fitted visibility " + format_number(run.fit.visibility) + " +- " +
                      format_number(run.fit.err_visibility) + ", published 0.853 to 0.854");
    r.notes.push_back("model visibility without background " + format_number(run.intrinsic_visibility) +
                      ", peak over background " + format_number(run.snr));
    add_fringe_outputs(r.outputs, run);
}

}  // namespace

bool ReproduceResult::passed() const {
    return std::all_of(comparisons.begin(), comparisons.end(), [](const Comparison& c) { return c.pass; });
}

bool is_reproduce_target(std::string_view target) {
    return std::find(kReproduceTargets.begin(), kReproduceTargets.end(), target) != kReproduceTargets.end();
}

std::filesystem::path default_config_dir() {
    if (const char* env = std::getenv("FRANSON_CONFIG_DIR"); env != nullptr && *env != '\0') return env;
    return FRANSON_CONFIG_DIR;
}

ReproduceResult reproduce(std::string_view target, const std::filesystem::path& config_dir,
                          std::optional<std::uint64_t> seed) {
    ReproduceResult r;
    r.target = std::string(target);
    if (target == "table1") {
        run_table1(r, config_dir);
    } else if (target == "table2") {
        run_table2(r);
    } else if (target == "fig3") {
        run_fig3(r, config_dir);
    } else if (target == "fig4") {
        run_fig4(r, config_dir, seed);
    } else {
        throw std::invalid_argument("unknown target '" + std::string(target) + "'");
    }
    std::string csv = "name,value,low,high,pass\n";
    for (const auto& c : r.comparisons) {
        csv += c.name + "," + format_number(c.value) + "," + format_number(c.low) + "," + format_number(c.high) + "," +
               (c.pass ? "1" : "0") + "\n";
    }
    r.outputs.add("comparison.csv", csv);
    return r;
}

void print_reproduce(std::ostream& out, const ReproduceResult& result) {
    for (const auto& c : result.comparisons) {
        out << (c.pass ? "PASS " : "FAIL ") << result.target << ' ' << c.name << " = " << format_number(c.value)
            << " in [" << format_number(c.low) << ", " << format_number(c.high) << "]\n";
    }
    for (const auto& n : result.notes) out << "NOTE " << result.target << ' ' << n << '\n';
    out << (result.passed() ? "PASS " : "FAIL ") << result.target << '\n';
}

}  // namespace franson::app
