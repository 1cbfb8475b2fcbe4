#include "franson/app/pipelines.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <limits>
#include <sstream>
#include <system_error>

namespace franson::app {

void OutputBundle::add(std::string name, std::string content) {
    files_.emplace_back(std::move(name), std::move(content));
}

const std::string* OutputBundle::find(const std::string& name) const {
    for (const auto& [n, content] : files_) {
        if (n == name) return &content;
    }
    return nullptr;
}

void OutputBundle::commit(const std::filesystem::path& dir) const {
    check_output_dir(dir);
    std::error_code ec;
    std::filesystem::create_directories(dir, ec);
    if (ec) throw OutputError("cannot create output directory " + dir.string() + ": " + ec.message());
    for (const auto& [name, content] : files_) {
        const auto path = dir / name;
        std::ofstream out(path, std::ios::binary | std::ios::trunc);
        out << content;
        out.close();
        if (!out) throw OutputError("cannot write " + path.string());
    }
}

void check_output_dir(const std::filesystem::path& dir) {
    std::error_code ec;
    const auto status = std::filesystem::status(dir, ec);
    if (std::filesystem::exists(status) && !std::filesystem::is_directory(status))
        throw OutputError("output path " + dir.string() + " exists and is not a directory");
}

std::string format_number(double v) {
    char buf[64];
    const auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
    return ec == std::errc() ? std::string(buf, ptr) : std::string("nan");
}

std::string histogram_csv(const Histogram2D& map) {
    std::ostringstream out;
    write_histogram_csv(out, map);
    return out.str();
}

std::vector<NamedMap> simulate_maps(const ExperimentConfig& cfg) {
    const GaussianBiphoton& state = cfg.require_source().state;
    const FransonBlock& fr = cfg.require_franson();
    const ScanBlock scan = cfg.scan_or_default();
    ResponseModel response;
    std::optional<double> peak;
    if (cfg.detector) {
        response = cfg.detector->response;
        if (cfg.detector->counts.pair_rate_peak > 0.0) peak = cfg.detector->counts.pair_rate_peak;
    }
    const FransonSettings after = fr.settings(state);
    const FransonSettings shifted{after.arm_s,
                                  InterferometerArm(after.arm_i.tau(), after.arm_i.phi() + kPi)};

    std::vector<NamedMap> maps;
    const auto render = [&](MapKind kind, const std::string& prefix) {
        const ScanGrid grid = ScanGrid::around(kind, state, after, scan.points, scan.span);
        maps.push_back({prefix + "_before", expected_scan(kind, state, FransonSettings::identity(), response, grid, peak)});
        maps.push_back({prefix + "_after", expected_scan(kind, state, after, response, grid, peak)});
        maps.push_back({prefix + "_after_shifted", expected_scan(kind, state, shifted, response, grid, peak)});
    };
    if (scan.kind != ScanKind::Jti) render(MapKind::Jsi, "jsi");
    if (scan.kind != ScanKind::Jsi) render(MapKind::Jti, "jti");
    return maps;
}

namespace {

std::vector<double> phase_grid(std::size_t steps) {
    std::vector<double> phases(steps);
    for (std::size_t k = 0; k < steps; ++k) phases[k] = kTwoPi * static_cast<double>(k) / static_cast<double>(steps);
    return phases;
}

std::optional<std::array<double, 2>> configured_gates(const ScanBlock& scan) {
    if (scan.gate_s && scan.gate_i) return std::array<double, 2>{*scan.gate_s, *scan.gate_i};
    return std::nullopt;
}

std::string line(const std::string& key, double v) { return key + "=" + format_number(v) + "\n"; }

}  // namespace

FringeRun run_fringe(const ExperimentConfig& cfg, std::uint64_t seed) {
    const GaussianBiphoton& state = cfg.require_source().state;
    const FransonDelays delays = cfg.require_franson().delays();
    const DetectorBlock& det = cfg.require_detector();
    const ScanBlock scan = cfg.scan_or_default();
    CountModel counts = det.counts;
    counts.seed = seed;
    const auto gates = configured_gates(scan);

    FringeRun run;
    const std::vector<double> phases = phase_grid(scan.phase_steps);
    run.records = phase_fringe_scan(state, delays, phases, phases, counts, det.response, gates);
    run.bins = bin_by_phase_sum(run.records, scan.phase_bins, Channel::Coincidence);
    run.fit = fit_fringe(run.bins);

    const RateCalculator calc(state, delays, counts, det.response, gates);
    const double hi = calc.at(0.0, 0.0).coincidence - counts.background_rate;
    const double lo = calc.at(kPi, 0.0).coincidence - counts.background_rate;
    const double c0 = 0.5 * (hi + lo);
    run.intrinsic_visibility = c0 > 0.0 ? (hi - lo) / (hi + lo) : 0.0;
    run.expected_visibility = background_visibility(run.intrinsic_visibility, c0, counts.background_rate);
    run.snr = counts.background_rate > 0.0 ? peak_snr(run.intrinsic_visibility, c0, counts.background_rate)
                                           : std::numeric_limits<double>::infinity();

    double smin = std::numeric_limits<double>::infinity();
    double smax = -smin;
    double ssum = 0.0;
    for (const auto& r : run.records) {
        smin = std::min(smin, r.expected_ss);
        smax = std::max(smax, r.expected_ss);
        ssum += r.expected_ss;
    }
    const double smean = run.records.empty() ? 0.0 : ssum / static_cast<double>(run.records.size());
    run.singles_modulation = smean > 0.0 ? (smax - smin) / smean : 0.0;
    return run;
}

void add_fringe_outputs(OutputBundle& bundle, const FringeRun& run) {
    std::ostringstream records;
    write_count_records_csv(records, run.records);
    bundle.add("fringe_counts.csv", records.str());

    std::ostringstream bins;
    bins << "phase_sum,counts,dwell_s,rate,rate_err\n";
    for (const auto& b : run.bins) {
        bins << format_number(b.phase) << ',' << format_number(b.counts) << ',' << format_number(b.dwell) << ','
             << format_number(b.rate) << ',' << format_number(b.rate_err) << '\n';
    }
    bundle.add("fringe_bins.csv", bins.str());

    std::string report;
    report += line("visibility", run.fit.visibility);
    report += line("visibility_err", run.fit.err_visibility);
    report += line("c0", run.fit.c0);
    report += line("c0_err", run.fit.err_c0);
    report += line("phase0", run.fit.phase0);
    report += line("phase0_err", run.fit.err_phase0);
    report += line("model_visibility_no_background", run.intrinsic_visibility);
    report += line("model_visibility", run.expected_visibility);
    report += line("model_snr", run.snr);
    report += line("singles_modulation", run.singles_modulation);
    bundle.add("fringe_report.txt", report);

    std::string csv = "quantity,value,error\n";
    csv += "visibility," + format_number(run.fit.visibility) + "," + format_number(run.fit.err_visibility) + "\n";
    csv += "c0," + format_number(run.fit.c0) + "," + format_number(run.fit.err_c0) + "\n";
    csv += "phase0," + format_number(run.fit.phase0) + "," + format_number(run.fit.err_phase0) + "\n";
    bundle.add("fringe_report.csv", csv);
}

BellRun run_bell(const ExperimentConfig& cfg, std::uint64_t seed) {
    const GaussianBiphoton& state = cfg.require_source().state;
    const FransonDelays delays = cfg.require_franson().delays();
    const DetectorBlock& det = cfg.require_detector();
    CountModel counts = det.counts;
    counts.seed = seed;
    BellRun run;
    run.table = bell_experiment(state, delays, cfg.scan_or_default().bell, counts, det.response);
    run.result = evaluate_bell(to_count_table(run.table.counts()));
    return run;
}

std::string bell_table_csv(const CountTable& counts) {
    static const char* rows[4] = {"b+", "b-", "b'+", "b'-"};
    std::string out = "row,a+,a-,a'+,a'-\n";
    for (int r = 0; r < 4; ++r) {
        out += rows[r];
        for (int c = 0; c < 4; ++c) out += "," + format_number(counts[r][c]);
        out += "\n";
    }
    return out;
}

std::string bell_report_text(const BellResult& result, bool published) {
    static const char* names[4] = {"E_ab", "E_ab'", "E_a'b", "E_a'b'"};
    std::string out;
    for (int k = 0; k < 4; ++k) {
        out += line(names[k], result.correlators[k].value);
        out += line(std::string(names[k]) + "_err", result.correlators[k].error);
    }
    out += line("S", result.s);
    out += line("S_err", result.sigma_s);
    out += line("violation_sigmas", result.sigma_s > 0.0 ? (result.s - 2.0) / result.sigma_s : 0.0);
    if (published) {
        out += line("published_S", kPublishedBellS);
        out += line("published_S_err", kPublishedBellSigma);
        out += line("difference_from_published", result.s - kPublishedBellS);
        out += "note=direct evaluation of the correlators on the count table gives S=" + format_number(result.s) +
               ", not the published " + format_number(kPublishedBellS) + "\n";
    }
    return out;
}

FitReport fit_map(const Histogram2D& map, double response_x, double response_y) {
    FitReport r;
    r.temporal = map.x().unit == "ps";
    r.measured = fit_gaussian_2d(map);
    r.diagonal = diagonal_widths(map);
    r.heralded = heralded_widths(map, r.measured);
    r.response_x = response_x;
    r.response_y = response_y;
    r.deconvolved = deconvolve_covariance(r.measured, response_x, response_y);
    r.deconvolved_widths = width_summary(r.deconvolved.sigma_x, r.deconvolved.sigma_y, r.deconvolved.rho);
    return r;
}

namespace {

std::vector<std::array<std::string, 3>> fit_rows(const FitReport& r) {
    const auto row = [](const std::string& k, double v, double e) {
        return std::array<std::string, 3>{k, format_number(v), format_number(e)};
    };
    const GaussianFit2D& m = r.measured;
    const GaussianFit2D& d = r.deconvolved;
    return {
        row("center_x", m.center_x, m.err_center_x),
        row("center_y", m.center_y, m.err_center_y),
        row("marginal_x", m.sigma_x, m.err_sigma_x),
        row("marginal_y", m.sigma_y, m.err_sigma_y),
        row("correlation", m.rho, m.err_rho),
        row("amplitude", m.amplitude, m.err_amplitude),
        row("offset", m.offset, m.err_offset),
        row("diagonal_plus", r.diagonal.plus, r.diagonal.err_plus),
        row("diagonal_minus", r.diagonal.minus, r.diagonal.err_minus),
        row("heralded_x", r.heralded.x, r.heralded.err_x),
        row("heralded_y", r.heralded.y, r.heralded.err_y),
        row("response_x", r.response_x, 0.0),
        row("response_y", r.response_y, 0.0),
        row("deconvolved_marginal_x", d.sigma_x, d.err_sigma_x),
        row("deconvolved_marginal_y", d.sigma_y, d.err_sigma_y),
        row("deconvolved_correlation", d.rho, d.err_rho),
        row("deconvolved_heralded_x", r.deconvolved_widths.heralded_s, 0.0),
        row("deconvolved_heralded_y", r.deconvolved_widths.heralded_i, 0.0),
        row("deconvolved_diagonal_plus", r.deconvolved_widths.diag_plus, 0.0),
        row("deconvolved_diagonal_minus", r.deconvolved_widths.diag_minus, 0.0),
    };
}

}  // namespace

std::string fit_report_text(const FitReport& report) {
    std::string out = std::string("domain=") + (report.temporal ? "temporal" : "spectral") + "\n";
    for (const auto& [k, v, e] : fit_rows(report)) out += k + "=" + v + "\n" + k + "_err=" + e + "\n";
    if (report.deconvolved.clamped) out += line("deconvolved_correlation_unclamped", report.deconvolved.rho_unclamped);
    return out;
}

std::string fit_report_csv(const FitReport& report) {
    std::string out = "quantity,value,error\n";
    for (const auto& [k, v, e] : fit_rows(report)) out += k + "," + v + "," + e + "\n";
    return out;
}

}  // namespace franson::app
