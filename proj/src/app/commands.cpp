#include "franson/app/commands.hpp"

#include <CLI11.hpp>

#include <cstdint>
#include <fstream>
#include <optional>
#include <ostream>
#include <sstream>
#include <string>

#include "franson/app/config.hpp"
#include "franson/app/pipelines.hpp"
#include "franson/app/reproduce.hpp"

namespace franson::app {

namespace {

struct CommonOptions {
    std::string config;
    std::optional<std::uint64_t> seed;
    std::string out;
    std::string format = "csv";
};

void add_common(CLI::App* cmd, CommonOptions& opts, bool with_config) {
    if (with_config) cmd->add_option("--config", opts.config, "Experiment config file");
    cmd->add_option("--seed", opts.seed, "Random seed, overrides the config");
    cmd->add_option("--out", opts.out, "Output directory, overrides the config");
    cmd->add_option("--format", opts.format, "Output format")->check(CLI::IsMember({"csv"}));
}

ExperimentConfig load_required(const CommonOptions& opts) {
    if (opts.config.empty()) throw ConfigError("<command line>", 0, "--config is required");
    return load_config(opts.config);
}

std::filesystem::path output_dir(const CommonOptions& opts, const ExperimentConfig* cfg, const std::string& fallback) {
    if (!opts.out.empty()) return opts.out;
    if (cfg != nullptr) return cfg->output.dir;
    return fallback;
}

void require_rates(const ExperimentConfig& cfg) {
    if (!(cfg.require_detector().counts.pair_rate_peak > 0.0))
        throw ConfigError(cfg.origin, 0, "[detector] pair_rate_peak must be positive for count simulations");
}

std::uint64_t seed_of(const CommonOptions& opts, const ExperimentConfig& cfg) {
    return opts.seed.value_or(cfg.require_detector().counts.seed);
}

int cmd_simulate(const CommonOptions& opts, std::ostream& out) {
    const ExperimentConfig cfg = load_required(opts);
    cfg.require_source();
    cfg.require_franson();
    const auto dir = output_dir(opts, &cfg, "out");
    check_output_dir(dir);
    OutputBundle bundle;
    for (const auto& m : simulate_maps(cfg)) bundle.add(m.name + ".csv", histogram_csv(m.map));
    bundle.commit(dir);
    for (const auto& [name, content] : bundle.files()) out << "wrote " << (dir / name).string() << '\n';
    return kExitOk;
}

int cmd_fringe(const CommonOptions& opts, std::ostream& out) {
    const ExperimentConfig cfg = load_required(opts);
    cfg.require_source();
    cfg.require_franson();
    require_rates(cfg);
    const auto dir = output_dir(opts, &cfg, "out");
    check_output_dir(dir);
    OutputBundle bundle;
    const FringeRun run = run_fringe(cfg, seed_of(opts, cfg));
    add_fringe_outputs(bundle, run);
    bundle.commit(dir);
    out << *bundle.find("fringe_report.txt");
    return kExitOk;
}

int cmd_bell(const CommonOptions& opts, bool table2, std::ostream& out) {
    OutputBundle bundle;
    std::filesystem::path dir;
    if (table2) {
        dir = output_dir(opts, nullptr, "out");
        check_output_dir(dir);
        const CountTable counts = measured_bell_counts();
        bundle.add("bell_table.csv", bell_table_csv(counts));
        bundle.add("bell_report.txt", bell_report_text(evaluate_bell(counts), true));
    } else {
        const ExperimentConfig cfg = load_required(opts);
        cfg.require_source();
        cfg.require_franson();
        require_rates(cfg);
        dir = output_dir(opts, &cfg, "out");
        check_output_dir(dir);
        const BellRun run = run_bell(cfg, seed_of(opts, cfg));
        std::ostringstream records;
        write_count_records_csv(records, run.table.records());
        bundle.add("bell_counts.csv", records.str());
        bundle.add("bell_table.csv", bell_table_csv(to_count_table(run.table.counts())));
        bundle.add("bell_report.txt", bell_report_text(run.result, false));
    }
    bundle.commit(dir);
    out << *bundle.find("bell_report.txt");
    return kExitOk;
}

int cmd_fit(const CommonOptions& opts, const std::string& input, std::optional<double> rx, std::optional<double> ry,
            std::ostream& out) {
    std::optional<ExperimentConfig> cfg;
    if (!opts.config.empty()) cfg = load_config(opts.config);
    if (!opts.out.empty()) check_output_dir(opts.out);
    std::ifstream in(input);
    if (!in) throw ConfigError(input, 0, "cannot open input file");
    const Histogram2D map = read_histogram_csv(in);
    const bool temporal = map.x().unit == "ps";
    double resp_x = 0.0;
    double resp_y = 0.0;
    if (cfg && cfg->detector) {
        const ResponseModel& r = cfg->detector->response;
        resp_x = temporal ? r.gate_sigma_s : r.spec_sigma_s;
        resp_y = temporal ? r.gate_sigma_i : r.spec_sigma_i;
    }
    resp_x = rx.value_or(resp_x);
    resp_y = ry.value_or(resp_y);
    if (resp_x < 0.0 || resp_y < 0.0) throw ConfigError("<command line>", 0, "response widths must be >= 0");
    const FitReport report = fit_map(map, resp_x, resp_y);
    OutputBundle bundle;
    bundle.add("fit_report.txt", fit_report_text(report));
    bundle.add("fit_report.csv", fit_report_csv(report));
    if (!opts.out.empty()) bundle.commit(opts.out);
    out << *bundle.find("fit_report.txt");
    return kExitOk;
}

int cmd_reproduce(const CommonOptions& opts, const std::string& target, const std::string& config_dir,
                  std::ostream& out, std::ostream& err) {
    if (!is_reproduce_target(target)) {
        err << "error: unknown target '" << target << "'; valid targets:";
        for (const auto t : kReproduceTargets) err << ' ' << t;
        err << '\n';
        return kExitUsage;
    }
    const std::filesystem::path dir = opts.out.empty() ? std::filesystem::path("reproduce_out") / target : std::filesystem::path(opts.out);
    check_output_dir(dir);
    const ReproduceResult result =
        reproduce(target, config_dir.empty() ? default_config_dir() : std::filesystem::path(config_dir), opts.seed);
    result.outputs.commit(dir);
    print_reproduce(out, result);
    return result.passed() ? kExitOk : kExitComparisonFailed;
}

}  // namespace

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
    CLI::App app{"Ultrafast Franson interferometry toolkit"};
    app.require_subcommand(1);

    CommonOptions sim_opts;
    auto* simulate = app.add_subcommand("simulate", "Render joint spectral/temporal maps before and after the interferometer");
    add_common(simulate, sim_opts, true);

    CommonOptions fringe_opts;
    auto* fringe = app.add_subcommand("fringe", "Simulate a phase scan and fit the coincidence fringe");
    add_common(fringe, fringe_opts, true);

    CommonOptions bell_opts;
    bool table2 = false;
    auto* bell = app.add_subcommand("bell", "Simulate or replay a CHSH-Bell measurement");
    add_common(bell, bell_opts, true);
    bell->add_flag("--table2", table2, "Analyse the bundled measured count table");

    CommonOptions fit_opts;
    std::string input;
    std::optional<double> resp_x;
    std::optional<double> resp_y;
    auto* fit = app.add_subcommand("fit", "Fit a joint-intensity map and deconvolve the response");
    add_common(fit, fit_opts, true);
    fit->add_option("--input", input, "Histogram CSV")->required();
    fit->add_option("--response-x", resp_x, "Response s.d. on the x axis");
    fit->add_option("--response-y", resp_y, "Response s.d. on the y axis");

    CommonOptions rep_opts;
    std::string target;
    std::string config_dir;
    auto* rep = app.add_subcommand("reproduce", "Run a bundled target and compare with expected values");
    add_common(rep, rep_opts, false);
    rep->add_option("target", target, "table1 | table2 | fig3 | fig4")->required();
    rep->add_option("--config-dir", config_dir, "Directory holding the bundled configs");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e, out, err);
        return code == 0 ? kExitOk : kExitUsage;
    }

    try {
        if (simulate->parsed()) return cmd_simulate(sim_opts, out);
        if (fringe->parsed()) return cmd_fringe(fringe_opts, out);
        if (bell->parsed()) return cmd_bell(bell_opts, table2, out);
        if (fit->parsed()) return cmd_fit(fit_opts, input, resp_x, resp_y, out);
        if (rep->parsed()) return cmd_reproduce(rep_opts, target, config_dir, out, err);
    } catch (const ConfigError& e) {
        err << "config error: " << e.what() << '\n';
        return kExitUsage;
    } catch (const CsvError& e) {
        err << "input error: " << e.what() << '\n';
        return kExitUsage;
    } catch (const OutputError& e) {
        err << "output error: " << e.what() << '\n';
        return kExitUsage;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << '\n';
        return kExitComparisonFailed;
    }
    return kExitUsage;
}

}  // namespace franson::app
