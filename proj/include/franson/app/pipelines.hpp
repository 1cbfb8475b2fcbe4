// Pipelines shared by the command-line commands and the reproduce targets,
// and the in-memory output bundle they write through.

#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "franson/app/config.hpp"
#include "franson/detector.hpp"
#include "franson/fit.hpp"
#include "franson/histogram.hpp"

namespace franson::app {

class OutputError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Files held in memory until a command has finished computing, so a failed
/// command leaves nothing behind.
class OutputBundle {
public:
    void add(std::string name, std::string content);
    const std::vector<std::pair<std::string, std::string>>& files() const { return files_; }
    const std::string* find(const std::string& name) const;

    /// Throws OutputError when the directory cannot be created or a file
    /// cannot be written.
    void commit(const std::filesystem::path& dir) const;

private:
    std::vector<std::pair<std::string, std::string>> files_;
};

/// Throws OutputError if `dir` exists and is not a directory.
void check_output_dir(const std::filesystem::path& dir);

/// Shortest form that reads back to the same double.
std::string format_number(double v);

std::string histogram_csv(const Histogram2D& map);

struct NamedMap {
    std::string name;
    Histogram2D map;
};

/// Before, after and after with the idler phase advanced by pi, for each
/// requested map kind. Values are relative intensities unless the detector
/// block sets a pair rate.
std::vector<NamedMap> simulate_maps(const ExperimentConfig& cfg);

struct FringeRun {
    std::vector<CountRecord> records;
    std::vector<PhaseBin> bins;
    FringeFit fit;
    double intrinsic_visibility = 0.0;  // gated model, background excluded
    double expected_visibility = 0.0;   // gated model with background
    double snr = 0.0;                   // fringe peak over background
    double singles_modulation = 0.0;    // (max - min) / mean of the expected singles
};

FringeRun run_fringe(const ExperimentConfig& cfg, std::uint64_t seed);
void add_fringe_outputs(OutputBundle& bundle, const FringeRun& run);

struct BellRun {
    BellTable table;
    BellResult result;
};

BellRun run_bell(const ExperimentConfig& cfg, std::uint64_t seed);
std::string bell_table_csv(const CountTable& counts);
/// Flat key=value report; `published` adds the published headline value and
/// the difference from it.
std::string bell_report_text(const BellResult& result, bool published);

struct FitReport {
    bool temporal = false;
    GaussianFit2D measured;
    DiagonalWidths diagonal;
    HeraldedWidths heralded;
    double response_x = 0.0;
    double response_y = 0.0;
    GaussianFit2D deconvolved;
    WidthSummary deconvolved_widths;
};

FitReport fit_map(const Histogram2D& map, double response_x, double response_y);
std::string fit_report_text(const FitReport& report);
std::string fit_report_csv(const FitReport& report);

}  // namespace franson::app
