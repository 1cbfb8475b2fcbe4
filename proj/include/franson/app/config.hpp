// Experiment configuration: `[section]` headers followed by `key = value`
// lines. `#` starts a comment. Angles accept multiples of pi such as `pi/4`,
// `7pi/4`, `3*pi/2` or `-pi`.

#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>

#include "franson/biphoton.hpp"
#include "franson/detector.hpp"

namespace franson::app {

class ConfigError : public std::runtime_error {
public:
    ConfigError(const std::string& origin, std::size_t line, const std::string& what);
    std::size_t line() const { return line_; }

private:
    std::size_t line_;
};

/// Number or rational multiple of pi.
double parse_angle(const std::string& text);

struct SourceBlock {
    GaussianBiphoton state{0.0, 0.0, 1.0, 1.0, 0.0};
};

struct FransonBlock {
    double tau_s = 0.0;
    double tau_i = 0.0;
    double phi_s = 0.0;
    double phi_i = 0.0;
    bool phases_from_fringe = true;  // phi measured from the constructive fringe

    FransonSettings settings(const GaussianBiphoton& state) const;
    FransonDelays delays() const { return {tau_s, tau_i}; }
};

struct DetectorBlock {
    ResponseModel response;
    CountModel counts;
};

enum class ScanKind { Jsi, Jti, Both };

struct ScanBlock {
    ScanKind kind = ScanKind::Both;
    std::size_t points = 601;
    double span = 6.0;
    std::size_t phase_steps = 16;
    std::size_t phase_bins = 16;
    BellSettings bell;
    std::optional<double> gate_s;
    std::optional<double> gate_i;
};

struct OutputBlock {
    std::string dir = "out";
    std::string format = "csv";
};

struct ExperimentConfig {
    std::string origin;
    std::optional<SourceBlock> source;
    std::optional<FransonBlock> franson;
    std::optional<DetectorBlock> detector;
    std::optional<ScanBlock> scan;
    OutputBlock output;

    const SourceBlock& require_source() const;
    const FransonBlock& require_franson() const;
    const DetectorBlock& require_detector() const;
    ScanBlock scan_or_default() const { return scan.value_or(ScanBlock{}); }
};

/// Throws ConfigError naming the origin and line of the first problem.
ExperimentConfig parse_config(std::istream& in, const std::string& origin);
ExperimentConfig load_config(const std::filesystem::path& path);

}  // namespace franson::app
