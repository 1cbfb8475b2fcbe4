// Bundled reproduction targets: each runs a pipeline on the bundled configs
// and compares the results with expected values and tolerances.

#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "franson/app/pipelines.hpp"

namespace franson::app {

inline constexpr std::array<std::string_view, 4> kReproduceTargets = {"table1", "table2", "fig3", "fig4"};

struct Comparison {
    std::string name;
    double value = 0.0;
    double low = 0.0;   // inclusive bounds of the accepted interval
    double high = 0.0;
    bool pass = false;
};

struct ReproduceResult {
    std::string target;
    std::vector<Comparison> comparisons;
    std::vector<std::string> notes;  // informational, never affect pass/fail
    OutputBundle outputs;

    bool passed() const;
};

bool is_reproduce_target(std::string_view target);

/// Config directory: FRANSON_CONFIG_DIR from the environment, else the
/// directory baked in at build time.
std::filesystem::path default_config_dir();

/// Throws ConfigError for a broken bundled config and std::invalid_argument
/// for an unknown target.
ReproduceResult reproduce(std::string_view target, const std::filesystem::path& config_dir,
                          std::optional<std::uint64_t> seed);

/// One line per comparison, `PASS` or `FAIL`, then the notes.
void print_reproduce(std::ostream& out, const ReproduceResult& result);

}  // namespace franson::app
