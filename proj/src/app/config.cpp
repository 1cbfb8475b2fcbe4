#include "franson/app/config.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <fstream>
#include <functional>
#include <set>
#include <sstream>
#include <vector>

namespace franson::app {

namespace {

std::string trim(std::string_view s) {
    const auto first = s.find_first_not_of(" \t\r");
    if (first == std::string_view::npos) return {};
    const auto last = s.find_last_not_of(" \t\r");
    return std::string(s.substr(first, last - first + 1));
}

std::string lower(std::string s) {
    std::transform(s.begin(), s.end(), s.begin(), [](unsigned char c) { return std::tolower(c); });
    return s;
}

bool parse_number(std::string_view text, double& out) {
    const std::string s = trim(text);
    if (s.empty()) return false;
    const char* begin = s.data();
    const char* end = s.data() + s.size();
    if (*begin == '+') ++begin;
    const auto [ptr, ec] = std::from_chars(begin, end, out);
    return ec == std::errc() && ptr == end && std::isfinite(out);
}

struct Entry {
    std::string value;
    std::size_t line = 0;
};

struct Section {
    std::size_t line = 0;
    std::map<std::string, Entry> entries;
};

// Consumes recognised keys and reports what is left as unknown.
class SectionReader {
public:
    SectionReader(const std::string& origin, const std::string& name, const Section& section)
        : origin_(origin), name_(name), section_(section) {}

    bool has(const std::string& key) const { return section_.entries.count(key) != 0; }

    std::size_t line_of(const std::string& key) const {
        const auto it = section_.entries.find(key);
        return it == section_.entries.end() ? section_.line : it->second.line;
    }

    [[noreturn]] void fail(const std::string& key, const std::string& what) const {
        throw ConfigError(origin_, line_of(key), "[" + name_ + "] " + what);
    }

    std::optional<double> number(const std::string& key) {
        const auto it = section_.entries.find(key);
        if (it == section_.entries.end()) return std::nullopt;
        used_.insert(key);
        double v = 0.0;
        if (!parse_number(it->second.value, v)) fail(key, key + ": expected a number, got '" + it->second.value + "'");
        return v;
    }

    std::optional<double> angle(const std::string& key) {
        const auto it = section_.entries.find(key);
        if (it == section_.entries.end()) return std::nullopt;
        used_.insert(key);
        try {
            return parse_angle(it->second.value);
        } catch (const std::invalid_argument&) {
            fail(key, key + ": expected an angle, got '" + it->second.value + "'");
        }
    }

    std::optional<std::uint64_t> integer(const std::string& key) {
        const auto it = section_.entries.find(key);
        if (it == section_.entries.end()) return std::nullopt;
        used_.insert(key);
        const std::string& s = it->second.value;
        std::uint64_t v = 0;
        const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
        if (ec != std::errc() || ptr != s.data() + s.size())
            fail(key, key + ": expected a non-negative integer, got '" + s + "'");
        return v;
    }

    std::optional<std::string> text(const std::string& key) {
        const auto it = section_.entries.find(key);
        if (it == section_.entries.end()) return std::nullopt;
        used_.insert(key);
        return it->second.value;
    }

    double require_number(const std::string& key) {
        const auto v = number(key);
        if (!v) fail(key, "missing key '" + key + "'");
        return *v;
    }

    void finish() const {
        for (const auto& [key, entry] : section_.entries) {
            if (!used_.count(key)) throw ConfigError(origin_, entry.line, "[" + name_ + "] unknown key '" + key + "'");
        }
    }

private:
    const std::string& origin_;
    std::string name_;
    const Section& section_;
    std::set<std::string> used_;
};

double carrier(SectionReader& r, const std::string& omega_key, const std::string& wavelength_key) {
    const auto omega = r.number(omega_key);
    const auto lambda = r.number(wavelength_key);
    if (omega && lambda) r.fail(wavelength_key, "give either " + omega_key + " or " + wavelength_key + ", not both");
    if (lambda) {
        if (*lambda <= 0.0) r.fail(wavelength_key, wavelength_key + " must be positive");
        return wavelength_to_angfreq(*lambda);
    }
    return omega.value_or(0.0);
}

SourceBlock read_source(SectionReader& r) {
    const double ws = carrier(r, "omega_s0", "wavelength_s");
    const double wi = carrier(r, "omega_i0", "wavelength_i");
    const bool spectral = r.has("sigma_s") || r.has("sigma_i") || r.has("rho");
    const bool temporal = r.has("dt_s") || r.has("dt_i") || r.has("rho_t");
    if (spectral && temporal) r.fail("dt_s", "give spectral (sigma_s, sigma_i, rho) or temporal (dt_s, dt_i, rho_t) widths, not both");
    if (!spectral && !temporal) r.fail("", "missing widths: sigma_s, sigma_i, rho or dt_s, dt_i, rho_t");
    try {
        if (spectral) {
            const double ss = r.require_number("sigma_s");
            const double si = r.require_number("sigma_i");
            const double rho = r.require_number("rho");
            return SourceBlock{GaussianBiphoton(ws, wi, ss, si, rho)};
        }
        const double ts = r.require_number("dt_s");
        const double ti = r.require_number("dt_i");
        const double rho_t = r.require_number("rho_t");
        return SourceBlock{GaussianBiphoton::from_temporal(ws, wi, ts, ti, rho_t)};
    } catch (const std::invalid_argument& e) {
        r.fail(spectral ? "sigma_s" : "dt_s", e.what());
    }
}

FransonBlock read_franson(SectionReader& r) {
    FransonBlock b;
    b.tau_s = r.require_number("tau_s");
    b.tau_i = r.require_number("tau_i");
    if (b.tau_s < 0.0) r.fail("tau_s", "tau_s must be non-negative");
    if (b.tau_i < 0.0) r.fail("tau_i", "tau_i must be non-negative");
    const bool phases = r.has("phi_s") || r.has("phi_i");
    const bool plates = r.has("hwp_s") || r.has("hwp_i");
    if (phases && plates) r.fail("hwp_s", "give phases (phi_s, phi_i) or plate angles (hwp_s, hwp_i), not both");
    if (plates) {
        b.phi_s = 4.0 * r.angle("hwp_s").value_or(0.0);
        b.phi_i = 4.0 * r.angle("hwp_i").value_or(0.0);
    } else {
        b.phi_s = r.angle("phi_s").value_or(0.0);
        b.phi_i = r.angle("phi_i").value_or(0.0);
    }
    if (const auto ref = r.text("phase_reference")) {
        const std::string v = lower(*ref);
        if (v == "fringe") {
            b.phases_from_fringe = true;
        } else if (v == "applied") {
            b.phases_from_fringe = false;
        } else {
            r.fail("phase_reference", "phase_reference must be 'fringe' or 'applied'");
        }
    }
    return b;
}

DetectorBlock read_detector(SectionReader& r) {
    DetectorBlock d;
    d.response.gate_sigma_s = r.number("gate_sigma_s").value_or(0.0);
    d.response.gate_sigma_i = r.number("gate_sigma_i").value_or(0.0);
    d.response.spec_sigma_s = r.number("spec_sigma_s").value_or(0.0);
    d.response.spec_sigma_i = r.number("spec_sigma_i").value_or(0.0);
    d.counts.pair_rate_peak = r.number("pair_rate_peak").value_or(0.0);
    d.counts.background_rate = r.number("background_rate").value_or(0.0);
    d.counts.singles_rates = {r.number("singles_rate_s").value_or(0.0), r.number("singles_rate_i").value_or(0.0)};
    d.counts.singles_background = {r.number("singles_background_s").value_or(0.0),
                                   r.number("singles_background_i").value_or(0.0)};
    d.counts.dwell = r.number("dwell").value_or(1.0);
    d.counts.seed = r.integer("seed").value_or(0);
    if (const auto ref = r.text("rate_reference")) {
        const std::string v = lower(*ref);
        if (v == "source_peak") {
            d.counts.reference = RateReference::SourcePeak;
        } else if (v == "fringe_peak") {
            d.counts.reference = RateReference::FringePeak;
        } else {
            r.fail("rate_reference", "rate_reference must be 'source_peak' or 'fringe_peak'");
        }
    }
    try {
        d.response.validate();
    } catch (const std::invalid_argument& e) {
        r.fail("gate_sigma_s", e.what());
    }
    if (!(d.counts.dwell > 0.0)) r.fail("dwell", "dwell must be positive");
    try {
        d.counts.validate();
    } catch (const std::invalid_argument& e) {
        r.fail("pair_rate_peak", e.what());
    }
    return d;
}

ScanBlock read_scan(SectionReader& r) {
    ScanBlock s;
    if (const auto kind = r.text("kind")) {
        const std::string v = lower(*kind);
        if (v == "jsi") {
            s.kind = ScanKind::Jsi;
        } else if (v == "jti") {
            s.kind = ScanKind::Jti;
        } else if (v == "both") {
            s.kind = ScanKind::Both;
        } else {
            r.fail("kind", "kind must be 'jsi', 'jti' or 'both'");
        }
    }
    s.points = r.integer("points").value_or(s.points);
    if (s.points < 8 || s.points > 4096) r.fail("points", "points must lie in [8, 4096]");
    s.span = r.number("span").value_or(s.span);
    if (!(s.span > 0.0)) r.fail("span", "span must be positive");
    s.phase_steps = r.integer("phase_steps").value_or(s.phase_steps);
    if (s.phase_steps < 1 || s.phase_steps > 4096) r.fail("phase_steps", "phase_steps must lie in [1, 4096]");
    s.phase_bins = r.integer("phase_bins").value_or(s.phase_bins);
    if (s.phase_bins < 5 || s.phase_bins > 4096) r.fail("phase_bins", "phase_bins must lie in [5, 4096]");
    s.bell.a = r.angle("a").value_or(s.bell.a);
    s.bell.a_prime = r.angle("a_prime").value_or(s.bell.a_prime);
    s.bell.b = r.angle("b").value_or(s.bell.b);
    s.bell.b_prime = r.angle("b_prime").value_or(s.bell.b_prime);
    s.gate_s = r.number("gate_s");
    s.gate_i = r.number("gate_i");
    if (s.gate_s.has_value() != s.gate_i.has_value()) r.fail("gate_s", "give both gate_s and gate_i or neither");
    return s;
}

OutputBlock read_output(SectionReader& r) {
    OutputBlock o;
    o.dir = r.text("dir").value_or(o.dir);
    if (o.dir.empty()) r.fail("dir", "dir must not be empty");
    o.format = lower(r.text("format").value_or(o.format));
    if (o.format != "csv") r.fail("format", "format must be 'csv'");
    return o;
}

}  // namespace

ConfigError::ConfigError(const std::string& origin, std::size_t line, const std::string& what)
    : std::runtime_error(origin + ":" + std::to_string(line) + ": " + what), line_(line) {}

double parse_angle(const std::string& text) {
    std::string s;
    for (const char c : text) {
        if (!std::isspace(static_cast<unsigned char>(c))) s += static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
    }
    double v = 0.0;
    if (parse_number(s, v)) return v;
    const auto pos = s.find("pi");
    if (pos == std::string::npos || s.find("pi", pos + 2) != std::string::npos)
        throw std::invalid_argument("not an angle: " + text);
    std::string coeff = s.substr(0, pos);
    std::string rest = s.substr(pos + 2);
    if (!coeff.empty() && coeff.back() == '*') coeff.pop_back();
    double k = 1.0;
    if (coeff.empty() || coeff == "+") {
        k = 1.0;
    } else if (coeff == "-") {
        k = -1.0;
    } else if (!parse_number(coeff, k)) {
        throw std::invalid_argument("not an angle: " + text);
    }
    double d = 1.0;
    if (!rest.empty()) {
        if (rest.front() != '/' || !parse_number(rest.substr(1), d) || d == 0.0)
            throw std::invalid_argument("not an angle: " + text);
    }
    return k * kPi / d;
}

FransonSettings FransonBlock::settings(const GaussianBiphoton& state) const {
    if (phases_from_fringe) return delays().settings(state, phi_s, phi_i);
    return {InterferometerArm(tau_s, phi_s), InterferometerArm(tau_i, phi_i)};
}

const SourceBlock& ExperimentConfig::require_source() const {
    if (!source) throw ConfigError(origin, 0, "missing [source] block");
    return *source;
}

const FransonBlock& ExperimentConfig::require_franson() const {
    if (!franson) throw ConfigError(origin, 0, "missing [franson] block");
    return *franson;
}

const DetectorBlock& ExperimentConfig::require_detector() const {
    if (!detector) throw ConfigError(origin, 0, "missing [detector] block");
    return *detector;
}

ExperimentConfig parse_config(std::istream& in, const std::string& origin) {
    std::map<std::string, Section> sections;
    std::vector<std::string> order;
    Section* current = nullptr;
    std::string current_name;
    std::string raw;
    std::size_t line = 0;
    while (std::getline(in, raw)) {
        ++line;
        const auto hash = raw.find('#');
        const std::string content = trim(std::string_view(raw).substr(0, hash));
        if (content.empty()) continue;
        if (content.front() == '[') {
            if (content.back() != ']') throw ConfigError(origin, line, "malformed section header '" + content + "'");
            current_name = lower(trim(std::string_view(content).substr(1, content.size() - 2)));
            static const std::set<std::string> known = {"source", "franson", "detector", "scan", "output"};
            if (!known.count(current_name)) throw ConfigError(origin, line, "unknown section [" + current_name + "]");
            if (sections.count(current_name)) throw ConfigError(origin, line, "duplicate section [" + current_name + "]");
            current = &sections[current_name];
            current->line = line;
            order.push_back(current_name);
            continue;
        }
        const auto eq = content.find('=');
        if (eq == std::string::npos) throw ConfigError(origin, line, "expected 'key = value', got '" + content + "'");
        if (current == nullptr) throw ConfigError(origin, line, "key outside of any [section]");
        const std::string key = lower(trim(std::string_view(content).substr(0, eq)));
        const std::string value = trim(std::string_view(content).substr(eq + 1));
        if (key.empty()) throw ConfigError(origin, line, "empty key");
        if (value.empty()) throw ConfigError(origin, line, "empty value for '" + key + "'");
        if (current->entries.count(key)) throw ConfigError(origin, line, "duplicate key '" + key + "' in [" + current_name + "]");
        current->entries[key] = Entry{value, line};
    }

    ExperimentConfig cfg;
    cfg.origin = origin;
    for (const auto& name : order) {
        SectionReader r(origin, name, sections.at(name));
        if (name == "source") cfg.source = read_source(r);
        if (name == "franson") cfg.franson = read_franson(r);
        if (name == "detector") cfg.detector = read_detector(r);
        if (name == "scan") cfg.scan = read_scan(r);
        if (name == "output") cfg.output = read_output(r);
        r.finish();
    }
    return cfg;
}

ExperimentConfig load_config(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError(path.string(), 0, "cannot open config file");
    return parse_config(in, path.string());
}

}  // namespace franson::app
