#include "franson/detector.hpp"

#include <cmath>
#include <iomanip>
#include <istream>
#include <limits>
#include <ostream>
#include <random>
#include <sstream>
#include <stdexcept>
#include <string>

#include "parallel.hpp"

namespace franson {

namespace {

bool non_negative(double v) { return std::isfinite(v) && v >= 0.0; }

// One-dimensional scatter blur along a strided line of `count` cells.
void blur_line(const double* in, double* out, std::size_t count, std::size_t stride,
               const std::vector<double>& kernel) {
    const long half = static_cast<long>(kernel.size()) - 1;
    const long n = static_cast<long>(count);
    for (long j = 0; j < n; ++j) out[j * static_cast<long>(stride)] = 0.0;
    for (long src = 0; src < n; ++src) {
        const double mass = in[src * static_cast<long>(stride)];
        if (mass == 0.0) continue;
        const long lo = std::max(0L, src - half);
        const long hi = std::min(n - 1, src + half);
        double norm = 0.0;
        for (long dst = lo; dst <= hi; ++dst) norm += kernel[static_cast<std::size_t>(std::labs(dst - src))];
        for (long dst = lo; dst <= hi; ++dst)
            out[dst * static_cast<long>(stride)] +=
                mass * kernel[static_cast<std::size_t>(std::labs(dst - src))] / norm;
    }
}

std::vector<double> gaussian_kernel(double sigma, double step) {
    const auto half = static_cast<std::size_t>(std::ceil(8.0 * sigma / step));
    std::vector<double> k(half + 1);
    for (std::size_t j = 0; j <= half; ++j) {
        const double x = static_cast<double>(j) * step / sigma;
        k[j] = std::exp(-0.5 * x * x);
    }
    return k;
}

void check_resolution(double sigma, double step, const char* axis) {
    if (!non_negative(sigma)) throw std::invalid_argument(std::string("blur sigma on ") + axis + " must be >= 0");
    if (sigma > 0.0 && !(step < 0.5 * sigma))
        throw std::invalid_argument(std::string("grid too coarse for requested blur on ") + axis +
                                    ": step must be below sigma/2");
}

std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9E3779B97F4A7C15ULL;
    x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
    x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
    return x ^ (x >> 31);
}

// Gaussian average of exp(-(t-c)^T K (t-c)/2) with window covariance diag(r).
double gaussian_window_average(const Covariance2& precision, double du, double dv, double rs2, double ri2) {
    const double det_factor = (1.0 + rs2 * precision.xx) * (1.0 + ri2 * precision.yy) -
                              rs2 * ri2 * precision.xy * precision.xy;
    const Covariance2 cov = precision.inverse();
    const Covariance2 blurred{cov.xx + rs2, cov.xy, cov.yy + ri2};
    const Covariance2 p = blurred.inverse();
    const double q = p.xx * du * du + 2.0 * p.xy * du * dv + p.yy * dv * dv;
    return std::exp(-0.5 * q) / std::sqrt(det_factor);
}

}  // namespace

void ResponseModel::validate() const {
    if (!non_negative(gate_sigma_s) || !non_negative(gate_sigma_i) || !non_negative(spec_sigma_s) ||
        !non_negative(spec_sigma_i))
        throw std::invalid_argument("response widths must be finite and >= 0");
}

void CountModel::validate() const {
    if (!non_negative(pair_rate_peak) || !non_negative(background_rate))
        throw std::invalid_argument("coincidence rates must be finite and >= 0");
    for (int k = 0; k < 2; ++k)
        if (!non_negative(singles_rates[k]) || !non_negative(singles_background[k]))
            throw std::invalid_argument("singles rates must be finite and >= 0");
    if (!(dwell > 0.0) || !std::isfinite(dwell)) throw std::invalid_argument("dwell must be positive");
}

Histogram2D convolve_map(const Histogram2D& map, double sigma_x, double sigma_y) {
    check_resolution(sigma_x, map.x().step, map.x().name.empty() ? "x" : map.x().name.c_str());
    check_resolution(sigma_y, map.y().step, map.y().name.empty() ? "y" : map.y().name.c_str());
    Histogram2D out = map;
    const std::size_t nx = map.x().count;
    const std::size_t ny = map.y().count;
    if (sigma_x > 0.0) {
        const auto kernel = gaussian_kernel(sigma_x, map.x().step);
        const Histogram2D src = out;
        for (std::size_t iy = 0; iy < ny; ++iy)
            blur_line(&src.values()[iy * nx], &out.values()[iy * nx], nx, 1, kernel);
    }
    if (sigma_y > 0.0) {
        const auto kernel = gaussian_kernel(sigma_y, map.y().step);
        const Histogram2D src = out;
        for (std::size_t ix = 0; ix < nx; ++ix)
            blur_line(&src.values()[ix], &out.values()[ix], ny, nx, kernel);
    }
    return out;
}

ScanGrid ScanGrid::around(MapKind kind, const GaussianBiphoton& state, const FransonSettings& settings,
                          std::size_t n, double span) {
    if (kind == MapKind::Jsi) {
        return {Axis::centered("omega_s", state.omega_s0(), span * state.sigma_s(), n, "rad/ps"),
                Axis::centered("omega_i", state.omega_i0(), span * state.sigma_i(), n, "rad/ps")};
    }
    const WidthSummary tw = temporal_widths(state);
    const double ts = settings.arm_s.tau();
    const double ti = settings.arm_i.tau();
    return {Axis::centered("t_s", -0.5 * ts, span * tw.marginal_s + 0.5 * ts, n, "ps"),
            Axis::centered("t_i", -0.5 * ti, span * tw.marginal_i + 0.5 * ti, n, "ps")};
}

namespace {

Histogram2D render(MapKind kind, const GaussianBiphoton& state, const FransonSettings& settings,
                   const ResponseModel& response, const ScanGrid& grid) {
    Histogram2D map(grid.x, grid.y);
    const std::size_t nx = grid.x.count;
    auto& values = map.values();
    if (kind == MapKind::Jsi) {
        detail::parallel_for(values.size(), [&](std::size_t k) {
            values[k] = jsi_after(settings, state, grid.x.at(k % nx), grid.y.at(k / nx));
        });
        return convolve_map(map, response.spec_sigma_s, response.spec_sigma_i);
    }
    const JtiDecomposition jti = jti_decomposition(settings, state);
    detail::parallel_for(values.size(), [&](std::size_t k) {
        values[k] = jti.evaluate(grid.x.at(k % nx), grid.y.at(k / nx));
    });
    return convolve_map(map, response.gate_sigma_s, response.gate_sigma_i);
}

bool is_identity(const FransonSettings& s) {
    return s.arm_s.tau() == 0.0 && s.arm_s.phi() == 0.0 && s.arm_i.tau() == 0.0 && s.arm_i.phi() == 0.0;
}

}  // namespace

Histogram2D expected_scan(MapKind kind, const GaussianBiphoton& state, const FransonSettings& settings,
                          const ResponseModel& response, const ScanGrid& grid, std::optional<double> peak_rate) {
    response.validate();
    Histogram2D map = render(kind, state, settings, response, grid);
    if (!peak_rate) return map;
    if (!non_negative(*peak_rate)) throw std::invalid_argument("peak rate must be finite and >= 0");
    const double reference =
        is_identity(settings) ? map.max() : render(kind, state, FransonSettings::identity(), response, grid).max();
    const double scale = reference > 0.0 ? *peak_rate / reference : 0.0;
    for (double& v : map.values()) v *= scale;
    return map;
}

double background_visibility(double v_ideal, double mean_rate_c0, double background_b) {
    if (!(mean_rate_c0 > 0.0)) throw std::invalid_argument("mean coincidence rate must be positive");
    if (!non_negative(background_b)) throw std::invalid_argument("background must be >= 0");
    return v_ideal / (1.0 + background_b / mean_rate_c0);
}

double peak_snr(double v_ideal, double mean_rate_c0, double background_b) {
    if (!(background_b > 0.0)) throw std::invalid_argument("background must be positive for an SNR");
    return mean_rate_c0 * (1.0 + v_ideal) / background_b;
}

std::uint64_t sample_counts(double expected_rate, double dwell, std::uint64_t seed, std::uint64_t stream) {
    if (!non_negative(expected_rate)) throw std::invalid_argument("expected rate must be finite and >= 0");
    const double mean = expected_rate * dwell;
    if (mean <= 0.0) return 0;
    std::mt19937_64 engine(splitmix64(seed ^ splitmix64(stream + 0x632BE59BD9B4E019ULL)));
    std::poisson_distribution<long long> poisson(mean);
    return static_cast<std::uint64_t>(poisson(engine));
}

double gated_coincidence(const FransonSettings& settings, const GaussianBiphoton& state,
                         std::array<double, 2> gate_center, const ResponseModel& response) {
    response.validate();
    const JtiDecomposition jti = jti_decomposition(settings, state);
    const double rs2 = response.gate_sigma_s * response.gate_sigma_s;
    const double ri2 = response.gate_sigma_i * response.gate_sigma_i;
    double sum = 0.0;
    for (const auto& term : jti.terms)
        sum += term.weight * gaussian_window_average(jti.precision, gate_center[0] - term.center[0],
                                                     gate_center[1] - term.center[1], rs2, ri2);
    return sum;
}

double gated_singles(const FransonSettings& settings, const GaussianBiphoton& state, Side side,
                     double gate_delay, const ResponseModel& response) {
    response.validate();
    const JtiDecomposition jti = jti_decomposition(settings.only(side), state);
    const bool signal = side == Side::Signal;
    const Covariance2& k = jti.precision;
    // Integrate the other coordinate out, then average over this side's gate.
    const double k_other = signal ? k.yy : k.xx;
    const double k_eff = k.det() / k_other;
    const double norm_other = std::sqrt(kTwoPi / k_other);
    const double r = signal ? response.gate_sigma_s : response.gate_sigma_i;
    const double widen = 1.0 + r * r * k_eff;
    double sum = 0.0;
    for (const auto& term : jti.terms) {
        const double d = gate_delay - term.center[signal ? 0 : 1];
        sum += term.weight * norm_other * std::exp(-0.5 * d * d * k_eff / widen) / std::sqrt(widen);
    }
    return sum;
}

FransonSettings FransonDelays::settings(const GaussianBiphoton& state, double phase_s, double phase_i) const {
    return {InterferometerArm::calibrated(tau_s, phase_s, state.omega_s0()),
            InterferometerArm::calibrated(tau_i, phase_i, state.omega_i0())};
}

RateCalculator::RateCalculator(const GaussianBiphoton& state, FransonDelays delays, const CountModel& counts,
                               const ResponseModel& response, std::optional<std::array<double, 2>> gates)
    : state_(state),
      delays_(delays),
      counts_(counts),
      response_(response),
      gates_(gates.value_or(delays.selected_gate())) {
    counts_.validate();
    response_.validate();
    const FransonSettings identity = FransonSettings::identity();
    double reference = 0.0;
    if (counts_.reference == RateReference::SourcePeak) {
        reference = gated_coincidence(identity, state_, {0.0, 0.0}, response_);
    } else {
        reference = gated_coincidence(delays_.settings(state_, 0.0, 0.0), state_, gates_, response_);
    }
    scale_cc_ = reference > 0.0 ? counts_.pair_rate_peak / reference : 0.0;
    scale_s_ = counts_.singles_rates[0] / gated_singles(identity, state_, Side::Signal, 0.0, response_);
    scale_i_ = counts_.singles_rates[1] / gated_singles(identity, state_, Side::Idler, 0.0, response_);
}

ExpectedRates RateCalculator::at(double phase_s, double phase_i) const {
    const FransonSettings s = delays_.settings(state_, phase_s, phase_i);
    ExpectedRates r;
    r.coincidence = scale_cc_ * gated_coincidence(s, state_, gates_, response_) + counts_.background_rate;
    r.singles_s = scale_s_ * gated_singles(s, state_, Side::Signal, gates_[0], response_) +
                  counts_.singles_background[0];
    r.singles_i = scale_i_ * gated_singles(s, state_, Side::Idler, gates_[1], response_) +
                  counts_.singles_background[1];
    return r;
}

namespace {

CountRecord make_record(const RateCalculator& rates, const CountModel& counts, double phase_s, double phase_i,
                        std::uint64_t index) {
    const ExpectedRates r = rates.at(phase_s, phase_i);
    CountRecord rec;
    rec.phi_s = phase_s;
    rec.phi_i = phase_i;
    rec.gate_s = rates.gates()[0];
    rec.gate_i = rates.gates()[1];
    rec.dwell = counts.dwell;
    rec.expected_cc = r.coincidence * counts.dwell;
    rec.expected_ss = r.singles_s * counts.dwell;
    rec.expected_si = r.singles_i * counts.dwell;
    rec.counts_cc = sample_counts(r.coincidence, counts.dwell, counts.seed, 3 * index);
    rec.counts_ss = sample_counts(r.singles_s, counts.dwell, counts.seed, 3 * index + 1);
    rec.counts_si = sample_counts(r.singles_i, counts.dwell, counts.seed, 3 * index + 2);
    return rec;
}

}  // namespace

std::vector<CountRecord> phase_fringe_scan(const GaussianBiphoton& state, FransonDelays delays,
                                           const std::vector<double>& phases_s,
                                           const std::vector<double>& phases_i, const CountModel& counts,
                                           const ResponseModel& response,
                                           std::optional<std::array<double, 2>> gates) {
    const RateCalculator rates(state, delays, counts, response, gates);
    const std::size_t ns = phases_s.size();
    std::vector<CountRecord> records(ns * phases_i.size());
    detail::parallel_for(records.size(), [&](std::size_t k) {
        records[k] = make_record(rates, counts, phases_s[k % ns], phases_i[k / ns], k);
    });
    return records;
}

std::array<double, 4> bell_signal_phases(const BellSettings& s) {
    return {s.a, s.a + kPi, s.a_prime, s.a_prime + kPi};
}

std::array<double, 4> bell_idler_phases(const BellSettings& s) {
    return {s.b, s.b + kPi, s.b_prime, s.b_prime + kPi};
}

std::array<std::array<std::uint64_t, 4>, 4> BellTable::counts() const {
    std::array<std::array<std::uint64_t, 4>, 4> out{};
    for (std::size_t r = 0; r < 4; ++r)
        for (std::size_t c = 0; c < 4; ++c) out[r][c] = cells[r][c].counts_cc;
    return out;
}

std::array<std::array<double, 4>, 4> BellTable::expected() const {
    std::array<std::array<double, 4>, 4> out{};
    for (std::size_t r = 0; r < 4; ++r)
        for (std::size_t c = 0; c < 4; ++c) out[r][c] = cells[r][c].expected_cc;
    return out;
}

std::vector<CountRecord> BellTable::records() const {
    std::vector<CountRecord> out;
    for (const auto& row : cells) out.insert(out.end(), row.begin(), row.end());
    return out;
}

BellTable bell_experiment(const GaussianBiphoton& state, FransonDelays delays, const BellSettings& settings,
                          const CountModel& counts, const ResponseModel& response) {
    const RateCalculator rates(state, delays, counts, response);
    const auto sig = bell_signal_phases(settings);
    const auto idl = bell_idler_phases(settings);
    BellTable table;
    for (std::size_t r = 0; r < 4; ++r)
        for (std::size_t c = 0; c < 4; ++c)
            table.cells[r][c] = make_record(rates, counts, sig[c], idl[r], 4 * r + c);
    return table;
}

void write_count_records_csv(std::ostream& out, const std::vector<CountRecord>& records) {
    const auto old_precision = out.precision();
    out << std::setprecision(std::numeric_limits<double>::max_digits10);
    out << kCountRecordHeader << '\n';
    for (const CountRecord& r : records) {
        out << r.phi_s << ',' << r.phi_i << ',' << r.gate_s << ',' << r.gate_i << ',' << r.expected_cc << ','
            << r.counts_cc << ',' << r.expected_ss << ',' << r.counts_ss << ',' << r.expected_si << ','
            << r.counts_si << ',' << r.dwell << '\n';
    }
    out.precision(old_precision);
}

std::vector<CountRecord> read_count_records_csv(std::istream& in) {
    std::vector<CountRecord> records;
    std::string line;
    std::size_t number = 0;
    bool header_seen = false;
    while (std::getline(in, line)) {
        ++number;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty() || line[0] == '#') continue;
        if (!header_seen) {
            if (line != kCountRecordHeader) throw CsvError(number, "unexpected count record header");
            header_seen = true;
            continue;
        }
        std::vector<std::string> f;
        std::stringstream ss(line);
        std::string cell;
        while (std::getline(ss, cell, ',')) f.push_back(cell);
        if (f.size() != 11) throw CsvError(number, "expected 11 fields");
        auto num = [&](std::size_t k) {
            try {
                std::size_t used = 0;
                const double v = std::stod(f[k], &used);
                if (used != f[k].size() || !std::isfinite(v)) throw std::invalid_argument("bad");
                return v;
            } catch (const std::exception&) {
                throw CsvError(number, "invalid number '" + f[k] + "'");
            }
        };
        auto count = [&](std::size_t k) {
            const double v = num(k);
            if (v < 0.0 || v != std::floor(v)) throw CsvError(number, "counts must be non-negative integers");
            return static_cast<std::uint64_t>(v);
        };
        CountRecord r;
        r.phi_s = num(0);
        r.phi_i = num(1);
        r.gate_s = num(2);
        r.gate_i = num(3);
        r.expected_cc = num(4);
        r.counts_cc = count(5);
        r.expected_ss = num(6);
        r.counts_ss = count(7);
        r.expected_si = num(8);
        r.counts_si = count(9);
        r.dwell = num(10);
        records.push_back(r);
    }
    if (!header_seen) throw CsvError(number, "missing count record header");
    return records;
}

}  // namespace franson
