#include "franson/histogram.hpp"

#include <algorithm>
#include <charconv>
#include <cerrno>
#include <cmath>
#include <cstdlib>
#include <iomanip>
#include <istream>
#include <limits>
#include <numeric>
#include <ostream>
#include <sstream>

namespace franson {

Axis Axis::centered(std::string name, double center, double half_width, std::size_t count,
                    std::string unit) {
    if (count < 2) throw std::invalid_argument("axis needs at least two points");
    if (!(half_width > 0.0)) throw std::invalid_argument("axis half width must be positive");
    const double step = 2.0 * half_width / static_cast<double>(count - 1);
    return {std::move(name), center - half_width, step, count, std::move(unit)};
}

Histogram2D::Histogram2D(Axis x, Axis y) : x_(std::move(x)), y_(std::move(y)) {
    if (x_.count == 0 || y_.count == 0) throw std::invalid_argument("histogram axes must be non-empty");
    if (!(x_.step > 0.0) || !(y_.step > 0.0)) throw std::invalid_argument("axis steps must be positive");
    values_.assign(x_.count * y_.count, 0.0);
}

double Histogram2D::total() const { return std::accumulate(values_.begin(), values_.end(), 0.0); }

double Histogram2D::integral() const { return total() * x_.step * y_.step; }

double Histogram2D::max() const {
    return values_.empty() ? 0.0 : *std::max_element(values_.begin(), values_.end());
}

std::vector<double> Histogram2D::marginal_x() const {
    std::vector<double> out(x_.count, 0.0);
    for (std::size_t iy = 0; iy < y_.count; ++iy)
        for (std::size_t ix = 0; ix < x_.count; ++ix) out[ix] += at(ix, iy);
    return out;
}

std::vector<double> Histogram2D::marginal_y() const {
    std::vector<double> out(y_.count, 0.0);
    for (std::size_t iy = 0; iy < y_.count; ++iy)
        for (std::size_t ix = 0; ix < x_.count; ++ix) out[iy] += at(ix, iy);
    return out;
}

namespace {

void write_axis(std::ostream& out, const char* label, const Axis& a) {
    out << "# " << label << ": " << a.name << ',' << a.start << ',' << a.step << ',' << a.count << ','
        << a.unit << '\n';
}

std::vector<std::string> split(const std::string& s, char sep) {
    std::vector<std::string> parts;
    std::string cur;
    std::istringstream ss(s);
    while (std::getline(ss, cur, sep)) parts.push_back(cur);
    if (!s.empty() && s.back() == sep) parts.emplace_back();
    return parts;
}

std::string trim(const std::string& s) {
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string::npos) return {};
    const auto e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
}

// Underflow to a subnormal is a valid value; overflow is not.
double parse_double(const std::string& text, std::size_t line, const char* what) {
    const std::string t = trim(text);
    char* end = nullptr;
    errno = 0;
    const double v = std::strtod(t.c_str(), &end);
    const bool consumed = !t.empty() && end == t.c_str() + t.size();
    const bool overflow = errno == ERANGE && std::isinf(v);
    if (!consumed || overflow || std::isnan(v))
        throw CsvError(line, std::string("invalid ") + what + " '" + t + "'");
    return v;
}

std::size_t parse_index(const std::string& text, std::size_t line, const char* what) {
    const std::string t = trim(text);
    std::size_t v = 0;
    const auto res = std::from_chars(t.data(), t.data() + t.size(), v);
    if (res.ec != std::errc() || res.ptr != t.data() + t.size() || t.empty())
        throw CsvError(line, std::string("invalid ") + what + " '" + t + "'");
    return v;
}

Axis parse_axis(const std::string& body, std::size_t line) {
    const auto parts = split(body, ',');
    if (parts.size() != 5) throw CsvError(line, "axis header needs name,start,step,count,unit");
    Axis a;
    a.name = trim(parts[0]);
    a.start = parse_double(parts[1], line, "axis start");
    a.step = parse_double(parts[2], line, "axis step");
    a.count = parse_index(parts[3], line, "axis count");
    a.unit = trim(parts[4]);
    if (!(a.step > 0.0) || a.count == 0) throw CsvError(line, "axis step and count must be positive");
    return a;
}

}  // namespace

void write_histogram_csv(std::ostream& out, const Histogram2D& map) {
    const auto old_precision = out.precision();
    out << std::setprecision(std::numeric_limits<double>::max_digits10);
    write_axis(out, "axis_x", map.x());
    write_axis(out, "axis_y", map.y());
    out << kHistogramHeader << '\n';
    for (std::size_t iy = 0; iy < map.y().count; ++iy)
        for (std::size_t ix = 0; ix < map.x().count; ++ix)
            out << ix << ',' << iy << ',' << map.at(ix, iy) << '\n';
    out.precision(old_precision);
}

Histogram2D read_histogram_csv(std::istream& in) {
    std::string raw;
    std::size_t line = 0;
    Axis ax;
    Axis ay;
    bool have_x = false;
    bool have_y = false;
    Histogram2D map;
    std::vector<bool> seen;
    while (std::getline(in, raw)) {
        ++line;
        const std::string text = trim(raw);
        if (text.empty()) continue;
        if (text[0] == '#') {
            const std::string body = trim(text.substr(1));
            if (body.rfind("axis_x:", 0) == 0) {
                ax = parse_axis(body.substr(7), line);
                have_x = true;
            } else if (body.rfind("axis_y:", 0) == 0) {
                ay = parse_axis(body.substr(7), line);
                have_y = true;
            }
            continue;
        }
        if (!have_x || !have_y) throw CsvError(line, "data row before both axis headers");
        if (text == kHistogramHeader) continue;
        if (map.size() == 0) {
            map = Histogram2D(ax, ay);
            seen.assign(map.size(), false);
        }
        const auto parts = split(text, ',');
        if (parts.size() != 3) throw CsvError(line, "expected ix,iy,value");
        const std::size_t ix = parse_index(parts[0], line, "ix");
        const std::size_t iy = parse_index(parts[1], line, "iy");
        if (ix >= ax.count || iy >= ay.count) throw CsvError(line, "index outside axis range");
        const double value = parse_double(parts[2], line, "value");
        if (!std::isfinite(value) || value < 0.0) throw CsvError(line, "values must be finite and >= 0");
        map.at(ix, iy) = value;
        seen[iy * ax.count + ix] = true;
    }
    if (!have_x || !have_y) throw CsvError(line, "missing axis header");
    if (map.size() == 0) throw CsvError(line, "no data rows");
    if (std::find(seen.begin(), seen.end(), false) != seen.end())
        throw CsvError(line, "histogram has missing cells");
    return map;
}

}  // namespace franson
