// Rectangular 2D grids with axis metadata, plus their CSV form:
//
//   # axis_x: name,start,step,count,unit
//   # axis_y: name,start,step,count,unit
//   ix,iy,value
//   ...

#pragma once

#include <cstddef>
#include <iosfwd>
#include <stdexcept>
#include <string>
#include <vector>

namespace franson {

struct Axis {
    std::string name;
    double start = 0.0;
    double step = 1.0;
    std::size_t count = 0;
    std::string unit;

    double at(std::size_t index) const { return start + step * static_cast<double>(index); }
    double stop() const { return at(count == 0 ? 0 : count - 1); }

    /// count points centered on `center` spanning +-half_width.
    static Axis centered(std::string name, double center, double half_width, std::size_t count,
                         std::string unit);
};

class Histogram2D {
public:
    Histogram2D() = default;
    Histogram2D(Axis x, Axis y);

    const Axis& x() const { return x_; }
    const Axis& y() const { return y_; }
    std::size_t size() const { return values_.size(); }

    double& at(std::size_t ix, std::size_t iy) { return values_[iy * x_.count + ix]; }
    double at(std::size_t ix, std::size_t iy) const { return values_[iy * x_.count + ix]; }

    const std::vector<double>& values() const { return values_; }
    std::vector<double>& values() { return values_; }

    /// Riemann sum of values times cell area.
    double integral() const;
    double max() const;
    double total() const;

    /// Sum over y (resp. x) for each x (resp. y) bin.
    std::vector<double> marginal_x() const;
    std::vector<double> marginal_y() const;

private:
    Axis x_;
    Axis y_;
    std::vector<double> values_;
};

/// Parse failure with the 1-based line number of the offending row.
class CsvError : public std::runtime_error {
public:
    CsvError(std::size_t line, const std::string& what)
        : std::runtime_error("line " + std::to_string(line) + ": " + what), line_(line) {}
    std::size_t line() const { return line_; }

private:
    std::size_t line_;
};

inline constexpr const char* kHistogramHeader = "ix,iy,value";

void write_histogram_csv(std::ostream& out, const Histogram2D& map);
Histogram2D read_histogram_csv(std::istream& in);

}  // namespace franson
