#include <doctest.h>

#include <limits>
#include <sstream>

#include "franson/histogram.hpp"

using namespace franson;
using doctest::Approx;

namespace {

Histogram2D sample_map() {
    Histogram2D h(Axis{"t_s", -1.0, 0.1, 4, "ps"}, Axis{"t_i", 2.0, 0.25, 3, "ps"});
    for (std::size_t iy = 0; iy < 3; ++iy) {
        for (std::size_t ix = 0; ix < 4; ++ix) h.at(ix, iy) = 0.1 * static_cast<double>(ix) + 1.0 / 3.0 * static_cast<double>(iy);
    }
    return h;
}

}  // namespace

TEST_CASE("axis helpers") {
    const Axis a = Axis::centered("w", 10.0, 2.0, 5, "rad/ps");
    CHECK(a.start == Approx(8.0));
    CHECK(a.step == Approx(1.0));
    CHECK(a.stop() == Approx(12.0));
    CHECK(a.at(2) == Approx(10.0));
}

TEST_CASE("histogram sums and marginals") {
    const Histogram2D h = sample_map();
    CHECK(h.size() == 12);
    CHECK(h.max() == Approx(0.3 + 2.0 / 3.0));
    CHECK(h.total() == Approx(3 * 0.6 + 4.0 * (1.0 / 3.0 + 2.0 / 3.0)));
    CHECK(h.integral() == Approx(h.total() * 0.1 * 0.25));
    const auto mx = h.marginal_x();
    REQUIRE(mx.size() == 4);
    CHECK(mx[1] == Approx(0.3 + 1.0));
    const auto my = h.marginal_y();
    REQUIRE(my.size() == 3);
    CHECK(my[0] == Approx(0.6));
}

TEST_CASE("csv round trip is exact") {
    const Histogram2D h = sample_map();
    std::stringstream s;
    write_histogram_csv(s, h);
    const std::string text = s.str();
    CHECK(text.rfind("# axis_x: t_s,", 0) == 0);
    const Histogram2D back = read_histogram_csv(s);
    CHECK(back.x().name == "t_s");
    CHECK(back.y().unit == "ps");
    CHECK(back.x().step == h.x().step);
    CHECK(back.values() == h.values());
    std::stringstream again;
    write_histogram_csv(again, back);
    CHECK(again.str() == text);
}

TEST_CASE("malformed csv reports the line") {
    const Histogram2D h = sample_map();
    std::stringstream s;
    write_histogram_csv(s, h);
    std::string text = s.str();
    // Corrupt the fifth line (second data row).
    std::size_t pos = 0;
    for (int k = 0; k < 4; ++k) pos = text.find('\n', pos) + 1;
    text.insert(pos, "x");
    std::stringstream bad(text);
    try {
        read_histogram_csv(bad);
        FAIL("expected a CsvError");
    } catch (const CsvError& e) {
        CHECK(e.line() == 5);
    }
    std::stringstream missing("# axis_x: a,0,1,2,u\n0,0,1\n");
    CHECK_THROWS_AS(read_histogram_csv(missing), CsvError);
}

TEST_CASE("subnormal values survive the round trip") {
    Histogram2D h(Axis{"x", 0.0, 1.0, 2, "ps"}, Axis{"y", 0.0, 1.0, 1, "ps"});
    h.at(0, 0) = 6.5736511847180238e-311;
    h.at(1, 0) = std::numeric_limits<double>::denorm_min();
    std::stringstream s;
    write_histogram_csv(s, h);
    CHECK(read_histogram_csv(s).values() == h.values());
    std::stringstream huge("# axis_x: x,0,1,1,ps\n# axis_y: y,0,1,1,ps\n0,0,1e999\n");
    CHECK_THROWS_AS(read_histogram_csv(huge), CsvError);
}
