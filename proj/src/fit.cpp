#include "franson/fit.hpp"

#include <algorithm>
#include <cmath>
#include <iostream>
#include <numeric>

#include "least_squares.hpp"

namespace franson {

namespace {

double weight_for(double y, FitWeighting weighting) {
    return weighting == FitWeighting::Poisson ? 1.0 / std::max(y, 1.0) : 1.0;
}

struct Moments {
    double mean = 0.0;
    double sd = 0.0;
};

Moments weighted_moments(std::span<const double> x, std::span<const double> w) {
    double sw = 0.0, sx = 0.0, sxx = 0.0;
    for (std::size_t k = 0; k < x.size(); ++k) {
        sw += w[k];
        sx += w[k] * x[k];
    }
    if (!(sw > 0.0)) throw FitError("degenerate data: no positive mass");
    const double mean = sx / sw;
    for (std::size_t k = 0; k < x.size(); ++k) sxx += w[k] * (x[k] - mean) * (x[k] - mean);
    return {mean, std::sqrt(sxx / sw)};
}

}  // namespace

GaussianFit1D fit_gaussian_1d(std::span<const double> x, std::span<const double> y, FitWeighting weighting) {
    if (x.size() != y.size()) throw std::invalid_argument("x and y sizes differ");
    if (x.size() < 5) throw FitError("need at least 5 points for a Gaussian fit");
    const double y_min = *std::min_element(y.begin(), y.end());
    const double y_max = *std::max_element(y.begin(), y.end());
    if (!(y_max > y_min)) throw FitError("degenerate data: flat or empty profile");

    const double base = std::max(y_min, 0.0);
    std::vector<double> mass(y.size());
    for (std::size_t k = 0; k < y.size(); ++k) mass[k] = std::max(y[k] - base, 0.0);
    const Moments m = weighted_moments(x, mass);
    const double min_step = std::abs(x[1] - x[0]);
    if (!(m.sd > 0.0)) throw FitError("degenerate data: zero width");

    std::vector<double> sqrt_w(y.size());
    for (std::size_t k = 0; k < y.size(); ++k) sqrt_w[k] = std::sqrt(weight_for(y[k], weighting));

    const auto n = static_cast<Eigen::Index>(x.size());
    auto model = [&](const Eigen::VectorXd& p, Eigen::VectorXd& r, Eigen::MatrixXd& jac) {
        const double a = p[0], mu = p[1], s = p[2], c = p[3];
        for (Eigen::Index k = 0; k < n; ++k) {
            const double d = x[static_cast<std::size_t>(k)] - mu;
            const double g = std::exp(-0.5 * d * d / (s * s));
            const double w = sqrt_w[static_cast<std::size_t>(k)];
            r[k] = w * (a * g + c - y[static_cast<std::size_t>(k)]);
            jac(k, 0) = w * g;
            jac(k, 1) = w * a * g * d / (s * s);
            jac(k, 2) = w * a * g * d * d / (s * s * s);
            jac(k, 3) = w;
        }
    };
    Eigen::VectorXd p0(4);
    p0 << y_max - base, m.mean, std::max(m.sd, min_step), base;
    const detail::LsqResult res = detail::levenberg_marquardt(model, p0, n);
    if (!res.converged || !res.params.allFinite()) throw FitError("Gaussian fit did not converge");

    GaussianFit1D out;
    out.amplitude = res.params[0];
    out.center = res.params[1];
    out.sigma = std::abs(res.params[2]);
    out.offset = res.params[3];
    out.err_amplitude = std::sqrt(std::max(res.covariance(0, 0), 0.0));
    out.err_center = std::sqrt(std::max(res.covariance(1, 1), 0.0));
    out.err_sigma = std::sqrt(std::max(res.covariance(2, 2), 0.0));
    out.err_offset = std::sqrt(std::max(res.covariance(3, 3), 0.0));
    if (!(out.amplitude > 0.0)) throw FitError("Gaussian fit returned non-positive amplitude");
    return out;
}

namespace {

std::vector<double> axis_points(const Axis& a) {
    std::vector<double> out(a.count);
    for (std::size_t k = 0; k < a.count; ++k) out[k] = a.at(k);
    return out;
}

void require_fittable(const Histogram2D& map) {
    if (map.x().count < 5 || map.y().count < 5) throw FitError("map needs at least 5x5 bins");
    if (!(map.max() > 0.0)) throw FitError("degenerate map: no positive mass");
}

}  // namespace

GaussianFit2D fit_gaussian_2d(const Histogram2D& map, FitWeighting weighting) {
    require_fittable(map);
    const auto xs = axis_points(map.x());
    const auto ys = axis_points(map.y());
    const GaussianFit1D fx = fit_gaussian_1d(xs, map.marginal_x(), weighting);
    const GaussianFit1D fy = fit_gaussian_1d(ys, map.marginal_y(), weighting);

    // Seed rho from the weighted correlation of the map above its minimum.
    const auto& v = map.values();
    const double base = std::max(*std::min_element(v.begin(), v.end()), 0.0);
    double sw = 0.0, sxy = 0.0, sxx = 0.0, syy = 0.0;
    const std::size_t nx = map.x().count;
    for (std::size_t k = 0; k < v.size(); ++k) {
        const double w = std::max(v[k] - base, 0.0);
        const double dx = xs[k % nx] - fx.center;
        const double dy = ys[k / nx] - fy.center;
        sw += w;
        sxy += w * dx * dy;
        sxx += w * dx * dx;
        syy += w * dy * dy;
    }
    const double rho0 = std::clamp(sxy / std::sqrt(sxx * syy), -0.999, 0.999);

    std::vector<double> sqrt_w(v.size());
    for (std::size_t k = 0; k < v.size(); ++k) sqrt_w[k] = std::sqrt(weight_for(v[k], weighting));

    const auto n = static_cast<Eigen::Index>(v.size());
    auto model = [&](const Eigen::VectorXd& p, Eigen::VectorXd& r, Eigen::MatrixXd& jac) {
        const double a = p[0], rho = std::tanh(p[1]), c = p[2];
        const double d = 1.0 - rho * rho;
        for (Eigen::Index k = 0; k < n; ++k) {
            const auto kk = static_cast<std::size_t>(k);
            const double xx = (xs[kk % nx] - fx.center) / fx.sigma;
            const double yy = (ys[kk / nx] - fy.center) / fy.sigma;
            const double quad = xx * xx + yy * yy - 2.0 * rho * xx * yy;
            const double g = std::exp(-0.5 * quad / d);
            const double dg_drho = g * (xx * yy / d - rho * quad / (d * d));
            const double w = sqrt_w[kk];
            r[k] = w * (a * g + c - v[kk]);
            jac(k, 0) = w * g;
            jac(k, 1) = w * a * dg_drho * d;  // d rho / du = 1 - rho^2
            jac(k, 2) = w;
        }
    };
    Eigen::VectorXd p0(3);
    p0 << map.max() - base, std::atanh(rho0), base;
    const detail::LsqResult res = detail::levenberg_marquardt(model, p0, n);
    if (!res.converged || !res.params.allFinite()) throw FitError("2D Gaussian fit did not converge");

    GaussianFit2D out;
    out.center_x = fx.center;
    out.center_y = fy.center;
    out.sigma_x = fx.sigma;
    out.sigma_y = fy.sigma;
    out.err_center_x = fx.err_center;
    out.err_center_y = fy.err_center;
    out.err_sigma_x = fx.err_sigma;
    out.err_sigma_y = fy.err_sigma;
    out.amplitude = res.params[0];
    out.rho = std::tanh(res.params[1]);
    out.rho_unclamped = out.rho;
    out.offset = res.params[2];
    out.err_amplitude = std::sqrt(std::max(res.covariance(0, 0), 0.0));
    out.err_rho = (1.0 - out.rho * out.rho) * std::sqrt(std::max(res.covariance(1, 1), 0.0));
    out.err_offset = std::sqrt(std::max(res.covariance(2, 2), 0.0));
    return out;
}

namespace {

// Projects onto start + i*step bins with linear (cloud-in-cell) sharing. When
// both axis steps are equal the projected coordinates fall on the bin lattice
// and no sharing happens.
GaussianFit1D fit_projection(const Histogram2D& map, double sign, FitWeighting weighting) {
    const Axis& ax = map.x();
    const Axis& ay = map.y();
    const double step = std::max(ax.step, ay.step);
    const double c_first = ax.start + sign * ay.start;
    const double c_a = c_first;
    const double c_b = ax.stop() + sign * ay.stop();
    const double c_c = ax.start + sign * ay.stop();
    const double c_d = ax.stop() + sign * ay.start;
    const double lo = std::min({c_a, c_b, c_c, c_d});
    const double hi = std::max({c_a, c_b, c_c, c_d});
    const auto bins = static_cast<std::size_t>(std::floor((hi - lo) / step + 1e-9)) + 2;
    std::vector<double> hist(bins, 0.0);
    for (std::size_t iy = 0; iy < ay.count; ++iy) {
        for (std::size_t ix = 0; ix < ax.count; ++ix) {
            const double pos = (ax.at(ix) + sign * ay.at(iy) - lo) / step;
            const double base = std::floor(pos + 1e-9);
            double frac = pos - base;
            if (frac < 1e-9) frac = 0.0;
            const auto b = static_cast<std::size_t>(base);
            hist[b] += (1.0 - frac) * map.at(ix, iy);
            if (frac > 0.0) hist[b + 1] += frac * map.at(ix, iy);
        }
    }
    std::vector<double> centers(bins);
    for (std::size_t k = 0; k < bins; ++k) centers[k] = lo + step * static_cast<double>(k);
    return fit_gaussian_1d(centers, hist, weighting);
}

}  // namespace

DiagonalWidths diagonal_widths(const Histogram2D& map, FitWeighting weighting) {
    require_fittable(map);
    const GaussianFit1D plus = fit_projection(map, +1.0, weighting);
    const GaussianFit1D minus = fit_projection(map, -1.0, weighting);
    return {plus.sigma, minus.sigma, plus.err_sigma, minus.err_sigma};
}

namespace {

std::vector<std::size_t> slice_indices(const Axis& axis, double center, double sigma, std::size_t slices) {
    std::vector<std::size_t> out;
    for (std::size_t k = 0; k < slices; ++k) {
        const double frac = slices == 1 ? 0.0 : -1.0 + 2.0 * static_cast<double>(k) / static_cast<double>(slices - 1);
        const double pos = (center + frac * sigma - axis.start) / axis.step;
        const auto idx = static_cast<long>(std::lround(pos));
        if (idx < 0 || idx >= static_cast<long>(axis.count)) throw FitError("heralding slice outside the map");
        out.push_back(static_cast<std::size_t>(idx));
    }
    return out;
}

}  // namespace

HeraldedWidths heralded_widths(const Histogram2D& map, const GaussianFit2D& fit, std::size_t slices,
                               FitWeighting weighting) {
    require_fittable(map);
    if (slices == 0) throw std::invalid_argument("need at least one slice");
    const auto xs = axis_points(map.x());
    const auto ys = axis_points(map.y());
    HeraldedWidths out;

    std::vector<double> line(map.x().count);
    for (std::size_t iy : slice_indices(map.y(), fit.center_y, fit.sigma_y, slices)) {
        for (std::size_t ix = 0; ix < map.x().count; ++ix) line[ix] = map.at(ix, iy);
        const GaussianFit1D f = fit_gaussian_1d(xs, line, weighting);
        out.x += f.sigma;
        out.err_x += f.err_sigma;
    }
    line.assign(map.y().count, 0.0);
    for (std::size_t ix : slice_indices(map.x(), fit.center_x, fit.sigma_x, slices)) {
        for (std::size_t iy = 0; iy < map.y().count; ++iy) line[iy] = map.at(ix, iy);
        const GaussianFit1D f = fit_gaussian_1d(ys, line, weighting);
        out.y += f.sigma;
        out.err_y += f.err_sigma;
    }
    const auto n = static_cast<double>(slices);
    out.x /= n;
    out.y /= n;
    out.err_x /= n;
    out.err_y /= n;
    return out;
}

double deconvolve_width(double sigma_meas, double sigma_resp) {
    if (!(sigma_resp >= 0.0)) throw std::invalid_argument("response width must be >= 0");
    if (!(sigma_meas > sigma_resp))
        throw std::invalid_argument("response width must be smaller than the measured width");
    return std::sqrt(sigma_meas * sigma_meas - sigma_resp * sigma_resp);
}

GaussianFit2D deconvolve_covariance(const GaussianFit2D& fit, double resp_x, double resp_y) {
    GaussianFit2D out = fit;
    out.sigma_x = deconvolve_width(fit.sigma_x, resp_x);
    out.sigma_y = deconvolve_width(fit.sigma_y, resp_y);
    out.err_sigma_x = fit.err_sigma_x * fit.sigma_x / out.sigma_x;
    out.err_sigma_y = fit.err_sigma_y * fit.sigma_y / out.sigma_y;
    const double stretch = (fit.sigma_x * fit.sigma_y) / (out.sigma_x * out.sigma_y);
    const double rho = fit.rho * stretch;
    out.rho_unclamped = rho;
    out.err_rho = fit.err_rho * stretch;
    if (std::abs(rho) >= 1.0) {
        out.clamped = true;
        out.rho = std::copysign(kMaxAbsRho, rho);
        std::cerr << "warning: deconvolved correlation " << rho << " clamped to " << out.rho << '\n';
    } else {
        out.rho = rho;
    }
    return out;
}

std::vector<PhaseBin> bin_by_phase_sum(const std::vector<CountRecord>& records, std::size_t bins,
                                       Channel channel) {
    if (bins == 0) throw std::invalid_argument("need at least one phase bin");
    std::vector<PhaseBin> out(bins);
    const double width = kTwoPi / static_cast<double>(bins);
    for (std::size_t k = 0; k < bins; ++k) out[k].phase = width * static_cast<double>(k);
    for (const CountRecord& r : records) {
        double phase = std::fmod(r.phi_s + r.phi_i, kTwoPi);
        if (phase < 0.0) phase += kTwoPi;
        // Bins are centered on k * width.
        const auto k = static_cast<std::size_t>(std::floor(phase / width + 0.5)) % bins;
        const std::uint64_t c = channel == Channel::Coincidence     ? r.counts_cc
                                : channel == Channel::SinglesSignal ? r.counts_ss
                                                                    : r.counts_si;
        out[k].counts += static_cast<double>(c);
        out[k].dwell += r.dwell;
    }
    std::vector<PhaseBin> filled;
    for (PhaseBin& b : out) {
        if (b.dwell <= 0.0) continue;
        b.rate = b.counts / b.dwell;
        b.rate_err = std::sqrt(std::max(b.counts, 1.0)) / b.dwell;
        filled.push_back(b);
    }
    return filled;
}

FringeFit fit_fringe(const std::vector<PhaseBin>& bins) {
    if (bins.size() < 5) throw FitError("fringe fit needs at least 5 phase bins");
    std::vector<double> phases;
    for (const PhaseBin& b : bins) {
        double p = std::fmod(b.phase, kTwoPi);
        if (p < 0.0) p += kTwoPi;
        phases.push_back(p);
    }
    std::sort(phases.begin(), phases.end());
    double widest_gap = phases.front() + kTwoPi - phases.back();
    for (std::size_t k = 1; k < phases.size(); ++k) widest_gap = std::max(widest_gap, phases[k] - phases[k - 1]);
    if (widest_gap > kTwoPi / 5.0 + 1e-9) throw FitError("phase bins do not cover a full fringe period");
    const bool any_counts = std::any_of(bins.begin(), bins.end(), [](const PhaseBin& b) { return b.counts > 0.0; });
    if (!any_counts) throw FitError("no counts in any phase bin");

    Eigen::Matrix3d normal = Eigen::Matrix3d::Zero();
    Eigen::Vector3d rhs = Eigen::Vector3d::Zero();
    for (const PhaseBin& b : bins) {
        const double w = 1.0 / (b.rate_err * b.rate_err);
        const Eigen::Vector3d row(1.0, std::cos(b.phase), std::sin(b.phase));
        normal += w * row * row.transpose();
        rhs += w * b.rate * row;
    }
    const Eigen::Matrix3d cov = normal.inverse();
    const Eigen::Vector3d coef = cov * rhs;
    const double c0 = coef[0];
    const double a = coef[1];
    const double s = coef[2];
    if (!(c0 > 0.0)) throw FitError("fringe fit gave a non-positive mean level");
    const double amp = std::hypot(a, s);

    FringeFit out;
    out.c0 = c0;
    out.visibility_unclamped = amp / c0;
    out.visibility = std::clamp(out.visibility_unclamped, 0.0, 1.0);
    out.phase0 = std::atan2(s, a);
    out.err_c0 = std::sqrt(cov(0, 0));
    if (amp > 0.0) {
        const Eigen::Vector3d grad(-amp / (c0 * c0), a / (amp * c0), s / (amp * c0));
        out.err_visibility = std::sqrt(grad.dot(cov * grad));
        const Eigen::Vector3d gphase(0.0, -s / (amp * amp), a / (amp * amp));
        out.err_phase0 = std::sqrt(gphase.dot(cov * gphase));
    } else {
        out.err_visibility = std::sqrt(0.5 * (cov(1, 1) + cov(2, 2))) / c0;
        out.err_phase0 = kPi;
    }
    return out;
}

Correlator chsh_correlation(double r_pp, double r_pm, double r_mp, double r_mm) {
    if (r_pp < 0.0 || r_pm < 0.0 || r_mp < 0.0 || r_mm < 0.0)
        throw std::invalid_argument("counts must be non-negative");
    const double concordant = r_pp + r_mm;
    const double discordant = r_pm + r_mp;
    const double total = concordant + discordant;
    if (!(total > 0.0)) throw std::invalid_argument("correlation needs a positive total count");
    return {(concordant - discordant) / total, 2.0 * std::sqrt(concordant * discordant / (total * total * total))};
}

BellResult chsh_parameter(const std::array<Correlator, 4>& e) {
    BellResult out;
    out.correlators = e;
    out.s = std::abs(e[0].value + e[1].value + e[2].value - e[3].value);
    double var = 0.0;
    for (const Correlator& c : e) var += c.error * c.error;
    out.sigma_s = std::sqrt(var);
    return out;
}

BellResult evaluate_bell(const CountTable& t) {
    // Block (rows r, r+1) x (columns c, c+1): [r][c] is (+,+), [r+1][c+1] is (-,-),
    // [r+1][c] is signal + / idler -, [r][c+1] is signal - / idler +.
    auto block = [&](std::size_t r, std::size_t c) {
        return chsh_correlation(t[r][c], t[r + 1][c], t[r][c + 1], t[r + 1][c + 1]);
    };
    return chsh_parameter({block(0, 0), block(2, 0), block(0, 2), block(2, 2)});
}

CountTable to_count_table(const std::array<std::array<std::uint64_t, 4>, 4>& counts) {
    CountTable out{};
    for (std::size_t r = 0; r < 4; ++r)
        for (std::size_t c = 0; c < 4; ++c) out[r][c] = static_cast<double>(counts[r][c]);
    return out;
}

CountTable measured_bell_counts() {
    // Columns: signal 7pi/4, 3pi/4, pi/4, 5pi/4. Rows: idler 0, pi, pi/2, 3pi/2.
    return {{{1292, 367, 1419, 336},  //
             {315, 1331, 329, 1394},  //
             {1423, 294, 358, 1333},  //
             {301, 1469, 1401, 335}}};
}

}  // namespace franson
