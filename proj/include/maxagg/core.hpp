#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "maxagg/errors.hpp"

namespace maxagg::core {

// Model constants: the coagulation rate constant k0 and the total mass,
// which the nondimensionalization fixes at 1.
struct Params {
    double k0 = 1.0;
    double total_mass = 1.0;

    void require_valid() const {
        if (!(k0 > 0.0) || !std::isfinite(k0))
            throw std::invalid_argument("Params: k0 must be a positive finite number");
        if (total_mass != 1.0)
            throw std::invalid_argument("Params: total_mass is fixed at 1");
    }
};

// Uniform size grid. Cell i (1-based) covers (eps*(i-1), eps*i]; values are
// attached to the midpoint representative x_i = eps*(i - 1/2).
struct Grid1D {
    double cell_width = 0.0;
    std::size_t n_cells = 0;

    Grid1D() = default;
    Grid1D(double eps, std::size_t n) : cell_width(eps), n_cells(n) {
        if (!(eps > 0.0) || !std::isfinite(eps))
            throw std::invalid_argument("Grid1D: cell width must be positive and finite");
        if (n < 1)
            throw std::invalid_argument("Grid1D: need at least one cell");
    }

    // 0-based cell index -> midpoint representative.
    double x(std::size_t idx) const { return cell_width * (static_cast<double>(idx) + 0.5); }
    double upper_edge() const { return cell_width * static_cast<double>(n_cells); }
};

// Neumaier-compensated accumulator. Terms are added in a fixed order, so
// results are bit-reproducible, and the compensation keeps the rounding
// error at a few ulps independent of the number of terms.
class KahanSum {
public:
    void add(double v) {
        const double t = sum_ + v;
        if (std::abs(sum_) >= std::abs(v))
            comp_ += (sum_ - t) + v;
        else
            comp_ += (v - t) + sum_;
        sum_ = t;
    }

    double value() const { return sum_ + comp_; }

private:
    double sum_ = 0.0;
    double comp_ = 0.0;
};

// Number density per unit size, piecewise constant over the cells of a
// uniform grid.
struct DiscreteDensity {
    Grid1D grid;
    std::vector<double> values; // one entry per cell, all >= 0

    void require_valid() const {
        if (values.size() != grid.n_cells)
            throw std::invalid_argument("DiscreteDensity: value count does not match the grid");
        for (double v : values) {
            if (!(v >= 0.0) || !std::isfinite(v))
                throw std::invalid_argument("DiscreteDensity: values must be finite and nonnegative");
        }
    }
};

// eps * sum_i x_i * values[i]
inline double discrete_mass(const DiscreteDensity& d) {
    KahanSum s;
    for (std::size_t i = 0; i < d.values.size(); ++i)
        s.add(d.grid.x(i) * d.values[i]);
    return d.grid.cell_width * s.value();
}

// eps * sum_i values[i]
inline double discrete_number(const DiscreteDensity& d) {
    KahanSum s;
    for (double v : d.values)
        s.add(v);
    return d.grid.cell_width * s.value();
}

// Gaussian initial data on [0, 1], truncated to the unit interval and then
// rescaled so that the discrete mass is exactly 1.
inline DiscreteDensity make_gaussian_initial(double center, double dispersion, std::size_t n_cells) {
    if (!(center > 0.0) || !(center < 1.0))
        throw std::invalid_argument("make_gaussian_initial: center must lie in (0, 1)");
    if (!(dispersion > 0.0) || !std::isfinite(dispersion))
        throw std::invalid_argument("make_gaussian_initial: dispersion must be positive");
    if (n_cells < 2)
        throw std::invalid_argument("make_gaussian_initial: need at least two cells");

    DiscreteDensity d;
    d.grid = Grid1D(1.0 / static_cast<double>(n_cells), n_cells);
    d.values.resize(n_cells);
    for (std::size_t i = 0; i < n_cells; ++i) {
        const double z = (d.grid.x(i) - center) / dispersion;
        d.values[i] = std::exp(-0.5 * z * z);
    }
    const double mass = discrete_mass(d);
    for (double& v : d.values)
        v /= mass;
    return d;
}

// Piecewise-linear interpolant through the cell representatives, extended
// by constants beyond the first and last representative.
class LinearInterpolant {
public:
    LinearInterpolant(double cell_width, std::vector<double> values)
        : eps_(cell_width), values_(std::move(values)) {
        if (!(eps_ > 0.0) || values_.empty())
            throw std::invalid_argument("LinearInterpolant: need a positive cell width and data");
    }

    explicit LinearInterpolant(const DiscreteDensity& d)
        : LinearInterpolant(d.grid.cell_width, d.values) {}

    double operator()(double x) const {
        // Fractional index into the representatives x_i = eps*(i + 1/2).
        const double u = x / eps_ - 0.5;
        if (u <= 0.0)
            return values_.front();
        const double last = static_cast<double>(values_.size() - 1);
        if (u >= last)
            return values_.back();
        const auto i = static_cast<std::size_t>(u);
        const double w = u - static_cast<double>(i);
        return values_[i] * (1.0 - w) + values_[i + 1] * w;
    }

private:
    double eps_;
    std::vector<double> values_;
};

// A curve sampled at strictly increasing abscissae. Common currency between
// the box model, the profile solver, and the diagnostics.
struct SampledCurve {
    std::vector<double> ys;
    std::vector<double> values;
};

// Linear interpolation on a sampled curve, clamped to the end values
// outside the sampled range.
inline double sample_at(const SampledCurve& c, double y) {
    if (c.ys.empty())
        throw std::invalid_argument("sample_at: empty curve");
    if (y <= c.ys.front())
        return c.values.front();
    if (y >= c.ys.back())
        return c.values.back();
    const auto it = std::upper_bound(c.ys.begin(), c.ys.end(), y);
    const auto i = static_cast<std::size_t>(it - c.ys.begin()) - 1;
    const double w = (y - c.ys[i]) / (c.ys[i + 1] - c.ys[i]);
    return c.values[i] * (1.0 - w) + c.values[i + 1] * w;
}

} // namespace maxagg::core
