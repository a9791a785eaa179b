#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <span>
#include <stdexcept>
#include <utility>
#include <vector>

#include "maxagg/core.hpp"
#include "maxagg/errors.hpp"

namespace maxagg::mildsolver {

// g(t, x) on [1, T] x [0, T] with one shared spacing h = 1/cells_per_unit,
// so the discontinuity lines x = 1 and x = t fall on grid nodes of every
// row. Values above the diagonal (x > t) are structural zeros. The value
// stored at x = 1 is the limit from x >= 1; `left_at_x1` carries the limit
// from below, so quadratures never average across the jump.
struct MildGrid {
    double h = 0.0;
    std::size_t n_t = 0; // rows 0..n_t, t_a = 1 + a h
    std::size_t ix1 = 0; // column of x = 1
    std::size_t n_x = 0; // columns 0..n_x = ix1 + n_t
    std::vector<double> v;
    std::vector<double> left_at_x1;

    double time(std::size_t a) const { return 1.0 + h * static_cast<double>(a); }
    double x(std::size_t b) const { return h * static_cast<double>(b); }
    std::size_t diag_col(std::size_t a) const { return ix1 + a; }
    double final_time() const { return time(n_t); }

    double& at(std::size_t a, std::size_t b) { return v[a * (n_x + 1) + b]; }
    double at(std::size_t a, std::size_t b) const { return v[a * (n_x + 1) + b]; }
};

namespace detail {

// One-sided value of row a at column `col`: approaching from below in x
// picks the left limit on the x = 1 line.
inline double side_value(const MildGrid& g, std::size_t a, std::size_t col, bool from_below) {
    if (from_below && col == g.ix1)
        return g.left_at_x1[a];
    return g.at(a, col);
}

// Trapezoid of w(x) * g(t_a, x) over [0, t_a], split at x = 1.
template <typename Weight>
inline double row_integral(const MildGrid& g, std::size_t a, Weight&& w) {
    const std::size_t diag = g.diag_col(a);
    double acc = 0.5 * (w(0) * g.at(a, 0) + w(g.ix1) * g.left_at_x1[a]);
    for (std::size_t b = 1; b < g.ix1; ++b)
        acc += w(b) * g.at(a, b);
    if (diag > g.ix1) {
        acc += 0.5 * (w(g.ix1) * g.at(a, g.ix1) + w(diag) * g.at(a, diag));
        for (std::size_t b = g.ix1 + 1; b < diag; ++b)
            acc += w(b) * g.at(a, b);
    }
    return g.h * acc;
}

} // namespace detail

// N(t_a) = integral of g(t_a, .) over [0, t_a].
inline double slice_number(const MildGrid& g, std::size_t a) {
    return detail::row_integral(g, a, [](std::size_t) { return 1.0; });
}

// Integral of x g(t_a, x) over [0, t_a].
inline double slice_mass(const MildGrid& g, std::size_t a) {
    return detail::row_integral(g, a, [&g](std::size_t b) { return g.x(b); });
}

namespace detail {

// B[g](t_a) over grid row a: (k0 / 2N) * integral of g(t,x) g(t,t-x) dx.
// The integrand jumps where either factor crosses x = 1, i.e. at columns
// ix1 and diag - ix1; the trapezoid is split there with one-sided values.
inline double row_birth(const MildGrid& g, std::size_t a, double k0) {
    const double N = slice_number(g, a);
    if (!(N > 0.0))
        throw degenerate_state_error("row_birth: slice has N <= 0");
    const std::size_t diag = g.diag_col(a);

    // side: -1 limit approaching b from below in x, +1 from above, 0 interior.
    auto w_pair = [&](std::size_t b, int side) {
        const double f1 = side_value(g, a, b, side < 0);
        const double f2 = side_value(g, a, diag - b, side > 0);
        return f1 * f2;
    };

    std::vector<std::size_t> nodes{0};
    if (g.ix1 > 0 && g.ix1 < diag)
        nodes.push_back(g.ix1);
    if (a > 0 && a < diag)
        nodes.push_back(a); // diag - ix1
    nodes.push_back(diag);
    std::sort(nodes.begin(), nodes.end());
    nodes.erase(std::unique(nodes.begin(), nodes.end()), nodes.end());

    double acc = 0.0;
    for (std::size_t seg = 0; seg + 1 < nodes.size(); ++seg) {
        const std::size_t p = nodes[seg], q = nodes[seg + 1];
        acc += 0.5 * (w_pair(p, +1) + w_pair(q, -1));
        for (std::size_t b = p + 1; b < q; ++b)
            acc += w_pair(b, 0);
    }
    return 0.5 * k0 / N * g.h * acc;
}

// Evaluate the mild-solution operator on rows [a_begin, a_end] of dst,
// reading from src. Row 0 (the initial slice) is never touched. For each
// column the damping integral is accumulated along time with a trapezoid
// split where the characteristic s - x crosses the x = 1 line.
inline void apply_gamma_rows(const MildGrid& src, MildGrid& dst,
                             const core::LinearInterpolant& ini, double k0,
                             std::size_t a_begin, std::size_t a_end) {
    const std::size_t n_max = a_end;
    std::vector<double> N(n_max + 1), B(n_max + 1);
    for (std::size_t a = 0; a <= n_max; ++a) {
        N[a] = slice_number(src, a);
        if (!(N[a] > 0.0))
            throw degenerate_state_error("gamma: slice has N <= 0");
        B[a] = row_birth(src, a, k0);
    }

    const std::size_t ix1 = src.ix1;
    for (std::size_t b = 0; b <= src.n_x; ++b) {
        const std::size_t a_lo = b <= ix1 ? 0 : b - ix1;

        // Structural zeros above the diagonal.
        for (std::size_t a = std::max(a_begin, std::size_t{1});
             a <= a_end && b > src.diag_col(a); ++a)
            dst.at(a, b) = 0.0;
        if (a_lo > a_end)
            continue;

        const double base = b < ix1 ? ini(src.x(b)) : B[a_lo];
        const double base_left = b == ix1 ? ini(1.0) : 0.0;

        if (b > ix1 && a_lo >= a_begin)
            dst.at(a_lo, b) = base; // boundary value g(t, t) = B[g](t)

        // Integrand of the damping exponent at row a', column ix1 + a' - b;
        // at a' = b the column crosses x = 1 and the limits differ.
        auto phi_above = [&](std::size_t ap) {
            return src.at(ap, ix1 + ap - b) / N[ap];
        };
        auto phi_below = [&](std::size_t ap) {
            return side_value(src, ap, ix1 + ap - b, ap == b) / N[ap];
        };

        double acc = 0.0;
        double phi_prev = phi_above(a_lo);
        for (std::size_t a = a_lo + 1; a <= a_end; ++a) {
            acc += 0.5 * src.h * (phi_prev + phi_below(a));
            phi_prev = phi_above(a);
            if (a < a_begin)
                continue;
            const double damp = std::exp(-k0 * acc);
            dst.at(a, b) = base * damp;
            if (b == ix1)
                dst.left_at_x1[a] = base_left * damp;
        }
    }
}

} // namespace detail

// One application of the mild-solution operator to the whole grid.
inline MildGrid gamma_apply(const MildGrid& g, const core::DiscreteDensity& g_ini, double k0) {
    if (g.n_t == 0)
        return g;
    const core::LinearInterpolant ini(g_ini);
    MildGrid out = g;
    detail::apply_gamma_rows(g, out, ini, k0, 1, g.n_t);
    return out;
}

// B[g](t) on a plain uniform slice of [0, t] (size n+1, spacing t/n).
inline double B_operator(std::span<const double> g_slice, double t, double k0) {
    if (g_slice.size() < 2)
        throw std::invalid_argument("B_operator: need at least two samples");
    if (!(t > 0.0))
        throw std::invalid_argument("B_operator: t must be positive");
    const std::size_t n = g_slice.size() - 1;
    const double h = t / static_cast<double>(n);
    core::KahanSum number;
    core::KahanSum pairs;
    for (std::size_t i = 0; i <= n; ++i) {
        const double wt = (i == 0 || i == n) ? 0.5 : 1.0;
        number.add(wt * g_slice[i]);
        pairs.add(wt * g_slice[i] * g_slice[n - i]);
    }
    const double N = h * number.value();
    if (!(N > 0.0))
        throw degenerate_state_error("B_operator: slice has N <= 0");
    return 0.5 * k0 / N * h * pairs.value();
}

// Grid seeded with g0(t, x) = g_ini(x) 1{x <= 1}; T must be 1 plus an
// integer multiple of the spacing so both discontinuity lines stay
// grid-aligned.
inline MildGrid make_seed_grid(const core::DiscreteDensity& g_ini, double T,
                               std::size_t cells_per_unit) {
    if (!(T > 1.0))
        throw std::invalid_argument("make_seed_grid: T must exceed 1");
    if (cells_per_unit < 2)
        throw std::invalid_argument("make_seed_grid: need at least two cells per unit");
    const double cpu = static_cast<double>(cells_per_unit);
    const double rows = (T - 1.0) * cpu;
    const auto n_t = static_cast<std::size_t>(std::llround(rows));
    if (n_t == 0 || std::abs(rows - static_cast<double>(n_t)) > 1e-9 * cpu)
        throw std::invalid_argument(
            "make_seed_grid: T - 1 must be a positive integer multiple of the grid spacing");

    MildGrid g;
    g.h = 1.0 / cpu;
    g.n_t = n_t;
    g.ix1 = cells_per_unit;
    g.n_x = g.ix1 + n_t;
    g.v.assign((n_t + 1) * (g.n_x + 1), 0.0);
    g.left_at_x1.assign(n_t + 1, 0.0);

    const core::LinearInterpolant ini(g_ini);
    for (std::size_t a = 0; a <= n_t; ++a) {
        for (std::size_t b = 0; b <= g.ix1; ++b)
            g.at(a, b) = ini(g.x(b));
        g.left_at_x1[a] = ini(1.0);
    }
    return g;
}

struct PicardReport {
    std::size_t iterates_used = 0;
    std::vector<double> residual_history;
    bool converged = false;
    double boundary_residual = 0.0; // a posteriori sup |g(t,t) - B[g](t)|
    double mass_min = 0.0;
    double mass_max = 0.0;
};

struct PicardOptions {
    double tol = 1e-10;
    std::size_t max_iter = 200;
    std::size_t cells_per_unit = 200;
    // Beyond this horizon the fixed point is found by marching: converge a
    // time segment, freeze it, continue with the next one.
    double segment_length = 0.25;
};

struct PicardSolution {
    MildGrid grid;
    PicardReport report;
};

// Picard iteration g <- Gamma[g] until the sup-norm change drops under tol.
inline PicardSolution picard_solve(const core::DiscreteDensity& g_ini, double T, double k0,
                                   PicardOptions opt = {}) {
    if (!(k0 > 0.0) || !std::isfinite(k0))
        throw std::invalid_argument("picard_solve: k0 must be positive");
    if (std::abs(core::discrete_mass(g_ini) - 1.0) > 1e-6)
        throw std::invalid_argument("picard_solve: initial data must have unit mass");

    MildGrid grid = make_seed_grid(g_ini, T, opt.cells_per_unit);
    const core::LinearInterpolant ini(g_ini);
    PicardReport rep;

    const auto seg_rows = std::max<std::size_t>(
        1, static_cast<std::size_t>(std::llround(opt.segment_length *
                                                 static_cast<double>(opt.cells_per_unit))));
    for (std::size_t seg_begin = 1; seg_begin <= grid.n_t; seg_begin += seg_rows) {
        const std::size_t seg_end = std::min(grid.n_t, seg_begin + seg_rows - 1);
        for (;;) {
            if (rep.iterates_used >= opt.max_iter)
                throw nonconvergence_error("picard_solve: no convergence within max_iter",
                                           rep.residual_history);
            MildGrid next = grid;
            detail::apply_gamma_rows(grid, next, ini, k0, seg_begin, seg_end);
            double res = 0.0;
            for (std::size_t a = seg_begin; a <= seg_end; ++a) {
                for (std::size_t b = 0; b <= grid.n_x; ++b)
                    res = std::max(res, std::abs(next.at(a, b) - grid.at(a, b)));
                res = std::max(res, std::abs(next.left_at_x1[a] - grid.left_at_x1[a]));
            }
            grid = std::move(next);
            rep.residual_history.push_back(res);
            ++rep.iterates_used;
            if (res < opt.tol)
                break;
        }
    }
    rep.converged = true;

    for (std::size_t a = 1; a <= grid.n_t; ++a) {
        const double trace = grid.at(a, grid.diag_col(a));
        rep.boundary_residual = std::max(
            rep.boundary_residual, std::abs(trace - detail::row_birth(grid, a, k0)));
    }
    rep.mass_min = rep.mass_max = slice_mass(grid, 0);
    for (std::size_t a = 1; a <= grid.n_t; ++a) {
        const double mass = slice_mass(grid, a);
        rep.mass_min = std::min(rep.mass_min, mass);
        rep.mass_max = std::max(rep.mass_max, mass);
    }
    if (rep.mass_min < 0.5 || rep.mass_max > 1.5)
        throw error("picard_solve: mass left the invariant band [1/2, 3/2]");

    return {std::move(grid), std::move(rep)};
}

// Slice at row a in self-similar variables: y = x/t against t^2 g(t, y t).
inline core::SampledCurve rescaled_slice(const MildGrid& g, std::size_t a) {
    const double t = g.time(a);
    const std::size_t diag = g.diag_col(a);
    core::SampledCurve out;
    out.ys.reserve(diag + 1);
    out.values.reserve(diag + 1);
    for (std::size_t b = 0; b <= diag; ++b) {
        out.ys.push_back(g.x(b) / t);
        out.values.push_back(t * t * g.at(a, b));
    }
    return out;
}

} // namespace maxagg::mildsolver
