#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <limits>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "maxagg/core.hpp"
#include "maxagg/errors.hpp"
#include "maxagg/rk.hpp"

namespace maxagg::selfsimilar {

enum class ProfileShape { Trivial, Subcritical, Supercritical, Unknown };

inline const char* to_string(ProfileShape s) {
    switch (s) {
    case ProfileShape::Trivial: return "trivial";
    case ProfileShape::Subcritical: return "subcritical";
    case ProfileShape::Supercritical: return "supercritical";
    default: return "unknown";
    }
}

struct ShootConfig {
    double D = 1.0;      // coupling constant of the unconstrained profile ODE
    double G_half = 2.0; // shooting datum G(1/2)
    double delta = 1e-6; // endpoint cutoff; the ODE is singular at 0 and 1
    double rk_tol = 1e-10;
    std::size_t n_output = 1601;

    void require_valid() const {
        if (!(D > 0.0) || !std::isfinite(D))
            throw std::invalid_argument("ShootConfig: D must be positive");
        if (!(G_half > 0.0) || !std::isfinite(G_half))
            throw std::invalid_argument("ShootConfig: G_half must be positive");
        if (!(delta > 0.0) || !(delta < 0.5))
            throw std::invalid_argument("ShootConfig: delta must lie in (0, 1/2)");
        if (!(rk_tol > 0.0))
            throw std::invalid_argument("ShootConfig: rk_tol must be positive");
        if (n_output < 33)
            throw std::invalid_argument("ShootConfig: n_output too small");
    }
};

// A profile G on [delta, 1-delta] together with the derived scalars used by
// the branch search and the diagnostics.
struct Profile {
    std::vector<double> ys;     // strictly increasing in [delta, 1-delta]
    std::vector<double> G_vals; // G at ys
    double D = 0.0;             // coupling the profile solves the ODE with
    double g_half = 0.0;        // G(1/2)
    double G1 = 0.0;            // G extrapolated to y = 1
    double tail_exp = 0.0;      // fitted p in G ~ C y^p near delta
    double N = 0.0;             // integral of G over [0, 1]
    double m = 0.0;             // integral of y G over [0, 1]
    double delta = 0.0;
};

inline core::SampledCurve profile_curve(const Profile& p) {
    return {p.ys, p.G_vals};
}

// Right-hand side of the even/odd decomposition of F(y) = G(y) y^2 about
// y = 1/2: returns (dF_e/dy, dF_o/dy).
inline std::pair<double, double> rhs_even_odd(double y, double F_e, double F_o, double D) {
    if (!(y > 0.0) || !(y < 1.0))
        throw singular_point_error("rhs_even_odd: the system is singular at y = 0 and y = 1");
    const double s = y * (1.0 - y);
    const double q = D * (F_e * F_e - F_o * F_o) / (s * s);
    return {q * (y - 0.5), 0.5 * q};
}

namespace detail {

// Sample grid for one half of (0, 1/2]: geometric spacing from delta up to
// `split` (resolving the power-law endpoint), uniform from there to 1/2.
// Returned ascending, first element delta, last element 0.5.
inline std::vector<double> half_grid(double delta, std::size_t n_half) {
    constexpr double split = 0.125;
    std::vector<double> ys;
    ys.reserve(n_half);
    if (delta < split) {
        const std::size_t n_log = std::max<std::size_t>(16, (n_half * 3) / 5);
        const std::size_t n_lin = n_half > n_log ? n_half - n_log : 8;
        const double ratio = std::log(split / delta);
        for (std::size_t k = 0; k < n_log; ++k)
            ys.push_back(delta * std::exp(ratio * static_cast<double>(k) /
                                          static_cast<double>(n_log - 1)));
        for (std::size_t k = 1; k <= n_lin; ++k)
            ys.push_back(split + (0.5 - split) * static_cast<double>(k) /
                                     static_cast<double>(n_lin));
    } else {
        for (std::size_t k = 0; k < n_half; ++k)
            ys.push_back(delta + (0.5 - delta) * static_cast<double>(k) /
                                     static_cast<double>(n_half - 1));
    }
    ys.back() = 0.5;
    std::sort(ys.begin(), ys.end());
    ys.erase(std::unique(ys.begin(), ys.end()), ys.end());
    return ys;
}

struct SweepSample {
    double y;   // position of the sweep parameter in the lower half
    double F;   // F(y)
    double Fm;  // F(1-y)
    double F_e() const { return 0.5 * (F + Fm); }
    double F_o() const { return 0.5 * (F - Fm); }
};

struct SweepResult {
    std::vector<SweepSample> samples; // at the checkpoints, in sweep order
    double int_G_low = 0.0;           // integral of G over [delta, 1/2]
    double int_G_up = 0.0;            // integral of G over [1/2, 1-delta]
    double int_yG_low = 0.0;          // integral of y G over [delta, 1/2]
    double int_yG_up = 0.0;           // integral of y G over [1/2, 1-delta]
};

// One shooting sweep. The state carries F at the point and at its mirror,
// so a single pass from 1/2 toward either endpoint covers the whole
// interval; quadratures of G and yG ride along as extra components.
// direction -1 integrates y: 1/2 -> delta, +1 integrates y: 1/2 -> 1-delta.
inline SweepResult sweep(const ShootConfig& cfg, int direction,
                         std::span<const double> checkpoints) {
    const double D = cfg.D;
    // State: F(u), F(1-u), and the four running integrals, u the sweep
    // parameter. For direction -1 u is y itself; for +1 u = position in the
    // upper half, so the mirror component holds the lower-half values.
    auto rhs = [D](double u, const std::array<double, 6>& s) -> std::array<double, 6> {
        const double omu = 1.0 - u;
        const double coupling = D * s[0] * s[1];
        const double dF = coupling / (u * omu * omu);
        const double dFm = -coupling / (u * u * omu);
        const double G_here = s[0] / (u * u);
        const double G_mirror = s[1] / (omu * omu);
        return {dF, dFm, G_here, G_mirror, u * G_here, omu * G_mirror};
    };

    const double F_half = cfg.G_half * 0.25;
    std::array<double, 6> y0{F_half, F_half, 0.0, 0.0, 0.0, 0.0};

    rk::Options opt;
    opt.rel_tol = cfg.rk_tol;
    opt.abs_tol = 1e-300; // components are multiplicative; keep control relative
    opt.min_step = 1e-12;

    SweepResult out;
    out.samples.reserve(checkpoints.size());
    std::array<double, 6> last{};
    try {
        rk::integrate<6>(rhs, y0, 0.5, checkpoints, opt,
                         [&](double u, const std::array<double, 6>& s) {
                             const double yl = direction < 0 ? u : 1.0 - u;
                             const double Fl = direction < 0 ? s[0] : s[1];
                             const double Fu = direction < 0 ? s[1] : s[0];
                             out.samples.push_back({yl, Fl, Fu});
                             last = s;
                         });
    } catch (const rk::step_underflow& e) {
        const double lo = direction < 0 ? e.t_reached() : 0.5;
        const double hi = direction < 0 ? 0.5 : e.t_reached();
        throw convergence_failure(
            "shoot: step size underflow; reached only [" + std::to_string(lo) + ", " +
                std::to_string(hi) + "]",
            lo, hi);
    }

    // The sweep runs from 1/2 outward, so the accumulated integrals carry a
    // sign for the decreasing direction.
    const double sgn = direction < 0 ? -1.0 : 1.0;
    if (direction < 0) {
        out.int_G_low = sgn * last[2];
        out.int_G_up = sgn * last[3];
        out.int_yG_low = sgn * last[4];
        out.int_yG_up = sgn * last[5];
    } else {
        out.int_G_up = sgn * last[2];
        out.int_G_low = sgn * last[3];
        out.int_yG_up = sgn * last[4];
        out.int_yG_low = sgn * last[5];
    }
    return out;
}

// Least-squares slope of ln G against ln y.
inline double log_slope(std::span<const double> ys, std::span<const double> gs) {
    double sx = 0, sz = 0, sxx = 0, sxz = 0;
    std::size_t n = 0;
    for (std::size_t i = 0; i < ys.size(); ++i) {
        if (!(gs[i] > 0.0))
            continue;
        const double x = std::log(ys[i]);
        const double z = std::log(gs[i]);
        sx += x;
        sz += z;
        sxx += x * x;
        sxz += x * z;
        ++n;
    }
    if (n < 2)
        throw insufficient_data_error("tail fit: fewer than two positive samples in the window");
    const double dn = static_cast<double>(n);
    const double denom = dn * sxx - sx * sx;
    if (denom == 0.0)
        throw insufficient_data_error("tail fit: degenerate abscissae");
    return (dn * sxz - sx * sz) / denom;
}

// Quadratic (Neville) extrapolation of the last three samples to y = 1.
inline double extrapolate_to_one(std::span<const double> ys, std::span<const double> gs) {
    const std::size_t n = ys.size();
    const double x0 = ys[n - 3], x1 = ys[n - 2], x2 = ys[n - 1];
    const double f0 = gs[n - 3], f1 = gs[n - 2], f2 = gs[n - 1];
    const double l0 = (1.0 - x1) * (1.0 - x2) / ((x0 - x1) * (x0 - x2));
    const double l1 = (1.0 - x0) * (1.0 - x2) / ((x1 - x0) * (x1 - x2));
    const double l2 = (1.0 - x0) * (1.0 - x1) / ((x2 - x0) * (x2 - x1));
    return f0 * l0 + f1 * l1 + f2 * l2;
}

} // namespace detail

// Solve the profile ODE by shooting from y = 1/2 (even/odd data
// F_e(1/2) = G_half/4, F_o(1/2) = 0) outward to delta and 1-delta, then
// complete the moments over the cut-off ends: a fitted power law on
// [0, delta] and smooth extrapolation on [1-delta, 1].
inline Profile shoot(const ShootConfig& cfg) {
    cfg.require_valid();

    const std::vector<double> lower = detail::half_grid(cfg.delta, std::max<std::size_t>(33, cfg.n_output / 2));
    // Checkpoints for the downward sweep: everything below 1/2, descending.
    std::vector<double> down(lower.rbegin() + 1, lower.rend());
    const detail::SweepResult sw = detail::sweep(cfg, -1, down);

    Profile p;
    p.D = cfg.D;
    p.g_half = cfg.G_half;
    p.delta = cfg.delta;

    const std::size_t n_half = lower.size();
    p.ys.resize(2 * n_half - 1);
    p.G_vals.resize(2 * n_half - 1);
    for (std::size_t k = 0; k < down.size(); ++k) {
        const detail::SweepSample& s = sw.samples[k];
        const std::size_t il = n_half - 2 - k;        // ascending lower index
        const std::size_t iu = n_half + k;            // ascending upper index
        p.ys[il] = s.y;
        p.G_vals[il] = s.F / (s.y * s.y);
        p.ys[iu] = 1.0 - s.y;
        p.G_vals[iu] = s.Fm / ((1.0 - s.y) * (1.0 - s.y));
    }
    p.ys[n_half - 1] = 0.5;
    p.G_vals[n_half - 1] = cfg.G_half;

    // Tail exponent from the first decade above delta.
    std::size_t fit_end = 0;
    while (fit_end < p.ys.size() && p.ys[fit_end] <= 10.0 * cfg.delta)
        ++fit_end;
    if (fit_end < 3)
        fit_end = std::min<std::size_t>(8, p.ys.size());
    bool tail_ok = true;
    try {
        p.tail_exp = detail::log_slope({p.ys.data(), fit_end}, {p.G_vals.data(), fit_end});
    } catch (const insufficient_data_error&) {
        p.tail_exp = 0.0;
        tail_ok = false;
    }

    p.G1 = detail::extrapolate_to_one(p.ys, p.G_vals);

    // Moment completion: G ~ G(delta) (y/delta)^p on [0, delta], trapezoid
    // with the extrapolated boundary value on [1-delta, 1].
    const double g_delta = tail_ok ? p.G_vals.front() : 0.0;
    const double pexp = p.tail_exp;
    const double inf = std::numeric_limits<double>::infinity();
    const double tail_N = pexp > -1.0 + 1e-12 ? g_delta * cfg.delta / (pexp + 1.0) : inf;
    const double tail_m = pexp > -2.0 + 1e-12 ? g_delta * cfg.delta * cfg.delta / (pexp + 2.0) : inf;
    const double y_top = p.ys.back();
    const double g_top = p.G_vals.back();
    const double top_N = (1.0 - y_top) * 0.5 * (g_top + p.G1);
    const double top_m = (1.0 - y_top) * 0.5 * (y_top * g_top + p.G1);

    p.N = sw.int_G_low + sw.int_G_up + tail_N + top_N;
    p.m = sw.int_yG_low + sw.int_yG_up + tail_m + top_m;
    return p;
}

// Map a profile of the unconstrained ODE to the mass-normalized solution:
// k0 = D * N is invariant, the profile is divided by its first moment and
// the coupling rescaled accordingly.
inline std::pair<double, Profile> to_normalized(const Profile& p) {
    if (!(p.m > 0.0) || !std::isfinite(p.m))
        throw std::invalid_argument("to_normalized: profile needs a positive finite first moment");
    const double k0 = p.D * p.N;
    Profile q = p;
    q.D = p.D * p.m;
    for (double& v : q.G_vals)
        v /= p.m;
    q.g_half = p.g_half / p.m;
    q.G1 = p.G1 / p.m;
    q.N = p.N / p.m;
    q.m = 1.0;
    return {k0, q};
}

struct MomentScanRow {
    double g_half = 0.0;
    double N = 0.0;
    bool ok = false;
    std::string error;
};

// One shoot per G(1/2) value; failures are recorded per row and the scan
// continues.
inline std::vector<MomentScanRow> scan_moment_curve(std::span<const double> g_half_values,
                                                    double D, ShootConfig base = {}) {
    std::vector<MomentScanRow> rows;
    rows.reserve(g_half_values.size());
    for (double g : g_half_values) {
        MomentScanRow row;
        row.g_half = g;
        try {
            ShootConfig cfg = base;
            cfg.D = D;
            cfg.G_half = g;
            row.N = shoot(cfg).N;
            row.ok = true;
        } catch (const std::exception& e) {
            row.N = std::numeric_limits<double>::quiet_NaN();
            row.error = e.what();
        }
        rows.push_back(std::move(row));
    }
    return rows;
}

// Shape classification per the observed solution families: a flat profile,
// a single interior maximum right of 1/2 (supercritical), or an interior
// minimum right of 1/2 flanked by maxima toward the endpoints
// (subcritical).
inline ProfileShape shape_classify(const Profile& p, double shape_tol = 1e-5) {
    if (p.ys.size() < 16)
        throw std::invalid_argument("shape_classify: need at least 16 samples");
    const std::size_t n = p.ys.size();

    double mean = 0.0, gmin = p.G_vals[0], gmax = p.G_vals[0];
    for (double v : p.G_vals) {
        mean += v;
        gmin = std::min(gmin, v);
        gmax = std::max(gmax, v);
    }
    mean /= static_cast<double>(n);
    if (gmax - gmin < shape_tol * std::max(std::abs(mean), 1e-300))
        return ProfileShape::Trivial;

    // Interior extrema from sign changes of the differences, with a dead
    // zone against integrator-level wiggle.
    const double dead = 1e-9 * (gmax - gmin);
    std::vector<std::pair<std::size_t, int>> extrema; // (index, +1 max / -1 min)
    int prev_sign = 0;
    std::size_t prev_idx = 0;
    for (std::size_t i = 0; i + 1 < n; ++i) {
        const double d = p.G_vals[i + 1] - p.G_vals[i];
        if (std::abs(d) <= dead)
            continue;
        const int sign = d > 0.0 ? 1 : -1;
        if (prev_sign == 1 && sign == -1)
            extrema.emplace_back(prev_idx, +1);
        else if (prev_sign == -1 && sign == 1)
            extrema.emplace_back(prev_idx, -1);
        prev_sign = sign;
        prev_idx = i + 1;
    }

    std::size_t maxima = 0, minima = 0, maxima_upper = 0;
    std::size_t upper_min_idx = 0;
    bool has_upper_min = false;
    for (auto [idx, kind] : extrema) {
        if (kind > 0) {
            ++maxima;
            if (p.ys[idx] > 0.5)
                ++maxima_upper;
        } else {
            ++minima;
            if (p.ys[idx] > 0.5) {
                has_upper_min = true;
                upper_min_idx = idx;
            }
        }
    }

    if (minima == 0 && maxima == 1 && maxima_upper == 1)
        return ProfileShape::Supercritical;

    if (has_upper_min) {
        const double vmin = p.G_vals[upper_min_idx];
        double left_max = p.G_vals[0], right_max = p.G_vals[n - 1];
        for (std::size_t i = 0; i <= upper_min_idx; ++i)
            left_max = std::max(left_max, p.G_vals[i]);
        for (std::size_t i = upper_min_idx; i < n; ++i)
            right_max = std::max(right_max, p.G_vals[i]);
        if (left_max > vmin && right_max > vmin)
            return ProfileShape::Subcritical;
    }
    return ProfileShape::Unknown;
}

struct TailCheck {
    double measured = 0.0;
    double predicted = 0.0;
};

// Measured log-slope near delta against the exponent implied by the
// boundary value: p = D*G(1) - 2.
inline TailCheck tail_exponent_check(const Profile& p) {
    if (!(p.ys.front() <= 1e-3))
        throw insufficient_data_error(
            "tail_exponent_check: profile must reach delta <= 1e-3");
    return {p.tail_exp, p.D * p.G1 - 2.0};
}

struct BranchSearchOptions {
    double k0_tol = 1e-8;
    double sub_lo_init = 1.0; // first lower-bracket candidate for the subcritical root
    double sub_lo_min = 1e-8;
    double sup_hi_init = 4.0;
    double sup_hi_cap = 1e3;
    std::size_t max_bisect = 200;
    ShootConfig shoot_cfg{}; // D is forced to 1 inside the search
};

struct BranchPair {
    Profile subcritical;  // normalized (m = 1)
    Profile supercritical; // normalized (m = 1)
    double k0 = 0.0;
    double g_half_sub = 0.0; // shooting data found, before normalization
    double g_half_sup = 0.0;
    ProfileShape shape_sub = ProfileShape::Unknown;
    ProfileShape shape_sup = ProfileShape::Unknown;
};

// Find the two profiles with D*N = k0 by bisection on G(1/2), separately on
// (0, 2) where N decreases and on (2, inf) where it grows. At the critical
// value both branches collapse onto the flat profile.
inline BranchPair find_branches(double k0_target, BranchSearchOptions opt = {}) {
    if (!std::isfinite(k0_target))
        throw std::invalid_argument("find_branches: k0 must be finite");
    const double tol = opt.k0_tol;
    ShootConfig cfg = opt.shoot_cfg;
    cfg.D = 1.0;

    if (std::abs(k0_target - 2.0) <= tol) {
        cfg.G_half = 2.0;
        auto [k0, trivial] = to_normalized(shoot(cfg));
        BranchPair pair;
        pair.subcritical = trivial;
        pair.supercritical = trivial;
        pair.k0 = k0;
        pair.g_half_sub = pair.g_half_sup = 2.0;
        pair.shape_sub = pair.shape_sup = ProfileShape::Trivial;
        return pair;
    }
    if (k0_target < 2.0)
        throw no_branch_error("find_branches: no self-similar branches for k0 < 2");

    auto N_of = [&cfg](double g_half) {
        ShootConfig c = cfg;
        c.G_half = g_half;
        return shoot(c).N;
    };

    // Bisection between a point with N above the target and one below it;
    // `increasing` states how N varies with G(1/2) on the branch.
    auto bisect = [&](double g_above, double g_below, bool increasing) {
        double lo = increasing ? g_below : g_above;
        double hi = increasing ? g_above : g_below;
        for (std::size_t it = 0; it < opt.max_bisect; ++it) {
            const double mid = 0.5 * (lo + hi);
            const double N = N_of(mid);
            if (std::abs(N - k0_target) < tol)
                return mid;
            const bool above = N > k0_target;
            if (above == increasing)
                hi = mid;
            else
                lo = mid;
        }
        return 0.5 * (lo + hi);
    };

    // Subcritical branch: N decreases from +inf to 2 as G(1/2): 0 -> 2.
    double sub_lo = opt.sub_lo_init;
    while (N_of(sub_lo) < k0_target) {
        sub_lo *= 0.5;
        if (sub_lo < opt.sub_lo_min)
            throw bracket_failure("find_branches: no subcritical bracket found",
                                  opt.sub_lo_min, 2.0);
    }
    const double g_sub = bisect(sub_lo, 2.0, false);

    // Supercritical branch: N grows from 2 as G(1/2) leaves 2 upward.
    double sup_hi = opt.sup_hi_init;
    while (N_of(sup_hi) < k0_target) {
        sup_hi *= 2.0;
        if (sup_hi > opt.sup_hi_cap)
            throw bracket_failure("find_branches: supercritical bracket exhausted", 2.0,
                                  opt.sup_hi_cap);
    }
    const double g_sup = bisect(sup_hi, 2.0, true);

    BranchPair pair;
    pair.g_half_sub = g_sub;
    pair.g_half_sup = g_sup;
    {
        ShootConfig c = cfg;
        c.G_half = g_sub;
        auto [k0, prof] = to_normalized(shoot(c));
        pair.subcritical = std::move(prof);
        pair.k0 = k0;
    }
    {
        ShootConfig c = cfg;
        c.G_half = g_sup;
        auto [k0, prof] = to_normalized(shoot(c));
        (void)k0;
        pair.supercritical = std::move(prof);
    }
    pair.shape_sub = shape_classify(pair.subcritical);
    pair.shape_sup = shape_classify(pair.supercritical);
    return pair;
}

} // namespace maxagg::selfsimilar
